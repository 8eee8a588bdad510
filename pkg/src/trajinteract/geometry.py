"""Constant-acceleration motion, closest point of approach and rigid frame changes."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import InvalidInputError
from .state import AgentState, Vec2, wrap_angle

# Below this |da|^2 (or |dv|^2) the cubic is treated as degenerate.
DEGENERATE_EPS = 1e-12
TIE_RTOL = 1e-9


@dataclass(frozen=True)
class SanityLimits:
    max_speed: float = 100.0
    max_accel: float = 50.0


DEFAULT_LIMITS = SanityLimits()


@dataclass(frozen=True, slots=True)
class CaState:
    position: Vec2
    velocity: Vec2
    acceleration: Vec2

    @classmethod
    def from_agent(cls, state: AgentState) -> CaState:
        return cls(state.position, state.velocity, state.acceleration)


def check_sanity(velocity: Vec2, acceleration: Vec2,
                 limits: SanityLimits = DEFAULT_LIMITS) -> None:
    """Raise InvalidInputError if speed or acceleration magnitude exceeds ``limits``."""
    speed = velocity.norm()
    if speed > limits.max_speed:
        raise InvalidInputError(f"speed {speed:g} m/s exceeds limit {limits.max_speed:g}")
    accel = acceleration.norm()
    if accel > limits.max_accel:
        raise InvalidInputError(f"acceleration {accel:g} m/s^2 exceeds limit {limits.max_accel:g}")


@dataclass(frozen=True, slots=True)
class Pose:
    origin: Vec2
    heading: float

    def __post_init__(self):
        if not math.isfinite(self.heading):
            raise InvalidInputError("non-finite pose heading")
        object.__setattr__(self, "heading", wrap_angle(self.heading))

    @classmethod
    def of(cls, state: AgentState) -> Pose:
        return cls(state.position, state.heading)


def ca_propagate(s: CaState, tau: float) -> Vec2:
    """Position after ``tau`` seconds under constant acceleration."""
    if not math.isfinite(tau) or tau < 0:
        raise InvalidInputError(f"tau must be finite and >= 0, got {tau}")
    half_t2 = 0.5 * tau * tau
    return Vec2(
        s.position.x + s.velocity.x * tau + s.acceleration.x * half_t2,
        s.position.y + s.velocity.y * tau + s.acceleration.y * half_t2,
    )


def _relative(target: CaState, other: CaState) -> tuple[Vec2, Vec2, Vec2]:
    return (other.position - target.position,
            other.velocity - target.velocity,
            other.acceleration - target.acceleration)


def squared_gap(target: CaState, other: CaState, tau: float) -> float:
    """q(tau): squared distance between both CA rollouts at time ``tau`` (any sign)."""
    dp, dv, da = _relative(target, other)
    rx = dp.x + tau * (dv.x + 0.5 * da.x * tau)
    ry = dp.y + tau * (dv.y + 0.5 * da.y * tau)
    return rx * rx + ry * ry


def real_cubic_roots(a3: float, a2: float, a1: float, a0: float) -> list[float]:
    """Real roots of ``a3 x^3 + a2 x^2 + a1 x + a0`` (a3 != 0), ascending.

    Trigonometric/Cardano split on the discriminant of the depressed cubic,
    followed by guarded Newton polishing on the original coefficients.
    """
    b, c, d = a2 / a3, a1 / a3, a0 / a3
    shift = b / 3.0
    p = c - b * shift
    q = 2.0 * shift ** 3 - shift * c + d
    half_q = 0.5 * q
    disc = half_q * half_q + (p / 3.0) ** 3

    # p > 0 means a single real root even if (p/3)^3 underflowed to zero
    if disc > 0.0 or p > 0.0:
        big = math.copysign(abs(half_q) + math.sqrt(disc), half_q)
        u = -math.copysign(abs(big) ** (1.0 / 3.0), big)
        t = u - p / (3.0 * u) if u != 0.0 else 0.0
        roots = [t - shift]
    elif p == 0.0 or p * math.sqrt(-p / 3.0) == 0.0:
        # p underflows to (effectively) zero: triple root
        roots = [-shift]
    else:
        m = 2.0 * math.sqrt(-p / 3.0)
        arg = max(-1.0, min(1.0, 3.0 * q / (p * m)))
        theta = math.acos(arg) / 3.0
        roots = [m * math.cos(theta - 2.0 * math.pi * k / 3.0) - shift for k in range(3)]

    def f(x: float) -> float:
        return ((a3 * x + a2) * x + a1) * x + a0

    def df(x: float) -> float:
        return (3.0 * a3 * x + 2.0 * a2) * x + a1

    polished = []
    for x in roots:
        fx = f(x)
        for _ in range(3):
            slope = df(x)
            if slope == 0.0 or fx == 0.0:
                break
            nx = x - fx / slope
            nfx = f(nx)
            if not abs(nfx) < abs(fx):
                break
            x, fx = nx, nfx
        polished.append(x)
    return sorted(polished)


def closest_approach_time(target: CaState, other: CaState) -> float:
    """Unconstrained global minimiser of the squared gap between two CA rollouts.

    Returns 0 when relative velocity and acceleration both vanish.  Roots whose
    squared gap matches the minimum within ``TIE_RTOL * max(1, q)`` count as
    tied (collinear pairs that meet twice tie exactly); the earliest tied root
    at or after the present wins, else the latest one before it.  The tolerance
    keeps the choice stable under rotations of the inputs.
    """
    dp, dv, da = _relative(target, other)
    da2 = da.norm2()
    dv2 = dv.norm2()
    if da2 < DEGENERATE_EPS:
        if dv2 < DEGENERATE_EPS:
            return 0.0
        return -dp.dot(dv) / dv2

    roots = real_cubic_roots(0.5 * da2, 1.5 * dv.dot(da), dv2 + dp.dot(da), dp.dot(dv))
    qs = [squared_gap(target, other, tau) for tau in roots]
    q_min = min(qs)
    tied = [tau for tau, qv in zip(roots, qs) if qv <= q_min + TIE_RTOL * max(1.0, q_min)]
    future = [tau for tau in tied if tau >= 0.0]
    return min(future) if future else max(tied)


def clamp_tau(tau: float, horizon_T: float) -> float:
    if horizon_T <= 0:
        raise InvalidInputError(f"horizon must be positive, got {horizon_T}")
    if tau < 0:
        return 0.0
    if tau > horizon_T:
        return horizon_T
    return tau


def closest_distance(target: CaState, other: CaState, tau_clamped: float) -> float:
    """Euclidean gap between both CA rollouts at ``tau_clamped``."""
    a = ca_propagate(target, tau_clamped)
    b = ca_propagate(other, tau_clamped)
    return math.hypot(b.x - a.x, b.y - a.y)


def to_relative_frame(state: AgentState, frame: Pose) -> AgentState:
    """Express ``state`` in the frame whose origin/x-axis are ``frame``'s position/heading."""
    rot = -frame.heading
    return replace(
        state,
        position=(state.position - frame.origin).rotated(rot),
        heading=wrap_angle(state.heading - frame.heading),
        velocity=state.velocity.rotated(rot),
        acceleration=state.acceleration.rotated(rot),
    )


def from_relative_frame(state: AgentState, frame: Pose) -> AgentState:
    """Inverse of :func:`to_relative_frame`."""
    return replace(
        state,
        position=state.position.rotated(frame.heading) + frame.origin,
        heading=wrap_angle(state.heading + frame.heading),
        velocity=state.velocity.rotated(frame.heading),
        acceleration=state.acceleration.rotated(frame.heading),
    )
