"""Forward-only interaction encoder: shared embedding, attention-weighted sum, FFN with extra LN."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .attention import AttentionMatrix
from .errors import ConfigurationError
from .selection import InteractionTensor
from .state import STATE_DIM

LN_EPS = 1e-5


@dataclass(frozen=True)
class LinearLayer:
    weight: np.ndarray  # (out, in)
    bias: np.ndarray  # (out,)

    def __post_init__(self):
        w = np.asarray(self.weight, dtype=float)
        b = np.asarray(self.bias, dtype=float)
        if w.ndim != 2 or b.shape != (w.shape[0],):
            raise ConfigurationError(f"linear layer shape mismatch: w{w.shape} b{b.shape}")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
            raise ConfigurationError("non-finite linear layer parameters")
        object.__setattr__(self, "weight", w)
        object.__setattr__(self, "bias", b)

    @property
    def in_dim(self) -> int:
        return self.weight.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weight.shape[0]

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return x @ self.weight.T + self.bias


@dataclass(frozen=True)
class LayerNormParams:
    scale: np.ndarray
    shift: np.ndarray

    def __post_init__(self):
        scale = np.asarray(self.scale, dtype=float)
        shift = np.asarray(self.shift, dtype=float)
        if scale.ndim != 1 or scale.shape != shift.shape:
            raise ConfigurationError(f"layer norm shape mismatch: {scale.shape} vs {shift.shape}")
        object.__setattr__(self, "scale", scale)
        object.__setattr__(self, "shift", shift)


@dataclass(frozen=True)
class EncoderWeights:
    fc_embed: LinearLayer
    fc_merge: LinearLayer
    ffn_in: LinearLayer
    ffn_out: LinearLayer
    ln_pre: LayerNormParams
    ln_post: LayerNormParams

    def __post_init__(self):
        model = self.fc_merge.out_dim
        chain = [
            ("fc_embed.in", self.fc_embed.in_dim, STATE_DIM),
            ("fc_merge.in", self.fc_merge.in_dim, self.fc_embed.out_dim),
            ("ln_pre", self.ln_pre.scale.shape[0], model),
            ("ffn[0].in", self.ffn_in.in_dim, model),
            ("ffn[1].in", self.ffn_out.in_dim, self.ffn_in.out_dim),
            ("ffn[1].out", self.ffn_out.out_dim, model),
            ("ln_post", self.ln_post.scale.shape[0], model),
        ]
        for name, got, want in chain:
            if got != want:
                raise ConfigurationError(f"{name}: dimension {got}, expected {want}")

    @classmethod
    def random(cls, seed: int = 0, embed_dim: int = 32, model_dim: int = 256,
               ffn_dim: int = 256, scale: float = 0.1) -> EncoderWeights:
        """Seeded uniform(-scale, scale) initialisation, for shape and property checks."""
        rng = np.random.default_rng(seed)

        def lin(n_in: int, n_out: int) -> LinearLayer:
            return LinearLayer(rng.uniform(-scale, scale, (n_out, n_in)),
                               rng.uniform(-scale, scale, n_out))

        def ln(n: int) -> LayerNormParams:
            return LayerNormParams(rng.uniform(-scale, scale, n), rng.uniform(-scale, scale, n))

        return cls(lin(STATE_DIM, embed_dim), lin(embed_dim, model_dim),
                   lin(model_dim, ffn_dim), lin(ffn_dim, model_dim), ln(model_dim), ln(model_dim))

    def to_json(self) -> dict:
        def lin(layer: LinearLayer) -> dict:
            return {"w": layer.weight.tolist(), "b": layer.bias.tolist()}

        def ln(p: LayerNormParams) -> dict:
            return {"scale": p.scale.tolist(), "shift": p.shift.tolist()}

        return {"fc_embed": lin(self.fc_embed), "fc_merge": lin(self.fc_merge),
                "ffn": [lin(self.ffn_in), lin(self.ffn_out)],
                "ln_pre": ln(self.ln_pre), "ln_post": ln(self.ln_post)}

    @classmethod
    def from_json(cls, doc: dict) -> EncoderWeights:
        try:
            def lin(d: dict) -> LinearLayer:
                return LinearLayer(np.array(d["w"], dtype=float), np.array(d["b"], dtype=float))

            def ln(d: dict) -> LayerNormParams:
                return LayerNormParams(np.array(d["scale"], dtype=float),
                                       np.array(d["shift"], dtype=float))

            ffn = doc["ffn"]
            if len(ffn) != 2:
                raise ConfigurationError("ffn must hold exactly two layers")
            return cls(lin(doc["fc_embed"]), lin(doc["fc_merge"]), lin(ffn[0]), lin(ffn[1]),
                       ln(doc["ln_pre"]), ln(doc["ln_post"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"malformed weight file: {exc!r}") from exc


def load_weights(path: str | Path) -> EncoderWeights:
    with open(path) as fh:
        return EncoderWeights.from_json(json.load(fh))


def save_weights(weights: EncoderWeights, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(weights.to_json(), fh)


def layer_norm(x: np.ndarray, scale: np.ndarray, shift: np.ndarray, eps: float = LN_EPS) -> np.ndarray:
    """Layer norm over the last axis, population variance."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != np.shape(scale)[-1] or np.shape(scale) != np.shape(shift):
        raise ConfigurationError("layer norm dimension mismatch")
    mean = x.mean(axis=-1, keepdims=True)
    var = ((x - mean) ** 2).mean(axis=-1, keepdims=True)
    return (x - mean) / np.sqrt(var + eps) * scale + shift


def aggregate(tensor: InteractionTensor, A: AttentionMatrix, w: EncoderWeights) -> np.ndarray:
    """Embedded target plus attention-weighted neighbour embeddings, shape (T_h, embed_dim)."""
    slots = tensor.slots
    if slots.ndim != 3 or slots.shape[0] != 5 or slots.shape[2] != w.fc_embed.in_dim:
        raise ConfigurationError(f"interaction tensor shape {slots.shape} incompatible")
    if A.alpha.shape != (4, slots.shape[1]):
        raise ConfigurationError(f"attention shape {A.alpha.shape} vs tensor T_h={slots.shape[1]}")
    if np.any(A.alpha[~tensor.mask] != 0.0):
        raise ConfigurationError("attention weight on a masked category slot")
    z = w.fc_embed(slots)  # (5, T_h, embed)
    return z[0] + np.einsum("st,ste->te", A.alpha, z[1:])


def encode_interactions(tensor: InteractionTensor, A: AttentionMatrix,
                        w: EncoderWeights) -> np.ndarray:
    """Interaction embedding of shape (T_h, model_dim)."""
    z = w.fc_merge(aggregate(tensor, A, w))
    h = layer_norm(z, w.ln_pre.scale, w.ln_pre.shift)
    h = w.ffn_out(np.maximum(w.ffn_in(h), 0.0))
    return layer_norm(h, w.ln_post.scale, w.ln_post.shift) + z
