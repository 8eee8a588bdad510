import logging
import math

import numpy as np
import pytest

from builders import ca
from oracles import direct_gap
from trajinteract.attention import (AttentionMatrix, CoefficientConfig, attention_matrix,
                                    closeness_index, normalize_scores)
from trajinteract.errors import DegenerateGeometryError, InvalidInputError
from trajinteract.geometry import closest_approach_time
from trajinteract.selection import InteractionTensor


def test_closeness_no_approach_edge_case():
    # equal current and closest distance, tau clamped to 0
    c = closeness_index(ca(), ca((2, 0), (1, 0)))
    assert abs(c - 0.5) < 1e-12


def test_closeness_head_on():
    assert abs(closeness_index(ca(), ca((10, 0), (-1, 0))) - 0.1) < 1e-12


def test_closeness_receding_formula_value():
    # tau* = -10 clamps to 0, so d_next = d_now = 10: (1/10) * (0 + 1) / (0 + 1)
    c = closeness_index(ca(), ca((10, 0), (1, 0)))
    assert abs(c - 0.1) < 1e-12


NEG = ((9.702, -9.854), (5.612, 6.862), (-0.157, -0.186))


def test_closeness_can_be_negative():
    # the global minimiser lies beyond T, and the gap at T exceeds the current gap
    tau = closest_approach_time(ca(), ca(*NEG))
    assert tau > 30.0
    d_now = math.hypot(*NEG[0])
    d_T = direct_gap(*NEG, 30.0)
    expected = (1 / d_now) * (d_now - d_T + 1.0) / (30.0 + 1.0)
    c = closeness_index(ca(), ca(*NEG))
    assert c < 0 and abs(c - expected) < 1e-12


@pytest.mark.parametrize("part, expected", [("a", 0.1), ("b", 1.0), ("ab", 0.1)])
def test_closeness_parts(part, expected):
    c = closeness_index(ca(), ca((10, 0), (-1, 0)), CoefficientConfig(part=part))
    assert c == pytest.approx(expected, abs=1e-12)


def test_collocated_agents_raise():
    with pytest.raises(DegenerateGeometryError):
        closeness_index(ca((1, 1)), ca((1, 1), (3, 0)))


def test_bad_config():
    with pytest.raises(InvalidInputError):
        CoefficientConfig(part="c")
    with pytest.raises(InvalidInputError):
        CoefficientConfig(epsilon=0.0)


def test_normalize_examples():
    np.testing.assert_array_equal(normalize_scores([1, 1, 1, 1]), [0.25] * 4)
    np.testing.assert_array_equal(normalize_scores([3, 1, 0, 0], [1, 1, 0, 0]), [0.75, 0.25, 0, 0])
    np.testing.assert_array_equal(normalize_scores([0, 0, 0, 0], [0, 0, 0, 0]), [0, 0, 0, 0])
    with pytest.raises(InvalidInputError):
        normalize_scores([-1, 1, 0, 0])


def _tensor(rows, mask):
    """rows: {slot: (T_h, 7) array}; unspecified slots zero."""
    T_h = mask.shape[1]
    slots = np.zeros((5, T_h, 7))
    for s, r in rows.items():
        slots[s] = r
    return InteractionTensor(slots, mask)


def _state(x, y, vx, vy, T_h=3):
    return np.tile([x, y, math.atan2(vy, vx), vx, vy, 0.0, 0.0], (T_h, 1))


def test_single_category_row_of_ones():
    mask = np.zeros((4, 3), dtype=bool)
    mask[1] = True
    A = attention_matrix(_tensor({0: _state(0, 0, 5, 0), 2: _state(10, 3.5, 5, 0)}, mask))
    np.testing.assert_array_equal(A.alpha, [[0] * 3, [1] * 3, [0] * 3, [0] * 3])


def test_mirrored_twins_get_equal_weight():
    mask = np.zeros((4, 3), dtype=bool)
    mask[1:3] = True
    rows = {0: _state(0, 0, 5, 0), 2: _state(8, 3.5, 4, -0.5), 3: _state(8, -3.5, 4, 0.5)}
    A = attention_matrix(_tensor(rows, mask))
    np.testing.assert_allclose(A.alpha[1], A.alpha[2], atol=1e-9)
    np.testing.assert_allclose(A.alpha[1], 0.5, atol=1e-9)


def test_negative_closeness_clamped_and_logged(caplog):
    mask = np.zeros((4, 1), dtype=bool)
    mask[:2] = True
    (px, py), (vx, vy), (ax, ay) = NEG
    rows = {0: np.zeros((1, 7)), 1: np.array([[px, py, 0, vx, vy, ax, ay]]),
            2: _state(-10, 0, 1, 0, 1)}
    with caplog.at_level(logging.INFO, logger="trajinteract.attention"):
        A = attention_matrix(_tensor(rows, mask))
    np.testing.assert_array_equal(A.alpha[:, 0], [0, 1, 0, 0])
    assert "clamped" in caplog.text


def test_degenerate_error_names_step_and_category():
    mask = np.zeros((4, 2), dtype=bool)
    mask[3, 1] = True
    with pytest.raises(DegenerateGeometryError, match="t=0, category=ML"):
        attention_matrix(_tensor({0: _state(1, 1, 1, 0, 2), 4: _state(1, 1, 2, 0, 2)}, mask))


def test_csv_layout():
    A = AttentionMatrix(np.array([[1.0, 0.5], [0, 0.5], [0, 0], [0, 0]]))
    lines = A.to_csv().splitlines()
    assert lines[0] == "category,t=-1,t=0"
    assert lines[1] == "SL,1.0,0.5"
    assert [l.split(",")[0] for l in lines[1:]] == ["SL", "FL", "FF", "ML"]


def test_nearer_stationary_neighbour_scores_higher():
    for cfg in (CoefficientConfig(), CoefficientConfig(part="a")):
        assert closeness_index(ca(), ca((8, 0)), cfg) > closeness_index(ca(), ca((12, 0)), cfg)


def test_faster_approach_outweighs_small_extra_distance():
    near_slow = closeness_index(ca(), ca((10, 3), (-1, 0)))
    far_fast = closeness_index(ca(), ca((12, 3), (-8, 0)))
    assert far_fast > near_slow


@pytest.mark.parametrize("part", ["a", "b", "ab"])
def test_variants_stay_column_stochastic(part):
    mask = np.zeros((4, 3), dtype=bool)
    mask[[0, 1, 3]] = True
    rows = {0: _state(0, 0, 5, 0), 1: _state(10, 0, 4, 0), 2: _state(6, 3.5, 7, 0),
            4: _state(15, 3.5, 5, -1)}
    A = attention_matrix(_tensor(rows, mask), CoefficientConfig(part=part))
    np.testing.assert_allclose(A.alpha.sum(axis=0), 1.0, atol=1e-12)
