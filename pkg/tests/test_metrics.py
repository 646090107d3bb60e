import numpy as np
import pytest

from legodom import compute_metrics


def _rows(points):
    return np.array([[float(k)] + list(p) + [0.0] * 6
                     for k, p in enumerate(points)])


def test_closure_reference_arithmetic():
    # published closed-loop endpoint, rounded to centimetres; the distance the
    # source quotes (2.2138) reflects the unrounded displacements
    m = compute_metrics(_rows([(0.0, 0.0, 0.0), (1.61, 1.52, 0.0)]))
    assert abs(m["e_xy"] - 2.2138) <= 5e-4
    assert m["e_xy"] == pytest.approx(np.hypot(1.61, 1.52), rel=0, abs=0)
    assert m["e_z"] == 0.0


def test_exact_triangle():
    m = compute_metrics(_rows([(0.0, 0.0, 0.0), (3.0, 4.0, 2.0)]))
    assert m["e_xy"] == 5.0
    assert m["e_z"] == 2.0


def test_identical_endpoints():
    m = compute_metrics(_rows([(1.0, 2.0, 3.0), (0.0, 0.0, 0.0), (1.0, 2.0, 3.0)]))
    assert m["e_xy"] == 0.0 and m["e_z"] == 0.0


def test_mae_zero_on_equal_truth():
    rows = _rows([(0.0, 0.0, 0.0), (1.0, 0.5, 0.2)])
    m = compute_metrics(rows, rows)
    assert m["mae_x"] == m["mae_y"] == m["mae_z"] == 0.0
    assert m["terminal_error"] == 0.0


def test_translation_invariance():
    rng = np.random.default_rng(0)
    pts = rng.normal(size=(10, 3))
    rows = _rows(pts)
    shift = rng.normal(size=3)
    shifted = _rows(pts + shift)
    a = compute_metrics(rows, rows)
    b = compute_metrics(shifted, shifted)
    assert np.isclose(a["e_xy"], b["e_xy"])
    assert np.isclose(a["e_z"], b["e_z"])
    assert a["mae_x"] == b["mae_x"] == 0.0


def test_empty_rejected():
    with pytest.raises(ValueError):
        compute_metrics(np.zeros((0, 10)))
