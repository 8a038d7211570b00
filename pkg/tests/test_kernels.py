"""Backend parity: the compiled extension must reproduce the pure kernels exactly."""

import numpy as np
import pytest

from hawkesvol._kernels import MARK_CONSTANT, MARK_EMPIRICAL, MARK_GEOMETRIC, _pure

compiled = pytest.importorskip(
    "hawkesvol._kernels._compiled", reason="compiled extension not built"
)

_NO_SUPPORT = np.empty(0, dtype=np.int64)
_NO_CUM = np.empty(0, dtype=np.float64)

SYM_ARGS = (0.1, 0.95, 0.82, 2.25, 0.19)
FULL_ARGS = (0.1461, 0.1155, 0.3185, 0.3821, 0.9812, 1.4949,
             1.1799, 1.9553, 2.0952, 2.5030, 0.1488)


@pytest.mark.parametrize("kind,mc,md,mcap,support,cum", [
    (MARK_CONSTANT, 0.0, 0.0, 0.0, _NO_SUPPORT, _NO_CUM),
    (MARK_GEOMETRIC, 0.15, 1.0, 2.0, _NO_SUPPORT, _NO_CUM),
    (MARK_EMPIRICAL, 0.0, 0.0, 0.0,
     np.array([1, 2, 5], dtype=np.int64), np.array([0.7, 0.95, 1.0])),
])
def test_sym_thinning_identical(kind, mc, md, mcap, support, cum):
    args = (*SYM_ARGS, 0.0, 1500.0, 0.0, 0.0, kind, mc, md, mcap, support, cum, 1e6)
    out_p = _pure.sym_thinning(*args, np.random.default_rng(123))
    out_c = compiled.sym_thinning(*args, np.random.default_rng(123))
    assert len(out_p[0]) > 50
    for a, b in zip(out_p, out_c):
        assert np.array_equal(np.asarray(a), np.asarray(b))


def test_full_thinning_identical():
    args = (*FULL_ARGS, 0.0, 1500.0, MARK_GEOMETRIC, 0.1, 1.0, 2.0,
            _NO_SUPPORT, _NO_CUM, 1e6)
    out_p = _pure.full_thinning(*args, np.random.default_rng(5))
    out_c = compiled.full_thinning(*args, np.random.default_rng(5))
    assert len(out_p[0]) > 50
    for a, b in zip(out_p, out_c):
        assert np.array_equal(np.asarray(a), np.asarray(b))


@pytest.fixture(scope="module")
def sym_stream():
    args = (*SYM_ARGS, 0.0, 2000.0, 0.0, 0.0, MARK_GEOMETRIC, 0.15, 1.0, 2.0,
            _NO_SUPPORT, _NO_CUM, 1e6)
    t, s, k, *_ = _pure.sym_thinning(*args, np.random.default_rng(42))
    return t, s, k.astype(np.float64)


def test_sym_loglik_identical(sym_stream):
    t, s, k = sym_stream
    a = _pure.sym_loglik(t, s, k, 0.19, 2000.0, *SYM_ARGS[:4], 0.1, 0.1)
    b = compiled.sym_loglik(t, s, k, 0.19, 2000.0, *SYM_ARGS[:4], 0.1, 0.1)
    assert a == b


def test_sym_intensities_identical(sym_stream):
    t, s, k = sym_stream
    p1, p2 = _pure.sym_event_intensities(t, s, k, 0.19, *SYM_ARGS[:4], 0.1, 0.1)
    c1, c2 = compiled.sym_event_intensities(t, s, k, 0.19, *SYM_ARGS[:4], 0.1, 0.1)
    assert np.array_equal(p1, c1) and np.array_equal(p2, c2)


def test_full_loglik_identical(sym_stream):
    t, s, k = sym_stream
    a = _pure.full_loglik(t, s, k, FULL_ARGS[-1], 2000.0, *FULL_ARGS[:-1])
    b = compiled.full_loglik(t, s, k, FULL_ARGS[-1], 2000.0, *FULL_ARGS[:-1])
    assert a == b
    p = _pure.full_event_intensities(t, s, k, FULL_ARGS[-1], *FULL_ARGS[:-1])
    c = compiled.full_event_intensities(t, s, k, FULL_ARGS[-1], *FULL_ARGS[:-1])
    assert np.array_equal(p[0], c[0]) and np.array_equal(p[1], c[1])


def test_nonpositive_intensity_flagged(sym_stream):
    t, s, k = sym_stream
    # eta below -1/(k_max - 1) drives some excitation weights negative
    val = compiled.sym_loglik(t, s, k, -40.0, 2000.0, *SYM_ARGS[:4], 0.1, 0.1)
    assert val == -np.inf
    assert _pure.sym_loglik(t, s, k, -40.0, 2000.0, *SYM_ARGS[:4], 0.1, 0.1) == -np.inf


def test_mark_draw_parity():
    rng_p = np.random.default_rng(9)
    rng_c = np.random.default_rng(9)
    args = (0.5, 0.1, 0.1, 1.0, 0.0, 0.0, 3000.0, 0.0, 0.0,
            MARK_GEOMETRIC, 0.5, 1.0, 9.0, _NO_SUPPORT, _NO_CUM, 1e6)
    k_p = _pure.sym_thinning(*args, rng_p)[2]
    k_c = compiled.sym_thinning(*args, rng_c)[2]
    assert np.array_equal(k_p, k_c)
    assert k_p.max() > 1  # geometric actually produced large marks
