"""Count-variance formulas, K-moment statistics, TSRV, and volatility reports.

The count processes N1/N2 are mark-weighted: the price is
S_t = S_0 + delta * (N1(t) - N2(t)). All matrix expressions are evaluated
with explicit 2x2 cofactor inverses; determinants are checked against a
1e-12 floor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Sequence

import numpy as np

from hawkesvol.core import EventStream, IntensityPath, SymmetricParams
from hawkesvol.errors import DegenerateModelError, DegenerateStreamError, InsufficientDataError

_DET_FLOOR = 1e-12


# ---------------------------------------------------------------------------
# K statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KStatistics:
    """Sample moments coupling marks, intensities, and counts.

    e_lambda, e_lambda_sq, e_k_lambda_sq are raw moments; k_lambda and
    k2_lambda are the mark-moment ratios E[k lam]/E[lam] and E[k^2 lam]/E[lam];
    c_* are the t-normalized count couplings lim E[. N_i]/t. The *_cross
    fields are the lambda_g1-with-N2 / lambda_g1*lambda_g2 variants; when
    absent they default to the self variants (the symmetric collapse).
    """

    e_lambda: float
    k_lambda: float
    k2_lambda: float
    e_lambda_sq: float
    e_k_lambda_sq: float
    c_lambda_n: float
    c_k_lambda_n: float
    e_lambda_cross: float | None = None
    e_k_lambda_cross: float | None = None
    c_lambda_n_cross: float | None = None
    c_k_lambda_n_cross: float | None = None

    def __post_init__(self):
        for name in ("e_lambda", "k_lambda", "k2_lambda", "e_lambda_sq",
                     "e_k_lambda_sq", "c_lambda_n", "c_k_lambda_n"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise DegenerateStreamError(f"{name} must be finite and positive, got {v}")
        if self.k_lambda < 1.0 - 1e-12:
            raise DegenerateStreamError(f"k_lambda must be >= 1, got {self.k_lambda}")
        if self.k2_lambda < self.k_lambda - 1e-12:
            raise DegenerateStreamError("k2_lambda cannot fall below k_lambda for marks >= 1")

    @property
    def k_lambda_sq(self) -> float:
        """K_{1,lambda^2} = E[k lam^2] / E[lam^2]."""
        return self.e_k_lambda_sq / self.e_lambda_sq

    @property
    def k_lambda_n(self) -> float:
        """K_{1, lambda N_1} = E[k lam N]/E[lam N]."""
        return self.c_k_lambda_n / self.c_lambda_n

    @property
    def k_lambda_cross(self) -> float:
        """K_{2, lambda_g1 lambda_g2}; defaults to the self variant."""
        if self.e_lambda_cross is None or self.e_k_lambda_cross is None:
            return self.k_lambda_sq
        return self.e_k_lambda_cross / self.e_lambda_cross

    @property
    def k_lambda_n_cross(self) -> float:
        """K_{1, lambda_g1 N_2}; defaults to the self variant."""
        if self.c_lambda_n_cross is None or self.c_k_lambda_n_cross is None:
            return self.k_lambda_n
        return self.c_k_lambda_n_cross / self.c_lambda_n_cross

    def k_bar(self, eta: float) -> float:
        return self.k_lambda + (self.k2_lambda - self.k_lambda) * eta

    def k_barbar(self, eta: float) -> float:
        return (1.0 + 2.0 * (self.k_lambda - 1.0) * eta
                + (self.k2_lambda - 2.0 * self.k_lambda + 1.0) * eta * eta)

    @classmethod
    def unit(cls, e_lambda: float) -> "KStatistics":
        """All mark-moment ratios equal to one (the unmarked reduction)."""
        return cls.iid(e_lambda, 1.0, 1.0)

    @classmethod
    def iid(cls, e_lambda: float, k_mean: float, k_sq: float) -> "KStatistics":
        """Ratios implied by i.i.d. marks: every K_{iX} = E[k], K^(2) = E[k^2]."""
        return cls(
            e_lambda=e_lambda, k_lambda=k_mean, k2_lambda=k_sq,
            e_lambda_sq=e_lambda, e_k_lambda_sq=k_mean * e_lambda,
            c_lambda_n=e_lambda, c_k_lambda_n=k_mean * e_lambda,
            e_lambda_cross=e_lambda, e_k_lambda_cross=k_mean * e_lambda,
            c_lambda_n_cross=e_lambda, c_k_lambda_n_cross=k_mean * e_lambda,
        )


def estimate_k_statistics(stream: EventStream, intensity_path: IntensityPath,
                          horizon: float | None = None) -> KStatistics:
    """Sample K statistics from a realized path and its (inferred) intensities.

    Both sides estimate the same quantities under the symmetric model, so the
    per-side moment estimates are averaged.
    """
    if len(stream) == 0:
        raise DegenerateStreamError("cannot compute K statistics on an empty stream")
    T = stream.horizon if horizon is None else float(horizon)
    sides = stream.sides
    marks = stream.marks_f
    lam_own = intensity_path.own_side(sides)
    lam_other = intensity_path.other_side(sides)
    up = sides == 0
    down = ~up
    if not up.any() or not down.any():
        raise DegenerateStreamError("need events on both sides for K statistics")

    # mark-weighted counts strictly before each event
    w1 = np.where(up, marks, 0.0)
    w2 = np.where(down, marks, 0.0)
    n1_before = np.concatenate(([0.0], np.cumsum(w1)[:-1]))
    n2_before = np.concatenate(([0.0], np.cumsum(w2)[:-1]))
    own_before = np.where(up, n1_before, n2_before)
    other_before = np.where(up, n2_before, n1_before)

    def _avg(values_up: float, values_down: float) -> float:
        return 0.5 * (values_up + values_down)

    e_lambda = _avg(np.count_nonzero(up), np.count_nonzero(down)) / T
    e_k_lambda = _avg(marks[up].sum(), marks[down].sum()) / T
    e_k2_lambda = _avg((marks[up] ** 2).sum(), (marks[down] ** 2).sum()) / T
    e_lambda_sq = _avg(lam_own[up].sum(), lam_own[down].sum()) / T
    e_k_lambda_sq = _avg((marks * lam_own)[up].sum(), (marks * lam_own)[down].sum()) / T
    scale = 2.0 / (T * T)
    c_lambda_n = _avg(own_before[up].sum(), own_before[down].sum()) * scale
    c_k_lambda_n = _avg((marks * own_before)[up].sum(), (marks * own_before)[down].sum()) * scale
    e_lambda_cross = _avg(lam_other[up].sum(), lam_other[down].sum()) / T
    e_k_lambda_cross = _avg((marks * lam_other)[up].sum(), (marks * lam_other)[down].sum()) / T
    c_lambda_n_cross = _avg(other_before[up].sum(), other_before[down].sum()) * scale
    c_k_lambda_n_cross = _avg((marks * other_before)[up].sum(),
                              (marks * other_before)[down].sum()) * scale
    return KStatistics(
        e_lambda=float(e_lambda),
        k_lambda=float(e_k_lambda / e_lambda),
        k2_lambda=float(e_k2_lambda / e_lambda),
        e_lambda_sq=float(e_lambda_sq),
        e_k_lambda_sq=float(e_k_lambda_sq),
        c_lambda_n=float(c_lambda_n),
        c_k_lambda_n=float(c_k_lambda_n),
        e_lambda_cross=float(e_lambda_cross),
        e_k_lambda_cross=float(e_k_lambda_cross),
        c_lambda_n_cross=float(c_lambda_n_cross),
        c_k_lambda_n_cross=float(c_k_lambda_n_cross),
    )


def pool_k_statistics(stats: Sequence[KStatistics]) -> KStatistics:
    """Pool per-path statistics: moments average, ratios re-form from pooled sums."""
    if not stats:
        raise DegenerateStreamError("nothing to pool")
    n = len(stats)
    e_lambda = sum(s.e_lambda for s in stats) / n
    e_k_lambda = sum(s.k_lambda * s.e_lambda for s in stats) / n
    e_k2_lambda = sum(s.k2_lambda * s.e_lambda for s in stats) / n

    def _mean(name):
        vals = [getattr(s, name) for s in stats]
        if any(v is None for v in vals):
            return None
        return sum(vals) / n

    return KStatistics(
        e_lambda=e_lambda,
        k_lambda=e_k_lambda / e_lambda,
        k2_lambda=e_k2_lambda / e_lambda,
        e_lambda_sq=_mean("e_lambda_sq"),
        e_k_lambda_sq=_mean("e_k_lambda_sq"),
        c_lambda_n=_mean("c_lambda_n"),
        c_k_lambda_n=_mean("c_k_lambda_n"),
        e_lambda_cross=_mean("e_lambda_cross"),
        e_k_lambda_cross=_mean("e_k_lambda_cross"),
        c_lambda_n_cross=_mean("c_lambda_n_cross"),
        c_k_lambda_n_cross=_mean("c_k_lambda_n_cross"),
    )


# ---------------------------------------------------------------------------
# count-difference variance
# ---------------------------------------------------------------------------

def _inv2(m):
    a, b, c, d = m
    det = a * d - b * c
    if abs(det) < _DET_FLOOR:
        raise DegenerateModelError(f"moment matrix is singular (det={det:.3g})")
    return (d / det, -b / det, -c / det, a / det)


def _mm(m, n):
    a, b, c, d = m
    e, f, g, h = n
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def _mv(m, v):
    a, b, c, d = m
    return (a * v[0] + b * v[1], c * v[0] + d * v[1])


def _msub(m, n):
    return tuple(x - y for x, y in zip(m, n))


@dataclass(frozen=True)
class CountSecondMoments:
    e_n1_sq: float
    e_n1_n2: float
    e_diff_sq: float


def variance_theorem(params: SymmetricParams, ks: KStatistics, t: float) -> CountSecondMoments:
    """Second moments of the mark-weighted counts from the full matrix formula."""
    a_s, a_c, beta, eta, mu = params.alpha_s, params.alpha_c, params.beta, params.eta, params.mu
    k1 = ks.k_lambda
    k2 = ks.k2_lambda
    kl2 = ks.k_lambda_sq
    klc = ks.k_lambda_cross
    kln = ks.k_lambda_n
    klnx = ks.k_lambda_n_cross
    kbar = ks.k_bar(eta)
    kbb = ks.k_barbar(eta)

    def accent(k):  # alpha scaled by the accented mark factor
        return 1.0 + (k - 1.0) * eta

    br_s, br_c = a_s * accent(kl2), a_c * accent(kl2)      # breve, from K_{1,lam^2}
    tl_s, tl_c = a_s * accent(klc), a_c * accent(klc)      # tilde, from K_{2,lam lam'}
    ac_s, ac_c = a_s * accent(kln), a_c * accent(kln)      # acute, from K_{1,lam N1}
    gr_s, gr_c = a_s * accent(klnx), a_c * accent(klnx)    # grave, from K_{1,lam N2}

    m = (br_s - beta, tl_c, br_c, tl_s - beta)
    m2 = (ac_s - beta, gr_c, ac_c, gr_s - beta)
    m_inv = _inv2(m)
    m2_inv = _inv2(m2)
    k2_diag = (kl2, 0.0, 0.0, klc)
    k3 = (kln, klnx)
    bm = beta * mu
    elam = ks.e_lambda

    ones = (1.0, 1.0)
    u2 = _mv(m2_inv, ones)
    coef_t2 = (-elam * k3[0] * bm * k1 * u2[0], -elam * k3[1] * bm * k1 * u2[1])

    v_alpha = _mv(m2_inv, (a_s * kbar, a_c * kbar))
    v_kbb = _mv(_mm(m2_inv, _mm(k2_diag, m_inv)),
                ((a_s * a_s + a_c * a_c) * kbb, 2.0 * a_s * a_c * kbb))
    k_m2inv = (k1 * m2_inv[0], k1 * m2_inv[1], k1 * m2_inv[2], k1 * m2_inv[3])
    v_bm = _mv(_mm(m2_inv, _msub(k_m2inv, _mm(k2_diag, m_inv))), (bm, bm))
    inner = (
        2.0 * v_alpha[0] - v_kbb[0] + 2.0 * v_bm[0] - k2 / kln,
        2.0 * v_alpha[1] - v_kbb[1] + 2.0 * v_bm[1],
    )
    coef_t1 = (-elam * k3[0] * inner[0], -elam * k3[1] * inner[1])

    e_n1_sq = coef_t2[0] * t * t + coef_t1[0] * t
    e_n1_n2 = coef_t2[1] * t * t + coef_t1[1] * t
    # difference of coefficients first: the quadratic term cancels exactly under
    # the symmetric collapse and would otherwise swamp the linear part at large t
    e_diff = 2.0 * ((coef_t2[0] - coef_t2[1]) * t * t + (coef_t1[0] - coef_t1[1]) * t)
    return CountSecondMoments(e_n1_sq, e_n1_n2, e_diff)


def variance_approx(params: SymmetricParams, ks: KStatistics, t: float) -> float:
    """E[(N1-N2)^2] from the symmetric-collapse scalar formula (linear in t)."""
    a_s, a_c, beta, eta = params.alpha_s, params.alpha_c, params.beta, params.eta
    kl2 = ks.k_lambda_sq
    kln = ks.k_lambda_n
    d1 = beta - a_s * (1.0 + (kl2 - 1.0) * eta) + a_c * (1.0 + (kl2 - 1.0) * eta)
    d2 = beta - a_s * (1.0 + (kln - 1.0) * eta) + a_c * (1.0 + (kln - 1.0) * eta)
    if d1 <= 0.0 or d2 <= 0.0:
        raise DegenerateModelError(f"degenerate denominator ({d1:.3g})*({d2:.3g})")
    da = a_s - a_c
    bracket = (kl2 * ks.k_barbar(eta) * da * da / (d1 * d2)
               + 2.0 * da * ks.k_bar(eta) / d2
               + ks.k2_lambda / kln)
    return 2.0 * kln * ks.e_lambda * bracket * t


def variance_iid(params: SymmetricParams, k_mean: float, k_sq: float, t: float) -> float:
    """E[(N1-N2)^2] when marks are i.i.d. with moments (E[k], E[k^2])."""
    from hawkesvol.core import expected_intensity

    if not (np.isfinite(k_mean) and np.isfinite(k_sq)):
        raise DegenerateModelError("mark moments must be finite")
    ks = KStatistics.iid(expected_intensity(params, k_mean), k_mean, k_sq)
    return variance_approx(params, ks, t)


def simple_hawkes_variance(params: SymmetricParams, e_lambda: float, t: float) -> float:
    """Unmarked-model reduction 2 E[lambda] beta^2 / (beta - alpha_s + alpha_c)^2 * t."""
    d = params.beta - params.alpha_s + params.alpha_c
    return 2.0 * e_lambda * (params.beta / d) ** 2 * t


def hawkes_volatility(params: SymmetricParams, ks: KStatistics | None, s0: float,
                      delta: float, horizon: float, scaling: float = 1.0,
                      variant: str = "approx", k_mean: float | None = None,
                      k_sq: float | None = None) -> float:
    """Model-implied return volatility over the horizon, scaled by `scaling`."""
    if s0 <= 0 or delta <= 0:
        raise ValueError("s0 and delta must be positive")
    if variant == "full":
        var = variance_theorem(params, ks, horizon).e_diff_sq
    elif variant == "approx":
        var = variance_approx(params, ks, horizon)
    elif variant == "iid":
        if k_mean is None or k_sq is None:
            raise ValueError("iid variant needs k_mean and k_sq")
        var = variance_iid(params, k_mean, k_sq, horizon)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    var = max(var, 0.0)
    return math.sqrt(delta * delta / (s0 * s0) * var) * scaling


# ---------------------------------------------------------------------------
# realized volatility
# ---------------------------------------------------------------------------

def price_grid(stream: EventStream, s0: float, delta: float, dt: float = 1.0):
    """Right-continuous price S = s0 + delta*(N1-N2) sampled on a regular grid."""
    n_pts = int(math.floor(stream.horizon / dt)) + 1
    grid = np.arange(n_pts, dtype=np.float64) * dt
    signed = np.where(stream.sides == 0, stream.marks, -stream.marks).astype(np.float64)
    cum = np.concatenate(([0.0], np.cumsum(signed)))
    idx = np.searchsorted(stream.times, grid, side="right")
    return grid, s0 + delta * cum[idx]


def tsrv(times, values, small_scale: float = 1.0, large_scale: float = 300.0) -> float:
    """Two-scale realized volatility of a path, differencing the series as given.

    The slow-scale realized variance is averaged over all J = large/small
    subgrid offsets and the fast-scale realized variance removes the noise
    bias. Returns sqrt of the variance estimate, floored at zero.
    """
    times = np.asarray(times, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if times.ndim != 1 or times.shape != values.shape or times.size < 2:
        raise InsufficientDataError("need a one-dimensional (times, values) path")
    span = times[-1] - times[0]
    if span < large_scale:
        raise InsufficientDataError(
            f"path spans {span:.6g}s, shorter than one large-scale window ({large_scale:.6g}s)")
    if large_scale <= small_scale:
        raise ValueError("large_scale must exceed small_scale")
    n_pts = int(math.floor(span / small_scale)) + 1
    grid = times[0] + np.arange(n_pts, dtype=np.float64) * small_scale
    idx = np.searchsorted(times, grid, side="right") - 1
    x = values[idx]
    j = int(round(large_scale / small_scale))
    n = n_pts - 1
    if n <= j:
        raise InsufficientDataError("not enough fast-scale returns for the slow scale")
    d_small = np.diff(x)
    rv_small = float(np.dot(d_small, d_small))
    d_large = x[j:] - x[:-j]
    rv_avg = float(np.dot(d_large, d_large)) / j
    n_bar = (n - j + 1) / j
    var = rv_avg - (n_bar / n) * rv_small
    return math.sqrt(max(var, 0.0))


def tsrv_from_stream(stream: EventStream, s0: float, delta: float,
                     small_scale: float = 1.0, large_scale: float = 300.0,
                     scaling: float = 1.0) -> float:
    """TSRV of the normalized price path (S - s0)/s0, comparable to hawkes_volatility."""
    grid, prices = price_grid(stream, s0, delta, dt=small_scale)
    return tsrv(grid, (prices - s0) / s0, small_scale, large_scale) * scaling


def sample_volatility(terminal_returns) -> float:
    """Cross-path standard deviation of terminal returns."""
    r = np.asarray(terminal_returns, dtype=np.float64)
    if r.size < 2:
        raise InsufficientDataError("need at least two paths for a sample volatility")
    return float(np.std(r, ddof=1))


# ---------------------------------------------------------------------------
# reporting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VolatilityReport:
    hawkes_full: float | None
    hawkes_approx: float | None
    hawkes_iid: float | None
    tsrv: float | None
    sample_vol: float | None
    horizon: float
    s0: float
    delta: float
    scaling: float

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class IntradayVolatility:
    """Cumulative volatility curve from per-window variance accumulation."""

    window_ends: np.ndarray
    cumulative: np.ndarray
    window_variance: np.ndarray  # return-variance contribution per window

    def endpoint(self) -> float:
        return float(self.cumulative[-1])


def intraday_cumulative(stream: EventStream, *, s0: float, delta: float,
                        window: float = 600.0, params: SymmetricParams | None = None,
                        refit: bool = True, variant: str = "approx",
                        min_events: int = 30, n_starts: int = 1, seed=0) -> IntradayVolatility:
    """Accumulate per-window Hawkes variances into a running volatility curve.

    Windows with fewer than min_events events are merged into the following
    window (the final short window merges backward). With refit=False the
    day-level params are reused and only the K statistics are per-window.
    """
    from hawkesvol.estimate import fit_symmetric
    from hawkesvol.core import intensities_at_events

    if len(stream) == 0:
        raise DegenerateStreamError("cannot compute intraday volatility on an empty stream")
    if not refit and params is None:
        raise ValueError("refit=False requires day-level params")
    edges = [0.0]
    t = window
    while t < stream.horizon - 1e-9:
        edges.append(t)
        t += window
    edges.append(stream.horizon)

    # merge windows forward until each holds enough events
    spans: list[tuple[float, float]] = []
    start = edges[0]
    for end in edges[1:]:
        is_last = end == edges[-1]
        sel = (stream.times >= start) & (
            (stream.times <= end) if is_last else (stream.times < end))
        n_up = int(np.count_nonzero(stream.sides[sel] == 0))
        n_down = int(np.count_nonzero(sel)) - n_up
        if (n_up + n_down >= min_events and n_up >= 2 and n_down >= 2) or is_last:
            spans.append((start, end))
            start = end
    if len(spans) > 1:
        s_last, e_last = spans[-1]
        sel = (stream.times >= s_last) & (stream.times <= e_last)
        n_up = int(np.count_nonzero(stream.sides[sel] == 0))
        n_down = int(np.count_nonzero(sel)) - n_up
        if n_up + n_down < min_events or n_up < 2 or n_down < 2:
            spans[-2:] = [(spans[-2][0], e_last)]

    ends = np.empty(len(spans))
    variances = np.empty(len(spans))
    for i, (a, b) in enumerate(spans):
        is_last = b == spans[-1][1]
        sel = (stream.times >= a) & ((stream.times <= b) if is_last else (stream.times < b))
        sub = EventStream(stream.times[sel] - a, stream.sides[sel], stream.marks[sel], b - a)
        p = fit_symmetric(sub, n_starts=n_starts, seed=seed, compute_stderr=False).params \
            if refit else params
        path = intensities_at_events(sub, p)
        ks = estimate_k_statistics(sub, path)
        if variant == "full":
            var = variance_theorem(p, ks, sub.horizon).e_diff_sq
        else:
            var = variance_approx(p, ks, sub.horizon)
        variances[i] = max(var, 0.0) * delta * delta / (s0 * s0)
        ends[i] = b
    return IntradayVolatility(ends, np.sqrt(np.cumsum(variances)), variances)
