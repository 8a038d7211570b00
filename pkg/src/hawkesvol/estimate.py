"""Ground-process maximum likelihood estimation.

Only the interarrival part of the likelihood is maximized: with observed
marks and an empirical mark law, the mark term is constant in the kernel
parameters and drops out of the optimization.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from hawkesvol._kernels import backend
from hawkesvol.core import EventStream, FullParams, SymmetricParams
from hawkesvol.errors import DegenerateStreamError, InvalidLikelihoodError

MU_BOUNDS = (1e-8, 10.0)
ALPHA_BOUNDS = (0.0, 50.0)
BETA_BOUNDS = (1e-4, 100.0)
ETA_BOUNDS = (-0.5, 5.0)

_LBFGSB_OPTIONS = {"maxiter": 500, "ftol": 1e-11, "gtol": 1e-6, "finite_diff_rel_step": 1e-6}


def _eta_lower(max_mark: int, lo: float) -> float:
    # keep 1 + (k_max - 1) * eta strictly positive over the observed marks
    if max_mark <= 1:
        return lo
    return max(lo, -1.0 / (max_mark - 1) + 1e-9)


def default_bounds_symmetric(stream: EventStream) -> list[tuple[float, float]]:
    return [
        MU_BOUNDS,
        ALPHA_BOUNDS,
        ALPHA_BOUNDS,
        BETA_BOUNDS,
        (_eta_lower(stream.max_mark(), ETA_BOUNDS[0]), ETA_BOUNDS[1]),
    ]


def default_bounds_full(stream: EventStream) -> list[tuple[float, float]]:
    eta = (_eta_lower(stream.max_mark(), ETA_BOUNDS[0]), ETA_BOUNDS[1])
    return [MU_BOUNDS] * 2 + [ALPHA_BOUNDS] * 4 + [BETA_BOUNDS] * 4 + [eta]


def log_likelihood_ground(stream: EventStream, params, initial=None) -> float:
    """log L_g: sum of log left-limit intensities minus the compensator."""
    if isinstance(params, FullParams):
        if initial is not None or stream.initial_intensity is not None:
            raise InvalidLikelihoodError(
                "initial intensity overrides are only supported for the symmetric model"
            )
        value = backend.full_loglik(
            stream.times, stream.sides, stream.marks_f, params.eta, stream.horizon,
            params.mu1, params.mu2,
            params.alpha11, params.alpha22, params.alpha12, params.alpha21,
            params.beta11, params.beta22, params.beta12, params.beta21,
        )
    else:
        lam0 = stream.initial_or_default(params.mu) if initial is None else (
            float(initial[0]), float(initial[1]))
        value = backend.sym_loglik(
            stream.times, stream.sides, stream.marks_f, params.eta, stream.horizon,
            params.mu, params.alpha_s, params.alpha_c, params.beta, lam0[0], lam0[1],
        )
    if not np.isfinite(value):
        raise InvalidLikelihoodError("nonpositive intensity at an event time")
    return float(value)


def compensator_integral(stream: EventStream, params, horizon: float | None = None,
                         initial=None) -> float:
    """Closed-form integral of (lambda_g1 + lambda_g2) over [0, horizon]."""
    T = stream.horizon if horizon is None else float(horizon)
    w = 1.0 + (stream.marks_f - 1.0) * params.eta
    sel = stream.times <= T
    times = stream.times[sel]
    sides = stream.sides[sel]
    w = w[sel]
    if isinstance(params, FullParams):
        total = (params.mu1 + params.mu2) * T
        up = sides == 0
        for alpha, beta, mask in (
            (params.alpha11, params.beta11, up),
            (params.alpha21, params.beta21, up),
            (params.alpha12, params.beta12, ~up),
            (params.alpha22, params.beta22, ~up),
        ):
            total += alpha / beta * np.sum(w[mask] * (1.0 - np.exp(-beta * (T - times[mask]))))
        return float(total)
    lam0 = stream.initial_or_default(params.mu) if initial is None else (
        float(initial[0]), float(initial[1]))
    beta = params.beta
    total = 2.0 * params.mu * T
    total += (lam0[0] + lam0[1] - 2.0 * params.mu) * (1.0 - np.exp(-beta * T)) / beta
    total += (params.alpha_s + params.alpha_c) / beta * np.sum(
        w * (1.0 - np.exp(-beta * (T - times))))
    return float(total)


@dataclass(frozen=True)
class FitResult:
    params: SymmetricParams | FullParams
    loglik: float
    stderr: np.ndarray
    iterations: int
    converged: bool
    model: str
    n_events: int
    horizon: float

    def stderr_dict(self) -> dict[str, float]:
        return {n: float(s) for n, s in zip(type(self.params).names, self.stderr)}

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "params": {n: float(getattr(self.params, n)) for n in type(self.params).names},
            "stderr": self.stderr_dict(),
            "loglik": float(self.loglik),
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "n_events": int(self.n_events),
            "horizon": float(self.horizon),
        }


def _check_two_sided(stream: EventStream) -> None:
    up, down = stream.counts()
    if up < 2 or down < 2:
        raise DegenerateStreamError(
            f"need at least 2 events per side, got up={up} down={down}"
        )


def _heuristic_init_symmetric(stream: EventStream) -> np.ndarray:
    rate = len(stream) / (2.0 * stream.horizon)
    beta0 = 2.0
    return np.array([max(0.5 * rate, 2e-8), 0.25 * beta0, 0.25 * beta0, beta0, 0.1])


def _starts(x0: np.ndarray, bounds, n_starts: int, seed) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    out = [np.clip(x0, lo, hi)]
    for _ in range(n_starts - 1):
        x = x0.copy()
        x[:-1] = x[:-1] * np.exp(rng.normal(0.0, 0.5, size=len(x) - 1))
        x[-1] = x0[-1] + rng.uniform(-0.15, 0.15)
        out.append(np.clip(x, lo, hi))
    return out


def _minimize_multistart(neg: Callable, starts, bounds, maxiter: int):
    best = None
    total_iter = 0
    for x0 in starts:
        opts = dict(_LBFGSB_OPTIONS, maxiter=maxiter)
        res = minimize(neg, x0, method="L-BFGS-B", jac="3-point", bounds=bounds, options=opts)
        total_iter += res.nit
        if best is None or res.fun < best.fun:
            best = res
    return best, total_iter


def _hessian_stderr(neg: Callable, x: np.ndarray) -> np.ndarray:
    try:
        h = numerical_hessian(neg, x)
        cov = np.linalg.inv(h)
        diag = np.diag(cov)
        return np.where(diag > 0, np.sqrt(np.abs(diag)), np.nan)
    except (np.linalg.LinAlgError, ValueError):
        return np.full(len(x), np.nan)


def fit_symmetric(stream: EventStream, init: SymmetricParams | None = None,
                  bounds: Sequence[tuple[float, float]] | None = None,
                  n_starts: int = 3, seed=0, maxiter: int = 500,
                  compute_stderr: bool = True) -> FitResult:
    """Maximize log L_g over (mu, alpha_s, alpha_c, beta, eta) with box bounds."""
    _check_two_sided(stream)
    if bounds is None:
        bounds = default_bounds_symmetric(stream)
    times, sides, marks = stream.times, stream.sides, stream.marks_f
    T = stream.horizon
    lam0 = stream.initial_intensity

    def neg(x):
        l0 = (x[0], x[0]) if lam0 is None else lam0
        v = backend.sym_loglik(times, sides, marks, x[4], T, x[0], x[1], x[2], x[3],
                               l0[0], l0[1])
        return -v if np.isfinite(v) else 1e300

    x0 = init.as_array() if init is not None else _heuristic_init_symmetric(stream)
    best, total_iter = _minimize_multistart(neg, _starts(x0, bounds, n_starts, seed), bounds, maxiter)
    params = SymmetricParams.from_array(best.x)
    stderr = _hessian_stderr(neg, best.x) if compute_stderr else np.full(5, np.nan)
    return FitResult(params, -float(best.fun), stderr, total_iter, bool(best.success),
                     "symmetric", len(stream), T)


def _heuristic_init_full(stream: EventStream) -> np.ndarray:
    up, down = stream.counts()
    T = stream.horizon
    beta0 = 2.0
    return np.array([
        max(0.5 * up / T, 2e-8), max(0.5 * down / T, 2e-8),
        0.25 * beta0, 0.25 * beta0, 0.25 * beta0, 0.25 * beta0,
        beta0, beta0, beta0, beta0,
        0.1,
    ])


def fit_full(stream: EventStream, init: FullParams | None = None,
             bounds: Sequence[tuple[float, float]] | None = None,
             n_starts: int = 3, seed=0, maxiter: int = 800,
             symmetric_start: bool = True, compute_stderr: bool = True) -> FitResult:
    """Maximize log L_g of the fully parameterized model (11 parameters).

    With symmetric_start=True one start is seeded from a symmetric fit, which
    also guarantees the fitted full model dominates the nested symmetric one.
    """
    _check_two_sided(stream)
    if stream.initial_intensity is not None:
        raise InvalidLikelihoodError(
            "initial intensity overrides are only supported for the symmetric model")
    if bounds is None:
        bounds = default_bounds_full(stream)
    times, sides, marks = stream.times, stream.sides, stream.marks_f
    T = stream.horizon

    def neg(x):
        v = backend.full_loglik(times, sides, marks, x[10], T, x[0], x[1], x[2], x[3],
                                x[4], x[5], x[6], x[7], x[8], x[9])
        return -v if np.isfinite(v) else 1e300

    x0 = init.as_array() if init is not None else _heuristic_init_full(stream)
    starts = _starts(x0, bounds, n_starts, seed)
    if symmetric_start:
        sym = fit_symmetric(stream, n_starts=1, seed=seed, compute_stderr=False)
        starts.append(FullParams.from_symmetric(sym.params).as_array())
    best, total_iter = _minimize_multistart(neg, starts, bounds, maxiter)
    params = FullParams.from_array(best.x)
    stderr = _hessian_stderr(neg, best.x) if compute_stderr else np.full(11, np.nan)
    return FitResult(params, -float(best.fun), stderr, total_iter, bool(best.success),
                     "full", len(stream), T)


@dataclass(frozen=True)
class ProfileResult:
    """Conditional maxima of log L_g over a (beta, eta) grid."""

    beta_grid: np.ndarray
    eta_grid: np.ndarray
    loglik: np.ndarray  # shape (len(beta_grid), len(eta_grid))

    def argmax(self) -> tuple[float, float]:
        i, j = np.unravel_index(np.argmax(self.loglik), self.loglik.shape)
        return float(self.beta_grid[i]), float(self.eta_grid[j])


def conditional_profile(stream: EventStream, beta_grid, eta_grid,
                        inner_init: SymmetricParams | None = None) -> ProfileResult:
    """Solve the concave inner problem max over (mu, alpha_s, alpha_c) per grid point."""
    beta_grid = np.atleast_1d(np.asarray(beta_grid, dtype=np.float64))
    eta_grid = np.atleast_1d(np.asarray(eta_grid, dtype=np.float64))
    if beta_grid.size == 0 or eta_grid.size == 0:
        raise ValueError("grids must be nonempty")
    times, sides, marks = stream.times, stream.sides, stream.marks_f
    T = stream.horizon
    lam0 = stream.initial_intensity
    bounds3 = [MU_BOUNDS, ALPHA_BOUNDS, ALPHA_BOUNDS]
    if inner_init is not None:
        warm = np.array([inner_init.mu, inner_init.alpha_s, inner_init.alpha_c])
    else:
        warm = _heuristic_init_symmetric(stream)[:3]
    values = np.empty((beta_grid.size, eta_grid.size))
    for i, beta in enumerate(beta_grid):
        x_row = warm.copy()
        for j, eta in enumerate(eta_grid):
            def neg(x3, beta=beta, eta=eta):
                l0 = (x3[0], x3[0]) if lam0 is None else lam0
                v = backend.sym_loglik(times, sides, marks, eta, T, x3[0], x3[1], x3[2],
                                       beta, l0[0], l0[1])
                return -v if np.isfinite(v) else 1e300
            res = minimize(neg, x_row, method="L-BFGS-B", jac="3-point", bounds=bounds3,
                           options=_LBFGSB_OPTIONS)
            values[i, j] = -res.fun
            x_row = res.x
            if j == 0:
                warm = res.x.copy()
    return ProfileResult(beta_grid, eta_grid, values)


def numerical_hessian(f: Callable, x: np.ndarray, rel_step: float = 1e-4,
                      abs_floor: float = 1e-7) -> np.ndarray:
    """Central-difference Hessian of a scalar function."""
    x = np.asarray(x, dtype=np.float64)
    p = x.size
    h = np.maximum(np.abs(x) * rel_step, abs_floor)
    hess = np.empty((p, p))
    f0 = f(x)
    for i in range(p):
        ei = np.zeros(p)
        ei[i] = h[i]
        hess[i, i] = (f(x + ei) - 2.0 * f0 + f(x - ei)) / (h[i] * h[i])
        for j in range(i + 1, p):
            ej = np.zeros(p)
            ej[j] = h[j]
            val = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (
                4.0 * h[i] * h[j])
            hess[i, j] = hess[j, i] = val
    return hess


def conditional_hessian(stream: EventStream, params: SymmetricParams,
                        rel_step: float = 1e-3) -> np.ndarray:
    """Numerical Hessian of log L_g in (mu, alpha_s, alpha_c) at fixed (beta, eta)."""
    times, sides, marks = stream.times, stream.sides, stream.marks_f
    T = stream.horizon
    lam0 = stream.initial_intensity
    beta, eta = params.beta, params.eta

    def ll(x3):
        l0 = (x3[0], x3[0]) if lam0 is None else lam0
        return backend.sym_loglik(times, sides, marks, eta, T, x3[0], x3[1], x3[2], beta,
                                  l0[0], l0[1])

    x = np.array([params.mu, params.alpha_s, params.alpha_c])
    return numerical_hessian(ll, x, rel_step=rel_step, abs_floor=1e-4)
