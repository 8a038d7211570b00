"""Shared fixtures-in-plain-python: reference parameter sets and brute-force oracles."""

import math

import numpy as np

from hawkesvol.core import EventStream, SymmetricParams

# reference parameter panels used across the suite
PANEL1 = SymmetricParams(mu=0.10, alpha_s=0.95, alpha_c=0.82, beta=2.25, eta=0.19)
PANEL2 = SymmetricParams(mu=0.15, alpha_s=0.62, alpha_c=0.50, beta=1.90, eta=0.22)


def direct_intensities(stream: EventStream, params: SymmetricParams, t: float,
                       lam0=None):
    """O(n) direct summation of the intensity definition (left limit)."""
    mu, beta = params.mu, params.beta
    if lam0 is None:
        lam0 = stream.initial_or_default(mu)
    sel = stream.times < t
    w = 1.0 + (stream.marks[sel] - 1.0) * params.eta
    decay = np.exp(-beta * (t - stream.times[sel]))
    s1 = float(np.sum(w * decay * (stream.sides[sel] == 0)))
    s2 = float(np.sum(w * decay * (stream.sides[sel] == 1)))
    e0 = math.exp(-beta * t)
    lam1 = mu + (lam0[0] - mu) * e0 + params.alpha_s * s1 + params.alpha_c * s2
    lam2 = mu + (lam0[1] - mu) * e0 + params.alpha_c * s1 + params.alpha_s * s2
    return lam1, lam2


def direct_loglik(stream: EventStream, params: SymmetricParams) -> float:
    """O(n^2) likelihood: direct intensity sums plus the closed-form integral."""
    from hawkesvol.estimate import compensator_integral

    ll = 0.0
    for i in range(len(stream)):
        lam1, lam2 = direct_intensities(stream, params, float(stream.times[i]))
        ll += math.log(lam1 if stream.sides[i] == 0 else lam2)
    return ll - compensator_integral(stream, params)


def quadrature_compensator(stream: EventStream, params: SymmetricParams,
                           tol: float = 1e-12) -> float:
    """Adaptive quadrature of the total intensity, piecewise between events."""
    from scipy.integrate import quad

    from hawkesvol.core import intensity_at

    knots = np.concatenate(([0.0], stream.times, [stream.horizon]))
    total = 0.0
    for a, b in zip(knots[:-1], knots[1:]):
        if b <= a:
            continue
        val, _ = quad(
            lambda t: (lambda s: s.lambda_g1 + s.lambda_g2)(intensity_at(stream, params, t)),
            a, b, epsabs=tol, epsrel=tol, limit=200,
        )
        total += val
    return total


def random_stream(rng: np.random.Generator, n: int, horizon: float,
                  max_mark: int = 4) -> EventStream:
    """Arbitrary (not model-generated) valid stream for algebraic identities."""
    times = np.sort(rng.uniform(0.0, horizon, size=n))
    times += np.arange(n) * 1e-9  # break ties
    sides = rng.integers(0, 2, size=n)
    marks = rng.integers(1, max_mark + 1, size=n)
    return EventStream(times, sides, marks, horizon)
