"""Pure-Python reference kernels.

These mirror the compiled extension exactly (same operation order, same
per-candidate RNG draw counts), so for a given `numpy.random.Generator` state
the two backends produce identical output. They are the fallback when the
extension is unavailable and the ground truth the extension is tested against.
"""

from __future__ import annotations

from math import ceil, exp, log, log1p

import numpy as np

from hawkesvol.errors import ExplosionError

MARK_CONSTANT = 0
MARK_EMPIRICAL = 1
MARK_GEOMETRIC = 2

_EMPTY_F = np.empty(0, dtype=np.float64)
_EMPTY_I = np.empty(0, dtype=np.int64)


def sym_event_intensities(times, sides, marks, eta, mu, a_s, a_c, beta, lam1_0, lam2_0):
    """Left-limit ground intensities at every event of a symmetric-model stream."""
    n = times.shape[0]
    lam1 = np.empty(n, dtype=np.float64)
    lam2 = np.empty(n, dtype=np.float64)
    g1 = lam1_0 - mu
    g2 = lam2_0 - mu
    e0 = 1.0  # decay factor for the initial excess, exp(-beta * t)
    s1 = 0.0  # sum of (1+(k-1)eta) exp(-beta (t-u)) over past up events
    s2 = 0.0  # same over past down events
    prev = 0.0
    for i in range(n):
        t = times[i]
        d = exp(-beta * (t - prev))
        e0 *= d
        s1 *= d
        s2 *= d
        lam1[i] = mu + g1 * e0 + a_s * s1 + a_c * s2
        lam2[i] = mu + g2 * e0 + a_c * s1 + a_s * s2
        w = 1.0 + (marks[i] - 1.0) * eta
        if sides[i] == 0:
            s1 += w
        else:
            s2 += w
        prev = t
    return lam1, lam2


def sym_loglik(times, sides, marks, eta, horizon, mu, a_s, a_c, beta, lam1_0, lam2_0):
    """Ground log-likelihood of the symmetric model; -inf if an intensity is <= 0."""
    g1 = lam1_0 - mu
    g2 = lam2_0 - mu
    comp = 2.0 * mu * horizon + (g1 + g2) * (1.0 - exp(-beta * horizon)) / beta
    a_sum = a_s + a_c
    e0 = 1.0
    s1 = 0.0
    s2 = 0.0
    prev = 0.0
    ll = 0.0
    n = times.shape[0]
    for i in range(n):
        t = times[i]
        d = exp(-beta * (t - prev))
        e0 *= d
        s1 *= d
        s2 *= d
        if sides[i] == 0:
            lam = mu + g1 * e0 + a_s * s1 + a_c * s2
        else:
            lam = mu + g2 * e0 + a_c * s1 + a_s * s2
        if lam <= 0.0:
            return -np.inf
        ll += log(lam)
        w = 1.0 + (marks[i] - 1.0) * eta
        comp += a_sum * w * (1.0 - exp(-beta * (horizon - t))) / beta
        if sides[i] == 0:
            s1 += w
        else:
            s2 += w
        prev = t
    return ll - comp


def full_event_intensities(times, sides, marks, eta, mu1, mu2,
                           a11, a22, a12, a21, b11, b22, b12, b21):
    """Left-limit intensities for the fully parameterized model (lambda(0)=mu)."""
    n = times.shape[0]
    lam1 = np.empty(n, dtype=np.float64)
    lam2 = np.empty(n, dtype=np.float64)
    s11 = s12 = s21 = s22 = 0.0
    prev = 0.0
    for i in range(n):
        t = times[i]
        dt = t - prev
        s11 *= exp(-b11 * dt)
        s12 *= exp(-b12 * dt)
        s21 *= exp(-b21 * dt)
        s22 *= exp(-b22 * dt)
        lam1[i] = mu1 + s11 + s12
        lam2[i] = mu2 + s21 + s22
        w = 1.0 + (marks[i] - 1.0) * eta
        if sides[i] == 0:
            s11 += a11 * w
            s21 += a21 * w
        else:
            s12 += a12 * w
            s22 += a22 * w
        prev = t
    return lam1, lam2


def full_loglik(times, sides, marks, eta, horizon, mu1, mu2,
                a11, a22, a12, a21, b11, b22, b12, b21):
    comp = (mu1 + mu2) * horizon
    s11 = s12 = s21 = s22 = 0.0
    prev = 0.0
    ll = 0.0
    n = times.shape[0]
    for i in range(n):
        t = times[i]
        dt = t - prev
        s11 *= exp(-b11 * dt)
        s12 *= exp(-b12 * dt)
        s21 *= exp(-b21 * dt)
        s22 *= exp(-b22 * dt)
        if sides[i] == 0:
            lam = mu1 + s11 + s12
        else:
            lam = mu2 + s21 + s22
        if lam <= 0.0:
            return -np.inf
        ll += log(lam)
        w = 1.0 + (marks[i] - 1.0) * eta
        rem = horizon - t
        if sides[i] == 0:
            comp += a11 * w * (1.0 - exp(-b11 * rem)) / b11
            comp += a21 * w * (1.0 - exp(-b21 * rem)) / b21
            s11 += a11 * w
            s21 += a21 * w
        else:
            comp += a12 * w * (1.0 - exp(-b12 * rem)) / b12
            comp += a22 * w * (1.0 - exp(-b22 * rem)) / b22
            s12 += a12 * w
            s22 += a22 * w
        prev = t
    return ll - comp


def _draw_mark(kind, mc, md, mcap, support, cum, lam, rand):
    if kind == MARK_CONSTANT:
        return 1
    u = rand()
    if kind == MARK_GEOMETRIC:
        m = md + mc * lam
        if m > mcap:
            m = mcap
        p = 1.0 / m
        if p >= 1.0:
            return 1
        k = int(ceil(log1p(-u) / log1p(-p)))
        return k if k >= 1 else 1
    i = 0
    while u >= cum[i]:
        i += 1
    return int(support[i])


def sym_thinning(mu, a_s, a_c, beta, eta, t0, t1, e1, e2,
                 mark_kind, mc, md, mcap, support, cum, guard, rng):
    """Ogata thinning on [t0, t1) for the symmetric model.

    e1/e2 are the excitation excesses (lambda_i - mu) at t0, right limit.
    Returns (times, sides, marks, lam1_left, lam2_left, e1_end, e2_end).
    """
    rand = rng.random
    times = []
    sides = []
    marks = []
    l1 = []
    l2 = []
    t = t0
    while True:
        lam_bar = 2.0 * mu + (e1 if e1 > 0.0 else 0.0) + (e2 if e2 > 0.0 else 0.0)
        wait = -log(1.0 - rand()) / lam_bar
        t_next = t + wait
        if t_next >= t1:
            d = exp(-beta * (t1 - t))
            e1 *= d
            e2 *= d
            break
        d = exp(-beta * (t_next - t))
        e1 *= d
        e2 *= d
        t = t_next
        lam1 = mu + e1
        lam2 = mu + e2
        tot = lam1 + lam2
        if tot > lam_bar * (1.0 + 1e-9):
            raise AssertionError("thinning dominator violated")
        if rand() * lam_bar <= tot:
            side = 0 if rand() * tot <= lam1 else 1
            lam_side = lam1 if side == 0 else lam2
            k = _draw_mark(mark_kind, mc, md, mcap, support, cum, lam_side, rand)
            w = 1.0 + (k - 1.0) * eta
            if side == 0:
                e1 += a_s * w
                e2 += a_c * w
            else:
                e1 += a_c * w
                e2 += a_s * w
            if 2.0 * mu + e1 + e2 > guard:
                raise ExplosionError(t, 2.0 * mu + e1 + e2)
            times.append(t)
            sides.append(side)
            marks.append(k)
            l1.append(lam1)
            l2.append(lam2)
    if not times:
        return (_EMPTY_F.copy(), np.empty(0, dtype=np.int8), _EMPTY_I.copy(),
                _EMPTY_F.copy(), _EMPTY_F.copy(), e1, e2)
    return (np.asarray(times, dtype=np.float64),
            np.asarray(sides, dtype=np.int8),
            np.asarray(marks, dtype=np.int64),
            np.asarray(l1, dtype=np.float64),
            np.asarray(l2, dtype=np.float64),
            e1, e2)


def full_thinning(mu1, mu2, a11, a22, a12, a21, b11, b22, b12, b21, eta,
                  t0, t1, mark_kind, mc, md, mcap, support, cum, guard, rng):
    """Ogata thinning on [t0, t1) for the fully parameterized model."""
    rand = rng.random
    times = []
    sides = []
    marks = []
    l1 = []
    l2 = []
    s11 = s12 = s21 = s22 = 0.0
    mu_sum = mu1 + mu2
    t = t0
    while True:
        lam_bar = mu_sum + s11 + s12 + s21 + s22
        wait = -log(1.0 - rand()) / lam_bar
        t_next = t + wait
        if t_next >= t1:
            break
        dt = t_next - t
        s11 *= exp(-b11 * dt)
        s12 *= exp(-b12 * dt)
        s21 *= exp(-b21 * dt)
        s22 *= exp(-b22 * dt)
        t = t_next
        lam1 = mu1 + s11 + s12
        lam2 = mu2 + s21 + s22
        tot = lam1 + lam2
        if tot > lam_bar * (1.0 + 1e-9):
            raise AssertionError("thinning dominator violated")
        if rand() * lam_bar <= tot:
            side = 0 if rand() * tot <= lam1 else 1
            lam_side = lam1 if side == 0 else lam2
            k = _draw_mark(mark_kind, mc, md, mcap, support, cum, lam_side, rand)
            w = 1.0 + (k - 1.0) * eta
            if side == 0:
                s11 += a11 * w
                s21 += a21 * w
            else:
                s12 += a12 * w
                s22 += a22 * w
            if mu_sum + s11 + s12 + s21 + s22 > guard:
                raise ExplosionError(t, mu_sum + s11 + s12 + s21 + s22)
            times.append(t)
            sides.append(side)
            marks.append(k)
            l1.append(lam1)
            l2.append(lam2)
    if not times:
        return (_EMPTY_F.copy(), np.empty(0, dtype=np.int8), _EMPTY_I.copy(),
                _EMPTY_F.copy(), _EMPTY_F.copy())
    return (np.asarray(times, dtype=np.float64),
            np.asarray(sides, dtype=np.int8),
            np.asarray(marks, dtype=np.int64),
            np.asarray(l1, dtype=np.float64),
            np.asarray(l2, dtype=np.float64))
