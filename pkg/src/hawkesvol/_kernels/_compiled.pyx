# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the pure-Python kernels.

Operation order and per-candidate RNG draw counts match `_pure` exactly, so
both backends yield identical output for the same Generator state.
"""

from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport ceil, exp, log, log1p

import numpy as np

cimport numpy as cnp
from numpy.random cimport bitgen_t

from hawkesvol.errors import ExplosionError

cnp.import_array()

MARK_CONSTANT = 0
MARK_EMPIRICAL = 1
MARK_GEOMETRIC = 2

cdef int _MARK_CONSTANT = 0
cdef int _MARK_GEOMETRIC = 2


cdef bitgen_t *_bitgen(object rng):
    capsule = rng.bit_generator.capsule
    return <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")


def sym_event_intensities(double[::1] times, signed char[::1] sides, double[::1] marks,
                          double eta, double mu, double a_s, double a_c, double beta,
                          double lam1_0, double lam2_0):
    cdef Py_ssize_t n = times.shape[0]
    lam1_arr = np.empty(n, dtype=np.float64)
    lam2_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] lam1 = lam1_arr
    cdef double[::1] lam2 = lam2_arr
    cdef double g1 = lam1_0 - mu
    cdef double g2 = lam2_0 - mu
    cdef double e0 = 1.0, s1 = 0.0, s2 = 0.0, prev = 0.0
    cdef double t, d, w
    cdef Py_ssize_t i
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
    return lam1_arr, lam2_arr


def sym_loglik(double[::1] times, signed char[::1] sides, double[::1] marks,
               double eta, double horizon, double mu, double a_s, double a_c,
               double beta, double lam1_0, double lam2_0):
    cdef double g1 = lam1_0 - mu
    cdef double g2 = lam2_0 - mu
    cdef double comp = 2.0 * mu * horizon + (g1 + g2) * (1.0 - exp(-beta * horizon)) / beta
    cdef double a_sum = a_s + a_c
    cdef double e0 = 1.0, s1 = 0.0, s2 = 0.0, prev = 0.0, ll = 0.0
    cdef double t, d, lam, w
    cdef Py_ssize_t i, n = times.shape[0]
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


def full_event_intensities(double[::1] times, signed char[::1] sides, double[::1] marks,
                           double eta, double mu1, double mu2,
                           double a11, double a22, double a12, double a21,
                           double b11, double b22, double b12, double b21):
    cdef Py_ssize_t n = times.shape[0]
    lam1_arr = np.empty(n, dtype=np.float64)
    lam2_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] lam1 = lam1_arr
    cdef double[::1] lam2 = lam2_arr
    cdef double s11 = 0.0, s12 = 0.0, s21 = 0.0, s22 = 0.0, prev = 0.0
    cdef double t, dt, w
    cdef Py_ssize_t i
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
    return lam1_arr, lam2_arr


def full_loglik(double[::1] times, signed char[::1] sides, double[::1] marks,
                double eta, double horizon, double mu1, double mu2,
                double a11, double a22, double a12, double a21,
                double b11, double b22, double b12, double b21):
    cdef double comp = (mu1 + mu2) * horizon
    cdef double s11 = 0.0, s12 = 0.0, s21 = 0.0, s22 = 0.0, prev = 0.0, ll = 0.0
    cdef double t, dt, lam, w, rem
    cdef Py_ssize_t i, n = times.shape[0]
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


cdef inline long _draw_mark(int kind, double mc, double md, double mcap,
                            long[::1] support, double[::1] cum,
                            double lam, bitgen_t *bg) except -1:
    cdef double u, m, p
    cdef long k
    cdef Py_ssize_t i
    if kind == _MARK_CONSTANT:
        return 1
    u = bg.next_double(bg.state)
    if kind == _MARK_GEOMETRIC:
        m = md + mc * lam
        if m > mcap:
            m = mcap
        p = 1.0 / m
        if p >= 1.0:
            return 1
        k = <long> ceil(log1p(-u) / log1p(-p))
        return k if k >= 1 else 1
    i = 0
    while u >= cum[i]:
        i += 1
    return support[i]


def sym_thinning(double mu, double a_s, double a_c, double beta, double eta,
                 double t0, double t1, double e1, double e2,
                 int mark_kind, double mc, double md, double mcap,
                 long[::1] support, double[::1] cum, double guard, object rng):
    cdef bitgen_t *bg = _bitgen(rng)
    cdef Py_ssize_t cap = 4096, n = 0, i
    times_arr = np.empty(cap, dtype=np.float64)
    sides_arr = np.empty(cap, dtype=np.int8)
    marks_arr = np.empty(cap, dtype=np.int64)
    l1_arr = np.empty(cap, dtype=np.float64)
    l2_arr = np.empty(cap, dtype=np.float64)
    cdef double[::1] times = times_arr
    cdef signed char[::1] sides = sides_arr
    cdef long[::1] marks = marks_arr
    cdef double[::1] l1 = l1_arr
    cdef double[::1] l2 = l2_arr
    cdef double t = t0, lam_bar, wait, t_next, d, lam1, lam2, tot, lam_side, w
    cdef long k
    cdef int side
    while True:
        lam_bar = 2.0 * mu
        if e1 > 0.0:
            lam_bar += e1
        if e2 > 0.0:
            lam_bar += e2
        wait = -log(1.0 - bg.next_double(bg.state)) / lam_bar
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
        if bg.next_double(bg.state) * lam_bar <= tot:
            side = 0 if bg.next_double(bg.state) * tot <= lam1 else 1
            lam_side = lam1 if side == 0 else lam2
            k = _draw_mark(mark_kind, mc, md, mcap, support, cum, lam_side, bg)
            w = 1.0 + (k - 1.0) * eta
            if side == 0:
                e1 += a_s * w
                e2 += a_c * w
            else:
                e1 += a_c * w
                e2 += a_s * w
            if 2.0 * mu + e1 + e2 > guard:
                raise ExplosionError(t, 2.0 * mu + e1 + e2)
            if n == cap:
                cap *= 2
                times_arr = np.resize(times_arr, cap)
                sides_arr = np.resize(sides_arr, cap)
                marks_arr = np.resize(marks_arr, cap)
                l1_arr = np.resize(l1_arr, cap)
                l2_arr = np.resize(l2_arr, cap)
                times = times_arr
                sides = sides_arr
                marks = marks_arr
                l1 = l1_arr
                l2 = l2_arr
            times[n] = t
            sides[n] = side
            marks[n] = k
            l1[n] = lam1
            l2[n] = lam2
            n += 1
    return (times_arr[:n].copy(), sides_arr[:n].copy(), marks_arr[:n].copy(),
            l1_arr[:n].copy(), l2_arr[:n].copy(), e1, e2)


def full_thinning(double mu1, double mu2,
                  double a11, double a22, double a12, double a21,
                  double b11, double b22, double b12, double b21, double eta,
                  double t0, double t1,
                  int mark_kind, double mc, double md, double mcap,
                  long[::1] support, double[::1] cum, double guard, object rng):
    cdef bitgen_t *bg = _bitgen(rng)
    cdef Py_ssize_t cap = 4096, n = 0
    times_arr = np.empty(cap, dtype=np.float64)
    sides_arr = np.empty(cap, dtype=np.int8)
    marks_arr = np.empty(cap, dtype=np.int64)
    l1_arr = np.empty(cap, dtype=np.float64)
    l2_arr = np.empty(cap, dtype=np.float64)
    cdef double[::1] times = times_arr
    cdef signed char[::1] sides = sides_arr
    cdef long[::1] marks = marks_arr
    cdef double[::1] l1 = l1_arr
    cdef double[::1] l2 = l2_arr
    cdef double s11 = 0.0, s12 = 0.0, s21 = 0.0, s22 = 0.0
    cdef double mu_sum = mu1 + mu2
    cdef double t = t0, lam_bar, wait, t_next, dt, lam1, lam2, tot, lam_side, w
    cdef long k
    cdef int side
    while True:
        lam_bar = mu_sum + s11 + s12 + s21 + s22
        wait = -log(1.0 - bg.next_double(bg.state)) / lam_bar
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
        if bg.next_double(bg.state) * lam_bar <= tot:
            side = 0 if bg.next_double(bg.state) * tot <= lam1 else 1
            lam_side = lam1 if side == 0 else lam2
            k = _draw_mark(mark_kind, mc, md, mcap, support, cum, lam_side, bg)
            w = 1.0 + (k - 1.0) * eta
            if side == 0:
                s11 += a11 * w
                s21 += a21 * w
            else:
                s12 += a12 * w
                s22 += a22 * w
            if mu_sum + s11 + s12 + s21 + s22 > guard:
                raise ExplosionError(t, mu_sum + s11 + s12 + s21 + s22)
            if n == cap:
                cap *= 2
                times_arr = np.resize(times_arr, cap)
                sides_arr = np.resize(sides_arr, cap)
                marks_arr = np.resize(marks_arr, cap)
                l1_arr = np.resize(l1_arr, cap)
                l2_arr = np.resize(l2_arr, cap)
                times = times_arr
                sides = sides_arr
                marks = marks_arr
                l1 = l1_arr
                l2 = l2_arr
            times[n] = t
            sides[n] = side
            marks[n] = k
            l1[n] = lam1
            l2[n] = lam2
            n += 1
    return (times_arr[:n].copy(), sides_arr[:n].copy(), marks_arr[:n].copy(),
            l1_arr[:n].copy(), l2_arr[:n].copy())
