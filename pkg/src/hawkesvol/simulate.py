"""Path simulation for the symmetric, asymmetric, and time-varying models.

Thinning uses the right-limit total intensity after the previous candidate as
the dominating rate; with exponential kernels the total intensity only decays
between events, so that rate is a valid envelope. The dominating rate is
refreshed at every rejected candidate.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np

from hawkesvol._kernels import MARK_CONSTANT, MARK_EMPIRICAL, MARK_GEOMETRIC, backend
from hawkesvol._kernels import _pure
from hawkesvol.core import EventStream, FullParams, IntensityPath, SymmetricParams, stationarity_check
from hawkesvol.errors import InvalidParameterError

_EMPTY_SUPPORT = np.empty(0, dtype=np.int64)
_EMPTY_CUM = np.empty(0, dtype=np.float64)


@dataclass(frozen=True)
class ConstantOne:
    """Every event carries mark 1 (the unmarked model)."""

    def conservative_mark_bound(self) -> float:
        return 1.0

    def mean_mark(self, lam: float) -> float:
        return 1.0


@dataclass(frozen=True)
class EmpiricalMarks:
    """Marks drawn i.i.d. from a fixed pmf on positive integers."""

    marks: tuple[int, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.marks) != len(self.probs) or not self.marks:
            raise InvalidParameterError("pmf needs matching, nonempty support and probs")
        if any(int(m) != m or m < 1 for m in self.marks):
            raise InvalidParameterError("pmf support must be positive integers")
        if any(p < 0 for p in self.probs):
            raise InvalidParameterError("pmf probabilities must be nonnegative")
        if abs(sum(self.probs) - 1.0) > 1e-12:
            raise InvalidParameterError(f"pmf sums to {sum(self.probs)}, not 1")

    @classmethod
    def from_pmf(cls, pmf: dict[int, float]) -> "EmpiricalMarks":
        items = sorted(pmf.items())
        return cls(tuple(k for k, _ in items), tuple(float(p) for _, p in items))

    def conservative_mark_bound(self) -> float:
        return self.mean_mark(0.0)

    def mean_mark(self, lam: float) -> float:
        return float(sum(k * p for k, p in zip(self.marks, self.probs)))

    def moments(self) -> tuple[float, float]:
        """(E[k], E[k^2]) of the pmf."""
        m1 = sum(k * p for k, p in zip(self.marks, self.probs))
        m2 = sum(k * k * p for k, p in zip(self.marks, self.probs))
        return float(m1), float(m2)


@dataclass(frozen=True)
class ConditionalGeometric:
    """Geometric mark with intensity-dependent mean min(d + c*lambda, cap)."""

    c: float
    d: float
    cap: float

    def __post_init__(self):
        if self.d < 1.0:
            raise InvalidParameterError(f"d must be >= 1, got {self.d}")
        if self.c < 0.0:
            raise InvalidParameterError(f"c must be >= 0, got {self.c}")
        if self.cap < self.d:
            raise InvalidParameterError(f"cap must be >= d, got cap={self.cap} d={self.d}")

    def conservative_mark_bound(self) -> float:
        return self.cap

    def mean_mark(self, lam: float) -> float:
        return min(self.d + self.c * lam, self.cap)


MarkSampler = Union[ConstantOne, EmpiricalMarks, ConditionalGeometric]


def _encode_sampler(sampler: MarkSampler):
    if isinstance(sampler, ConstantOne):
        return MARK_CONSTANT, 0.0, 0.0, 0.0, _EMPTY_SUPPORT, _EMPTY_CUM
    if isinstance(sampler, ConditionalGeometric):
        return MARK_GEOMETRIC, sampler.c, sampler.d, sampler.cap, _EMPTY_SUPPORT, _EMPTY_CUM
    if isinstance(sampler, EmpiricalMarks):
        support = np.asarray(sampler.marks, dtype=np.int64)
        cum = np.cumsum(np.asarray(sampler.probs, dtype=np.float64))
        cum[-1] = 1.0
        return MARK_EMPIRICAL, 0.0, 0.0, 0.0, support, cum
    raise TypeError(f"unknown sampler {sampler!r}")


def sample_mark(sampler: MarkSampler, lambda_gi: float, rng: np.random.Generator) -> int:
    """Draw one mark at the given (left-limit) ground intensity."""
    kind, mc, md, mcap, support, cum = _encode_sampler(sampler)
    return _pure._draw_mark(kind, mc, md, mcap, support, cum, lambda_gi, rng.random)


@dataclass(frozen=True)
class Segment:
    duration: float
    params: SymmetricParams
    sampler: MarkSampler

    def __post_init__(self):
        if self.duration <= 0:
            raise InvalidParameterError("segment duration must be positive")


@dataclass(frozen=True)
class Scenario:
    """Piecewise-constant parameter schedule; intensities carry over at switches."""

    segments: tuple[Segment, ...]

    def __post_init__(self):
        if not self.segments:
            raise InvalidParameterError("scenario needs at least one segment")

    @property
    def horizon(self) -> float:
        return float(sum(s.duration for s in self.segments))

    @classmethod
    def constant(cls, params: SymmetricParams, sampler: MarkSampler, horizon: float) -> "Scenario":
        return cls((Segment(horizon, params, sampler),))


@dataclass(frozen=True)
class SimulationResult:
    stream: EventStream
    intensity: IntensityPath
    initial_state: tuple[float, float]  # (lambda_g1, lambda_g2) right limit at t=0
    final_state: tuple[float, float]


def _warn_if_nonstationary(params: SymmetricParams, sampler: MarkSampler) -> bool:
    chk = stationarity_check(params, sampler.conservative_mark_bound())
    if not chk.stationary:
        warnings.warn(
            f"spectral radius {chk.spectral:.4g} >= 1 at the conservative mark bound; "
            "the path may be explosive",
            RuntimeWarning,
            stacklevel=3,
        )
        return True
    return False


def simulate_scenario(scenario: Scenario, *, seed=None, rng: np.random.Generator | None = None,
                      initial: tuple[float, float] | None = None, burn_in: float = 0.0,
                      guard: float = 1e6) -> SimulationResult:
    """Simulate one path of the (possibly time-varying) symmetric model.

    burn_in runs the first segment's dynamics on [-burn_in, 0) and discards
    those events, so the state at t=0 is approximately stationary.
    """
    if rng is None:
        rng = np.random.default_rng(seed)
    first = scenario.segments[0]
    for seg in scenario.segments:
        seg.params.validate_marks(int(np.ceil(seg.sampler.conservative_mark_bound())))
        _warn_if_nonstationary(seg.params, seg.sampler)

    lam0 = (first.params.mu, first.params.mu) if initial is None else (float(initial[0]), float(initial[1]))
    e1 = lam0[0] - first.params.mu
    e2 = lam0[1] - first.params.mu
    if burn_in > 0.0:
        p = first.params
        kind, mc, md, mcap, sup, cum = _encode_sampler(first.sampler)
        *_, e1, e2 = backend.sym_thinning(
            p.mu, p.alpha_s, p.alpha_c, p.beta, p.eta, -burn_in, 0.0, e1, e2,
            kind, mc, md, mcap, sup, cum, guard, rng,
        )
    init_state = (first.params.mu + e1, first.params.mu + e2)

    chunks = []
    t0 = 0.0
    lam_end = init_state
    for seg in scenario.segments:
        p = seg.params
        e1 = lam_end[0] - p.mu
        e2 = lam_end[1] - p.mu
        kind, mc, md, mcap, sup, cum = _encode_sampler(seg.sampler)
        times, sides, marks, l1, l2, e1, e2 = backend.sym_thinning(
            p.mu, p.alpha_s, p.alpha_c, p.beta, p.eta, t0, t0 + seg.duration, e1, e2,
            kind, mc, md, mcap, sup, cum, guard, rng,
        )
        chunks.append((times, sides, marks, l1, l2))
        t0 += seg.duration
        lam_end = (p.mu + e1, p.mu + e2)

    times = np.concatenate([c[0] for c in chunks])
    sides = np.concatenate([c[1] for c in chunks])
    marks = np.concatenate([c[2] for c in chunks])
    l1 = np.concatenate([c[3] for c in chunks])
    l2 = np.concatenate([c[4] for c in chunks])
    stream = EventStream(times, sides, marks, scenario.horizon)
    return SimulationResult(stream, IntensityPath(stream.times, l1, l2), init_state, lam_end)


def simulate_path(params: SymmetricParams, sampler: MarkSampler, horizon: float, *,
                  seed=None, rng: np.random.Generator | None = None,
                  initial: tuple[float, float] | None = None, burn_in: float = 0.0,
                  guard: float = 1e6) -> SimulationResult:
    """Simulate one constant-parameter symmetric path on [0, horizon]."""
    return simulate_scenario(
        Scenario.constant(params, sampler, horizon),
        seed=seed, rng=rng, initial=initial, burn_in=burn_in, guard=guard,
    )


def simulate_full(params: FullParams, sampler: MarkSampler, horizon: float, *,
                  seed=None, rng: np.random.Generator | None = None,
                  guard: float = 1e6) -> SimulationResult:
    """Simulate the fully parameterized model (four independent decay channels)."""
    if rng is None:
        rng = np.random.default_rng(seed)
    params.validate_marks(int(np.ceil(sampler.conservative_mark_bound())))
    factor = 1.0 + (sampler.conservative_mark_bound() - 1.0) * params.eta
    q = factor * np.array([
        [params.alpha11 / params.beta11, params.alpha12 / params.beta12],
        [params.alpha21 / params.beta21, params.alpha22 / params.beta22],
    ])
    rho = max(abs(np.linalg.eigvals(q)))
    if rho >= 1.0:
        warnings.warn(
            f"branching spectral radius {rho:.4g} >= 1 at the conservative mark bound",
            RuntimeWarning, stacklevel=2,
        )
    kind, mc, md, mcap, sup, cum = _encode_sampler(sampler)
    times, sides, marks, l1, l2 = backend.full_thinning(
        params.mu1, params.mu2,
        params.alpha11, params.alpha22, params.alpha12, params.alpha21,
        params.beta11, params.beta22, params.beta12, params.beta21, params.eta,
        0.0, horizon, kind, mc, md, mcap, sup, cum, guard, rng,
    )
    stream = EventStream(times, sides, marks, horizon)
    w = 1.0 + (marks - 1.0) * params.eta
    up = sides == 0
    rem = horizon - times

    def _state(alpha, beta, mask):
        return alpha * float(np.sum(w[mask] * np.exp(-beta * rem[mask])))

    lam1_end = params.mu1 + _state(params.alpha11, params.beta11, up) + \
        _state(params.alpha12, params.beta12, ~up)
    lam2_end = params.mu2 + _state(params.alpha21, params.beta21, up) + \
        _state(params.alpha22, params.beta22, ~up)
    return SimulationResult(stream, IntensityPath(stream.times, l1, l2),
                            (params.mu1, params.mu2), (lam1_end, lam2_end))


def spawn_seeds(seed, n: int) -> list[np.random.SeedSequence]:
    """Independent child seeds for reproducible per-path parallelism."""
    return np.random.SeedSequence(seed).spawn(n)
