"""Domain types and intensity analytics for the two-sided marked Hawkes model.

Conventions used throughout the package:

* time is measured in seconds from session open, as float64;
* side 0 is an up move (process 1), side 1 is a down move (process 2);
* intensities are left limits unless stated otherwise: an event exactly at
  the evaluation time does not contribute its own jump;
* the initial intensities default to (mu, mu) because no pre-session history
  is observable; both can be overridden on the stream.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from hawkesvol._kernels import backend
from hawkesvol.errors import InvalidParameterError, NonstationaryError


class Direction(enum.IntEnum):
    UP = 0
    DOWN = 1

    @classmethod
    def parse(cls, text: str) -> "Direction":
        key = text.strip().lower()
        if key in ("up", "u", "0", "1up"):
            return cls.UP
        if key in ("down", "d", "1"):
            return cls.DOWN
        raise ValueError(f"unknown direction {text!r}")

    def label(self) -> str:
        return "up" if self is Direction.UP else "down"


@dataclass(frozen=True)
class SymmetricParams:
    """Kernel parameters (mu, alpha_s, alpha_c, beta, eta) of the symmetric model.

    mu       baseline intensity per side (events/sec)
    alpha_s  self-excitation jump scale (1/sec)
    alpha_c  cross-excitation jump scale (1/sec)
    beta     exponential decay rate (1/sec)
    eta      slope of the linear mark-impact function (dimensionless)
    """

    mu: float
    alpha_s: float
    alpha_c: float
    beta: float
    eta: float

    def __post_init__(self):
        if not (self.mu > 0 and np.isfinite(self.mu)):
            raise InvalidParameterError(f"mu must be positive, got {self.mu}")
        if not (self.beta > 0 and np.isfinite(self.beta)):
            raise InvalidParameterError(f"beta must be positive, got {self.beta}")
        if self.alpha_s < 0 or self.alpha_c < 0:
            raise InvalidParameterError("alpha_s and alpha_c must be nonnegative")
        if not np.isfinite(self.eta):
            raise InvalidParameterError("eta must be finite")

    def validate_marks(self, max_mark: int) -> None:
        """Check that every admissible excitation jump stays positive."""
        if max_mark > 1 and 1.0 + (max_mark - 1) * self.eta <= 0.0:
            raise InvalidParameterError(
                f"eta={self.eta} makes the impact of mark {max_mark} nonpositive"
            )

    def as_array(self) -> np.ndarray:
        return np.array([self.mu, self.alpha_s, self.alpha_c, self.beta, self.eta])

    @classmethod
    def from_array(cls, x: Sequence[float]) -> "SymmetricParams":
        return cls(*(float(v) for v in x))

    names = ("mu", "alpha_s", "alpha_c", "beta", "eta")


@dataclass(frozen=True)
class FullParams:
    """Parameters of the fully characterized (asymmetric) model.

    alpha_ij / beta_ij drive the excitation that events of side j inject into
    the intensity of side i; eta is shared by all four channels.
    """

    mu1: float
    mu2: float
    alpha11: float
    alpha22: float
    alpha12: float
    alpha21: float
    beta11: float
    beta22: float
    beta12: float
    beta21: float
    eta: float

    def __post_init__(self):
        for name in ("mu1", "mu2", "beta11", "beta22", "beta12", "beta21"):
            v = getattr(self, name)
            if not (v > 0 and np.isfinite(v)):
                raise InvalidParameterError(f"{name} must be positive, got {v}")
        for name in ("alpha11", "alpha22", "alpha12", "alpha21"):
            if getattr(self, name) < 0:
                raise InvalidParameterError(f"{name} must be nonnegative")
        if not np.isfinite(self.eta):
            raise InvalidParameterError("eta must be finite")

    def validate_marks(self, max_mark: int) -> None:
        if max_mark > 1 and 1.0 + (max_mark - 1) * self.eta <= 0.0:
            raise InvalidParameterError(
                f"eta={self.eta} makes the impact of mark {max_mark} nonpositive"
            )

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, n) for n in self.names])

    @classmethod
    def from_array(cls, x: Sequence[float]) -> "FullParams":
        return cls(*(float(v) for v in x))

    @classmethod
    def from_symmetric(cls, p: SymmetricParams) -> "FullParams":
        return cls(p.mu, p.mu, p.alpha_s, p.alpha_s, p.alpha_c, p.alpha_c,
                   p.beta, p.beta, p.beta, p.beta, p.eta)

    names = ("mu1", "mu2", "alpha11", "alpha22", "alpha12", "alpha21",
             "beta11", "beta22", "beta12", "beta21", "eta")


@dataclass(frozen=True)
class MarkedEvent:
    time: float
    direction: Direction
    mark: int

    def __post_init__(self):
        if self.mark < 1:
            raise InvalidParameterError(f"mark must be >= 1, got {self.mark}")


class EventStream:
    """Ordered up/down price-change events with integer marks on [0, horizon].

    Backed by flat arrays (times float64, sides int8, marks int64) so kernels
    can consume it without conversion.
    """

    __slots__ = ("times", "sides", "marks", "horizon", "initial_intensity", "_marks_f")

    def __init__(self, times, sides, marks, horizon: float,
                 initial_intensity: tuple[float, float] | None = None):
        self.times = np.ascontiguousarray(times, dtype=np.float64)
        self.sides = np.ascontiguousarray(sides, dtype=np.int8)
        self.marks = np.ascontiguousarray(marks, dtype=np.int64)
        self.horizon = float(horizon)
        self.initial_intensity = initial_intensity
        self._marks_f = None
        n = self.times.shape[0]
        if self.sides.shape[0] != n or self.marks.shape[0] != n:
            raise ValueError("times, sides and marks must have equal length")
        if n:
            if self.times[0] < 0.0 or self.times[-1] > self.horizon:
                raise ValueError("event times must lie in [0, horizon]")
            if np.any(np.diff(self.times) <= 0.0):
                raise ValueError("event times must be strictly increasing")
            if np.any(self.marks < 1):
                raise ValueError("marks must be >= 1")
            if np.any((self.sides != 0) & (self.sides != 1)):
                raise ValueError("sides must be 0 (up) or 1 (down)")
        if self.horizon <= 0.0:
            raise ValueError("horizon must be positive")

    @classmethod
    def from_events(cls, events: Sequence[MarkedEvent], horizon: float,
                    initial_intensity=None) -> "EventStream":
        return cls(
            [e.time for e in events],
            [int(e.direction) for e in events],
            [e.mark for e in events],
            horizon,
            initial_intensity,
        )

    def __len__(self) -> int:
        return self.times.shape[0]

    def __iter__(self) -> Iterator[MarkedEvent]:
        for t, s, k in zip(self.times, self.sides, self.marks):
            yield MarkedEvent(float(t), Direction(int(s)), int(k))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, EventStream)
            and self.horizon == other.horizon
            and np.array_equal(self.times, other.times)
            and np.array_equal(self.sides, other.sides)
            and np.array_equal(self.marks, other.marks)
        )

    @property
    def marks_f(self) -> np.ndarray:
        """Marks as float64, cached for the likelihood kernels."""
        if self._marks_f is None:
            self._marks_f = self.marks.astype(np.float64)
        return self._marks_f

    def counts(self) -> tuple[int, int]:
        up = int(np.count_nonzero(self.sides == 0))
        return up, len(self) - up

    def max_mark(self) -> int:
        return int(self.marks.max()) if len(self) else 1

    def initial_or_default(self, mu1: float, mu2: float | None = None) -> tuple[float, float]:
        if self.initial_intensity is not None:
            return (float(self.initial_intensity[0]), float(self.initial_intensity[1]))
        return (mu1, mu1 if mu2 is None else mu2)

    def window(self, start: float, end: float) -> "EventStream":
        """Sub-stream on [start, end), rebased to start."""
        sel = (self.times >= start) & (self.times < end)
        return EventStream(self.times[sel] - start, self.sides[sel], self.marks[sel],
                           end - start)

    def net_tick_change(self) -> int:
        """Mark-weighted up count minus mark-weighted down count."""
        signs = np.where(self.sides == 0, 1, -1)
        return int(np.sum(signs * self.marks))


class Convention(enum.Enum):
    LEFT_LIMIT = "left"
    RIGHT_LIMIT = "right"


@dataclass(frozen=True)
class IntensityState:
    lambda_g1: float
    lambda_g2: float
    convention: Convention = Convention.LEFT_LIMIT


@dataclass(frozen=True)
class IntensityPath:
    """Left-limit ground intensities evaluated at the stream's event times."""

    times: np.ndarray
    lambda_g1: np.ndarray
    lambda_g2: np.ndarray

    def own_side(self, sides: np.ndarray) -> np.ndarray:
        """Intensity of the component to which each event belongs."""
        return np.where(sides == 0, self.lambda_g1, self.lambda_g2)

    def other_side(self, sides: np.ndarray) -> np.ndarray:
        return np.where(sides == 0, self.lambda_g2, self.lambda_g1)


def impact(k: float, eta: float, mean_mark: float) -> float:
    """Normalized linear impact of a mark: (1+(k-1)eta) / (1+(mean_mark-1)eta).

    Averages to one under any mark law with the given mean, so the branching
    scale is carried entirely by alpha.
    """
    if mean_mark < 1.0:
        raise InvalidParameterError(f"mean_mark must be >= 1, got {mean_mark}")
    num = 1.0 + (k - 1.0) * eta
    den = 1.0 + (mean_mark - 1.0) * eta
    if num <= 0.0 or den <= 0.0:
        raise InvalidParameterError(
            f"impact is nonpositive for k={k}, eta={eta}, mean_mark={mean_mark}"
        )
    return num / den


def excitation_jump(alpha: float, k: float, eta: float) -> float:
    """Intensity increment alpha * (1+(k-1)eta) injected by an event of mark k."""
    w = 1.0 + (k - 1.0) * eta
    if w <= 0.0:
        raise InvalidParameterError(f"nonpositive excitation weight for k={k}, eta={eta}")
    return alpha * w


@dataclass(frozen=True)
class StationarityResult:
    stationary: bool
    spectral: float
    xi1: float
    xi2: float


def stationarity_check(params: SymmetricParams, k_lambda: float = 1.0) -> StationarityResult:
    """Spectral condition and relaxation eigenvalues at mark-intensity moment K.

    spectral = (1+(K-1)eta)(alpha_s+alpha_c)/beta; the process is stationary
    iff spectral < 1, equivalently xi2 < 0.
    """
    if k_lambda < 1.0:
        raise InvalidParameterError(f"K must be >= 1, got {k_lambda}")
    factor = 1.0 + (k_lambda - 1.0) * params.eta
    spectral = factor * (params.alpha_s + params.alpha_c) / params.beta
    xi1 = -params.beta + (params.alpha_s - params.alpha_c) * factor
    xi2 = -params.beta + (params.alpha_s + params.alpha_c) * factor
    return StationarityResult(spectral < 1.0, spectral, xi1, xi2)


def expected_intensity(params: SymmetricParams, k_lambda: float = 1.0) -> float:
    """Stationary per-side ground intensity mu*beta / (beta - (a_s+a_c)(1+(K-1)eta))."""
    chk = stationarity_check(params, k_lambda)
    if not chk.stationary:
        raise NonstationaryError(
            f"spectral radius {chk.spectral:.6g} >= 1; expected intensity diverges"
        )
    factor = 1.0 + (k_lambda - 1.0) * params.eta
    return params.mu * params.beta / (
        params.beta - (params.alpha_s + params.alpha_c) * factor
    )


def _initial(stream: EventStream, params, initial) -> tuple[float, float]:
    if initial is not None:
        if isinstance(initial, IntensityState):
            return (initial.lambda_g1, initial.lambda_g2)
        return (float(initial[0]), float(initial[1]))
    if isinstance(params, FullParams):
        if stream.initial_intensity is not None:
            raise InvalidParameterError(
                "initial intensity overrides are only supported for the symmetric model"
            )
        return (params.mu1, params.mu2)
    return stream.initial_or_default(params.mu)


def intensities_at_events(stream: EventStream, params, initial=None) -> IntensityPath:
    """Left-limit (lambda_g1, lambda_g2) at every event time, via the O(1) recursion."""
    lam0 = _initial(stream, params, initial)
    if isinstance(params, FullParams):
        lam1, lam2 = backend.full_event_intensities(
            stream.times, stream.sides, stream.marks_f, params.eta,
            params.mu1, params.mu2,
            params.alpha11, params.alpha22, params.alpha12, params.alpha21,
            params.beta11, params.beta22, params.beta12, params.beta21,
        )
    else:
        lam1, lam2 = backend.sym_event_intensities(
            stream.times, stream.sides, stream.marks_f, params.eta,
            params.mu, params.alpha_s, params.alpha_c, params.beta,
            lam0[0], lam0[1],
        )
    return IntensityPath(stream.times, lam1, lam2)


def intensity_at(stream: EventStream, params: SymmetricParams, t: float,
                 initial: IntensityState | tuple[float, float] | None = None,
                 convention: Convention = Convention.LEFT_LIMIT) -> IntensityState:
    """Ground intensities at an arbitrary time by direct summation over history.

    LEFT_LIMIT excludes an event located exactly at t; RIGHT_LIMIT includes it.
    """
    if t < 0.0 or t > stream.horizon:
        raise ValueError(f"t={t} outside [0, {stream.horizon}]")
    lam0 = _initial(stream, params, initial)
    if convention is Convention.LEFT_LIMIT:
        sel = stream.times < t
    else:
        sel = stream.times <= t
    times = stream.times[sel]
    sides = stream.sides[sel]
    w = 1.0 + (stream.marks[sel] - 1.0) * params.eta
    decay = np.exp(-params.beta * (t - times))
    s1 = float(np.sum(w[sides == 0] * decay[sides == 0]))
    s2 = float(np.sum(w[sides == 1] * decay[sides == 1]))
    e0 = np.exp(-params.beta * t)
    lam1 = params.mu + (lam0[0] - params.mu) * e0 + params.alpha_s * s1 + params.alpha_c * s2
    lam2 = params.mu + (lam0[1] - params.mu) * e0 + params.alpha_c * s1 + params.alpha_s * s2
    return IntensityState(lam1, lam2, convention)


def intensity_on_grid(stream: EventStream, params: SymmetricParams, grid,
                      initial=None) -> tuple[np.ndarray, np.ndarray]:
    """Left-limit intensities on an arbitrary time grid (diagnostic use)."""
    grid = np.asarray(grid, dtype=np.float64)
    out1 = np.empty_like(grid)
    out2 = np.empty_like(grid)
    for i, t in enumerate(grid):
        st = intensity_at(stream, params, float(t), initial)
        out1[i] = st.lambda_g1
        out2[i] = st.lambda_g2
    return out1, out2
