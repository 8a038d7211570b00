"""Monte-Carlo ensemble pipelines: simulate, fit, and measure volatility per path.

Used by the Tables-style aggregate reports and the consistency studies. Paths
are independent, seeded from one top-level seed, and can run across worker
processes.
"""

from __future__ import annotations

from dataclasses import dataclass
from multiprocessing import get_context
from typing import Sequence

import numpy as np

from hawkesvol.core import FullParams, intensities_at_events
from hawkesvol.errors import HawkesVolError
from hawkesvol.estimate import fit_full, fit_symmetric
from hawkesvol.simulate import (
    MarkSampler,
    Scenario,
    simulate_full,
    simulate_scenario,
    spawn_seeds,
)
from hawkesvol.volatility import (
    KStatistics,
    estimate_k_statistics,
    hawkes_volatility,
    tsrv_from_stream,
)


@dataclass(frozen=True)
class PathSpec:
    """What one ensemble member simulates and how it is measured."""

    scenario: Scenario | None = None
    full_params: FullParams | None = None
    full_sampler: MarkSampler | None = None
    horizon: float | None = None
    burn_in: float = 0.0
    guard: float = 1e6
    fit: bool = True
    fit_model: str = "symmetric"
    n_starts: int = 1
    s0: float = 100.0
    delta: float = 0.005
    small_scale: float = 1.0
    large_scale: float = 300.0
    vol_variant: str = "approx"

    def __post_init__(self):
        if (self.scenario is None) == (self.full_params is None):
            raise ValueError("specify exactly one of scenario or full_params")
        if self.full_params is not None and self.full_sampler is None:
            raise ValueError("full_params needs full_sampler")

    @property
    def total_horizon(self) -> float:
        return self.scenario.horizon if self.scenario is not None else float(self.horizon)


@dataclass(frozen=True)
class PathResult:
    n_events: int
    sq_net: float              # (N1 - N2)^2, mark-weighted
    terminal_return: float     # delta * (N1 - N2) / s0
    ks_true: KStatistics | None
    estimates: np.ndarray | None = None
    loglik: float | None = None
    converged: bool | None = None
    ks_fit: KStatistics | None = None
    hvol: float | None = None
    tsrv: float | None = None
    error: str | None = None


def run_path(spec: PathSpec, seed) -> PathResult:
    rng = np.random.default_rng(seed)
    try:
        if spec.scenario is not None:
            sim = simulate_scenario(spec.scenario, rng=rng, burn_in=spec.burn_in,
                                    guard=spec.guard)
        else:
            sim = simulate_full(spec.full_params, spec.full_sampler, spec.horizon,
                                rng=rng, guard=spec.guard)
    except HawkesVolError as exc:
        return PathResult(0, np.nan, np.nan, None, error=str(exc))
    stream = sim.stream
    net = stream.net_tick_change()
    try:
        ks_true = estimate_k_statistics(stream, sim.intensity)
    except HawkesVolError:
        ks_true = None
    result = PathResult(len(stream), float(net) ** 2, spec.delta * net / spec.s0, ks_true)
    if not spec.fit:
        return result
    try:
        if spec.fit_model == "full":
            fit = fit_full(stream, n_starts=spec.n_starts, compute_stderr=False)
            sym = fit_symmetric(stream, n_starts=spec.n_starts, compute_stderr=False)
            vol_params = sym.params
        else:
            fit = fit_symmetric(stream, n_starts=spec.n_starts, compute_stderr=False)
            vol_params = fit.params
        path = intensities_at_events(stream, vol_params)
        ks_fit = estimate_k_statistics(stream, path)
        hvol = hawkes_volatility(vol_params, ks_fit, spec.s0, spec.delta,
                                 stream.horizon, 1.0, spec.vol_variant)
        tz = tsrv_from_stream(stream, spec.s0, spec.delta, spec.small_scale,
                              spec.large_scale)
    except HawkesVolError as exc:
        return PathResult(len(stream), float(net) ** 2, spec.delta * net / spec.s0,
                          ks_true, error=str(exc))
    return PathResult(
        n_events=len(stream), sq_net=float(net) ** 2,
        terminal_return=spec.delta * net / spec.s0, ks_true=ks_true,
        estimates=fit.params.as_array(), loglik=fit.loglik, converged=fit.converged,
        ks_fit=ks_fit, hvol=hvol, tsrv=tz,
    )


def _worker(task):
    spec, seed = task
    return run_path(spec, seed)


def run_ensemble(spec: PathSpec, n_paths: int, seed, workers: int | None = None,
                 chunksize: int | None = None) -> list[PathResult]:
    """Simulate/fit n_paths independent members; reproducible given seed."""
    tasks = [(spec, child) for child in spawn_seeds(seed, n_paths)]
    if workers is None or workers <= 1:
        return [run_path(spec, child) for _, child in tasks]
    if chunksize is None:
        chunksize = max(1, n_paths // (workers * 8))
    with get_context("fork").Pool(workers) as pool:
        return pool.map(_worker, tasks, chunksize=chunksize)


def summarize(results: Sequence[PathResult]):
    """(mean, std) of the per-path estimate vectors over converging paths."""
    est = np.array([r.estimates for r in results if r.estimates is not None])
    if est.size == 0:
        raise HawkesVolError("no successful fits in the ensemble")
    return est.mean(axis=0), est.std(axis=0, ddof=1)
