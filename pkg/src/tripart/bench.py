"""Timing harness: test systems, correctness-gated timings and parameter sweeps.

A clock is any zero-argument callable returning integer nanoseconds
(``time.perf_counter_ns`` by default).  :class:`FakeClock` replays a trace of
durations so that sweeps are reproducible in tests and CI.
"""
from __future__ import annotations

import csv
import itertools
import statistics
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .autotune import HeuristicModel, Observation, ObservationSet, recursion_sizes
from .errors import InvalidSize, SolveFailed
from .solver import RecursionPolicy, TridiagonalSystem, residual_inf, solve_partition

Clock = Callable[[], int]

RESIDUAL_TOL = {np.dtype(np.float64): 1e-8, np.dtype(np.float32): 1e-4}


def generate_system(n: int, seed: int = 0, dominance: float = 1.5,
                    dtype=np.float64) -> TridiagonalSystem:
    """Random strictly diagonally dominant system.

    Off-diagonals are uniform in [-1, 1], ``|b_i| = dominance*(|a_i|+|c_i|) + 1``
    and every row, right-hand side included, gets a random sign.
    """
    if n < 2:
        raise InvalidSize(f"n must be >= 2, got {n}")
    if not dominance > 1:
        raise ValueError(f"dominance factor must exceed 1, got {dominance}")
    rng = np.random.default_rng(seed)
    a = rng.uniform(-1.0, 1.0, n)
    c = rng.uniform(-1.0, 1.0, n)
    a[0] = 0.0
    c[-1] = 0.0
    b = dominance * (np.abs(a) + np.abs(c)) + 1.0
    d = rng.uniform(-1.0, 1.0, n)
    sign = rng.choice([-1.0, 1.0], n)
    return TridiagonalSystem(*(np.asarray(v * sign, dtype=dtype) for v in (a, b, c, d)))


class FakeClock:
    """Replays ``durations_ms``: each start/stop pair of calls advances time by
    the next duration.  The trace repeats once exhausted."""

    def __init__(self, durations_ms: Sequence[float], name: str = "fake"):
        if not durations_ms:
            raise ValueError("a fake clock needs at least one duration")
        self.durations_ms = tuple(float(d) for d in durations_ms)
        self.name = name
        self._next = itertools.cycle(round(d * 1_000_000) for d in self.durations_ms)
        self._now = 0
        self._running = False

    def __call__(self) -> int:
        if self._running:
            self._now += next(self._next)
        self._running = not self._running
        return self._now

    @classmethod
    def from_csv(cls, path) -> "FakeClock":
        """Trace file: a ``time_ms`` header and one duration per line."""
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        if not rows or "time_ms" not in rows[0]:
            raise ValueError(f"{path}: expected a 'time_ms' column")
        return cls([float(r["time_ms"]) for r in rows], name=f"fake:{Path(path).name}")


def clock_name(clock: Clock) -> str:
    return getattr(clock, "name", getattr(clock, "__name__", type(clock).__name__))


@dataclass(frozen=True)
class TimingStats:
    median: float
    min: float
    max: float
    samples: tuple[float, ...]

    @property
    def runs(self) -> int:
        return len(self.samples)


def time_solve(system: TridiagonalSystem, policy: RecursionPolicy | int, runs: int = 5,
               clock: Clock | None = None, warmup: int = 1, workers: int | None = None) -> TimingStats:
    """Median/min/max wall time in ms of ``runs`` solves after ``warmup`` untimed ones.

    Every solve is residual-checked; a wrong answer raises :class:`SolveFailed`.
    """
    if runs < 1:
        raise ValueError(f"runs must be >= 1, got {runs}")
    clock = clock or time.perf_counter_ns
    tol = RESIDUAL_TOL.get(system.dtype, 1e-8)

    def checked():
        x = solve_partition(system, policy, workers=workers)
        res = residual_inf(system, x)
        if not res <= tol:
            raise SolveFailed(f"residual {res:.3e} exceeds {tol:.0e} (n={system.n}, policy={policy})")

    for _ in range(warmup):
        checked()
    samples = []
    for _ in range(runs):
        t0 = clock()
        x = solve_partition(system, policy, workers=workers)
        t1 = clock()
        res = residual_inf(system, x)
        if not res <= tol:
            raise SolveFailed(f"residual {res:.3e} exceeds {tol:.0e} (n={system.n}, policy={policy})")
        samples.append((t1 - t0) / 1e6)
    return TimingStats(statistics.median(samples), min(samples), max(samples), tuple(samples))


@dataclass(frozen=True)
class SweepResult:
    n: int
    candidates: tuple[int, ...]
    stats: tuple[TimingStats, ...]
    argmin: int
    runs: int
    clock: str
    kind: str = "m"

    @property
    def times(self) -> dict[int, float]:
        return {c: s.median for c, s in zip(self.candidates, self.stats)}

    def to_observation(self, streams: int = 0) -> Observation:
        return Observation(self.n, self.argmin, times=self.times, streams=streams)


def _argmin(candidates, stats) -> int:
    best = min(range(len(candidates)), key=lambda i: (stats[i].median, i))
    return candidates[best]


def sweep_m(n: int, candidates: Sequence[int], runs: int = 5, clock: Clock | None = None, *,
            seed: int = 0, system: TridiagonalSystem | None = None,
            workers: int | None = None) -> SweepResult:
    """Time the non-recursive method for every candidate sub-system size."""
    cands = tuple(int(m) for m in candidates)
    if not cands or any(m < 2 for m in cands):
        raise InvalidSize(f"candidates must be a nonempty list of sizes >= 2, got {cands}")
    clock = clock or time.perf_counter_ns
    system = system if system is not None else generate_system(n, seed)
    stats = tuple(time_solve(system, RecursionPolicy.flat(m), runs, clock, workers=workers)
                  for m in cands)
    return SweepResult(system.n, cands, stats, _argmin(cands, stats), runs, clock_name(clock))


def sweep_r(n: int, max_r: int, size_model: HeuristicModel, runs: int = 5,
            clock: Clock | None = None, *, seed: int = 0,
            system: TridiagonalSystem | None = None, workers: int | None = None) -> SweepResult:
    """Time ``R = 0..max_r`` recursions, sizing every level with ``size_model``."""
    if not 0 <= max_r <= 4:
        raise ValueError(f"max R must lie in 0..4, got {max_r}")
    clock = clock or time.perf_counter_ns
    system = system if system is not None else generate_system(n, seed)
    cands = tuple(range(max_r + 1))
    stats = tuple(time_solve(system, recursion_sizes(system.n, r, size_model), runs, clock,
                             workers=workers) for r in cands)
    return SweepResult(system.n, cands, stats, _argmin(cands, stats), runs, clock_name(clock), "R")


def sweeps_to_observations(results: Sequence[SweepResult], device: str = "cpu",
                           precision: str = "fp64", streams: int = 0) -> ObservationSet:
    kinds = {r.kind for r in results}
    if len(kinds) > 1:
        raise ValueError("cannot mix sub-system size and depth sweeps in one set")
    kind = kinds.pop() if kinds else "m"
    return ObservationSet(tuple(r.to_observation(streams) for r in results), device, precision, kind)
