"""Thomas elimination and the (recursive) partition method for tridiagonal systems.

Row ``i`` of a system reads ``sub[i]*x[i-1] + diag[i]*x[i] + sup[i]*x[i+1] = rhs[i]``
with ``sub[0] == sup[n-1] == 0``.

The partition method splits the rows into blocks of ``m`` unknowns.  Every block
is reduced independently to two interface equations that couple only its first
and last unknown to the neighbouring blocks.  The interface equations of all
blocks form a tridiagonal system of size ``2K`` which is solved either by
Thomas elimination or, recursively, by the partition method again.  Finally
the interior unknowns of every block are recovered independently.

Blocks of equal length are processed as one batch: every numpy operation in the
kernels below acts elementwise across blocks, so a block's result never depends
on which other blocks share its batch.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import InvalidSize, ZeroPivot

PIVOT_TOL = 1e-30


@dataclass(frozen=True, eq=False)
class TridiagonalSystem:
    """Immutable tridiagonal system; the arrays are stored read-only."""

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        arrays = [np.asarray(v) for v in (self.sub, self.diag, self.sup, self.rhs)]
        dtype = np.result_type(*arrays, np.float32)
        if dtype not in (np.float32, np.float64):
            dtype = np.dtype(np.float64)
        arrays = [np.array(v, dtype=dtype, copy=True) for v in arrays]
        n = arrays[1].shape[0] if arrays[1].ndim == 1 else -1
        if n < 1 or any(v.ndim != 1 or v.shape[0] != n for v in arrays):
            raise InvalidSize("sub, diag, sup and rhs must be 1-d arrays of equal length >= 1")
        if arrays[0][0] != 0 or arrays[2][-1] != 0:
            raise ValueError("sub[0] and sup[n-1] must be zero")
        for name, v in zip(("sub", "diag", "sup", "rhs"), arrays):
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @property
    def n(self) -> int:
        return self.diag.shape[0]

    @property
    def dtype(self) -> np.dtype:
        return self.diag.dtype

    def is_strictly_dominant(self) -> bool:
        return bool(np.all(np.abs(self.diag) > np.abs(self.sub) + np.abs(self.sup)))

    def matvec(self, x) -> np.ndarray:
        x = np.asarray(x)
        y = self.diag * x
        y[1:] += self.sub[1:] * x[:-1]
        y[:-1] += self.sup[:-1] * x[1:]
        return y

    def to_dense(self) -> np.ndarray:
        A = np.diag(self.diag.astype(np.float64))
        if self.n > 1:
            A += np.diag(self.sub[1:].astype(np.float64), -1)
            A += np.diag(self.sup[:-1].astype(np.float64), 1)
        return A

    def __eq__(self, other):
        if not isinstance(other, TridiagonalSystem):
            return NotImplemented
        return self.dtype == other.dtype and all(
            np.array_equal(getattr(self, k), getattr(other, k)) for k in ("sub", "diag", "sup", "rhs")
        )

    __hash__ = None


def thomas_solve(system: TridiagonalSystem) -> np.ndarray:
    """Sequential Gaussian elimination without pivoting, O(n)."""
    a = system.sub.tolist()
    b = system.diag.tolist()
    c = system.sup.tolist()
    d = system.rhs.tolist()
    n = len(b)

    cp = [0.0] * n
    dp = [0.0] * n
    piv = b[0]
    if abs(piv) < PIVOT_TOL:
        raise ZeroPivot(0, piv)
    cp[0] = c[0] / piv
    dp[0] = d[0] / piv
    for i in range(1, n):
        piv = b[i] - a[i] * cp[i - 1]
        if abs(piv) < PIVOT_TOL:
            raise ZeroPivot(i, piv)
        cp[i] = c[i] / piv
        dp[i] = (d[i] - a[i] * dp[i - 1]) / piv

    x = dp
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return np.array(x, dtype=system.dtype)


def residual_inf(system: TridiagonalSystem, x) -> float:
    """Relative residual ||Ax - d||_inf / max(1, ||d||_inf), evaluated in FP64."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (system.n,):
        raise ValueError(f"solution has shape {x.shape}, expected ({system.n},)")
    A = TridiagonalSystem(*(np.asarray(v, dtype=np.float64) for v in
                            (system.sub, system.diag, system.sup, system.rhs)))
    r = A.matvec(x) - A.rhs
    return float(np.max(np.abs(r)) / max(1.0, float(np.max(np.abs(A.rhs)))))


# -- partitioning ------------------------------------------------------------


@dataclass(frozen=True)
class PartitionPlan:
    n: int
    m: int
    blocks: tuple[tuple[int, int], ...]

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)


def make_plan(n: int, m: int) -> PartitionPlan:
    """Split ``[0, n)`` into blocks of ``m`` rows.

    A trailing remainder of one row is folded into the last full block, so the
    last block has between 2 and ``m + 1`` rows.
    """
    if n < 2 or m < 2:
        raise InvalidSize(f"need n >= 2 and m >= 2, got n={n}, m={m}")
    if m >= n:
        return PartitionPlan(n, m, ((0, n),))
    starts = list(range(0, n, m))
    if n - starts[-1] == 1:
        starts.pop()
    ends = starts[1:] + [n]
    return PartitionPlan(n, m, tuple(zip(starts, ends)))


@dataclass(frozen=True)
class RecursionPolicy:
    """Sub-system size for every partition level; ``depth`` recursions follow level 0."""

    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(m) for m in self.sizes)
        if not sizes:
            raise InvalidSize("a policy needs at least one sub-system size")
        if any(m < 2 for m in sizes):
            raise InvalidSize(f"sub-system sizes must be >= 2, got {sizes}")
        object.__setattr__(self, "sizes", sizes)

    @property
    def depth(self) -> int:
        return len(self.sizes) - 1

    @classmethod
    def flat(cls, m: int) -> "RecursionPolicy":
        return cls((m,))


class Equation(NamedTuple):
    """Interface equation ``left*x_l + diag*x_c + right*x_r = rhs``."""

    left: float
    diag: float
    right: float
    rhs: float


@dataclass(frozen=True, eq=False)
class ReducedBlock:
    """Stage-1 output for rows ``start .. stop-1``.

    ``eq1`` couples ``x[start-1], x[start], x[stop-1]``; ``eq2`` couples
    ``x[start], x[stop-1], x[stop]``.  The interior arrays hold, for rows
    ``start+1 .. stop-2``, the original sub-diagonal and the up-sweep
    coefficients used by :func:`back_substitute`.
    """

    start: int
    stop: int
    eq1: Equation
    eq2: Equation
    interior_sub: np.ndarray = field(repr=False)
    interior_diag: np.ndarray = field(repr=False)
    interior_last: np.ndarray = field(repr=False)
    interior_rhs: np.ndarray = field(repr=False)

    @property
    def s(self) -> int:
        return self.start

    @property
    def e(self) -> int:
        return self.stop - 1


# Batched kernels.  Arrays have shape (L, K): row-in-block by block.


class _Batch(NamedTuple):
    starts: np.ndarray  # first row of every block in the batch
    eq1: tuple          # (alpha, beta, gamma, delta), each shape (K,)
    eq2: tuple          # (phi, beta', c_e, delta'), each shape (K,)
    sub: np.ndarray     # (L, K) original sub-diagonal
    beta: np.ndarray    # (L, K) up-sweep diagonal
    gamma: np.ndarray   # (L, K) up-sweep coupling to x_e
    delta: np.ndarray   # (L, K) up-sweep right-hand side


def _check_pivot(piv, starts, local_row):
    bad = np.abs(piv) < PIVOT_TOL
    if bad.any():
        j = int(np.flatnonzero(bad)[0])
        raise ZeroPivot(int(starts[j]) + local_row, float(piv[j]))


def _reduce_batch(a, b, c, d, starts) -> _Batch:
    L = b.shape[0]
    beta = np.empty_like(b)
    gamma = np.empty_like(b)
    delta = np.empty_like(b)
    beta[L - 2] = b[L - 2]
    gamma[L - 2] = c[L - 2]
    delta[L - 2] = d[L - 2]
    for i in range(L - 3, -1, -1):
        piv = beta[i + 1]
        _check_pivot(piv, starts, i + 1)
        w = c[i] / piv
        beta[i] = b[i] - w * a[i + 1]
        gamma[i] = -w * gamma[i + 1]
        delta[i] = d[i] - w * delta[i + 1]

    phi = a[1].copy()
    bp = b[1].copy()
    dp = d[1].copy()
    for i in range(2, L):
        _check_pivot(bp, starts, i - 1)
        w = a[i] / bp
        bp = b[i] - w * c[i - 1]
        phi = -w * phi
        dp = d[i] - w * dp

    eq1 = (a[0].copy(), beta[0].copy(), gamma[0].copy(), delta[0].copy())
    eq2 = (phi, bp, c[L - 1].copy(), dp)
    return _Batch(starts, eq1, eq2, a, beta, gamma, delta)


def _back_substitute_batch(batch: _Batch, xs, xe) -> np.ndarray:
    L = batch.beta.shape[0]
    out = np.empty((max(L - 2, 0), xs.shape[0]), dtype=batch.beta.dtype)
    prev = xs
    for i in range(1, L - 1):
        prev = (batch.delta[i] - batch.sub[i] * prev - batch.gamma[i] * xe) / batch.beta[i]
        out[i - 1] = prev
    return out


def _block_groups(plan: PartitionPlan):
    """Yield ``(first_block, count, length)`` runs of equal-length blocks."""
    lengths = [e - s for s, e in plan.blocks]
    first = 0
    for j in range(1, len(lengths) + 1):
        if j == len(lengths) or lengths[j] != lengths[first]:
            yield first, j - first, lengths[first]
            first = j


def _gather(system: TridiagonalSystem, start: int, count: int, length: int):
    stop = start + count * length
    cols = [np.ascontiguousarray(v[start:stop].reshape(count, length).T)
            for v in (system.sub, system.diag, system.sup, system.rhs)]
    starts = np.arange(start, stop, length)
    return cols, starts


def _chunks(count: int, workers: int | None):
    if not workers or workers <= 1 or count < 2:
        return [(0, count)]
    edges = np.linspace(0, count, min(workers, count) + 1).astype(int)
    return [(int(lo), int(hi)) for lo, hi in zip(edges[:-1], edges[1:]) if hi > lo]


def _map(fn, jobs, workers):
    if workers and workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda job: fn(*job), jobs))
    return [fn(*job) for job in jobs]


def _reduce_plan(system: TridiagonalSystem, plan: PartitionPlan, workers=None) -> list[_Batch]:
    jobs = []
    for first, count, length in _block_groups(plan):
        start = plan.blocks[first][0]
        for lo, hi in _chunks(count, workers):
            jobs.append((start + lo * length, hi - lo, length))

    def run(start, count, length):
        (a, b, c, d), starts = _gather(system, start, count, length)
        return _reduce_batch(a, b, c, d, starts)

    return _map(run, jobs, workers)


def _assemble_batches(batches: Sequence[_Batch], dtype) -> TridiagonalSystem:
    eq1 = [np.concatenate([bt.eq1[k] for bt in batches]) for k in range(4)]
    eq2 = [np.concatenate([bt.eq2[k] for bt in batches]) for k in range(4)]
    K = eq1[0].shape[0]
    cols = []
    for k in range(4):
        v = np.empty(2 * K, dtype=dtype)
        v[0::2] = eq1[k]
        v[1::2] = eq2[k]
        cols.append(v)
    return TridiagonalSystem(*cols)


# -- public per-block API ----------------------------------------------------


def reduce_block(system: TridiagonalSystem, block: tuple[int, int]) -> ReducedBlock:
    """Stage 1 for one block ``[start, stop)``: two interface equations plus
    the coefficients needed later for back-substitution."""
    start, stop = block
    if not (0 <= start and stop <= system.n and stop - start >= 2):
        raise InvalidSize(f"block {block} must lie in [0, {system.n}) and hold >= 2 rows")
    (a, b, c, d), starts = _gather(system, start, 1, stop - start)
    bt = _reduce_batch(a, b, c, d, starts)
    inner = slice(1, stop - start - 1)
    return ReducedBlock(
        start, stop,
        Equation(*(float(v[0]) for v in bt.eq1)),
        Equation(*(float(v[0]) for v in bt.eq2)),
        bt.sub[inner, 0].copy(), bt.beta[inner, 0].copy(),
        bt.gamma[inner, 0].copy(), bt.delta[inner, 0].copy(),
    )


def assemble_interface(blocks: Sequence[ReducedBlock]) -> TridiagonalSystem:
    """Interface system of size ``2K`` in the unknowns ``x_s1, x_e1, ..., x_sK, x_eK``."""
    if not blocks:
        raise InvalidSize("need at least one reduced block")
    rows = []
    for blk in blocks:
        rows.append(blk.eq1)
        rows.append(blk.eq2)
    sub, diag, sup, rhs = (np.array(col, dtype=np.float64) for col in zip(*rows))
    sub[0] = 0.0
    sup[-1] = 0.0
    return TridiagonalSystem(sub, diag, sup, rhs)


def back_substitute(block: ReducedBlock, x_s: float, x_e: float) -> np.ndarray:
    """Stage 3 for one block: interior values for rows ``start+1 .. stop-2``."""
    out = np.empty(block.interior_diag.shape[0], dtype=np.float64)
    prev = x_s
    for i in range(out.shape[0]):
        prev = (block.interior_rhs[i] - block.interior_sub[i] * prev
                - block.interior_last[i] * x_e) / block.interior_diag[i]
        out[i] = prev
    return out


# -- driver ------------------------------------------------------------------


def solve_partition(system: TridiagonalSystem, policy: RecursionPolicy | int, *,
                    workers: int | None = None,
                    interfaces: list | None = None) -> np.ndarray:
    """Solve with the partition method, recursing ``policy.depth`` times.

    Level ``l`` partitions its system with ``policy.sizes[l]``; the last level's
    interface system goes to :func:`thomas_solve`.  Levels with fewer than four
    rows are handed to Thomas directly.  ``workers > 1`` spreads Stage 1 and
    Stage 3 over a thread pool.  If ``interfaces`` is a list, every assembled
    interface system is appended to it, outermost first.
    """
    if not isinstance(policy, RecursionPolicy):
        policy = RecursionPolicy.flat(policy)
    return _solve_level(system, policy.sizes, workers, interfaces)


def _solve_level(system, sizes, workers, interfaces):
    n = system.n
    if n < 4:
        return thomas_solve(system)
    plan = make_plan(n, sizes[0])
    batches = _reduce_plan(system, plan, workers)
    iface = _assemble_batches(batches, system.dtype)
    if interfaces is not None:
        interfaces.append(iface)

    if len(sizes) > 1:
        y = _solve_level(iface, sizes[1:], workers, interfaces)
    else:
        y = thomas_solve(iface)

    x = np.empty(n, dtype=system.dtype)
    xs_all = y[0::2]
    xe_all = y[1::2]
    jobs = []
    k = 0
    for bt in batches:
        count = bt.starts.shape[0]
        jobs.append((bt, xs_all[k:k + count], xe_all[k:k + count]))
        k += count

    def run(bt, xs, xe):
        return _back_substitute_batch(bt, xs, xe)

    interiors = _map(run, jobs, workers)
    for (bt, xs, xe), inner in zip(jobs, interiors):
        L = bt.beta.shape[0]
        x[bt.starts] = xs
        x[bt.starts + L - 1] = xe
        if L > 2:
            idx = bt.starts[None, :] + np.arange(1, L - 1)[:, None]
            x[idx] = inner
    return x
