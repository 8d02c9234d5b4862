"""k-core extraction: deterministic peeling, the randomized continuous-time
death process with trajectory recording, and emergence location in the
growing edge process.

The death process encodes the peeling of a uniform configuration-model
multigraph: balls are half-edges in vertex bins, every ball carries an
i.i.d. exponential clock, and each death of a white ball both deletes an
edge and recolors one light white ball red.  When a white ball dies with
no light white ball available the process stops; the surviving heavy
balls are exactly the half-edges of the k-core.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kernels import death_process_kernel, fill_csr_kernel, peel_kernel
from .degrees import DegreeSequence
from .generators import EdgeProcess, Multigraph
from .poisson import DomainError


class SearchFailureError(RuntimeError):
    """The growing graph never acquired a nonempty core."""


@dataclass(frozen=True)
class CoreResult:
    """Size and degree profile of a k-core."""

    v_core: int
    e_core: int
    degree_hist: np.ndarray   # degree_hist[j] = core vertices of degree j

    @property
    def empty(self) -> bool:
        return self.v_core == 0


@dataclass(frozen=True)
class Trajectory:
    """The stopped death process sampled on a time grid.

    Values at grid times past the stopping time are frozen at the final
    state, with L = -1 by the stopping convention.  tau is NaN when the
    run was cut off (t_max or end of grid) before the process stopped.
    """

    grid: np.ndarray
    L: np.ndarray
    H: np.ndarray
    B: np.ndarray
    tau: float
    final: CoreResult | None

    def to_csv_text(self) -> str:
        lines = ["t,L,H,B"]
        for i, t in enumerate(self.grid):
            lines.append(f"{t},{self.L[i]},{self.H[i]},{self.B[i]}")
        lines.append(f"tau,{self.tau}")
        if self.final is not None:
            lines.append(f"v_core,{self.final.v_core}")
            lines.append(f"e_core,{self.final.e_core}")
        return "\n".join(lines) + "\n"


def _csr(g: Multigraph) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    deg = g.degrees()
    off = np.zeros(g.n + 1, np.int64)
    np.cumsum(deg, out=off[1:])
    adj = np.empty(int(off[-1]), np.int64)
    if g.m:
        fill_csr_kernel(adj, off[:-1].copy(), g.edges[:, 0], g.edges[:, 1])
    return adj, off, deg


def peel_core(g: Multigraph, k: int) -> CoreResult:
    """The k-core of g by linear-time peeling; loops count 2 toward degree."""
    if k < 2:
        raise DomainError(f"k must be >= 2, got {k}")
    adj, off, deg = _csr(g)
    removed = peel_kernel(adj, off, deg, k)
    keep = removed == 0
    v_core = int(keep.sum())
    if v_core == 0:
        return CoreResult(0, 0, np.zeros(0, np.int64))
    core_degs = deg[keep]
    e_core = int(core_degs.sum()) // 2
    return CoreResult(v_core, e_core, np.bincount(core_degs))


def _core_from_bins(alive: np.ndarray, k: int) -> CoreResult:
    heavy = alive >= k
    v_core = int(heavy.sum())
    if v_core == 0:
        return CoreResult(0, 0, np.zeros(0, np.int64))
    core_degs = alive[heavy]
    return CoreResult(v_core, int(core_degs.sum()) // 2, np.bincount(core_degs))


def peel_process(seq: DegreeSequence, k: int, grid, rng: np.random.Generator,
                 graph: Multigraph | None = None, t_max: float | None = None,
                 want_final: bool = True) -> Trajectory:
    """Run the randomized peeling death process on the given degrees.

    grid must be an increasing array of sample times.  If graph is given
    it is only checked to realize seq (the process reveals its own
    uniform pairing, so the graph contributes nothing further).  With
    want_final=False the simulation is cut off after the last grid time
    (or t_max) and final/tau may be absent.
    """
    if k < 2:
        raise DomainError(f"k must be >= 2, got {k}")
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or (grid.size > 1 and np.any(np.diff(grid) <= 0)):
        raise DomainError("grid must be 1-d strictly increasing")
    if grid.size and grid[0] < 0:
        raise DomainError("grid times must be >= 0")
    if graph is not None:
        own = np.sort(graph.degrees())
        if graph.n != seq.n or not np.array_equal(own, np.sort(seq.degrees())):
            raise DomainError("graph does not realize the degree sequence")
    d = seq.degrees().astype(np.int64)
    n = seq.n
    nballs = int(d.sum())
    bin_start = np.zeros(n, np.int64)
    if n > 1:
        np.cumsum(d[:-1], out=bin_start[1:])
    ball_bin = np.repeat(np.arange(n, dtype=np.int64), d)
    clocks = rng.exponential(1.0, nballs)
    if t_max is None:
        t_max = np.inf
    if not want_final and np.isfinite(t_max):
        # only deaths before the cutoff can matter
        keep = np.flatnonzero(clocks <= t_max)
        order = keep[np.argsort(clocks[keep], kind="stable")]
    else:
        order = np.argsort(clocks, kind="stable")
    times = clocks[order]
    uniforms = rng.random(nballs + 1)
    L, H, B, tau, stopped, h_end, b_end, alive = death_process_kernel(
        ball_bin, bin_start, d, order, times, uniforms, k, grid,
        float(t_max), want_final)
    final = _core_from_bins(alive, k) if (want_final and stopped) else None
    return Trajectory(grid=grid, L=L, H=H, B=B,
                      tau=float(tau) if stopped else float("nan"), final=final)


def emergence_edge_count(proc: EdgeProcess, k: int) -> int:
    """Minimal number of added edges at which the k-core becomes nonempty.

    Nonemptiness is monotone in the edge count, so an upper bound is
    found by doubling and the exact count by bisection, re-peeling each
    probed prefix.
    """
    if k < 3:
        raise DomainError(f"k must be >= 3, got {k}")
    total = proc.total_pairs
    if k > proc.n - 1:
        raise SearchFailureError(f"no {k}-core is possible on {proc.n} vertices")

    def nonempty(m: int) -> bool:
        return peel_core(proc.prefix(m), k).v_core > 0

    hi = min(max(2 * proc.n, 16), total)
    while not nonempty(hi):
        if hi == total:
            raise SearchFailureError("the complete graph has an empty core")
        hi = min(2 * hi, total)
    lo = 0
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if nonempty(mid):
            hi = mid
        else:
            lo = mid
    return hi
