"""Random structure generation: configuration model, G(n,p), G(n,m), and
the one-edge-at-a-time process.

Vertex pairs are addressed by a linear index e in [0, n(n-1)/2) with
e = v(v-1)/2 + u for 0 <= u < v; sparse samplers draw linear indices and
decode at the end.  Every generator takes a numpy Generator so callers
control seeding and stream-splitting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .degrees import DegreeSequence
from .poisson import DomainError


class RejectionError(RuntimeError):
    """The rejection sampler ran out of attempts."""


@dataclass
class Multigraph:
    """An edge list on n vertices; loops and parallel edges allowed."""

    n: int
    edges: np.ndarray            # shape (m, 2), vertex ids
    loop_count: int
    multi_pair_count: int        # unordered pairs of parallel non-loop edges

    @property
    def m(self) -> int:
        return int(self.edges.shape[0])

    @property
    def is_simple(self) -> bool:
        return self.loop_count + self.multi_pair_count == 0

    def degrees(self) -> np.ndarray:
        """Per-vertex degree; a loop contributes 2 to its endpoint."""
        deg = np.zeros(self.n, np.int64)
        if self.m:
            deg += np.bincount(self.edges[:, 0], minlength=self.n)
            deg += np.bincount(self.edges[:, 1], minlength=self.n)
        return deg

    def to_edgelist_text(self) -> str:
        lines = [f"{self.n} {self.m}"]
        lines.extend(f"{int(u)} {int(v)}" for u, v in self.edges)
        return "\n".join(lines) + "\n"


def _tally(n: int, edges: np.ndarray) -> tuple[int, int]:
    """(loop_count, multi_pair_count) of an edge list."""
    if edges.shape[0] == 0:
        return 0, 0
    loops = int((edges[:, 0] == edges[:, 1]).sum())
    plain = edges[edges[:, 0] != edges[:, 1]]
    if plain.shape[0] == 0:
        return loops, 0
    lo = np.minimum(plain[:, 0], plain[:, 1]).astype(np.int64)
    hi = np.maximum(plain[:, 0], plain[:, 1]).astype(np.int64)
    _, counts = np.unique(lo * np.int64(n) + hi, return_counts=True)
    multi = int((counts * (counts - 1) // 2).sum())
    return loops, multi


def from_edges(n: int, edges) -> Multigraph:
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if edges.size and (edges.min() < 0 or edges.max() >= n):
        raise DomainError("edge endpoint outside [0, n)")
    loops, multi = _tally(n, edges)
    return Multigraph(n=int(n), edges=edges, loop_count=loops, multi_pair_count=multi)


def parse_edgelist_text(text: str) -> Multigraph:
    """Parse the "n m" + "u v" lines format; raises with the line number."""
    lines = [(i + 1, s.strip()) for i, s in enumerate(text.splitlines())]
    lines = [(no, s) for no, s in lines if s and not s.startswith("#")]
    if not lines:
        raise DomainError("empty graph file")
    no, header = lines[0]
    parts = header.split()
    if len(parts) != 2:
        raise DomainError(f"line {no}: expected header 'n m', got {header!r}")
    try:
        n, m = int(parts[0]), int(parts[1])
    except ValueError:
        raise DomainError(f"line {no}: expected header 'n m', got {header!r}") from None
    if len(lines) - 1 != m:
        raise DomainError(f"header declares {m} edges but file has {len(lines) - 1}")
    edges = np.empty((m, 2), np.int64)
    for i, (no, s) in enumerate(lines[1:]):
        parts = s.split()
        if len(parts) != 2:
            raise DomainError(f"line {no}: expected 'u v', got {s!r}")
        try:
            edges[i, 0], edges[i, 1] = int(parts[0]), int(parts[1])
        except ValueError:
            raise DomainError(f"line {no}: expected 'u v', got {s!r}") from None
    return from_edges(n, edges)


def pair_count(n: int) -> int:
    return n * (n - 1) // 2


def decode_pair_indices(idx: np.ndarray, n: int) -> np.ndarray:
    """Map linear pair indices to (u, v) rows with u < v."""
    idx = np.asarray(idx, dtype=np.int64)
    v = ((1.0 + np.sqrt(1.0 + 8.0 * idx.astype(np.float64))) / 2.0).astype(np.int64)
    # float sqrt can be off by one near triangular boundaries
    while True:
        bad = idx < v * (v - 1) // 2
        if bad.any():
            v[bad] -= 1
        else:
            break
    while True:
        bad = idx >= v * (v + 1) // 2
        if bad.any():
            v[bad] += 1
        else:
            break
    u = idx - v * (v - 1) // 2
    return np.stack([u, v], axis=1)


def config_model(seq: DegreeSequence, rng: np.random.Generator) -> Multigraph:
    """Uniform random pairing of the half-edges of seq into a multigraph.

    Vertex i receives the i-th degree of the canonical (ascending)
    expansion of the counts, so output degrees are reproducible.
    """
    if seq.two_m % 2 != 0:
        raise DomainError("sum of degrees must be even")
    d = seq.degrees()
    half = np.repeat(np.arange(seq.n, dtype=np.int64), d)
    perm = rng.permutation(half.shape[0])
    shuffled = half[perm]
    edges = np.stack([shuffled[0::2], shuffled[1::2]], axis=1)
    return from_edges(seq.n, edges)


def simple_graph(seq: DegreeSequence, rng: np.random.Generator,
                 max_tries: int = 1000) -> tuple[Multigraph, int]:
    """Repeated configuration-model draws until the result is simple.

    Returns (graph, attempts).  Under the usual exponential-moment
    condition on the degrees the acceptance probability is bounded away
    from zero, so the default budget is generous.
    """
    if max_tries < 1:
        raise DomainError("max_tries must be >= 1")
    for attempt in range(1, max_tries + 1):
        g = config_model(seq, rng)
        if g.is_simple:
            return g, attempt
    raise RejectionError(f"no simple pairing found in {max_tries} attempts")


def gnp(n: int, p: float, rng: np.random.Generator) -> Multigraph:
    """Bernoulli(p) inclusion of each of the n(n-1)/2 pairs, by geometric
    skips through the linear pair indices."""
    if n < 0:
        raise DomainError("n must be >= 0")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must be in [0, 1], got {p!r}")
    N = pair_count(n)
    if N == 0 or p == 0.0:
        return from_edges(n, np.empty((0, 2), np.int64))
    if p == 1.0:
        return from_edges(n, decode_pair_indices(np.arange(N), n))
    picks = []
    pos = -1
    est = int(N * p + 10.0 * np.sqrt(N * p + 1.0)) + 16
    while pos < N:
        gaps = rng.geometric(p, size=est)
        steps = np.cumsum(gaps)
        chunk = pos + steps
        picks.append(chunk[chunk < N])
        if chunk[-1] >= N:
            break
        pos = int(chunk[-1])
        est = 1024
    idx = np.concatenate(picks)
    return from_edges(n, decode_pair_indices(idx, n))


def _dedupe_in_order(batch: np.ndarray) -> np.ndarray:
    """Distinct values of batch in first-occurrence order."""
    _, first = np.unique(batch, return_index=True)
    return batch[np.sort(first)]


def _ordered_distinct(rng: np.random.Generator, N: int, m: int) -> np.ndarray:
    """First m values of a uniform permutation of range(N): draw with
    replacement and drop repeats in order (collisions are rare for the
    sparse regimes this package targets)."""
    if m > N:
        raise DomainError(f"cannot draw {m} distinct of {N}")
    taken = np.empty(0, np.int64)
    while taken.size < m:
        need = m - taken.size
        batch = rng.integers(0, N, size=int(need * 1.02) + 16, dtype=np.int64)
        cand = _dedupe_in_order(batch)
        if taken.size:
            cand = cand[~np.isin(cand, taken)]
        taken = np.concatenate([taken, cand[:need]])
    return taken


def gnm(n: int, m: int, rng: np.random.Generator) -> Multigraph:
    """Uniform m-subset of the n(n-1)/2 pairs, by rejection hashing."""
    N = pair_count(n)
    if not 0 <= m <= N:
        raise DomainError(f"m must be in [0, {N}], got {m}")
    if m == 0:
        return from_edges(n, np.empty((0, 2), np.int64))
    idx = _ordered_distinct(rng, N, m)
    return from_edges(n, decode_pair_indices(idx, n))


class EdgeProcess:
    """A lazily revealed uniform ordering of all vertex pairs.

    prefix(m) returns the graph after m edge additions; prefixes are
    nested, so the family {prefix(m)}_m is one coupled realization of the
    growing random graph.  The stream is drawn in fixed-size chunks, so
    identical seeds give identical prefixes regardless of the query
    pattern.
    """

    _CHUNK = 8192

    def __init__(self, n: int, seed: int):
        if n < 2:
            raise DomainError("n must be >= 2")
        self.n = int(n)
        self.seed = int(seed)
        self._rng = np.random.Generator(np.random.Philox(
            np.random.SeedSequence(entropy=self.seed, spawn_key=(71,))))
        self._stream = np.empty(0, np.int64)

    @property
    def total_pairs(self) -> int:
        return pair_count(self.n)

    def _extend(self, m: int) -> None:
        # the stream grows in whole deduplicated chunks, so the permutation
        # revealed does not depend on the pattern of prefix() calls
        while self._stream.size < m:
            batch = self._rng.integers(0, self.total_pairs, size=self._CHUNK,
                                       dtype=np.int64)
            cand = _dedupe_in_order(batch)
            if self._stream.size:
                cand = cand[~np.isin(cand, self._stream)]
            self._stream = np.concatenate([self._stream, cand])

    def prefix_indices(self, m: int) -> np.ndarray:
        if not 0 <= m <= self.total_pairs:
            raise DomainError(f"m must be in [0, {self.total_pairs}], got {m}")
        self._extend(m)
        return self._stream[:m]

    def prefix(self, m: int) -> Multigraph:
        return from_edges(self.n, decode_pair_indices(self.prefix_indices(m), self.n))


def edge_process(n: int, seed: int) -> EdgeProcess:
    return EdgeProcess(n, seed)
