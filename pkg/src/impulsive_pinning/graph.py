"""Weighted digraphs, Laplacians and their block-triangular ordering.

Weights follow the consensus convention: ``weights[i, j] > 0`` means vertex
``j`` influences vertex ``i`` (an edge ``j -> i``).  All vertex indices are
0-based.
"""

from __future__ import annotations

import hashlib
import heapq
import json
import warnings
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import GraphError, NoRootError


class Connectivity(str, Enum):
    STRONGLY_CONNECTED = "StronglyConnected"
    SPANNING_TREE = "SpanningTree"
    NO_ROOT = "NoRoot"


@dataclass(frozen=True, eq=False)
class WeightedDigraph:
    """Directed graph on ``n`` vertices given by a nonnegative weight matrix.

    The diagonal is not part of the graph; nonzero diagonal input is zeroed
    and ``diagonal_dropped`` is set.
    """

    weights: np.ndarray
    diagonal_dropped: bool = False

    def __post_init__(self):
        w = np.array(self.weights, dtype=float, copy=True)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] < 1:
            raise GraphError(f"weight matrix must be square and non-empty, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise GraphError("weight matrix contains non-finite entries")
        dropped = self.diagonal_dropped
        if np.any(np.diag(w) != 0):
            warnings.warn("diagonal weight entries ignored and set to zero", stacklevel=3)
            np.fill_diagonal(w, 0.0)
            dropped = True
        if np.any(w < 0):
            raise GraphError("off-diagonal weights must be nonnegative")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "diagonal_dropped", dropped)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @classmethod
    def from_edges(cls, n: int, edges) -> "WeightedDigraph":
        """Build from ``(source, target, weight)`` triples; influence flows source -> target."""
        if n < 1:
            raise GraphError("vertex count must be at least 1")
        w = np.zeros((n, n))
        for src, dst, weight in edges:
            if not (0 <= src < n and 0 <= dst < n):
                raise GraphError(f"edge {src}->{dst} out of range for n={n}")
            if src == dst:
                raise GraphError(f"self-loop at vertex {src}")
            if weight < 0:
                raise GraphError(f"negative weight on edge {src}->{dst}")
            w[dst, src] += weight
        return cls(w)

    def edges(self):
        """Yield ``(source, target, weight)`` for every positive weight."""
        targets, sources = np.nonzero(self.weights)
        for i, j in zip(targets, sources):
            yield int(j), int(i), float(self.weights[i, j])

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "edges": [{"from": s, "to": t, "weight": w} for s, t, w in self.edges()],
        }


def graph_from_dict(data: dict) -> WeightedDigraph:
    """Parse the JSON graph document (edge list or dense ``weights``)."""
    if "weights" in data:
        w = np.asarray(data["weights"], dtype=float)
        if "n" in data and w.shape != (data["n"], data["n"]):
            raise GraphError(f"weights shape {w.shape} does not match n={data['n']}")
        return WeightedDigraph(w)
    if "n" not in data:
        raise GraphError("graph document needs 'n' with 'edges', or 'weights'")
    try:
        edges = [(int(e["from"]), int(e["to"]), float(e.get("weight", 1.0)))
                 for e in data.get("edges", [])]
    except (KeyError, TypeError, ValueError) as exc:
        raise GraphError(f"malformed edge entry: {exc}") from exc
    return WeightedDigraph.from_edges(int(data["n"]), edges)


def load_graph(path) -> WeightedDigraph:
    with open(path) as fh:
        return graph_from_dict(json.load(fh))


def save_graph(g: WeightedDigraph, path) -> None:
    Path(path).write_text(json.dumps(g.to_dict(), indent=2) + "\n")


@dataclass(frozen=True)
class SccDecomposition:
    """Strongly connected components in topological order (sources first).

    ``components[c]`` lists its vertices in increasing original index.
    ``condensation_edges`` holds ``(c_from, c_to)`` pairs in the influence
    direction.
    """

    components: tuple
    condensation_edges: tuple
    source_components: tuple

    @property
    def order(self) -> np.ndarray:
        return np.array([v for comp in self.components for v in comp], dtype=int)

    @property
    def block_sizes(self) -> tuple:
        return tuple(len(c) for c in self.components)


def _influence_pattern(weights: np.ndarray) -> np.ndarray:
    # row = source, column = target
    return weights.T > 0


def scc_decompose(g: WeightedDigraph) -> SccDecomposition:
    """Strongly connected components ordered so every edge points forward.

    Among components ready to be emitted the one holding the smallest
    original vertex index goes first, which makes the order deterministic.
    """
    pattern = _influence_pattern(g.weights)
    ncomp, labels = connected_components(csr_matrix(pattern), directed=True,
                                         connection="strong")
    members = [[] for _ in range(ncomp)]
    for v, lab in enumerate(labels):
        members[lab].append(v)

    src, dst = np.nonzero(pattern)
    cedges = {(int(labels[a]), int(labels[b])) for a, b in zip(src, dst) if labels[a] != labels[b]}
    indeg = [0] * ncomp
    succ = [[] for _ in range(ncomp)]
    for a, b in cedges:
        indeg[b] += 1
        succ[a].append(b)

    heap = [(members[c][0], c) for c in range(ncomp) if indeg[c] == 0]
    heapq.heapify(heap)
    sources = {c for _, c in heap}
    emitted = []
    while heap:
        _, c = heapq.heappop(heap)
        emitted.append(c)
        for d in succ[c]:
            indeg[d] -= 1
            if indeg[d] == 0:
                heapq.heappush(heap, (members[d][0], d))

    rank = {c: k for k, c in enumerate(emitted)}
    return SccDecomposition(
        components=tuple(tuple(members[c]) for c in emitted),
        condensation_edges=tuple(sorted((rank[a], rank[b]) for a, b in cedges)),
        source_components=tuple(sorted(rank[c] for c in sources)),
    )


def classify(scc: SccDecomposition) -> Connectivity:
    if len(scc.components) == 1:
        return Connectivity.STRONGLY_CONNECTED
    if len(scc.source_components) == 1:
        return Connectivity.SPANNING_TREE
    return Connectivity.NO_ROOT


@dataclass(frozen=True, eq=False)
class Laplacian:
    """Graph Laplacian with its connectivity class.

    ``permutation`` lists the vertex order that puts ``entries`` into lower
    block-triangular form with the root component first; ``block_sizes``
    are the diagonal block sizes in that order.  ``labels`` maps rows back to
    the vertex numbering of the graph the Laplacian was built from.
    """

    entries: np.ndarray
    classification: Connectivity
    permutation: np.ndarray
    block_sizes: tuple
    labels: np.ndarray = field(default=None)

    def __post_init__(self):
        for name in ("entries", "permutation"):
            arr = np.array(getattr(self, name), copy=True)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        labels = np.arange(self.n) if self.labels is None else np.array(self.labels, copy=True)
        labels.setflags(write=False)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def root_block(self) -> np.ndarray:
        """Row indices (in this Laplacian's order) of the root component."""
        return self.permutation[: self.block_sizes[0]]

    def blocks(self):
        """Row-index arrays of every diagonal block, root first."""
        out, start = [], 0
        for size in self.block_sizes:
            out.append(self.permutation[start:start + size])
            start += size
        return out

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(np.asarray(self.entries.shape, dtype=np.int64).tobytes())
        h.update(np.ascontiguousarray(self.entries, dtype=np.float64).tobytes())
        return h.hexdigest()


def laplacian_matrix(weights: np.ndarray) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    lap = -w.copy()
    np.fill_diagonal(lap, 0.0)
    np.fill_diagonal(lap, w.sum(axis=1) - np.diag(w))
    return lap


def build_laplacian(g: WeightedDigraph) -> Laplacian:
    scc = scc_decompose(g)
    cls = classify(scc)
    perm = np.arange(g.n) if cls is Connectivity.STRONGLY_CONNECTED else scc.order
    return Laplacian(laplacian_matrix(g.weights), cls, perm, scc.block_sizes)


def reorder_block_form(lap: Laplacian) -> Laplacian:
    """Permute so the root component occupies the leading rows.

    The result is lower block-triangular with irreducible diagonal blocks;
    its own ``permutation`` is the identity.
    """
    if lap.classification is Connectivity.NO_ROOT:
        raise NoRootError("graph has no spanning tree; no block-triangular form with a single root")
    p = lap.permutation
    return Laplacian(lap.entries[np.ix_(p, p)], lap.classification, np.arange(lap.n),
                     lap.block_sizes, labels=lap.labels[p])


def weights_from_laplacian(entries: np.ndarray) -> np.ndarray:
    w = -np.array(entries, dtype=float)
    np.fill_diagonal(w, 0.0)
    return w


def is_block_lower_triangular(entries: np.ndarray, block_sizes) -> bool:
    """Direct scan: zero above the block diagonal and each later block row coupled to an earlier one."""
    bounds = np.cumsum((0,) + tuple(block_sizes))
    for k in range(len(block_sizes)):
        lo, hi = bounds[k], bounds[k + 1]
        if np.any(entries[lo:hi, hi:] != 0):
            return False
        if k > 0 and not np.any(entries[lo:hi, :lo] != 0):
            return False
    return True
