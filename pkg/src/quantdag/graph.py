"""Adjacency structures, union-DAG construction, acyclicity and orderings.

Edge convention: ``edges[h, j] == True`` means the directed edge ``h <- j``
(j is a parent of h). An ordering is valid when every child appears before
each of its parents.
"""

import csv
import heapq
from dataclasses import dataclass, field

import numpy as np

from .errors import CycleError, DimensionError, SearchFailureError

# Hill-climb budget for misspecify_order and the tolerance around the
# requested rank correlation.
_MISSPEC_MAX_MOVES = 100_000
KENDALL_TOLERANCE = 0.02


@dataclass(frozen=True)
class Adjacency:
    """Boolean adjacency matrix with a false diagonal."""

    edges: np.ndarray

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=bool)
        if edges.ndim != 2 or edges.shape[0] != edges.shape[1]:
            raise DimensionError("adjacency must be a square matrix")
        if np.any(np.diag(edges)):
            raise ValueError("self-loops are not representable")
        object.__setattr__(self, "edges", edges)

    @property
    def p(self):
        return self.edges.shape[0]


@dataclass(frozen=True)
class IndividualDagSet:
    """Per-individual adjacencies plus their union, which must be acyclic."""

    per_individual: np.ndarray  # (n, p, p) bool
    union: Adjacency = field(init=False)

    def __post_init__(self):
        arr = np.asarray(self.per_individual, dtype=bool)
        if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
            raise DimensionError("per-individual adjacencies must be n x p x p")
        object.__setattr__(self, "per_individual", arr)
        union = Adjacency(arr.any(axis=0))
        if not is_acyclic(union):
            raise CycleError("union of individual graphs contains a cycle",
                             cycle=find_cycle(union.edges))
        object.__setattr__(self, "union", union)

    @property
    def n(self):
        return self.per_individual.shape[0]

    def individual(self, i):
        return Adjacency(self.per_individual[i])


def _as_edge_matrix(adj):
    if isinstance(adj, Adjacency):
        return adj.edges
    return np.asarray(adj, dtype=bool)


def is_acyclic(adj):
    """Kahn peeling on the child->parent arcs; True iff no directed cycle."""
    edges = _as_edge_matrix(adj)
    p = edges.shape[0]
    # arc h -> j for every edge h <- j; indegree[v] = number of children of v
    indegree = edges.sum(axis=0).astype(np.int64)
    frontier = [v for v in range(p) if indegree[v] == 0]
    removed = 0
    while frontier:
        v = frontier.pop()
        removed += 1
        for j in np.flatnonzero(edges[v]):
            indegree[j] -= 1
            if indegree[j] == 0:
                frontier.append(int(j))
    return removed == p


def find_cycle(adj):
    """One directed cycle of a cyclic graph, as [v0, ..., v0]; None if acyclic."""
    edges = _as_edge_matrix(adj)
    p = edges.shape[0]
    color = [0] * p  # 0 unvisited, 1 on stack, 2 done
    parent_of = {}

    def dfs(v):
        color[v] = 1
        for w in np.flatnonzero(edges[v]):
            w = int(w)
            if color[w] == 1:
                cycle = [w, v]
                u = v
                while u != w:
                    u = parent_of[u]
                    cycle.append(u)
                cycle.reverse()
                return cycle
            if color[w] == 0:
                parent_of[w] = v
                found = dfs(w)
                if found:
                    return found
        color[v] = 2
        return None

    for start in range(p):
        if color[start] == 0:
            found = dfs(start)
            if found:
                return found
    return None


def union_graph(beta_values, is_edge=None):
    """Individual graphs implied by an (n, p, p) array of edge coefficients.

    ``is_edge`` maps coefficients to booleans; the default treats any nonzero
    value as an edge. Construction fails with :class:`CycleError` if the
    union is cyclic.
    """
    beta_values = np.asarray(beta_values, dtype=float)
    if beta_values.ndim != 3 or beta_values.shape[1] != beta_values.shape[2]:
        raise DimensionError("beta_values must be n x p x p")
    if not np.all(np.isfinite(beta_values)):
        raise ValueError("beta_values contains non-finite entries")
    ind = beta_values != 0 if is_edge is None else is_edge(beta_values)
    ind = np.asarray(ind, dtype=bool).copy()
    ind[:, np.arange(ind.shape[1]), np.arange(ind.shape[1])] = False
    return IndividualDagSet(per_individual=ind)


def topological_order(adj):
    """Ordering with every child before its parents; index tie-break.

    Raises :class:`CycleError` carrying one offending cycle when the input
    is cyclic.
    """
    edges = _as_edge_matrix(adj)
    p = edges.shape[0]
    indegree = edges.sum(axis=0).astype(np.int64)
    frontier = [v for v in range(p) if indegree[v] == 0]
    heapq.heapify(frontier)
    order = []
    while frontier:
        v = heapq.heappop(frontier)
        order.append(v)
        for j in np.flatnonzero(edges[v]):
            indegree[j] -= 1
            if indegree[j] == 0:
                heapq.heappush(frontier, int(j))
    if len(order) != p:
        raise CycleError("graph is cyclic; no topological order exists",
                         cycle=find_cycle(edges))
    return np.asarray(order, dtype=np.int64)


def _check_permutation(order):
    order = np.asarray(order, dtype=np.int64)
    p = order.size
    if sorted(order.tolist()) != list(range(p)):
        raise ValueError("ordering must be a permutation of 0..p-1")
    return order


def kendall_tau(a, b):
    """Kendall rank correlation between two node orderings (no ties)."""
    a = _check_permutation(a)
    b = _check_permutation(b)
    if a.size != b.size:
        raise DimensionError("orderings must have equal length")
    p = a.size
    if p < 2:
        raise DimensionError("need at least two nodes")
    pos_a = np.empty(p, dtype=np.int64)
    pos_b = np.empty(p, dtype=np.int64)
    pos_a[a] = np.arange(p)
    pos_b[b] = np.arange(p)
    da = pos_a[:, None] - pos_a[None, :]
    db = pos_b[:, None] - pos_b[None, :]
    concordant = np.sum((da * db > 0)[np.triu_indices(p, 1)])
    total = p * (p - 1) // 2
    return float((2 * concordant - total) / total)


def misspecify_order(true_order, target_tau, seed):
    """Permutation whose Kendall correlation with ``true_order`` is close to
    ``target_tau`` (within 0.02).

    Random adjacent-transposition hill climb from the true ordering: each
    swap of neighbouring positions changes the discordant-pair count by
    exactly one, so the walk can land within one step-granularity of any
    target. Deterministic for a fixed seed.
    """
    true_order = _check_permutation(true_order)
    if not -1.0 < target_tau < 1.0:
        raise ValueError("target_tau must lie strictly inside (-1, 1)")
    p = true_order.size
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x6D69]))

    pos_true = np.empty(p, dtype=np.int64)
    pos_true[true_order] = np.arange(p)
    order = true_order.copy()
    # discordant count relative to true_order; tau = 1 - 2 d / total
    d = 0
    total = p * (p - 1) // 2

    def tau_of(d):
        return 1.0 - 2.0 * d / total

    target_d = (1.0 - target_tau) * total / 2.0
    for _ in range(_MISSPEC_MAX_MOVES):
        if abs(tau_of(d) - target_tau) <= KENDALL_TOLERANCE:
            return order
        i = int(rng.integers(0, p - 1))
        u, v = order[i], order[i + 1]
        # swapping neighbours flips concordance of exactly the pair (u, v)
        concordant_now = pos_true[u] < pos_true[v]
        d_new = d + 1 if concordant_now else d - 1
        if abs(d_new - target_d) <= abs(d - target_d):
            order[i], order[i + 1] = v, u
            d = d_new
    raise SearchFailureError(
        f"could not reach Kendall tau {target_tau} +/- {KENDALL_TOLERANCE} "
        f"for p={p} within {_MISSPEC_MAX_MOVES} moves"
    )


def adjacency_to_csv(adj, path, node_names=None):
    """Write a 0/1 adjacency matrix as CSV with a header row of node names."""
    edges = _as_edge_matrix(adj)
    p = edges.shape[0]
    names = node_names or [f"Y{i + 1}" for i in range(p)]
    if len(names) != p:
        raise DimensionError("need one name per node")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        for row in edges.astype(int):
            writer.writerow(row.tolist())


def adjacency_from_csv(path):
    """Inverse of :func:`adjacency_to_csv`; returns (Adjacency, node names)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        names = next(reader)
        rows = [[bool(int(cell)) for cell in row] for row in reader]
    return Adjacency(np.asarray(rows, dtype=bool)), names
