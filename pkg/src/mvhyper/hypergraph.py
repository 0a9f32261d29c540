"""
Weighted oriented hypergraphs.

A hyperedge is a pair of disjoint, nonempty vertex sets (input, output) with a
nonnegative weight. Vertices are the 1-based ids ``1..N``.

>>> g = OrientedHypergraph(3, [HyperEdge({1}, {2}), HyperEdge({2}, {1, 3})])
>>> g.in_neighborhood(2)
[1]
"""
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DomainError


def _vertex_tuple(ids):
    try:
        out = tuple(sorted({int(i) for i in ids}))
    except TypeError:
        raise DomainError(f"vertex set must be an iterable of ints, got {ids!r}") from None
    return out


@dataclass(frozen=True)
class HyperEdge:
    in_set: tuple
    out_set: tuple
    weight: float = 1.0

    def __post_init__(self):
        ins, outs = _vertex_tuple(self.in_set), _vertex_tuple(self.out_set)
        object.__setattr__(self, "in_set", ins)
        object.__setattr__(self, "out_set", outs)
        object.__setattr__(self, "weight", float(self.weight))
        if not ins or not outs:
            raise DomainError(f"hyperedge sets must be nonempty: {ins} -> {outs}")
        if set(ins) & set(outs):
            raise DomainError(f"hyperedge in/out sets overlap: {ins} -> {outs}")
        if not np.isfinite(self.weight) or self.weight < 0:
            raise DomainError(f"hyperedge weight must be finite and nonnegative, got {self.weight}")

    @property
    def key(self):
        return self.in_set, self.out_set

    def opposite(self):
        return HyperEdge(self.out_set, self.in_set, self.weight)

    def __repr__(self):
        ins = ",".join(map(str, self.in_set))
        outs = ",".join(map(str, self.out_set))
        return f"HyperEdge({{{ins}}}->{{{outs}}}, w={self.weight:g})"


@dataclass(frozen=True)
class OrientedHypergraph:
    """Weighted oriented hypergraph on vertices ``1..num_vertices``.

    Instances are immutable; derived index structures are built lazily and
    cached.
    """

    num_vertices: int
    edges: tuple = ()

    def __post_init__(self):
        n = int(self.num_vertices)
        if n < 1:
            raise DomainError(f"need at least one vertex, got {n}")
        object.__setattr__(self, "num_vertices", n)
        edges = tuple(e if isinstance(e, HyperEdge) else HyperEdge(*e) for e in self.edges)
        object.__setattr__(self, "edges", edges)
        seen = set()
        for k, e in enumerate(edges):
            for v in e.in_set + e.out_set:
                if not 1 <= v <= n:
                    raise DomainError(f"edge {k}: vertex {v} outside [1, {n}]")
            if e.key in seen:
                raise DomainError(f"edge {k}: duplicate hyperedge {e.in_set} -> {e.out_set}")
            seen.add(e.key)

    @property
    def num_edges(self):
        return len(self.edges)

    @property
    def vertices(self):
        return range(1, self.num_vertices + 1)

    def __len__(self):
        return len(self.edges)

    def _check_vertex(self, u):
        if not 1 <= u <= self.num_vertices:
            raise DomainError(f"vertex {u} outside [1, {self.num_vertices}]")

    @cached_property
    def in_neighborhoods(self):
        nb = {u: [] for u in self.vertices}
        for k, e in enumerate(self.edges):
            for u in e.in_set:
                nb[u].append(k)
        return nb

    def in_neighborhood(self, u):
        """Indices of the edges whose input set contains ``u``, in edge order."""
        self._check_vertex(u)
        return list(self.in_neighborhoods[u])

    def in_degree(self, u):
        self._check_vertex(u)
        return len(self.in_neighborhoods[u])

    def edge_set(self):
        """The edges as a set of ``(in_set, out_set, weight)`` triples."""
        return frozenset((e.in_set, e.out_set, e.weight) for e in self.edges)

    def opposite(self):
        return OrientedHypergraph(self.num_vertices, tuple(e.opposite() for e in self.edges))

    def is_symmetric(self):
        weights = {e.key: e.weight for e in self.edges}
        return all(weights.get((e.out_set, e.in_set)) == e.weight for e in self.edges)

    def symmetrize(self):
        """Union with the opposite hypergraph.

        Raises :class:`DomainError` if an edge and its existing opposite carry
        different weights.
        """
        weights = {e.key: e.weight for e in self.edges}
        added = []
        for k, e in enumerate(self.edges):
            op = e.opposite()
            if op.key in weights:
                if weights[op.key] != e.weight:
                    raise DomainError(
                        f"edge {k}: opposite exists with weight {weights[op.key]} != {e.weight}")
                continue
            weights[op.key] = op.weight
            added.append(op)
        return OrientedHypergraph(self.num_vertices, self.edges + tuple(added))

    def expand_to_graph(self):
        """Graph with a unit-weight edge ``({u}, {v})`` for every ``u in e_in, v in e_out``."""
        seen = {}
        for e in self.edges:
            for u in e.in_set:
                for v in e.out_set:
                    seen.setdefault((u, v), None)
        return OrientedHypergraph(
            self.num_vertices, tuple(HyperEdge((u,), (v,), 1.0) for u, v in seen))

    def is_graph(self):
        return all(len(e.in_set) == 1 and len(e.out_set) == 1 for e in self.edges)

    def incidence_matrix(self):
        """Signed ``(N, E)`` incidence matrix: ``-1`` for input, ``+1`` for output vertices."""
        B = np.zeros((self.num_vertices, self.num_edges))
        for k, e in enumerate(self.edges):
            B[np.array(e.in_set) - 1, k] = -1.0
            B[np.array(e.out_set) - 1, k] = 1.0
        return B

    def covered_vertices(self):
        return sorted({v for e in self.edges for v in e.in_set + e.out_set})

    def is_connected(self):
        """True if every vertex lies in an edge and the undirected incidence structure is connected."""
        parent = list(range(self.num_vertices + 1))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for e in self.edges:
            vs = e.in_set + e.out_set
            r = find(vs[0])
            for v in vs[1:]:
                parent[find(v)] = r
        return len({find(v) for v in self.vertices}) == 1

    def cardinality_histogram(self):
        """Counts of edges by ``(|e_in|, |e_out|)``."""
        hist = {}
        for e in self.edges:
            key = (len(e.in_set), len(e.out_set))
            hist[key] = hist.get(key, 0) + 1
        return dict(sorted(hist.items()))

    # -- flat index arrays for the vectorized operators --------------------------

    @cached_property
    def _index(self):
        return _EdgeIndex(self)


class _EdgeIndex:
    """Padded and flattened 0-based index arrays derived from the edge list."""

    def __init__(self, g):
        E = g.num_edges
        self.weight = np.array([e.weight for e in g.edges], dtype=float)
        self.n_in = np.array([len(e.in_set) for e in g.edges], dtype=int)
        self.n_out = np.array([len(e.out_set) for e in g.edges], dtype=int)
        # distinct vertex sets, so each Fréchet mean is solved once per evaluation
        sid = {}
        for e in g.edges:
            sid.setdefault(e.in_set, len(sid))
            sid.setdefault(e.out_set, len(sid))
        self.set_pad, self.set_mask = _pad(list(sid))
        self.edge_in_set = np.array([sid[e.in_set] for e in g.edges], dtype=int)
        self.edge_out_set = np.array([sid[e.out_set] for e in g.edges], dtype=int)
        self.sets = list(sid)

        # (vertex u, edge e) for u in e_in
        inc = [(u - 1, k) for k, e in enumerate(g.edges) for u in e.in_set]
        self.inc_v, self.inc_e = _columns(inc, 2)
        # (edge e, u1, u2) for u1 in e_in, u2 in e_out
        pairs = [(k, u - 1, v - 1) for k, e in enumerate(g.edges) for u in e.in_set for v in e.out_set]
        self.pair_e, self.pair_u, self.pair_v = _columns(pairs, 3)
        # (edge e, u1) rows of the pair table: slot id of each pair within its (e, u1) group
        groups = [(k, u - 1) for k, e in enumerate(g.edges) for u in e.in_set]
        self.grp_e, self.grp_u = _columns(groups, 2)
        gid = {key: i for i, key in enumerate(groups)}
        self.pair_grp = np.array([gid[(k, u)] for k, u, _ in pairs], dtype=int)
        # (vertex u, edge e, u1) for u, u1 in e_in, with the group id of (e, u1) and incidence id of (u, e)
        iid = {key: i for i, key in enumerate(inc)}
        quads = [(u - 1, k, u1 - 1) for k, e in enumerate(g.edges) for u in e.in_set for u1 in e.in_set]
        self.quad_v, self.quad_e, self.quad_u1 = _columns(quads, 3)
        self.quad_grp = np.array([gid[(k, u1)] for _, k, u1 in quads], dtype=int)
        self.quad_inc = np.array([iid[(u, k)] for u, k, _ in quads], dtype=int)
        self.in_degree = np.bincount(self.inc_v, minlength=g.num_vertices) if inc else np.zeros(g.num_vertices, int)
        self.num_edges = E


def _pad(sets):
    K = max((len(s) for s in sets), default=1)
    idx = np.zeros((len(sets), K), dtype=int)
    mask = np.zeros((len(sets), K), dtype=bool)
    for k, s in enumerate(sets):
        idx[k, :len(s)] = np.array(s) - 1
        mask[k, :len(s)] = True
    return idx, mask


def _columns(rows, width):
    if not rows:
        return tuple(np.zeros(0, dtype=int) for _ in range(width))
    a = np.array(rows, dtype=int)
    return tuple(a[:, j] for j in range(width))


def _seed_to_uint(seed):
    return int(seed) % (1 << 64)


def random_hypergraph(n_vertices, n_edges, max_cardinality, seed):
    """Random unit-weight symmetric oriented hypergraph.

    For each of ``n_edges`` base edges the input and output cardinalities are
    drawn uniformly from ``1..max_cardinality`` and the vertices without
    replacement, so the two sets are disjoint. A base edge that repeats an
    earlier base edge (or its opposite) is dropped. The result is then
    symmetrized.
    """
    n_vertices, n_edges, max_cardinality = int(n_vertices), int(n_edges), int(max_cardinality)
    if n_vertices < 2:
        raise DomainError(f"n_vertices must be >= 2, got {n_vertices}")
    if n_edges < 1:
        raise DomainError(f"n_edges must be >= 1, got {n_edges}")
    if max_cardinality < 1:
        raise DomainError(f"max_cardinality must be >= 1, got {max_cardinality}")
    if 2 * max_cardinality > n_vertices:
        raise DomainError(
            f"2 * max_cardinality = {2 * max_cardinality} exceeds n_vertices = {n_vertices}; "
            "disjoint in/out sets cannot be guaranteed")
    rng = np.random.default_rng(_seed_to_uint(seed))
    edges, seen = [], set()
    for _ in range(n_edges):
        k_in, k_out = rng.integers(1, max_cardinality + 1, size=2)
        chosen = rng.choice(n_vertices, size=k_in + k_out, replace=False) + 1
        e = HyperEdge(chosen[:k_in], chosen[k_in:], 1.0)
        if e.key in seen:
            continue
        seen.add(e.key)
        seen.add((e.out_set, e.in_set))
        edges.append(e)
    return OrientedHypergraph(n_vertices, tuple(edges)).symmetrize()
