"""
Vertex/edge function spaces, gradients, inner products and p-Laplacians on
manifold-valued oriented hypergraphs.

Two frameworks are provided:

* Fréchet: each hyperedge is summarized by the Fréchet means ``x_in`` and
  ``x_out`` of its input and output values; the gradient on an edge is
  ``sqrt(w) log_{x_in} x_out``.
* Pairwise: the gradient on an edge is the table of scaled logs
  ``sqrt(w) / (|e_in| |e_out|) log_{f(u)} f(v)`` over ``u in e_in, v in e_out``.

Each framework has an isotropic and an anisotropic p-Laplacian, optionally
normalized by in-degree (``eta = 1``). :func:`p_laplacian` evaluates one
vertex straight from the defining sums; :func:`laplacian_field` evaluates all
vertices at once with flattened index arrays and is what the diffusion solver
uses.
"""
import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError, SingularityError
from .hypergraph import OrientedHypergraph
from .manifold import Manifold

#: distances below this count as coincident points for p < 2
DEGENERACY_EPS = 1e-12


class Variant(str, enum.Enum):
    ISOTROPIC_FRECHET = "isotropic_frechet"
    ANISOTROPIC_FRECHET = "anisotropic_frechet"
    ISOTROPIC_PAIRWISE = "isotropic_pairwise"
    ANISOTROPIC_PAIRWISE = "anisotropic_pairwise"

    @property
    def framework(self):
        return "frechet" if self.name.endswith("FRECHET") else "pairwise"

    @property
    def isotropic(self):
        return self.name.startswith("ISOTROPIC")

    @classmethod
    def of(cls, framework, isotropic=True):
        return cls(f"{'isotropic' if isotropic else 'anisotropic'}_{framework}")


@dataclass(frozen=True)
class LaplaceParams:
    p: float = 2.0
    eta: int = 0
    variant: Variant = Variant.ISOTROPIC_FRECHET

    def __post_init__(self):
        p = float(self.p)
        if not (np.isfinite(p) and p > 0):
            raise DomainError(f"p must lie in (0, inf), got {self.p}")
        if self.eta not in (0, 1):
            raise DomainError(f"eta must be 0 or 1, got {self.eta}")
        try:
            variant = Variant(self.variant)
        except ValueError:
            raise DomainError(f"unknown Laplacian variant {self.variant!r}") from None
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "eta", int(self.eta))
        object.__setattr__(self, "variant", variant)


@dataclass(frozen=True, eq=False)
class VertexFunction:
    """A manifold value for every vertex; ``f[u]`` is the value at 1-based vertex ``u``."""

    graph: OrientedHypergraph
    manifold: Manifold
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        expected = (self.graph.num_vertices, self.manifold.ambient_dim)
        if values.shape != expected:
            raise DomainError(f"vertex values must have shape {expected}, got {values.shape}")
        self.manifold.check_point(values)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __getitem__(self, u):
        self.graph._check_vertex(u)
        return self.values[u - 1]

    def with_values(self, values):
        return VertexFunction(self.graph, self.manifold, values)

    def on(self, graph):
        """Same values over another hypergraph on the same vertex set."""
        if graph.num_vertices != self.graph.num_vertices:
            raise DomainError("vertex count mismatch")
        return VertexFunction(graph, self.manifold, self.values)

    def __eq__(self, other):
        return (isinstance(other, VertexFunction) and self.graph == other.graph
                and self.manifold == other.manifold and np.array_equal(self.values, other.values))


@dataclass(frozen=True)
class EdgeMeans:
    """Per-edge Fréchet means; row ``k`` belongs to edge ``k``.

    ``set_means`` holds one mean per distinct vertex set of the hypergraph.
    """

    x_in: np.ndarray
    x_out: np.ndarray
    set_means: np.ndarray = None


@dataclass(frozen=True, eq=False)
class FrechetEdgeField:
    """One tangent vector per edge, anchored at the edge's input mean."""

    manifold: Manifold
    base: np.ndarray
    vectors: np.ndarray

    def __getitem__(self, k):
        return self.vectors[k]

    def __mul__(self, c):
        return FrechetEdgeField(self.manifold, self.base, c * self.vectors)

    __rmul__ = __mul__

    def __add__(self, other):
        _check_same_frechet(self, other)
        return FrechetEdgeField(self.manifold, self.base, self.vectors + other.vectors)


@dataclass(frozen=True, eq=False)
class PairwiseEdgeField:
    """Tangent vectors indexed by ``(edge, u, v)`` with ``u in e_in, v in e_out``.

    Only the ``e_in x e_out`` block of every edge is stored. ``pairs`` holds
    rows ``(edge index, u, v)`` with 1-based vertex ids, and row ``i`` of
    ``vectors`` is anchored at ``base[i] = f(u)``.
    """

    graph: OrientedHypergraph
    manifold: Manifold
    pairs: np.ndarray
    base: np.ndarray
    vectors: np.ndarray

    def entry(self, edge, u, v):
        hit = np.flatnonzero((self.pairs[:, 0] == edge) & (self.pairs[:, 1] == u) & (self.pairs[:, 2] == v))
        if hit.size == 0:
            raise DomainError(f"({u}, {v}) is not an input/output pair of edge {edge}")
        return self.vectors[hit[0]]

    def block(self, edge):
        """Entries of one edge as a dict ``(u, v) -> vector``."""
        rows = np.flatnonzero(self.pairs[:, 0] == edge)
        return {(int(self.pairs[i, 1]), int(self.pairs[i, 2])): self.vectors[i] for i in rows}

    def __mul__(self, c):
        return PairwiseEdgeField(self.graph, self.manifold, self.pairs, self.base, c * self.vectors)

    __rmul__ = __mul__

    def __add__(self, other):
        _check_same_pairwise(self, other)
        return PairwiseEdgeField(self.graph, self.manifold, self.pairs, self.base, self.vectors + other.vectors)


def _check_same_frechet(H, G):
    if H.manifold != G.manifold or H.vectors.shape != G.vectors.shape or not np.allclose(H.base, G.base):
        raise DomainError("edge fields live on different structures")


def _check_same_pairwise(H, G):
    if (H.manifold != G.manifold or H.graph != G.graph or not np.array_equal(H.pairs, G.pairs)
            or not np.allclose(H.base, G.base)):
        raise DomainError("edge fields live on different structures")


def _retag(err, msg):
    if isinstance(err, ConvergenceError):
        return ConvergenceError(f"{msg}: {err}", residual=err.residual)
    return type(err)(f"{msg}: {err}")


def _scatter(index, values, n):
    """Row sums ``out[i] = sum_{k: index[k] == i} values[k]`` in index order."""
    if values.ndim == 1:
        return np.bincount(index, weights=values, minlength=n)
    out = np.empty((n, values.shape[1]))
    for j in range(values.shape[1]):
        out[:, j] = np.bincount(index, weights=values[:, j], minlength=n)
    return out


# -- means and gradients -----------------------------------------------------------


def edge_means(f, init=None):
    """Fréchet means of the input and output values of every edge (unit weights).

    ``init`` may be the :class:`EdgeMeans` of a nearby vertex function on the
    same hypergraph; its means then seed the iteration.
    """
    idx = f.graph._index
    M, X = f.manifold, f.values
    if idx.num_edges == 0:
        empty = np.zeros((0, M.ambient_dim))
        return EdgeMeans(empty, empty.copy(), empty.copy())
    start = None if init is None else init.set_means
    try:
        sm = M.frechet_mean(X[idx.set_pad], idx.set_mask.astype(float), init=start)
    except (SingularityError, ConvergenceError):
        for k, e in enumerate(f.graph.edges):
            for side, vs in (("input", e.in_set), ("output", e.out_set)):
                try:
                    M.frechet_mean(X[np.array(vs) - 1])
                except (SingularityError, ConvergenceError) as err:
                    raise _retag(err, f"edge {k} ({side} set)") from err
        raise
    return EdgeMeans(sm[idx.edge_in_set], sm[idx.edge_out_set], sm)


def frechet_gradient(f, means=None):
    """``sqrt(w(e)) log_{x_in} x_out`` for every edge, anchored at ``x_in``."""
    idx = f.graph._index
    means = edge_means(f) if means is None else means
    try:
        logs = f.manifold.log(means.x_in, means.x_out)
    except SingularityError:
        for k in range(idx.num_edges):
            try:
                f.manifold.log(means.x_in[k], means.x_out[k])
            except SingularityError as err:
                raise _retag(err, f"edge {k}") from err
        raise
    return FrechetEdgeField(f.manifold, means.x_in, np.sqrt(idx.weight)[:, None] * logs)


def _pair_logs(f):
    idx = f.graph._index
    X, M = f.values, f.manifold
    try:
        return M.log(X[idx.pair_u], X[idx.pair_v])
    except SingularityError:
        for e, u, v in zip(idx.pair_e, idx.pair_u, idx.pair_v):
            try:
                M.log(X[u], X[v])
            except SingularityError as err:
                raise _retag(err, f"edge {e}, pair ({u + 1}, {v + 1})") from err
        raise


def pairwise_gradient(f):
    """``sqrt(w(e)) / (|e_in| |e_out|) log_{f(u)} f(v)`` for every edge and input/output pair."""
    idx = f.graph._index
    scale = np.sqrt(idx.weight) / (idx.n_in * idx.n_out)
    vectors = scale[idx.pair_e][:, None] * _pair_logs(f)
    pairs = np.stack([idx.pair_e, idx.pair_u + 1, idx.pair_v + 1], axis=1)
    return PairwiseEdgeField(f.graph, f.manifold, pairs, f.values[idx.pair_u], vectors)


# -- inner products --------------------------------------------------------------


def frechet_inner_product(H, G):
    _check_same_frechet(H, G)
    return float(np.sum(H.manifold.inner(H.base, H.vectors, G.vectors)))


def pairwise_inner_product(H, G):
    _check_same_pairwise(H, G)
    return float(np.sum(H.manifold.inner(H.base, H.vectors, G.vectors)))


def _ptsum(H, f):
    """``PTsum_u(H(e))`` for every incidence ``(u, e)`` with ``u in e_in``, in incidence order."""
    idx = f.graph._index
    X, M = f.values, f.manifold
    grouped = _scatter(idx.pair_grp, H.vectors, len(idx.grp_e))
    src, dst = X[idx.quad_u1], X[idx.quad_v]
    try:
        moved = M.transp(src, dst, grouped[idx.quad_grp])
    except SingularityError:
        for q in range(len(idx.quad_v)):
            try:
                M.transp(src[q], dst[q], grouped[idx.quad_grp[q]])
            except SingularityError as err:
                raise _retag(err, f"edge {idx.quad_e[q]}, transport from vertex {idx.quad_u1[q] + 1} "
                                  f"to vertex {idx.quad_v[q] + 1}") from err
        raise
    return _scatter(idx.quad_inc, moved, len(idx.inc_v))


def pairwise_semi_inner_product(H, G, f):
    """Sum over vertices ``u`` and edges ``e`` in the in-neighborhood of ``u`` of
    ``<PTsum_u(H(e)), PTsum_u(G(e))>_{f(u)} / |e_in|``."""
    _check_same_pairwise(H, G)
    if H.graph != f.graph:
        raise DomainError("edge fields and vertex function use different hypergraphs")
    idx = f.graph._index
    if len(idx.inc_v) == 0:
        return 0.0
    SH, SG = _ptsum(H, f), _ptsum(G, f)
    vals = f.manifold.inner(f.values[idx.inc_v], SH, SG) / idx.n_in[idx.inc_e]
    return float(np.sum(vals))


def standard_inner_product(a, b):
    """Canonical vertex inner product ``sum_u <a(u), b(u)>`` of two ``(N, d)`` Euclidean arrays."""
    return float(np.sum(np.asarray(a) * np.asarray(b)))


def dirichlet_energy(f, framework="frechet"):
    """Squared norm of the gradient: Fréchet inner product, or pairwise semi inner product."""
    if framework == "frechet":
        H = frechet_gradient(f)
        return frechet_inner_product(H, H)
    if framework == "pairwise":
        H = pairwise_gradient(f)
        return pairwise_semi_inner_product(H, H, f)
    raise DomainError(f"unknown framework {framework!r}")


# -- p-Laplacians -------------------------------------------------------------------


def _power(d, expo, what):
    if expo < 0 and d < DEGENERACY_EPS:
        raise SingularityError(f"{what}: zero distance raised to negative power {expo:g}")
    return d ** expo


def p_laplacian(f, u, params=LaplaceParams()):
    """p-Laplacian of ``f`` at vertex ``u``, as a tangent vector at ``f(u)``.

    Evaluated term by term over the in-neighborhood of ``u``; the zero vector
    if ``u`` has no in-edges.
    """
    g, M = f.graph, f.manifold
    nbhd = g.in_neighborhood(u)
    fu = f[u]
    out = np.zeros(M.ambient_dim)
    if not nbhd:
        return out
    p, iso = params.p, params.variant.isotropic
    aggregate = 0.0

    for k in nbhd:
        e = g.edges[k]
        w, n_in, n_out = e.weight, len(e.in_set), len(e.out_set)
        if params.variant.framework == "frechet":
            x_in = M.frechet_mean(np.array([f[v] for v in e.in_set]))
            x_out = M.frechet_mean(np.array([f[v] for v in e.out_set]))
            lg = M.log(x_in, x_out)
            d = float(M.norm(x_in, lg))
            moved = M.transp(x_in, fu, lg)
            if iso:
                aggregate += w * d ** 2 / n_in
                out += w / n_in * moved
            elif w > 0:
                out += w ** (p / 2) * _power(d, p - 2, f"vertex {u}, edge {k}") / n_in * moved
        else:
            inner = np.zeros(M.ambient_dim)
            for u1 in e.in_set:
                acc = np.zeros(M.ambient_dim)
                for u2 in e.out_set:
                    lg = M.log(f[u1], f[u2])
                    d = float(M.norm(f[u1], lg))
                    if iso:
                        aggregate += w * d ** 2 / (n_in ** 2 * n_out)
                        acc += lg
                    elif w > 0:
                        acc += _power(d, p - 2, f"vertex {u}, edge {k}, pair ({u1}, {u2})") * lg
                inner += M.transp(f[u1], fu, acc)
            if iso:
                out += w / (n_in ** 2 * n_out) * inner
            else:
                out += w ** (p / 2) / (n_in ** p * n_out ** (p - 1)) * inner

    if iso:
        out *= _power(np.sqrt(aggregate), p - 2, f"vertex {u}, isotropic aggregate")
    return -out / len(nbhd) ** params.eta


def laplacian_field(f, params=LaplaceParams(), means=None):
    """p-Laplacian at every vertex, as an ``(N, d)`` array of tangent vectors at ``f.values``.

    Vertices whose evaluation is singular are collected and reported together
    in a single :class:`SingularityError`. ``means`` optionally supplies the
    edge means of ``f`` (Fréchet variants only).
    """
    try:
        if params.variant.framework == "frechet":
            return _frechet_field(f, params, means)
        return _pairwise_field(f, params)
    except SingularityError as err:
        bad = []
        for u in f.graph.vertices:
            try:
                p_laplacian(f, u, params)
            except SingularityError:
                bad.append(u)
        if not bad:
            raise
        exc = SingularityError(f"Laplacian singular at vertices {bad}: {err}")
        exc.vertices = bad
        raise exc from err


def _degeneracy(mask, index, n, what):
    if np.any(mask):
        bad = sorted(set((index[mask] + 1).tolist()))
        exc = SingularityError(f"{what} at vertices {bad}")
        exc.vertices = bad
        raise exc


def _finish(f, params, vec, aggregate):
    idx = f.graph._index
    N = f.graph.num_vertices
    deg = idx.in_degree
    p = params.p
    if params.variant.isotropic:
        has = deg > 0
        if p < 2:
            _degeneracy(has & (np.sqrt(aggregate) < DEGENERACY_EPS), np.arange(N), N,
                        "zero isotropic aggregate with p < 2")
        factor = np.ones(N)
        factor[has] = np.sqrt(aggregate[has]) ** (p - 2)
        vec = factor[:, None] * vec
    return -vec / np.maximum(deg, 1)[:, None] ** params.eta


def _frechet_field(f, params, means=None):
    idx = f.graph._index
    M, X, N = f.manifold, f.values, f.graph.num_vertices
    if idx.num_edges == 0:
        return np.zeros_like(X)
    means = edge_means(f) if means is None else means
    logs = M.log(means.x_in, means.x_out)
    d = M.norm(means.x_in, logs)
    e, v = idx.inc_e, idx.inc_v
    moved = M.transp(means.x_in[e], X[v], logs[e])
    w, n_in, p = idx.weight[e], idx.n_in[e], params.p
    if params.variant.isotropic:
        aggregate = _scatter(v, w * d[e] ** 2 / n_in, N)
        coef = w / n_in
    else:
        aggregate = None
        live = w > 0
        if p < 2:
            _degeneracy(live & (d[e] < DEGENERACY_EPS), v, N, "coincident edge means with p < 2")
        coef = np.where(live, w ** (p / 2) * np.where(live, d[e], 1.0) ** (p - 2) / n_in, 0.0)
    return _finish(f, params, _scatter(v, coef[:, None] * moved, N), aggregate)


def _pairwise_field(f, params):
    idx = f.graph._index
    M, X, N = f.manifold, f.values, f.graph.num_vertices
    if idx.num_edges == 0:
        return np.zeros_like(X)
    logs = _pair_logs(f)
    d = M.norm(X[idx.pair_u], logs)
    w, n_in, n_out, p = idx.weight, idx.n_in, idx.n_out, params.p
    if params.variant.isotropic:
        per_edge = _scatter(idx.pair_e, d ** 2, idx.num_edges) * w / (n_in ** 2 * n_out)
        aggregate = _scatter(idx.inc_v, per_edge[idx.inc_e], N)
        grouped = _scatter(idx.pair_grp, logs, len(idx.grp_e))
        coef = w / (n_in ** 2 * n_out)
    else:
        aggregate = None
        live = w[idx.pair_e] > 0
        if p < 2:
            # pair (u1, u2) feeds every vertex of e_in
            hit = live & (d < DEGENERACY_EPS)
            bad_edges = np.unique(idx.pair_e[hit])
            _degeneracy(np.isin(idx.inc_e, bad_edges), idx.inc_v, N, "coincident pair values with p < 2")
        scale = np.where(live, np.where(live, d, 1.0) ** (p - 2), 0.0)
        grouped = _scatter(idx.pair_grp, scale[:, None] * logs, len(idx.grp_e))
        coef = np.where(w > 0, w ** (p / 2) / (n_in ** p * n_out ** (p - 1)), 0.0)
    moved = M.transp(X[idx.quad_u1], X[idx.quad_v], grouped[idx.quad_grp])
    vec = _scatter(idx.quad_v, coef[idx.quad_e][:, None] * moved, N)
    return _finish(f, params, vec, aggregate)
