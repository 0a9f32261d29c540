"""
Seeded property batteries for the geometry kernel and the hypergraph operators.

Each battery maps an instance seed to the largest violation it observed. A
:class:`CheckReport` collects the maxima per (property, manifold) and keeps a
reproducer for the first seed that exceeded the tolerance.
"""
from dataclasses import dataclass, field

import numpy as np

from .calculus import (
    LaplaceParams,
    Variant,
    VertexFunction,
    dirichlet_energy,
    edge_means,
    frechet_gradient,
    laplacian_field,
    pairwise_gradient,
    standard_inner_product,
)
from .diffusion import DiffusionConfig, diffuse
from .hypergraph import random_hypergraph
from .manifold import Euclidean, Sphere, manifold_from_name

DEFAULT_KINDS = ("euclidean", "sphere", "hyperbolic")
DEFAULT_DIMS = {"euclidean": 3, "sphere": 2, "hyperbolic": 2}
GRAPH_PS = (1.5, 2.0, 3.0)
GEOMETRY_SAMPLES = 1000


@dataclass(frozen=True)
class Sizes:
    max_vertices: int = 20
    max_cardinality: int = 4
    max_edges: int = 6


@dataclass
class Failure:
    seed: int
    error: float
    instance: object = None
    message: str = ""


@dataclass
class PropertyResult:
    name: str
    kind: str
    tolerance: float
    max_error: float = 0.0
    count: int = 0
    failure: Failure = None

    @property
    def ok(self):
        return self.failure is None

    def record(self, seed, error, instance=None, message=""):
        self.count += 1
        if not error <= self.max_error:
            self.max_error = float(error)
        if self.failure is None and not error <= self.tolerance:
            self.failure = Failure(seed, float(error), instance, message)


@dataclass
class CheckReport:
    results: list = field(default_factory=list)

    @property
    def ok(self):
        return all(r.ok for r in self.results)

    def get(self, name, kind):
        for r in self.results:
            if r.name == name and r.kind == kind:
                return r
        raise KeyError((name, kind))

    def lines(self):
        out = []
        for r in self.results:
            status = "ok  " if r.ok else "FAIL"
            out.append(f"{status} {r.name:<24} {r.kind:<11} n={r.count:<5} "
                       f"max_error={r.max_error:.3e} tol={r.tolerance:.0e}")
        return out


# -- instances -----------------------------------------------------------------------------


def localized_values(M, rng, n, radius=0.5):
    """``n`` random points within geodesic ``radius`` of a random center."""
    c = M.random_point(rng, scale=1.0)
    C = np.broadcast_to(c, (n, c.size))
    v = M.random_tangent(rng, C)
    nv = M.norm(C, v)[:, None]
    r = radius * rng.uniform(0, 1, size=(n, 1))
    return M.exp(C, v / np.where(nv > 0, nv, 1.0) * r)


def random_instance(M, seed, sizes=Sizes()):
    """Random symmetric hypergraph with values clustered in a small ball of ``M``."""
    rng = np.random.default_rng(seed)
    c = int(rng.integers(1, sizes.max_cardinality + 1))
    n = int(rng.integers(2 * c, max(2 * c, sizes.max_vertices) + 1))
    m = int(rng.integers(1, sizes.max_edges + 1))
    g = random_hypergraph(n, m, c, seed)
    return VertexFunction(g, M, localized_values(M, rng, n))


def random_graph_instance(M, seed, max_vertices=12):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, max(2, max_vertices) + 1))
    g = random_hypergraph(n, int(rng.integers(1, 2 * n)), 1, seed)
    return VertexFunction(g, M, localized_values(M, rng, n))


# -- geometry --------------------------------------------------------------------------------


def geometry_errors(M, seed, n=GEOMETRY_SAMPLES):
    """Max errors of exp/log inversion, transport isometry and distance = |log| on ``n`` pairs."""
    rng = np.random.default_rng(seed)
    scale = 0.6 if isinstance(M, Sphere) else 1.0
    x = M.random_point(rng, scale=scale, size=n)
    y = M.exp(x, M.random_tangent(rng, x, scale=scale))
    if isinstance(M, Sphere):
        # log is ill-conditioned next to the cut locus; keep pairs a safe distance away
        keep = M.dist(x, y) < np.pi - 0.1
        x, y = x[keep], y[keep]
    lg = M.log(x, y)
    inversion = np.abs(M.exp(x, lg) - y).max(initial=0.0)
    u, v = M.random_tangent(rng, x), M.random_tangent(rng, x)
    Pu, Pv = M.transp(x, y, u), M.transp(x, y, v)
    isometry = max(np.abs(M.inner(y, Pu, Pv) - M.inner(x, u, v)).max(initial=0.0),
                   np.abs(M.tangent_residual(y, Pu)).max(initial=0.0))
    distance = np.abs(M.norm(x, lg) - M.dist(x, y)).max(initial=0.0)
    return {"exp_log_inversion": inversion, "transport_isometry": isometry, "distance_log_norm": distance}


# -- operator properties ------------------------------------------------------------------------


def _opposites(g):
    key = {e.key: k for k, e in enumerate(g.edges)}
    return [key[(e.out_set, e.in_set)] for e in g.edges]


def constant_edge_gradient(f):
    """Fréchet gradient of an edge on which ``f`` is constant (should vanish)."""
    e = f.graph.edges[0]
    vals = np.array(f.values)
    vals[np.array(e.in_set + e.out_set) - 1] = vals[e.in_set[0] - 1]
    H = frechet_gradient(f.with_values(vals))
    return float(np.abs(H[0]).max())


def frechet_antisymmetry(f):
    M, g = f.manifold, f.graph
    H = frechet_gradient(f)
    means = edge_means(f)
    opp = _opposites(g)
    back = M.transp(means.x_out, means.x_in, H.vectors[opp])
    return float(np.abs(H.vectors + back).max(initial=0.0))


def pairwise_kernel(f, rng):
    """Both directions of the pairwise kernel characterization on edge 0.

    Returns ``(forward, reverse)``: the largest entry when ``f`` is constant on
    the edge, and 1.0 if a pair that differs by more than 1e-6 went undetected.
    """
    M = f.manifold
    e = f.graph.edges[0]
    cells = len(e.in_set) * len(e.out_set)
    vals = np.array(f.values)
    vals[np.array(e.in_set + e.out_set) - 1] = vals[e.in_set[0] - 1]
    forward = float(np.abs(pairwise_gradient(f.with_values(vals)).vectors[:cells]).max())
    v = e.out_set[rng.integers(len(e.out_set))]
    step = M.random_tangent(rng, vals[v - 1])
    vals[v - 1] = M.exp(vals[v - 1], step / M.norm(vals[v - 1], step) * 1e-3)
    block = pairwise_gradient(f.with_values(vals)).vectors[:cells]
    reverse = 0.0 if np.abs(block).max() > 0 else 1.0
    return forward, reverse


def pairwise_antisymmetry(f):
    M, g = f.manifold, f.graph
    G = pairwise_gradient(f)
    opp = _opposites(g)
    err = 0.0
    for (k, u, v), vec in zip(G.pairs, G.vectors):
        back = M.transp(f[v], f[u], G.entry(opp[k], v, u))
        err = max(err, float(np.abs(vec + back).max()))
    return err


def energy_identity(f, framework):
    """Relative gap between the Dirichlet energy and twice the 2-Laplacian pairing (eta = 0)."""
    energy = dirichlet_energy(f, framework)
    lap = laplacian_field(f, LaplaceParams(2, 0, Variant.of(framework)))
    return abs(energy - 2 * standard_inner_product(f.values, lap)) / (1 + energy)


def p2_coincidence(f):
    err = 0.0
    for fw in ("frechet", "pairwise"):
        iso = laplacian_field(f, LaplaceParams(2, 0, Variant.of(fw, True)))
        aniso = laplacian_field(f, LaplaceParams(2, 0, Variant.of(fw, False)))
        err = max(err, float(np.abs(iso - aniso).max()))
    return err


def eta_scaling(f, p=2.0):
    err = 0.0
    deg = np.array([f.graph.in_degree(u) for u in f.graph.vertices], dtype=float)
    has = deg > 0
    for variant in Variant:
        raw = laplacian_field(f, LaplaceParams(p, 0, variant))
        nrm = laplacian_field(f, LaplaceParams(p, 1, variant))
        err = max(err, float(np.abs(nrm[has] - raw[has] / deg[has, None]).max(initial=0.0)))
    return err


def graph_laplacian_oracle(f, u, p, eta, isotropic):
    """Graph p-Laplacian at ``u`` written directly for cardinality-one edges."""
    M = f.manifold
    nbrs = [(e.out_set[0], e.weight) for e in f.graph.edges if e.in_set == (u,)]
    if not nbrs:
        return np.zeros(M.ambient_dim)
    logs = [M.log(f[u], f[v]) for v, _ in nbrs]
    ds = [M.dist(f[u], f[v]) for v, _ in nbrs]
    if isotropic:
        agg = sum(w * d * d for (_, w), d in zip(nbrs, ds))
        out = agg ** ((p - 2) / 2) * sum(w * lg for (_, w), lg in zip(nbrs, logs))
    else:
        out = sum(w ** (p / 2) * d ** (p - 2) * lg for (_, w), d, lg in zip(nbrs, ds, logs))
    return -out / len(nbrs) ** eta


def graph_reduction(f):
    err = 0.0
    for p in GRAPH_PS:
        for eta in (0, 1):
            for variant in Variant:
                field_ = laplacian_field(f, LaplaceParams(p, eta, variant))
                for u in f.graph.vertices:
                    ref = graph_laplacian_oracle(f, u, p, eta, variant.isotropic)
                    err = max(err, float(np.abs(field_[u - 1] - ref).max()))
    return err


def graph_trace_agreement(f, steps=50, step_size=0.2):
    """Largest difference between Fréchet and pairwise diffusion snapshots on a graph."""
    traces = [diffuse(f, DiffusionConfig(LaplaceParams(2, 1, v), step_size=step_size, max_steps=steps,
                                         record_every=1))
              for v in (Variant.ISOTROPIC_FRECHET, Variant.ISOTROPIC_PAIRWISE)]
    a, b = traces
    if a.steps != b.steps:
        return float("inf")
    return max(float(np.abs(sa.values - sb.values).max()) for sa, sb in zip(a.snapshots, b.snapshots))


def _symmetric_battery(f, seed):
    rng = np.random.default_rng([seed, 1])
    fwd, rev = pairwise_kernel(f, rng)
    out = {
        "constant_edge_gradient": constant_edge_gradient(f),
        "frechet_antisymmetry": frechet_antisymmetry(f),
        "pairwise_kernel": fwd,
        "pairwise_detects_change": rev,
        "pairwise_antisymmetry": pairwise_antisymmetry(f),
        "p2_coincidence": p2_coincidence(f),
        "eta_scaling": eta_scaling(f),
    }
    if isinstance(f.manifold, Euclidean):
        out["energy_identity_F"] = energy_identity(f, "frechet")
        out["energy_identity_P"] = energy_identity(f, "pairwise")
    return out


TOLERANCES = {
    "exp_log_inversion": 1e-9,
    "transport_isometry": 1e-9,
    "distance_log_norm": 1e-9,
    "constant_edge_gradient": 1e-10,
    "frechet_antisymmetry": 1e-9,
    "pairwise_kernel": 0.0,
    "pairwise_detects_change": 0.0,
    "pairwise_antisymmetry": 1e-9,
    "energy_identity_F": 1e-9,
    "energy_identity_P": 1e-9,
    "p2_coincidence": 1e-10,
    "eta_scaling": 0.0,
    "graph_reduction": 1e-10,
    "graph_trace_agreement": 1e-10,
    "evaluation": 0.0,
}


def _result(report, name, kind):
    for r in report.results:
        if r.name == name and r.kind == kind:
            return r
    r = PropertyResult(name, kind, TOLERANCES[name])
    report.results.append(r)
    return r


def _run(report, kind, seed, evaluate, make):
    f = None
    try:
        f = make()
        errors = evaluate(f)
    except (ArithmeticError, ValueError, RuntimeError) as err:
        _result(report, "evaluation", kind).record(seed, float("inf"), f, f"{type(err).__name__}: {err}")
        return
    _result(report, "evaluation", kind).record(seed, 0.0)
    for name, err in errors.items():
        _result(report, name, kind).record(seed, err, f)


def _graph_battery(f, trace_check=True):
    out = {"graph_reduction": graph_reduction(f)}
    if trace_check and isinstance(f.manifold, Sphere):
        out["graph_trace_agreement"] = graph_trace_agreement(f)
    return out


def run_checks(seeds=50, kinds=DEFAULT_KINDS, sizes=Sizes(), first_seed=0, geometry=True, graphs=True):
    """Run every battery on ``seeds`` seeded instances per manifold kind."""
    report = CheckReport()
    for kind in kinds:
        M = manifold_from_name(kind, DEFAULT_DIMS[kind])
        if geometry:
            for name, err in geometry_errors(M, first_seed).items():
                _result(report, name, kind).record(first_seed, err)
        for seed in range(first_seed, first_seed + seeds):
            _run(report, kind, seed, lambda f, s=seed: _symmetric_battery(f, s),
                 lambda s=seed: random_instance(M, s, sizes))
        if graphs:
            for seed in range(first_seed, first_seed + seeds):
                _run(report, kind, seed, _graph_battery,
                     lambda s=seed: random_graph_instance(M, s, sizes.max_vertices))
    return report


__all__ = [
    "CheckReport",
    "Failure",
    "PropertyResult",
    "Sizes",
    "TOLERANCES",
    "energy_identity",
    "geometry_errors",
    "graph_laplacian_oracle",
    "random_graph_instance",
    "random_instance",
    "run_checks",
]
