import numpy as np
import pytest

from mvhyper import (
    Euclidean,
    HyperEdge,
    LaplaceParams,
    OrientedHypergraph,
    Sphere,
    Variant,
    VertexFunction,
    dirichlet_energy,
    edge_means,
    frechet_gradient,
    frechet_inner_product,
    laplacian_field,
    p_laplacian,
    pairwise_gradient,
    pairwise_inner_product,
    pairwise_semi_inner_product,
    standard_inner_product,
)
from mvhyper.errors import DomainError, SingularityError

from _instances import MANIFOLDS, random_graph_instance, random_instance

E1 = Euclidean(1)
S2 = Sphere(2)
N = [0.0, 0.0, 1.0]
X = [1.0, 0.0, 0.0]
ALL = list(Variant)


def vf(M, n, edges, values):
    g = OrientedHypergraph(n, [HyperEdge(*e) for e in edges])
    return VertexFunction(g, M, np.array(values, dtype=float).reshape(n, -1))


def graph_p_laplacian(f, u, p, eta, isotropic):
    """Graph p-Laplacian written out for cardinality-one edges: no means, no transport."""
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


# -- edge means and gradients ------------------------------------------------------------


def test_edge_means_examples():
    f = vf(E1, 3, [({1}, {2, 3})], [0, 1, 3])
    m = edge_means(f)
    assert m.x_in[0] == pytest.approx([0.0]) and m.x_out[0] == pytest.approx([2.0])
    fs = vf(S2, 3, [({1, 2}, {3})], [N, X, [0, 1, 0]])
    np.testing.assert_allclose(edge_means(fs).x_in[0], [1 / np.sqrt(2), 0, 1 / np.sqrt(2)], atol=1e-12)
    f1 = vf(S2, 2, [({1}, {2})], [N, X])
    np.testing.assert_array_equal(edge_means(f1).x_in[0], N)


def test_edge_means_are_stationary():
    for kind, M in MANIFOLDS.items():
        f = random_instance(M, 3)
        means = edge_means(f)
        for k, e in enumerate(f.graph.edges):
            pts = f.values[np.array(e.in_set) - 1]
            grad = M.log(np.broadcast_to(means.x_in[k], pts.shape), pts).mean(axis=0)
            assert M.norm(means.x_in[k], grad) < 1e-10, kind


def test_frechet_gradient_examples():
    f = vf(S2, 2, [({1}, {2})], [N, X])
    H = frechet_gradient(f)
    np.testing.assert_allclose(H[0], [np.pi / 2, 0, 0], atol=1e-15)
    np.testing.assert_array_equal(H.base[0], N)
    f = vf(E1, 3, [({1}, {2, 3}, 4.0)], [0, 1, 3])
    assert frechet_gradient(f)[0] == pytest.approx([4.0])


def test_pairwise_gradient_examples():
    f = vf(E1, 2, [({1}, {2})], [0, 5])
    assert pairwise_gradient(f).entry(0, 1, 2) == pytest.approx([5.0])
    f = vf(E1, 3, [({1, 2}, {3})], [0, 2, 4])
    G = pairwise_gradient(f)
    assert G.block(0) == {(1, 3): pytest.approx([2.0]), (2, 3): pytest.approx([1.0])}
    with pytest.raises(DomainError):
        G.entry(0, 3, 1)


def test_constant_function_has_zero_gradients():
    for M in MANIFOLDS.values():
        f = random_instance(M, 5)
        const = f.with_values(np.broadcast_to(f.values[0], f.values.shape))
        np.testing.assert_allclose(frechet_gradient(const).vectors, 0.0, atol=1e-10)
        np.testing.assert_allclose(pairwise_gradient(const).vectors, 0.0, atol=1e-10)


# -- structural properties on random symmetric instances ---------------------------------


@pytest.mark.parametrize("kind", MANIFOLDS)
def test_frechet_gradient_antisymmetric_under_transport(kind):
    M = MANIFOLDS[kind]
    for seed in range(40):
        f = random_instance(M, seed)
        H = frechet_gradient(f)
        means = edge_means(f)
        key = {e.key: k for k, e in enumerate(f.graph.edges)}
        for k, e in enumerate(f.graph.edges):
            j = key[(e.out_set, e.in_set)]
            back = M.transp(means.x_out[k], means.x_in[k], H[j])
            np.testing.assert_allclose(H[k], -back, atol=1e-9)


@pytest.mark.parametrize("kind", MANIFOLDS)
def test_pairwise_gradient_antisymmetric_under_transport(kind):
    M = MANIFOLDS[kind]
    for seed in range(40):
        f = random_instance(M, seed)
        G = pairwise_gradient(f)
        key = {e.key: k for k, e in enumerate(f.graph.edges)}
        for k, e in enumerate(f.graph.edges):
            j = key[(e.out_set, e.in_set)]
            for (u, v), vec in G.block(k).items():
                back = M.transp(f[v], f[u], G.entry(j, v, u))
                np.testing.assert_allclose(vec, -back, atol=1e-9)


def test_pairwise_kernel_is_locally_trivial():
    rng = np.random.default_rng(0)
    M = S2
    for seed in range(30):
        f = random_instance(M, seed)
        g = f.graph
        e = g.edges[0]
        vals = np.array(f.values)
        vals[np.array(e.in_set + e.out_set) - 1] = vals[e.in_set[0] - 1]
        fc = f.with_values(vals)
        assert np.all(pairwise_gradient(fc).vectors[:len(e.in_set) * len(e.out_set)] == 0)
        # move one output vertex: some entry of edge 0 must become nonzero
        v = e.out_set[rng.integers(len(e.out_set))]
        vals[v - 1] = M.exp(vals[v - 1], M.random_tangent(rng, vals[v - 1], 1e-3))
        block = pairwise_gradient(f.with_values(vals)).block(0)
        assert max(np.linalg.norm(x) for x in block.values()) > 0


def test_frechet_kernel_contains_nonconstant_functions():
    # equal in/out means but distinct values: only the Fréchet gradient vanishes
    f = vf(E1, 4, [({1, 2}, {3, 4}), ({3, 4}, {1, 2})], [0, 2, 1, 1])
    np.testing.assert_allclose(frechet_gradient(f).vectors, 0.0)
    assert np.abs(pairwise_gradient(f).vectors).max() > 0


# -- inner products ----------------------------------------------------------------------


def test_frechet_inner_product_examples():
    f = vf(Euclidean(2), 2, [({1}, {2})], [[0, 0], [3, 4]])
    H = frechet_gradient(f)
    assert frechet_inner_product(H, H) == 25.0
    assert frechet_inner_product(H, 0 * H) == 0.0


def test_pairwise_inner_product_examples():
    f = vf(Euclidean(2), 2, [({1}, {2})], [[0, 0], [3, 4]])
    H = pairwise_gradient(f)
    assert pairwise_inner_product(H, H) == 25.0
    assert pairwise_inner_product(H, 0 * H) == 0.0


@pytest.mark.parametrize("kind", MANIFOLDS)
def test_inner_products_bilinear_and_nonnegative(kind):
    M = MANIFOLDS[kind]
    for seed in range(10):
        f = random_instance(M, seed)
        H, G = frechet_gradient(f), frechet_gradient(f)
        assert frechet_inner_product(2 * H, G) == pytest.approx(2 * frechet_inner_product(H, G), rel=1e-12)
        P = pairwise_gradient(f)
        Q = -0.5 * P
        assert pairwise_inner_product(3 * P, Q) == pytest.approx(3 * pairwise_inner_product(P, Q), rel=1e-12)
        assert pairwise_semi_inner_product(P + P, Q, f) == pytest.approx(
            2 * pairwise_semi_inner_product(P, Q, f), rel=1e-12, abs=1e-14)
        assert pairwise_semi_inner_product(P, P, f) >= 0
        assert pairwise_semi_inner_product(0 * P, P, f) == 0.0


def test_inner_product_structure_mismatch():
    f = random_instance(S2, 1)
    f2 = random_instance(S2, 2)
    with pytest.raises(DomainError):
        frechet_inner_product(frechet_gradient(f), frechet_gradient(f2))
    with pytest.raises(DomainError):
        pairwise_inner_product(pairwise_gradient(f), pairwise_gradient(f2))


def test_semi_inner_product_hand_expanded_two_edge_instance():
    # edges a = ({1,2},{3}) w=1 and b = ({1},{2,3}) w=4 on R^1, f = (0, 2, 5)
    f = vf(E1, 3, [({1, 2}, {3}, 1.0), ({1}, {2, 3}, 4.0)], [0, 2, 5])
    P = pairwise_gradient(f)
    # PTsum over edge a: (5-0)/2 + (5-2)/2 = 4; edge b: 2*((2-0)+(5-0))/2 = 7
    # vertex 1 sees a (|in|=2) and b (|in|=1); vertex 2 sees a
    expected = 4 * 4 / 2 + 7 * 7 / 1 + 4 * 4 / 2
    assert pairwise_semi_inner_product(P, P, f) == pytest.approx(expected, rel=1e-14)


# -- Laplacians: hand examples ---------------------------------------------------------------


@pytest.mark.parametrize("variant", ALL)
def test_hand_example_equals_minus_two(variant):
    f = vf(E1, 3, [({1}, {2, 3})], [0, 1, 3])
    params = LaplaceParams(2, 0, variant)
    assert p_laplacian(f, 1, params)[0] == -2.0
    assert laplacian_field(f, params)[0, 0] == -2.0


@pytest.mark.parametrize("variant", ALL)
@pytest.mark.parametrize("kind", MANIFOLDS)
def test_constant_function_has_zero_laplacian(variant, kind):
    M = MANIFOLDS[kind]
    f = random_instance(M, 7)
    const = f.with_values(np.broadcast_to(f.values[0], f.values.shape))
    np.testing.assert_allclose(laplacian_field(const, LaplaceParams(2, 1, variant)), 0.0, atol=1e-10)


def test_empty_in_neighborhood_gives_zero():
    f = vf(E1, 3, [({1}, {2, 3})], [0, 1, 3])
    for variant in ALL:
        for p in (1.5, 2, 3):
            params = LaplaceParams(p, 1, variant)
            assert np.all(p_laplacian(f, 2, params) == 0)
            assert np.all(laplacian_field(f, params)[1:] == 0)


@pytest.mark.parametrize("variant", ALL)
@pytest.mark.parametrize("kind", MANIFOLDS)
@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_field_matches_per_vertex(variant, kind, p):
    M = MANIFOLDS[kind]
    for seed in range(8):
        f = random_instance(M, 100 + seed)
        params = LaplaceParams(p, seed % 2, variant)
        field = laplacian_field(f, params)
        for u in f.graph.vertices:
            np.testing.assert_allclose(field[u - 1], p_laplacian(f, u, params), atol=1e-11)
        np.testing.assert_allclose(M.tangent_residual(f.values, field), 0.0, atol=1e-10)


@pytest.mark.parametrize("kind", MANIFOLDS)
def test_isotropic_equals_anisotropic_at_p2(kind):
    M = MANIFOLDS[kind]
    for seed in range(30):
        f = random_instance(M, seed)
        for fw in ("frechet", "pairwise"):
            iso = laplacian_field(f, LaplaceParams(2, 0, Variant.of(fw, True)))
            aniso = laplacian_field(f, LaplaceParams(2, 0, Variant.of(fw, False)))
            np.testing.assert_allclose(iso, aniso, atol=1e-10)


@pytest.mark.parametrize("variant", ALL)
def test_eta_normalizes_by_in_degree(variant):
    for seed in range(20):
        f = random_instance(S2, seed)
        raw = laplacian_field(f, LaplaceParams(2.5, 0, variant))
        nrm = laplacian_field(f, LaplaceParams(2.5, 1, variant))
        for u in f.graph.vertices:
            deg = f.graph.in_degree(u)
            if deg:
                np.testing.assert_array_equal(nrm[u - 1], raw[u - 1] / deg)


@pytest.mark.parametrize("kind", MANIFOLDS)
@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_graph_reduction_against_graph_oracle(kind, p):
    M = MANIFOLDS[kind]
    for seed in range(25):
        f = random_graph_instance(M, seed)
        for eta in (0, 1):
            for variant in ALL:
                field = laplacian_field(f, LaplaceParams(p, eta, variant))
                for u in f.graph.vertices:
                    ref = graph_p_laplacian(f, u, p, eta, variant.isotropic)
                    np.testing.assert_allclose(field[u - 1], ref, atol=1e-10)


# -- Laplacians: degenerate cases ---------------------------------------------------------


def test_p_below_two_with_coincident_values_raises():
    f = vf(E1, 3, [({1}, {2}), ({2}, {1}), ({3}, {1})], [0, 0, 1])
    for variant in ALL:
        params = LaplaceParams(1.5, 0, variant)
        with pytest.raises(SingularityError):
            p_laplacian(f, 1, params)
        with pytest.raises(SingularityError) as info:
            laplacian_field(f, params)
        assert 3 not in info.value.vertices
        # vertex 3 alone is fine
        p_laplacian(f, 3, params)


def test_p_above_two_tolerates_coincident_values():
    f = vf(E1, 2, [({1}, {2}), ({2}, {1})], [0, 0])
    for variant in ALL:
        np.testing.assert_array_equal(laplacian_field(f, LaplaceParams(3, 0, variant)), 0.0)


def test_params_validation():
    with pytest.raises(DomainError):
        LaplaceParams(0.0)
    with pytest.raises(DomainError):
        LaplaceParams(2, 2)
    with pytest.raises(DomainError):
        LaplaceParams(2, 0, "bogus")
    assert LaplaceParams(2, 0, "isotropic_pairwise").variant is Variant.ISOTROPIC_PAIRWISE


def test_vertex_function_validation():
    g = OrientedHypergraph(2, [HyperEdge({1}, {2})])
    with pytest.raises(DomainError):
        VertexFunction(g, S2, [[0, 0, 2.0], [1, 0, 0]])
    with pytest.raises(DomainError):
        VertexFunction(g, S2, [[0, 0, 1.0]])


# -- Dirichlet energy -----------------------------------------------------------------------


def test_dirichlet_energy_examples():
    f = vf(E1, 2, [({1}, {2})], [0, 3])
    assert dirichlet_energy(f, "frechet") == 9.0
    for fw in ("frechet", "pairwise"):
        for M in MANIFOLDS.values():
            g = random_instance(M, 4)
            const = g.with_values(np.broadcast_to(g.values[0], g.values.shape))
            assert dirichlet_energy(const, fw) == pytest.approx(0.0, abs=1e-20)
            assert dirichlet_energy(g, fw) >= 0
    with pytest.raises(DomainError):
        dirichlet_energy(f, "other")


@pytest.mark.parametrize("framework", ["frechet", "pairwise"])
def test_euclidean_energy_is_twice_the_laplacian_pairing(framework):
    # on symmetric Euclidean hypergraphs the energy equals 2 <f, Delta_2 f> (eta = 0)
    M = Euclidean(3)
    for seed in range(100):
        f = random_instance(M, seed)
        energy = dirichlet_energy(f, framework)
        lap = laplacian_field(f, LaplaceParams(2, 0, Variant.of(framework)))
        assert energy == pytest.approx(2 * standard_inner_product(f.values, lap), rel=1e-9, abs=1e-12)
