import numpy as np
import pytest

from mvhyper import (
    DiffusionConfig,
    Euclidean,
    HyperEdge,
    LaplaceParams,
    OrientedHypergraph,
    Sphere,
    Variant,
    VertexFunction,
    diffuse,
    diffusion_step,
    embed_random_octant,
    equilibrium_shape,
    geodesic_deviation,
    laplacian_field,
    random_hypergraph,
    vertex_spread,
)
from mvhyper.diffusion import octant_points, spherical_to_cartesian
from mvhyper.errors import DomainError

from _instances import random_instance

E1 = Euclidean(1)


def line_graph(n):
    edges = [HyperEdge({i}, {i + 1}) for i in range(1, n)] + [HyperEdge({i + 1}, {i}) for i in range(1, n)]
    return OrientedHypergraph(n, edges)


def test_two_node_step_hand_example():
    g = OrientedHypergraph(2, [HyperEdge({1}, {2}), HyperEdge({2}, {1})])
    f = VertexFunction(g, E1, [[0.0], [4.0]])
    cfg = DiffusionConfig(LaplaceParams(2, 0, Variant.ISOTROPIC_FRECHET), step_size=0.25)
    np.testing.assert_array_equal(laplacian_field(f, cfg.params), [[-4.0], [4.0]])
    out = diffusion_step(f, cfg)
    np.testing.assert_array_equal(out.values, [[1.0], [3.0]])
    np.testing.assert_array_equal(f.values, [[0.0], [4.0]])


def test_zero_step_and_equilibrium_are_fixed_points():
    f = random_instance(Sphere(2), 3)
    cfg = DiffusionConfig(step_size=0.0)
    np.testing.assert_array_equal(diffusion_step(f, cfg).values, f.values)
    const = f.with_values(np.broadcast_to(f.values[0], f.values.shape))
    np.testing.assert_array_equal(diffusion_step(const, DiffusionConfig()).values, const.values)


def test_constant_start_converges_immediately():
    f = random_instance(Sphere(2), 4)
    const = f.with_values(np.broadcast_to(f.values[0], f.values.shape))
    tr = diffuse(const, DiffusionConfig())
    assert tr.converged and tr.steps_taken == 0 and len(tr.snapshots) == 1
    assert tr.classification() == "constant"


def test_euclidean_line_reaches_consensus_at_the_mean():
    # symmetric unit-weight graph: sum of values is conserved, equilibrium is constant
    g = line_graph(6)
    x0 = np.array([[0.0], [1.0], [5.0], [-2.0], [3.0], [2.0]])
    f = VertexFunction(g, E1, x0)
    tr = diffuse(f, DiffusionConfig(LaplaceParams(2, 0), step_size=0.2, residual_tol=1e-10))
    assert tr.converged
    np.testing.assert_allclose(tr.final.values, x0.mean(), atol=1e-9)


def test_trace_bookkeeping():
    f = random_instance(Sphere(2), 5)
    cfg = DiffusionConfig(LaplaceParams(2, 1), step_size=0.3, max_steps=25, record_every=10,
                          residual_tol=1e-300)
    tr = diffuse(f, cfg)
    assert not tr.converged and tr.classification() == "unconverged"
    assert tr.steps == [0, 10, 20, 25] and tr.steps_taken == 25
    assert len(tr.snapshots) == len(tr.residuals) == len(tr.energies) == len(tr.spreads) == 4
    assert all(r >= 0 for r in tr.residuals)


def test_fixed_point_property():
    f = random_instance(Sphere(2), 6)
    cfg = DiffusionConfig(LaplaceParams(2, 1), step_size=0.3, residual_tol=1e-6)
    tr = diffuse(f, cfg)
    assert tr.converged
    nxt = diffusion_step(tr.final, cfg)
    moved = Sphere(2).dist(tr.final.values, nxt.values)
    assert np.all(moved <= cfg.step_size * cfg.residual_tol)


def test_euclidean_frechet_energy_nonincreasing():
    M = Euclidean(2)
    for seed in range(10):
        f = random_instance(M, seed)
        cfg = DiffusionConfig(LaplaceParams(2, 1), step_size=0.2, max_steps=300, record_every=1)
        tr = diffuse(f, cfg)
        e = np.array(tr.energies)
        assert np.all(np.diff(e) <= 1e-12 * (1 + e[:-1]))


def test_graph_traces_agree_between_frameworks():
    for seed in range(10):
        g = random_hypergraph(8, 8, 1, seed)
        f = embed_random_octant(g, seed)
        traces = [diffuse(f, DiffusionConfig(LaplaceParams(2, 1, v), step_size=0.5, max_steps=200,
                                             record_every=1))
                  for v in (Variant.ISOTROPIC_FRECHET, Variant.ISOTROPIC_PAIRWISE)]
        a, b = traces
        assert a.steps == b.steps
        for sa, sb in zip(a.snapshots, b.snapshots):
            np.testing.assert_allclose(sa.values, sb.values, atol=1e-10)


def test_vertex_spread_examples():
    S = Sphere(2)
    g = OrientedHypergraph(2, [HyperEdge({1}, {2})])
    assert vertex_spread(VertexFunction(g, S, [[0, 0, 1.0], [1, 0, 0]])) == pytest.approx(np.pi / 2)
    assert vertex_spread(VertexFunction(g, S, [[0, 0, 1.0], [0, 0, 1.0]])) == 0.0
    assert vertex_spread(VertexFunction(OrientedHypergraph(1), S, [[0, 1.0, 0]])) == 0.0


def test_octant_embedding():
    g = random_hypergraph(30, 5, 3, 1)
    f = embed_random_octant(g, 11)
    assert np.all(f.values >= 0)
    np.testing.assert_allclose(np.linalg.norm(f.values, axis=1), 1.0, atol=1e-15)
    np.testing.assert_array_equal(f.values, embed_random_octant(g, 11).values)
    assert not np.array_equal(f.values, embed_random_octant(g, 12).values)
    np.testing.assert_allclose(spherical_to_cartesian(0.0, 1.234), [0, 0, 1], atol=1e-16)
    assert octant_points(4, 0).shape == (4, 3)


def test_config_validation():
    with pytest.raises(DomainError):
        DiffusionConfig(step_size=-1.0)
    with pytest.raises(DomainError):
        DiffusionConfig(residual_tol=0.0)
    with pytest.raises(DomainError):
        DiffusionConfig(record_every=0)


def test_equilibrium_shape_examples():
    S = Sphere(2)
    g = OrientedHypergraph(3)
    const = VertexFunction(g, S, np.tile([0.0, 0.0, 1.0], (3, 1)))
    assert equilibrium_shape(const) == "constant" and geodesic_deviation(const) == 0.0
    t = np.array([0.1, 0.5, 1.2])
    arc = VertexFunction(g, S, np.stack([np.cos(t), np.sin(t), 0 * t], axis=1))
    assert equilibrium_shape(arc) == "geodesic" and geodesic_deviation(arc) < 1e-15
    corners = VertexFunction(g, S, np.eye(3))
    assert equilibrium_shape(corners) == "scattered"
    assert geodesic_deviation(corners) == pytest.approx(np.pi / 2)


def test_trace_shape_labels():
    f = random_instance(Sphere(2), 4)
    const = f.with_values(np.broadcast_to(f.values[0], f.values.shape))
    assert diffuse(const, DiffusionConfig()).shape() == "constant"
    assert diffuse(f, DiffusionConfig(max_steps=2, residual_tol=1e-300)).shape() == "unconverged"
