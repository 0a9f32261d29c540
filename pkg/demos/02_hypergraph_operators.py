"""Gradients and Laplacians on a small oriented hypergraph.

Run with ``python3 demos/02_hypergraph_operators.py``.
"""
import numpy as np

from mvhyper import (
    Euclidean,
    HyperEdge,
    LaplaceParams,
    OrientedHypergraph,
    Sphere,
    Variant,
    VertexFunction,
    dirichlet_energy,
    frechet_gradient,
    laplacian_field,
    pairwise_gradient,
)

# One edge from {1} to {2, 3}, on the real line with values 0, 1, 3.
g = OrientedHypergraph(3, [HyperEdge({1}, {2, 3})])
f = VertexFunction(g, Euclidean(1), [[0.0], [1.0], [3.0]])
for variant in (Variant.ISOTROPIC_FRECHET, Variant.ISOTROPIC_PAIRWISE):
    lap = laplacian_field(f, LaplaceParams(p=2, eta=0, variant=variant))
    print(f"{variant.value:>20}: Laplacian at vertex 1 = {lap[0, 0]}")
# Vertices 2 and 3 have no outgoing edges, so their Laplacian is zero by convention.

# The two gradients see different things. Here the in-mean and out-mean of the
# edge pair coincide, so the Fréchet gradient vanishes while the pairwise one does not.
g2 = OrientedHypergraph(4, [HyperEdge({1, 2}, {3, 4}), HyperEdge({3, 4}, {1, 2})])
f2 = VertexFunction(g2, Euclidean(1), [[0.0], [2.0], [1.0], [1.0]])
print("Fréchet gradient:", frechet_gradient(f2).vectors.ravel())
print("pairwise gradient block of edge 0:", {k: float(v[0]) for k, v in pairwise_gradient(f2).block(0).items()})
# The pairwise energy uses a semi inner product that only sees the sum of each
# block, and here the entries cancel, so both energies are zero.
print("energies (Fréchet, pairwise):",dirichlet_energy(f2, "frechet"), dirichlet_energy(f2, "pairwise"))

# On the sphere the same operators act on tangent vectors.
S = Sphere(2)
g3 = OrientedHypergraph(4, [HyperEdge({1, 2}, {3, 4}), HyperEdge({3, 4}, {1, 2}), HyperEdge({1}, {2})])
vals = np.array([[0.0, 0.0, 1.0], [0.6, 0.0, 0.8], [0.0, 0.6, 0.8], [0.36, 0.48, 0.8]])
f3 = VertexFunction(g3, S, vals)
for variant in Variant:
    lap = laplacian_field(f3, LaplaceParams(p=3, eta=1, variant=variant))
    print(f"p=3 {variant.value:>20}: |Laplacian| per vertex =", np.round(S.norm(vals, lap), 5))
