"""p-Laplacians and heat diffusion for oriented hypergraphs with manifold-valued vertex features."""
from .calculus import (
    EdgeMeans,
    FrechetEdgeField,
    LaplaceParams,
    PairwiseEdgeField,
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
from .diffusion import (
    DiffusionConfig,
    DiffusionTrace,
    diffuse,
    diffusion_step,
    embed_random_octant,
    equilibrium_shape,
    geodesic_deviation,
    vertex_spread,
)
from .errors import ConvergenceError, DomainError, SingularityError
from .hypergraph import HyperEdge, OrientedHypergraph, random_hypergraph
from .manifold import Euclidean, Hyperbolic, Manifold, Sphere, manifold_from_name

__version__ = "0.1.0"
