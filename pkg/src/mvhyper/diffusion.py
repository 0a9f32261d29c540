"""
Heat diffusion ``d/dt f(u, t) = -Delta f(u, t)`` on manifold-valued hypergraphs.

Time stepping is the explicit geodesic Euler scheme with simultaneous (Jacobi)
updates, ``f+(u) = exp_{f(u)}(-tau * Delta f(u))``. :func:`diffuse` iterates
until the largest Laplacian norm drops below ``residual_tol``.
"""
from dataclasses import dataclass, field

import numpy as np

from .calculus import LaplaceParams, VertexFunction, dirichlet_energy, edge_means, laplacian_field
from .errors import DomainError
from .hypergraph import _seed_to_uint
from .manifold import Sphere

#: vertex spread below which a converged state counts as constant
CONSTANT_SPREAD = 1e-3
#: largest distance to a common geodesic below which a state counts as lying on it
GEODESIC_DEVIATION = 1e-3


@dataclass(frozen=True)
class DiffusionConfig:
    params: LaplaceParams = field(default_factory=LaplaceParams)
    step_size: float = 0.1
    max_steps: int = 100_000
    residual_tol: float = 1e-8
    record_every: int = 100

    def __post_init__(self):
        if not (np.isfinite(self.step_size) and self.step_size >= 0):
            raise DomainError(f"step_size must be nonnegative, got {self.step_size}")
        if not self.residual_tol > 0:
            raise DomainError(f"residual_tol must be positive, got {self.residual_tol}")
        if int(self.max_steps) < 0 or int(self.record_every) < 1:
            raise DomainError("max_steps must be >= 0 and record_every >= 1")
        object.__setattr__(self, "step_size", float(self.step_size))
        object.__setattr__(self, "residual_tol", float(self.residual_tol))
        object.__setattr__(self, "max_steps", int(self.max_steps))
        object.__setattr__(self, "record_every", int(self.record_every))


@dataclass
class DiffusionTrace:
    """Recorded states of a diffusion run.

    ``steps``, ``snapshots``, ``residuals``, ``energies`` and ``spreads`` are
    aligned: entry ``i`` describes the state after ``steps[i]`` updates. The
    residual is the largest Laplacian norm over the vertices.
    """

    steps: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    energies: list = field(default_factory=list)
    spreads: list = field(default_factory=list)
    converged: bool = False
    steps_taken: int = 0

    @property
    def final(self):
        return self.snapshots[-1]

    def classification(self, threshold=CONSTANT_SPREAD):
        if not self.converged:
            return "unconverged"
        return "constant" if self.spreads[-1] < threshold else "non-constant"

    def shape(self, threshold=CONSTANT_SPREAD, line_threshold=GEODESIC_DEVIATION):
        """Finer label for the final state: ``constant``, ``geodesic`` or ``scattered``."""
        if not self.converged:
            return "unconverged"
        return equilibrium_shape(self.final, threshold, line_threshold)


def residual_norms(f, lap):
    return f.manifold.norm(f.values, lap)


def diffusion_step(f, cfg, lap=None):
    """One explicit Euler step; returns a new vertex function, ``f`` is untouched."""
    if lap is None:
        lap = laplacian_field(f, cfg.params)
    new = f.manifold.exp(f.values, -cfg.step_size * lap)
    return f.with_values(new)


def vertex_spread(f):
    """Largest pairwise distance between vertex values."""
    X = f.values
    if len(X) < 2:
        return 0.0
    i, j = np.triu_indices(len(X), k=1)
    return float(np.max(f.manifold.dist(X[i], X[j])))


def _farthest_pair(f):
    X = f.values
    i, j = np.triu_indices(len(X), k=1)
    d = f.manifold.dist(X[i], X[j])
    k = int(np.argmax(d))
    return X[i[k]], X[j[k]], float(d[k])


def geodesic_deviation(f):
    """Largest distance from a vertex value to the geodesic through the two farthest-apart values.

    Zero for fewer than two vertices or a constant function.
    """
    if len(f.values) < 2:
        return 0.0
    a, b, d = _farthest_pair(f)
    if d == 0:
        return 0.0
    return float(np.max(f.manifold.dist_to_geodesic(a, b, f.values)))


def equilibrium_shape(f, threshold=CONSTANT_SPREAD, line_threshold=GEODESIC_DEVIATION):
    if vertex_spread(f) < threshold:
        return "constant"
    return "geodesic" if geodesic_deviation(f) < line_threshold else "scattered"


def diffuse(f0, cfg=DiffusionConfig(), callback=None):
    """Integrate until the residual falls below ``cfg.residual_tol`` or ``cfg.max_steps`` updates.

    Running out of steps is not an error; check ``trace.converged``.
    """
    framework = cfg.params.variant.framework
    trace = DiffusionTrace()

    def record(step, f, res):
        trace.steps.append(step)
        trace.snapshots.append(f)
        trace.residuals.append(res)
        trace.energies.append(dirichlet_energy(f, framework))
        trace.spreads.append(vertex_spread(f))

    frechet = framework == "frechet"
    f, step, means = f0, 0, None
    while True:
        if frechet:
            # warm start the edge means from the previous state
            means = edge_means(f, init=means)
        lap = laplacian_field(f, cfg.params, means=means)
        res = float(np.max(residual_norms(f, lap), initial=0.0))
        done = res < cfg.residual_tol or step >= cfg.max_steps
        if done or step % cfg.record_every == 0:
            record(step, f, res)
        if callback is not None:
            callback(step, f, res)
        if done:
            trace.converged = res < cfg.residual_tol
            break
        f = diffusion_step(f, cfg, lap)
        step += 1
    trace.steps_taken = step
    return trace


def octant_points(n, seed):
    """``n`` points on the positive octant of S^2 from uniform angles.

    The polar angle is drawn from ``[0, pi/2)`` and the azimuth from
    ``[0, pi/2]``, then mapped by ``(sin t cos p, sin t sin p, cos t)``.
    """
    rng = np.random.default_rng(_seed_to_uint(seed))
    theta = rng.uniform(0.0, np.pi / 2, size=n)
    phi = rng.uniform(0.0, np.pi / 2, size=n)
    return spherical_to_cartesian(theta, phi)


def spherical_to_cartesian(theta, phi):
    theta, phi = np.asarray(theta, dtype=float), np.asarray(phi, dtype=float)
    return np.stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=-1)


def embed_random_octant(g, seed):
    """Random S^2-valued vertex function on ``g`` with values in the positive octant."""
    X = octant_points(g.num_vertices, seed)
    return VertexFunction(g, Sphere(2), X / np.linalg.norm(X, axis=-1, keepdims=True))
