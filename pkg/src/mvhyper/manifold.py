"""
Riemannian geometry kernel.

Points and tangent vectors are plain numpy arrays in ambient coordinates; all
maps broadcast over leading axes, so ``M.log(x, y)`` with ``x`` of shape
``(n, d)`` and ``y`` of shape ``(n, d)`` returns ``n`` tangent vectors at once.

Three model spaces are provided:

* :class:`Euclidean` -- ``R^d`` with the standard metric.
* :class:`Sphere` -- unit sphere ``S^d`` embedded in ``R^(d+1)``.
* :class:`Hyperbolic` -- upper sheet of the hyperboloid ``<x, x>_L = -1`` in
  ``R^(d+1)`` with the Minkowski form ``<x, y>_L = -x0 y0 + sum_i xi yi``.

Example
-------
>>> M = Sphere(2)
>>> M.log(np.array([0., 0., 1.]), np.array([1., 0., 0.]))
array([1.57079633, 0.        , 0.        ])
"""
import abc

import numpy as np

from .errors import ConvergenceError, DomainError, SingularityError

#: Sphere logs/transports are rejected once the dot product gets this close to -1.
ANTIPODAL_TOL = 1e-9

MEAN_TOL = 1e-10
MEAN_MAX_ITER = 200


def _dot(a, b):
    return np.sum(a * b, axis=-1)


def _norm(a):
    return np.sqrt(np.sum(a * a, axis=-1))


def _split_on_plane(form, a, b, x):
    """Split ``x`` into its component in ``span{a, b}`` and the ``form``-orthogonal rest."""
    gaa, gab, gbb = form(a, a), form(a, b), form(b, b)
    det = gaa * gbb - gab * gab
    if np.any(np.abs(det) <= 1e-300):
        raise DomainError("geodesic through coincident or antipodal points is not unique")
    xa, xb = form(x, a), form(x, b)
    ca = (gbb * xa - gab * xb) / det
    cb = (gaa * xb - gab * xa) / det
    p = ca[..., None] * a + cb[..., None] * b
    return p, x - p


class Manifold(metaclass=abc.ABCMeta):
    """Common interface of the model spaces.

    Subclasses implement the closed-form maps; the Fréchet mean solver and the
    validation helpers are shared.
    """

    name = None

    def __init__(self, dim):
        dim = int(dim)
        if dim < 1:
            raise DomainError(f"manifold dimension must be positive, got {dim}")
        self.dim = dim

    @property
    @abc.abstractmethod
    def ambient_dim(self):
        """Length of the coordinate arrays representing points."""

    def __repr__(self):
        return f"{type(self).__name__}({self.dim})"

    def __eq__(self, other):
        return type(self) is type(other) and self.dim == other.dim

    def __hash__(self):
        return hash((type(self).__name__, self.dim))

    # -- metric --------------------------------------------------------------

    @abc.abstractmethod
    def inner(self, x, u, v):
        """Riemannian inner product of tangent vectors ``u, v`` at ``x``."""

    def norm(self, x, v):
        return np.sqrt(np.maximum(self.inner(x, v, v), 0.0))

    @abc.abstractmethod
    def dist(self, a, b):
        """Geodesic distance."""

    @abc.abstractmethod
    def exp(self, x, v):
        """Exponential map at ``x`` applied to ``v``."""

    @abc.abstractmethod
    def log(self, x, y):
        """Logarithm map at ``x`` applied to ``y``."""

    @abc.abstractmethod
    def dist_to_geodesic(self, a, b, x):
        """Distance from ``x`` to the complete geodesic through distinct points ``a`` and ``b``."""

    @abc.abstractmethod
    def transp(self, x, y, v):
        """Parallel transport of ``v`` from ``T_x`` to ``T_y`` along the minimizing geodesic."""

    @abc.abstractmethod
    def project(self, x):
        """Pull an ambient array back onto the manifold."""

    @abc.abstractmethod
    def to_tangent(self, x, v):
        """Orthogonal projection of an ambient vector onto ``T_x``."""

    @abc.abstractmethod
    def point_residual(self, x):
        """Violation of the point constraint (0 on the manifold)."""

    @abc.abstractmethod
    def tangent_residual(self, x, v):
        """Violation of the tangency constraint of ``v`` at ``x``."""

    @abc.abstractmethod
    def origin(self):
        """A distinguished base point."""

    # -- helpers ---------------------------------------------------------------

    def zero_vector(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def _as_points(self, *arrays):
        out = []
        for a in arrays:
            a = np.asarray(a, dtype=float)
            if a.shape[-1:] != (self.ambient_dim,):
                raise DomainError(
                    f"{self!r} expects coordinate arrays of length {self.ambient_dim}, "
                    f"got shape {a.shape}")
            out.append(a)
        return out if len(out) > 1 else out[0]

    def check_point(self, x, tol=1e-12):
        x = self._as_points(x)
        if not np.all(np.isfinite(x)):
            raise DomainError("non-finite point coordinates")
        res = np.max(np.abs(self.point_residual(x)), initial=0.0)
        if res > tol:
            raise DomainError(f"point not on {self!r} (constraint violation {res:.3e})")
        return x

    def check_tangent(self, x, v, tol=1e-10):
        x, v = self._as_points(x, v)
        res = np.max(np.abs(self.tangent_residual(x, v)), initial=0.0)
        if res > tol:
            raise DomainError(f"vector not tangent at base point (violation {res:.3e})")
        return v

    def random_point(self, rng, scale=1.0, size=None):
        """Sample ``exp_o(v)`` with ``v`` Gaussian of std ``scale`` in the tangent space at the origin."""
        shape = (self.ambient_dim,) if size is None else (*np.atleast_1d(size), self.ambient_dim)
        o = np.broadcast_to(self.origin(), shape)
        v = self.to_tangent(o, scale * rng.standard_normal(shape))
        return self.exp(o, v)

    def random_tangent(self, rng, x, scale=1.0):
        """Gaussian tangent vector at ``x``, moved over from the origin so its law does not depend on ``x``."""
        x = np.asarray(x, dtype=float)
        o = np.broadcast_to(self.origin(), x.shape)
        return self.transp(o, x, self.to_tangent(o, scale * rng.standard_normal(x.shape)))

    def geodesic(self, x, y, t):
        return self.exp(x, t * self.log(x, y))

    # -- Fréchet mean ------------------------------------------------------------

    def _mean_init(self, points, weights):
        """Extrinsic weighted mean pulled back onto the manifold."""
        m = np.sum(weights[..., None] * points, axis=-2) / np.sum(weights, axis=-1)[..., None]
        return self.project(m)

    def frechet_mean(self, points, weights=None, tol=MEAN_TOL, max_iter=MEAN_MAX_ITER, init=None):
        """Weighted Fréchet (Karcher) mean by Riemannian gradient descent with unit step.

        :param points: array ``(k, d)`` or a batch ``(..., k, d)`` of point sets
        :param weights: nonnegative array broadcastable to ``(..., k)``; unit weights if omitted
        :param tol: stop once the weighted tangent mean ``sum w_i log_m(x_i) / sum w_i`` has norm below ``tol``
        :param max_iter: iteration cap before :class:`ConvergenceError`
        :param init: optional starting iterate(s) ``(..., d)``; defaults to the projected extrinsic mean
        :return: array ``(d,)`` or ``(..., d)``

        Entries with zero weight are ignored, which allows ragged sets to be
        batched by padding.
        """
        points = self._as_points(points)
        if points.ndim < 2 or points.shape[-2] == 0:
            raise DomainError("frechet_mean needs a nonempty point set")
        if weights is None:
            weights = np.ones(points.shape[:-1])
        weights = np.broadcast_to(np.asarray(weights, dtype=float), points.shape[:-1])
        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise DomainError("weights must be finite and nonnegative")
        wsum = np.sum(weights, axis=-1)
        if np.any(wsum <= 0):
            raise DomainError("weights must not all vanish")

        batch = points.shape[:-2]
        P = points.reshape(-1, *points.shape[-2:])
        W = weights.reshape(-1, weights.shape[-1])
        W = W / np.sum(W, axis=-1, keepdims=True)
        if init is None:
            m = self._mean_init(P, W)
        else:
            m = np.array(self._as_points(init), dtype=float).reshape(-1, self.ambient_dim)
            if m.shape[0] != P.shape[0]:
                raise DomainError("init does not match the number of point sets")

        # a set whose weight sits on one point has that point as its mean, exactly
        single = np.count_nonzero(W > 0, axis=-1) == 1
        if np.any(single):
            m[single] = P[single, np.argmax(W[single] > 0, axis=-1)]
        active = ~single

        residual = 0.0
        for _ in range(max_iter + 1):
            if not np.any(active):
                break
            idx = np.flatnonzero(active)
            mi = m[idx]
            # zero-weight slots may hold anything; point them at the iterate
            Pi = np.where(W[idx, :, None] > 0, P[idx], mi[:, None, :])
            # plain reductions: zero-weight padding then contributes exact zeros
            g = np.sum(W[idx, :, None] * self.log(mi[:, None, :], Pi), axis=1)
            gn = self.norm(mi, g)
            residual = float(np.max(gn))
            done = gn < tol
            active[idx[done]] = False
            upd = idx[~done]
            if upd.size:
                m[upd] = self.exp(m[upd], g[~done])
        else:
            raise ConvergenceError(
                f"Fréchet mean did not converge in {max_iter} iterations "
                f"(residual {residual:.3e})", residual=residual)
        return m.reshape(*batch, self.ambient_dim)


class Euclidean(Manifold):
    """Flat space ``R^d``; exp/log are addition/subtraction, transport is the identity."""

    name = "euclidean"

    @property
    def ambient_dim(self):
        return self.dim

    def inner(self, x, u, v):
        return _dot(u, v)

    def dist(self, a, b):
        a, b = self._as_points(a, b)
        return _norm(b - a)

    def exp(self, x, v):
        x, v = self._as_points(x, v)
        return x + v

    def log(self, x, y):
        x, y = self._as_points(x, y)
        return y - x

    def transp(self, x, y, v):
        x, y, v = self._as_points(x, y, v)
        return np.broadcast_to(v, np.broadcast_shapes(x.shape, y.shape, v.shape)).copy()

    def project(self, x):
        return np.asarray(x, dtype=float)

    def to_tangent(self, x, v):
        return np.asarray(v, dtype=float)

    def point_residual(self, x):
        return np.zeros(np.shape(x)[:-1])

    def tangent_residual(self, x, v):
        return np.zeros(np.broadcast_shapes(np.shape(x), np.shape(v))[:-1])

    def origin(self):
        return np.zeros(self.dim)

    def dist_to_geodesic(self, a, b, x):
        a, b, x = self._as_points(a, b, x)
        u, r = b - a, x - a
        if np.any(_dot(u, u) == 0):
            raise DomainError("geodesic through coincident points is not unique")
        t = _dot(r, u) / _dot(u, u)
        return _norm(r - t[..., None] * u)

    def _mean_init(self, points, weights):
        return np.sum(weights[..., None] * points, axis=-2)


class Sphere(Manifold):
    """Unit sphere ``S^d`` in ``R^(d+1)`` with the round metric."""

    name = "sphere"

    @property
    def ambient_dim(self):
        return self.dim + 1

    def inner(self, x, u, v):
        return _dot(u, v)

    def _angle(self, x, y):
        # arctan2 keeps full relative accuracy for nearby points, unlike arccos
        c = _dot(x, y)
        s = _norm(y - c[..., None] * x)
        return np.arctan2(s, np.clip(c, -1.0, 1.0)), c

    def dist(self, a, b):
        a, b = self._as_points(a, b)
        return self._angle(a, b)[0]

    def _check_antipodal(self, c, what):
        if np.any(c <= -1.0 + ANTIPODAL_TOL):
            raise SingularityError(f"sphere {what} between (nearly) antipodal points")

    def exp(self, x, v):
        x, v = self._as_points(x, v)
        n = _norm(v)[..., None]
        with np.errstate(invalid="ignore", divide="ignore"):
            y = np.cos(n) * x + np.where(n > 0, np.sin(n) / n, 1.0) * v
        y = y / _norm(y)[..., None]
        return np.where(n > 0, y, x)

    def log(self, x, y):
        x, y = self._as_points(x, y)
        theta, c = self._angle(x, y)
        self._check_antipodal(c, "log")
        u = y - c[..., None] * x
        s = _norm(u)
        with np.errstate(invalid="ignore", divide="ignore"):
            scale = np.where((s > 0) & ~np.all(x == y, axis=-1), theta / s, 0.0)
        return scale[..., None] * u

    def transp(self, x, y, v):
        x, y, v = self._as_points(x, y, v)
        c = _dot(x, y)
        self._check_antipodal(c, "transport")
        out = v - (_dot(y, v) / (1.0 + c))[..., None] * (x + y)
        same = np.all(x == y, axis=-1, keepdims=True)
        return np.where(same, v, out)

    def project(self, x):
        x = np.asarray(x, dtype=float)
        n = np.linalg.norm(x, axis=-1, keepdims=True)
        if np.any(n == 0):
            raise SingularityError("cannot project the zero vector onto the sphere")
        return x / n

    def to_tangent(self, x, v):
        x, v = np.asarray(x, dtype=float), np.asarray(v, dtype=float)
        return v - _dot(x, v)[..., None] * x

    def point_residual(self, x):
        return _norm(x) - 1.0

    def tangent_residual(self, x, v):
        return _dot(x, v)

    def origin(self):
        o = np.zeros(self.ambient_dim)
        o[-1] = 1.0
        return o

    def dist_to_geodesic(self, a, b, x):
        a, b, x = self._as_points(a, b, x)
        p, perp = _split_on_plane(_dot, a, b, x)
        return np.arctan2(_norm(perp), _norm(p))


def minkowski(a, b):
    """Minkowski form ``-a0 b0 + sum_i ai bi`` over the last axis."""
    return _dot(a[..., 1:], b[..., 1:]) - a[..., 0] * b[..., 0]


class Hyperbolic(Manifold):
    """Hyperbolic space ``H^d`` as the upper hyperboloid sheet in ``R^(d+1)``."""

    name = "hyperbolic"

    @property
    def ambient_dim(self):
        return self.dim + 1

    def inner(self, x, u, v):
        return minkowski(u, v)

    def dist(self, a, b):
        a, b = self._as_points(a, b)
        # chordal form 2 asinh(|a - b|_L / 2) is accurate at short range
        diff = b - a
        q = np.maximum(minkowski(diff, diff), 0.0)
        return 2.0 * np.arcsinh(np.sqrt(q) / 2.0)

    def exp(self, x, v):
        x, v = self._as_points(x, v)
        n = np.sqrt(np.maximum(minkowski(v, v), 0.0))[..., None]
        with np.errstate(invalid="ignore", divide="ignore"):
            y = np.cosh(n) * x + np.where(n > 0, np.sinh(n) / n, 1.0) * v
        return np.where(n > 0, self.project(y), x)

    def log(self, x, y):
        x, y = self._as_points(x, y)
        d = self.dist(x, y)
        u = y + minkowski(x, y)[..., None] * x
        s = np.sqrt(np.maximum(minkowski(u, u), 0.0))
        with np.errstate(invalid="ignore", divide="ignore"):
            scale = np.where((s > 0) & ~np.all(x == y, axis=-1), d / s, 0.0)
        return scale[..., None] * u

    def transp(self, x, y, v):
        x, y, v = self._as_points(x, y, v)
        out = v + (minkowski(y, v) / (1.0 - minkowski(x, y)))[..., None] * (x + y)
        same = np.all(x == y, axis=-1, keepdims=True)
        return np.where(same, v, out)

    def project(self, x):
        x = np.array(x, dtype=float)
        x[..., 0] = np.sqrt(1.0 + np.sum(x[..., 1:] ** 2, axis=-1))
        return x

    def to_tangent(self, x, v):
        x, v = np.asarray(x, dtype=float), np.asarray(v, dtype=float)
        return v + minkowski(x, v)[..., None] * x

    def point_residual(self, x):
        x = np.asarray(x, dtype=float)
        return np.where(x[..., 0] > 0, minkowski(x, x) + 1.0, np.inf)

    def tangent_residual(self, x, v):
        return minkowski(x, v)

    def origin(self):
        o = np.zeros(self.ambient_dim)
        o[0] = 1.0
        return o

    def dist_to_geodesic(self, a, b, x):
        a, b, x = self._as_points(a, b, x)
        # the complement of a timelike plane is spacelike: sinh(distance) = |x_perp|_L
        _, perp = _split_on_plane(minkowski, a, b, x)
        return np.arcsinh(np.sqrt(np.maximum(minkowski(perp, perp), 0.0)))

    def _mean_init(self, points, weights):
        m = np.sum(weights[..., None] * points, axis=-2)
        # a positive combination of upper-sheet points is timelike and future pointing
        return m / np.sqrt(-minkowski(m, m))[..., None]


KINDS = {cls.name: cls for cls in (Euclidean, Sphere, Hyperbolic)}


def manifold_from_name(kind, dim):
    """Build a manifold from its kind name (``euclidean``, ``sphere``, ``hyperbolic``)."""
    try:
        return KINDS[kind](dim)
    except KeyError:
        raise DomainError(f"unknown manifold kind {kind!r}; expected one of {sorted(KINDS)}") from None
