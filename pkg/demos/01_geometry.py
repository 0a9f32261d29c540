"""A short tour of the geometry kernel on the sphere and the hyperboloid.

Run with ``python3 demos/01_geometry.py``.
"""
import numpy as np

from mvhyper import Hyperbolic, Sphere

S = Sphere(2)
north = np.array([0.0, 0.0, 1.0])
east = np.array([1.0, 0.0, 0.0])

# Points are plain coordinate arrays. On S^2 they are unit vectors in R^3.
print("distance north -> east:", S.dist(north, east))

# log gives the initial velocity of the geodesic; exp walks along it.
v = S.log(north, east)
print("log_north(east):", v)
print("exp_north(v) recovers east:", np.allclose(S.exp(north, v), east))

# Transport moves a tangent vector along the connecting geodesic and keeps its length.
w = np.array([0.0, 0.3, 0.0])
moved = S.transp(north, east, w)
print("|w| before and after transport:", S.norm(north, w), S.norm(east, moved))

# Everything is batched over leading axes: 5 random pairs at once.
rng = np.random.default_rng(0)
x = S.random_point(rng, size=5)
y = S.exp(x, S.random_tangent(rng, x, scale=0.5))
print("batched distances:", np.round(S.dist(x, y), 4))

# Weighted Fréchet means are computed by Riemannian gradient descent.
cluster = S.exp(np.broadcast_to(north, (6, 3)), S.random_tangent(rng, np.broadcast_to(north, (6, 3)), 0.3))
m = S.frechet_mean(cluster)
print("Fréchet mean of a cluster around the north pole:", np.round(m, 4))
print("  mean gradient norm:", S.norm(m, S.log(np.broadcast_to(m, cluster.shape), cluster).mean(axis=0)))

# The hyperboloid model works the same way, with the Minkowski form underneath.
H = Hyperbolic(2)
o = H.origin()
p = H.exp(o, np.array([0.0, 1.0, 0.5]))
print("hyperbolic distance from origin:", H.dist(o, p), "= |v| =", np.hypot(1.0, 0.5))
print("geodesic midpoint:", np.round(H.geodesic(o, p, 0.5), 4))
