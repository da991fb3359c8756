"""Analytic workpiece surfaces and desired contact paths on them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_AXES = {"x": 0, "y": 1}


class DegenerateQuery(ValueError):
    pass


class PathOffSurface(ValueError):
    pass


@dataclass(frozen=True)
class ContactQuery:
    signed_distance: float  # negative inside the workpiece
    true_normal: np.ndarray  # outward, unit
    closest_point: np.ndarray


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(3)
    return v / np.linalg.norm(v)


@dataclass(frozen=True)
class Plane:
    point: np.ndarray = (0.0, 0.0, 0.0)
    normal: np.ndarray = (0.0, 0.0, 1.0)
    kind = "plane"

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float).reshape(3)
        if not np.linalg.norm(n) > 0:
            raise ValueError("plane normal must be non-zero")
        object.__setattr__(self, "point", np.asarray(self.point, dtype=float).reshape(3))
        object.__setattr__(self, "normal", _unit(n))

    def query(self, p) -> ContactQuery:
        p = np.asarray(p, dtype=float)
        d = float(self.normal @ (p - self.point))
        return ContactQuery(d, self.normal, p - d * self.normal)

    def project(self, P) -> np.ndarray:
        P = np.asarray(P, dtype=float)
        return P - np.multiply.outer((P - self.point) @ self.normal, self.normal)

    def normals_at(self, P) -> np.ndarray:
        return np.broadcast_to(self.normal, np.shape(P)).copy()

    def nearest(self, p):
        q = self.query(p)
        return q.closest_point, q.true_normal


@dataclass(frozen=True)
class SineExtrusion:
    """Height field ``z = base_height + amplitude * sin(k * u)``.

    ``u`` is the world coordinate across the extrusion; the surface is constant
    along ``extrusion_axis``. Signed distance is the vertical residual.
    """

    amplitude: float = 0.02
    wavenumber: float = 2 * np.pi / 0.1
    base_height: float = 0.0
    extrusion_axis: str = "y"
    kind = "sine_extrusion"

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError("amplitude must be non-negative")
        if self.extrusion_axis not in _AXES:
            raise ValueError("extrusion_axis must be 'x' or 'y'")

    @property
    def _u(self) -> int:
        return 1 - _AXES[self.extrusion_axis]

    def height(self, u):
        return self.base_height + self.amplitude * np.sin(self.wavenumber * u)

    def slope(self, u):
        return self.amplitude * self.wavenumber * np.cos(self.wavenumber * u)

    def query(self, p) -> ContactQuery:
        p = np.asarray(p, dtype=float)
        u = p[self._u]
        grad = np.array([0.0, 0.0, 1.0])
        grad[self._u] = -self.slope(u)
        closest = p.copy()
        closest[2] = self.height(u)
        return ContactQuery(float(p[2] - closest[2]), grad / np.linalg.norm(grad), closest)

    def project(self, P) -> np.ndarray:
        P = np.array(P, dtype=float)
        P[..., 2] = self.height(P[..., self._u])
        return P

    def normals_at(self, P) -> np.ndarray:
        P = np.asarray(P, dtype=float)
        G = np.zeros(P.shape)
        G[..., self._u] = -self.slope(P[..., self._u])
        G[..., 2] = 1.0
        return G / np.linalg.norm(G, axis=-1, keepdims=True)

    def min_curvature_radius(self) -> float:
        c = self.amplitude * self.wavenumber**2
        return np.inf if c == 0 else 1.0 / c

    def nearest(self, p, tol: float = 1e-13, max_iter: int = 50):
        """Euclidean closest point (Newton on the across-extrusion coordinate).

        Unique while ``p`` is closer to the surface than its minimum radius of
        curvature.
        """
        p = np.asarray(p, dtype=float)
        pu, pz = p[self._u], p[2]
        A, k = self.amplitude, self.wavenumber
        u = pu
        for _ in range(max_iter):
            h = self.height(u)
            dh = self.slope(u)
            d2h = -A * k * k * np.sin(k * u)
            grad = (u - pu) + (h - pz) * dh
            hess = 1.0 + dh * dh + (h - pz) * d2h
            step = grad / hess if hess > 0 else grad
            u -= step
            if abs(step) < tol:
                break
        point = p.copy()
        point[self._u] = u
        point[2] = self.height(u)
        return point, self.normals_at(point)


@dataclass(frozen=True)
class Dome:
    center: np.ndarray = (0.0, 0.0, 0.0)
    radius: float = 0.1
    kind = "dome"

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("dome radius must be positive")
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float).reshape(3))

    def query(self, p) -> ContactQuery:
        r = np.asarray(p, dtype=float) - self.center
        dist = np.linalg.norm(r)
        if dist == 0:
            raise DegenerateQuery("query point coincides with the dome center")
        n = r / dist
        return ContactQuery(float(dist - self.radius), n, self.center + self.radius * n)

    def project(self, P) -> np.ndarray:
        return self.center + self.radius * self.normals_at(P)

    def normals_at(self, P) -> np.ndarray:
        R = np.asarray(P, dtype=float) - self.center
        dist = np.linalg.norm(R, axis=-1, keepdims=True)
        if np.any(dist == 0):
            raise DegenerateQuery("point coincides with the dome center")
        return R / dist

    def nearest(self, p):
        q = self.query(p)
        return q.closest_point, q.true_normal


SURFACE_KINDS = {"plane": Plane, "sine_extrusion": SineExtrusion, "dome": Dome}


def query(surface, p) -> ContactQuery:
    return surface.query(p)


@dataclass(frozen=True)
class PathSpec:
    start: np.ndarray
    end: np.ndarray
    duration: float
    rate: float = 1000.0

    def __post_init__(self):
        if self.duration <= 0 or self.rate <= 0:
            raise ValueError("path duration and rate must be positive")


@dataclass(frozen=True)
class DesiredPath:
    t: np.ndarray  # (n,)
    points: np.ndarray  # (n, 3) on the surface
    normals: np.ndarray  # (n, 3) true outward normals
    velocities: np.ndarray  # (n, 3) finite-difference path velocity

    def __len__(self):
        return len(self.t)

    def index(self, t: float) -> int:
        """Sample index at path time t, held at the ends."""
        if len(self.t) == 1:
            return 0
        rate = (len(self.t) - 1) / self.t[-1]
        return int(min(max(round(t * rate), 0), len(self.t) - 1))

    def sample(self, t: float):
        i = self.index(t)
        v = self.velocities[i] if 0 <= t <= self.t[-1] else np.zeros(3)
        return self.points[i], self.normals[i], v


def _project_checked(surface, p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if not np.all(np.isfinite(p)):
        raise PathOffSurface("non-finite path point")
    try:
        return surface.project(p)
    except DegenerateQuery as exc:
        raise PathOffSurface(str(exc)) from exc


def desired_path(surface, spec: PathSpec, oversample: int = 20) -> DesiredPath:
    """Constant-speed path from ``start`` to ``end`` along the surface.

    The straight segment between the projected endpoints is densely sampled and
    projected onto the surface (for a dome this traces the great arc), then
    resampled uniformly in arc length and re-projected.
    """
    a = _project_checked(surface, spec.start)
    b = _project_checked(surface, spec.end)
    n = int(round(spec.duration * spec.rate)) + 1
    s_dense = np.linspace(0.0, 1.0, (n - 1) * oversample + 1)
    dense = _project_checked(surface, a + np.multiply.outer(s_dense, b - a))
    arclen = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(dense, axis=0), axis=1))])
    target = np.linspace(0.0, arclen[-1], n)
    pts = np.column_stack([np.interp(target, arclen, dense[:, k]) for k in range(3)])
    pts = surface.project(pts)
    normals = surface.normals_at(pts)
    t = np.arange(n) / spec.rate
    vel = np.gradient(pts, t, axis=0) if n > 1 else np.zeros((1, 3))
    return DesiredPath(t=t, points=pts, normals=normals, velocities=vel)
