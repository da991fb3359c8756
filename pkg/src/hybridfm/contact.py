"""Simulated force sensor: penalty normal force plus regularized Coulomb friction.

The reading is the force the surface exerts on the probe, in world frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ContactParams:
    stiffness: float = 5000.0  # N/m
    mu: float = 0.3
    v_reg: float = 1e-4  # m/s
    noise_std: float = 0.0  # N per axis
    probe_radius: float | None = None  # m, ball tip; None means the standoff length

    def __post_init__(self):
        if not self.stiffness > 0:
            raise ValueError("contact stiffness must be positive")
        if not self.mu >= 0:
            raise ValueError("mu_true must be >= 0")
        if not self.v_reg > 0:
            raise ValueError("v_reg must be positive")
        if not self.noise_std >= 0:
            raise ValueError("noise_std must be >= 0")
        if self.probe_radius is not None and not self.probe_radius >= 0:
            raise ValueError("probe_radius must be >= 0")


def ball_contact_point(surface, center, radius: float) -> np.ndarray:
    """Deepest point of a spherical probe tip: ``center - radius * n`` at the nearest surface point."""
    center = np.asarray(center, dtype=float)
    if radius == 0:
        return center
    _, n = surface.nearest(center)
    return center - radius * n


def contact_forces(surface, params: ContactParams, position, velocity):
    """Noiseless (normal, friction) components; both zero out of contact."""
    q = surface.query(position)
    if q.signed_distance >= 0:
        return np.zeros(3), np.zeros(3)
    n = q.true_normal
    f_n = params.stiffness * (-q.signed_distance) * n
    v = np.asarray(velocity, dtype=float)
    v_t = v - (v @ n) * n
    scale = params.mu * np.linalg.norm(f_n) / np.sqrt(v_t @ v_t + params.v_reg**2)
    return f_n, -scale * v_t


def sense(surface, params: ContactParams, probe_position, probe_velocity, rng=None) -> np.ndarray:
    """Sensed contact force on the probe.

    ``rng`` is a ``numpy.random.Generator`` owned by the caller; it is only
    drawn from while in contact and when noise is enabled.
    """
    f_n, f_tau = contact_forces(surface, params, probe_position, probe_velocity)
    f_s = f_n + f_tau
    if params.noise_std > 0 and rng is not None and np.any(f_n):
        f_s = f_s + rng.normal(0.0, params.noise_std, 3)
    return f_s
