"""Hybrid force-motion control law with null-space probe alignment.

Force is regulated by an admittance loop along the control normal ``N`` and
motion is tracked in the tangent plane; both are mapped to joint rates through
the (damped) Jacobian pseudoinverse. The redundancy is spent on turning the
probe axis against the estimated surface normal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kinematics import damped_pinv, nullspace_projector, pose_and_jacobians, skew


class DegenerateFrame(ValueError):
    pass


def _diag(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v if v.ndim == 2 else np.diag(v)


@dataclass(frozen=True)
class ControllerConfig:
    K_m: tuple = (10.0, 10.0, 10.0)
    K_f: tuple = (10.0, 10.0, 10.0)
    K_adm: tuple = (0.1, 0.1, 0.1)
    K_ee: tuple = (10.0, 10.0, 10.0)  # approach-phase resolved-rate gain
    f_des: tuple = (0.0, 0.0, -2.0)  # N, force applied to the surface
    d_h: tuple = (0.0, 0.0, 0.05)  # m, probe-center standoff
    d: float = 0.05
    alpha: float = 1.0
    rho_limit: float = 0.5  # rad/s, cap on the projected orientation step
    damping: float = 1e-3
    offset_frame: str = "normal"  # or "world"
    approach_depth: float = 1e-3  # m, approach target below the surface
    normal_tau: float = 0.02  # s, low-pass on the estimated normal; 0 disables
    rate: float = 1000.0

    def __post_init__(self):
        for name in ("K_m", "K_f", "K_adm", "K_ee"):
            gains = np.asarray(getattr(self, name), dtype=float)
            if gains.shape != (3,) or np.any(gains < 0):
                raise ValueError(f"{name} must be 3 non-negative diagonal gains")
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not self.rate > 0:
            raise ValueError("rate must be positive")
        if self.offset_frame not in ("normal", "world"):
            raise ValueError("offset_frame must be 'normal' or 'world'")
        if self.damping < 0 or self.rho_limit < 0 or self.normal_tau < 0:
            raise ValueError("damping, rho_limit and normal_tau must be non-negative")


@dataclass(frozen=True)
class ControlFrame:
    N: np.ndarray  # (3,) force direction
    T: np.ndarray  # (3, 2) tangent basis

    @property
    def rotation(self) -> np.ndarray:
        """World-from-control rotation with columns (T1, T2, N)."""
        return np.column_stack([self.T, self.N])


@dataclass(frozen=True)
class ProjectionPair:
    Omega_f: np.ndarray
    Omega_m: np.ndarray


def frame_from_normal(n) -> ControlFrame:
    n = np.asarray(n, dtype=float)
    norm = np.linalg.norm(n)
    if norm == 0:
        raise DegenerateFrame("zero normal")
    n = n / norm
    a = np.zeros(3)
    a[np.argmin(np.abs(n))] = 1.0
    # Gram-Schmidt on the least-aligned world axis: n = z gives T = (x, y)
    t1 = a - (a @ n) * n
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(n, t1)
    return ControlFrame(N=n, T=np.column_stack([t1, t2]))


def filter_normal(N, n_hat, dt: float, tau: float) -> np.ndarray:
    """One first-order low-pass step on the unit sphere (``tau == 0`` passes through)."""
    n_hat = np.asarray(n_hat, dtype=float)
    if tau <= 0:
        return n_hat / np.linalg.norm(n_hat)
    a = min(1.0, dt / tau)
    out = (1.0 - a) * np.asarray(N, dtype=float) + a * n_hat
    return out / np.linalg.norm(out)


def projections(frame: ControlFrame) -> ProjectionPair:
    N = np.asarray(frame.N, dtype=float).reshape(3, 1)
    NtN = float((N.T @ N)[0, 0])
    if NtN == 0:
        raise DegenerateFrame("zero force direction")
    Omega_f = N @ N.T / NtN
    return ProjectionPair(Omega_f=Omega_f, Omega_m=np.eye(3) - Omega_f)


def control_vectors(config: ControllerConfig, frame: ControlFrame):
    """Desired force and standoff expressed in world frame.

    The returned standoff points from the probe center to the contact point:
    ``d_h`` is the height of the center above the contact, measured along the
    outward control axis.
    """
    R = frame.rotation if config.offset_frame == "normal" else np.eye(3)
    return R @ np.asarray(config.f_des, float), -(R @ np.asarray(config.d_h, float))


def tracking_error(x_des, x_ee, d_h_world) -> np.ndarray:
    """Motion-force residual (x_des - x_ee) - d_h, shared by both loops."""
    return (np.asarray(x_des, float) - np.asarray(x_ee, float)) - np.asarray(d_h_world, float)


def estimated_contact_point(x_ee, n_surf_hat, d: float) -> np.ndarray:
    return np.asarray(x_ee, float) + np.asarray(n_surf_hat, float) * d


def contact_point_error(x_cnt_des, x_ee, n_surf_hat, d: float) -> np.ndarray:
    """Contact-point residual with the scalar offset along the estimated normal."""
    n = np.asarray(n_surf_hat, float)
    return (np.asarray(x_cnt_des, float) - estimated_contact_point(x_ee, n, d)) - n * d


def force_error(f_des, f_applied) -> np.ndarray:
    return np.asarray(f_des, float) - np.asarray(f_applied, float)


def admittance_velocity(config: ControllerConfig, f_err) -> np.ndarray:
    return _diag(config.K_adm) @ np.asarray(f_err, dtype=float)


def precision_term(config: ControllerConfig, pair: ProjectionPair, e_m, e_f) -> np.ndarray:
    K_m_perp = _diag(config.K_m) @ (np.eye(3) - pair.Omega_f)
    K_f_perp = _diag(config.K_f) @ pair.Omega_f
    return K_m_perp @ np.asarray(e_m, float) + K_f_perp @ np.asarray(e_f, float)


def command_velocity(pair: ProjectionPair, v_des, v_adm) -> np.ndarray:
    """v_cmd = Omega_f v_adm + Omega_m v_des."""
    return pair.Omega_f @ np.asarray(v_adm, float) + pair.Omega_m @ np.asarray(v_des, float)


def nullspace_step(J, J_pinv, rho, limit: float | None = None) -> np.ndarray:
    """(I - J^+ J) rho, scaled down to at most ``limit`` in joint-space norm."""
    step = nullspace_projector(J, J_pinv) @ np.asarray(rho, float)
    norm = np.linalg.norm(step)
    if limit is not None and norm > limit:
        step = step * (limit / norm)
    return step


def command(model, q, config: ControllerConfig, pair: ProjectionPair, v_des, v_adm, xi_h, rho=None, jac=None):
    """Joint-rate command J^+ (v_cmd + xi_h) + (I - J^+ J) rho.

    The null-space part is rate-limited to ``config.rho_limit``.

    ``jac`` may carry a precomputed ``JacobianPair`` for ``q``.
    """
    if jac is None:
        _, jac = pose_and_jacobians(model, q)
    J = jac.J_pos
    J_pinv = damped_pinv(J, config.damping)
    qdot = J_pinv @ (command_velocity(pair, v_des, v_adm) + np.asarray(xi_h, float))
    if rho is not None:
        qdot = qdot + nullspace_step(J, J_pinv, rho, config.rho_limit)
    return qdot


def alignment(n_surf_hat, n_ee) -> float:
    """g = cos(gamma) = n_surf . (-n_ee)."""
    return float(-np.dot(n_surf_hat, n_ee))


def alignment_gradient(J_ang, n_ee, n_surf_hat) -> np.ndarray:
    """Joint-space gradient of the alignment, -J_w^T [n_ee]x n_surf."""
    return -np.asarray(J_ang).T @ (skew(n_ee) @ np.asarray(n_surf_hat, float))


def orientation_rho(model, q, n_surf_hat, alpha: float, limit: float | None = None, pose_jac=None) -> np.ndarray:
    """alpha * grad g, optionally capped in joint-space norm."""
    pose, jac = pose_jac if pose_jac is not None else pose_and_jacobians(model, q)
    rho = alpha * alignment_gradient(jac.J_ang, pose.approach, n_surf_hat)
    if limit is not None:
        norm = np.linalg.norm(rho)
        if norm > limit:
            rho = rho * (limit / norm)
    return rho
