"""Fixed-rate closed-loop simulation: kinematics, controller, contact, estimator.

Each cycle senses the contact at the current configuration, updates the normal
estimate, computes the joint-rate command and Euler-integrates it. The robot
first approaches the initial path point with plain resolved-rate control; the
hybrid law takes over on the first cycle whose force reaches ``f_min``.
"""

from __future__ import annotations

import io
import logging
import math
from dataclasses import dataclass, fields, replace

import numpy as np

from . import controller as ctl
from . import estimator as est
from .contact import ball_contact_point, sense
from .kinematics import axis_rotation, damped_pinv, pose_and_jacobians, solve_ik
from .scenario import Scenario
from .surfaces import desired_path

log = logging.getLogger(__name__)

APPROACH_TIMEOUT = 5.0  # s
TRANSIENT = 0.5  # s after contact excluded from averaged metrics
MAX_REACH = 10.0  # m
QDOT_FLAG = 10.0  # rad/s
Q_FLAG = 2 * math.pi  # rad, no joint limits are enforced; wrap-arounds are only reported


class SimulationDiverged(RuntimeError):
    def __init__(self, message, records=()):
        super().__init__(message)
        self.records = list(records)


class NoContactReached(RuntimeError):
    def __init__(self, message, records=()):
        super().__init__(message)
        self.records = list(records)


@dataclass(frozen=True)
class StepRecord:
    t: float
    q: np.ndarray
    x_ee: np.ndarray
    x_des: np.ndarray
    f_s: np.ndarray
    f_n_hat: np.ndarray
    n_surf_hat: np.ndarray
    n_true: np.ndarray
    mu_bar: float
    mu_k: float
    gamma: float
    e_norm: float
    phase: int  # 0 approach, 1 hybrid


@dataclass(frozen=True)
class RunSummary:
    rms_path_error: float = 0.0
    max_path_error: float = 0.0
    normal_angle_error_mean: float = 0.0
    normal_angle_error_max: float = 0.0
    force_error_rms: float = 0.0
    mu_final: float = 0.0
    steps: int = 0


def _angle(a, b) -> float:
    c = float(np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b)))
    return math.acos(min(1.0, max(-1.0, c)))


def initial_configuration(scenario: Scenario, path) -> np.ndarray:
    """Probe center ``clearance`` above the first path point, axis tilted ``tilt_deg`` about ``tilt_axis``."""
    if scenario.q0 is not None:
        return np.array(scenario.q0, dtype=float)
    frame = ctl.frame_from_normal(path.normals[0])
    _, d_h_world = ctl.control_vectors(scenario.controller, frame)
    contact = path.points[0] + scenario.clearance * frame.N
    tangent = frame.T[:, 0 if scenario.tilt_axis == "T1" else 1]
    axis = axis_rotation(tangent, math.radians(scenario.tilt_deg)) @ (-frame.N)
    return solve_ik(scenario.robot, contact - d_h_world, axis, scenario.q_seed)


def run(scenario: Scenario):
    """Simulate the scenario; returns ``(records, summary)``."""
    n_steps = int(round(scenario.duration * scenario.rate))
    if n_steps <= 0:
        return [], RunSummary()
    dt = 1.0 / scenario.rate
    model, surface, cfg = scenario.robot, scenario.surface, scenario.controller
    ecfg, enabled = scenario.estimator, scenario.estimator_enabled
    path = desired_path(surface, replace(scenario.path, rate=scenario.rate))
    rng = np.random.default_rng(scenario.noise_seed)

    frame = ctl.frame_from_normal(path.normals[0])
    q = initial_configuration(scenario, path)
    qdot = np.zeros(7)
    state = est.EstimatorState.initial(ecfg)
    mu_bar = mu_k = ecfg.mu_initial
    n_log = frame.N
    t_contact = None
    flagged = wrapped = False
    K_ee = np.diag(cfg.K_ee)
    radius = scenario.probe_radius
    records = []

    for k in range(n_steps):
        t = k * dt
        pose, jac = pose_and_jacobians(model, q)
        _, d_h_world = ctl.control_vectors(cfg, frame)
        p_c = ball_contact_point(surface, pose.position, radius)
        f_s = sense(surface, scenario.contact, p_c, jac.J_pos @ qdot, rng)
        if t_contact is None and np.linalg.norm(f_s) >= ecfg.f_min:
            t_contact = t

        if t_contact is None:
            if t >= APPROACH_TIMEOUT:
                raise NoContactReached(f"no contact within {APPROACH_TIMEOUT} s", records)
            x_des = path.points[0]
            e = ctl.tracking_error(x_des - cfg.approach_depth * frame.N, pose.position, d_h_world)
            J_pinv = damped_pinv(jac.J_pos, cfg.damping)
            rho = ctl.orientation_rho(model, q, frame.N, cfg.alpha, None, (pose, jac))
            qdot = J_pinv @ (K_ee @ e) + ctl.nullspace_step(jac.J_pos, J_pinv, rho, cfg.rho_limit)
            f_n_hat = f_s
        else:
            x_des, _, v_des = path.sample(t - t_contact)
            if enabled:
                # the planned path velocity: tangent to the surface and independent of the estimate
                out, state = est.step(ecfg, state, f_s, v_des)
                n_hat = out.n_surf_hat if out.n_surf_hat @ frame.N >= 0 else -out.n_surf_hat
                frame = ctl.frame_from_normal(ctl.filter_normal(frame.N, n_hat, dt, cfg.normal_tau))
                f_n_hat, n_log, mu_bar, mu_k = out.f_n_hat, n_hat, out.mu_bar, out.mu_k
            else:
                f_n_hat = f_s
                norm = np.linalg.norm(f_s)
                if norm >= ecfg.f_min:
                    n_log = f_s / norm
            pair = ctl.projections(frame)
            f_des_world, d_h_world = ctl.control_vectors(cfg, frame)
            # the admittance loop regulates the force applied to the surface
            v_adm = ctl.admittance_velocity(cfg, ctl.force_error(f_des_world, -f_s))
            e = ctl.tracking_error(x_des, pose.position, d_h_world)
            xi_h = ctl.precision_term(cfg, pair, e, e)
            rho = ctl.orientation_rho(model, q, frame.N, cfg.alpha, None, (pose, jac))
            qdot = ctl.command(model, q, cfg, pair, v_des, v_adm, xi_h, rho, jac)

        records.append(StepRecord(
            t=t, q=q, x_ee=pose.position, x_des=np.array(x_des, dtype=float), f_s=f_s, f_n_hat=f_n_hat,
            n_surf_hat=n_log if t_contact is not None else frame.N,
            n_true=surface.nearest(pose.position)[1],
            mu_bar=mu_bar, mu_k=mu_k,
            gamma=math.acos(min(1.0, max(-1.0, ctl.alignment(frame.N, pose.approach)))),
            e_norm=float(np.linalg.norm(x_des - p_c)),  # true contact point, not the estimate
            phase=int(t_contact is not None),
        ))

        if not np.all(np.isfinite(qdot)) or np.linalg.norm(pose.position) > MAX_REACH:
            raise SimulationDiverged(f"simulation diverged at t={t:.3f} s", records)
        if not flagged and np.linalg.norm(qdot) > QDOT_FLAG:
            log.warning("joint-rate command above %.0f rad/s at t=%.3f s", QDOT_FLAG, t)
            flagged = True
        if not wrapped and np.abs(q).max() > Q_FLAG:
            log.warning("joint angle beyond 2 pi at t=%.3f s", t)
            wrapped = True
        q = q + qdot * dt

    return records, summarize(records, np.linalg.norm(cfg.f_des), scenario.path.duration)


def summarize(records, f_des_norm: float = 2.0, path_duration: float = np.inf) -> RunSummary:
    """Metrics over hybrid-phase records.

    Path error is the distance from the probe's true contact point to the
    desired contact point. Averaged metrics use the window from 0.5 s after
    contact to the end of the path motion; maxima cover the whole hybrid phase.
    """
    hybrid = [r for r in records if r.phase == 1]
    if not hybrid:
        return RunSummary(steps=len(records))
    t0 = hybrid[0].t
    # tolerance keeps the window boundaries stable under float time stamps
    steady = [r for r in hybrid if TRANSIENT - 1e-9 <= r.t - t0 <= path_duration + 1e-9] or hybrid
    err_all = np.array([r.e_norm for r in hybrid])
    err = np.array([r.e_norm for r in steady])
    ang_all = np.array([_angle(r.n_surf_hat, r.n_true) for r in hybrid])
    ang = np.array([_angle(r.n_surf_hat, r.n_true) for r in steady])
    f_err = np.array([r.f_s @ r.n_true - f_des_norm for r in steady])
    return RunSummary(
        rms_path_error=float(np.sqrt(np.mean(err**2))),
        max_path_error=float(err_all.max()),
        normal_angle_error_mean=float(ang.mean()),
        normal_angle_error_max=float(ang_all.max()),
        force_error_rms=float(np.sqrt(np.mean(f_err**2))),
        mu_final=float(hybrid[-1].mu_bar),
        steps=len(records),
    )


@dataclass(frozen=True)
class Comparison:
    on: tuple
    off: tuple

    @property
    def delta(self) -> dict:
        """on - off for every summary metric, plus the relative path-error gain."""
        s_on, s_off = self.on[1], self.off[1]
        d = {f.name: getattr(s_on, f.name) - getattr(s_off, f.name) for f in fields(RunSummary)}
        if s_off.rms_path_error > 0:
            d["rms_path_error_improvement"] = 1.0 - s_on.rms_path_error / s_off.rms_path_error
        return d


def compare(scenario: Scenario) -> Comparison:
    """Same scenario and seed with the estimator enabled and disabled."""
    on = run(replace(scenario, estimator_enabled=True))
    off = run(replace(scenario, estimator_enabled=False))
    return Comparison(on=on, off=off)


# --- output -----------------------------------------------------------------

_VECTORS = {"q": 7, "x_ee": 3, "x_des": 3, "f_s": 3, "f_n_hat": 3, "n_surf_hat": 3, "n_true": 3}
_SUFFIX = "xyz"


def csv_header() -> list[str]:
    cols = []
    for f in fields(StepRecord):
        n = _VECTORS.get(f.name)
        if n is None:
            cols.append(f.name)
        elif n == 3:
            cols.extend(f"{f.name}_{s}" for s in _SUFFIX)
        else:
            cols.extend(f"{f.name}{i + 1}" for i in range(n))
    return cols


def format_value(x) -> str:
    """Fixed 9-significant-digit rendering used by every text output."""
    return format(float(x), ".9g")


_fmt = format_value


def write_csv(records, stream) -> None:
    stream.write(",".join(csv_header()) + "\n")
    for r in records:
        row = []
        for f in fields(StepRecord):
            v = getattr(r, f.name)
            if f.name == "phase":
                row.append(str(v))
            elif f.name in _VECTORS:
                row.extend(_fmt(x) for x in v)
            else:
                row.append(_fmt(v))
        stream.write(",".join(row) + "\n")


def csv_text(records) -> str:
    buf = io.StringIO()
    write_csv(records, buf)
    return buf.getvalue()


def read_csv(stream) -> list[StepRecord]:
    """Inverse of ``write_csv`` (values rounded to 9 significant digits)."""
    lines = stream.read().splitlines() if hasattr(stream, "read") else list(stream)
    header = lines[0].split(",")
    out = []
    for line in lines[1:]:
        vals = dict(zip(header, line.split(",")))
        kw = {}
        for f in fields(StepRecord):
            n = _VECTORS.get(f.name)
            if n is None:
                kw[f.name] = int(vals[f.name]) if f.name == "phase" else float(vals[f.name])
            elif n == 3:
                kw[f.name] = np.array([float(vals[f"{f.name}_{s}"]) for s in _SUFFIX])
            else:
                kw[f.name] = np.array([float(vals[f"{f.name}{i + 1}"]) for i in range(n)])
        out.append(StepRecord(**kw))
    return out


def format_summary(summary: RunSummary) -> str:
    return "".join(f"{f.name}={_fmt(getattr(summary, f.name))}\n" for f in fields(RunSummary))


def summary_record(summary: RunSummary, name: str) -> str:
    """Single-line machine-readable form."""
    parts = [f"name={name}"] + [f"{f.name}={_fmt(getattr(summary, f.name))}" for f in fields(RunSummary)]
    return " ".join(parts) + "\n"
