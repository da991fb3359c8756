"""Friction-compensated surface normal estimation with online Coulomb coefficient.

The sensed force is split against the commanded velocity direction: the part
along the velocity is friction, the part orthogonal to it is (a proxy for)
the normal load. A moving average of the per-step friction ratio predicts the
friction force, which is removed from the reading before normalizing.

``step`` is a pure transition ``(config, state, f_s, v_hat) -> (output, state)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

MU_CLAMP = (0.0, 2.0)


class ZeroVelocity(ValueError):
    pass


class NoContact(RuntimeError):
    """No usable force yet and no previous normal to fall back on."""


@dataclass(frozen=True)
class EstimatorConfig:
    window: int = 50
    weights: tuple | None = None  # default: uniform ones
    v_epsilon: float = 1e-4
    mu_initial: float = 0.0
    f_min: float = 0.1

    def __post_init__(self):
        if self.window < 1:
            raise ValueError("estimator window must be >= 1")
        w = np.ones(self.window) if self.weights is None else np.asarray(self.weights, dtype=float)
        if w.shape != (self.window,):
            raise ValueError(f"weights must have length window={self.window}, got {w.size}")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        if abs(w.sum() / self.window - 1.0) > 1e-9:
            raise ValueError("weights must satisfy (1/m) * sum(w) == 1")
        if not self.v_epsilon > 0 or not self.f_min > 0:
            raise ValueError("v_epsilon and f_min must be positive")
        if self.mu_initial < 0:
            raise ValueError("mu_initial must be >= 0")
        object.__setattr__(self, "weights", tuple(float(x) for x in w))


@dataclass(frozen=True)
class EstimatorState:
    mu_history: tuple  # most recent first
    last_normal: np.ndarray | None = None
    last_mu: float = 0.0

    @classmethod
    def initial(cls, config: EstimatorConfig) -> "EstimatorState":
        return cls((config.mu_initial,) * config.window, None, config.mu_initial)


@dataclass(frozen=True)
class EstimateOutput:
    f_n_hat: np.ndarray
    n_surf_hat: np.ndarray
    mu_k: float
    f_tau: np.ndarray
    moving: bool
    mu_bar: float = field(default=0.0)


def velocity_projector(v_hat) -> np.ndarray:
    v = np.asarray(v_hat, dtype=float)
    vv = v @ v
    if vv == 0:
        raise ZeroVelocity("velocity projector undefined for a zero vector")
    return np.outer(v, v) / vv


def weighted_average(config: EstimatorConfig, state: EstimatorState) -> float:
    m = config.window
    hist = state.mu_history[:m]
    if len(hist) < m:
        hist = hist + (config.mu_initial,) * (m - len(hist))
    return float(np.dot(np.asarray(config.weights) / m, hist))


def step(config: EstimatorConfig, state: EstimatorState, f_s, v_hat):
    f_s = np.asarray(f_s, dtype=float)
    v_hat = np.asarray(v_hat, dtype=float)
    speed = np.linalg.norm(v_hat)
    moving = bool(speed > config.v_epsilon)
    mu_bar = weighted_average(config, state)
    mu_k = state.last_mu
    history = state.mu_history

    if moving:
        omega_v = velocity_projector(v_hat)
        f_perp = f_s - omega_v @ f_s
        f_v = omega_v @ f_s
        f_perp_norm = np.linalg.norm(f_perp)
        f_tau = -mu_bar * f_perp_norm * v_hat / speed
        f_n_hat = f_s - f_tau
        # too little orthogonal load makes the ratio meaningless
        if f_perp_norm >= config.f_min:
            mu_k = float(np.clip(np.linalg.norm(f_v) / f_perp_norm, *MU_CLAMP))
            history = ((mu_k,) + history)[: config.window]
    else:
        f_tau = np.zeros(3)
        f_n_hat = f_s

    norm = np.linalg.norm(f_n_hat)
    if norm >= config.f_min:
        n_hat = f_n_hat / norm
    elif state.last_normal is not None:
        n_hat = state.last_normal
    else:
        raise NoContact("force below f_min before any contact")

    out = EstimateOutput(f_n_hat, n_hat, mu_k, f_tau, moving, mu_bar)
    return out, replace(state, mu_history=history, last_normal=n_hat, last_mu=mu_k)
