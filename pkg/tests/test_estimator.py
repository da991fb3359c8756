import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hybridfm.estimator import (
    EstimatorConfig,
    EstimatorState,
    NoContact,
    ZeroVelocity,
    step,
    velocity_projector,
    weighted_average,
)

CFG = EstimatorConfig()


def unit(v):
    return v / np.linalg.norm(v)


def state_with(mu, config=CFG, last_normal=None):
    return EstimatorState((mu,) * config.window, last_normal, mu)


def test_velocity_projector_examples():
    np.testing.assert_array_equal(velocity_projector([1, 0, 0]), np.diag([1.0, 0, 0]))
    np.testing.assert_array_equal(velocity_projector([2, 0, 0]), np.diag([1.0, 0, 0]))
    expected = np.zeros((3, 3))
    expected[:2, :2] = 0.5
    np.testing.assert_allclose(velocity_projector(np.array([1, 1, 0]) / np.sqrt(2)), expected, atol=1e-15)
    with pytest.raises(ZeroVelocity):
        velocity_projector([0, 0, 0])


def test_unit_case_reproduces_normal_and_coefficient():
    out, _ = step(CFG, state_with(0.5), [-1, 0, -2], [0.01, 0, 0])
    np.testing.assert_array_equal(out.f_n_hat, [0, 0, -2])
    assert out.mu_k == 0.5
    np.testing.assert_array_equal(out.n_surf_hat, [0, 0, -1])


def test_stationary_branch_keeps_state():
    s0 = state_with(0.3, last_normal=np.array([0, 0, 1.0]))
    out, s1 = step(CFG, s0, [0.1, 0, 2], [0, 0, 0])
    np.testing.assert_array_equal(out.f_n_hat, [0.1, 0, 2])
    assert out.mu_k == 0.3 and not out.moving
    assert s1.mu_history == s0.mu_history


def test_weak_orthogonal_load_skips_update():
    s0 = state_with(0.3)
    out, s1 = step(CFG, s0, [-0.5, 0, 0.05], [0.01, 0, 0])
    assert s1.mu_history == s0.mu_history
    assert out.mu_k == 0.3


def test_hold_last_normal_below_force_threshold():
    s0 = state_with(0.0, last_normal=np.array([0, 0, 1.0]))
    out, _ = step(CFG, s0, [0, 0, 0.01], [0, 0, 0])
    np.testing.assert_array_equal(out.n_surf_hat, [0, 0, 1])
    with pytest.raises(NoContact):
        step(CFG, EstimatorState.initial(CFG), [0, 0, 0.01], [0, 0, 0])


def test_coefficient_is_clamped():
    out, _ = step(CFG, state_with(0.0), [-5, 0, 0.5], [0.01, 0, 0])
    assert out.mu_k == 2.0


def test_weighted_average_examples():
    cfg = EstimatorConfig(window=3)
    assert weighted_average(cfg, EstimatorState((0.2, 0.3, 0.4))) == pytest.approx(0.3)
    one_tap = EstimatorConfig(window=3, weights=(3, 0, 0))
    for mu in (0.1, 0.7, 0.3):
        assert weighted_average(one_tap, EstimatorState((mu, 0.9, 0.9))) == mu


@given(st.lists(st.floats(0, 5), min_size=4, max_size=4).filter(lambda w: sum(w) > 0), st.floats(0, 2))
def test_filter_has_unit_dc_gain(raw, c):
    cfg = EstimatorConfig(window=4, weights=tuple(np.array(raw) * 4 / sum(raw)))
    assert weighted_average(cfg, EstimatorState((c,) * 4)) == pytest.approx(c, rel=1e-12, abs=1e-15)


def test_config_validation():
    with pytest.raises(ValueError, match="length"):
        EstimatorConfig(window=3, weights=(1, 1))
    with pytest.raises(ValueError, match="sum"):
        EstimatorConfig(window=2, weights=(1, 2))
    with pytest.raises(ValueError):
        EstimatorConfig(window=0)


def test_history_fills_most_recent_first():
    cfg = EstimatorConfig(window=3)
    s = EstimatorState.initial(cfg)
    for mu in (0.1, 0.2, 0.4):
        _, s = step(cfg, s, [-mu * 2, 0, 2], [0.01, 0, 0])
    np.testing.assert_allclose(s.mu_history, (0.4, 0.2, 0.1))


# --- properties -------------------------------------------------------------

unit_vectors = arrays(np.float64, 3, elements=st.floats(-1, 1)).filter(lambda v: np.linalg.norm(v) > 0.1).map(unit)


def tangent(n, a):
    t = np.cross(n, a)
    return t / np.linalg.norm(t) if np.linalg.norm(t) > 1e-3 else None


@given(unit_vectors, unit_vectors, st.floats(0.0, 1.0), st.floats(0.5, 10.0), st.floats(1e-3, 1.0))
def test_exact_recovery_with_known_coefficient(n, a, mu, load, speed):
    t = tangent(n, a)
    if t is None:
        return
    f_s = load * n - mu * load * t
    out, _ = step(CFG, state_with(mu), f_s, speed * t)
    np.testing.assert_allclose(unit(out.f_n_hat), n, atol=1e-9)
    assert out.mu_k == pytest.approx(mu, abs=1e-9)


@given(arrays(np.float64, 3, elements=st.floats(-5, 5)), unit_vectors, st.floats(0, 1), st.floats(1e-3, 1e3))
def test_decomposition_and_friction_direction(f_s, v, mu_bar, scale):
    state = state_with(mu_bar, last_normal=np.array([0, 0, 1.0]))
    out, _ = step(CFG, state, f_s, v)
    omega = velocity_projector(v)
    f_v, f_perp = omega @ f_s, f_s - omega @ f_s
    np.testing.assert_allclose(f_v + f_perp, f_s, atol=1e-12)
    assert abs(f_v @ f_perp) <= 1e-12 * max(1.0, f_s @ f_s)
    if np.linalg.norm(out.f_tau) > 0:
        assert unit(out.f_tau) @ v == pytest.approx(-1.0, abs=1e-12)
    assert out.mu_k >= 0
    if np.linalg.norm(out.f_n_hat) >= CFG.f_min:
        scaled, _ = step(CFG, state, f_s, scale * v)
        np.testing.assert_allclose(scaled.n_surf_hat, out.n_surf_hat, atol=1e-12)


@given(arrays(np.float64, (5, 3), elements=st.floats(-3, 3)))
def test_step_is_pure_and_deterministic(forces):
    def replay():
        s, outs = EstimatorState.initial(CFG), []
        for f in forces:
            try:
                out, s = step(CFG, s, f + [0, 0, 3.5], [0.01, 0, 0])
            except NoContact:
                continue
            outs.append(out.n_surf_hat)
        return outs, s

    a, sa = replay()
    b, sb = replay()
    assert [x.tobytes() for x in a] == [x.tobytes() for x in b]
    assert sa.mu_history == sb.mu_history


def test_stationary_inputs_never_touch_history():
    s = state_with(0.25, last_normal=np.array([0, 0, 1.0]))
    for f in ([0, 0, 2], [1, 0, 2], [0, 0, 0.01]):
        _, s2 = step(CFG, s, f, [5e-5, 0, 0])
        assert s2.mu_history == s.mu_history
