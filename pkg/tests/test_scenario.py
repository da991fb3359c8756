import numpy as np
import pytest

from hybridfm import scenario as sc
from hybridfm.surfaces import Dome, Plane, SineExtrusion

SHIPPED = [p.stem for p in sc.shipped_scenarios()]


def problems(name, overrides=()):
    values, lines, _ = sc.load_values(name, overrides)
    return sc.validate(values, lines)


def test_four_default_scenarios_ship():
    assert SHIPPED == ["dome_arc", "plane_line", "plane_line_noisy", "sine_path"]


@pytest.mark.parametrize("name", SHIPPED)
def test_shipped_scenarios_validate_clean(name):
    assert problems(name) == []
    assert sc.load(name).name == name


def test_surface_kinds_build():
    assert isinstance(sc.load("plane_line").surface, Plane)
    assert isinstance(sc.load("sine_path").surface, SineExtrusion)
    assert isinstance(sc.load("dome_arc").surface, Dome)


def test_negative_friction_cites_invariant():
    (d,) = problems("plane_line", ["contact.mu=-1"])
    assert d.key == "contact.mu" and "mu_true >= 0" in d.message


def test_every_violation_is_reported():
    found = {d.key for d in problems("plane_line", ["contact.mu=-1", "bogus.key=3", "estimator.weights=[1,1]"])}
    assert found == {"contact.mu", "bogus.key", "estimator.weights"}


def test_weights_must_have_unit_mean():
    (d,) = problems("plane_line", ["estimator.window=2", "estimator.weights=[1,2]"])
    assert "sum" in d.message


def test_sharp_sine_crest_is_rejected():
    (d,) = problems("sine_path", ["surface.amplitude=0.05"])
    assert d.key == "surface.amplitude" and "probe radius" in d.message


def test_parameter_of_wrong_surface_kind():
    assert [d.key for d in problems("plane_line", ["surface.radius=0.1"])] == ["surface.radius"]


def test_parse_errors_carry_line_numbers():
    with pytest.raises(sc.ScenarioError) as err:
        sc.parse_text("a = 1\nfoo\nb = [1,\na = 2\n")
    lines = [d.line for d in err.value.diagnostics]
    assert lines == [2, 3, 4]
    assert "line 2" in str(err.value)


def test_validation_diagnostics_point_at_file_lines():
    values, lines = sc.parse_text("surface.kind = plane\npath.start = [0, 0, 0]\npath.end = [1, 0, 0]\n"
                                  "path.duration = -1\n")
    (d,) = sc.validate(values, lines)
    assert d.key == "path.duration" and d.line == 4


def test_missing_required_key():
    values, lines = sc.parse_text("surface.kind = plane\n")
    missing = {d.key for d in sc.validate(values, lines) if "required" in d.message}
    assert missing == {"path.start", "path.end", "path.duration"}


def test_comments_and_values():
    values, _ = sc.parse_text("# header\nname = x  # trailing\nflag = false\nv = [1, 2.5, 3]\n")
    assert values == {"name": "x", "flag": False, "v": [1, 2.5, 3]}


def test_overrides_replace_file_values():
    s = sc.load("plane_line", ["contact.mu=0.5", "duration=2", "estimator.enabled=false", "controller.K_m=[1,2,3]"])
    assert s.contact.mu == 0.5 and s.duration == 2.0 and not s.estimator_enabled
    assert s.controller.K_m == (1, 2, 3)


def test_malformed_override():
    with pytest.raises(sc.ScenarioError):
        sc.load("plane_line", ["no_equals_sign"])


def test_missing_file():
    with pytest.raises(FileNotFoundError, match="missing.cfg"):
        sc.load("missing.cfg")


def test_probe_radius_defaults_to_standoff_length():
    assert sc.load("plane_line").probe_radius == pytest.approx(0.05)
    assert sc.load("plane_line", ["contact.probe_radius=0"]).probe_radius == 0.0


def test_robot_keys_override_default_chain():
    s = sc.load("plane_line", ["robot.joint7.offset=[0, 0, 0.1]", "robot.tool.approach_axis=[0, 0, 1]"])
    np.testing.assert_allclose(s.robot.joints[6].offset, [0, 0, 0.1])
    np.testing.assert_allclose(s.robot.approach_axis, [0, 0, 1])


def test_sine_wavelength_and_wavenumber_are_exclusive():
    (d,) = problems("sine_path", ["surface.wavenumber=31.4"])
    assert d.key == "surface.wavenumber"
