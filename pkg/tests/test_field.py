import numpy as np
import pytest
from pydantic import ValidationError

from core.errors import ConfigError, DomainError
from solver.field import ConductivityField, FieldSpec, bump, load_field

ORIGIN = np.zeros((1, 2))


def test_bump_profile():
    assert bump(np.array([0.0]))[0] == 1.0
    assert np.all(bump(np.array([1.0, 1.5])) == 0.0)


def test_bump_family_at_its_center(bump_field):
    assert bump_field.gamma(ORIGIN)[0] == pytest.approx(np.array([[1.5, 0.15], [0.15, 1.25]]))
    assert bump_field.gamma(np.array([[0.6, 0.0]]))[0] == pytest.approx(np.eye(2))
    assert not bump_field.is_constant
    assert bump_field.C1 > 0.9 and bump_field.C2 < 1.8
    bump_field.check()


def test_constant_family():
    field_ = ConductivityField.from_spec(FieldSpec(gamma=[[4.0, 0.0], [0.0, 1.0]], c=2.0))
    assert field_.is_constant
    gamma0, c0 = field_.constant_coefficients()
    assert gamma0 == pytest.approx(np.diag([4.0, 1.0]))
    assert c0 == 2.0
    assert field_.quadratic_form([0.3, 0.3], [1.0, 0.0]) == pytest.approx(4.0)


def test_metric_family_weighted_tensor():
    spec = FieldSpec(family="metric", metric=[[4.0, 0.0], [0.0, 1.0]])
    field_ = ConductivityField.from_spec(spec)
    assert field_.gamma(ORIGIN)[0] == pytest.approx(np.diag([0.25, 1.0]))
    assert field_.c(ORIGIN)[0] == pytest.approx(2.0)
    # det(g)^{1/(2s)} g^{-1} at s = 1/2
    assert field_.weighted_tensor(ORIGIN, 0.5)[0] == pytest.approx(np.diag([1.0, 4.0]))


def test_scaling_keeps_c(bump_field):
    doubled = bump_field.scaled(2.0)
    x = np.array([[0.1, -0.2], [0.4, 0.1]])
    assert doubled.gamma(x) == pytest.approx(2.0 * bump_field.gamma(x))
    assert doubled.c(x) == pytest.approx(bump_field.c(x))
    assert doubled.digest != bump_field.digest


def test_digest_is_canonical(bump_spec):
    again = FieldSpec.model_validate(bump_spec.model_dump(mode="json"))
    assert again.digest() == bump_spec.digest()
    assert len(bump_spec.digest()) == 64
    assert ConductivityField.constant(np.eye(2)).digest == "custom"


@pytest.mark.parametrize(
    "kwargs",
    [
        {"family": "constant", "amplitude": 0.3},
        {"gamma": [[1.0, 2.0], [2.0, 1.0]]},
        {"c": 0.0},
        {"center": [0.0]},
        {"family": "metric", "gamma": [[1.0, 0.0], [0.0, 1.0]]},
        {"unknown": 1},
    ],
)
def test_invalid_specs(kwargs):
    with pytest.raises(ValidationError):
        FieldSpec(**kwargs)


def test_bump_that_loses_definiteness():
    spec = FieldSpec(family="bump", amplitude=-2.0, direction=[[1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(ConfigError):
        ConductivityField.from_spec(spec)


def test_constant_constructor_checks():
    with pytest.raises(DomainError):
        ConductivityField.constant([[1.0, 0.5], [0.0, 1.0]])
    with pytest.raises(DomainError):
        ConductivityField.constant(np.eye(2), c0=-1.0)


def test_load_field_from_toml(tmp_path):
    path = tmp_path / "field.toml"
    path.write_text('[field]\nfamily = "bump"\namplitude = 0.5\nwidth = 0.5\n', encoding="utf-8")
    field_ = load_field(path)
    assert field_.gamma(ORIGIN)[0] == pytest.approx(1.5 * np.eye(2))
    (tmp_path / "bad.toml").write_text("[field\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_field(tmp_path / "bad.toml")
    (tmp_path / "wrong.json").write_text('{"family": "spiral"}', encoding="utf-8")
    with pytest.raises(ConfigError, match="family"):
        load_field(tmp_path / "wrong.json")
