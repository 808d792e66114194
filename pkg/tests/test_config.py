import numpy as np
import pytest

from orliczvar import ConfigError, parse_config, serialize_config

FULL = """
# comment line
[phi]
name = model-gamma
gamma = 2
dimension = 5

[reaction]
f = s/4
F = s^2/8
A = 0.125
ell = 2
A_infinity = 1/8

[source]
h = 0.1 + 0*x

[mesh]
nx = 6
ny = 4
width = 2

[solver]
tol = 1e-7
seed = 11
method = descent
"""


def test_parse_builds_problem():
    cfg = parse_config(FULL)
    assert cfg.seed == 11 and cfg.dimension == 5
    spec = cfg.problem()
    assert spec.mesh.n_triangles == 48
    assert spec.mesh.area == pytest.approx(2.0)
    assert spec.options.tol == 1e-7 and spec.options.method == "descent"
    assert spec.reaction.potential(0.0, 0.0, 2.0) == pytest.approx(0.5)
    assert spec.reaction.a_infinity(0.3, 0.3) == pytest.approx(0.125)
    assert spec.nfunction.name == "model-gamma"


def test_expression_phi():
    cfg = parse_config("[phi]\nexpr = 2 + 0*t\n")
    assert cfg.nfunction()(3.0) == pytest.approx(9.0)


def test_round_trip_is_idempotent():
    once = serialize_config(parse_config(FULL))
    twice = serialize_config(parse_config(once))
    assert once == twice
    assert once.startswith("[phi]\nname = model-gamma\ndimension = 5\ngamma = 2.0\n")


def test_case_sensitive_keys():
    cfg = parse_config("[reaction]\nf = s\nF = s^2/2\n")
    assert set(cfg.sections["reaction"]) == {"f", "F"}


@pytest.mark.parametrize("text, line", [
    ("[phi]\nname = linear\nbogus = 1\n", 3),
    ("[phi]\nname = linear\n\n[nonsense]\nx = 1\n", 4),
    ("name = linear\n", 1),
    ("[phi]\nname linear\n", 2),
    ("[phi]\nname = linear\nname = power\n", 3),
    ("[phi]\nname = quartic\n", 2),
    ("[mesh]\nnx = -3\n", 2),
    ("[mesh]\nnx = 2.5\n", 2),
    ("[reaction]\n\nf = s**2\n", 3),
    ("[reaction]\nf = q + 1\n", 2),
    ("[phi]\nname = linear\np = 3\n", 3),
    ("[phi]\nexpr = t\ngamma = 2\n", 3),
    ("[solver]\nmethod = newton\n", 2),
])
def test_errors_carry_line_numbers(text, line):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_phi_needs_exactly_one_source():
    with pytest.raises(ConfigError):
        parse_config("[phi]\nname = linear\nexpr = 2\n")
    with pytest.raises(ConfigError):
        parse_config("[phi]\ndimension = 3\n")


def test_replace_ignores_none():
    cfg = parse_config(FULL).replace("solver", seed=None, tol=1e-3)
    assert cfg.seed == 11 and cfg.get("solver", "tol") == 1e-3


def test_spatial_source_expression():
    cfg = parse_config("[phi]\nname = linear\n[source]\nh = x*y\n")
    spec = cfg.problem()
    assert np.allclose(spec.h(np.array([0.5]), np.array([0.5])), 0.25)
