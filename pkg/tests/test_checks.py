import numpy as np

from orliczvar import checks

from conftest import nfunction_for


def test_involution_recovers_power_potential():
    nf = nfunction_for("power", p=3.0)
    t = np.geomspace(1e-3, 1e3, 30)
    assert np.allclose(checks.involution_values(nf, t), t ** 3 / 3, rtol=1e-9)


def test_suite_is_seeded():
    nf = nfunction_for("linear", c=2.0)
    a = checks.run_suite(nf, seed=4, n_pairs=500, n_fields=8)
    b = checks.run_suite(nf, seed=4, n_pairs=500, n_fields=8)
    assert [r.worst for r in a] == [r.worst for r in b]
    assert all(r.passed for r in a)


def test_conjugate_check_skips_when_dimension_too_small():
    r = checks.conjugate_sandwich(nfunction_for("model-gamma", gamma=2.0), 3, np.random.default_rng(0), 10)
    assert r.passed and "skipped" in r.detail


def test_result_line_format():
    assert checks.CheckResult("x", False, 0.5, "d").line() == "FAIL x: worst=5.000e-01 d"
