import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from orliczvar import build_nfunction, builtin

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

BUILTIN_CASES = [
    ("linear", {"c": 2.0}),
    ("power", {"p": 3.0}),
    ("power", {"p": 1.5}),
    ("model-gamma", {"gamma": 1.5}),
    ("model-gamma", {"gamma": 2.0}),
    ("model-gamma", {"gamma": 3.0}),
    ("log-power", {"p": 2.0}),
]


def case_id(case):
    name, params = case
    return name + "-" + "-".join(f"{k}{v:g}" for k, v in params.items())


_cache = {}


def nfunction_for(name, **params):
    key = (name, tuple(sorted(params.items())))
    if key not in _cache:
        _cache[key] = build_nfunction(builtin(name, **params))
    return _cache[key]


@pytest.fixture(params=BUILTIN_CASES, ids=case_id)
def builtin_nf(request):
    name, params = request.param
    return nfunction_for(name, **params)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(acceptance.RESULTS):
        terminalreporter.write_line(acceptance.RESULTS[k])
