import os
import sys

import pytest
from hypothesis import HealthCheck, settings

from acskod.deformation import evaluate, load_family
from acskod.parsing import parse_scalar
from acskod.specfiles import load_acs, load_manifold

settings.register_profile("default", max_examples=100, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def nil():
    M = load_manifold("nilmanifold_N")
    return load_acs("builtin", M)


@pytest.fixture(scope="session")
def torus():
    M = load_manifold("torus4")
    return load_acs("standard", M)


@pytest.fixture(scope="session")
def kt_family():
    return load_family("kodaira_thurston")


@pytest.fixture(scope="session")
def kt(kt_family):
    cache = {}

    def get(t: str):
        if t not in cache:
            cache[t] = evaluate(kt_family, parse_scalar(t))
        return cache[t]

    return get


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in sorted(results, key=lambda r: int(r[0].split()[0])):
        line = f"{'PASS' if ok else 'FAIL'}  criterion {label}"
        terminalreporter.write_line(f"{line}: {detail}" if detail else line)
