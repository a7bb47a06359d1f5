import pytest
from hypothesis import settings

from schwarzlab.boundary import sample_boundary
from schwarzlab.catalog import CATALOG

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


@pytest.fixture(scope="session")
def samples():
    """Boundary samples per catalog entry, built once per session."""
    cache = {}

    def get(name, n=2**14):
        key = (name, n)
        if key not in cache:
            cache[key] = sample_boundary(CATALOG[name].f, n)
        return cache[key]

    return get


ACCEPTANCE: dict = {}


@pytest.fixture
def record():
    """record(criterion, ok, detail): one line of the acceptance summary."""

    def _record(k, ok, detail):
        ACCEPTANCE[k] = (bool(ok), detail)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
