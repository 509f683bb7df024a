import numpy as np
import pytest

from exactsplit.grid import Field, GridSpec


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_field(spec: GridSpec, rng) -> Field:
    vals = rng.standard_normal(spec.points) + 1j * rng.standard_normal(spec.points)
    return Field(spec, vals)


def gaussian_field(spec: GridSpec, center=None, width=1.0) -> Field:
    center = center or (0.0,) * spec.dims
    return Field.from_function(
        spec, lambda *x: np.exp(-sum((xi - c) ** 2 for xi, c in zip(x, center)) / width))


# one line per acceptance criterion, echoed after the run
ACCEPTANCE_LINES = {}


def report(key: str, passed: bool, detail: str) -> bool:
    ACCEPTANCE_LINES[key] = f"{key:<4s} {'PASS' if passed else 'FAIL'}  {detail}"
    print(ACCEPTANCE_LINES[key])
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: int(k[1:])):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
