import math

import numpy as np
import pytest

from supconv.nonlinearity import NonlinearitySpec


def simpson(fun, a, b, panels):
    """Composite Simpson rule with a fixed number of panels (vectorized ``fun``)."""
    if panels % 2:
        panels += 1
    x = np.linspace(a, b, panels + 1)
    y = fun(x)
    h = (b - a) / panels
    return h / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-1:2].sum())


def simpson_decades(fun, b, panels_per_decade):
    """Fixed-panel Simpson over [0, 1], [1, 10], [10, 100], ... up to ``b``."""
    edges = [0.0, 1.0]
    while edges[-1] < b:
        edges.append(min(edges[-1] * 10.0, b))
    edges[-1] = b
    edges = [e for i, e in enumerate(edges) if i == 0 or e > edges[i - 1]]
    return sum(simpson(fun, lo, hi, panels_per_decade) for lo, hi in zip(edges[:-1], edges[1:]))


@pytest.fixture
def sp1():
    return NonlinearitySpec.signed_power(1.0)


@pytest.fixture
def lp1():
    return NonlinearitySpec.log_power(1.0)


ALL_SPECS = [
    NonlinearitySpec.linear(),
    NonlinearitySpec.log_power(0.5),
    NonlinearitySpec.log_power(1.0),
    NonlinearitySpec.log_power(2.0),
    NonlinearitySpec.signed_power(0.5),
    NonlinearitySpec.signed_power(1.0),
    NonlinearitySpec.abs_power(1.0),
]


def abs_h(spec):
    """Vectorized |h| for the oracles, written out from the family formulas."""
    t = spec.theta
    return {
        "linear": lambda s: np.abs(s),
        "log_power": lambda s: np.abs(s) * np.log(math.e + np.abs(s)) ** t,
        "signed_power": lambda s: np.abs(s) ** (1 + t),
        "abs_power": lambda s: np.abs(s) ** (1 + t),
    }[spec.family]


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line for an acceptance criterion, then assert it."""

    def record(number: int, label: str, ok: bool, detail: str = "") -> None:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d}: {label}"
        if detail:
            line += f" ({detail})"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
