import itertools

import numpy as np
import pytest


def brute_permanent(a):
    """Independent oracle: plain sum over permutations."""
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    return sum(
        (np.prod([a[j, p[j]] for j in range(n)]) for p in itertools.permutations(range(n))),
        0j,
    )


def complex_normal(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


@pytest.fixture
def rng():
    return np.random.default_rng(20260417)


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number, title, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}  {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2])):
            terminalreporter.write_line(line)
