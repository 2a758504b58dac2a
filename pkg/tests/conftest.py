import time

import numpy as np
import pytest

from relaxtomo.states import DensityMatrix

_CRITERIA = []


def random_state(dim, rng, min_eig=0.02):
    """Random full-rank state: normalized Ginibre matrix mixed with I/d."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    m = g @ g.conj().T
    m /= np.trace(m).real
    m = (1 - dim * min_eig) * m + min_eig * np.eye(dim)
    return DensityMatrix(m)


def random_hermitian(dim, rng, scale=1.0):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (g + g.conj().T) / 2


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


class Criterion:
    """Collects the checks of one acceptance criterion and its runtime."""

    def __init__(self, key, title, limit_s):
        self.key, self.title, self.limit_s = key, title, limit_s
        self.failures, self.notes = [], []

    def check(self, ok, detail):
        self.notes.append(detail if ok else f"FAILED {detail}")
        if not ok:
            self.failures.append(detail)

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.start
        if exc_type is not None:
            self.failures.append(f"raised {exc_type.__name__}: {exc}")
            self.notes.append(self.failures[-1])
        if elapsed > self.limit_s:
            self.failures.append(f"runtime {elapsed:.2f}s > {self.limit_s}s")
            self.notes.append(self.failures[-1])
        status = "PASS" if not self.failures else "FAIL"
        detail = "; ".join(self.notes)
        line = f"[{status}] {self.key} {self.title} ({elapsed:.2f}s): {detail}"
        _CRITERIA.append(line)
        print(line)
        if exc_type is None and self.failures:
            raise AssertionError(line)
        return False


@pytest.fixture
def criterion():
    return Criterion


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_CRITERIA, key=lambda s: int(s.split()[1][1:])):
            terminalreporter.write_line(line)
