from __future__ import annotations

import math

import mpmath as mp
import pytest

from fracinv import kernels

# lines collected by the acceptance module, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def ml_reference(alpha: float, beta: float, z: float) -> float:
    """Taylor series in exact rational arguments with enough working digits
    to absorb the cancellation (about x^(1/alpha) / ln 10 digits)."""
    x = abs(z)
    digits = 40 + int(x ** (1.0 / alpha) / 2.3)
    with mp.workdps(digits):
        a, b, zz = mp.mpf(alpha), mp.mpf(beta), mp.mpf(z)
        total = mp.mpf(0)
        term_bound = mp.mpf(10) ** (-digits + 5)
        k = 0
        peak = int((x ** (1.0 / alpha)) / alpha) + 2 if x > 0 else 0
        while True:
            term = zz**k * mp.rgamma(a * k + b)
            total += term
            if k > peak and abs(term) < term_bound * max(1, abs(total)):
                break
            k += 1
        return float(total)


@pytest.fixture(params=["python", "compiled"])
def backend(request):
    if request.param == "compiled" and not kernels.compiled_available():
        pytest.skip("compiled kernels not built")
    previous = kernels.backend()
    kernels.set_backend(request.param)
    yield request.param
    kernels.set_backend(previous)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def heat_solution(t, x0=0.5):
    import numpy as np

    return math.sqrt(2.0) * math.sin(math.pi * x0) * np.exp(-math.pi**2 * np.asarray(t))
