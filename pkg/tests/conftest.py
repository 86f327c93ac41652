import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def qr_haar(n, rng):
    """Reference Haar sampler: QR of a complex Ginibre matrix with the phase fix."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def loop_partial_transpose(a, m, n):
    out = np.zeros_like(a)
    for i in range(m):
        for j in range(n):
            for k in range(m):
                for l in range(n):
                    out[i * n + l, k * n + j] = a[i * n + j, k * n + l]
    return out


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, msg = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {msg}")
