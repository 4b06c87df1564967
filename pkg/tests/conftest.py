import numpy as np
import pytest


def pytest_runtest_logreport(report):
    # one visible PASS/FAIL line per release criterion
    if report.when == "call" and "test_acceptance" in report.nodeid:
        status = "PASS" if report.passed else "FAIL"
        name = report.nodeid.split("::")[-1]
        print(f"\nACCEPTANCE {status}: {name}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_orthogonal(rng, d, reflection=False):
    """Haar-ish orthogonal matrix via QR with sign-fixed diagonal."""
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    q = q * np.sign(np.diag(r))
    if reflection != (np.linalg.det(q) < 0):
        q[:, 0] = -q[:, 0]
    return q


@pytest.fixture
def make_orthogonal():
    return random_orthogonal
