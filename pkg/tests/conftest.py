import sys

import numpy as np
import pytest

from dftbeam import RiceanParams, build_dft


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def aligned_los(M, beams):
    """LoS columns fully projected on the given DFT beams (||F hbar||^2 = M)."""
    U = build_dft(M).entries
    return np.stack([np.sqrt(M) * np.conj(U[b]) for b in beams], axis=1)


def random_params(rng, M, n_users, k_lin=None, beta=None):
    los = crandn(rng, M, n_users)
    kappas = rng.uniform(0, 20, n_users) if k_lin is None else np.full(n_users, k_lin)
    betas = rng.uniform(0.2, 3, n_users) if beta is None else np.full(n_users, beta)
    return RiceanParams(betas, kappas, los)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for number in sorted(results):
            terminalreporter.write_line(results[number])
