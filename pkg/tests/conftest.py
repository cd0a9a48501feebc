import numpy as np
import pytest

from delaysl.forward import Potential, Spectrum, eigenvalues

A = 0.45 * np.pi

CORPUS = {
    "zero": lambda x: 0.0 * x,
    "constant": lambda x: 1.0 + 0.0 * x,
    "ramp": lambda x: x - A,
    "bump": lambda x: 0.5 * np.sin(np.pi * (x - A) / (np.pi - A)) ** 2,
}


def corpus_potential(name, M=2048):
    return Potential.from_function(A, CORPUS[name], M)


class SpectrumCache:
    """Eigenvalues are computed once per potential at the largest N requested."""

    def __init__(self):
        self._store = {}

    def get(self, name, N):
        have = self._store.get(name)
        if have is None or have[0].N < N:
            p = corpus_potential(name)
            have = (eigenvalues(0, p, N), eigenvalues(1, p, N))
            self._store[name] = have
        s0, s1 = have
        return Spectrum(0, s0.points[:N]), Spectrum(1, s1.points[:N])


_CACHE = SpectrumCache()


@pytest.fixture(scope="session")
def spectra():
    return _CACHE


@pytest.fixture
def a():
    return A


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.RESULTS:
        terminalreporter.write_line(line)
