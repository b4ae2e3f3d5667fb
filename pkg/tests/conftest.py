import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from algext import AHElement, AHExtension, CharacterSpace, Element, MonicPoly

settings.register_profile(
    "algext", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("algext")


def cnormal(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def random_space(rng, n_max=16):
    n = int(rng.integers(1, n_max + 1))
    return CharacterSpace([f"w{k}" for k in range(n)])


def random_element(rng, space, scale=1.0):
    return Element(space, scale * cnormal(rng, len(space)))


def random_monic(rng, space, n=None, n_max=5):
    n = int(rng.integers(1, n_max + 1)) if n is None else n
    return MonicPoly.from_array(space, cnormal(rng, n, len(space)))


def random_ah(rng, ext):
    return AHElement.from_array(ext, cnormal(rng, ext.degree, len(ext.space)))


def random_extension(rng, n=None, n_max=5, N_max=8):
    space = random_space(rng, N_max)
    return AHExtension(random_monic(rng, space, n, n_max))


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)


def exp_witness(rng, ext, g0, kmax=2):
    """Extension element h with exp(h^) = exp(g0) on the fibration, plus its branch integers.

    At each character the fibre values ``g0 + 2 pi i k_j`` are interpolated
    over the (simple) roots of alpha.
    """
    from algext.poly import roots_array

    roots = roots_array(ext.alpha.array)
    N, n = roots.shape
    ks = rng.integers(-kmax, kmax + 1, size=(N, n))
    arr = np.zeros((n, N), dtype=complex)
    for w in range(N):
        vals = g0.values[w] + 2j * np.pi * ks[w]
        arr[:, w] = np.linalg.solve(np.vander(roots[w], n, increasing=True), vals)
    return AHElement.from_array(ext, arr), ks


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(mod.RESULTS):
            terminalreporter.write_line(line)
