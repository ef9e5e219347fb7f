import numpy as np
import pytest
from hypothesis import settings

from minphase import LinearPhasePrototype, design_minphase
from minphase.tapfile import load_fixture, rand10_seed42

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def table1():
    return LinearPhasePrototype(load_fixture("table1_g.txt"))


@pytest.fixture(scope="session")
def table2():
    return LinearPhasePrototype(load_fixture("table2_g.txt"))


@pytest.fixture(scope="session")
def table3():
    return load_fixture("table3_c.txt"), load_fixture("table3_c_approx.txt")


@pytest.fixture(scope="session")
def rand10():
    return rand10_seed42()


@pytest.fixture(scope="session")
def table2_design(table2):
    return design_minphase(table2, Q=250, epsilon=1.16e-13)


def minphase_from_zeros(rng, M, radius=0.95):
    """Random real minimum-phase taps with zeros of modulus below ``radius``."""
    z = []
    while len(z) < M - 1:
        if M - 1 - len(z) >= 2 and rng.random() < 0.5:
            r, th = radius * np.sqrt(rng.random()), rng.uniform(0, np.pi)
            z += [r * np.exp(1j * th), r * np.exp(-1j * th)]
        else:
            z.append(rng.uniform(-radius, radius))
    taps = np.real(np.poly(z)) if z else np.ones(1)
    return rng.uniform(0.5, 2.0) * taps, np.array(z)
