import numpy as np
import pytest

from fermionic_nuclearity.fields import make_context
from fermionic_nuclearity.one_particle import make_space, make_subspace_pair, random_space, random_subspace_pair


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def random_context(rng):
    def build(d=3, k_phi=1, k_pi=1):
        space = random_space(d, rng)
        return make_context(random_subspace_pair(space, k_phi, k_pi, rng))
    return build


@pytest.fixture
def real_line_context():
    """d = 2, plain conjugation, L = R e1 + R e2 (phi fields only)."""
    space = make_space(2)
    e = np.eye(2)
    return make_context(make_subspace_pair(space, [e[0], e[1]], []))


def cvec(rng, d):
    return rng.normal(size=d) + 1j * rng.normal(size=d)
