"""Shared instances for the suite; built once per session.

Everything downstream is deterministic given these, so session scope is safe:
instances are treated as read-only by every consumer.
"""

import pytest

from quasispan import (
    ONE,
    build_fock_quasimodule,
    build_heisenberg,
    c1_subspace,
    c_n_subspace,
    quasi_poly,
    quotient_representatives,
)

DEPTH_CAP = 6


@pytest.fixture(scope="session")
def alg6():
    return build_heisenberg(6)


@pytest.fixture(scope="session")
def qm0(alg6):
    return build_fock_quasimodule(alg6, 0, depth_cap=DEPTH_CAP, validate=False)


@pytest.fixture(scope="session")
def qm1(alg6):
    return build_fock_quasimodule(alg6, 1, depth_cap=DEPTH_CAP, validate=False)


@pytest.fixture(scope="session")
def x1(alg6):
    return quotient_representatives(alg6, c1_subspace(alg6))


@pytest.fixture(scope="session")
def x2(alg6):
    return quotient_representatives(alg6, c_n_subspace(alg6, 2))


@pytest.fixture(scope="session")
def f_battery():
    return [
        ONE,
        quasi_poly({(0, 0): 1, (1, 0): 1}),
        quasi_poly({(0, 0): 1, (0, 1): 1}),
        quasi_poly({(0, 0): 1, (1, 1): 1}),
        quasi_poly({(0, 0): 1, (1, 0): 1, (0, 1): 1, (1, 1): 1}),
    ]
