import pytest

from baroflow import BarotropicEOS, build_mesh, gaussian_bump, initial_state

DOMAIN = (-5.0, 5.0, -5.0, 5.0)


@pytest.fixture(scope="session")
def eos_ref():
    return BarotropicEOS(a=1.0, gamma=1.4)


@pytest.fixture(scope="session")
def mesh4():
    return build_mesh(DOMAIN, 4)


@pytest.fixture(scope="session")
def mesh8():
    return build_mesh(DOMAIN, 8)


@pytest.fixture(scope="session")
def mesh16():
    return build_mesh(DOMAIN, 16)


@pytest.fixture(scope="session")
def mesh50():
    return build_mesh(DOMAIN, 50)


@pytest.fixture(scope="session")
def state0_50(mesh50):
    return initial_state(mesh50, gaussian_bump())


def impermeable_velocity(mesh, rng, scale=1.0):
    """Random nodal velocity with wall-normal components pinned to zero."""
    u = scale * rng.standard_normal((2, mesh.n_nodes))
    for c in range(2):
        u[c, mesh.dirichlet_nodes(c)] = 0.0
    return u


def admissible_state(mesh, rng, t=0.0):
    """Random positive-density state satisfying the wall constraints."""
    from baroflow import State

    rho = 1.0 + 0.5 * rng.random(mesh.n_nodes)
    return State(rho=rho, u=impermeable_velocity(mesh, rng, 0.3), t=t)
