"""Shared fixtures: the planar-rotation cylinder pipeline is expensive to
build (long high-accuracy integration), so it is computed once per session
and reused by the unit tests and the acceptance gates."""

import numpy as np
import pytest

import kcone

P_STD = np.diag([-1.0, -1.0, 1.0])


@pytest.fixture(scope="session")
def std_cone():
    return kcone.make_quadratic_cone(P_STD)


@pytest.fixture(scope="session")
def hopf_field():
    return kcone.make_hopf_cylinder(omega=1.0, c=4.0)


@pytest.fixture(scope="session")
def hopf_traj(hopf_field):
    return kcone.integrate(
        hopf_field, [0.1, 0.0, 0.5], 100.0, rtol=1e-10, atol=1e-12
    )


@pytest.fixture(scope="session")
def hopf_omega(hopf_traj):
    return kcone.estimate_omega(hopf_traj)


@pytest.fixture(scope="session")
def hopf_loop(hopf_omega, hopf_traj, std_cone, hopf_field):
    loop = kcone.detect_periodic(hopf_omega, hopf_traj, std_cone, hopf_field)
    assert loop is not None
    return loop


@pytest.fixture(scope="session")
def sink_field():
    # F(x) = -P x: contracts e3, expands the inner plane.
    return kcone.make_linear_field(-P_STD)


@pytest.fixture(scope="session")
def sink_traj(sink_field):
    return kcone.integrate(
        sink_field, [0.0, 0.0, 1.0], 100.0, rtol=1e-10, atol=1e-12
    )
