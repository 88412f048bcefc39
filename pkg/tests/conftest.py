import numpy as np
import pytest

import dinavd


@pytest.fixture(scope="session")
def quad1d():
    return dinavd.make_instance("quad1d")


@pytest.fixture(scope="session")
def illcond2d():
    return dinavd.make_instance("illcond2d")


@pytest.fixture(scope="session")
def degenerate2d():
    return dinavd.make_instance("degenerate2d")


@pytest.fixture(scope="session")
def abs1d():
    return dinavd.make_instance("abs1d")


@pytest.fixture(scope="session")
def lasso():
    return dinavd.make_instance("lasso", 1)


@pytest.fixture(scope="session", autouse=True)
def warm_kernels(quad1d, abs1d):
    # tiny runs so jit compilation is not charged to the timed criteria
    p = dinavd.DynamicsParams(alpha=3.1, beta=1.0, t0=1.0, x0=[1.0], v0=[0.0],
                              t_end=1.02, step=1e-3)
    dinavd.integrate_avd(quad1d.smooth, p)
    dinavd.integrate_dinavd_2nd(quad1d.smooth, p)
    dinavd.integrate_dinavd_1st(quad1d.smooth, p)
    dinavd.integrate_perturbed(quad1d.smooth, p, dinavd.power_perturbation(1.0, -3.0, 1))
    dinavd.integrate_gdinavd(abs1d, p)
    ap = dinavd.AlgoParams(alpha=3.1, beta=1.0, h=1e-3, iterations=3, lipschitz=1.0)
    dinavd.run_ifb_avd(abs1d, ap, np.array([1.0]))
    dinavd.run_fista(abs1d, ap, np.array([1.0]))
    dinavd.run_forward_backward(abs1d, ap, np.array([1.0]))
