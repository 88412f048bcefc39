"""Backend parity: the compiled kernels and the numpy fallback must agree."""

import numpy as np
import pytest

import dinavd
from dinavd import backend
from dinavd.dynamics import DynamicsParams
from dinavd.problems import make_lasso
from dinavd.solvers import AlgoParams


def _p(inst, **kw):
    d = inst.dim
    base = dict(alpha=3.1, beta=1.0, t0=1.0, x0=np.linspace(1.0, 2.0, d),
                v0=np.zeros(d), t_end=3.0, step=1e-3)
    base.update(kw)
    return DynamicsParams(**base)


@pytest.mark.parametrize("cid", ["quad1d", "illcond2d", "degenerate2d", "quartic1d"])
@pytest.mark.parametrize("integrate", [dinavd.integrate_avd,
                                       dinavd.integrate_dinavd_2nd,
                                       dinavd.integrate_dinavd_1st])
def test_integrators_backend_parity(cid, integrate):
    inst = dinavd.make_instance(cid, 1)
    p = _p(inst)
    a = integrate(inst.smooth, p, backend="numba")
    b = integrate(inst.smooth, p, backend="numpy")
    assert np.allclose(a.xs, b.xs, rtol=1e-12, atol=1e-13)
    assert np.allclose(a.vs, b.vs, rtol=1e-12, atol=1e-13)
    assert np.allclose(a.phi_vals, b.phi_vals, rtol=1e-12, atol=1e-14)


def test_perturbed_backend_parity(quad1d):
    g = dinavd.power_perturbation(0.7, -3.0, 1)
    p = _p(quad1d)
    a = dinavd.integrate_perturbed(quad1d.smooth, p, g, backend="numba")
    b = dinavd.integrate_perturbed(quad1d.smooth, p, g, backend="numpy")
    assert np.allclose(a.xs, b.xs, rtol=1e-12, atol=1e-13)


@pytest.mark.parametrize("cid", ["abs1d", "boxqp"])
def test_gdinavd_backend_parity(cid):
    inst = dinavd.make_instance(cid, 1)
    p = _p(inst, x0=np.full(inst.dim, 0.5), beta=1.0)
    a = dinavd.integrate_gdinavd(inst, p, backend="numba")
    b = dinavd.integrate_gdinavd(inst, p, backend="numpy")
    assert np.allclose(a.xs, b.xs, rtol=1e-12, atol=1e-13)
    assert np.allclose(a.phi_vals, b.phi_vals, rtol=1e-12, atol=1e-14)


def test_solvers_backend_parity():
    small = make_lasso(7, m=5, n=10)
    p = AlgoParams(alpha=3.1, beta=1.0, h=0.01, iterations=300,
                   lipschitz=small.smooth.lipschitz_grad)
    x0 = np.zeros(10)
    for run in (dinavd.run_ifb_avd, dinavd.run_fista, dinavd.run_forward_backward):
        a = run(small, p, x0, backend="numba")
        b = run(small, p, x0, backend="numpy")
        assert np.allclose(a.xs, b.xs, rtol=1e-12, atol=1e-13)
        assert np.allclose(a.prox_residuals, b.prox_residuals, rtol=1e-12, atol=1e-12)


def test_env_flag_selects_numpy(monkeypatch):
    monkeypatch.setenv(backend.ENV_FLAG, "1")
    assert backend.active_backend() == "numpy"
    monkeypatch.setenv(backend.ENV_FLAG, "0")
    assert backend.active_backend() == ("numba" if backend.HAS_NUMBA else "numpy")


def test_resolve_rejects_unknown():
    with pytest.raises(ValueError):
        backend.resolve_backend("fortran")


def test_generic_function_without_kernel_uses_fallback():
    # no kernel spec: the numpy path must serve arbitrary callables
    f = dinavd.SmoothFunction(
        dim=1,
        value=lambda x: float(np.cosh(x[0]) - 1.0),
        gradient=lambda x: np.sinh(x),
        hvp=lambda x, u: np.cosh(x) * u,
        minimizer=np.zeros(1), min_value=0.0)
    p = DynamicsParams(alpha=3.1, beta=1.0, t0=1.0, x0=[1.0], v0=[0.0],
                       t_end=12.0, step=1e-3)
    tr = dinavd.integrate_dinavd_2nd(f, p)
    assert tr.phi_vals[-1] < 1e-3
    assert tr.phi_vals[-1] < tr.phi_vals[0]
