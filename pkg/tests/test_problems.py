import numpy as np
import pytest

import dinavd
from dinavd.problems import (CATALOG_IDS, batch_gradient, batch_value,
                             check_derivatives, make_lasso,
                             min_norm_subgradient, scaled)
from dinavd.rng import XorShift64Star
from dinavd.solvers import fista_reference_value

from oracles import fd_gradient, fd_hvp, grid_prox_box, grid_prox_l1

MASK = (1 << 64) - 1


def _reference_stream(seed, n):
    # independent transcription of the documented xorshift64* algorithm
    s = seed & MASK or 0x9E3779B97F4A7C15
    out = []
    for _ in range(n):
        s ^= s >> 12
        s = (s ^ (s << 25)) & MASK
        s ^= s >> 27
        out.append((s * 0x2545F4914F6CDD1D) & MASK)
    return out


def test_rng_matches_documented_algorithm():
    for seed in (0, 1, 42, 2**63 + 17):
        rng = XorShift64Star(seed)
        assert [rng.next_u64() for _ in range(8)] == _reference_stream(seed, 8)
    rng = XorShift64Star(7)
    u = [rng.uniform() for _ in range(100)]
    assert all(0.0 <= x < 1.0 for x in u)


class TestProxL1:
    def test_frozen_examples(self):
        assert dinavd.prox_l1(np.array([3.0]), 1.0)[0] == pytest.approx(2.0, abs=1e-12)
        assert dinavd.prox_l1(np.array([0.5]), 1.0)[0] == 0.0
        assert dinavd.prox_l1(np.array([0.0]), 5.0)[0] == 0.0

    def test_matches_grid_oracle(self):
        rng = np.random.default_rng(1234)
        for _ in range(25):
            v = float(rng.uniform(-5, 5))
            tau = float(rng.uniform(0.05, 3.0))
            want = grid_prox_l1(v, tau)
            got = dinavd.prox_l1(np.array([v]), tau)[0]
            assert abs(got - want) <= 1e-3

    def test_subgradient_inclusion(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            v = rng.uniform(-4, 4, size=6)
            tau = float(rng.uniform(0.1, 2.0))
            p = dinavd.prox_l1(v, tau)
            r = (v - p) / tau
            zero = np.abs(p) <= 1e-15
            assert np.all(np.abs(r[zero]) <= 1.0 + 1e-10)
            assert np.all(np.abs(r[~zero] - np.sign(p[~zero])) <= 1e-10)

    def test_tau_error(self):
        with pytest.raises(ValueError):
            dinavd.prox_l1(np.array([1.0]), 0.0)


class TestProxBox:
    def test_frozen_examples(self):
        lo, hi = -np.ones(2), np.ones(2)
        assert np.allclose(dinavd.prox_box(np.array([2.0, -3.0]), 1.0, lo, hi), [1.0, -1.0])
        assert np.allclose(dinavd.prox_box(np.array([0.3, 0.7]), 1.0, lo, hi), [0.3, 0.7])

    def test_tau_invariance(self):
        v = np.array([1.5])
        a = dinavd.prox_box(v, 0.01, np.array([0.0]), np.array([1.0]))
        b = dinavd.prox_box(v, 100.0, np.array([0.0]), np.array([1.0]))
        assert a[0] == b[0] == 1.0

    def test_matches_grid_oracle(self):
        rng = np.random.default_rng(99)
        for _ in range(25):
            v = float(rng.uniform(-5, 5))
            lo = float(rng.uniform(-3, 0))
            hi = float(rng.uniform(0, 3))
            tau = float(rng.uniform(0.1, 2.0))
            want = grid_prox_box(v, tau, lo, hi)
            got = dinavd.prox_box(np.array([v]), tau, np.array([lo]), np.array([hi]))[0]
            assert abs(got - want) <= 1e-3

    def test_empty_box_error(self):
        with pytest.raises(ValueError):
            dinavd.prox_box(np.zeros(2), 1.0, np.array([0.0, 1.0]), np.array([1.0, 0.0]))


@pytest.mark.parametrize("prox,dim", [
    (lambda u, tau: dinavd.prox_l1(u, 0.7 * tau), 5),
    (lambda u, tau: dinavd.prox_box(u, tau, -np.ones(5), np.ones(5)), 5),
])
def test_firm_nonexpansiveness(prox, dim):
    rng = np.random.default_rng(2024)
    for _ in range(100):
        u = rng.uniform(-3, 3, size=dim)
        v = rng.uniform(-3, 3, size=dim)
        pu = prox(u, 1.0)
        pv = prox(v, 1.0)
        lhs = np.sum((pu - pv) ** 2)
        rhs = np.dot(pu - pv, u - v)
        assert lhs <= rhs + 1e-12
        assert np.linalg.norm(pu - pv) <= np.linalg.norm(u - v) + 1e-12


class TestCatalog:
    def test_unknown_id_names_valid_ids(self):
        with pytest.raises(ValueError) as ei:
            dinavd.make_instance("nope")
        for cid in CATALOG_IDS:
            assert cid in str(ei.value)

    def test_quad1d_frozen_values(self, quad1d):
        assert quad1d.smooth.value(np.array([1.0])) == pytest.approx(0.5, abs=1e-15)
        assert quad1d.smooth.gradient(np.array([0.0]))[0] == 0.0

    def test_illcond2d_hvp(self, illcond2d):
        hv = illcond2d.smooth.hvp(np.array([0.3, -2.0]), np.array([1.0, 1.0]))
        assert np.allclose(hv, [1.0, 1000.0], atol=1e-15)

    @pytest.mark.parametrize("cid", CATALOG_IDS)
    def test_minimizer_metadata(self, cid):
        inst = dinavd.make_instance(cid, 1)
        f = inst.smooth
        if f.minimizer is None:
            return
        xstar = f.minimizer
        assert np.linalg.norm(f.gradient(xstar)) < 1e-10
        assert abs(f.value(xstar) - f.min_value) < 1e-12
        if inst.nonsmooth is not None:
            for tau in (1e-3, 1.0, 10.0):
                step = xstar - tau * np.asarray(f.gradient(xstar))
                assert np.linalg.norm(inst.nonsmooth.prox(step, tau) - xstar) < 1e-10

    @pytest.mark.parametrize("cid", CATALOG_IDS)
    def test_mu_le_lipschitz(self, cid):
        f = dinavd.make_instance(cid, 1).smooth
        if f.lipschitz_grad is not None and f.strong_convexity is not None:
            assert f.strong_convexity <= f.lipschitz_grad + 1e-12

    @pytest.mark.parametrize("cid", CATALOG_IDS)
    def test_derivative_checks(self, cid):
        inst = dinavd.make_instance(cid, 1)
        rng = np.random.default_rng(7)
        pts = [rng.uniform(-2, 2, size=inst.dim) for _ in range(4)]
        report = check_derivatives(inst.smooth, pts, tol=1e-5, hvp_tol=1e-4)
        assert report.passed, [c.grad_rel_error for c in report.checks]

    def test_quartic_gradient_analytic(self):
        # phi = x^4/4, so the gradient at 2 is 2^3 = 8
        f = dinavd.make_instance("quartic1d").smooth
        x = np.array([2.0])
        assert f.gradient(x)[0] == pytest.approx(8.0, rel=1e-14)
        assert fd_gradient(f.value, x)[0] == pytest.approx(8.0, rel=1e-6)

    def test_lasso_shapes_and_fd(self, lasso):
        assert lasso.dim == 50
        assert lasso.smooth.kernel.mat.shape == (20, 50)
        rng = np.random.default_rng(3)
        x = rng.uniform(-1, 1, size=50)
        g = lasso.smooth.gradient(x)
        assert np.linalg.norm(fd_gradient(lasso.smooth.value, x) - g) / (1 + np.linalg.norm(g)) < 1e-5
        hv = lasso.smooth.hvp(x, np.ones(50))
        assert np.linalg.norm(fd_hvp(lasso.smooth.gradient, x, np.ones(50)) - hv) / (1 + np.linalg.norm(hv)) < 1e-4

    def test_lasso_fstar_reproducible(self, lasso):
        again = fista_reference_value(lasso, 1_000_000)
        assert abs(again - lasso.known_opt_value) < 1e-10
        # the cached instance is shared and immutable
        assert dinavd.make_instance("lasso", 1) is lasso
        assert not lasso.smooth.kernel.mat.flags.writeable

    def test_boxqp_constraints_active(self):
        inst = dinavd.make_instance("boxqp", 1)
        assert inst.known_opt_value is not None
        assert inst.smooth.strong_convexity >= 1.0 - 1e-12


def test_min_norm_subgradient(abs1d):
    phi = abs1d.nonsmooth
    assert min_norm_subgradient(phi, np.array([0.0]))[0] == 0.0
    assert min_norm_subgradient(phi, np.array([2.0]))[0] == 1.0
    assert min_norm_subgradient(phi, np.array([-0.5]))[0] == -1.0


def test_batch_helpers_match_pointwise(lasso):
    rng = np.random.default_rng(11)
    xs = rng.uniform(-1, 1, size=(7, 50))
    vals = batch_value(lasso.smooth, xs)
    grads = batch_gradient(lasso.smooth, xs)
    for i in range(7):
        assert vals[i] == pytest.approx(lasso.smooth.value(xs[i]), rel=1e-12)
        assert np.allclose(grads[i], lasso.smooth.gradient(xs[i]), rtol=1e-12, atol=1e-14)


def test_scaled_function(quad1d):
    f4 = scaled(quad1d.smooth, 4.0)
    x = np.array([1.7])
    assert f4.value(x) == pytest.approx(4 * quad1d.smooth.value(x), rel=1e-15)
    assert f4.gradient(x)[0] == pytest.approx(4 * quad1d.smooth.gradient(x)[0], rel=1e-15)
    assert f4.kernel.vec[0] == 4.0


def test_small_lasso_generator_deterministic():
    a = make_lasso(7, m=5, n=10, with_opt=False)
    b = make_lasso(7, m=5, n=10, with_opt=False)
    assert np.array_equal(a.smooth.kernel.mat, b.smooth.kernel.mat)
    assert np.array_equal(a.smooth.kernel.vec, b.smooth.kernel.vec)
