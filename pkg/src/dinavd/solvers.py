"""Discrete-time solvers for composite minimization.

run_ifb_avd transcribes the two-line inertial forward-backward recursion of
the structured dynamic (forward step on the smooth part, prox step on the
nonsmooth part, auxiliary y-update); run_fista and run_forward_backward are
the classical accelerated / plain proximal-gradient baselines with fixed step
1/L.  No line search anywhere; all runs are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels_numpy as knp
from .backend import resolve_backend
from .problems import CompositeProblem, min_norm_subgradient


class SolverError(RuntimeError):
    """Non-finite iterate or divergence; carries the iteration index."""

    def __init__(self, message: str, iteration: int):
        super().__init__(f"{message} (iteration {iteration})")
        self.iteration = iteration


@dataclass(frozen=True)
class AlgoParams:
    alpha: float
    beta: float
    h: float
    iterations: int
    t0: float = 1.0
    lipschitz: Optional[float] = None

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError("step size h must be positive")
        if self.iterations < 1:
            raise ValueError("iterations must be a positive integer")
        if self.t0 <= 0:
            raise ValueError("t0 must be positive")
        if self.lipschitz is not None and self.lipschitz <= 0:
            raise ValueError("lipschitz constant must be positive when given")


@dataclass(frozen=True)
class IterateHistory:
    """Per-iteration record of a solver run.

    ``prox_residuals[k]`` is the subgradient selection realized by the prox
    step that produced ``xs[k]`` (the minimal-norm subgradient for the
    initial row).  ``best_so_far`` is the running minimum of ``objectives``;
    raw objectives of the inertial scheme may oscillate.
    """

    ks: np.ndarray
    ts: np.ndarray
    xs: np.ndarray
    ys: np.ndarray
    objectives: np.ndarray
    best_so_far: np.ndarray
    prox_residuals: np.ndarray
    label: str = ""

    def __post_init__(self):
        n = self.ks.size
        if not (self.xs.shape[0] == self.ys.shape[0] == self.objectives.size
                == self.best_so_far.size == self.prox_residuals.shape[0]
                == self.ts.size == n):
            raise ValueError("history field lengths disagree")

    @property
    def final_best(self) -> float:
        return float(self.best_so_far[-1])


def _nonsmooth_value_fn(c: CompositeProblem):
    if c.nonsmooth is None:
        return lambda x: 0.0
    return c.nonsmooth.value


def _prox_fn(c: CompositeProblem):
    if c.nonsmooth is None:
        return lambda v, tau: v
    return c.nonsmooth.prox


def _kernel_ready(c: CompositeProblem) -> bool:
    return c.smooth.kernel is not None and (c.nonsmooth is None or c.nonsmooth.kernel is not None)


def _nonsmooth_kernel_args(c: CompositeProblem):
    if c.nonsmooth is None or c.nonsmooth.kernel is None:
        return 0, np.zeros(0), np.zeros(0), 0.0
    pk = c.nonsmooth.kernel
    return pk.kind, np.ascontiguousarray(pk.lo), np.ascontiguousarray(pk.hi), pk.weight


def _smooth_kernel_args(c: CompositeProblem):
    k = c.smooth.kernel
    return k.kind, np.ascontiguousarray(k.mat), np.ascontiguousarray(k.vec)


def ifb_default_y0(c: CompositeProblem, x0: np.ndarray, p: AlgoParams,
                   v0: Optional[np.ndarray] = None) -> np.ndarray:
    """Default auxiliary start mirroring the continuous initialization:
    y0 = v0 + beta*(grad_psi(x0) + xi0) - (1/beta - alpha/t0)*x0,
    with xi0 the minimal-norm subgradient of the nonsmooth part at x0.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    if v0 is None:
        v0 = np.zeros_like(x0)
    xi0 = (min_norm_subgradient(c.nonsmooth, x0) if c.nonsmooth is not None
           else np.zeros_like(x0))
    s0 = np.asarray(c.smooth.gradient(x0), dtype=np.float64) + xi0
    return v0 + p.beta * s0 - (1.0 / p.beta - p.alpha / p.t0) * x0


def run_ifb_avd(c: CompositeProblem, p: AlgoParams, x0: np.ndarray,
                y0: Optional[np.ndarray] = None, *,
                backend: Optional[str] = None) -> IterateHistory:
    """Inertial forward-backward run: iterate k lives at t_k = t0 + k*h, k >= 1.

    The identity prox is used when the nonsmooth part is absent.
    """
    if p.beta <= 0:
        raise ValueError("beta must be positive")
    x0 = np.atleast_1d(np.asarray(x0, dtype=np.float64))
    if y0 is None:
        y0 = ifb_default_y0(c, x0, p)
    y0 = np.atleast_1d(np.asarray(y0, dtype=np.float64))
    xi0 = (min_norm_subgradient(c.nonsmooth, x0) if c.nonsmooth is not None
           else np.zeros_like(x0))
    rec_idx = np.arange(0, p.iterations + 1, dtype=np.int64)
    tstart = p.t0 + p.h  # first iterate is x_1 at t_1

    mode = resolve_backend(backend)
    if mode == "numba" and _kernel_ready(c):
        from . import _kernels_numba as knb
        kind, M, vec = _smooth_kernel_args(c)
        pkind, plo, phi_, pw = _nonsmooth_kernel_args(c)
        res = knb.ifb_avd_loop(kind, M, vec, pkind, plo, phi_, pw, p.alpha, p.beta,
                               p.h, tstart, p.iterations, x0, y0, xi0, rec_idx)
    else:
        res = knp.ifb_avd_loop(c.smooth.value, c.smooth.gradient, _nonsmooth_value_fn(c),
                               _prox_fn(c), p.alpha, p.beta, p.h, tstart,
                               p.iterations, x0, y0, xi0, rec_idx)
    status, fail_k, xs, ys, xis, objs, n = res
    if status == 1:
        raise SolverError("non-finite iterate in ifb_avd", fail_k + 1)
    if status == 2:
        raise SolverError("divergence in ifb_avd (objective above 1e12)", fail_k + 1)
    ks = np.arange(1, n + 1, dtype=np.int64)
    return IterateHistory(
        ks=ks, ts=p.t0 + ks * p.h, xs=xs[:n].copy(), ys=ys[:n].copy(),
        objectives=objs[:n].copy(), best_so_far=np.minimum.accumulate(objs[:n]),
        prox_residuals=xis[:n].copy(), label=c.label)


def _baseline_history(c, p, x0, res, with_ys, label):
    status, fail_k, *arrays, n = res
    if with_ys:
        xs, ys, xis, objs = arrays
    else:
        xs, xis, objs = arrays
        ys = np.zeros_like(xs)
    if status != 0:
        msg = "non-finite iterate" if status == 1 else "divergence (objective above 1e12)"
        raise SolverError(f"{msg} in {label}", fail_k)
    xi0 = (min_norm_subgradient(c.nonsmooth, x0) if c.nonsmooth is not None
           else np.zeros_like(x0))
    obj0 = c.objective(x0)
    xs = np.vstack([x0[None, :], xs[:n]])
    ys = np.vstack([x0[None, :], ys[:n]])
    xis = np.vstack([xi0[None, :], xis[:n]])
    objs = np.concatenate([[obj0], objs[:n]])
    ks = np.arange(0, n + 1, dtype=np.int64)
    return IterateHistory(
        ks=ks, ts=p.t0 + ks * p.h, xs=xs, ys=ys, objectives=objs,
        best_so_far=np.minimum.accumulate(objs), prox_residuals=xis, label=c.label)


def run_fista(c: CompositeProblem, p: AlgoParams, x0: np.ndarray, *,
              backend: Optional[str] = None) -> IterateHistory:
    """Accelerated proximal gradient with step 1/L; requires p.lipschitz."""
    if p.lipschitz is None:
        raise ValueError("fista needs the gradient Lipschitz constant (AlgoParams.lipschitz)")
    x0 = np.atleast_1d(np.asarray(x0, dtype=np.float64))
    mode = resolve_backend(backend)
    if mode == "numba" and _kernel_ready(c):
        from . import _kernels_numba as knb
        kind, M, vec = _smooth_kernel_args(c)
        pkind, plo, phi_, pw = _nonsmooth_kernel_args(c)
        res = knb.fista_loop(kind, M, vec, pkind, plo, phi_, pw, p.lipschitz,
                             p.iterations, x0)
    else:
        res = knp.fista_loop(c.smooth.value, c.smooth.gradient, _nonsmooth_value_fn(c),
                             _prox_fn(c), p.lipschitz, p.iterations, x0)
    return _baseline_history(c, p, x0, res, True, "fista")


def run_forward_backward(c: CompositeProblem, p: AlgoParams, x0: np.ndarray, *,
                         backend: Optional[str] = None) -> IterateHistory:
    """Unaccelerated proximal gradient with step 1/L; objectives are nonincreasing."""
    if p.lipschitz is None:
        raise ValueError("forward-backward needs the gradient Lipschitz constant "
                         "(AlgoParams.lipschitz)")
    x0 = np.atleast_1d(np.asarray(x0, dtype=np.float64))
    mode = resolve_backend(backend)
    if mode == "numba" and _kernel_ready(c):
        from . import _kernels_numba as knb
        kind, M, vec = _smooth_kernel_args(c)
        pkind, plo, phi_, pw = _nonsmooth_kernel_args(c)
        res = knb.fb_loop(kind, M, vec, pkind, plo, phi_, pw, p.lipschitz,
                          p.iterations, x0)
    else:
        res = knp.fb_loop(c.smooth.value, c.smooth.gradient, _nonsmooth_value_fn(c),
                          _prox_fn(c), p.lipschitz, p.iterations, x0)
    return _baseline_history(c, p, x0, res, False, "forward-backward")


def fista_reference_value(c: CompositeProblem, iterations: int, *,
                          backend: Optional[str] = None) -> float:
    """History-free long FISTA solve used to pin composite optimum values."""
    L = c.smooth.lipschitz_grad
    if L is None or L <= 0:
        raise ValueError("reference solve needs a positive Lipschitz constant")
    x0 = np.zeros(c.dim)
    mode = resolve_backend(backend)
    if mode == "numba" and _kernel_ready(c):
        from . import _kernels_numba as knb
        kind, M, vec = _smooth_kernel_args(c)
        pkind, plo, phi_, pw = _nonsmooth_kernel_args(c)
        return float(knb.fista_best_value(kind, M, vec, pkind, plo, phi_, pw, L,
                                          iterations, x0))
    return float(knp.fista_best_value(c.smooth.value, c.smooth.gradient,
                                      _nonsmooth_value_fn(c), _prox_fn(c), L,
                                      iterations, x0))
