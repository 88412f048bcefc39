"""Integrators for the damped inertial systems.

Second-order form (fixed-step RK4 on (x, xdot)):

    xdd + (alpha/t) xd + beta * Hess(x) xd + grad(x) = g(t)

with g = 0 (plain run), beta = 0 (vanishing viscous damping only), or a
declared perturbation g.  First-order Hessian-free form on (x, y):

    xd + beta*grad(x) - (1/beta - alpha/t) x + y/beta = 0
    yd - (1/beta - alpha/t + alpha*beta/t^2) x + y/beta = 0

For a composite objective the nonsmooth analog is realized by the
explicit-implicit prox recursion on the uniform grid t_k = t0 + k*step.
All runs are deterministic: fixed step, no adaptivity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _kernels_numpy as knp
from .backend import resolve_backend
from .problems import (CompositeProblem, SmoothFunction, batch_gradient,
                       min_norm_subgradient)

PERTURBATION_CLASSES = ("integrable_t_weighted", "integrable", "none")


class IntegrationError(RuntimeError):
    """Non-finite state encountered; carries the failure time."""

    def __init__(self, message: str, t_fail: float):
        super().__init__(f"{message} (t = {t_fail:.6g})")
        self.t_fail = t_fail


@dataclass(frozen=True)
class DynamicsParams:
    """Run parameters for the continuous systems.

    ``sample_every=None`` resolves to max(1, floor(0.01/step)) so stored
    trajectories stay desk-sized.
    """

    alpha: float
    beta: float
    t0: float
    x0: np.ndarray
    v0: np.ndarray
    t_end: float
    step: float
    sample_every: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "x0", np.atleast_1d(np.asarray(self.x0, dtype=np.float64)))
        object.__setattr__(self, "v0", np.atleast_1d(np.asarray(self.v0, dtype=np.float64)))
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")
        if self.t0 <= 0:
            raise ValueError("t0 must be positive (the damping coefficient is singular at 0)")
        if self.t_end <= self.t0:
            raise ValueError("t_end must exceed t0")
        if self.step <= 0 or self.step >= self.t_end - self.t0:
            raise ValueError("step must lie in (0, t_end - t0)")
        if self.x0.shape != self.v0.shape:
            raise ValueError("x0 and v0 dimensions disagree")
        if self.sample_every is not None and self.sample_every < 1:
            raise ValueError("sample_every must be a positive integer")

    @property
    def thin(self) -> int:
        if self.sample_every is not None:
            return int(self.sample_every)
        return max(1, int(np.floor(0.01 / self.step)))

    @property
    def n_steps(self) -> int:
        return max(1, int(round((self.t_end - self.t0) / self.step)))

    def sample_indices(self) -> np.ndarray:
        idx = np.arange(0, self.n_steps + 1, self.thin, dtype=np.int64)
        if idx[-1] != self.n_steps:
            idx = np.append(idx, self.n_steps)
        return idx


@dataclass(frozen=True)
class FirstOrderState:
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        if np.asarray(self.x).shape != np.asarray(self.y).shape:
            raise ValueError("x and y dimensions disagree")


@dataclass(frozen=True)
class Perturbation:
    """Forcing term g(t) with its declared integrability class.

    ``power=(coeff, exponent)`` marks g(t) = coeff * t**exponent * direction,
    which the compiled path understands; any other g runs on the numpy path.
    """

    g: Callable[[float], np.ndarray]
    declared_class: str = "none"
    power: Optional[tuple[float, float]] = None
    direction: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.declared_class not in PERTURBATION_CLASSES:
            raise ValueError(f"declared_class must be one of {PERTURBATION_CLASSES}")


def power_perturbation(coeff: float, exponent: float, dim: int,
                       direction: Optional[np.ndarray] = None) -> Perturbation:
    """g(t) = coeff * t**exponent * direction (direction defaults to all-ones)."""
    if direction is None:
        direction = np.ones(dim)
    direction = np.asarray(direction, dtype=np.float64)
    if exponent < -2.0:
        declared = "integrable_t_weighted"  # int t*|g| dt < inf
    elif exponent < -1.0:
        declared = "integrable"
    else:
        declared = "none"
    return Perturbation(
        g=lambda t, c=coeff, q=exponent, u=direction: c * t**q * u,
        declared_class=declared,
        power=(float(coeff), float(exponent)),
        direction=direction,
    )


@dataclass(frozen=True)
class TrajectoryMeta:
    system: str
    params: DynamicsParams
    problem_label: str = ""
    extras: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    xs: np.ndarray
    vs: np.ndarray
    phi_vals: np.ndarray
    grad_norms: np.ndarray
    meta: TrajectoryMeta

    def __post_init__(self):
        n = self.times.size
        if not (self.xs.shape[0] == self.vs.shape[0] == self.phi_vals.size == self.grad_norms.size == n):
            raise ValueError("trajectory field lengths disagree")
        if n > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")

    @property
    def dim(self) -> int:
        return self.xs.shape[1]


def _numba_mod():
    from . import _kernels_numba as knb  # deferred: importing triggers jit machinery
    return knb


def _kernel_args(f: SmoothFunction):
    k = f.kernel
    return k.kind, np.ascontiguousarray(k.mat), np.ascontiguousarray(k.vec)


def _wrap(system: str, f, p: DynamicsParams, res, label="", extras=None) -> Trajectory:
    status, fail_k, times, xs, vs, phis, gnorms, n = res
    if status == 1:
        raise IntegrationError(f"non-finite state in {system} run", p.t0 + fail_k * p.step)
    meta = TrajectoryMeta(system=system, params=p, problem_label=label, extras=extras or {})
    return Trajectory(times[:n].copy(), xs[:n].copy(), vs[:n].copy(),
                      phis[:n].copy(), gnorms[:n].copy(), meta)


def _run_second_order(system: str, f: SmoothFunction, p: DynamicsParams, beta: float,
                      g: Optional[Perturbation], backend: Optional[str]) -> Trajectory:
    mode = resolve_backend(backend)
    sample_idx = p.sample_indices()
    g_fast = g is None or g.power is not None
    if mode == "numba" and f.kernel is not None and g_fast:
        knb = _numba_mod()
        kind, M, vec = _kernel_args(f)
        if g is None:
            gkind, gc, gq = 0, 0.0, 0.0
            gdir = np.zeros(p.x0.size)
        else:
            gkind, (gc, gq) = 1, g.power
            gdir = np.ascontiguousarray(g.direction if g.direction is not None
                                        else np.ones(p.x0.size))
        res = knb.rk4_second_order(kind, M, vec, p.alpha, beta, p.t0, p.step,
                                   p.n_steps, p.x0, p.v0, gkind, gc, gq, gdir, sample_idx)
    else:
        hvp = f.hvp if beta != 0.0 else None
        res = knp.rk4_second_order(f.value, f.gradient, hvp, p.alpha, beta, p.t0,
                                   p.step, p.n_steps, p.x0, p.v0,
                                   g.g if g is not None else None, sample_idx)
    return _wrap(system, f, p, res)


def integrate_avd(f: SmoothFunction, p: DynamicsParams, *,
                  backend: Optional[str] = None) -> Trajectory:
    """Vanishing viscous damping only; p.beta is ignored."""
    return _run_second_order("avd", f, p, 0.0, None, backend)


def integrate_dinavd_2nd(f: SmoothFunction, p: DynamicsParams, *,
                         backend: Optional[str] = None) -> Trajectory:
    """Second-order form with Hessian damping; requires f.hvp."""
    if p.beta != 0.0 and f.hvp is None:
        raise ValueError("f has no Hessian-vector product; use integrate_dinavd_1st, "
                         "the Hessian-free first-order form")
    return _run_second_order("dinavd2", f, p, p.beta, None, backend)


def integrate_perturbed(f: SmoothFunction, p: DynamicsParams, g: Perturbation, *,
                        backend: Optional[str] = None) -> Trajectory:
    """Second-order form with forcing g(t)."""
    if p.beta != 0.0 and f.hvp is None:
        raise ValueError("f has no Hessian-vector product; use integrate_dinavd_1st, "
                         "the Hessian-free first-order form")
    return _run_second_order("perturbed", f, p, p.beta, g, backend)


def first_order_y0(f: SmoothFunction, p: DynamicsParams) -> np.ndarray:
    """Auxiliary initial value matching the change of variables of the proof:
    y(t0) = -beta*(v0 + beta*grad(x0)) + (1 - beta*alpha/t0)*x0.
    """
    g0 = np.asarray(f.gradient(p.x0), dtype=np.float64)
    return -p.beta * (p.v0 + p.beta * g0) + (1.0 - p.beta * p.alpha / p.t0) * p.x0


def integrate_dinavd_1st(f: SmoothFunction, p: DynamicsParams, *,
                         backend: Optional[str] = None) -> Trajectory:
    """Hessian-free (x, y) form; velocities recovered pointwise from the x-equation."""
    if p.beta <= 0.0:
        raise ValueError("beta must be positive: the first-order reformulation is "
                         "singular at beta = 0")
    mode = resolve_backend(backend)
    sample_idx = p.sample_indices()
    y0 = first_order_y0(f, p)
    if mode == "numba" and f.kernel is not None:
        knb = _numba_mod()
        kind, M, vec = _kernel_args(f)
        res = knb.rk4_first_order(kind, M, vec, p.alpha, p.beta, p.t0, p.step,
                                  p.n_steps, p.x0, y0, sample_idx)
    else:
        res = knp.rk4_first_order(f.value, f.gradient, p.alpha, p.beta, p.t0,
                                  p.step, p.n_steps, p.x0, y0, sample_idx)
    status, fail_k, times, xs, ys, vs, phis, gnorms, n = res
    traj = _wrap("dinavd1", f, p,
                 (status, fail_k, times, xs, vs, phis, gnorms, n),
                 extras={"ys": ys[:n].copy()})
    return traj


def first_order_states(traj: Trajectory) -> list[FirstOrderState]:
    """(x, y) pairs of a first-order or structured run, one per stored sample."""
    ys = traj.meta.extras.get("ys")
    if ys is None:
        raise ValueError("trajectory carries no auxiliary y-series "
                         "(produced only by dinavd1 and gdinavd runs)")
    return [FirstOrderState(x, y) for x, y in zip(traj.xs, ys)]


def gdinavd_y0(c: CompositeProblem, p: DynamicsParams) -> tuple[np.ndarray, np.ndarray]:
    """Initial (y0, xi0) for the prox-discretized inclusion.

    Uses the minimal-norm subgradient xi0 of the nonsmooth part at x0 and the
    sign convention of the structured system (auxiliary variable = -y/beta
    relative to the plain first-order form):
    y0 = v0 + beta*(grad_psi(x0) + xi0) - (1/beta - alpha/t0)*x0.
    """
    xi0 = (min_norm_subgradient(c.nonsmooth, p.x0) if c.nonsmooth is not None
           else np.zeros_like(p.x0))
    s0 = np.asarray(c.smooth.gradient(p.x0), dtype=np.float64) + xi0
    y0 = p.v0 + p.beta * s0 - (1.0 / p.beta - p.alpha / p.t0) * p.x0
    return y0, xi0


def _run_ifb_kernel(c: CompositeProblem, alpha, beta, h, tstart, n_updates,
                    x0, y0, xi0, rec_idx, backend):
    mode = resolve_backend(backend)
    smooth = c.smooth
    ns = c.nonsmooth
    fast = (smooth.kernel is not None and (ns is None or ns.kernel is not None))
    if mode == "numba" and fast:
        knb = _numba_mod()
        kind, M, vec = _kernel_args(smooth)
        if ns is None or ns.kernel is None:
            pkind, plo, phi_, pw = 0, np.zeros(0), np.zeros(0), 0.0
        else:
            pk = ns.kernel
            pkind, pw = pk.kind, pk.weight
            plo = np.ascontiguousarray(pk.lo)
            phi_ = np.ascontiguousarray(pk.hi)
        return knb.ifb_avd_loop(kind, M, vec, pkind, plo, phi_, pw, alpha, beta,
                                h, tstart, n_updates, x0, y0, xi0, rec_idx)
    ns_value = ns.value if ns is not None else (lambda x: 0.0)
    prox = ns.prox if ns is not None else (lambda v, tau: v)
    return knp.ifb_avd_loop(smooth.value, smooth.gradient, ns_value, prox, alpha,
                            beta, h, tstart, n_updates, x0, y0, xi0, rec_idx)


def integrate_gdinavd(c: CompositeProblem, p: DynamicsParams, *,
                      backend: Optional[str] = None) -> Trajectory:
    """Prox-discretized structured dynamic on the grid t_k = t0 + k*step.

    phi_vals holds the composite objective; grad_norms the norm of the
    realized composite subgradient grad_psi(x) + xi.
    """
    if c.nonsmooth is None or c.nonsmooth.prox is None:
        raise ValueError("composite problem has no prox-capable nonsmooth part")
    if p.beta <= 0.0:
        raise ValueError("beta must be positive for the structured dynamic")
    y0, xi0 = gdinavd_y0(c, p)
    rec_idx = p.sample_indices()
    res = _run_ifb_kernel(c, p.alpha, p.beta, p.step, p.t0, p.n_steps,
                          p.x0, y0, xi0, rec_idx, backend)
    status, fail_k, xs, ys, xis, objs, n = res
    if status == 1:
        raise IntegrationError("non-finite state in gdinavd run", p.t0 + fail_k * p.step)
    if status == 2:
        raise IntegrationError("divergence in gdinavd run (objective above 1e12)",
                               p.t0 + fail_k * p.step)
    xs, ys, xis, objs = xs[:n].copy(), ys[:n].copy(), xis[:n].copy(), objs[:n].copy()
    times = p.t0 + rec_idx[:n].astype(np.float64) * p.step
    grads = batch_gradient(c.smooth, xs)
    subgrads = grads + xis
    # xdot from the structured x-equation, evaluated at the stored (x, y, xi)
    coeff = (1.0 / p.beta - p.alpha / times)[:, None]
    vs = -p.beta * subgrads + coeff * xs + ys
    gnorms = np.linalg.norm(subgrads, axis=1)
    meta = TrajectoryMeta(system="gdinavd", params=p, problem_label=c.label,
                          extras={"ys": ys, "xis": xis})
    return Trajectory(times, xs, vs, objs, gnorms, meta)
