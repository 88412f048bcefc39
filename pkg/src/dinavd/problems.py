"""Objective functions, proximal operators, and the desk-scale instance catalog.

Smooth objectives expose value / gradient / optional Hessian-vector product;
nonsmooth ones expose value / prox.  Catalog instances additionally carry a
kernel spec (a small integer tag plus parameter arrays) that lets the hot
integrator loops run compiled; user-defined functions without a kernel spec
are handled by the pure-numpy fallback path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .rng import XorShift64Star

# Smooth kernel kinds (see _kernels_numba / _kernels_numpy)
SK_ZERO = 0      # constant zero function
SK_DIAG_QUAD = 1  # 0.5 * sum(vec_i * x_i^2)
SK_DENSE_QUAD = 2  # 0.5 * x'Mx + vec'x
SK_QUARTIC = 3   # 0.25 * sum(x_i^4)
SK_LSTSQ = 4     # 0.5 * ||Mx - vec||^2

# Prox kernel kinds
PK_NONE = 0  # identity (phi == 0)
PK_L1 = 1    # weight * ||x||_1
PK_BOX = 2   # indicator of [lo, hi]

_EMPTY_MAT = np.zeros((0, 0))
_EMPTY_VEC = np.zeros(0)
_EMPTY_MAT.flags.writeable = False
_EMPTY_VEC.flags.writeable = False


@dataclass(frozen=True)
class SmoothKernelSpec:
    kind: int
    mat: np.ndarray = _EMPTY_MAT
    vec: np.ndarray = _EMPTY_VEC


@dataclass(frozen=True)
class ProxKernelSpec:
    kind: int
    lo: np.ndarray = _EMPTY_VEC
    hi: np.ndarray = _EMPTY_VEC
    weight: float = 0.0


@dataclass(frozen=True)
class SmoothFunction:
    """Twice-differentiable convex objective.

    ``hvp(x, u)`` is the Hessian-vector product; it may be absent, in which
    case only the first-order dynamics apply.  ``lipschitz_grad`` and
    ``strong_convexity`` are optional moduli, ``minimizer``/``min_value``
    optional optimum metadata.
    """

    dim: int
    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    hvp: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    lipschitz_grad: Optional[float] = None
    strong_convexity: Optional[float] = None
    minimizer: Optional[np.ndarray] = None
    min_value: Optional[float] = None
    kernel: Optional[SmoothKernelSpec] = None

    def __post_init__(self):
        if self.dim <= 0:
            raise ValueError("dim must be a positive integer")
        if (self.lipschitz_grad is not None and self.strong_convexity is not None
                and self.strong_convexity > self.lipschitz_grad + 1e-12):
            raise ValueError("strong convexity modulus exceeds gradient Lipschitz constant")


@dataclass(frozen=True)
class ProxableFunction:
    """Proper convex lsc function given through its value and prox map.

    ``prox(v, tau)`` returns ``argmin_u  tau*phi(u) + 0.5*||u - v||^2``.
    """

    dim: int
    value: Callable[[np.ndarray], float]
    prox: Callable[[np.ndarray, float], np.ndarray]
    kernel: Optional[ProxKernelSpec] = None


@dataclass(frozen=True)
class CompositeProblem:
    """Structured objective  F = smooth + nonsmooth  (nonsmooth may be absent)."""

    smooth: SmoothFunction
    nonsmooth: Optional[ProxableFunction] = None
    known_opt_value: Optional[float] = None
    label: str = ""

    def __post_init__(self):
        if self.nonsmooth is not None and self.nonsmooth.dim != self.smooth.dim:
            raise ValueError("smooth and nonsmooth dimensions disagree")

    @property
    def dim(self) -> int:
        return self.smooth.dim

    def objective(self, x: np.ndarray) -> float:
        f = self.smooth.value(x)
        if self.nonsmooth is not None:
            f += self.nonsmooth.value(x)
        return float(f)


# ---------------------------------------------------------------------------
# proximal operators

def prox_l1(v: np.ndarray, tau: float) -> np.ndarray:
    """Soft-thresholding: minimizes ``tau*||u||_1 + 0.5*||u - v||^2``."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    v = np.asarray(v, dtype=np.float64)
    return np.sign(v) * np.maximum(np.abs(v) - tau, 0.0)


def prox_box(v: np.ndarray, tau: float, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Projection onto [lo, hi]; independent of tau (indicator prox)."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    v = np.asarray(v, dtype=np.float64)
    lo = np.broadcast_to(np.asarray(lo, dtype=np.float64), v.shape)
    hi = np.broadcast_to(np.asarray(hi, dtype=np.float64), v.shape)
    if np.any(lo > hi):
        raise ValueError("box is empty: lo > hi in some coordinate")
    return np.minimum(np.maximum(v, lo), hi)


def min_norm_subgradient(phi: ProxableFunction, x: np.ndarray) -> np.ndarray:
    """Minimal-norm element of the subdifferential of phi at x.

    Closed form for the catalog kernels; for a generic prox the limit
    ``(x - prox(x, tau)) / tau`` as tau -> 0 is approximated with tau=1e-8.
    """
    x = np.asarray(x, dtype=np.float64)
    k = phi.kernel
    if k is not None:
        if k.kind == PK_NONE:
            return np.zeros_like(x)
        if k.kind == PK_L1:
            return k.weight * np.sign(x)
        if k.kind == PK_BOX:
            # 0 is in the normal cone at every feasible point
            if np.any(x < k.lo - 1e-12) or np.any(x > k.hi + 1e-12):
                raise ValueError("point outside the box domain")
            return np.zeros_like(x)
    tau = 1e-8
    return (x - phi.prox(x, tau)) / tau


# ---------------------------------------------------------------------------
# derivative checking

FD_REL_STEP = 1e-6  # h_fd = 1e-6 * (1 + ||x||)


def _fd_gradient(value, x: np.ndarray) -> np.ndarray:
    h = FD_REL_STEP * (1.0 + np.linalg.norm(x))
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (value(x + e) - value(x - e)) / (2.0 * h)
    return g


def _fd_hvp(gradient, x: np.ndarray, u: np.ndarray) -> np.ndarray:
    h = FD_REL_STEP * (1.0 + np.linalg.norm(x))
    return (gradient(x + h * u) - gradient(x - h * u)) / (2.0 * h)


@dataclass
class DerivativeCheck:
    point: np.ndarray
    grad_rel_error: float
    hvp_rel_error: Optional[float]
    passed: bool


@dataclass
class DerivativeReport:
    checks: list[DerivativeCheck]
    tol: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def check_derivatives(f: SmoothFunction, points, tol: float = 1e-5,
                      hvp_tol: Optional[float] = None) -> DerivativeReport:
    """Compare gradient (and hvp when present) against central differences.

    Relative error is ``||fd - exact|| / (1 + ||exact||)``.  NaN anywhere in
    an evaluation marks the point as failed.
    """
    if hvp_tol is None:
        hvp_tol = 10.0 * tol
    checks = []
    for p in points:
        x = np.asarray(p, dtype=np.float64)
        g = np.asarray(f.gradient(x), dtype=np.float64)
        g_fd = _fd_gradient(f.value, x)
        ok = bool(np.all(np.isfinite(g)) and np.all(np.isfinite(g_fd)))
        gerr = float(np.linalg.norm(g_fd - g) / (1.0 + np.linalg.norm(g))) if ok else math.inf
        herr = None
        if f.hvp is not None:
            u = np.ones_like(x)
            hv = np.asarray(f.hvp(x, u), dtype=np.float64)
            hv_fd = _fd_hvp(f.gradient, x, u)
            hok = bool(np.all(np.isfinite(hv)) and np.all(np.isfinite(hv_fd)))
            herr = float(np.linalg.norm(hv_fd - hv) / (1.0 + np.linalg.norm(hv))) if hok else math.inf
            ok = ok and hok
        passed = ok and gerr < tol and (herr is None or herr < hvp_tol)
        checks.append(DerivativeCheck(x, gerr, herr, passed))
    return DerivativeReport(checks, tol)


# ---------------------------------------------------------------------------
# batch evaluation helpers (vectorized on catalog kernels, loop otherwise)

def batch_value(f: SmoothFunction, xs: np.ndarray) -> np.ndarray:
    k = f.kernel
    if k is not None:
        if k.kind == SK_ZERO:
            return np.zeros(xs.shape[0])
        if k.kind == SK_DIAG_QUAD:
            return 0.5 * (xs * xs) @ k.vec
        if k.kind == SK_DENSE_QUAD:
            return 0.5 * np.einsum("ij,ij->i", xs @ k.mat, xs) + xs @ k.vec
        if k.kind == SK_QUARTIC:
            return 0.25 * np.sum(xs**4, axis=1)
        if k.kind == SK_LSTSQ:
            r = xs @ k.mat.T - k.vec
            return 0.5 * np.einsum("ij,ij->i", r, r)
    return np.array([f.value(x) for x in xs])


def batch_gradient(f: SmoothFunction, xs: np.ndarray) -> np.ndarray:
    k = f.kernel
    if k is not None:
        if k.kind == SK_ZERO:
            return np.zeros_like(xs)
        if k.kind == SK_DIAG_QUAD:
            return xs * k.vec
        if k.kind == SK_DENSE_QUAD:
            return xs @ k.mat + k.vec
        if k.kind == SK_QUARTIC:
            return xs**3
        if k.kind == SK_LSTSQ:
            return (xs @ k.mat.T - k.vec) @ k.mat
    return np.stack([np.asarray(f.gradient(x)) for x in xs])


# ---------------------------------------------------------------------------
# catalog construction

CATALOG_IDS = ("quad1d", "illcond2d", "degenerate2d", "quartic1d", "abs1d", "lasso", "boxqp")

# Reference-solve protocol for composite optima (see docs/catalog_generators.txt):
# FISTA with step 1/L for REF_FISTA_ITERS iterations from x0 = 0, where L is the
# largest eigenvalue of the smooth Hessian obtained by REF_POWER_ITERS power
# iterations started from the normalized all-ones vector.
REF_FISTA_ITERS = 1_000_000
REF_POWER_ITERS = 10_000


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.flags.writeable = False
    return a


def _diag_quad(diag) -> SmoothFunction:
    d = _freeze(np.atleast_1d(np.asarray(diag, dtype=np.float64)))
    n = d.size
    return SmoothFunction(
        dim=n,
        value=lambda x: float(0.5 * np.dot(d, np.asarray(x) ** 2)),
        gradient=lambda x: d * np.asarray(x, dtype=np.float64),
        hvp=lambda x, u: d * np.asarray(u, dtype=np.float64),
        lipschitz_grad=float(d.max()),
        strong_convexity=float(d.min()),
        minimizer=_freeze(np.zeros(n)),
        min_value=0.0,
        kernel=SmoothKernelSpec(SK_DIAG_QUAD, vec=d),
    )


def _dense_quad(Q, b=None) -> SmoothFunction:
    Q = _freeze(np.asarray(Q, dtype=np.float64))
    n = Q.shape[0]
    b = _freeze(np.zeros(n) if b is None else np.asarray(b, dtype=np.float64))
    eigs = np.linalg.eigvalsh(Q)
    has_min = eigs.min() > 1e-12 or np.linalg.norm(b) == 0.0
    minimizer = None
    min_value = None
    if has_min:
        if eigs.min() > 1e-12:
            xstar = np.linalg.solve(Q, -b)
        else:
            xstar = np.zeros(n)  # b == 0: any kernel point minimizes; pick the origin
        minimizer = _freeze(xstar)
        min_value = float(0.5 * xstar @ Q @ xstar + b @ xstar)
    return SmoothFunction(
        dim=n,
        value=lambda x: float(0.5 * np.asarray(x) @ Q @ np.asarray(x) + b @ np.asarray(x)),
        gradient=lambda x: Q @ np.asarray(x, dtype=np.float64) + b,
        hvp=lambda x, u: Q @ np.asarray(u, dtype=np.float64),
        lipschitz_grad=float(eigs.max()),
        strong_convexity=float(max(eigs.min(), 0.0)),
        minimizer=minimizer,
        min_value=min_value,
        kernel=SmoothKernelSpec(SK_DENSE_QUAD, mat=Q, vec=b),
    )


def _quartic1d() -> SmoothFunction:
    return SmoothFunction(
        dim=1,
        value=lambda x: float(0.25 * np.sum(np.asarray(x) ** 4)),
        gradient=lambda x: np.asarray(x, dtype=np.float64) ** 3,
        hvp=lambda x, u: 3.0 * np.asarray(x) ** 2 * np.asarray(u, dtype=np.float64),
        minimizer=_freeze(np.zeros(1)),
        min_value=0.0,
        kernel=SmoothKernelSpec(SK_QUARTIC),
    )


def _zero_smooth(n: int) -> SmoothFunction:
    return SmoothFunction(
        dim=n,
        value=lambda x: 0.0,
        gradient=lambda x: np.zeros(n),
        hvp=lambda x, u: np.zeros(n),
        lipschitz_grad=0.0,
        strong_convexity=0.0,
        minimizer=_freeze(np.zeros(n)),
        min_value=0.0,
        kernel=SmoothKernelSpec(SK_ZERO),
    )


def _lstsq(A: np.ndarray, b: np.ndarray) -> SmoothFunction:
    A = _freeze(A)
    b = _freeze(b)
    n = A.shape[1]
    L = _power_iteration_gram(A)
    return SmoothFunction(
        dim=n,
        value=lambda x: float(0.5 * np.sum((A @ np.asarray(x) - b) ** 2)),
        gradient=lambda x: A.T @ (A @ np.asarray(x, dtype=np.float64) - b),
        hvp=lambda x, u: A.T @ (A @ np.asarray(u, dtype=np.float64)),
        lipschitz_grad=L,
        strong_convexity=0.0,
        kernel=SmoothKernelSpec(SK_LSTSQ, mat=A, vec=b),
    )


def _l1(n: int, weight: float) -> ProxableFunction:
    return ProxableFunction(
        dim=n,
        value=lambda x: float(weight * np.sum(np.abs(x))),
        prox=lambda v, tau: prox_l1(v, weight * tau),
        kernel=ProxKernelSpec(PK_L1, weight=weight),
    )


def _box(lo: np.ndarray, hi: np.ndarray) -> ProxableFunction:
    lo = _freeze(lo)
    hi = _freeze(hi)

    def value(x):
        x = np.asarray(x)
        inside = np.all(x >= lo - 1e-12) and np.all(x <= hi + 1e-12)
        return 0.0 if inside else math.inf

    return ProxableFunction(
        dim=lo.size,
        value=value,
        prox=lambda v, tau: prox_box(v, tau, lo, hi),
        kernel=ProxKernelSpec(PK_BOX, lo=lo, hi=hi),
    )


def _power_iteration_gram(A: np.ndarray, iters: int = REF_POWER_ITERS) -> float:
    """Largest eigenvalue of A'A by power iteration from the all-ones direction."""
    n = A.shape[1]
    v = np.ones(n) / math.sqrt(n)
    lam = 0.0
    for _ in range(iters):
        w = A.T @ (A @ v)
        lam = float(v @ w)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
    return lam


def _power_iteration_sym(Q: np.ndarray, iters: int = REF_POWER_ITERS) -> float:
    n = Q.shape[0]
    v = np.ones(n) / math.sqrt(n)
    lam = 0.0
    for _ in range(iters):
        w = Q @ v
        lam = float(v @ w)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
    return lam


def _reference_opt_value(c: CompositeProblem, iters: int = REF_FISTA_ITERS) -> float:
    """Long FISTA reference solve pinning the composite optimum value."""
    from .solvers import fista_reference_value  # local import: avoid cycle at module load

    return fista_reference_value(c, iters)


def make_lasso(seed: int, m: int = 20, n: int = 50, weight: float = 0.1,
               with_opt: bool = True) -> CompositeProblem:
    """Seeded least-squares + l1 instance.

    Generation order (one xorshift64* stream, documented in
    docs/catalog_generators.txt): A row-major with entries sym/sqrt(m); 5
    distinct support indices; signed magnitudes in [1, 2); noise vector.
    ``b = A @ x_true + 0.01 * noise``.
    """
    rng = XorShift64Star(seed)
    A = rng.fill_sym((m, n)) / math.sqrt(m)
    k = min(5, n)
    support = rng.distinct_indices(k, n)
    x_true = np.zeros(n)
    for j in support:
        mag = 1.0 + rng.uniform()
        sign = -1.0 if rng.uniform() < 0.5 else 1.0
        x_true[j] = sign * mag
    noise = rng.fill_sym(m)
    b = A @ x_true + 0.01 * noise
    smooth = _lstsq(A, b)
    prob = CompositeProblem(smooth, _l1(n, weight), label=f"lasso(seed={seed},m={m},n={n})")
    if with_opt:
        fstar = _reference_opt_value(prob)
        prob = CompositeProblem(smooth, prob.nonsmooth, known_opt_value=fstar, label=prob.label)
    return prob


def _make_boxqp(seed: int, n: int = 8) -> CompositeProblem:
    rng = XorShift64Star(seed)
    M = rng.fill_sym((n, n))
    Q = M.T @ M / n + np.eye(n)
    c = 2.0 * rng.fill_sym(n)
    smooth = _dense_quad(Q, c)
    # L from the reference power iteration, matching the documented protocol
    smooth = SmoothFunction(
        dim=n, value=smooth.value, gradient=smooth.gradient, hvp=smooth.hvp,
        lipschitz_grad=_power_iteration_sym(Q), strong_convexity=smooth.strong_convexity,
        minimizer=None, min_value=None, kernel=smooth.kernel,
    )
    lo = -np.ones(n)
    hi = np.ones(n)
    prob = CompositeProblem(smooth, _box(lo, hi), label=f"boxqp(seed={seed},n={n})")
    fstar = _reference_opt_value(prob)
    return CompositeProblem(smooth, prob.nonsmooth, known_opt_value=fstar, label=prob.label)


@lru_cache(maxsize=None)
def _cached_instance(catalog_id: str, seed: int) -> CompositeProblem:
    if catalog_id == "quad1d":
        return CompositeProblem(_diag_quad([1.0]), known_opt_value=0.0, label="quad1d")
    if catalog_id == "illcond2d":
        return CompositeProblem(_diag_quad([1.0, 1000.0]), known_opt_value=0.0, label="illcond2d")
    if catalog_id == "degenerate2d":
        return CompositeProblem(_dense_quad([[1.0, 1.0], [1.0, 1.0]]),
                                known_opt_value=0.0, label="degenerate2d")
    if catalog_id == "quartic1d":
        return CompositeProblem(_quartic1d(), known_opt_value=0.0, label="quartic1d")
    if catalog_id == "abs1d":
        return CompositeProblem(_zero_smooth(1), _l1(1, 1.0), known_opt_value=0.0, label="abs1d")
    if catalog_id == "lasso":
        return make_lasso(seed)
    if catalog_id == "boxqp":
        return _make_boxqp(seed)
    raise AssertionError  # guarded by make_instance


def make_instance(catalog_id: str, seed: int = 0) -> CompositeProblem:
    """Build a catalog instance.  Instances are immutable and cached per (id, seed)."""
    if catalog_id not in CATALOG_IDS:
        raise ValueError(
            f"unknown catalog id {catalog_id!r}; valid ids: {', '.join(CATALOG_IDS)}")
    return _cached_instance(catalog_id, int(seed))


def scaled(f: SmoothFunction, c: float) -> SmoothFunction:
    """The function c*f (c > 0), with kernel and optimum metadata carried along."""
    if c <= 0:
        raise ValueError("scale must be positive")
    kernel = None
    if f.kernel is not None:
        k = f.kernel
        if k.kind == SK_ZERO:
            kernel = k
        elif k.kind == SK_DIAG_QUAD:
            kernel = SmoothKernelSpec(k.kind, vec=_freeze(c * k.vec))
        elif k.kind == SK_DENSE_QUAD:
            kernel = SmoothKernelSpec(k.kind, mat=_freeze(c * k.mat), vec=_freeze(c * k.vec))
        # quartic / lstsq scaling is not expressible in the same kernel family
    return SmoothFunction(
        dim=f.dim,
        value=lambda x: c * f.value(x),
        gradient=lambda x: c * np.asarray(f.gradient(x), dtype=np.float64),
        hvp=(lambda x, u: c * np.asarray(f.hvp(x, u), dtype=np.float64)) if f.hvp else None,
        lipschitz_grad=None if f.lipschitz_grad is None else c * f.lipschitz_grad,
        strong_convexity=None if f.strong_convexity is None else c * f.strong_convexity,
        minimizer=f.minimizer,
        min_value=None if f.min_value is None else c * f.min_value,
        kernel=kernel,
    )
