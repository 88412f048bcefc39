"""Energy diagnostics along trajectories.

Evaluates the damped-dynamic energies

    W_theta = phi(x) + 0.5*||xd + theta*grad||^2 + theta*(beta-theta)/2*||grad||^2
    E_lam   = t*(t - beta*(lam+2-alpha))*(phi(x) - min_phi)
              + 0.5*||lam*(x - x*) + t*(xd + beta*grad)||^2
              + lam*(alpha-lam-1)/2*||x - x*||^2

audits their monotonicity (W_theta decreases for t >= alpha*theta/2; the
scaled energy (t/(t-beta))^(alpha-2) * E_lam decreases for alpha >= 3,
lam in [2, alpha-1]), accumulates the tail integrals behind the stability
estimates, and fits empirical log-log rate exponents.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .dynamics import Trajectory
from .problems import SmoothFunction, batch_gradient

GAP_FLOOR = 1e-14  # samples at the numerical floor are excluded from rate fits
AUDIT_TOL_COEFF = 0.01  # tol = 0.01 * h^2 * (1 + |series(t0)|); calibrated on quad1d at h=1e-3


def default_audit_tol(step: float, ref_value: float) -> float:
    """Monotonicity audit tolerance scaling with the squared integration step."""
    return AUDIT_TOL_COEFF * step * step * (1.0 + abs(ref_value))


def _traj_ab(traj: Trajectory) -> tuple[float, float]:
    p = traj.meta.params
    return p.alpha, p.beta


def energy_W(traj: Trajectory, f: SmoothFunction, theta: float) -> np.ndarray:
    """W_theta along the run; theta must lie in [0, beta]."""
    _, beta = _traj_ab(traj)
    if theta < 0 or theta > beta + 1e-15:
        raise ValueError(f"theta must lie in [0, beta] = [0, {beta}]")
    if theta == 0.0:
        return traj.phi_vals + 0.5 * np.sum(traj.vs**2, axis=1)
    grads = batch_gradient(f, traj.xs)
    udot = traj.vs + theta * grads
    out = traj.phi_vals + 0.5 * np.sum(udot**2, axis=1)
    if beta != theta:
        out = out + 0.5 * theta * (beta - theta) * np.sum(grads**2, axis=1)
    return out


def energy_E(traj: Trajectory, f: SmoothFunction, lam: float,
             xstar: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Anchored energy E_lam and its scaled variant (t/(t-beta))^(alpha-2)*E_lam.

    Requires alpha >= 3, lam in [2, alpha-1], and a known minimum value.
    The scaled series is NaN where t <= beta (excluded, not extrapolated).
    """
    alpha, beta = _traj_ab(traj)
    if alpha < 3:
        raise ValueError("the anchored energy needs alpha >= 3")
    if not (2.0 - 1e-12 <= lam <= alpha - 1.0 + 1e-12):
        raise ValueError(f"lambda must lie in [2, alpha-1] = [2, {alpha - 1}]")
    if f.min_value is None:
        raise ValueError("f.min_value is required")
    xstar = np.asarray(xstar, dtype=np.float64)
    t = traj.times
    gap = traj.phi_vals - f.min_value
    grads = batch_gradient(f, traj.xs)
    udot = traj.vs + beta * grads
    dev = traj.xs - xstar
    anchored = lam * dev + t[:, None] * udot
    E = (t * (t - beta * (lam + 2.0 - alpha)) * gap
         + 0.5 * np.sum(anchored**2, axis=1)
         + 0.5 * lam * (alpha - lam - 1.0) * np.sum(dev**2, axis=1))
    E_scaled = np.full_like(E, np.nan)
    ok = t > beta
    E_scaled[ok] = (t[ok] / (t[ok] - beta)) ** (alpha - 2.0) * E[ok]
    return E, E_scaled


def audit_monotone(series: Sequence[float], tol: float) -> list[tuple[int, float]]:
    """Indices i where series[i+1] - series[i] > tol, with the increment."""
    s = np.asarray(series, dtype=np.float64)
    if not np.all(np.isfinite(s)):
        raise ValueError("series must be finite")
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    inc = np.diff(s)
    bad = np.nonzero(inc > tol)[0]
    return [(int(i), float(inc[i])) for i in bad]


@dataclass(frozen=True)
class RateFit:
    slope: float
    r2: float
    n_used: int
    n_floored: int
    window: tuple[float, float]


def fit_rate(times: np.ndarray, gaps: np.ndarray,
             window: tuple[float, float]) -> RateFit:
    """Least-squares slope of log(gap) vs log(t) over the window.

    Samples with gap below the 1e-14 floor are excluded (their count is
    reported); fewer than 10 usable samples is an error.
    """
    t = np.asarray(times, dtype=np.float64)
    g = np.asarray(gaps, dtype=np.float64)
    lo, hi = window
    in_win = (t >= lo) & (t <= hi)
    floored = in_win & ~(g >= GAP_FLOOR)
    use = in_win & (g >= GAP_FLOOR)
    n_used = int(np.count_nonzero(use))
    if n_used < 10:
        raise ValueError(
            f"too few usable samples in window [{lo}, {hi}]: {n_used} above the "
            f"1e-14 floor ({int(np.count_nonzero(floored))} excluded)")
    u = np.log(t[use])
    y = np.log(g[use])
    um = u.mean()
    ym = y.mean()
    du = u - um
    dy = y - ym
    suu = float(du @ du)
    slope = float(du @ dy) / suu
    resid = dy - slope * du
    sst = float(dy @ dy)
    r2 = 1.0 if sst == 0.0 else 1.0 - float(resid @ resid) / sst
    return RateFit(slope, r2, n_used, int(np.count_nonzero(floored)), (lo, hi))


def _running_trapezoid(t: np.ndarray, y: np.ndarray) -> np.ndarray:
    inc = 0.5 * (y[1:] + y[:-1]) * np.diff(t)
    return np.concatenate([[0.0], np.cumsum(inc)])


@dataclass(frozen=True)
class TailIntegral:
    name: str
    running: np.ndarray
    total: float
    last_decade_increment: float
    last_decade_fraction: float


@dataclass(frozen=True)
class TailIntegrals:
    integrals: dict[str, TailIntegral]
    notes: list[str] = field(default_factory=list)


def tail_integrals(traj: Trajectory, f: SmoothFunction) -> TailIntegrals:
    """Running trapezoidal integrals of the stability quantities.

    t^2*||grad||^2, t*(phi - min), t*||xd||^2, (1/t)*||xd||^2; each reports
    its increment over the last decade of time as a convergence indicator.
    The value integral is omitted (with a notice) when min_value is unknown.
    """
    t = traj.times
    speed_sq = np.sum(traj.vs**2, axis=1)
    grad_sq = traj.grad_norms**2
    series = {
        "t2_grad_sq": t * t * grad_sq,
        "t_speed_sq": t * speed_sq,
        "inv_t_speed_sq": speed_sq / t,
    }
    notes: list[str] = []
    if f.min_value is not None:
        series["t_gap"] = t * (traj.phi_vals - f.min_value)
    else:
        notes.append("t_gap integral omitted: min_value unknown")
    out = {}
    t_cut = max(t[0], t[-1] / 10.0)
    i_cut = int(np.searchsorted(t, t_cut))
    for name, y in series.items():
        run = _running_trapezoid(t, y)
        total = float(run[-1])
        inc = float(run[-1] - run[min(i_cut, run.size - 1)])
        frac = inc / total if total > 0 else 0.0
        out[name] = TailIntegral(name, run, total, inc, frac)
    return TailIntegrals(out, notes)


def windowed_sup_ratio(times: np.ndarray, series: np.ndarray,
                       head: tuple[float, float], tail: tuple[float, float]) -> float:
    """sup of the series over the tail window divided by its head-window sup."""
    t = np.asarray(times, dtype=np.float64)
    s = np.asarray(series, dtype=np.float64)
    if not (head[0] < head[1] <= tail[0] < tail[1]):
        raise ValueError("windows must be ordered: head before tail")
    if head[0] < t[0] - 1e-12 or tail[1] > t[-1] + 1e-12:
        raise ValueError("windows must lie inside the sampled span")
    hm = (t >= head[0]) & (t <= head[1])
    tm = (t >= tail[0]) & (t <= tail[1])
    return float(np.max(s[tm]) / np.max(s[hm]))


def little_o_check(traj: Trajectory, f: SmoothFunction,
                   head: tuple[float, float], tail: tuple[float, float]) -> float:
    """sup over the tail window of t^2*(phi - min), divided by the head sup."""
    if f.min_value is None:
        raise ValueError("f.min_value is required")
    t = traj.times
    gap = traj.phi_vals - f.min_value
    hm = (t >= head[0]) & (t <= head[1])
    if not np.any(hm) or float(np.max(gap[hm])) < GAP_FLOOR:
        raise ValueError("head window already at the numerical floor; widen or shift windows")
    return windowed_sup_ratio(t, t * t * gap, head, tail)


@dataclass(frozen=True)
class SlopeEntry:
    window: tuple[float, float]
    slope: float
    r2: float


@dataclass
class DiagnosticsReport:
    """Evaluated energy series, audits, tail integrals, and fitted rates."""

    times: np.ndarray
    W0: np.ndarray
    Wbeta: np.ndarray
    E_lambda: np.ndarray
    E_scaled: np.ndarray
    t2_gap: np.ndarray
    t_resid: np.ndarray
    u_dot_norms: dict[float, np.ndarray]
    violations: dict[str, list[tuple[int, float]]]
    tail: Optional[TailIntegrals]
    fitted_slopes: dict[str, SlopeEntry]
    little_o_ratio: Optional[float]
    audit_tol: float
    lam: Optional[float]
    notes: list[str]

    CSV_HEADER = "t,W0,Wbeta,E_lambda,E_scaled,t2_gap,t_resid"

    def to_rows(self) -> np.ndarray:
        return np.column_stack([self.times, self.W0, self.Wbeta, self.E_lambda,
                                self.E_scaled, self.t2_gap, self.t_resid])


def _audit_from(times, series, t_min, tol) -> list[tuple[int, float]]:
    valid = np.isfinite(series)
    start = int(np.searchsorted(times, t_min - 1e-12))
    idx = np.nonzero(valid)[0]
    idx = idx[idx >= start]
    if idx.size < 2:
        return []
    sub = series[idx]
    return [(int(idx[i]), inc) for i, inc in audit_monotone(sub, tol)]


def diagnose(traj: Trajectory, f: SmoothFunction, *,
             lam: Optional[float] = None,
             xstar: Optional[np.ndarray] = None,
             audit_tol: Optional[float] = None,
             rate_window: Optional[tuple[float, float]] = None,
             little_o_windows: Optional[tuple[tuple[float, float], tuple[float, float]]] = None,
             ) -> DiagnosticsReport:
    """Full diagnostic pass over a trajectory.

    The anchored energy is evaluated when alpha >= 3 and the optimum is
    known (lam defaults to 2); the rate window defaults to the last decade
    of time.  Audit tolerance defaults to 0.01*h^2*(1 + |series start|).
    """
    p = traj.meta.params
    alpha, beta = p.alpha, p.beta
    notes: list[str] = []

    W0 = energy_W(traj, f, 0.0)
    Wbeta = energy_W(traj, f, beta) if beta > 0 else W0
    grads = batch_gradient(f, traj.xs)
    udot_b = traj.vs + beta * grads
    u_dot_norms = {0.0: np.linalg.norm(traj.vs, axis=1),
                   beta: np.linalg.norm(udot_b, axis=1)}
    t_resid = traj.times * u_dot_norms[beta]

    n = traj.times.size
    E = np.full(n, np.nan)
    E_scaled = np.full(n, np.nan)
    gap = None
    if f.min_value is not None:
        gap = traj.phi_vals - f.min_value
    t2_gap = traj.times**2 * gap if gap is not None else np.full(n, np.nan)

    if xstar is None and f.minimizer is not None:
        xstar = f.minimizer
    use_lam = lam
    if use_lam is None and alpha >= 3:
        use_lam = 2.0
    if alpha >= 3 and use_lam is not None and f.min_value is not None and xstar is not None:
        E, E_scaled = energy_E(traj, f, use_lam, xstar)
    else:
        use_lam = None
        notes.append("anchored energy skipped (needs alpha >= 3 and known optimum)")

    tol = audit_tol
    if tol is None:
        tol = default_audit_tol(p.step, float(W0[0]))
    violations = {
        "W0": _audit_from(traj.times, W0, p.t0, tol),
        "Wbeta": _audit_from(traj.times, Wbeta, max(p.t0, alpha * beta / 2.0), tol),
    }
    if use_lam is not None:
        violations["E_scaled"] = _audit_from(traj.times, E_scaled,
                                             max(p.t0, 2.0 * beta), tol)

    tail = tail_integrals(traj, f)
    notes.extend(tail.notes)

    slopes: dict[str, SlopeEntry] = {}
    if gap is not None:
        win = rate_window or (traj.times[-1] / 10.0, traj.times[-1])
        try:
            fit = fit_rate(traj.times, gap, win)
            slopes["gap"] = SlopeEntry(fit.window, fit.slope, fit.r2)
            if fit.n_floored:
                notes.append(f"rate fit excluded {fit.n_floored} floor samples")
        except ValueError as e:
            notes.append(f"rate fit skipped: {e}")

    ratio = None
    if little_o_windows is not None and gap is not None:
        head, tail_w = little_o_windows
        ratio = little_o_check(traj, f, head, tail_w)

    return DiagnosticsReport(
        times=traj.times, W0=W0, Wbeta=Wbeta, E_lambda=E, E_scaled=E_scaled,
        t2_gap=t2_gap, t_resid=t_resid, u_dot_norms=u_dot_norms,
        violations=violations, tail=tail, fitted_slopes=slopes,
        little_o_ratio=ratio, audit_tol=tol, lam=use_lam, notes=notes)
