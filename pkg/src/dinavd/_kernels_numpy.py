"""Pure-numpy twins of the compiled loops.

Used when numba is unavailable, when DINAVD_DISABLE_NUMBA is set, or when the
objective has no kernel spec (arbitrary Python callables).  Return shapes are
identical to _kernels_numba so the wrappers can post-process uniformly.
"""

from __future__ import annotations

import numpy as np

DIVERGENCE_LIMIT = 1e12


def rk4_second_order(value, gradient, hvp, alpha, beta, t0, h, n_steps, x0, v0,
                     g, sample_idx):
    d = x0.size
    ns = sample_idx.size
    times = np.empty(ns)
    xs = np.empty((ns, d))
    vs = np.empty((ns, d))
    phis = np.empty(ns)
    gnorms = np.empty(ns)

    def accel(t, x, v):
        a = -(alpha / t) * v - gradient(x)
        if beta != 0.0:
            a -= beta * hvp(x, v)
        if g is not None:
            a = a + g(t)
        return a

    x = x0.astype(np.float64).copy()
    v = v0.astype(np.float64).copy()
    si = 0
    status = 0
    fail_k = -1
    for k in range(n_steps + 1):
        t = t0 + k * h
        if si < ns and k == sample_idx[si]:
            if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
                status = 1
                fail_k = k
                break
            times[si] = t
            xs[si] = x
            vs[si] = v
            phis[si] = value(x)
            gnorms[si] = np.linalg.norm(gradient(x))
            si += 1
        if k == n_steps:
            break
        a1 = accel(t, x, v)
        v2 = v + 0.5 * h * a1
        a2 = accel(t + 0.5 * h, x + 0.5 * h * v, v2)
        v3 = v + 0.5 * h * a2
        a3 = accel(t + 0.5 * h, x + 0.5 * h * v2, v3)
        v4 = v + h * a3
        a4 = accel(t + h, x + h * v3, v4)
        x = x + (h / 6.0) * (v + 2.0 * v2 + 2.0 * v3 + v4)
        v = v + (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
    return status, fail_k, times, xs, vs, phis, gnorms, si


def rk4_first_order(value, gradient, alpha, beta, t0, h, n_steps, x0, y0, sample_idx):
    d = x0.size
    ns = sample_idx.size
    times = np.empty(ns)
    xs = np.empty((ns, d))
    ys = np.empty((ns, d))
    vs = np.empty((ns, d))
    phis = np.empty(ns)
    gnorms = np.empty(ns)

    def rhs(t, x, y):
        grad = gradient(x)
        c = 1.0 / beta - alpha / t
        fx = -beta * grad + c * x - y / beta
        fy = (c + alpha * beta / (t * t)) * x - y / beta
        return fx, fy, grad

    x = x0.astype(np.float64).copy()
    y = y0.astype(np.float64).copy()
    si = 0
    status = 0
    fail_k = -1
    for k in range(n_steps + 1):
        t = t0 + k * h
        if si < ns and k == sample_idx[si]:
            if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
                status = 1
                fail_k = k
                break
            fx, _, grad = rhs(t, x, y)
            times[si] = t
            xs[si] = x
            ys[si] = y
            vs[si] = fx
            phis[si] = value(x)
            gnorms[si] = np.linalg.norm(grad)
            si += 1
        if k == n_steps:
            break
        f1x, f1y, _ = rhs(t, x, y)
        f2x, f2y, _ = rhs(t + 0.5 * h, x + 0.5 * h * f1x, y + 0.5 * h * f1y)
        f3x, f3y, _ = rhs(t + 0.5 * h, x + 0.5 * h * f2x, y + 0.5 * h * f2y)
        f4x, f4y, _ = rhs(t + h, x + h * f3x, y + h * f3y)
        x = x + (h / 6.0) * (f1x + 2.0 * f2x + 2.0 * f3x + f4x)
        y = y + (h / 6.0) * (f1y + 2.0 * f2y + 2.0 * f3y + f4y)
    return status, fail_k, times, xs, ys, vs, phis, gnorms, si


def ifb_avd_loop(value, gradient, ns_value, prox, alpha, beta, h, tstart,
                 n_updates, x0, y0, xi0, rec_idx):
    d = x0.size
    nr = rec_idx.size
    xs = np.empty((nr, d))
    ys = np.empty((nr, d))
    xis = np.empty((nr, d))
    objs = np.empty(nr)

    x = x0.astype(np.float64).copy()
    y = y0.astype(np.float64).copy()
    xi = xi0.astype(np.float64).copy()
    ri = 0
    status = 0
    fail_k = -1
    for j in range(n_updates + 1):
        t = tstart + j * h
        if ri < nr and j == rec_idx[ri]:
            if not np.all(np.isfinite(x)):
                status = 1
                fail_k = j
                break
            obj = value(x) + ns_value(x)
            if j > 0 and obj > DIVERGENCE_LIMIT:
                status = 2
                fail_k = j
                break
            xs[ri] = x
            ys[ri] = y
            xis[ri] = xi
            objs[ri] = obj
            ri += 1
        if j == n_updates:
            break
        a_t = 1.0 / beta - alpha / t
        b_t = a_t + alpha * beta / (t * t)
        pre = (1.0 + h * a_t) * x - beta * h * gradient(x) + h * y
        xn = prox(pre, beta * h)
        xi = (pre - xn) / (beta * h)
        y = beta / (beta + h) * y - h / (beta + h) * b_t * xn
        x = xn
    return status, fail_k, xs, ys, xis, objs, ri


def fista_loop(value, gradient, ns_value, prox, L, n_iters, x0):
    d = x0.size
    xs = np.empty((n_iters, d))
    ys = np.empty((n_iters, d))
    xis = np.empty((n_iters, d))
    objs = np.empty(n_iters)

    x = x0.astype(np.float64).copy()
    yv = x.copy()
    tk = 1.0
    for k in range(n_iters):
        pre = yv - gradient(yv) / L
        xn = prox(pre, 1.0 / L)
        tn = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * tk * tk))
        yv = xn + ((tk - 1.0) / tn) * (xn - x)
        obj = value(xn) + ns_value(xn)
        xis[k] = (pre - xn) * L
        xs[k] = xn
        ys[k] = yv
        objs[k] = obj
        if not (np.all(np.isfinite(xn)) and np.isfinite(obj)):
            return 1, k + 1, xs, ys, xis, objs, k + 1
        if obj > DIVERGENCE_LIMIT:
            return 2, k + 1, xs, ys, xis, objs, k + 1
        x = xn
        tk = tn
    return 0, -1, xs, ys, xis, objs, n_iters


def fista_best_value(value, gradient, ns_value, prox, L, n_iters, x0):
    x = x0.astype(np.float64).copy()
    yv = x.copy()
    tk = 1.0
    best = value(x) + ns_value(x)
    for _ in range(n_iters):
        pre = yv - gradient(yv) / L
        xn = prox(pre, 1.0 / L)
        tn = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * tk * tk))
        yv = xn + ((tk - 1.0) / tn) * (xn - x)
        obj = value(xn) + ns_value(xn)
        if obj < best:
            best = obj
        x = xn
        tk = tn
    return best


def fb_loop(value, gradient, ns_value, prox, L, n_iters, x0):
    d = x0.size
    xs = np.empty((n_iters, d))
    xis = np.empty((n_iters, d))
    objs = np.empty(n_iters)

    x = x0.astype(np.float64).copy()
    for k in range(n_iters):
        pre = x - gradient(x) / L
        xn = prox(pre, 1.0 / L)
        obj = value(xn) + ns_value(xn)
        xis[k] = (pre - xn) * L
        xs[k] = xn
        objs[k] = obj
        if not (np.all(np.isfinite(xn)) and np.isfinite(obj)):
            return 1, k + 1, xs, xis, objs, k + 1
        if obj > DIVERGENCE_LIMIT:
            return 2, k + 1, xs, xis, objs, k + 1
        x = xn
    return 0, -1, xs, xis, objs, n_iters
