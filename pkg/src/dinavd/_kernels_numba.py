"""Compiled inner loops (numba @njit).

Smooth objectives and prox maps are passed as small integer tags plus
parameter arrays (see problems.SmoothKernelSpec / ProxKernelSpec) so a single
compiled integrator covers the whole catalog.  The pure-numpy twins live in
_kernels_numpy; both must stay behaviorally identical.
"""

import numpy as np
from numba import njit

DIVERGENCE_LIMIT = 1e12


@njit(cache=True)
def _sf_value(kind, M, vec, x):
    n = x.size
    if kind == 0:
        return 0.0
    if kind == 1:
        s = 0.0
        for i in range(n):
            s += vec[i] * x[i] * x[i]
        return 0.5 * s
    if kind == 2:
        s = 0.0
        for i in range(n):
            qi = 0.0
            for j in range(n):
                qi += M[i, j] * x[j]
            s += x[i] * (0.5 * qi + vec[i])
        return s
    if kind == 3:
        s = 0.0
        for i in range(n):
            s += x[i] ** 4
        return 0.25 * s
    # kind == 4: least squares
    m = M.shape[0]
    s = 0.0
    for i in range(m):
        ri = -vec[i]
        for j in range(n):
            ri += M[i, j] * x[j]
        s += ri * ri
    return 0.5 * s


@njit(cache=True)
def _sf_grad(kind, M, vec, x, out):
    n = x.size
    if kind == 0:
        for i in range(n):
            out[i] = 0.0
    elif kind == 1:
        for i in range(n):
            out[i] = vec[i] * x[i]
    elif kind == 2:
        for i in range(n):
            s = vec[i]
            for j in range(n):
                s += M[i, j] * x[j]
            out[i] = s
    elif kind == 3:
        for i in range(n):
            out[i] = x[i] ** 3
    else:
        m = M.shape[0]
        for j in range(n):
            out[j] = 0.0
        for i in range(m):
            ri = -vec[i]
            for j in range(n):
                ri += M[i, j] * x[j]
            for j in range(n):
                out[j] += M[i, j] * ri


@njit(cache=True)
def _sf_hvp(kind, M, vec, x, u, out):
    n = x.size
    if kind == 0:
        for i in range(n):
            out[i] = 0.0
    elif kind == 1:
        for i in range(n):
            out[i] = vec[i] * u[i]
    elif kind == 2:
        for i in range(n):
            s = 0.0
            for j in range(n):
                s += M[i, j] * u[j]
            out[i] = s
    elif kind == 3:
        for i in range(n):
            out[i] = 3.0 * x[i] * x[i] * u[i]
    else:
        m = M.shape[0]
        for j in range(n):
            out[j] = 0.0
        for i in range(m):
            ri = 0.0
            for j in range(n):
                ri += M[i, j] * u[j]
            for j in range(n):
                out[j] += M[i, j] * ri


@njit(cache=True)
def _prox(pkind, lo, hi, w, v, tau, out):
    n = v.size
    if pkind == 0:
        for i in range(n):
            out[i] = v[i]
    elif pkind == 1:
        thr = w * tau
        for i in range(n):
            a = abs(v[i]) - thr
            if a < 0.0:
                a = 0.0
            out[i] = a if v[i] >= 0.0 else -a
    else:
        for i in range(n):
            z = v[i]
            if z < lo[i]:
                z = lo[i]
            elif z > hi[i]:
                z = hi[i]
            out[i] = z


@njit(cache=True)
def _ns_value(pkind, lo, hi, w, x):
    n = x.size
    if pkind == 0:
        return 0.0
    if pkind == 1:
        s = 0.0
        for i in range(n):
            s += abs(x[i])
        return w * s
    for i in range(n):
        if x[i] < lo[i] - 1e-12 or x[i] > hi[i] + 1e-12:
            return np.inf
    return 0.0


@njit(cache=True)
def _accel(kind, M, vec, alpha, beta, t, x, v, gkind, gcoef, gexp, gdir, out, tmp):
    """out = -(alpha/t) v - beta * hess(x) v - grad(x) + g(t)"""
    n = x.size
    _sf_grad(kind, M, vec, x, out)
    if beta != 0.0:
        _sf_hvp(kind, M, vec, x, v, tmp)
        for i in range(n):
            out[i] = -(alpha / t) * v[i] - beta * tmp[i] - out[i]
    else:
        for i in range(n):
            out[i] = -(alpha / t) * v[i] - out[i]
    if gkind == 1:
        s = gcoef * t ** gexp
        for i in range(n):
            out[i] += s * gdir[i]


@njit(cache=True)
def rk4_second_order(kind, M, vec, alpha, beta, t0, h, n_steps, x0, v0,
                     gkind, gcoef, gexp, gdir, sample_idx):
    """Classical RK4 on (x, xdot) for the damped second-order dynamic.

    Returns (status, fail_index, times, xs, vs, phis, gnorms, n_recorded);
    status 1 flags a non-finite state at the failing sample.
    """
    d = x0.size
    ns = sample_idx.size
    times = np.empty(ns)
    xs = np.empty((ns, d))
    vs = np.empty((ns, d))
    phis = np.empty(ns)
    gnorms = np.empty(ns)

    x = x0.copy()
    v = v0.copy()
    xb = np.empty(d)
    vb = np.empty(d)
    a = np.empty(d)
    sv = np.empty(d)
    sa = np.empty(d)
    grad = np.empty(d)
    tmp = np.empty(d)

    si = 0
    status = 0
    fail_k = -1
    for k in range(n_steps + 1):
        t = t0 + k * h
        if si < ns and k == sample_idx[si]:
            ok = True
            for i in range(d):
                if not (np.isfinite(x[i]) and np.isfinite(v[i])):
                    ok = False
            if not ok:
                status = 1
                fail_k = k
                break
            times[si] = t
            phis[si] = _sf_value(kind, M, vec, x)
            _sf_grad(kind, M, vec, x, grad)
            gn = 0.0
            for i in range(d):
                xs[si, i] = x[i]
                vs[si, i] = v[i]
                gn += grad[i] * grad[i]
            gnorms[si] = np.sqrt(gn)
            si += 1
        if k == n_steps:
            break

        # stage 1
        _accel(kind, M, vec, alpha, beta, t, x, v, gkind, gcoef, gexp, gdir, a, tmp)
        for i in range(d):
            sv[i] = v[i]
            sa[i] = a[i]
            xb[i] = x[i] + 0.5 * h * v[i]
            vb[i] = v[i] + 0.5 * h * a[i]
        # stage 2
        _accel(kind, M, vec, alpha, beta, t + 0.5 * h, xb, vb, gkind, gcoef, gexp, gdir, a, tmp)
        for i in range(d):
            sv[i] += 2.0 * vb[i]
            sa[i] += 2.0 * a[i]
        for i in range(d):
            nvb = v[i] + 0.5 * h * a[i]
            xb[i] = x[i] + 0.5 * h * vb[i]
            vb[i] = nvb
        # stage 3
        _accel(kind, M, vec, alpha, beta, t + 0.5 * h, xb, vb, gkind, gcoef, gexp, gdir, a, tmp)
        for i in range(d):
            sv[i] += 2.0 * vb[i]
            sa[i] += 2.0 * a[i]
        for i in range(d):
            nvb = v[i] + h * a[i]
            xb[i] = x[i] + h * vb[i]
            vb[i] = nvb
        # stage 4
        _accel(kind, M, vec, alpha, beta, t + h, xb, vb, gkind, gcoef, gexp, gdir, a, tmp)
        for i in range(d):
            sv[i] += vb[i]
            sa[i] += a[i]
            x[i] += h / 6.0 * sv[i]
            v[i] += h / 6.0 * sa[i]

    return status, fail_k, times, xs, vs, phis, gnorms, si


@njit(cache=True)
def _fo_rhs(kind, M, vec, alpha, beta, t, x, y, fx, fy, grad):
    """Right-hand side of the first-order (x, y) reformulation."""
    n = x.size
    _sf_grad(kind, M, vec, x, grad)
    c = 1.0 / beta - alpha / t
    cy = c + alpha * beta / (t * t)
    for i in range(n):
        fx[i] = -beta * grad[i] + c * x[i] - y[i] / beta
        fy[i] = cy * x[i] - y[i] / beta


@njit(cache=True)
def rk4_first_order(kind, M, vec, alpha, beta, t0, h, n_steps, x0, y0, sample_idx):
    """RK4 on the Hessian-free (x, y) system; velocities recovered pointwise."""
    d = x0.size
    ns = sample_idx.size
    times = np.empty(ns)
    xs = np.empty((ns, d))
    ys = np.empty((ns, d))
    vs = np.empty((ns, d))
    phis = np.empty(ns)
    gnorms = np.empty(ns)

    x = x0.copy()
    y = y0.copy()
    xb = np.empty(d)
    yb = np.empty(d)
    fx = np.empty(d)
    fy = np.empty(d)
    sx = np.empty(d)
    sy = np.empty(d)
    grad = np.empty(d)

    si = 0
    status = 0
    fail_k = -1
    for k in range(n_steps + 1):
        t = t0 + k * h
        if si < ns and k == sample_idx[si]:
            ok = True
            for i in range(d):
                if not (np.isfinite(x[i]) and np.isfinite(y[i])):
                    ok = False
            if not ok:
                status = 1
                fail_k = k
                break
            _fo_rhs(kind, M, vec, alpha, beta, t, x, y, fx, fy, grad)
            times[si] = t
            phis[si] = _sf_value(kind, M, vec, x)
            gn = 0.0
            for i in range(d):
                xs[si, i] = x[i]
                ys[si, i] = y[i]
                vs[si, i] = fx[i]  # xdot from the first equation, no differencing
                gn += grad[i] * grad[i]
            gnorms[si] = np.sqrt(gn)
            si += 1
        if k == n_steps:
            break

        _fo_rhs(kind, M, vec, alpha, beta, t, x, y, fx, fy, grad)
        for i in range(d):
            sx[i] = fx[i]
            sy[i] = fy[i]
            xb[i] = x[i] + 0.5 * h * fx[i]
            yb[i] = y[i] + 0.5 * h * fy[i]
        _fo_rhs(kind, M, vec, alpha, beta, t + 0.5 * h, xb, yb, fx, fy, grad)
        for i in range(d):
            sx[i] += 2.0 * fx[i]
            sy[i] += 2.0 * fy[i]
            xb[i] = x[i] + 0.5 * h * fx[i]
            yb[i] = y[i] + 0.5 * h * fy[i]
        _fo_rhs(kind, M, vec, alpha, beta, t + 0.5 * h, xb, yb, fx, fy, grad)
        for i in range(d):
            sx[i] += 2.0 * fx[i]
            sy[i] += 2.0 * fy[i]
            xb[i] = x[i] + h * fx[i]
            yb[i] = y[i] + h * fy[i]
        _fo_rhs(kind, M, vec, alpha, beta, t + h, xb, yb, fx, fy, grad)
        for i in range(d):
            sx[i] += fx[i]
            sy[i] += fy[i]
            x[i] += h / 6.0 * sx[i]
            y[i] += h / 6.0 * sy[i]

    return status, fail_k, times, xs, ys, vs, phis, gnorms, si


@njit(cache=True)
def ifb_avd_loop(kind, M, vec, pkind, plo, phi_, pw, alpha, beta, h, tstart,
                 n_updates, x0, y0, xi0, rec_idx):
    """Explicit-implicit (forward-backward) recursion of the inertial dynamic.

    State j lives at time tstart + j*h; update j uses the coefficients at
    that time.  Records (x, y, xi, objective) at the requested indices.
    Status: 1 non-finite iterate, 2 divergence (objective above 1e12).
    """
    d = x0.size
    nr = rec_idx.size
    xs = np.empty((nr, d))
    ys = np.empty((nr, d))
    xis = np.empty((nr, d))
    objs = np.empty(nr)

    x = x0.copy()
    y = y0.copy()
    xi = xi0.copy()
    pre = np.empty(d)
    grad = np.empty(d)
    xn = np.empty(d)

    ri = 0
    status = 0
    fail_k = -1
    for j in range(n_updates + 1):
        t = tstart + j * h
        if ri < nr and j == rec_idx[ri]:
            ok = True
            for i in range(d):
                if not np.isfinite(x[i]):
                    ok = False
            if not ok:
                status = 1
                fail_k = j
                break
            obj = _sf_value(kind, M, vec, x) + _ns_value(pkind, plo, phi_, pw, x)
            if j > 0 and obj > DIVERGENCE_LIMIT:
                status = 2
                fail_k = j
                break
            for i in range(d):
                xs[ri, i] = x[i]
                ys[ri, i] = y[i]
                xis[ri, i] = xi[i]
            objs[ri] = obj
            ri += 1
        if j == n_updates:
            break

        a_t = 1.0 / beta - alpha / t
        b_t = a_t + alpha * beta / (t * t)
        _sf_grad(kind, M, vec, x, grad)
        for i in range(d):
            pre[i] = (1.0 + h * a_t) * x[i] - beta * h * grad[i] + h * y[i]
        _prox(pkind, plo, phi_, pw, pre, beta * h, xn)
        for i in range(d):
            xi[i] = (pre[i] - xn[i]) / (beta * h)
            y[i] = beta / (beta + h) * y[i] - h / (beta + h) * b_t * xn[i]
            x[i] = xn[i]

    return status, fail_k, xs, ys, xis, objs, ri


@njit(cache=True)
def fista_loop(kind, M, vec, pkind, plo, phi_, pw, L, n_iters, x0):
    """Accelerated proximal gradient with step 1/L and Nesterov extrapolation."""
    d = x0.size
    xs = np.empty((n_iters, d))
    ys = np.empty((n_iters, d))
    xis = np.empty((n_iters, d))
    objs = np.empty(n_iters)

    x = x0.copy()
    yv = x0.copy()
    pre = np.empty(d)
    grad = np.empty(d)
    xn = np.empty(d)
    tk = 1.0
    status = 0
    fail_k = -1
    for k in range(n_iters):
        _sf_grad(kind, M, vec, yv, grad)
        for i in range(d):
            pre[i] = yv[i] - grad[i] / L
        _prox(pkind, plo, phi_, pw, pre, 1.0 / L, xn)
        tn = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * tk * tk))
        w = (tk - 1.0) / tn
        obj = _sf_value(kind, M, vec, xn) + _ns_value(pkind, plo, phi_, pw, xn)
        ok = np.isfinite(obj)
        for i in range(d):
            xis[k, i] = (pre[i] - xn[i]) * L
            yv[i] = xn[i] + w * (xn[i] - x[i])
            xs[k, i] = xn[i]
            ys[k, i] = yv[i]
            x[i] = xn[i]
            if not np.isfinite(xn[i]):
                ok = False
        objs[k] = obj
        if (not ok) or obj > DIVERGENCE_LIMIT:
            status = 1 if not ok else 2
            fail_k = k + 1
            return status, fail_k, xs, ys, xis, objs, k + 1
        tk = tn
    return status, fail_k, xs, ys, xis, objs, n_iters


@njit(cache=True)
def fista_best_value(kind, M, vec, pkind, plo, phi_, pw, L, n_iters, x0):
    """History-free FISTA returning only the best objective (reference solves)."""
    d = x0.size
    x = x0.copy()
    yv = x0.copy()
    pre = np.empty(d)
    grad = np.empty(d)
    xn = np.empty(d)
    tk = 1.0
    best = _sf_value(kind, M, vec, x) + _ns_value(pkind, plo, phi_, pw, x)
    for _ in range(n_iters):
        _sf_grad(kind, M, vec, yv, grad)
        for i in range(d):
            pre[i] = yv[i] - grad[i] / L
        _prox(pkind, plo, phi_, pw, pre, 1.0 / L, xn)
        tn = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * tk * tk))
        w = (tk - 1.0) / tn
        obj = _sf_value(kind, M, vec, xn) + _ns_value(pkind, plo, phi_, pw, xn)
        if obj < best:
            best = obj
        for i in range(d):
            yv[i] = xn[i] + w * (xn[i] - x[i])
            x[i] = xn[i]
        tk = tn
    return best


@njit(cache=True)
def fb_loop(kind, M, vec, pkind, plo, phi_, pw, L, n_iters, x0):
    """Plain forward-backward with step 1/L."""
    d = x0.size
    xs = np.empty((n_iters, d))
    xis = np.empty((n_iters, d))
    objs = np.empty(n_iters)

    x = x0.copy()
    pre = np.empty(d)
    grad = np.empty(d)
    xn = np.empty(d)
    status = 0
    fail_k = -1
    for k in range(n_iters):
        _sf_grad(kind, M, vec, x, grad)
        for i in range(d):
            pre[i] = x[i] - grad[i] / L
        _prox(pkind, plo, phi_, pw, pre, 1.0 / L, xn)
        obj = _sf_value(kind, M, vec, xn) + _ns_value(pkind, plo, phi_, pw, xn)
        ok = np.isfinite(obj)
        for i in range(d):
            xis[k, i] = (pre[i] - xn[i]) * L
            xs[k, i] = xn[i]
            x[i] = xn[i]
            if not np.isfinite(xn[i]):
                ok = False
        objs[k] = obj
        if (not ok) or obj > DIVERGENCE_LIMIT:
            status = 1 if not ok else 2
            fail_k = k + 1
            return status, fail_k, xs, xis, objs, k + 1
    return status, fail_k, xs, xis, objs, n_iters
