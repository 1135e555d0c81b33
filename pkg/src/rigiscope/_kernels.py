"""Compiled per-path kernels for the critical-point homotopies.

Each call evaluates the homogenized homotopy at a batch of points and
returns ``Hx^{-1} H`` and ``Hx^{-1} Ht`` from one LU factorization, so the
tracker's predictor and corrector never materialize Jacobian stacks.
"""
from __future__ import annotations

import numpy as np
from numba import njit

#: homotopy shapes handled by :func:`critical_solve`
MODE_TOTAL_DEGREE = 0  # gamma*t*start + (1-t)*critical(tau=1)
MODE_LEVEL_SETS = 1  # critical(tau=t)


@njit(cache=True)
def _ipow(z, k):
    r = 1.0 + 0j
    for _ in range(k):
        r *= z
    return r


@njit(cache=True)
def _abs2(z):
    return z.real * z.real + z.imag * z.imag


@njit(cache=True)
def _lu_solve2(A, b1, b2):
    """In-place partial-pivot LU of ``A``; solves for two right-hand sides."""
    n = A.shape[0]
    # pivot comparisons use squared moduli
    scale = 0.0
    for i in range(n):
        for j in range(n):
            v = _abs2(A[i, j])
            if v > scale:
                scale = v
    if not scale > 0.0 or not np.isfinite(scale):
        return False
    for k in range(n):
        piv = k
        best = _abs2(A[k, k])
        for i in range(k + 1, n):
            v = _abs2(A[i, k])
            if v > best:
                best, piv = v, i
        if best <= 1e-28 * scale:
            return False
        if piv != k:
            for j in range(n):
                A[k, j], A[piv, j] = A[piv, j], A[k, j]
            b1[k], b1[piv] = b1[piv], b1[k]
            b2[k], b2[piv] = b2[piv], b2[k]
        inv = 1.0 / A[k, k]
        for i in range(k + 1, n):
            f = A[i, k] * inv
            if f != 0:
                for j in range(k + 1, n):
                    A[i, j] -= f * A[k, j]
                b1[i] -= f * b1[k]
                b2[i] -= f * b2[k]
    for i in range(n - 1, -1, -1):
        s1 = b1[i]
        s2 = b2[i]
        for j in range(i + 1, n):
            s1 -= A[i, j] * b1[j]
            s2 -= A[i, j] * b2[j]
        b1[i] = s1 / A[i, i]
        b2[i] = s2 / A[i, i]
    for i in range(n):
        if not (np.isfinite(b1[i].real) and np.isfinite(b1[i].imag)
                and np.isfinite(b2[i].real) and np.isfinite(b2[i].imag)):
            return False
    return True


@njit(cache=True)
def _critical(xs, l0, l1, tau, slot_free, I, J, lsq, d, p_hat, eps, y, alpha, gz,
              C, CJ, g, Jg, HG, dG):
    """Critical system at ``tau`` into ``C`` (values) and ``CJ`` (Jacobian).

    ``g``, ``Jg``, ``HG`` and ``dG`` are scratch buffers.
    """
    N = xs.shape[0]
    m = I.shape[0]
    Jg[:, :] = 0j
    HG[:, :] = 0j
    for l in range(m):
        acc = 0j
        for k in range(d):
            a = slot_free[I[l] * d + k]
            b = slot_free[J[l] * d + k]
            xa = xs[a] if a >= 0 else 0j
            xb = xs[b] if b >= 0 else 0j
            diff = xa - xb
            acc += diff * diff
            if a >= 0:
                Jg[l, a] = 2 * diff
            if b >= 0:
                Jg[l, b] = -2 * diff
        g[l] = acc - lsq[l]
    for l in range(m):
        gl4 = 4 * g[l]  # 2 * g_l * (constant Hessian entries of +-2)
        for k in range(d):
            a = slot_free[I[l] * d + k]
            b = slot_free[J[l] * d + k]
            if a >= 0:
                HG[a, a] += gl4
            if b >= 0:
                HG[b, b] += gl4
            if a >= 0 and b >= 0:
                HG[a, b] -= gl4
                HG[b, a] -= gl4
    s = eps * eps + 0j
    for i in range(N):
        r = xs[i] - p_hat[i]
        s -= r * r
    G = s * s
    for l in range(m):
        G += g[l] * g[l]
    for i in range(N):
        ds_i = -2 * (xs[i] - p_hat[i])
        acc = 2 * s * ds_i
        for l in range(m):
            acc += 2 * Jg[l, i] * g[l]
        dG[i] = acc
        for j in range(i, N):
            ds_j = -2 * (xs[j] - p_hat[j])
            v = 2 * ds_i * ds_j
            for l in range(m):
                v += 2 * Jg[l, i] * Jg[l, j]
            HG[i, j] += v
            if j != i:
                HG[j, i] += v
        HG[i, i] -= 4 * s
    n = N + 2
    for i in range(n):
        for j in range(n):
            CJ[i, j] = 0j
    C[0] = G - tau * gz
    for i in range(N):
        C[1 + i] = l0 * (xs[i] - y[i]) + l1 * dG[i]
        CJ[0, i] = dG[i]
        for j in range(N):
            CJ[1 + i, j] = l1 * HG[i, j]
        CJ[1 + i, i] += l0
        CJ[1 + i, N] = xs[i] - y[i]
        CJ[1 + i, N + 1] = dG[i]
    C[N + 1] = alpha[0] * l0 + alpha[1] * l1 - 1
    CJ[N + 1, N] = alpha[0]
    CJ[N + 1, N + 1] = alpha[1]


@njit(cache=True)
def critical_solve(W, t, mode, slot_free, I, J, lsq, d, p_hat, eps, y, alpha, gz,
                   start_deg, gamma_start, D, chart):
    """Newton and Davidenko directions of the homogenized critical homotopy.

    Returns ``(u, v, ok)`` with ``u = Hx^{-1} H`` and ``v = Hx^{-1} Ht`` per path.
    """
    P, n1 = W.shape
    n = n1 - 1
    N = n - 2
    u = np.zeros((P, n1), dtype=np.complex128)
    v = np.zeros((P, n1), dtype=np.complex128)
    ok = np.zeros(P, dtype=np.bool_)
    x = np.empty(n, dtype=np.complex128)
    C = np.empty(n, dtype=np.complex128)
    CJ = np.empty((n, n), dtype=np.complex128)
    H = np.empty(n, dtype=np.complex128)
    Hx = np.empty((n, n), dtype=np.complex128)
    Ht = np.empty(n, dtype=np.complex128)
    A = np.empty((n1, n1), dtype=np.complex128)
    b1 = np.empty(n1, dtype=np.complex128)
    b2 = np.empty(n1, dtype=np.complex128)
    m = I.shape[0]
    g = np.empty(m, dtype=np.complex128)
    Jg = np.empty((m, N), dtype=np.complex128)
    HG = np.empty((N, N), dtype=np.complex128)
    dG = np.empty(N, dtype=np.complex128)
    for p in range(P):
        w0 = W[p, 0]
        if abs(w0) < 1e-300:
            w0 = 1e-300 + 0j
        for i in range(n):
            x[i] = W[p, 1 + i] / w0
        tp = t[p]
        if mode == MODE_TOTAL_DEGREE:
            _critical(x[:N], x[N], x[N + 1], 1.0 + 0j, slot_free, I, J, lsq, d, p_hat, eps,
                      y, alpha, gz, C, CJ, g, Jg, HG, dG)
            for i in range(n):
                xd1 = _ipow(x[i], start_deg[i] - 1)
                S = xd1 * x[i] - 1
                H[i] = gamma_start * tp * S + (1 - tp) * C[i]
                Ht[i] = gamma_start * S - C[i]
                for j in range(n):
                    Hx[i, j] = (1 - tp) * CJ[i, j]
                Hx[i, i] += gamma_start * tp * start_deg[i] * xd1
        else:
            _critical(x[:N], x[N], x[N + 1], tp, slot_free, I, J, lsq, d, p_hat, eps,
                      y, alpha, gz, C, CJ, g, Jg, HG, dG)
            for i in range(n):
                H[i] = C[i]
                Ht[i] = 0j
                for j in range(n):
                    Hx[i, j] = CJ[i, j]
            Ht[0] = -gz
        for i in range(n):
            pw = _ipow(w0, D[i] - 1)
            b1[i] = pw * w0 * H[i]
            b2[i] = pw * w0 * Ht[i]
            euler = D[i] * H[i]
            for j in range(n):
                A[i, 1 + j] = pw * Hx[i, j]
                euler -= x[j] * Hx[i, j]
            A[i, 0] = pw * euler
        acc = -1 + 0j
        for j in range(n1):
            A[n, j] = chart[p, j]
            acc += chart[p, j] * W[p, j]
        b1[n] = acc
        b2[n] = 0j
        if _lu_solve2(A, b1, b2):
            ok[p] = True
            for j in range(n1):
                u[p, j] = b1[j]
                v[p, j] = b2[j]
    return u, v, ok
