"""Numerical kernels, jit-compiled when numba is importable.

Setting the environment variable OPENTODA_NO_NUMBA (to any non-empty value)
before import forces the pure numpy/Python fallback: the same source runs
undecorated. bench/bench_kernels.py times the two variants against each other.
"""

import math
import os

import numpy as np

_DISABLED = bool(os.environ.get("OPENTODA_NO_NUMBA"))

try:
    if _DISABLED:
        raise ImportError("numba disabled by OPENTODA_NO_NUMBA")
    from numba import njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        # no-op decorator so the kernels below run as plain Python
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(fn):
            return fn

        return wrap


_EPS = 2.220446049250313e-16


@njit(cache=True)
def ql_eigen_first(d, e, z, max_sweeps):
    """Implicit-shift QL on a symmetric tridiagonal matrix.

    d (n,) holds the diagonal and is overwritten with eigenvalues in ascending
    order; e (n,) holds the subdiagonal in e[:n-1] (e[n-1] is scratch) and is
    destroyed; z (n,) is overwritten with the first row of the eigenvector
    matrix, i.e. z[k] is the first component of the k-th eigenvector.
    Returns 0 on success, 1 when some eigenvalue needs more than max_sweeps
    sweeps.
    """
    n = d.shape[0]
    for i in range(n):
        z[i] = 0.0
    z[0] = 1.0
    if n == 1:
        return 0
    for l in range(n):
        sweeps = 0
        while True:
            m = n - 1
            for mm in range(l, n - 1):
                dd = abs(d[mm]) + abs(d[mm + 1])
                if abs(e[mm]) <= _EPS * dd:
                    m = mm
                    break
            if m == l:
                break
            sweeps += 1
            if sweeps > max_sweeps:
                return 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            if g >= 0.0:
                g = d[m] - d[l] + e[l] / (g + r)
            else:
                g = d[m] - d[l] + e[l] / (g - r)
            s = 1.0
            c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                f = z[i + 1]
                z[i + 1] = s * z[i] + c * f
                z[i] = c * z[i] - s * f
            if not underflow:
                d[l] -= p
                e[l] = g
                e[m] = 0.0
    # ascending order, carrying the first components along
    for i in range(1, n):
        dk = d[i]
        zk = z[i]
        j = i - 1
        while j >= 0 and d[j] > dk:
            d[j + 1] = d[j]
            z[j + 1] = z[j]
            j -= 1
        d[j + 1] = dk
        z[j + 1] = zk
    return 0


@njit(cache=True)
def lanczos_from_spectrum(zs, w0, alpha, beta):
    """Tridiagonalize diag(zs) starting from the vector w0.

    Writes the recurrence coefficients into alpha (n,) and beta (n-1,); beta
    comes out positive. Full reorthogonalization is applied twice per step,
    which keeps the reconstruction valid at n = 8 in double precision.
    Returns 0 on success, 1 on breakdown (numerically dependent start data).
    """
    n = zs.shape[0]
    Q = np.zeros((n, n))
    nrm = 0.0
    for i in range(n):
        nrm += w0[i] * w0[i]
    nrm = math.sqrt(nrm)
    if nrm == 0.0:
        return 1
    for i in range(n):
        Q[i, 0] = w0[i] / nrm
    u = np.empty(n)
    for j in range(n):
        for i in range(n):
            u[i] = zs[i] * Q[i, j]
        if j > 0:
            for i in range(n):
                u[i] -= beta[j - 1] * Q[i, j - 1]
        a = 0.0
        for i in range(n):
            a += Q[i, j] * u[i]
        alpha[j] = a
        for i in range(n):
            u[i] -= a * Q[i, j]
        for _ in range(2):
            for col in range(j + 1):
                dp = 0.0
                for i in range(n):
                    dp += Q[i, col] * u[i]
                for i in range(n):
                    u[i] -= dp * Q[i, col]
        if j < n - 1:
            b = 0.0
            for i in range(n):
                b += u[i] * u[i]
            b = math.sqrt(b)
            if not (b > 0.0) or not np.isfinite(b):
                return 1
            beta[j] = b
            for i in range(n):
                Q[i, j + 1] = u[i] / b
    return 0


@njit(cache=True)
def dense_power(v, c, k):
    """Dense k-th power of the symmetric tridiagonal matrix with diagonal v, off-diagonal c."""
    n = v.shape[0]
    L = np.zeros((n, n))
    for i in range(n):
        L[i, i] = v[i]
    for i in range(n - 1):
        L[i, i + 1] = c[i]
        L[i + 1, i] = c[i]
    P = np.eye(n)
    for _ in range(k):
        P = P @ L
    return P


@njit(cache=True)
def lax_commutator(v, c, k):
    """Right-hand side of the k-th Lax flow.

    Builds A_k as the skew part of L^k (strict upper minus strict lower, over
    two) and forms [A_k, L]. Returns (vdot, cdot, off) where off is the largest
    entry outside the symmetric tridiagonal pattern; off must vanish to
    rounding for a correct A_k, so the caller treats a large value as a
    structure violation.
    """
    n = v.shape[0]
    L = np.zeros((n, n))
    for i in range(n):
        L[i, i] = v[i]
    for i in range(n - 1):
        L[i, i + 1] = c[i]
        L[i + 1, i] = c[i]
    P = np.eye(n)
    for _ in range(k):
        P = P @ L
    A = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if j > i:
                A[i, j] = 0.5 * P[i, j]
            elif j < i:
                A[i, j] = -0.5 * P[i, j]
    B = A @ L - L @ A
    vdot = np.empty(n)
    for i in range(n):
        vdot[i] = B[i, i]
    cdot = np.empty(n - 1)
    for i in range(n - 1):
        cdot[i] = B[i, i + 1]
    off = 0.0
    for i in range(n):
        for j in range(n):
            if j - i >= 2 or i - j >= 2:
                if abs(B[i, j]) > off:
                    off = abs(B[i, j])
            elif j == i + 1:
                if abs(B[i, j] - B[j, i]) > off:
                    off = abs(B[i, j] - B[j, i])
    return vdot, cdot, off


@njit(cache=True)
def tridiag_power_bands(v, c, m):
    """Diagonal and superdiagonal of L^m for the tridiagonal matrix (v, c)."""
    n = v.shape[0]
    P = dense_power(v, c, m)
    diag = np.empty(n)
    for i in range(n):
        diag[i] = P[i, i]
    sup = np.empty(n - 1)
    for i in range(n - 1):
        sup[i] = P[i, i + 1]
    return diag, sup
