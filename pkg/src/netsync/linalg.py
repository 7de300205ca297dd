"""Small dense eigensolvers.

Two routines, both sized for matrices of a few dozen rows at most:

* :func:`jacobi_eigh` -- cyclic Jacobi rotations for real symmetric input,
  returning eigenvalues and an orthonormal eigenvector basis.
* :func:`eigvals` -- balancing, Householder reduction to upper Hessenberg
  form and the Francis double-shift QR iteration, returning the (possibly
  complex) eigenvalues of a general real matrix.
"""
from __future__ import annotations

import math

import numpy as np
from numpy.typing import ArrayLike, NDArray

_EPS = np.finfo(float).eps


class EigenConvergenceError(RuntimeError):
    """Raised when an eigenvalue iteration exceeds its iteration cap."""


def jacobi_eigh(
    a: ArrayLike, tol: float = 1e-12, max_sweeps: int = 100
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Eigen-decompose a real symmetric matrix by cyclic Jacobi rotations.

    Sweeps until the largest off-diagonal magnitude is at most
    ``tol * max(1, ||a||_F)``.

    Returns
    -------
    w : (n,) ndarray
        Eigenvalues, in the order they appear on the rotated diagonal
        (unsorted).
    v : (n, n) ndarray
        Orthonormal eigenvectors; column ``k`` belongs to ``w[k]``.
    """
    A = np.array(a, dtype=float, copy=True)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    n = A.shape[0]
    V = np.eye(n)
    if n < 2:
        return np.diag(A).copy(), V
    threshold = tol * max(1.0, float(np.linalg.norm(A)))
    iu = np.triu_indices(n, 1)
    for _ in range(max_sweeps):
        if np.max(np.abs(A[iu])) <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= threshold * 1e-3:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                col_p = A[:, p].copy()
                col_q = A[:, q]
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                row_p = A[p, :].copy()
                row_q = A[q, :]
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                A[p, q] = A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q]
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    else:
        if np.max(np.abs(A[iu])) > threshold:
            raise EigenConvergenceError(
                f"Jacobi sweeps did not converge in {max_sweeps} sweeps"
            )
    return np.diag(A).copy(), V


def balance(a: ArrayLike) -> NDArray[np.float64]:
    """Diagonal similarity scaling by powers of two (row/column norm equalizing)."""
    A = np.array(a, dtype=float, copy=True)
    n = A.shape[0]
    radix = 2.0
    sqrdx = radix * radix
    done = False
    while not done:
        done = True
        for i in range(n):
            c = float(np.sum(np.abs(A[:, i]))) - abs(A[i, i])
            r = float(np.sum(np.abs(A[i, :]))) - abs(A[i, i])
            if c == 0.0 or r == 0.0:
                continue
            g = r / radix
            f = 1.0
            s = c + r
            while c < g:
                f *= radix
                c *= sqrdx
            g = r * radix
            while c > g:
                f /= radix
                c /= sqrdx
            if (c + r) / f < 0.95 * s:
                done = False
                A[i, :] /= f
                A[:, i] *= f
    return A


def hessenberg(a: ArrayLike) -> NDArray[np.float64]:
    """Orthogonally similar upper Hessenberg form via Householder reflections."""
    H = np.array(a, dtype=float, copy=True)
    n = H.shape[0]
    for k in range(n - 2):
        x = H[k + 1 :, k]
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        v = x.copy()
        v[0] += math.copysign(alpha, x[0])
        vnorm = np.linalg.norm(v)
        if vnorm == 0.0:
            continue
        v /= vnorm
        H[k + 1 :, :] -= 2.0 * np.outer(v, v @ H[k + 1 :, :])
        H[:, k + 1 :] -= 2.0 * np.outer(H[:, k + 1 :] @ v, v)
        H[k + 2 :, k] = 0.0
    return H


def _hqr(h: NDArray[np.float64], max_iter: int) -> NDArray[np.complex128]:
    """Francis double-shift QR on an upper Hessenberg matrix (modified in place)."""
    n = h.shape[0]
    wr = np.zeros(n)
    wi = np.zeros(n)
    anorm = sum(abs(h[i, j]) for i in range(n) for j in range(max(i - 1, 0), n))
    nn = n - 1
    t = 0.0
    total = 0
    x = y = w = 0.0
    while nn >= 0:
        its = 0
        while True:
            # look for a negligible subdiagonal element
            l = nn
            while l >= 1:
                s = abs(h[l - 1, l - 1]) + abs(h[l, l])
                if s == 0.0:
                    s = anorm
                if abs(h[l, l - 1]) <= _EPS * s:
                    h[l, l - 1] = 0.0
                    break
                l -= 1
            x = h[nn, nn]
            if l == nn:
                wr[nn] = x + t
                wi[nn] = 0.0
                nn -= 1
                break
            y = h[nn - 1, nn - 1]
            w = h[nn, nn - 1] * h[nn - 1, nn]
            if l == nn - 1:
                p = 0.5 * (y - x)
                q = p * p + w
                z = math.sqrt(abs(q))
                x += t
                if q >= 0.0:
                    z = p + math.copysign(z, p)
                    wr[nn - 1] = wr[nn] = x + z
                    if z != 0.0:
                        wr[nn] = x - w / z
                    wi[nn - 1] = wi[nn] = 0.0
                else:
                    wr[nn - 1] = wr[nn] = x + p
                    wi[nn - 1] = -z
                    wi[nn] = z
                nn -= 2
                break
            if total >= max_iter:
                raise EigenConvergenceError(
                    f"QR iteration did not converge within {max_iter} iterations"
                )
            if its in (10, 20):
                # exceptional shift
                t += x
                for i in range(nn + 1):
                    h[i, i] -= x
                s = abs(h[nn, nn - 1]) + abs(h[nn - 1, nn - 2])
                x = y = 0.75 * s
                w = -0.4375 * s * s
            its += 1
            total += 1
            m = nn - 2
            while True:
                z = h[m, m]
                r = x - z
                s = y - z
                p = (r * s - w) / h[m + 1, m] + h[m, m + 1]
                q = h[m + 1, m + 1] - z - r - s
                r = h[m + 2, m + 1]
                s = abs(p) + abs(q) + abs(r)
                p /= s
                q /= s
                r /= s
                if m == l:
                    break
                u = abs(h[m, m - 1]) * (abs(q) + abs(r))
                v = abs(p) * (abs(h[m - 1, m - 1]) + abs(z) + abs(h[m + 1, m + 1]))
                if u <= _EPS * v:
                    break
                m -= 1
            for i in range(m + 2, nn + 1):
                h[i, i - 2] = 0.0
                if i != m + 2:
                    h[i, i - 3] = 0.0
            for k in range(m, nn):
                if k != m:
                    p = h[k, k - 1]
                    q = h[k + 1, k - 1]
                    r = h[k + 2, k - 1] if k != nn - 1 else 0.0
                    x = abs(p) + abs(q) + abs(r)
                    if x != 0.0:
                        p /= x
                        q /= x
                        r /= x
                s = math.copysign(math.sqrt(p * p + q * q + r * r), p)
                if s == 0.0:
                    continue
                if k == m:
                    if l != m:
                        h[k, k - 1] = -h[k, k - 1]
                else:
                    h[k, k - 1] = -s * x
                p += s
                x = p / s
                y = q / s
                z = r / s
                q /= p
                r /= p
                for j in range(k, nn + 1):
                    p = h[k, j] + q * h[k + 1, j]
                    if k != nn - 1:
                        p += r * h[k + 2, j]
                        h[k + 2, j] -= p * z
                    h[k + 1, j] -= p * y
                    h[k, j] -= p * x
                for i in range(l, min(nn, k + 3) + 1):
                    p = x * h[i, k] + y * h[i, k + 1]
                    if k != nn - 1:
                        p += z * h[i, k + 2]
                        h[i, k + 2] -= p * r
                    h[i, k + 1] -= p * q
                    h[i, k] -= p
    return wr + 1j * wi


def eigvals(a: ArrayLike, max_iter: int = 500) -> NDArray[np.complex128]:
    """Eigenvalues of a general real square matrix (unsorted).

    Raises
    ------
    EigenConvergenceError
        If the QR iteration needs more than ``max_iter`` iterations in total.
    """
    A = np.asarray(a, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix contains non-finite entries")
    if A.shape[0] == 0:
        return np.zeros(0, dtype=complex)
    H = hessenberg(balance(A))
    return _hqr(H, max_iter)
