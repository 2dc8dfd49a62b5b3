"""Cyclic Jacobi diagonalization for small dense symmetric matrices."""

from __future__ import annotations

import math

import numpy as np

_EPS = np.finfo(float).eps


def jacobi_eigh(A, *, max_sweeps: int = 60):
    """Eigenvalues (ascending) and eigenvectors of a symmetric matrix.

    Row-cyclic sweeps with the stable rotation of Rutishauser.  An
    off-diagonal entry is annihilated without rotating once it is negligible
    against both diagonal entries (or against eps * ||A||_F); iteration stops
    after a sweep that performs no rotation.
    """
    a = np.array(A, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    v = np.eye(n)
    amax = float(np.max(np.abs(a))) if a.size else 0.0
    if n == 1 or amax == 0.0:
        return np.diag(a).copy(), v
    # work on a unit-sized copy so products of entries neither under- nor overflow
    a /= amax
    floor = _EPS * _EPS * float(np.linalg.norm(a))
    for _ in range(max_sweeps):
        rotated = False
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= floor or (
                    abs(apq) <= 0.5 * _EPS * math.sqrt(abs(a[p, p] * a[q, q]))
                ):
                    a[p, q] = a[q, p] = 0.0
                    continue
                rotated = True
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                rp = a[p, :].copy()
                rq = a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                a[p, q] = a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
        if not rotated:
            break
    else:
        raise RuntimeError("Jacobi iteration did not converge")
    w = np.diag(a) * amax
    order = np.argsort(w)
    return w[order], v[:, order]


def jacobi_eigenvalues(A, **kwargs) -> np.ndarray:
    return jacobi_eigh(A, **kwargs)[0]
