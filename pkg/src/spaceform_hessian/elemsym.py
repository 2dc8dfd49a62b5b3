"""Elementary symmetric functions of spectra and symmetric matrices.

sigma_k is computed from the coefficients of prod_i (1 + t lambda_i).  For
matrices there are two independent routes: eigenvalues from a cyclic Jacobi
diagonalization, and Newton's identities on the power sums tr(A^j).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .exceptions import PreconditionError
from .jacobi import jacobi_eigenvalues

NM_HOLDS_TOL = 1e-12
NM_EQUALITY_TOL = 1e-10
QUOTIENT_RTOL = 1e-10
PD_RTOL = 1e-12


def binom(n: int, k: int) -> int:
    """Binomial coefficient with C(n, k) = 0 outside 0 <= k <= n."""
    if k < 0 or k > n or n < 0:
        return 0
    return comb(n, k)


# --------------------------------------------------------------------------
# spectra
# --------------------------------------------------------------------------

def _as_spectrum(lam) -> np.ndarray:
    arr = np.asarray(lam, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("spectrum must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(arr)):
        raise ValueError("spectrum entries must be finite")
    return arr


def elementary_symmetric(lam) -> np.ndarray:
    """All of sigma_0, ..., sigma_n of ``lam`` as an array of length n + 1."""
    lam = _as_spectrum(lam)
    e = np.zeros(lam.size + 1)
    e[0] = 1.0
    for i, x in enumerate(lam):
        e[1 : i + 2] = e[1 : i + 2] + x * e[0 : i + 1]
    return e


def sigma_k(lam, k: int) -> float:
    lam = _as_spectrum(lam)
    n = lam.size
    if k == 0:
        return 1.0
    if k < 0 or k > n:
        return 0.0
    e = np.zeros(k + 1)
    e[0] = 1.0
    for x in lam:
        e[1:] = e[1:] + x * e[:-1]
    return float(e[k])


def sigma_k_split(a, mult_a: int, b, mult_b: int, k: int):
    """sigma_k of the spectrum (a repeated mult_a times, b repeated mult_b times).

    Vectorized over array-valued ``a`` and ``b``; used for radial frames where
    the spectrum has a radial and a tangential eigenvalue.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if k == 0:
        return np.ones(np.broadcast(a, b).shape)[()]
    total = np.zeros(np.broadcast(a, b).shape)
    for j in range(max(0, k - mult_b), min(k, mult_a) + 1):
        total = total + comb(mult_a, j) * a**j * comb(mult_b, k - j) * b ** (k - j)
    return total[()]


def absolute_scale(lam, k: int) -> float:
    """sigma_k(|lambda|): the size of the terms summed in sigma_k(lambda)."""
    return sigma_k(np.abs(_as_spectrum(lam)), k)


def is_constant_spectrum(lam) -> bool:
    lam = _as_spectrum(lam)
    return float(lam.max() - lam.min()) < 1e-8 * (1.0 + abs(float(lam.mean())))


@dataclass(frozen=True)
class ConeReport:
    max_k: int
    sigmas: tuple[float, ...]

    def contains(self, k: int) -> bool:
        return self.max_k >= k


def garding_cone(lam) -> ConeReport:
    """Largest k with sigma_1, ..., sigma_k all positive (0 if sigma_1 <= 0)."""
    e = elementary_symmetric(lam)
    max_k = 0
    for j in range(1, e.size):
        if e[j] > 0.0:
            max_k = j
        else:
            break
    return ConeReport(max_k=max_k, sigmas=tuple(float(x) for x in e[1:]))


def _require_cone(lam, k: int) -> np.ndarray:
    e = elementary_symmetric(lam)
    for j in range(1, k + 1):
        if not e[j] > 0.0:
            raise PreconditionError(f"spectrum not in Gamma_{k}: sigma_{j} = {e[j]!r}")
    return e


def _e(e: np.ndarray, j: int) -> float:
    if j == 0:
        return 1.0
    if j < 0 or j >= e.size:
        return 0.0
    return float(e[j])


@dataclass(frozen=True)
class NewtonMaclaurinResult:
    lhs: float
    rhs: float
    holds: bool
    equality: bool
    constant: bool


def newton_maclaurin_check(lam, k: int) -> NewtonMaclaurinResult:
    """Compare (sigma_{k+1}/C(n,k+1)) / (sigma_k/C(n,k)) with the ratio one index down."""
    lam = _as_spectrum(lam)
    n = lam.size
    if not 1 <= k <= n - 1:
        raise PreconditionError(f"need 1 <= k <= n-1, got k={k}, n={n}")
    e = _require_cone(lam, k)
    lhs = (_e(e, k + 1) / binom(n, k + 1)) / (_e(e, k) / binom(n, k))
    rhs = (_e(e, k) / binom(n, k)) / (_e(e, k - 1) / binom(n, k - 1))
    return NewtonMaclaurinResult(
        lhs=lhs,
        rhs=rhs,
        holds=lhs <= rhs + NM_HOLDS_TOL,
        equality=abs(lhs - rhs) <= NM_EQUALITY_TOL,
        constant=is_constant_spectrum(lam),
    )


def maclaurin_power_check(lam, k: int) -> tuple[float, float, bool]:
    """sigma_{k+1}/C(n,k+1) <= (sigma_k/C(n,k))^((k+1)/k); returns (lhs, rhs, holds)."""
    lam = _as_spectrum(lam)
    n = lam.size
    if not 1 <= k <= n - 1:
        raise PreconditionError(f"need 1 <= k <= n-1, got k={k}, n={n}")
    e = _require_cone(lam, k)
    lhs = _e(e, k + 1) / binom(n, k + 1)
    rhs = (_e(e, k) / binom(n, k)) ** ((k + 1) / k)
    return lhs, rhs, lhs <= rhs * (1.0 + NM_HOLDS_TOL) + NM_HOLDS_TOL


def _check_orders(n: int, k: int, l: int) -> None:
    if not 0 <= l < k <= n:
        raise PreconditionError(f"need 0 <= l < k <= n, got l={l}, k={k}, n={n}")


def rescale_to_quotient(lam, k: int, l: int) -> np.ndarray:
    """Scale lam by t > 0 so that sigma_k/sigma_l = C(n,k)/C(n,l)."""
    lam = _as_spectrum(lam)
    n = lam.size
    _check_orders(n, k, l)
    e = _require_cone(lam, k)
    current = _e(e, k) / _e(e, l)
    target = binom(n, k) / binom(n, l)
    t = (target / current) ** (1.0 / (k - l))
    return t * lam


@dataclass(frozen=True)
class QuotientBounds:
    """Slacks of the four ratio bounds; each should be >= 0."""

    lower_k: float  # sigma_{k-1}/sigma_k - k/(n-k+1)
    lower_l: float  # sigma_{l+1}/sigma_l - (n-l)/(l+1)
    upper_k: float  # (n-k)/(k+1) - sigma_{k+1}/sigma_k
    upper_l: float  # l/(n-l+1) - sigma_{l-1}/sigma_l
    sigma_k_plus_1_nonpositive: bool
    n: int
    k: int
    l: int

    @property
    def slacks(self) -> tuple[float, float, float, float]:
        return (self.lower_k, self.lower_l, self.upper_k, self.upper_l)

    @property
    def min_slack(self) -> float:
        return min(self.slacks)

    @property
    def nontrivial(self) -> tuple[float, ...]:
        """Slacks that are not forced to zero by the constraint alone.

        With k = l + 1 the constraint fixes sigma_{k-1}/sigma_k, so both lower
        bounds are equalities for every admissible spectrum; the upper bounds
        degenerate to 0 >= 0 when k = n (resp. l = 0).
        """
        out = []
        if self.k - self.l >= 2:
            out += [self.lower_k, self.lower_l]
        if self.k < self.n:
            out.append(self.upper_k)
        if self.l >= 1:
            out.append(self.upper_l)
        return tuple(out)

    def sharp(self, tol: float = 1e-10) -> bool:
        """True if some non-degenerate bound holds with equality."""
        return any(abs(x) < tol for x in self.nontrivial)


def quotient_ratio_bounds(lam, k: int, l: int) -> QuotientBounds:
    lam = _as_spectrum(lam)
    n = lam.size
    _check_orders(n, k, l)
    e = _require_cone(lam, k)
    ratio = _e(e, k) / _e(e, l)
    target = binom(n, k) / binom(n, l)
    if abs(ratio - target) > QUOTIENT_RTOL * target:
        raise PreconditionError(
            f"sigma_k/sigma_l = {ratio!r} differs from C(n,k)/C(n,l) = {target!r}; rescale first"
        )
    sk, sl = _e(e, k), _e(e, l)
    return QuotientBounds(
        lower_k=_e(e, k - 1) / sk - k / (n - k + 1),
        lower_l=_e(e, l + 1) / sl - (n - l) / (l + 1),
        upper_k=(n - k) / (k + 1) - _e(e, k + 1) / sk,
        upper_l=l / (n - l + 1) - _e(e, l - 1) / sl,
        sigma_k_plus_1_nonpositive=_e(e, k + 1) <= 0.0,
        n=n,
        k=k,
        l=l,
    )


# --------------------------------------------------------------------------
# symmetric matrices
# --------------------------------------------------------------------------

def _as_symmetric(A) -> np.ndarray:
    a = np.asarray(A, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise PreconditionError("expected a square matrix")
    if not np.all(np.isfinite(a)):
        raise PreconditionError("matrix entries must be finite")
    if not np.array_equal(a, a.T):
        raise PreconditionError("matrix is not symmetric")
    return a


def sigmas_newton(A, dtype=float) -> np.ndarray:
    """sigma_0..sigma_n of a square matrix from Newton's identities on tr(A^j).

    Power sums cancel badly for larger n; pass ``dtype=np.longdouble`` when
    the result feeds a difference quotient.
    """
    a = np.asarray(A, dtype=dtype)
    n = a.shape[0]
    p = np.zeros(n + 1, dtype=dtype)
    power = np.eye(n, dtype=dtype)
    for j in range(1, n + 1):
        power = power @ a
        p[j] = np.trace(power)
    e = np.zeros(n + 1, dtype=dtype)
    e[0] = 1
    for k in range(1, n + 1):
        acc = 0.0
        for i in range(1, k + 1):
            acc += (-1) ** (i - 1) * e[k - i] * p[i]
        e[k] = acc / k
    return e


def sigmas_jacobi(A) -> np.ndarray:
    return elementary_symmetric(jacobi_eigenvalues(A))


def matrix_sigmas(A, method: str = "jacobi") -> np.ndarray:
    a = _as_symmetric(A)
    if method == "jacobi":
        return sigmas_jacobi(a)
    if method == "newton":
        return sigmas_newton(a)
    raise ValueError(f"unknown method {method!r}")


def sigma_k_matrix(A, k: int, method: str = "jacobi") -> float:
    e = matrix_sigmas(A, method)
    return _e(e, k)


def sigma_k_grad(A, k: int, method: str = "jacobi", sigmas=None) -> np.ndarray:
    """The matrix d sigma_k / d a_ij via G_k = sigma_{k-1} I - G_{k-1} A, G_1 = I."""
    a = _as_symmetric(A)
    n = a.shape[0]
    if not 1 <= k <= n:
        raise PreconditionError(f"need 1 <= k <= n, got k={k}, n={n}")
    e = matrix_sigmas(a, method) if sigmas is None else sigmas
    eye = np.eye(n)
    g = eye.copy()
    for j in range(2, k + 1):
        g = e[j - 1] * eye - g @ a
    return 0.5 * (g + g.T)


def _grad_or_zero(a: np.ndarray, j: int, e: np.ndarray) -> np.ndarray:
    if j == 0:
        return np.zeros_like(a)
    return sigma_k_grad(a, j, sigmas=e)


def quotient_derivative(A, k: int, l: int, method: str = "jacobi") -> np.ndarray:
    """F^{ij} = d(sigma_k/sigma_l)/d a_ij for A in Gamma_k."""
    a = _as_symmetric(A)
    n = a.shape[0]
    _check_orders(n, k, l)
    e = matrix_sigmas(a, method)
    for j in range(1, k + 1):
        if not e[j] > 0.0:
            raise PreconditionError(f"matrix not in Gamma_{k}: sigma_{j} = {e[j]!r}")
    sk, sl = e[k], _e(e, l)
    gk = sigma_k_grad(a, k, sigmas=e)
    gl = _grad_or_zero(a, l, e)
    return (gk * sl - sk * gl) / (sl * sl)


def positive_definiteness(M) -> tuple[float, float, bool]:
    """(min eigenvalue, max eigenvalue, min > PD_RTOL * max) via Jacobi."""
    w = jacobi_eigenvalues(_as_symmetric(0.5 * (np.asarray(M) + np.asarray(M).T)))
    lo, hi = float(w[0]), float(w[-1])
    return lo, hi, lo > PD_RTOL * abs(hi)


# --------------------------------------------------------------------------
# seeded corpora
# --------------------------------------------------------------------------

def random_symmetric(rng: np.random.Generator, n: int, low: float = -2.0, high: float = 2.0) -> np.ndarray:
    m = rng.uniform(low, high, size=(n, n))
    return np.triu(m) + np.triu(m, 1).T


def random_cone_spectrum(rng: np.random.Generator, n: int, k: int, max_tries: int = 100_000) -> np.ndarray:
    """Rejection-sample lambda_i ~ U(-0.5, 2) until lambda lies in Gamma_k."""
    for _ in range(max_tries):
        lam = rng.uniform(-0.5, 2.0, size=n)
        if garding_cone(lam).max_k >= k:
            return lam
    raise RuntimeError(f"no Gamma_{k} sample in {max_tries} tries (n={n})")


def random_orthogonal(rng: np.random.Generator, n: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def random_cone_matrix(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    lam = random_cone_spectrum(rng, n, k)
    q = random_orthogonal(rng, n)
    a = (q * lam) @ q.T
    return np.triu(a) + np.triu(a, 1).T
