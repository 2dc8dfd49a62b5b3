"""Space forms M^n(K) as warped products dr^2 + f(r)^2 g_{S^{n-1}}.

All functions take an arc-length radius ``r`` (scalar or numpy array) and
return :class:`RadialScalar` carrying the value and the first two radial
derivatives.  For ``|K| < SMALL_CURVATURE`` the trigonometric/hyperbolic
closed forms are replaced by truncated series in ``K r^2`` wherever
``|K| r^2 < SERIES_RANGE``; beyond that the closed forms carry no cancellation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, SingularityError

SMALL_CURVATURE = 1e-8
SERIES_RANGE = 1e-2  # truncation error ~ SERIES_RANGE^5 / 11!
_SERIES_TERMS = 5  # powers (K r^2)^0 .. (K r^2)^4


@dataclass(frozen=True)
class SpaceForm:
    n: int
    K: float

    def __post_init__(self) -> None:
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"dimension must be an integer >= 2, got {self.n!r}")
        if not math.isfinite(self.K):
            raise ValueError(f"curvature must be finite, got {self.K!r}")

    @property
    def r_bar(self) -> float:
        """Upper end of the radius range: pi/(2 sqrt K) for K > 0, else inf."""
        if self.K > 0:
            return math.pi / (2.0 * math.sqrt(self.K))
        return math.inf

    def contains(self, r: float) -> bool:
        """True if ``r`` is strictly inside the admissible range."""
        return 0.0 <= r < self.r_bar


@dataclass(frozen=True)
class RadialScalar:
    value: np.ndarray | float
    first_derivative: np.ndarray | float
    second_derivative: np.ndarray | float


def _check_radius(sf: SpaceForm, r) -> np.ndarray:
    arr = np.asarray(r, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("radius must be finite")
    if np.any(arr < 0.0):
        raise DomainError(f"radius must be non-negative, got min {arr.min()!r}")
    # the closed hemisphere is allowed for evaluation; solution radii are checked
    # against the open range separately
    if sf.K > 0 and np.any(arr > sf.r_bar * (1.0 + 1e-15)):
        raise DomainError(
            f"radius {arr.max()!r} beyond hemisphere bound {sf.r_bar!r} for K={sf.K}"
        )
    return arr


def _out(x: np.ndarray, like):
    return float(x) if np.ndim(like) == 0 else x


def _series(K: float, r: np.ndarray, offset: int) -> np.ndarray:
    # sum_j (-K r^2)^j / (2j + offset)!
    z = -K * r * r
    total = np.zeros_like(r)
    term = np.ones_like(r)
    for j in range(_SERIES_TERMS):
        total = total + term / math.factorial(2 * j + offset)
        term = term * z
    return total


def _use_series(K: float, r: np.ndarray) -> np.ndarray:
    if K == 0:
        return np.ones(r.shape, dtype=bool)
    if abs(K) >= SMALL_CURVATURE:
        return np.zeros(r.shape, dtype=bool)
    return abs(K) * r * r < SERIES_RANGE


def _closed_f_V_offset(K: float, r: np.ndarray):
    # offset = (1 - V)/K written as a square to avoid cancellation
    s = math.sqrt(abs(K))
    x = s * r
    if K > 0:
        return np.sin(x) / s, np.cos(x), 2.0 * np.sin(0.5 * x) ** 2 / K
    return np.sinh(x) / s, np.cosh(x), -2.0 * np.sinh(0.5 * x) ** 2 / K


def _f_V_offset(sf: SpaceForm, r: np.ndarray):
    K = sf.K
    series = _use_series(K, r)
    if np.all(series):
        return r * _series(K, r, 1), _series(K, r, 0), r * r * _series(K, r, 2)
    closed = _closed_f_V_offset(K, r)
    if not np.any(series):
        return closed
    approx = (r * _series(K, r, 1), _series(K, r, 0), r * r * _series(K, r, 2))
    return tuple(np.where(series, a, c) for a, c in zip(approx, closed))


def _f_and_V(sf: SpaceForm, r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    f, V, _ = _f_V_offset(sf, r)
    return f, V


def warping(sf: SpaceForm, r) -> RadialScalar:
    """Warping function f with f'' + K f = 0, f(0) = 0, f'(0) = 1."""
    arr = _check_radius(sf, r)
    f, V = _f_and_V(sf, arr)
    return RadialScalar(_out(f, r), _out(V, r), _out(-sf.K * f, r))


def conformal_factor(sf: SpaceForm, r) -> RadialScalar:
    """V = f'(r), with V' = -K f and V'' = -K V."""
    arr = _check_radius(sf, r)
    f, V = _f_and_V(sf, arr)
    return RadialScalar(_out(V, r), _out(-sf.K * f, r), _out(-sf.K * V, r))


def potential_offset(sf: SpaceForm, r) -> np.ndarray | float:
    """Phi(r) - Phi(0), continuous in K (equals r^2/2 at K = 0)."""
    arr = _check_radius(sf, r)
    return _out(_f_V_offset(sf, arr)[2], r)


def potential_at_pole(sf: SpaceForm) -> float:
    """Phi(0): 0 for K = 0, -1/K otherwise."""
    return 0.0 if sf.K == 0 else -1.0 / sf.K


def potential(sf: SpaceForm, r) -> RadialScalar:
    """Potential Phi with grad Phi = f d/dr and Hess Phi = V g."""
    arr = _check_radius(sf, r)
    f, V, offset = _f_V_offset(sf, arr)
    K = sf.K
    if K == 0:
        phi = 0.5 * arr * arr
    elif abs(K) < SMALL_CURVATURE:
        phi = potential_at_pole(sf) + offset
    else:
        phi = -V / K
    return RadialScalar(_out(phi, r), _out(f, r), _out(V, r))


def radial_hessian_eigenvalues(sf: SpaceForm, h: RadialScalar, r, *, pole_atol: float = 1e-12):
    """Eigenvalues of the Hessian of a radial function h.

    Returns ``(h'', h' f'/f)``; the second has multiplicity n - 1.  At r = 0
    both equal h''(0), which requires h'(0) = 0.
    """
    arr = _check_radius(sf, r)
    h1 = np.asarray(h.first_derivative, dtype=float)
    h2 = np.asarray(h.second_derivative, dtype=float)
    h1, h2 = np.broadcast_to(h1, arr.shape), np.broadcast_to(h2, arr.shape)
    f, V = _f_and_V(sf, arr)
    at_pole = arr == 0.0
    if np.any(at_pole & (np.abs(h1) > pole_atol)):
        raise SingularityError("tangential Hessian eigenvalue is singular at r=0 when h'(0) != 0")
    safe_f = np.where(at_pole, 1.0, f)
    tangential = np.where(at_pole, h2, h1 * V / safe_f)
    return _out(np.array(h2, dtype=float), r), _out(tangential, r)


def unit_sphere_area(n: int) -> float:
    """omega_{n-1} = 2 pi^{n/2} / Gamma(n/2), the area of the unit S^{n-1}."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n % 2 == 0:
        m = n // 2
        return 2.0 * math.pi**m / math.factorial(m - 1)
    # Gamma(n/2) = (n-2)!! sqrt(pi) / 2^{(n-1)/2}
    m = (n - 1) // 2
    double_fact = math.prod(range(n - 2, 0, -2)) if n > 2 else 1
    gamma_half = double_fact * math.sqrt(math.pi) / 2.0**m
    return 2.0 * math.pi ** (n / 2.0) / gamma_half


def sphere_area(sf: SpaceForm, r) -> np.ndarray | float:
    """Area of the geodesic sphere of radius r: omega_{n-1} f(r)^{n-1}."""
    arr = _check_radius(sf, r)
    f, _ = _f_and_V(sf, arr)
    return _out(unit_sphere_area(sf.n) * f ** (sf.n - 1), r)
