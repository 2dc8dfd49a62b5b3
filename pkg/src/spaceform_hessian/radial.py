"""Radial solutions of sigma_k(b)/sigma_l(b) = C(n,k)/C(n,l), b = Hess u + K u g.

The symmetric solution on a geodesic ball B_R has b = g, i.e. u solves
u'' + K u = 1 with u'(0) = 0.  Writing u0 = u(0) and m = 1 - K u0,

    u = u0 V + (Phi - Phi(0)),   u' = m f,   u'' = m V,

which covers all three curvature signs without branching.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from . import geometry as geo
from .elemsym import binom, elementary_symmetric, sigma_k_split
from .exceptions import DomainError, ParameterError, ShootingError
from .geometry import SpaceForm

KU_TOL = -1e-12
SIGN_GRID = 1000
CSV_COLUMNS = ("r", "u", "du", "d2u", "lambda_rad", "lambda_tan", "P", "P_tilde", "w")

Profile = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class ProblemParams:
    sf: SpaceForm
    k: int
    l: int = 0
    c1: float = 0.0
    c2: float = 1.0

    def __post_init__(self) -> None:
        n = self.sf.n
        if not 0 <= self.l < self.k <= n:
            raise ParameterError(f"need 0 <= l < k <= n, got l={self.l}, k={self.k}, n={n}")
        if not (math.isfinite(self.c2) and self.c2 > 0):
            raise ParameterError(f"Neumann datum c2 must be > 0, got {self.c2!r}")
        if not math.isfinite(self.c1):
            raise ParameterError("c1 must be finite")

    @property
    def n(self) -> int:
        return self.sf.n

    @property
    def K(self) -> float:
        return self.sf.K

    @property
    def dirichlet(self) -> float:
        return self.sf.K * self.c1

    @property
    def target(self) -> float:
        return binom(self.n, self.k) / binom(self.n, self.l)

    @property
    def p_boundary_value(self) -> float:
        K, c1, c2 = self.K, self.c1, self.c2
        return K**3 * c1**2 + c2**2 - 2.0 * K * c1


@dataclass(frozen=True)
class RadialSolution:
    params: ProblemParams
    R: float
    profile: Profile = field(repr=False, compare=False)
    kind: str = "explicit"
    u0: float = math.nan

    def evaluate(self, r):
        """(u, u', u'') at radius r in [0, R]; vectorized."""
        arr = np.asarray(r, dtype=float)
        if np.any(arr < 0.0) or np.any(arr > self.R * (1.0 + 1e-14)):
            raise DomainError(f"radius outside [0, R={self.R}]")
        u, du, d2u = self.profile(np.clip(arr, 0.0, self.R))
        if arr.ndim == 0:
            return float(u), float(du), float(d2u)
        return u, du, d2u

    @property
    def sf(self) -> SpaceForm:
        return self.params.sf

    def min_ku(self, points: int = SIGN_GRID) -> float:
        r = np.linspace(0.0, self.R, points)
        u, _, _ = self.evaluate(r)
        return float(np.min(self.params.K * u))

    def sign_condition_holds(self) -> bool:
        """K u >= 0 on [0, R], checked a posteriori on a 1000-point grid."""
        return self.min_ku() >= KU_TOL


# --------------------------------------------------------------------------
# explicit solutions
# --------------------------------------------------------------------------

def _closed_form_profile(sf: SpaceForm, u0: float) -> Profile:
    m = 1.0 - sf.K * u0

    def profile(r):
        f = geo.warping(sf, r)
        V = f.first_derivative
        u = u0 * V + geo.potential_offset(sf, r)
        return u, m * f.value, m * V

    return profile


def explicit_radius(params: ProblemParams) -> float:
    """Ball radius of the symmetric solution, with admissibility diagnostics."""
    K, c1, c2 = params.K, params.c1, params.c2
    if K == 0:
        return c2
    denom = 1.0 - K * K * c1
    if denom <= 0.0:
        raise ParameterError(f"1 - K^2 c1 = {denom!r} must be positive (K={K}, c1={c1})")
    s = math.sqrt(abs(K))
    arg = c2 * s / denom
    if K > 0:
        R = math.atan(arg) / s
        if not R < params.sf.r_bar:
            raise ParameterError(f"R={R} not inside the open hemisphere")
        return R
    if not 0.0 < arg < 1.0:
        raise ParameterError(
            f"arctanh argument c2*sqrt(-K)/(1-K^2 c1) = {arg!r} must lie in (0, 1)"
        )
    return math.atanh(arg) / s


def explicit_solution(params: ProblemParams) -> RadialSolution:
    """The radially symmetric solution with u = K c1 and u' = c2 at r = R."""
    R = explicit_radius(params)
    K, c2 = params.K, params.c2
    if K == 0:
        u0 = -0.5 * c2 * c2
    else:
        s = math.sqrt(abs(K))
        if K > 0:
            amp = c2 / (s * math.sin(s * R))
            u0 = 1.0 / K - amp
        else:
            amp = c2 / (s * math.sinh(s * R))
            u0 = 1.0 / K + amp
    return RadialSolution(params, R, _closed_form_profile(params.sf, u0), "explicit", u0)


def perturb(sol: RadialSolution, epsilon: float) -> RadialSolution:
    """u + eps r^2 (R - r)^2; keeps u(R), u'(R) and u'(0)."""
    R = sol.R
    base = sol.profile

    def profile(r):
        u, du, d2u = base(r)
        p = r * r * (R - r) ** 2
        dp = 2.0 * r * (R - r) * (R - 2.0 * r)
        d2p = 2.0 * R * R - 12.0 * R * r + 12.0 * r * r
        return u + epsilon * p, du + epsilon * dp, d2u + epsilon * d2p

    return RadialSolution(sol.params, R, profile, f"perturbed({epsilon:g})", sol.u0)


# --------------------------------------------------------------------------
# ODE  v'' + K v = 1,  v(0) = v0,  v'(0) = 0
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class OdeProfile:
    r: np.ndarray
    v: np.ndarray
    dv: np.ndarray
    step: float


def _rk4_step_map(K: float, h: float) -> np.ndarray:
    """Affine map of one RK4 step for x = (v, v', 1), x' = A x."""
    A = np.array([[0.0, 1.0, 0.0], [-K, 0.0, 1.0], [0.0, 0.0, 0.0]])
    hA = h * A
    eye = np.eye(3)
    return eye + hA @ (eye + hA @ (eye / 2 + hA @ (eye / 6 + hA / 24)))


def _rk4_propagate(K: float, x0: np.ndarray, R: float, step: float) -> np.ndarray:
    steps = max(1, math.ceil(R / step - 1e-12))
    M = _rk4_step_map(K, R / steps)
    return np.linalg.matrix_power(M, steps) @ x0


def ode_solve(sf: SpaceForm, v0: float, r_max: float, step: float) -> OdeProfile:
    """Classical RK4 on v'' + K v = 1 from the pole to r_max."""
    if not step > 0:
        raise ValueError("step must be positive")
    geo._check_radius(sf, r_max)
    K = sf.K
    steps = max(1, math.ceil(r_max / step - 1e-12))
    h = r_max / steps

    def rhs(v, dv):
        return dv, 1.0 - K * v

    r = np.linspace(0.0, r_max, steps + 1)
    v = np.empty(steps + 1)
    dv = np.empty(steps + 1)
    v[0], dv[0] = v0, 0.0
    for i in range(steps):
        y, z = v[i], dv[i]
        k1 = rhs(y, z)
        k2 = rhs(y + 0.5 * h * k1[0], z + 0.5 * h * k1[1])
        k3 = rhs(y + 0.5 * h * k2[0], z + 0.5 * h * k2[1])
        k4 = rhs(y + h * k3[0], z + h * k3[1])
        v[i + 1] = y + h * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]) / 6.0
        dv[i + 1] = z + h * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]) / 6.0
    return OdeProfile(r, v, dv, h)


def ode_closed_form(sf: SpaceForm, v0: float, r):
    """Exact (v, v') for the same initial value problem."""
    f = geo.warping(sf, r)
    V = f.first_derivative
    return v0 * V + geo.potential_offset(sf, r), (1.0 - sf.K * v0) * f.value


def _shoot_cap(params: ProblemParams) -> float:
    K = params.K
    if K > 0:
        return params.sf.r_bar * (1.0 - 1e-12)
    if K < 0:
        # tanh(18.5) rounds to 1, so no admissible radius lies beyond this
        return 18.5 / math.sqrt(-K)
    return 4.0 * params.c2 + 1.0


def shoot_radius(params: ProblemParams, *, step: float = 2e-4, scan_points: int = 2000):
    """Find (R, v0) with v(R) = K c1 and v'(R) = c2 by shooting on the IVP.

    The ODE is linear, so v = v0 y1 + y2 with y1, y2 from unit initial data;
    v0 is eliminated and the remaining scalar equation in R is bracketed on a
    coarse RK4 pass, then solved by Brent's method with fine RK4 propagation.
    """
    K, target_v, target_dv = params.K, params.dirichlet, params.c2
    cap = _shoot_cap(params)

    def fundamental(R, h):
        y1 = _rk4_propagate(K, np.array([1.0, 0.0, 0.0]), R, h)
        y2 = _rk4_propagate(K, np.array([0.0, 0.0, 1.0]), R, h)
        return y1, y2

    def mismatch(R, h=step):
        y1, y2 = fundamental(R, h)
        return (target_v - y2[0]) * y1[1] - (target_dv - y2[1]) * y1[0]

    coarse_h = cap / scan_points
    M = _rk4_step_map(K, coarse_h)
    X = np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 1.0]])  # columns: y1, y2
    lo = hi = None
    prev_R, prev_g = 0.0, -target_dv
    for i in range(1, scan_points + 1):
        X = M @ X
        R = i * coarse_h
        g = (target_v - X[0, 1]) * X[1, 0] - (target_dv - X[1, 1]) * X[0, 0]
        if np.sign(g) != np.sign(prev_g):
            lo, hi = prev_R, R
            break
        prev_R, prev_g = R, g
    if lo is None:
        raise ShootingError(
            f"no radius in (0, {cap:.6g}) meets v(R)={target_v:g}, v'(R)={target_dv:g}"
        )
    if lo == 0.0:
        lo = 1e-300
    R = brentq(mismatch, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    y1, y2 = fundamental(R, step)
    # least squares on both boundary equations; y1 may vanish in one slot
    v0 = ((target_v - y2[0]) * y1[0] + (target_dv - y2[1]) * y1[1]) / (y1[0] ** 2 + y1[1] ** 2)
    end = v0 * y1 + y2
    scale = 1.0 + abs(v0) * float(np.max(np.abs(y1[:2]))) + float(np.max(np.abs(y2[:2])))
    if max(abs(end[0] - target_v), abs(end[1] - target_dv)) > 1e-8 * scale:
        raise ShootingError(
            f"root at R={R:.6g} does not meet the boundary data (v={end[0]:.6g}, v'={end[1]:.6g})"
        )
    return float(R), float(v0)


def shot_solution(params: ProblemParams, *, step: float = 2e-4) -> RadialSolution:
    """Radial profile from shooting, interpolated by cubic Hermite splines."""
    R, v0 = shoot_radius(params, step=step)
    prof = ode_solve(params.sf, v0, R, step)
    K = params.K
    spline = CubicHermiteSpline(prof.r, prof.v, prof.dv)
    dspline = CubicHermiteSpline(prof.r, prof.dv, 1.0 - K * prof.v)

    def profile(r):
        u = spline(r)
        return u, dspline(r), 1.0 - K * u

    return RadialSolution(params, R, profile, "shot", v0)


# --------------------------------------------------------------------------
# derived quantities
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BTensorSample:
    r: np.ndarray | float
    lambda_radial: np.ndarray | float
    lambda_tangential: np.ndarray | float


def b_tensor(sol: RadialSolution, r) -> BTensorSample:
    """Eigenvalues of b = Hess u + K u g in the radial frame."""
    u, du, d2u = sol.evaluate(r)
    h = geo.RadialScalar(u, du, d2u)
    lam_r, lam_t = geo.radial_hessian_eigenvalues(sol.sf, h, r, pole_atol=1e-10)
    K = sol.params.K
    return BTensorSample(r, lam_r + K * u, lam_t + K * u)


def sigma_of_b(sol: RadialSolution, r, j: int):
    b = b_tensor(sol, r)
    return sigma_k_split(b.lambda_radial, 1, b.lambda_tangential, sol.params.n - 1, j)


def pde_residual(sol: RadialSolution, r):
    """sigma_k(b)/sigma_l(b) - C(n,k)/C(n,l)."""
    p = sol.params
    sk = sigma_of_b(sol, r, p.k)
    sl = sigma_of_b(sol, r, p.l)
    if np.any(sl == 0.0):
        raise ZeroDivisionError("sigma_l(b) vanishes; b is outside the Garding cone")
    return sk / sl - p.target


def p_function(sol: RadialSolution, r):
    """P = |grad u|^2 + K u^2 - 2u."""
    u, du, _ = sol.evaluate(r)
    return du * du + sol.params.K * u * u - 2.0 * u


def p_tilde_function(sol: RadialSolution, r):
    """P~ = -<grad u, grad Phi> + u V + Phi."""
    u, du, _ = sol.evaluate(r)
    phi = geo.potential(sol.sf, r)
    return -du * phi.first_derivative + u * phi.second_derivative + phi.value


def explicit_p_tilde_value(params: ProblemParams) -> float:
    """Constant value of P~ on the explicit solution: -c2^2/2 (K=0), -c2/(K f(R)) otherwise."""
    if params.K == 0:
        return -0.5 * params.c2**2
    R = explicit_radius(params)
    return -params.c2 / (params.K * geo.warping(params.sf, R).value)


def _w_parts(sol: RadialSolution, r):
    u, du, d2u = sol.evaluate(r)
    V = geo.conformal_factor(sol.sf, r)
    v, dv, d2v = (np.asarray(x, dtype=float) for x in (V.value, V.first_derivative, V.second_derivative))
    if np.any(v <= 0.0):
        raise DomainError("conformal factor V must be positive")
    ub = u - sol.params.dirichlet
    w = ub / v
    dw = du / v - ub * dv / v**2
    d2w = d2u / v - 2.0 * du * dv / v**2 - ub * d2v / v**2 + 2.0 * ub * dv**2 / v**3
    return w, dw, d2w, v, dv


def w_function(sol: RadialSolution, r):
    """w = (u - K c1) / V."""
    return _w_parts(sol, r)[0]


def w_operator_residual(sol: RadialSolution, r):
    """Laplacian w + (2/V)<grad V, grad w> - n(1 - K^2 c1)/V in radial form."""
    arr = np.asarray(r, dtype=float)
    w, dw, d2w, v, dv = _w_parts(sol, arr)
    n, K, c1 = sol.params.n, sol.params.K, sol.params.c1
    f = np.asarray(geo.warping(sol.sf, arr).value, dtype=float)
    at_pole = arr == 0.0
    # (n-1)(V/f) w' -> (n-1) w''(0) at the pole
    tangential = np.where(at_pole, (n - 1) * d2w, (n - 1) * v * dw / np.where(at_pole, 1.0, f))
    res = d2w + tangential + 2.0 * dv * dw / v - n * (1.0 - K * K * c1) / v
    return res[()] if isinstance(res, np.ndarray) else res


def reduced_p_expression(lam, k: int, l: int, ku):
    """Half of F^{ij} P_ij after the maximum-principle reduction, on the spectrum ``lam``.

    F (-(k+1) s_{k+1}/s_k + (l+1) s_{l+1}/s_l - (k-l))
      + K u F (-(k-l) + (n-k+1) s_{k-1}/s_k - (n-l+1) s_{l-1}/s_l)
    """
    e = elementary_symmetric(lam)
    n = len(e) - 1
    s = lambda j: 0.0 if j < 0 or j > n else e[j]  # noqa: E731
    F = s(k) / s(l)
    first = -(k + 1) * s(k + 1) / s(k) + (l + 1) * s(l + 1) / s(l) - (k - l)
    second = -(k - l) + (n - k + 1) * s(k - 1) / s(k) - (n - l + 1) * s(l - 1) / s(l)
    return F * first + ku * F * second


def reduced_p_tilde_expression(lam, k: int, l: int, V: float = 1.0):
    """V F ((n-k+1) s_{k-1}/s_k - (n-l+1) s_{l-1}/s_l - (k-l))."""
    e = elementary_symmetric(lam)
    n = len(e) - 1
    s = lambda j: 0.0 if j < 0 or j > n else e[j]  # noqa: E731
    F = s(k) / s(l)
    return V * F * ((n - k + 1) * s(k - 1) / s(k) - (n - l + 1) * s(l - 1) / s(l) - (k - l))


def radial_spectrum(sample: BTensorSample, n: int, index: int | None = None) -> np.ndarray:
    """Expand a b-tensor sample into its n eigenvalues (one radius)."""
    lr = np.asarray(sample.lambda_radial)
    lt = np.asarray(sample.lambda_tangential)
    if index is not None:
        lr, lt = lr[index], lt[index]
    return np.array([float(lr)] + [float(lt)] * (n - 1))


# --------------------------------------------------------------------------
# export
# --------------------------------------------------------------------------

def sample_table(sol: RadialSolution, r) -> np.ndarray:
    """Rows (r, u, u', u'', lambda_rad, lambda_tan, P, P~, w)."""
    r = np.asarray(r, dtype=float)
    u, du, d2u = sol.evaluate(r)
    b = b_tensor(sol, r)
    cols = [r, u, du, d2u, b.lambda_radial, b.lambda_tangential,
            p_function(sol, r), p_tilde_function(sol, r), w_function(sol, r)]
    return np.column_stack([np.broadcast_to(np.asarray(c, dtype=float), r.shape) for c in cols])


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(sol: RadialSolution, stream, points: int = 200, metadata: dict | None = None) -> None:
    """Write the sampled solution; '# key=value' metadata lines precede the header."""
    for key, value in (metadata or {}).items():
        stream.write(f"# {key}={value}\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in sample_table(sol, np.linspace(0.0, sol.R, points)):
        writer.writerow([format_float(x) for x in row])


def to_csv_string(sol: RadialSolution, points: int = 200, metadata: dict | None = None) -> str:
    buf = io.StringIO()
    write_csv(sol, buf, points, metadata)
    return buf.getvalue()



# --------------------------------------------------------------------------
# parameter matrix
# --------------------------------------------------------------------------

MATRIX_DIMS = (2, 3, 4, 6)
MATRIX_DATA = {
    -1.0: ((0.0, 0.5), (0.5, 0.3)),
    0.0: ((0.0, 1.5), (0.5, 0.7)),
    1.0: ((0.0, 0.5), (0.5, 0.5), (0.8, 0.3)),
}


def matrix_orders(n: int) -> list[tuple[int, int]]:
    pairs = [(1, 0), (2, 0), (2, 1), (n, 0)]
    if n >= 3:
        pairs.append((3, 1))
    return sorted(set(pairs))


def parameter_matrix(*, l_zero_only: bool = False) -> list[ProblemParams]:
    """Test grid of admissible (n, k, l, K, c1, c2); deterministic order.

    Data pairs are chosen so each radius is admissible; for K = 1 the c1 = 0
    entry violates K u >= 0 at the pole, which is allowed but flagged.
    """
    out = []
    for n in MATRIX_DIMS:
        for k, l in matrix_orders(n):
            if l_zero_only and l != 0:
                continue
            for K, pairs in MATRIX_DATA.items():
                for c1, c2 in pairs:
                    out.append(ProblemParams(SpaceForm(n, K), k, l, c1, c2))
    return out
