"""Rellich-Pohozaev identities for radial k-Hessian solutions on geodesic balls.

Volume integrals reduce to ``omega_{n-1} int_0^R h(r) f(r)^{n-1} dr`` and are
evaluated with composite Gauss-Legendre quadrature under panel doubling.
Surface integrals over the sphere r = R are exact products of the area with
the integrand at R, using the radial frame with nu = d/dr, Phi_l = f(R) in
the radial slot, and sigma_k^{ij} diagonal with entries sigma_{k-1}(lambda | i).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import geometry as geo
from .elemsym import binom, sigma_k_split
from .exceptions import NotASolutionError
from .radial import RadialSolution, b_tensor, pde_residual, perturb

IDENTITIES = ("L6_1", "L6_2_i", "L6_2_ii", "L6_3")
BOUNDARY_TERMS = ("sigma_Phi_nu", "sigma_uPhi_nu", "sigma_gradu2_Phi_nu")
REPORT_COLUMNS = (
    "identity_id", "n", "k", "K", "c1", "c2", "lhs", "rhs",
    "abs_residual", "rel_residual", "panels", "converged",
)

DEFAULT_PANELS = 64
DEFAULT_NODES = 8
MAX_REFINEMENTS = 4
VALUE_RTOL = 1e-12
RESIDUAL_FLOOR = 1e-11
SOLUTION_TOL = 1e-8

Integrand = Callable[[RadialSolution, np.ndarray], np.ndarray]


# --------------------------------------------------------------------------
# quadrature
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureGrid:
    R: float
    panels: int = DEFAULT_PANELS
    nodes_per_panel: int = DEFAULT_NODES
    refinement_level: int = 0
    nodes: np.ndarray = field(init=False, repr=False, compare=False)
    weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.panels < 1 or self.nodes_per_panel < 1:
            raise ValueError("panels and nodes_per_panel must be >= 1")
        x, w = np.polynomial.legendre.leggauss(self.nodes_per_panel)
        edges = np.linspace(0.0, self.R, self.panels + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        object.__setattr__(self, "nodes", (mid[:, None] + half[:, None] * x).ravel())
        object.__setattr__(self, "weights", (half[:, None] * w).ravel())

    def refined(self) -> QuadratureGrid:
        return replace(self, panels=2 * self.panels, refinement_level=self.refinement_level + 1)

    def integrate(self, values: np.ndarray) -> float:
        return float(np.dot(self.weights, values))


def measure_density(sol: RadialSolution, r: np.ndarray) -> np.ndarray:
    """omega_{n-1} f(r)^{n-1}, so that d mu = density * dr for radial integrands."""
    return np.asarray(geo.sphere_area(sol.sf, r))


def bulk_integral(sol: RadialSolution, integrand: Integrand, grid: QuadratureGrid) -> float:
    """int_{B_R} h d mu for a radial integrand h(sol, r)."""
    r = grid.nodes
    return grid.integrate(np.asarray(integrand(sol, r)) * measure_density(sol, r))


@dataclass(frozen=True)
class ConvergedIntegral:
    value: float
    grid: QuadratureGrid
    history: tuple[float, ...]
    converged: bool


def bulk_integral_converged(
    sol: RadialSolution,
    integrand: Integrand,
    grid: QuadratureGrid | None = None,
    max_refinements: int = MAX_REFINEMENTS,
    rtol: float = VALUE_RTOL,
) -> ConvergedIntegral:
    """Panel doubling until two successive values agree to ``rtol``."""
    grid = grid or QuadratureGrid(sol.R)
    history = [bulk_integral(sol, integrand, grid)]
    for _ in range(max_refinements):
        grid = grid.refined()
        history.append(bulk_integral(sol, integrand, grid))
        if abs(history[-1] - history[-2]) <= rtol * max(abs(history[-1]), 1e-300):
            return ConvergedIntegral(history[-1], grid, tuple(history), True)
    return ConvergedIntegral(history[-1], grid, tuple(history), False)


# --------------------------------------------------------------------------
# radial-frame contractions
# --------------------------------------------------------------------------

def sigma_grad_diagonal(lam_rad, lam_tan, n: int, k: int):
    """Diagonal of sigma_k^{ij}(b) in the radial frame: (radial entry, tangential entry).

    sigma_k^{ii} = sigma_{k-1}(lambda | i); removing the radial eigenvalue leaves
    n-1 copies of lam_tan, removing a tangential one leaves lam_rad and n-2 copies.
    """
    radial = sigma_k_split(lam_rad, 0, lam_tan, n - 1, k - 1)
    tangential = sigma_k_split(lam_rad, 1, lam_tan, n - 2, k - 1)
    return radial, tangential


def _frame(sol: RadialSolution, r):
    p = sol.params
    b = b_tensor(sol, r)
    lam_r, lam_t = b.lambda_radial, b.lambda_tangential
    srr, stt = sigma_grad_diagonal(lam_r, lam_t, p.n, p.k)
    skm1 = sigma_k_split(lam_r, 1, lam_t, p.n - 1, p.k - 1)
    return lam_r, lam_t, srr, stt, skm1


def boundary_reduce(sol: RadialSolution, term: str) -> float:
    """Exact surface integral over r = R of one of the boundary integrands.

    ``sigma_Phi_nu``         int sigma_k^{ij} Phi_i nu_j dS
    ``sigma_uPhi_nu``        int sigma_k^{ij} u_{il} Phi_l nu_j dS
    ``sigma_gradu2_Phi_nu``  int sigma_k^{li} |grad u|^2 Phi_l nu_i dS
    """
    R = sol.R
    area = float(geo.sphere_area(sol.sf, R))
    fR = float(geo.warping(sol.sf, R).value)
    _, du, d2u = sol.evaluate(R)
    _, _, srr, _, _ = _frame(sol, R)
    base = area * float(srr) * fR
    if term == "sigma_Phi_nu":
        return base
    if term == "sigma_uPhi_nu":
        return base * d2u
    if term == "sigma_gradu2_Phi_nu":
        return base * du * du
    raise ValueError(f"unknown boundary term {term!r}; expected one of {BOUNDARY_TERMS}")


# --------------------------------------------------------------------------
# integrands (functions of (sol, r))
# --------------------------------------------------------------------------

def _V(sol, r):
    return np.asarray(geo.conformal_factor(sol.sf, r).value)


def _uV(sol, r):
    return sol.evaluate(r)[0] * _V(sol, r)


def _ubarV(sol, r):
    return (sol.evaluate(r)[0] - sol.params.dirichlet) * _V(sol, r)


def _skm1(sol, r):
    return _frame(sol, r)[4]


def _skm1_V(sol, r):
    return _skm1(sol, r) * _V(sol, r)


def _skm1_u2_V(sol, r):
    u = sol.evaluate(r)[0]
    return _skm1(sol, r) * u * u * _V(sol, r)


def _skm1_du2_V(sol, r):
    du = sol.evaluate(r)[1]
    return _skm1(sol, r) * du * du * _V(sol, r)


def _sigma_u_phi_integrand(sol, r):
    p = sol.params
    return (p.k * binom(p.n, p.k) - p.K**2 * p.c1 * (p.n - p.k + 1) * _skm1(sol, r)) * _V(sol, r)


def _ubar_rhs_integrand(sol, r):
    p = sol.params
    u, du, _ = sol.evaluate(r)
    return 0.5 * (du * du + p.K * u * u - p.K**3 * p.c1**2 - p.c2**2) * _skm1(sol, r) * _V(sol, r)


# --------------------------------------------------------------------------
# identity reports
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class IdentityReport:
    identity_id: str
    lhs: float
    rhs: float
    abs_residual: float
    rel_residual: float
    panels: int
    nodes_per_panel: int
    refinement_level: int
    converged: bool
    n: int
    k: int
    K: float
    c1: float
    c2: float
    permissive: bool = False
    label: str = "explicit"
    terms: dict = field(default_factory=dict, compare=False)

    def row(self, digits: int = 17) -> list[str]:
        fmt = lambda x: format(float(x), f".{digits}g")  # noqa: E731
        return [
            self.identity_id, str(self.n), str(self.k), fmt(self.K), fmt(self.c1), fmt(self.c2),
            fmt(self.lhs), fmt(self.rhs), fmt(self.abs_residual), fmt(self.rel_residual),
            str(self.panels), str(self.converged).lower(),
        ]


def relative_residual(lhs: float, rhs: float) -> float:
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)


def _sides(sol: RadialSolution, identity_id: str, grid: QuadratureGrid):
    """(lhs, rhs, terms) on one grid; surface terms exact, volume terms by quadrature."""
    p = sol.params
    n, k, K, c1, c2 = p.n, p.k, p.K, p.c1, p.c2
    bulk = lambda h: bulk_integral(sol, h, grid)  # noqa: E731
    if identity_id == "L6_1":
        terms = {
            "c1K_sigma_uPhi_nu": c1 * K * boundary_reduce(sol, "sigma_uPhi_nu"),
            "c1sq_K3_sigma_Phi_nu": 0.5 * c1 * c1 * K**3 * boundary_reduce(sol, "sigma_Phi_nu"),
            "K_skm1_u2_V": 0.5 * (n - k + 1) * K * bulk(_skm1_u2_V),
            "c2sq_sigma_Phi_nu": -0.5 * c2 * c2 * boundary_reduce(sol, "sigma_Phi_nu"),
            "skm1_du2_V": 0.5 * (n - k + 1) * bulk(_skm1_du2_V),
        }
        return k * binom(n, k) * bulk(_uV), sum(terms.values()), terms
    if identity_id == "L6_2_i":
        return boundary_reduce(sol, "sigma_Phi_nu"), (n - k + 1) * bulk(_skm1_V), {}
    if identity_id == "L6_2_ii":
        return boundary_reduce(sol, "sigma_uPhi_nu"), bulk(_sigma_u_phi_integrand), {}
    if identity_id == "L6_3":
        return binom(n, k - 1) * bulk(_ubarV), bulk(_ubar_rhs_integrand), {}
    raise ValueError(f"unknown identity {identity_id!r}; expected one of {IDENTITIES}")


def assert_solution(sol: RadialSolution, points: int = 200) -> float:
    """Max |PDE residual| on a grid; raises unless sol solves the l = 0 problem."""
    if sol.params.l != 0:
        raise NotASolutionError("the integral identities are stated for the k-Hessian case l = 0")
    r = np.linspace(0.0, sol.R, points)
    worst = float(np.max(np.abs(pde_residual(sol, r))))
    if not worst < SOLUTION_TOL:
        raise NotASolutionError(
            f"not a solution: max |sigma_k(b) - C(n,k)| = {worst:.3e} >= {SOLUTION_TOL:g}"
        )
    return worst


def verify_identity(
    sol: RadialSolution,
    identity_id: str,
    grid: QuadratureGrid | None = None,
    *,
    max_refinements: int = MAX_REFINEMENTS,
    permissive: bool = False,
) -> IdentityReport:
    """Evaluate both sides of an integral identity with refinement-certified quadrature.

    Refinement stops once lhs and rhs each change by less than 1e-12 relative.
    ``converged`` additionally requires the relative residual to be stable
    across the last refinement (within 10%, or both values below 1e-11).
    """
    if not permissive:
        assert_solution(sol)
    grid = grid or QuadratureGrid(sol.R)
    lhs, rhs, terms = _sides(sol, identity_id, grid)
    res = relative_residual(lhs, rhs)
    converged = False
    for _ in range(max_refinements):
        finer = grid.refined()
        lhs2, rhs2, terms2 = _sides(sol, identity_id, finer)
        res2 = relative_residual(lhs2, rhs2)
        settled = all(
            abs(a - b) <= VALUE_RTOL * max(abs(a), abs(b), 1e-300)
            for a, b in ((lhs, lhs2), (rhs, rhs2))
        )
        stable = max(res, res2) < RESIDUAL_FLOOR or abs(res2 - res) <= 0.1 * max(res, res2)
        grid, lhs, rhs, terms, res = finer, lhs2, rhs2, terms2, res2
        if settled:
            converged = stable
            break
    p = sol.params
    return IdentityReport(
        identity_id=identity_id, lhs=lhs, rhs=rhs, abs_residual=abs(lhs - rhs),
        rel_residual=res, panels=grid.panels, nodes_per_panel=grid.nodes_per_panel,
        refinement_level=grid.refinement_level, converged=converged,
        n=p.n, k=p.k, K=p.K, c1=p.c1, c2=p.c2, permissive=permissive, label=sol.kind,
        terms=terms,
    )


def negative_control(
    sol: RadialSolution,
    epsilon: float,
    identity_id: str = "L6_3",
    grid: QuadratureGrid | None = None,
    *,
    max_refinements: int = MAX_REFINEMENTS,
) -> IdentityReport:
    """The identity evaluated on u + eps r^2 (R-r)^2, bypassing the solution check."""
    target = sol if epsilon == 0 else perturb(sol, epsilon)
    return verify_identity(
        target, identity_id, grid, max_refinements=max_refinements, permissive=epsilon != 0
    )


# --------------------------------------------------------------------------
# intermediate divergence steps
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DivergenceResiduals:
    """Pointwise residual of the trace step and integrated residuals of the two splittings."""

    pointwise_I: float
    integrated_I11: float
    integrated_I12: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.pointwise_I, self.integrated_I11, self.integrated_I12)


def trace_step_residual(sol: RadialSolution, r):
    """k C(n,k) u V - [sigma_k^{ij} u_ij u V + (n-k+1) K sigma_{k-1} u^2 V], pointwise."""
    p = sol.params
    n, k, K = p.n, p.k, p.K
    arr = np.asarray(r, dtype=float)
    u, du, d2u = sol.evaluate(arr)
    _, lam_t, srr, stt, skm1 = _frame(sol, arr)
    V = _V(sol, arr)
    u_tan = lam_t - K * u  # tangential Hessian eigenvalue of u (limit u''(0) at the pole)
    contraction = srr * d2u + (n - 1) * stt * u_tan
    lhs = k * binom(n, k) * u * V
    rhs = contraction * u * V + (n - k + 1) * K * skm1 * u * u * V
    return (lhs - rhs)[()] if isinstance(lhs, np.ndarray) else lhs - rhs


def verify_divergence_steps(
    sol: RadialSolution, r: float, grid: QuadratureGrid | None = None
) -> DivergenceResiduals:
    """Residuals of the trace step at r, and of the two divergence splittings over B_R.

    The splittings are checked by integrating the non-divergence side over the
    ball and comparing with the exact surface value of the divergence term:

      int_S sigma_k^{ij} Phi_i u^2 nu_j = int [(n-k+1) sigma_{k-1} u^2 V + 2 sigma_k^{ij} Phi_i u u_j]
      1/2 int_S sigma_k^{li} |grad u|^2 Phi_l nu_i
          = int [sigma_k^{ij} u_il u_j Phi_l + (n-k+1)/2 sigma_{k-1} |grad u|^2 V]
    """
    p = sol.params
    n, k = p.n, p.k
    grid = grid or QuadratureGrid(sol.R)

    def i11_volume(s, x):
        u, du, _ = s.evaluate(x)
        _, _, srr, _, skm1 = _frame(s, x)
        f = np.asarray(geo.warping(s.sf, x).value)
        return (n - k + 1) * skm1 * u * u * _V(s, x) + 2.0 * srr * f * u * du

    def i12_volume(s, x):
        _, du, d2u = s.evaluate(x)
        _, _, srr, _, skm1 = _frame(s, x)
        f = np.asarray(geo.warping(s.sf, x).value)
        return srr * d2u * du * f + 0.5 * (n - k + 1) * skm1 * du * du * _V(s, x)

    u_R = sol.evaluate(sol.R)[0]
    surface_i11 = boundary_reduce(sol, "sigma_Phi_nu") * u_R * u_R
    surface_i12 = 0.5 * boundary_reduce(sol, "sigma_gradu2_Phi_nu")
    vol_i11 = bulk_integral_converged(sol, i11_volume, grid).value
    vol_i12 = bulk_integral_converged(sol, i12_volume, grid).value
    # both sides vanish when u(R) = 0, so scale by the integral of |integrand|
    mag_i11 = bulk_integral(sol, lambda s, x: np.abs(i11_volume(s, x)), grid)
    mag_i12 = bulk_integral(sol, lambda s, x: np.abs(i12_volume(s, x)), grid)
    return DivergenceResiduals(
        pointwise_I=float(abs(trace_step_residual(sol, r))),
        integrated_I11=abs(surface_i11 - vol_i11) / max(abs(surface_i11), mag_i11, 1e-300),
        integrated_I12=abs(surface_i12 - vol_i12) / max(abs(surface_i12), mag_i12, 1e-300),
    )


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------

def reports_to_csv(reports, stream=None) -> str:
    buf = stream or io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for rep in reports:
        writer.writerow(rep.row())
    return buf.getvalue() if stream is None else ""


def reports_to_text(reports) -> str:
    rows = [list(REPORT_COLUMNS)] + [rep.row(digits=6) for rep in reports]
    widths = [max(len(row[i]) for row in rows) for i in range(len(REPORT_COLUMNS))]
    lines = ["  ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in rows]
    return "\n".join(lines) + "\n"


def sort_reports(reports):
    """Deterministic order: identity id, then parameters."""
    order = {name: i for i, name in enumerate(IDENTITIES)}
    return sorted(reports, key=lambda r: (order.get(r.identity_id, 99), r.n, r.k, r.K, r.c1, r.c2, r.label))
