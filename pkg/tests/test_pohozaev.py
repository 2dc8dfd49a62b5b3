from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.integrate import quad

from spaceform_hessian import pohozaev as po
from spaceform_hessian import radial as rd
from spaceform_hessian.elemsym import binom, sigma_k_grad
from spaceform_hessian.exceptions import NotASolutionError
from spaceform_hessian.geometry import SpaceForm, conformal_factor, sphere_area, unit_sphere_area, warping


def solution(n=3, K=0.0, k=2, l=0, c1=0.0, c2=1.5):
    return rd.explicit_solution(rd.ProblemParams(SpaceForm(n, K), k, l, c1, c2))


def quad_ball(sol, h):
    """Adaptive-quadrature reference for int_{B_R} h d mu."""
    val, _ = quad(lambda r: float(h(sol, np.array([r]))[0] * sphere_area(sol.sf, r)), 0, sol.R,
                  epsabs=1e-14, epsrel=1e-13, limit=200)
    return val


# quadrature ----------------------------------------------------------------------

def test_ball_volume():
    sol = solution()
    one = lambda s, r: np.ones_like(r)  # noqa: E731
    grid = po.QuadratureGrid(1.5)
    assert po.bulk_integral(sol, one, grid) == pytest.approx(4.5 * math.pi, rel=1e-14)
    assert po.bulk_integral(sol, po._V, grid) == pytest.approx(4.5 * math.pi, rel=1e-14)


@pytest.mark.parametrize("K,c1,c2", [(1.0, 0.5, 0.5), (-1.0, 0.0, 0.5), (0.0, 0.0, 1.5)])
@pytest.mark.parametrize("n", [2, 3, 6])
def test_integral_of_V_has_closed_form(n, K, c1, c2):
    sol = solution(n=n, K=K, k=1, c1=c1, c2=c2)
    exact = unit_sphere_area(n) * warping(sol.sf, sol.R).value ** n / n
    res = po.bulk_integral_converged(sol, po._V)
    assert res.converged and res.value == pytest.approx(exact, rel=1e-13)


def test_integrals_against_adaptive_quadrature():
    sol = rd.perturb(solution(n=4, K=1.0, k=3, c1=0.8, c2=0.3), 1e-2)
    for h in (po._uV, po._skm1_u2_V, po._skm1_du2_V, po._ubar_rhs_integrand):
        got = po.bulk_integral_converged(sol, h).value
        assert got == pytest.approx(quad_ball(sol, h), rel=1e-10, abs=1e-13)


def test_panel_halving_rate():
    # h = V on a curved ball: 8-node Gauss, error falls by >= 2^8 per halving
    sol = solution(n=5, K=-1.0, k=1, c1=0.0, c2=0.5)
    exact = unit_sphere_area(5) * warping(sol.sf, sol.R).value ** 5 / 5
    grid = po.QuadratureGrid(sol.R, panels=1, nodes_per_panel=8)
    errs = []
    for _ in range(3):
        errs.append(abs(po.bulk_integral(sol, po._V, grid) - exact))
        grid = grid.refined()
    assert errs[0] / errs[1] >= 2**8 or errs[1] < 1e-14 * exact


# frame reductions --------------------------------------------------------------------

def test_radial_frame_matches_matrix_gradient():
    rng = np.random.default_rng(5)
    for _ in range(30):
        n = int(rng.integers(2, 8))
        k = int(rng.integers(1, n + 1))
        lr, lt = rng.uniform(-1, 2, 2)
        A = np.diag([lr] + [lt] * (n - 1))
        g = sigma_k_grad(A, k)
        srr, stt = po.sigma_grad_diagonal(lr, lt, n, k)
        assert srr == pytest.approx(g[0, 0], abs=1e-12)
        if n > 1:
            assert stt == pytest.approx(g[1, 1], abs=1e-12)


def test_boundary_examples():
    sol = solution()
    assert po.boundary_reduce(sol, "sigma_Phi_nu") == pytest.approx(27 * math.pi, rel=1e-14)
    expect = unit_sphere_area(3) * 1.5**2 * binom(2, 1) * 1.0 * 1.5
    assert po.boundary_reduce(sol, "sigma_uPhi_nu") == pytest.approx(expect, rel=1e-14)
    with pytest.raises(ValueError):
        po.boundary_reduce(sol, "nope")


# identities -------------------------------------------------------------------

def test_trace_identity_example():
    rep = po.verify_identity(solution(), "L6_2_i")
    assert rep.lhs == pytest.approx(27 * math.pi, rel=1e-12)
    assert rep.rhs == pytest.approx(27 * math.pi, rel=1e-12)
    assert rep.rel_residual < 1e-10 and rep.converged


def test_ubar_identity_sphere():
    rep = po.verify_identity(solution(K=1.0, c1=0.5, c2=1.0), "L6_3")
    assert rep.rel_residual < 1e-8 and rep.converged


def test_main_identity_hyperbolic():
    rep = po.verify_identity(solution(n=4, K=-1.0, k=3, c1=0.0, c2=0.5), "L6_1")
    assert rep.rel_residual < 1e-8 and rep.converged
    assert set(rep.terms) == {
        "c1K_sigma_uPhi_nu", "c1sq_K3_sigma_Phi_nu", "K_skm1_u2_V", "c2sq_sigma_Phi_nu", "skm1_du2_V",
    }
    assert sum(rep.terms.values()) == pytest.approx(rep.rhs, rel=1e-15)


@pytest.mark.parametrize("p", rd.parameter_matrix(l_zero_only=True)[::3],
                         ids=lambda p: f"n{p.n}k{p.k}K{p.K:g}c{p.c1:g},{p.c2:g}")
def test_all_identities_on_matrix(p):
    sol = rd.explicit_solution(p)
    for identity in po.IDENTITIES:
        rep = po.verify_identity(sol, identity)
        assert rep.converged and rep.rel_residual < 1e-8, rep


def test_identity_sides_against_adaptive_quadrature():
    sol = solution(n=3, K=-1.0, k=2, c1=0.5, c2=0.3)
    p = sol.params
    lhs = binom(3, 1) * quad_ball(sol, po._ubarV)
    rep = po.verify_identity(sol, "L6_3")
    assert rep.lhs == pytest.approx(lhs, rel=1e-10)
    rhs_ref = quad_ball(sol, po._ubar_rhs_integrand)
    assert rep.rhs == pytest.approx(rhs_ref, rel=1e-10)
    assert p.l == 0


def test_precondition_refusals():
    with pytest.raises(NotASolutionError):
        po.verify_identity(solution(n=3, k=2, l=1), "L6_1")
    with pytest.raises(NotASolutionError):
        po.verify_identity(rd.perturb(solution(), 1e-3), "L6_1")
    with pytest.raises(ValueError):
        po.verify_identity(solution(), "L9")


def test_coarse_grid_without_refinement_is_flagged():
    rep = po.verify_identity(solution(K=1.0, c1=0.5, c2=0.5), "L6_1",
                             po.QuadratureGrid(solution(K=1.0, c1=0.5, c2=0.5).R, 1, 2), max_refinements=0)
    assert not rep.converged and rep.panels == 1


def test_negative_control():
    sol = solution()
    base = po.negative_control(sol, 0.0)
    assert base == po.verify_identity(sol, "L6_3")
    r3 = po.negative_control(sol, 1e-3)
    r2 = po.negative_control(sol, 1e-2)
    assert r3.permissive and r3.rel_residual > 1e-6
    assert 5 <= r2.rel_residual / r3.rel_residual <= 20


def test_divergence_identity_holds_off_solutions():
    # the trace identity needs only the divergence theorem and divergence-free sigma_k^{ij}
    pert = rd.perturb(solution(n=4, K=1.0, k=2, c1=0.8, c2=0.3), 5e-2)
    rep = po.verify_identity(pert, "L6_2_i", permissive=True)
    assert rep.rel_residual < 1e-9
    for identity in ("L6_1", "L6_2_ii", "L6_3"):
        assert po.verify_identity(pert, identity, permissive=True).rel_residual > 1e-6


# divergence steps ------------------------------------------------------------------

def test_divergence_steps():
    res = po.verify_divergence_steps(solution(), 0.7)
    assert res.pointwise_I < 1e-12
    assert res.integrated_I11 < 1e-8 and res.integrated_I12 < 1e-8
    res = po.verify_divergence_steps(solution(K=1.0, c1=0.5, c2=0.5), 0.0)
    assert res.pointwise_I < 1e-10
    assert max(res.as_tuple()) < 1e-8


def test_i12_boundary_value_closed_form():
    sol = solution(K=1.0, c1=0.8, c2=0.3)
    R = sol.R
    fR = warping(sol.sf, R).value
    srr, _ = po.sigma_grad_diagonal(1.0, 1.0, 3, 2)
    expect = 0.5 * unit_sphere_area(3) * fR**2 * srr * 0.3**2 * fR
    assert 0.5 * po.boundary_reduce(sol, "sigma_gradu2_Phi_nu") == pytest.approx(expect, rel=1e-14)
    assert conformal_factor(sol.sf, R).value > 0


# reports ----------------------------------------------------------------------

def test_report_formats_are_stable():
    reps = [po.verify_identity(solution(), i) for i in reversed(po.IDENTITIES)]
    ordered = po.sort_reports(reps)
    assert [r.identity_id for r in ordered] == list(po.IDENTITIES)
    csv_text = po.reports_to_csv(ordered)
    assert csv_text.splitlines()[0] == ",".join(po.REPORT_COLUMNS)
    assert csv_text == po.reports_to_csv(po.sort_reports(reps))
    text = po.reports_to_text(ordered)
    assert "L6_2_ii" in text and len(text.splitlines()) == 5
