from __future__ import annotations

import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from spaceform_hessian import radial as rd
from spaceform_hessian.elemsym import binom, rescale_to_quotient, random_cone_spectrum
from spaceform_hessian.exceptions import DomainError, ParameterError, ShootingError
from spaceform_hessian.geometry import SpaceForm


def params(n=3, K=0.0, k=2, l=0, c1=0.0, c2=1.0):
    return rd.ProblemParams(SpaceForm(n, K), k, l, c1, c2)


ALL = rd.parameter_matrix()


# explicit solutions ------------------------------------------------------------

def test_euclidean_example():
    sol = rd.explicit_solution(params(c2=1.5))
    assert sol.R == 1.5
    r = np.linspace(0, 1.5, 11)
    np.testing.assert_allclose(sol.evaluate(r)[0], (r**2 - 2.25) / 2, atol=1e-15)
    u, du, _ = sol.evaluate(1.5)
    assert u == 0.0 and du == 1.5


def test_sphere_example_radius():
    # the boundary conditions u(R) = K c1, u'(R) = c2 pin R to arctan(2) here
    sol = rd.explicit_solution(params(K=1.0, c1=0.5, c2=1.0))
    assert sol.R == pytest.approx(math.atan(2.0), abs=1e-15)
    u, du, _ = sol.evaluate(sol.R)
    assert u == pytest.approx(0.5, abs=1e-14) and du == pytest.approx(1.0, abs=1e-14)
    # at arctan(4/3) the Neumann condition does not hold for any u0 with u(R) = 1/2
    R = math.atan(4 / 3)
    u0 = (0.5 - (1 - math.cos(R))) / math.cos(R)
    assert abs((1 - u0) * math.sin(R) - 1.0) > 0.1


def test_hyperbolic_example():
    sol = rd.explicit_solution(params(K=-1.0, c1=0.0, c2=0.5))
    assert sol.R == pytest.approx(math.atanh(0.5), abs=1e-15)
    assert sol.R == pytest.approx(0.549306144, abs=1e-9)
    u, du, _ = sol.evaluate(sol.R)
    assert u == pytest.approx(0.0, abs=1e-15) and du == pytest.approx(0.5, abs=1e-15)


@pytest.mark.parametrize("p", ALL, ids=lambda p: f"n{p.n}k{p.k}l{p.l}K{p.K:g}c{p.c1:g},{p.c2:g}")
def test_boundary_conditions_and_smoothness(p):
    sol = rd.explicit_solution(p)
    u, du, _ = sol.evaluate(sol.R)
    assert u == pytest.approx(p.dirichlet, abs=1e-10)
    assert du == pytest.approx(p.c2, abs=1e-10)
    assert sol.evaluate(0.0)[1] == 0.0
    assert p.sf.contains(sol.R)
    r = np.linspace(0, sol.R, 301)[1:]
    assert np.all(sol.evaluate(r)[1] > 0)
    if p.K != 0:
        assert p.K**2 * p.c1 < 1


@pytest.mark.parametrize("p", ALL[::7])
def test_b_is_metric(p):
    sol = rd.explicit_solution(p)
    r = np.linspace(0, sol.R, 500)
    b = rd.b_tensor(sol, r)
    assert np.max(np.abs(b.lambda_radial - 1)) < 1e-10
    assert np.max(np.abs(b.lambda_tangential - 1)) < 1e-10
    assert np.max(np.abs(rd.pde_residual(sol, r))) < 1e-10


def test_k_hessian_mode_value():
    sol = rd.explicit_solution(params(n=4, K=-1.0, k=3, c1=0.0, c2=0.5))
    r = np.linspace(0, sol.R, 50)
    np.testing.assert_allclose(rd.sigma_of_b(sol, r, 3), binom(4, 3), rtol=1e-13)


@pytest.mark.parametrize(
    "K,c1,c2",
    [(1.0, 1.0, 1.0), (1.0, 2.0, 1.0), (-1.0, 0.0, 1.0), (-1.0, 0.0, 1.5), (-1.0, 2.0, 0.5), (4.0, 0.0, -1.0)],
)
def test_inadmissible_parameters(K, c1, c2):
    with pytest.raises(ParameterError):
        rd.explicit_solution(params(K=K, c1=c1, c2=c2))


def test_order_validation():
    with pytest.raises(ParameterError):
        params(n=3, k=4)
    with pytest.raises(ParameterError):
        params(k=2, l=2)


def test_evaluate_range():
    sol = rd.explicit_solution(params(c2=1.5))
    with pytest.raises(DomainError):
        sol.evaluate(1.6)


def test_sign_condition_flag():
    assert rd.explicit_solution(params(K=1.0, c1=0.5, c2=0.5)).sign_condition_holds()
    assert not rd.explicit_solution(params(K=1.0, c1=0.5, c2=1.0)).sign_condition_holds()
    assert rd.explicit_solution(params(K=-1.0, c1=0.0, c2=0.5)).sign_condition_holds()


# perturbation --------------------------------------------------------------------

def test_perturbation_keeps_boundary_data():
    sol = rd.explicit_solution(params(K=-1.0, c1=0.5, c2=0.3))
    pert = rd.perturb(sol, 1e-3)
    for r in (0.0, sol.R):
        a, b = sol.evaluate(r), pert.evaluate(r)
        assert a[0] == pytest.approx(b[0], abs=1e-15) and a[1] == pytest.approx(b[1], abs=1e-15)
    r = np.linspace(0, sol.R, 200)
    res = np.max(np.abs(rd.pde_residual(pert, r)))
    assert 1e-5 < res < 1e-1
    dev = np.max(np.abs(rd.b_tensor(pert, r).lambda_radial - 1))
    dev2 = np.max(np.abs(rd.b_tensor(rd.perturb(sol, 2e-3), r).lambda_radial - 1))
    assert dev2 / dev == pytest.approx(2.0, rel=1e-6)


# ODE ---------------------------------------------------------------------------

def test_ode_examples():
    prof = rd.ode_solve(SpaceForm(3, 0.0), -1.125, 1.5, 1e-3)
    assert prof.v[-1] == pytest.approx(0.0, abs=1e-12) and prof.dv[-1] == pytest.approx(1.5, abs=1e-12)
    prof = rd.ode_solve(SpaceForm(3, 1.0), 1.0, 1.2, 1e-2)
    np.testing.assert_allclose(prof.v, 1.0, atol=1e-14)
    prof = rd.ode_solve(SpaceForm(3, -1.0), 0.0, 1.0, 1e-3)
    assert prof.v[-1] == pytest.approx(math.cosh(1) - 1, abs=1e-12)


@pytest.mark.parametrize("K,v0", [(1.0, -0.4), (-1.0, 0.3), (-2.5, -0.1), (0.7, 0.2)])
def test_ode_against_scipy(K, v0):
    sf = SpaceForm(3, K)
    R = min(1.4, 0.9 * sf.r_bar)
    ref = solve_ivp(lambda r, y: [y[1], 1 - K * y[0]], (0, R), [v0, 0.0], rtol=1e-13, atol=1e-14)
    prof = rd.ode_solve(sf, v0, R, 1e-3)
    assert prof.v[-1] == pytest.approx(ref.y[0, -1], abs=1e-11)
    v, dv = rd.ode_closed_form(sf, v0, prof.r)
    assert np.max(np.abs(prof.v - v)) < prof.step**4 * 1e3
    assert np.max(np.abs(prof.dv - dv)) < prof.step**4 * 1e3


def test_shooting_examples():
    R, v0 = rd.shoot_radius(params(c2=1.5))
    assert R == pytest.approx(1.5, abs=1e-10) and v0 == pytest.approx(-1.125, abs=1e-10)
    R, _ = rd.shoot_radius(params(K=-1.0, c1=0.0, c2=0.5))
    assert R == pytest.approx(0.549306144, abs=1e-9)
    R, _ = rd.shoot_radius(params(K=1.0, c1=0.5, c2=1.0))
    assert R == pytest.approx(math.atan(2.0), abs=1e-10)


def test_shooting_failure():
    # arctanh argument > 1: the hyperbolic profile never reaches the data
    with pytest.raises(ShootingError):
        rd.shoot_radius(params(K=-1.0, c1=0.0, c2=1.5))


def test_shot_solution_matches_explicit():
    p = params(n=4, K=1.0, k=3, c1=0.8, c2=0.3)
    shot, exact = rd.shot_solution(p), rd.explicit_solution(p)
    r = np.linspace(0, min(shot.R, exact.R), 97)
    for a, b in zip(shot.evaluate(r), exact.evaluate(r)):
        assert np.max(np.abs(a - b)) < 1e-9


# P, P~ and w -----------------------------------------------------------------------

def test_p_examples():
    sol = rd.explicit_solution(params(c2=1.5))
    r = np.linspace(0, 1.5, 50)
    np.testing.assert_allclose(rd.p_function(sol, r), 2.25, atol=1e-14)
    np.testing.assert_allclose(rd.p_tilde_function(sol, r), -1.125, atol=1e-14)
    sol = rd.explicit_solution(params(K=1.0, c1=0.5, c2=1.0))
    r = np.linspace(0, sol.R, 50)
    np.testing.assert_allclose(rd.p_function(sol, r), 0.25, atol=1e-14)
    np.testing.assert_allclose(rd.p_tilde_function(sol, r), -math.sqrt(5) / 2, atol=1e-14)


@pytest.mark.parametrize("p", ALL[::5])
def test_p_constant_values(p):
    sol = rd.explicit_solution(p)
    r = np.linspace(0, sol.R, 200)
    np.testing.assert_allclose(rd.p_function(sol, r), p.p_boundary_value, atol=1e-10)
    np.testing.assert_allclose(rd.p_tilde_function(sol, r), rd.explicit_p_tilde_value(p), atol=1e-10)
    h = 1e-5
    x = np.linspace(h, sol.R - h, 40)
    for fn in (rd.p_function, rd.p_tilde_function):
        d = (fn(sol, x + h) - fn(sol, x - h)) / (2 * h)
        assert np.max(np.abs(d)) < 1e-8


def test_hyperbolic_p_tilde_value():
    p = params(K=-1.0, c1=0.0, c2=0.5)
    sol = rd.explicit_solution(p)
    expect = 0.5 / math.sinh(sol.R)
    assert rd.explicit_p_tilde_value(p) == pytest.approx(expect, rel=1e-14)
    assert rd.p_tilde_function(sol, 0.3) == pytest.approx(expect, rel=1e-13)


def test_w_examples():
    sol = rd.explicit_solution(params(c2=1.5))
    assert rd.w_function(sol, 0.0) == -1.125
    for p in ALL[::9]:
        s = rd.explicit_solution(p)
        assert rd.w_function(s, s.R) == pytest.approx(0.0, abs=1e-12)
    sol = rd.explicit_solution(params(K=1.0, c1=0.5, c2=1.0))
    r = np.linspace(0, sol.R, 200)
    assert np.max(np.abs(rd.w_operator_residual(sol, r))) < 1e-8


def test_reduced_expressions_vanish_at_metric():
    for n in range(2, 8):
        for k in range(1, n + 1):
            for l in range(k):
                assert abs(rd.reduced_p_expression(np.ones(n), k, l, 0.4)) < 1e-10
                assert abs(rd.reduced_p_tilde_expression(np.ones(n), k, l, 0.7)) < 1e-10


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 8), st.floats(0.0, 1.0))
def test_reduced_expressions_nonnegative(seed, n, ku):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, n + 1))
    l = int(rng.integers(0, k))
    lam = rescale_to_quotient(random_cone_spectrum(rng, n, k), k, l)
    assert rd.reduced_p_expression(lam, k, l, ku) >= -1e-10
    assert rd.reduced_p_tilde_expression(lam, k, l, 0.5) >= -1e-10


# export ---------------------------------------------------------------------------

def test_csv_export():
    sol = rd.explicit_solution(params(c2=1.5))
    text = rd.to_csv_string(sol, metadata={"R": rd.format_float(sol.R)})
    lines = text.splitlines()
    assert lines[0] == "# R=1.5"
    assert lines[1] == ",".join(rd.CSV_COLUMNS)
    assert len(lines) == 202
    last = [float(x) for x in lines[-1].split(",")]
    assert last[0] == 1.5 and last[1] == 0.0
    assert text == rd.to_csv_string(sol, metadata={"R": rd.format_float(sol.R)})


def test_format_float_round_trips():
    for x in (math.pi, 1 / 3, -2.5e-17, 1e300):
        assert float(rd.format_float(x)) == x
