"""Seeded property suites for the elementary-symmetric machinery.

Relative errors are measured against the magnitude of the terms being summed
(sigma_j of |lambda|), not against the possibly cancelling result.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import elemsym as es
from .radial import reduced_p_expression, reduced_p_tilde_expression

IDENTITY_RTOL = 1e-9
FD_STEP = 1e-5
FD_TOL = 1e-6
SLACK_TOL = -1e-10
EQUALITY_TOL = 1e-10


@dataclass(frozen=True)
class PropertyResult:
    name: str
    trials: int
    max_violation: float
    tolerance: float
    passed: bool
    note: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.note})" if self.note else ""
        return (
            f"{status}  {self.name:<28} trials={self.trials:<6d} "
            f"max_violation={self.max_violation:.6g}  tol={self.tolerance:.6g}{extra}"
        )


def _dims(rng: np.random.Generator, nmax: int, nmin: int = 2) -> int:
    return int(rng.integers(nmin, max(nmin, nmax) + 1))


def symmetric_corpus(trials: int, seed: int, nmax: int = 8):
    rng = np.random.default_rng(seed)
    return [es.random_symmetric(rng, _dims(rng, nmax)) for _ in range(trials)]


def _scaled_error(a: float, b: float, scale: float) -> float:
    return abs(a - b) / max(scale, 1e-300)


def basic_identity_errors(A: np.ndarray) -> dict[str, float]:
    """Worst scaled error over k of the trace/contraction identities and the dual path."""
    n = A.shape[0]
    lam = es.jacobi_eigenvalues(A)
    e = es.elementary_symmetric(lam)
    ea = es.elementary_symmetric(np.abs(lam))
    en = es.sigmas_newton(A)
    at = lambda arr, j: arr[j] if 0 <= j <= n else 0.0  # noqa: E731
    out = {"euler": 0.0, "trace": 0.0, "square": 0.0, "dual_path": 0.0}
    for k in range(1, n + 1):
        g = es.sigma_k_grad(A, k, sigmas=e)
        out["euler"] = max(out["euler"], _scaled_error(np.sum(g * A), k * e[k], k * ea[k]))
        out["trace"] = max(
            out["trace"],
            _scaled_error(np.trace(g), (n - k + 1) * e[k - 1], (n - k + 1) * ea[k - 1]),
        )
        lhs = float(np.einsum("il,jl,ij->", g, A, A))
        rhs = e[1] * e[k] - (k + 1) * at(e, k + 1)
        out["square"] = max(
            out["square"], _scaled_error(lhs, rhs, ea[1] * ea[k] + (k + 1) * at(ea, k + 1))
        )
        out["dual_path"] = max(out["dual_path"], _scaled_error(e[k], en[k], ea[k]))
    return out


def grad_fd_error(A: np.ndarray, step: float = FD_STEP) -> float:
    """Max entry gap between sigma_k_grad and central differences, over all k.

    Off-diagonal entries are perturbed symmetrically (a_ij and a_ji together),
    which differentiates to 2 sigma_k^{ij}.  Central differences are exact
    here (sigma_k is at most quadratic in each such perturbation), so the only
    error is roundoff; sigma values reach ~1e4 for n = 8, so the quotients are
    taken in extended precision to stay well below 1e-6 at a 1e-5 step.
    """
    n = A.shape[0]
    sig = lambda M: es.sigmas_newton(M, dtype=np.longdouble)  # noqa: E731
    grads = [es.sigma_k_grad(A, k) for k in range(1, n + 1)]
    worst = 0.0
    for i in range(n):
        for j in range(i, n):
            d = np.zeros_like(A)
            d[i, j] = d[j, i] = step
            plus = sig(A + d)
            minus = sig(A - d)
            fd = ((plus - minus) / (2 * np.longdouble(step))).astype(float)
            factor = 1.0 if i == j else 2.0
            for k in range(1, n + 1):
                worst = max(worst, abs(fd[k] - factor * grads[k - 1][i, j]))
    return worst


def _cone_orders(rng: np.random.Generator, n: int) -> tuple[int, int]:
    k = int(rng.integers(1, n + 1))
    l = int(rng.integers(0, k))
    return k, l


def cone_samples(trials: int, seed: int, nmax: int = 8, constant_every: int = 10):
    """(lambda, n, k, l) with lambda in Gamma_k rescaled onto the quotient constraint.

    Every ``constant_every``-th sample is a constant spectrum.
    """
    rng = np.random.default_rng(seed)
    out = []
    for t in range(trials):
        n = _dims(rng, nmax)
        k, l = _cone_orders(rng, n)
        if constant_every and t % constant_every == 0:
            lam = np.full(n, rng.uniform(0.1, 3.0))
        else:
            lam = es.random_cone_spectrum(rng, n, k)
        out.append((es.rescale_to_quotient(lam, k, l), n, k, l))
    return out


def _vacuous(name: str, tol: float) -> PropertyResult:
    return PropertyResult(name, 0, 0.0, tol, True, "no trials")


def suite_contractions(trials: int, seed: int, nmax: int) -> list[PropertyResult]:
    if trials == 0:
        return [_vacuous(n, IDENTITY_RTOL) for n in ("euler_contraction", "trace_contraction", "square_contraction", "dual_path_sigma_k")]
    worst = {"euler": 0.0, "trace": 0.0, "square": 0.0, "dual_path": 0.0}
    for A in symmetric_corpus(trials, seed, nmax):
        for key, val in basic_identity_errors(A).items():
            worst[key] = max(worst[key], val)
    names = {
        "euler": "euler_contraction", "trace": "trace_contraction",
        "square": "square_contraction", "dual_path": "dual_path_sigma_k",
    }
    return [
        PropertyResult(names[key], trials, val, IDENTITY_RTOL, val < IDENTITY_RTOL)
        for key, val in worst.items()
    ]


def suite_grad_fd(trials: int, seed: int, nmax: int) -> PropertyResult:
    if trials == 0:
        return _vacuous("sigma_k_grad_vs_fd", FD_TOL)
    worst = max(grad_fd_error(A) for A in symmetric_corpus(trials, seed + 1, nmax))
    return PropertyResult("sigma_k_grad_vs_fd", trials, worst, FD_TOL, worst < FD_TOL)


def suite_ellipticity(trials: int, seed: int, nmax: int) -> PropertyResult:
    """Smallest eigenvalue of F^{ij} relative to the largest, on Gamma_k matrices."""
    if trials == 0:
        return _vacuous("quotient_derivative_pd", es.PD_RTOL)
    rng = np.random.default_rng(seed + 2)
    worst_ratio = np.inf
    failures = 0
    for _ in range(trials):
        n = _dims(rng, nmax)
        k, l = _cone_orders(rng, n)
        A = es.random_cone_matrix(rng, n, k)
        lo, hi, ok = es.positive_definiteness(es.quotient_derivative(A, k, l))
        worst_ratio = min(worst_ratio, lo / hi)
        failures += not ok
    return PropertyResult(
        "quotient_derivative_pd", trials, max(0.0, -worst_ratio), es.PD_RTOL, failures == 0,
        f"min lambda_min/lambda_max={worst_ratio:.3g}",
    )


def suite_newton_maclaurin(trials: int, seed: int, nmax: int) -> list[PropertyResult]:
    if trials == 0:
        return [_vacuous("newton_maclaurin", -SLACK_TOL), _vacuous("maclaurin_power", -SLACK_TOL)]
    rng = np.random.default_rng(seed + 3)
    worst_nm = worst_pow = 0.0
    mismatched = 0
    for t in range(trials):
        n = _dims(rng, nmax)
        k = int(rng.integers(1, n))
        if t % 10 == 0:
            lam = np.full(n, rng.uniform(0.1, 3.0))
        else:
            lam = es.random_cone_spectrum(rng, n, k + 1)
        res = es.newton_maclaurin_check(lam, k)
        worst_nm = max(worst_nm, res.lhs - res.rhs)
        mismatched += res.equality != res.constant
        lhs, rhs, _ = es.maclaurin_power_check(lam, k)
        worst_pow = max(worst_pow, lhs - rhs)
    return [
        PropertyResult(
            "newton_maclaurin", trials, max(worst_nm, 0.0), -SLACK_TOL,
            worst_nm <= -SLACK_TOL and mismatched == 0,
            f"equality/constant mismatches={mismatched}",
        ),
        PropertyResult("maclaurin_power", trials, max(worst_pow, 0.0), -SLACK_TOL, worst_pow <= -SLACK_TOL),
    ]


def suite_quotient_bounds(trials: int, seed: int, nmax: int) -> PropertyResult:
    if trials == 0:
        return _vacuous("quotient_ratio_bounds", -SLACK_TOL)
    worst = 0.0
    mismatched = 0
    for lam, _, k, l in cone_samples(trials, seed + 4, nmax):
        qb = es.quotient_ratio_bounds(lam, k, l)
        worst = min(worst, qb.min_slack)
        mismatched += qb.sharp(EQUALITY_TOL) != es.is_constant_spectrum(lam)
    return PropertyResult(
        "quotient_ratio_bounds", trials, max(0.0, -worst), -SLACK_TOL,
        worst >= SLACK_TOL and mismatched == 0, f"sharp/constant mismatches={mismatched}",
    )


def suite_reduced_expressions(trials: int, seed: int, nmax: int) -> list[PropertyResult]:
    """Reduced ellipticity expressions for P and P~ on rescaled spectra, Ku ~ U[0,1]."""
    if trials == 0:
        return [_vacuous("reduced_P_expression", -SLACK_TOL), _vacuous("reduced_P_tilde_expression", -SLACK_TOL)]
    rng = np.random.default_rng(seed + 5)
    worst_p = worst_pt = 0.0
    for lam, _, k, l in cone_samples(trials, seed + 5, nmax, constant_every=0):
        ku = rng.uniform(0.0, 1.0)
        worst_p = min(worst_p, reduced_p_expression(lam, k, l, ku))
        worst_pt = min(worst_pt, reduced_p_tilde_expression(lam, k, l, rng.uniform(0.1, 1.0)))
    return [
        PropertyResult("reduced_P_expression", trials, max(0.0, -worst_p), -SLACK_TOL, worst_p >= SLACK_TOL),
        PropertyResult("reduced_P_tilde_expression", trials, max(0.0, -worst_pt), -SLACK_TOL, worst_pt >= SLACK_TOL),
    ]


SUITES: dict[str, Callable] = {
    "contractions": suite_contractions,
    "grad_fd": suite_grad_fd,
    "ellipticity": suite_ellipticity,
    "newton_maclaurin": suite_newton_maclaurin,
    "quotient_bounds": suite_quotient_bounds,
    "reduced_expressions": suite_reduced_expressions,
}


def run_property_suite(trials: int = 1000, seed: int = 42, nmax: int = 8) -> list[PropertyResult]:
    results: list[PropertyResult] = []
    for fn in SUITES.values():
        out = fn(trials, seed, nmax)
        results.extend(out if isinstance(out, list) else [out])
    return results
