"""Command-line front end: solution tables, identity verification, property suites.

Exit codes: 0 pass, 1 verification failure, 2 usage or parameter error.
"""

from __future__ import annotations

import argparse
import io
import sys
from dataclasses import dataclass

import numpy as np

from . import pohozaev as po
from .checks import run_property_suite
from .exceptions import DomainError, ParameterError, PreconditionError, ShootingError
from .geometry import SpaceForm
from .radial import (
    CSV_COLUMNS,
    ProblemParams,
    explicit_solution,
    format_float,
    parameter_matrix,
    sample_table,
    shot_solution,
    write_csv,
)

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2

VERIFY_RTOL = 1e-8
NEGATIVE_CONTROL_FLOOR = 1e-6
NEGATIVE_CONTROL_FACTOR = 100.0
PROBLEM_KEYS = ("n", "k", "l", "K", "c1", "c2")


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    n: int | None
    k: int | None
    l: int | None
    K: float | None
    c1: float | None
    c2: float | None
    panels: int
    nodes: int
    max_refinements: int
    negative_control: float | None
    method: str
    points: int
    trials: int
    seed: int
    nmax: int
    output_path: str | None
    format: str

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> RunConfig:
        return cls(
            command=ns.command, n=ns.n, k=ns.k, l=ns.l, K=ns.K, c1=ns.c1, c2=ns.c2,
            panels=ns.panels, nodes=ns.nodes, max_refinements=ns.max_refinements,
            negative_control=ns.negative_control, method=ns.method, points=ns.points,
            trials=ns.trials, seed=ns.seed, nmax=ns.nmax, output_path=ns.output,
            format=ns.format,
        )

    @property
    def single_problem(self) -> bool:
        return any(getattr(self, key) is not None for key in PROBLEM_KEYS)

    def problem(self) -> ProblemParams:
        n = 3 if self.n is None else self.n
        k = 2 if self.k is None else self.k
        sf = SpaceForm(n, 0.0 if self.K is None else self.K)
        return ProblemParams(
            sf, k, 0 if self.l is None else self.l,
            0.0 if self.c1 is None else self.c1, 1.0 if self.c2 is None else self.c2,
        )


# --------------------------------------------------------------------------
# argument handling
# --------------------------------------------------------------------------

def read_config_file(path: str) -> dict[str, str]:
    """Plain 'key = value' lines; '#' starts a comment. Keys use flag names."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (part.strip() for part in line.split("=", 1))
            out[key.replace("-", "_")] = value
    return out


def _add_problem_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("problem")
    g.add_argument("--n", type=int, help="dimension (default 3)")
    g.add_argument("--k", type=int, help="numerator order (default 2)")
    g.add_argument("--l", type=int, help="denominator order (default 0)")
    g.add_argument("--K", type=float, help="sectional curvature (default 0)")
    g.add_argument("--c1", type=float, help="Dirichlet datum is K*c1 (default 0)")
    g.add_argument("--c2", type=float, help="Neumann datum (default 1)")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file supplying defaults; flags override")
    common.add_argument("--output", "-o", help="write to this path instead of stdout")
    common.add_argument("--format", choices=("csv", "text"), default="csv")
    common.add_argument("--seed", type=int, default=42)

    parser = argparse.ArgumentParser(
        prog="spaceform-hessian",
        description="Radial k-Hessian quotient problems in space forms.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sol = sub.add_parser("solution", parents=[common], help="sample the symmetric solution")
    _add_problem_flags(sol)
    sol.add_argument("--method", choices=("explicit", "shoot"), default="explicit")
    sol.add_argument("--points", type=int, default=200)

    ver = sub.add_parser("verify", parents=[common], help="check the integral identities")
    _add_problem_flags(ver)
    ver.add_argument("--panels", type=int, default=po.DEFAULT_PANELS)
    ver.add_argument("--nodes", type=int, default=po.DEFAULT_NODES)
    ver.add_argument("--max-refinements", type=int, default=po.MAX_REFINEMENTS)
    ver.add_argument("--negative-control", type=float, metavar="EPS",
                     help="perturb u by EPS r^2 (R-r)^2 and expect L6_3 to fail")

    prop = sub.add_parser("properties", parents=[common], help="seeded elementary-symmetric suites")
    prop.add_argument("--trials", type=int, default=1000)
    prop.add_argument("--nmax", type=int, default=8)

    defaults = dict(
        n=None, k=None, l=None, K=None, c1=None, c2=None, panels=po.DEFAULT_PANELS,
        nodes=po.DEFAULT_NODES, max_refinements=po.MAX_REFINEMENTS, negative_control=None,
        method="explicit", points=200, trials=1000, nmax=8,
    )
    for p in (sol, ver, prop):
        p.set_defaults(**{k: v for k, v in defaults.items() if k not in {a.dest for a in p._actions}})
    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    ns = parser.parse_args(argv)
    if not ns.config:
        return ns
    values = read_config_file(ns.config)
    subparser = parser._subparsers._group_actions[0].choices[ns.command]  # type: ignore[union-attr]
    actions = {a.dest: a for a in subparser._actions}
    typed = {}
    for key, raw in values.items():
        if key not in actions or key in ("config", "help"):
            raise UsageError(f"unknown config key {key!r} for '{ns.command}'")
        conv = actions[key].type or str
        try:
            typed[key] = conv(raw)
        except ValueError as exc:
            raise UsageError(f"config key {key!r}: {exc}") from None
    subparser.set_defaults(**typed)
    return parser.parse_args(argv)


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def _emit(text: str, config: RunConfig, stdout) -> None:
    if config.output_path:
        with open(config.output_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)


def cmd_solution(config: RunConfig, stdout=None) -> int:
    stdout = stdout or sys.stdout
    params = config.problem()
    if config.points < 2:
        raise ParameterError("--points must be at least 2")
    sol = explicit_solution(params) if config.method == "explicit" else shot_solution(params)
    meta = {
        "n": params.n, "k": params.k, "l": params.l, "K": format_float(params.K),
        "c1": format_float(params.c1), "c2": format_float(params.c2),
        "R": format_float(sol.R), "u0": format_float(sol.u0), "method": sol.kind,
        "sign_condition": str(sol.sign_condition_holds()).lower(),
    }
    if config.format == "csv":
        buf = io.StringIO()
        write_csv(sol, buf, config.points, meta)
        text = buf.getvalue()
    else:
        lines = [f"{key} = {value}" for key, value in meta.items()]
        rows = [list(CSV_COLUMNS)] + [
            [format(x, ".6g") for x in row]
            for row in sample_table(sol, np.linspace(0.0, sol.R, config.points))
        ]
        widths = [max(len(r[i]) for r in rows) for i in range(len(CSV_COLUMNS))]
        lines += ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in rows]
        text = "\n".join(lines) + "\n"
    _emit(text, config, stdout)
    return EXIT_OK


def _grid_for(config: RunConfig, R: float) -> po.QuadratureGrid:
    if config.panels < 1 or config.nodes < 1 or config.max_refinements < 0:
        raise ParameterError("--panels and --nodes must be >= 1, --max-refinements >= 0")
    return po.QuadratureGrid(R, config.panels, config.nodes)


def _verify_problems(config: RunConfig) -> list[ProblemParams]:
    if config.single_problem:
        params = config.problem()
        if params.l != 0:
            raise ParameterError("the integral identities need l = 0")
        return [params]
    return parameter_matrix(l_zero_only=True)


def _render(reports, config: RunConfig) -> str:
    ordered = po.sort_reports(reports)
    return po.reports_to_csv(ordered) if config.format == "csv" else po.reports_to_text(ordered)


def cmd_verify(config: RunConfig, stdout=None, stderr=None) -> int:
    stdout, stderr = stdout or sys.stdout, stderr or sys.stderr
    problems = _verify_problems(config)
    reports = []
    if config.negative_control is not None:
        eps = config.negative_control
        if eps == 0:
            raise ParameterError("--negative-control needs a nonzero epsilon")
        missed = []
        for params in problems:
            sol = explicit_solution(params)
            kw = dict(max_refinements=config.max_refinements)
            base = po.negative_control(sol, 0.0, grid=_grid_for(config, sol.R), **kw)
            bad = po.negative_control(sol, eps, grid=_grid_for(config, sol.R), **kw)
            reports += [base, bad]
            threshold = max(NEGATIVE_CONTROL_FLOOR, NEGATIVE_CONTROL_FACTOR * base.rel_residual)
            if not bad.rel_residual > threshold:
                missed.append(bad)
        _emit(_render(reports, config), config, stdout)
        for rep in missed:
            stderr.write(
                f"negative control not detected: n={rep.n} k={rep.k} K={rep.K:g} "
                f"rel_residual={rep.rel_residual:.3e}\n"
            )
        return EXIT_FAIL if missed else EXIT_OK

    failing = []
    for params in problems:
        sol = explicit_solution(params)
        for identity in po.IDENTITIES:
            rep = po.verify_identity(
                sol, identity, _grid_for(config, sol.R), max_refinements=config.max_refinements
            )
            reports.append(rep)
            if not (rep.converged and rep.rel_residual < VERIFY_RTOL):
                failing.append(rep)
    _emit(_render(reports, config), config, stdout)
    if failing:
        stderr.write(f"{len(failing)} of {len(reports)} identity checks failed:\n")
        stderr.write(po.reports_to_text(po.sort_reports(failing)))
        return EXIT_FAIL
    return EXIT_OK


def cmd_properties(config: RunConfig, stdout=None, stderr=None) -> int:
    stdout, stderr = stdout or sys.stdout, stderr or sys.stderr
    if config.trials < 0 or config.nmax < 2:
        raise ParameterError("--trials must be >= 0 and --nmax >= 2")
    if config.trials == 0:
        stderr.write("warning: --trials 0 runs no samples; the pass is vacuous\n")
    results = run_property_suite(config.trials, config.seed, config.nmax)
    if config.format == "csv":
        buf = io.StringIO()
        buf.write("name,trials,max_violation,tolerance,passed,note\n")
        for r in results:
            buf.write(
                f"{r.name},{r.trials},{format_float(r.max_violation)},"
                f"{format_float(r.tolerance)},{str(r.passed).lower()},{r.note}\n"
            )
        text = buf.getvalue()
    else:
        text = "".join(r.line() + "\n" for r in results)
    _emit(text, config, stdout)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


COMMANDS = {"solution": cmd_solution, "verify": cmd_verify, "properties": cmd_properties}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        ns = _apply_config_file(parser, argv)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code or 0)
    except (UsageError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    config = RunConfig.from_namespace(ns)
    try:
        return COMMANDS[config.command](config)
    except (ParameterError, DomainError, PreconditionError, ShootingError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
