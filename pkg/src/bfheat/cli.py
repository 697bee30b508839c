"""Command-line front end: ``bfheat {build,verify,spectrum,resolve,norms,evolve}``.

Exit codes: 0 success, 1 usage error, 2 verification or residual failure,
3 I/O failure.  Every output file embeds the fully resolved run configuration.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import BFHeatError, InvalidEpsilon, QuadratureFailure, Unsolvable
from .eigen import convergence_study
from .evolution import evolve, galerkin_matrix, transient_growth
from .fourier import (
    build_A,
    build_B,
    build_C,
    build_J,
    build_M_matrix,
    check_factorization,
    check_J_selfadjoint,
    validate_epsilon,
)
from .physical import (
    apply_L,
    check_JLJ,
    check_LMS,
    check_M_mean_invariance,
    estimate_p1,
    norm_g,
    norm_m,
    p2_constant,
    p3_constant,
)
from .resolvent import make_grid, solve_L
from .tridiag import TridiagonalMatrix
from .trigpoly import TrigPoly, random_trigpoly

EXIT_OK, EXIT_USAGE, EXIT_FAIL, EXIT_IO = 0, 1, 2, 3

COMMANDS = ("build", "verify", "spectrum", "resolve", "norms", "evolve")

BASE_DEFAULTS = dict(
    eps=1.0, n=64, n_list=None, k=20, tol=None, seed=0, out=None, format="csv",
    allow_eps_out_of_range=False, nodes_per_panel=16, grading=0.5, levels=31,
    samples=100, degree=30, phi="builtin:cosx-image", y0="builtin:cosx",
    times="0,0.25,0.5,0.75,1", method="eigen", inject_fault=False,
)

COMMAND_DEFAULTS = {
    "norms": dict(n=256, samples=1000, degree=10),
    "evolve": dict(n=16),
    "resolve": dict(eps=0.5),
}

TOLERANCES = {
    "build": {},
    "verify": dict(factorization=1e-13, J_selfadjoint=1e-15, JLJ=1e-13, LMS=1e-14,
                   sector_decoupling=1e-15, M_mean=1e-13),
    "spectrum": dict(convergence=1e-6, imag=1e-8),
    "resolve": dict(residual=1e-6, recovery=1e-6),
    "norms": dict(bound_slack=1e-12),
    "evolve": dict(mean=1e-14, reality=1e-12),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class RunConfig:
    """Resolved settings for one subcommand invocation."""

    command: str
    epsilon: float
    N: int
    N_list: list | None
    k: int
    tolerances: dict
    quadrature: dict
    output_dir: str
    format: str
    seed: int
    allow_eps_out_of_range: bool = False
    options: dict = field(default_factory=dict)

    def validate(self):
        validate_epsilon(self.epsilon, self.allow_eps_out_of_range)
        if self.N < 1:
            raise UsageError("--n must be a positive integer")
        if self.k < 1:
            raise UsageError("--k must be a positive integer")
        if self.N_list is not None:
            if not self.N_list or any(b <= a for a, b in zip(self.N_list, self.N_list[1:])):
                raise UsageError("--n-list must be strictly increasing")
            if self.N_list[0] < 1:
                raise UsageError("--n-list entries must be positive")
        for name, value in self.tolerances.items():
            if not value > 0:
                raise UsageError(f"tolerance {name} must be positive")
        if self.format not in ("csv", "json"):
            raise UsageError("--format must be csv or json")
        return self

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Check:
    name: str
    passed: bool
    residual: float
    tolerance: float
    runtime: float

    def to_dict(self) -> dict:
        return {"name": self.name, "status": "pass" if self.passed else "fail",
                "residual": _num(self.residual), "tolerance": self.tolerance,
                "runtime": self.runtime}


@dataclass
class VerificationReport:
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, fn, tolerance: float) -> Check:
        t0 = time.perf_counter()
        residual = float(fn())
        check = Check(name, residual <= tolerance, residual, tolerance,
                      time.perf_counter() - t0)
        self.checks.append(check)
        return check

    def to_list(self) -> list:
        return [c.to_dict() for c in self.checks]


def _num(x):
    x = float(x)
    return x if np.isfinite(x) else str(x)


# ------------------------------------------------------------------ parsing


def _int_list(text: str) -> list:
    try:
        return [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list:
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _parse_tol(entries, command: str) -> dict:
    tols = dict(TOLERANCES[command])
    for entry in entries or []:
        entry = str(entry)
        if "=" in entry:
            name, _, value = entry.partition("=")
            if name not in tols:
                raise UsageError(f"unknown tolerance {name!r} for {command}; "
                                 f"known: {', '.join(tols) or 'none'}")
            tols[name] = float(value)
        else:
            value = float(entry)
            tols = {name: value for name in tols}
    return tols


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    S = argparse.SUPPRESS
    common.add_argument("--eps", type=float, default=S, help="diffusion parameter in (0, 2)")
    common.add_argument("--n", type=int, default=S, help="truncation order N")
    common.add_argument("--n-list", dest="n_list", default=S,
                        help="comma-separated increasing truncation orders")
    common.add_argument("--k", type=int, default=S, help="number of eigenvalues to track")
    common.add_argument("--tol", action="append", default=S,
                        help="tolerance override: a number (all checks) or name=value; repeatable")
    common.add_argument("--seed", type=int, default=S, help="random seed (default 0)")
    common.add_argument("--out", default=S, help="output directory")
    common.add_argument("--format", choices=["csv", "json"], default=S)
    common.add_argument("--allow-eps-out-of-range", dest="allow_eps_out_of_range",
                        action="store_true", default=S)
    common.add_argument("--config", default=S,
                        help="JSON file with option values; command-line flags take precedence")
    common.add_argument("--nodes-per-panel", dest="nodes_per_panel", type=int, default=S)
    common.add_argument("--grading", type=float, default=S)
    common.add_argument("--levels", type=int, default=S)
    common.add_argument("--samples", type=int, default=S, help="number of random inputs")
    common.add_argument("--degree", type=int, default=S, help="degree of random inputs")

    parser = _Parser(prog="bfheat", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True
    sub.add_parser("build", parents=[common], help="write the A, B, C, J and M matrices")
    p = sub.add_parser("verify", parents=[common], help="run the algebraic identity checks")
    p.add_argument("--inject-fault", dest="inject_fault", action="store_true", default=S,
                   help="flip the sign of one band entry of B (negative control)")
    sub.add_parser("spectrum", parents=[common], help="eigenvalue convergence over --n-list")
    p = sub.add_parser("resolve", parents=[common], help="solve L y = phi by quadrature")
    p.add_argument("--phi", default=S,
                   help="builtin:cosx-image, builtin:sin2x-image, builtin:one or a TrigPoly CSV")
    sub.add_parser("norms", parents=[common], help="audit the graph/domain norm equivalence")
    p = sub.add_parser("evolve", parents=[common], help="propagate y_t + L y = 0")
    p.add_argument("--y0", default=S, help="builtin:cosx, builtin:sinx or a TrigPoly CSV")
    p.add_argument("--times", default=S, help="comma-separated times starting at 0")
    p.add_argument("--method", choices=["eigen", "scaling_squaring"], default=S)
    return parser


def resolve_config(argv=None) -> RunConfig:
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    values = dict(BASE_DEFAULTS)
    values.update(COMMAND_DEFAULTS.get(command, {}))
    if "config" in args:
        path = args.pop("config")
        try:
            loaded = json.loads(Path(path).read_text())
        except OSError as exc:
            raise OSError(f"cannot read config file {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file {path} is not valid JSON: {exc}") from exc
        unknown = set(loaded) - set(BASE_DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        values.update(loaded)
    values.update(args)

    n_list = values["n_list"]
    if isinstance(n_list, str):
        n_list = _int_list(n_list)
    tol = values["tol"]
    tol = _parse_tol([tol] if isinstance(tol, (int, float, str)) else tol, command)
    options = {key: values[key] for key in ("samples", "degree", "phi", "y0", "times",
                                            "method", "inject_fault")}
    cfg = RunConfig(
        command=command,
        epsilon=float(values["eps"]),
        N=int(values["n"]),
        N_list=n_list,
        k=int(values["k"]),
        tolerances=tol,
        quadrature=dict(nodes_per_panel=int(values["nodes_per_panel"]),
                        grading=float(values["grading"]), levels=int(values["levels"])),
        output_dir=str(values["out"] or Path("bfheat-out") / command),
        format=values["format"],
        seed=int(values["seed"]),
        allow_eps_out_of_range=bool(values["allow_eps_out_of_range"]),
        options=options,
    )
    return cfg.validate()


# ------------------------------------------------------------------ output


def _write(cfg: RunConfig, name: str, text: str) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text)
    return path


def _write_json(cfg: RunConfig, name: str, results, checks=None) -> Path:
    doc = {"config": cfg.to_dict(), "results": results, "checks": checks or []}
    return _write(cfg, name, json.dumps(doc, indent=1, default=_num))


def _csv_with_config(cfg: RunConfig, header: list, rows) -> str:
    lines = [f"# config: {json.dumps(cfg.to_dict())}", ",".join(header)]
    lines += [",".join(str(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _checks_csv(cfg: RunConfig, report: VerificationReport) -> str:
    rows = [[c.name, "pass" if c.passed else "fail", repr(c.residual), repr(c.tolerance),
             f"{c.runtime:.6f}"] for c in report.checks]
    return _csv_with_config(cfg, ["check", "status", "residual", "tolerance", "runtime"], rows)


def _load_trigpoly(spec: str, builtins: dict) -> tuple:
    if spec.startswith("builtin:"):
        key = spec.split(":", 1)[1]
        if key not in builtins:
            raise UsageError(f"unknown built-in {key!r}; choose from {', '.join(builtins)}")
        return builtins[key]
    text = Path(spec).read_text()
    try:
        return TrigPoly.from_csv(text), None
    except (ValueError, IndexError) as exc:
        raise UsageError(f"{spec} is not a TrigPoly CSV (n,re,im): {exc}") from exc


# ----------------------------------------------------------------- commands


def cmd_build(cfg: RunConfig) -> tuple:
    eps, N = cfg.epsilon, cfg.N
    kw = dict(allow_out_of_range=cfg.allow_eps_out_of_range)
    mats = {"A": build_A(N, eps, **kw), "B": build_B(N, eps, **kw), "C": build_C(N),
            "J": build_J(N), "M": build_M_matrix(N, eps, **kw)}
    if cfg.format == "json":
        results = {name: json.loads(T.to_json()) for name, T in mats.items()}
        paths = [_write_json(cfg, "matrices.json", results)]
    else:
        paths = [_write(cfg, f"{name}.csv", T.to_csv({"config": cfg.to_dict()}))
                 for name, T in mats.items()]
    return EXIT_OK, f"build: wrote {', '.join(mats)} (eps={eps}, N={N}) to {paths[0].parent}"


def cmd_verify(cfg: RunConfig) -> tuple:
    eps, N, tol = cfg.epsilon, cfg.N, cfg.tolerances
    kw = dict(allow_out_of_range=cfg.allow_eps_out_of_range)
    rng = np.random.default_rng(cfg.seed)
    samples = [random_trigpoly(cfg.options["degree"], rng, real=False, zero_mean=False)
               for _ in range(cfg.options["samples"])]
    B = build_B(N, eps, **kw)
    if cfg.options["inject_fault"]:
        sup = B.sup.copy()
        sup[0] = -sup[0]
        B = TridiagonalMatrix(B.diag, sup, B.sub, B.label, B.epsilon)

    def sector():
        G = galerkin_matrix(N, eps, **kw)
        P = 1j * build_A(N, eps, **kw).to_dense().T
        return max(G.off_sector_residual(), np.max(np.abs(G.positive_block() - P)),
                   np.max(np.abs(G.negative_block() + P)))

    report = VerificationReport()
    report.add("factorization",
               lambda: check_factorization(N, eps, B=B, relative=True, **kw),
               tol["factorization"])
    report.add("J_selfadjoint", lambda: check_J_selfadjoint(N, eps, **kw), tol["J_selfadjoint"])
    report.add("JLJ", lambda: max(check_JLJ(y, eps, **kw) for y in samples), tol["JLJ"])
    report.add("LMS", lambda: max(check_LMS(y, eps, **kw) for y in samples), tol["LMS"])
    report.add("sector_decoupling", sector, tol["sector_decoupling"])
    report.add("M_mean", lambda: max(check_M_mean_invariance(y, eps, **kw) for y in samples),
               tol["M_mean"])

    if cfg.format == "json":
        path = _write_json(cfg, "report.json", {"passed": report.passed}, report.to_list())
    else:
        path = _write(cfg, "report.csv", _checks_csv(cfg, report))
    n_pass = sum(c.passed for c in report.checks)
    runtime = sum(c.runtime for c in report.checks)
    status = "PASS" if report.passed else "FAIL"
    failed = [c.name for c in report.checks if not c.passed]
    line = (f"verify: {status} {n_pass}/{len(report.checks)} checks (eps={eps}, N={N}) "
            f"in {runtime:.2f} s -> {path}")
    if failed:
        line += f"; failed: {', '.join(failed)}"
    return (EXIT_OK if report.passed else EXIT_FAIL), line


def cmd_spectrum(cfg: RunConfig) -> tuple:
    orders = cfg.N_list or [max(cfg.N // 2, 1), cfg.N]
    k = min(cfg.k, orders[0])
    table = convergence_study(cfg.epsilon, orders, k, threshold=cfg.tolerances["convergence"],
                              allow_out_of_range=cfg.allow_eps_out_of_range)
    max_im = table.max_imag_converged()
    nonconv = table.nonconverged_indices
    if cfg.format == "json":
        results = table.to_dict()
        results.update(max_imag_converged=_num(max_im), nonconverged_indices=nonconv)
        path = _write_json(cfg, "convergence.json", results)
    else:
        path = _write(cfg, "convergence.csv", table.to_csv(cfg.to_dict()))
    n_conv = int(table.converged.sum())
    return EXIT_OK, (f"spectrum: eps={cfg.epsilon} N={orders} k={k}: {n_conv}/{k} converged, "
                     f"max |Im| among converged = {max_im:.3e} -> {path}")


def _resolve_builtins(eps: float) -> dict:
    return {
        "cosx-image": (apply_L(TrigPoly.cos(1), eps, allow_out_of_range=True), TrigPoly.cos(1)),
        "sin2x-image": (apply_L(TrigPoly.sin(2), eps, allow_out_of_range=True), TrigPoly.sin(2)),
        "one": (TrigPoly.constant(1.0), None),
    }


def cmd_resolve(cfg: RunConfig) -> tuple:
    eps = cfg.epsilon
    phi, exact = _load_trigpoly(cfg.options["phi"], _resolve_builtins(eps))
    grid = make_grid(eps, allow_out_of_range=cfg.allow_eps_out_of_range, **cfg.quadrature)
    tol = cfg.tolerances
    try:
        sol = solve_L(phi, eps, grid, tol=tol["residual"],
                      allow_out_of_range=cfg.allow_eps_out_of_range)
    except (Unsolvable, QuadratureFailure) as exc:
        return EXIT_FAIL, f"resolve: FAIL ({type(exc).__name__}: {exc})"
    report = VerificationReport()
    report.add("residual", lambda: sol.residual, tol["residual"])
    report.add("periodicity", lambda: sol.periodicity_defect, tol["residual"])
    if exact is not None:
        report.add("recovery", lambda: sol.error_against(exact), tol["recovery"])
    if cfg.format == "json":
        results = sol.report()
        results.update(x=sol.x.tolist(), y=np.real(sol.y).tolist(), dy=np.real(sol.dy).tolist())
        path = _write_json(cfg, "solution.json", results, report.to_list())
    else:
        path = _write(cfg, "solution.csv", sol.to_csv(cfg.to_dict()))
        _write(cfg, "checks.csv", _checks_csv(cfg, report))
    status = "PASS" if report.passed else "FAIL"
    extra = "" if exact is None else f", max error {report.checks[-1].residual:.2e}"
    return (EXIT_OK if report.passed else EXIT_FAIL), (
        f"resolve: {status} eps={eps} phi={cfg.options['phi']}: residual {sol.residual:.2e}"
        f"{extra} -> {path}")


def cmd_norms(cfg: RunConfig) -> tuple:
    eps = cfg.epsilon
    kw = dict(allow_out_of_range=cfg.allow_eps_out_of_range)
    rng = np.random.default_rng(cfg.seed)
    p2 = p2_constant(eps)
    p1 = estimate_p1(cfg.N, eps, **kw)
    p3 = p3_constant(p1)
    slack = cfg.tolerances["bound_slack"]
    rows, upper_bad, lower_bad, ratios = [], 0, 0, []
    for i in range(cfg.options["samples"]):
        y = random_trigpoly(cfg.options["degree"], rng)
        g, m = norm_g(y, eps, **kw), norm_m(y)
        r = g / m
        up, lo = r <= p2 * (1 + slack), r >= p3 * (1 - slack)
        upper_bad += not up
        lower_bad += not lo
        ratios.append(r)
        rows.append([i, repr(g), repr(m), repr(r), int(up), int(lo)])
    ratios = np.array(ratios)
    report = VerificationReport()
    report.add("upper_bound_violations", lambda: upper_bad, 0.5)
    report.add("lower_bound_violations", lambda: lower_bad, 0.5)
    results = dict(p1_estimate=p1, p2=p2, p3=p3, max_ratio=float(ratios.max()),
                   min_ratio=float(ratios.min()), upper_violations=upper_bad,
                   lower_violations=lower_bad)
    if cfg.format == "json":
        results["samples"] = [dict(zip(["index", "norm_g", "norm_m", "ratio"],
                                       [r[0], float(r[1]), float(r[2]), float(r[3])]))
                              for r in rows]
        path = _write_json(cfg, "norms.json", results, report.to_list())
    else:
        header = ["index", "norm_g", "norm_m", "ratio", "upper_ok", "lower_ok"]
        text = _csv_with_config(cfg, header, rows)
        text = f"# summary: {json.dumps(results)}\n" + text
        path = _write(cfg, "norms.csv", text)
    status = "PASS" if report.passed else "FAIL"
    return (EXIT_OK if report.passed else EXIT_FAIL), (
        f"norms: {status} eps={eps}, {len(rows)} samples: worst ratio norm_g/norm_m = "
        f"{ratios.max():.4f} (bound {p2:g}), smallest = {ratios.min():.4f} "
        f"(bound {p3:.4f}) -> {path}")


def cmd_evolve(cfg: RunConfig) -> tuple:
    eps, N = cfg.epsilon, cfg.N
    kw = dict(allow_out_of_range=cfg.allow_eps_out_of_range)
    y0, _ = _load_trigpoly(cfg.options["y0"], {"cosx": (TrigPoly.cos(1), None),
                                               "sinx": (TrigPoly.sin(1), None)})
    if y0.degree > N:
        raise UsageError(f"initial data has degree {y0.degree} > N={N}")
    times = _float_list(cfg.options["times"])
    try:
        trace = evolve(y0, times, N, eps, cfg.options["method"], **kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    trace.config = cfg.to_dict()
    c0 = y0.mean
    tol = cfg.tolerances
    report = VerificationReport()
    report.add("mean", lambda: max(abs(y.mean - c0) for y in trace.states)
               / max(1.0, abs(c0)), tol["mean"])
    if y0.is_real():
        def reality():
            return max(np.max(np.abs(y.coeffs - np.conj(y.coeffs[::-1]))) / max(y.norm(), 1e-300)
                       for y in trace.states)
        report.add("reality", reality, tol["reality"])
    growth_vs_N = []
    for n in cfg.N_list or []:
        growth_vs_N.append(dict(N=n, t=times[-1],
                                log10_growth=float(transient_growth(times[-1], n, eps, log=True,
                                                                    **kw) / np.log(10))))
    if cfg.format == "json":
        results = dict(times=list(times), norms=[_num(v) for v in trace.norms],
                       growth=[_num(v) for v in trace.growth], growth_vs_N=growth_vs_N,
                       states=[[[float(c.real), float(c.imag)] for c in y.coeffs]
                               for y in trace.states])
        path = _write_json(cfg, "trace.json", results, report.to_list())
    else:
        path = _write(cfg, "trace.csv", trace.to_csv())
        if growth_vs_N:
            rows = [[g["N"], g["t"], repr(g["log10_growth"])] for g in growth_vs_N]
            _write(cfg, "growth_vs_N.csv",
                   _csv_with_config(cfg, ["N", "t", "log10_growth"], rows))
        _write(cfg, "checks.csv", _checks_csv(cfg, report))
    status = "PASS" if report.passed else "FAIL"
    return (EXIT_OK if report.passed else EXIT_FAIL), (
        f"evolve: {status} eps={eps} N={N} t={times[-1]:g}: norm {trace.norms[-1]:.4e}, "
        f"growth {trace.growth[-1]:.4e} -> {path}")


HANDLERS = {"build": cmd_build, "verify": cmd_verify, "spectrum": cmd_spectrum,
            "resolve": cmd_resolve, "norms": cmd_norms, "evolve": cmd_evolve}


def main(argv=None) -> int:
    try:
        cfg = resolve_config(argv)
        code, summary = HANDLERS[cfg.command](cfg)
    except (UsageError, InvalidEpsilon) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except BFHeatError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print(summary)
    return code


if __name__ == "__main__":
    sys.exit(main())
