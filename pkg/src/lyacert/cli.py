"""``lyacert`` command line.

Exit codes: 0 certified or success, 1 inconclusive or hypotheses failing,
2 numerically unstable (Floquet says UNBOUNDED), 64 usage or input error.
"""

import argparse
import csv
import io
import itertools
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import certifier as cert
from . import linear_engine as le
from . import specfile
from .constants import PExponent, beta
from .errors import (DomainError, LyacertError, MajorantInvalid, NonConvergedError, NotFoundError,
                     PreconditionError, ResonantLinearError, WitnessNotFound)
from .grid import ANTIPERIODIC, PERIODIC, normalize_bc

EXIT_OK = 0
EXIT_INCONCLUSIVE = 1
EXIT_UNSTABLE = 2
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; the contract here says 64."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# --- formatting -------------------------------------------------------------------------


def fmt(x):
    """Scientific notation with 17 significant digits; empty for missing values."""
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return format(x, ".16e")


class Report:
    """Ordered sections of ``key: value`` lines; renders as text or JSON."""

    def __init__(self, title):
        self.title = title
        self.sections = []

    def section(self, name, items):
        self.sections.append((name, list(items.items()) if isinstance(items, dict) else list(items)))
        return self

    def text(self):
        lines = [f"# {self.title}"]
        for name, items in self.sections:
            lines.append(f"[{name}]")
            for key, value in items:
                lines.append(f"  {key}: {_text_value(value)}")
        return "\n".join(lines) + "\n"

    def json(self):
        body = {"title": self.title}
        for name, items in self.sections:
            body[name] = {k: _json_value(v) for k, v in items}
        return json.dumps(body, indent=2) + "\n"


def _text_value(v):
    if isinstance(v, (float, np.floating)):
        return fmt(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_text_value(x) for x in v) + "]"
    if isinstance(v, complex):
        return f"{fmt(v.real)} {'+' if v.imag >= 0 else '-'} {fmt(abs(v.imag))}i"
    return str(v)


def _json_value(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (bool, int, str)) or v is None:
        return v
    return str(v)


def _emit(report, args):
    sys.stdout.write(report.json() if getattr(args, "json", False) else report.text())


def _csv_text(header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _write_out(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _parse_list(raw, what):
    items = [s.strip() for s in (raw or "").split(",") if s.strip()]
    if not items:
        raise UsageError(f"{what} list is empty")
    return items


def _parse_exponent(raw):
    try:
        return PExponent.parse(raw)
    except (DomainError, ValueError) as exc:
        raise UsageError(f"bad exponent {raw!r}: {exc}") from exc


def _load_linear(path):
    data = specfile.load(path)
    return data, specfile.linear_system(data)


def _membership_items(m):
    return {"symmetric_ok": m.symmetric_ok, "mean_psd_ok": m.mean_psd_ok,
            "no_constant_solutions_ok": m.no_constant_solutions_ok,
            "common_kernel_dim": m.common_kernel_dim, "mean_min_eigenvalue": m.mean_min_eigenvalue,
            "member": m.member}


def _floquet_items(rep):
    return {"verdict": rep.verdict, "multipliers": [complex(z) for z in rep.multipliers],
            "unit_circle_margin": rep.unit_circle_margin, "min_separation": rep.min_separation,
            "det_error": rep.det_error, "symmetry_defect": rep.symmetry_defect, "trace": rep.trace}


def _certificate_items(c):
    return {"method": c.method, "verdict": c.verdict, "exponents": [str(p) for p in c.exponents],
            "norms": c.norms, "constants": c.constants, "margins": c.margins,
            "lambda1": c.lambda1, "gamma": c.gamma, "boundary_case": c.boundary_case,
            "majorant_gap": c.majorant_gap, "notes": "; ".join(c.notes)}


def _echo(path, data):
    return {"spec": path, "kind": data.get("kind"), "dim": data.get("dim"), "period": data.get("period"),
            "steps_per_period": le.default_steps()}


# --- commands -------------------------------------------------------------------------------


def cmd_constants(args):
    ps = [_parse_exponent(p) for p in _parse_list(args.p, "p")]
    bcs = [normalize_bc(b) for b in _parse_list(args.bc, "bc")]
    T = float(args.T)
    if not T > 0:
        raise UsageError("T must be positive")
    header = ["bc", "p", "T", "beta", "beta_variational", "rel_diff", "per_ant_ratio", "scaling_rel_diff"]
    rows = []
    for bc in bcs:
        for p in ps:
            b = beta(bc, p, T)
            ratio = beta(PERIODIC, p, T) / beta(ANTIPERIODIC, p, T)
            # beta(T) = beta(1) T^{-(2 - 1/p)}
            expo = 2.0 - float(p.reciprocal)
            scaled = beta(bc, p, 1.0) * T ** (-expo)
            var = rel = None
            if args.variational:
                from .variational import minimize_Ip
                var = minimize_Ip(bc, p, T, int(args.variational)).value
                rel = abs(var - b) / b
            rows.append([bc, str(p), T, b, var, rel, ratio, abs(scaled - b) / b])
    _write_out(_csv_text(header, rows), args.output)
    return EXIT_OK


def _run_certify(P, B, exps, method, dim):
    """Return ``(certificate or None, notes)`` per the method policy."""
    notes = []
    if method in ("auto", "example2d") and dim == 2:
        try:
            c = cert.certify_2d_example(P)
            if c.certified or method == "example2d":
                return c, notes
            notes.append("example2d: " + "; ".join(c.notes or ["inconclusive"]))
        except PreconditionError as exc:
            if method == "example2d":
                raise
            notes.append(f"example2d skipped: {exc}")
    elif method == "example2d":
        raise UsageError("example2d needs a 2 x 2 system")
    last = None
    if method in ("auto", "thm41"):
        last = cert.certify_thm41(P, B, exps)
        if last.certified or method == "thm41":
            return last, notes
    if method in ("auto", "krein"):
        try:
            return cert.certify_krein(P), notes
        except NotFoundError as exc:
            notes.append(f"krein: {exc}")
            if method == "krein":
                c = cert.Certificate(cert.KREIN_LAMBDA1, cert.INCONCLUSIVE)
                c.notes.append(str(exc))
                return c, notes
    return last, notes


def cmd_certify(args):
    data, (P, B, exps, _) = _load_linear(args.spec)
    report = Report("certify").section("input", _echo(args.spec, data))
    member = cert.check_lambda_membership(P)
    report.section("membership", _membership_items(member))
    code = EXIT_INCONCLUSIVE
    certified = False
    if member.member:
        c, notes = _run_certify(P, B, exps, args.method, P.dim)
        report.section("certificate", _certificate_items(c))
        if notes:
            report.section("attempts", {f"note_{k + 1}": n for k, n in enumerate(notes)})
        certified = c.certified
    else:
        report.section("certificate", {"verdict": "NOT_IN_LAMBDA",
                                       "failed": "; ".join(member.failed_clauses())})
    if args.floquet_check:
        fl = le.floquet(P)
        report.section("floquet", _floquet_items(fl))
        if fl.verdict == le.UNBOUNDED:
            code = EXIT_UNSTABLE
        elif certified and fl.verdict == le.BOUNDED_STABLE:
            code = EXIT_OK
        elif certified:
            report.section("disagreement", {"note": f"certificate issued but Floquet verdict is {fl.verdict}"})
    elif certified:
        code = EXIT_OK
    report.section("result", {"exit_code": code})
    _emit(report, args)
    return code


def cmd_eig(args):
    data, (P, _, _, _) = _load_linear(args.spec)
    report = Report("eig").section("input", _echo(args.spec, data))
    member = cert.check_lambda_membership(P)
    report.section("membership", _membership_items(member))
    if not member.member:
        report.section("result", {"status": "refused: potential not in Lambda", "exit_code": EXIT_INCONCLUSIVE})
        _emit(report, args)
        return EXIT_INCONCLUSIVE
    try:
        rep = le.lambda1_shooting(P, with_rayleigh=True, rayleigh_cells=args.rayleigh_cells)
    except NotFoundError as exc:
        report.section("result", {"status": f"NOT_FOUND: {exc}", "exit_code": EXIT_INCONCLUSIVE})
        _emit(report, args)
        return EXIT_INCONCLUSIVE
    inv = 1.0 / rep.lambda1
    report.section("lambda1", {
        "lambda1_shooting": rep.lambda1, "bracket": list(rep.bracketing_interval),
        "root_kind": rep.root_kind, "inverse_lambda1": inv,
        "rayleigh_inverse_estimate": rep.rayleigh_estimate, "rayleigh_cells": args.rayleigh_cells,
        "relative_agreement": abs(rep.rayleigh_estimate - inv) / inv,
        "krein_stable": rep.lambda1 > 1.0 + cert.KREIN_TOL})
    report.section("result", {"exit_code": EXIT_OK})
    _emit(report, args)
    return EXIT_OK


def cmd_floquet(args):
    data, (P, _, _, _) = _load_linear(args.spec)
    fl = le.floquet(P)
    code = {le.BOUNDED_STABLE: EXIT_OK, le.MARGINAL: EXIT_INCONCLUSIVE, le.UNBOUNDED: EXIT_UNSTABLE}[fl.verdict]
    report = Report("floquet").section("input", _echo(args.spec, data)).section("floquet", _floquet_items(fl))
    report.section("result", {"exit_code": code})
    _emit(report, args)
    return code


def _solution_csv(sol):
    n = sol.dim
    header = ["t"] + [f"u_{i + 1}" for i in range(n)] + [f"du_{i + 1}" for i in range(n)]
    rows = np.column_stack([sol.t, sol.samples, sol.derivative_samples])
    return _csv_text(header, rows.tolist())


def cmd_solve(args):
    from . import resonant

    data = specfile.load(args.spec)
    report = Report("solve").section("input", _echo(args.spec, data))
    try:
        if data["kind"] == "linear_system":
            P, _, _, forcing = specfile.linear_system(data)
            if forcing is None:
                raise UsageError("linear_system solve needs a forcing")
            sol = le.solve_linear_periodic(P, forcing)
            report.section("solution", {"phase": "linear", "iterations": 1,
                                        "residual_sup": sol.residual_sup, "bc_mismatch": sol.bc_mismatch})
        elif data["kind"] == "nonlinear_system":
            prob, forcing = specfile.build_nonlinear(data)
            tol = data.get("tolerances", {})
            try:
                hyp = resonant.check_t1_hypotheses(prob)
                report.section("hypotheses", hyp.summary())
            except PreconditionError as exc:
                report.section("hypotheses", {"status": str(exc)})
            sol = resonant.solve_resonant(prob, forcing, tol=float(tol.get("tol", 1e-9)),
                                          max_outer=int(tol.get("max_outer", 200)), force=args.force)
            items = {"phase": sol.phase, "iterations": sol.iterations, "residual_sup": sol.residual_sup,
                     "bc_mismatch": sol.bc_mismatch, "fixed_point_defect": sol.fixed_point_defect,
                     "max_abs": float(np.max(np.abs(sol.samples)))}
            if sol.phase == "picard" and sol.iterations <= 2:
                items["note"] = "converged after one application of the fixed-point map (affine case)"
            for k, w in enumerate(sol.warnings):
                items[f"warning_{k + 1}"] = w
            report.section("solution", items)
        else:
            raise UsageError("solve needs a linear_system or nonlinear_system spec")
    except PreconditionError as exc:
        report.section("result", {"status": f"HYPOTHESES_FAILED: {exc}", "exit_code": EXIT_INCONCLUSIVE})
        _emit(report, args)
        return EXIT_INCONCLUSIVE
    except ResonantLinearError as exc:
        report.section("result", {"status": f"RESONANT_LINEAR: {exc}", "exit_code": EXIT_INCONCLUSIVE})
        _emit(report, args)
        return EXIT_INCONCLUSIVE
    except NonConvergedError as exc:
        report.section("result", {"status": f"NONCONVERGED: {exc}", "exit_code": EXIT_INCONCLUSIVE})
        _emit(report, args)
        return EXIT_INCONCLUSIVE
    if args.output:
        _write_out(_solution_csv(sol), args.output)
        report.section("output", {"csv": args.output})
    report.section("result", {"status": "OK", "exit_code": EXIT_OK})
    _emit(report, args)
    return EXIT_OK


def cmd_witness(args):
    try:
        gammas = [float(g) for g in _parse_list(args.gammas, "gammas")]
    except ValueError as exc:
        raise UsageError(f"bad --gammas: {exc}") from exc
    j = int(args.j) - 1
    p = _parse_exponent(args.p)
    T = float(args.T)
    if not T > 0:
        raise UsageError("T must be positive")
    if args.kind == "instability":
        P, rep, diag = cert.instability_witness(gammas, j, p, T)
        data = specfile.linear_spec(P, exponents=None, note="instability witness")
        data["witness"] = {"kind": "instability", "j": j + 1, "p": str(p), "gammas": gammas,
                           "floquet_verdict": rep.verdict, "unit_circle_margin": rep.unit_circle_margin,
                           **{k: v for k, v in diag.items() if k != "tried"}}
    else:
        A, h, diag = cert.resonance_witness(gammas, j, p, T)
        data = specfile.linear_spec(A, forcing=h, note="resonance witness")
        data["witness"] = {"kind": "resonance", "j": j + 1, "p": str(p), "gammas": gammas,
                           **{k: v for k, v in diag.items() if k != "tried"}}
    _write_out(specfile.dumps(data), args.output)
    return EXIT_OK


def _grid_values(spec):
    name, _, rng = spec.partition("=")
    parts = rng.split(":")
    if not name or len(parts) != 3:
        raise UsageError(f"--param expects name=start:stop:count, got {spec!r}")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise UsageError(f"bad --param {spec!r}") from exc
    if count < 0:
        raise UsageError("count must be nonnegative")
    return name.strip(), np.linspace(start, stop, count).tolist()


def sweep_row(template, names, values, method="thm41", lambda1="certified"):
    """One sweep row: ``[*values, membership, method, verdict, floquet, lambda1, min_margin, margins...]``."""
    data = specfile.validate(specfile.substitute(template, dict(zip(names, values))))
    P, B, exps, _ = specfile.linear_system(data)
    fl = le.floquet(P)
    member = cert.check_lambda_membership(P)
    margins = [None] * P.dim
    lam = None
    if not member.member:
        return list(values) + ["NOT_IN_LAMBDA", "", "NOT_IN_LAMBDA", fl.verdict, None, None] + margins
    c, _ = _run_certify(P, B, exps, method, P.dim)
    if c.margins:
        margins = list(c.margins)
    if c.lambda1 is not None:
        lam = c.lambda1
    elif lambda1 == "all" or (lambda1 == "certified" and c.certified):
        try:
            lam = le.lambda1_shooting(P).lambda1
        except NotFoundError:
            lam = None
    return list(values) + ["IN_LAMBDA", c.method, c.verdict, fl.verdict, lam, c.min_margin] + margins


def _sweep_task(task):
    return sweep_row(*task)


def run_sweep(template, params, method="thm41", lambda1="certified", jobs=1):
    """Header and rows for a parameter sweep; rows ordered by grid index."""
    names = [n for n, _ in params]
    dim = template.get("dim", 1)
    header = names + ["membership", "method", "certificate", "floquet", "lambda1", "min_margin"] + \
        [f"margin_{i + 1}" for i in range(dim)]
    points = list(itertools.product(*[v for _, v in params])) if params else []
    tasks = [(template, names, pt, method, lambda1) for pt in points]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(_sweep_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        rows = [_sweep_task(t) for t in tasks]
    return header, rows


def cmd_sweep(args):
    try:
        with open(args.template, encoding="utf-8") as fh:
            template = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read template: {exc}") from exc
    params = [_grid_values(p) for p in args.param or []]
    header, rows = run_sweep(template, params, args.method, args.lambda1, args.jobs)
    _write_out(_csv_text(header, rows), args.output)
    return EXIT_OK


# --- entry point ------------------------------------------------------------------------------


def build_parser():
    parser = _Parser(prog="lyacert", description="L^p Lyapunov constants, stability certificates "
                                                 "and resonant periodic solvers.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("constants", help="table of Lyapunov constants")
    p.add_argument("--p", required=True, help="comma-separated exponents, e.g. 1,2,inf")
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--bc", default="per,ant", help="comma-separated boundary conditions")
    p.add_argument("--variational", type=int, metavar="N", help="also minimize on N cells (slow)")
    p.add_argument("--output", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("certify", help="certify stable boundedness of u'' + P(t) u = 0")
    p.add_argument("spec")
    p.add_argument("--method", choices=["auto", "thm41", "krein", "example2d"], default="auto")
    p.add_argument("--floquet-check", dest="floquet_check", action="store_true", default=True)
    p.add_argument("--no-floquet-check", dest="floquet_check", action="store_false")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("eig", help="antiperiodic eigenvalue lambda_1 and its Rayleigh estimate")
    p.add_argument("spec")
    p.add_argument("--rayleigh-cells", type=int, default=512)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_eig)

    p = sub.add_parser("floquet", help="Floquet multipliers and boundedness verdict")
    p.add_argument("spec")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_floquet)

    p = sub.add_parser("solve", help="periodic solution of a forced linear or nonlinear system")
    p.add_argument("spec")
    p.add_argument("--force", action="store_true", help="solve even if the hypotheses fail")
    p.add_argument("--output", help="solution CSV path (t, u_i, du_i)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("witness", help="generate a sharpness witness spec")
    p.add_argument("--kind", choices=["instability", "resonance"], required=True)
    p.add_argument("--gammas", required=True, help="comma-separated target norms")
    p.add_argument("--j", type=int, default=1, help="1-based component index")
    p.add_argument("--p", required=True)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--output", help="spec path (default stdout)")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("sweep", help="certificate vs Floquet over a parameter grid")
    p.add_argument("template")
    p.add_argument("--param", action="append", help="name=start:stop:count (repeatable)")
    p.add_argument("--method", choices=["auto", "thm41", "krein", "example2d"], default="thm41")
    p.add_argument("--lambda1", choices=["none", "certified", "all"], default="certified")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--output", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"lyacert: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, MajorantInvalid) as exc:
        print(f"lyacert: input error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PreconditionError as exc:
        print(f"lyacert: precondition failed: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except WitnessNotFound as exc:
        print(f"lyacert: witness not found: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except LyacertError as exc:
        print(f"lyacert: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE


if __name__ == "__main__":
    sys.exit(main())
