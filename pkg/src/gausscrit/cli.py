"""Command-line front end.

Every subcommand prints a JSON report (or a CSV table with --format csv)
and exits 0 whatever the verdict, unless --assert is given. Exit codes:
2 invalid configuration, 3 numerical non-convergence, 4 failed assertion.
"""

from __future__ import annotations

import argparse
import csv
import enum
import io
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from gausscrit.contour import (
    CrossCheckError,
    equivalence_suite,
    lemma_integration,
    real_line_form,
    series_I_prime_k,
    sign_pattern,
)
from gausscrit.el_verify import TOL_CRIT, Verdict, classify, el_profile, mixed_el_profile, series_consistency
from gausscrit.exponents import Case, DomainError, check_admissible, make_config
from gausscrit.gaussian import GaussianParams, SymmetryElement, apply_symmetry, phi_standard_closed
from gausscrit.mixed_norm import (
    GridSpec,
    direction_dictionary,
    directional_derivative_phi,
    phi_value,
    psi_value,
    remainder_slope,
    sample_extension,
)
from gausscrit.quadrature import ConvergenceError, QuadSpec

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3
EXIT_ASSERT = 4

DERIVATIVE_ZERO_TOL = 3e-6
DERIVATIVE_NONZERO_TOL = 1e-3

CSV_SCHEMAS = {
    "verify-el": "a,R",
    "verify-mixed": "a,R",
    "series": "k,value,sign,residual",
    "contour-check": "index,gamma,real_line,contour,closed,abs_diff",
    "variation": "z,remainder",
    "functional": "name,value",
    "derivative": "direction,real,imag,relative",
}


# ---------------------------------------------------------------------------
# report emission


def _num(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def to_json(obj, indent: int = 0) -> str:
    """JSON text with every float at 17 significant digits and complex as {re, im}."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return to_json({"re": obj.real, "im": obj.imag}, indent)
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'
    if isinstance(obj, enum.Enum):
        return to_json(obj.value, indent)
    if hasattr(obj, "as_dict"):
        return to_json(obj.as_dict(), indent)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{to_json(str(k))}: {to_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        return "[\n" + ",\n".join(pad + to_json(v, indent + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


@dataclass
class RunReport:
    command: str
    config: dict
    results: object
    tolerances: dict
    verdicts: list[dict] = field(default_factory=list)
    timing_ms: int = 0
    table: list[list] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(v["status"] == "pass" for v in self.verdicts)

    def as_dict(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "results": self.results,
            "tolerances": self.tolerances,
            "verdicts": self.verdicts,
            "timing_ms": self.timing_ms,
        }

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(CSV_SCHEMAS[self.command].split(","))
        for row in self.table:
            w.writerow([format(float(c), ".17g") if isinstance(c, (float, np.floating)) else c for c in row])
        return out.getvalue()


def _verdict(name: str, ok: bool | None) -> dict:
    return {"name": name, "status": "inconclusive" if ok is None else ("pass" if ok else "fail")}


def _expect(args, default_critical: bool) -> bool:
    if args.expect is None:
        return default_critical
    return args.expect == "critical"


# ---------------------------------------------------------------------------
# commands


def _a_grid(args) -> list[float]:
    if args.a_steps < 2 or not args.a_min < args.a_max:
        raise DomainError("need --a-steps >= 2 and --a-min < --a-max")
    return [float(a) for a in np.round(np.linspace(args.a_min, args.a_max, args.a_steps), 12)]


def _profile_verdict(report, expect_critical: bool) -> dict:
    if report.verdict is Verdict.INCONCLUSIVE:
        return _verdict("criticality", None)
    return _verdict("criticality", (report.verdict is Verdict.CRITICAL) == expect_critical)


def _with_tol(report, tol: float):
    if math.isfinite(report.max_rel_deviation):
        report.verdict = classify(report.max_rel_deviation, tol_crit=tol, tol_not=max(tol, 1e-4))
    return report


def cmd_verify_el(args) -> RunReport:
    cfg = make_config(args.p, args.d)
    grid = _a_grid(args)
    tol = args.tol if args.tol is not None else TOL_CRIT
    rep = _with_tol(el_profile(cfg, grid, QuadSpec(), threads=args.threads), tol)
    expect = _expect(args, cfg.case is Case.CRITICAL)
    return RunReport(
        "verify-el",
        {"d": args.d, "p": args.p, "a_min": args.a_min, "a_max": args.a_max, "a_steps": args.a_steps, "threads": args.threads},
        rep,
        {"tol_crit": tol, "tol_not": max(tol, 1e-4)},
        [_profile_verdict(rep, expect) | {"expected": "critical" if expect else "not-critical", "observed": rep.verdict.value}],
        table=[[a, R] for a, R in zip(rep.a_grid, rep.R_values)],
    )


def cmd_verify_mixed(args) -> RunReport:
    if args.q is None or args.r is None:
        raise DomainError("verify-mixed needs --q and --r")
    pair = check_admissible(args.r, args.q, args.d)
    if not pair:
        raise DomainError(f"not an admissible pair: {pair.reason}")
    tol = args.tol if args.tol is not None else TOL_CRIT
    rep = _with_tol(mixed_el_profile(pair, _a_grid(args), QuadSpec(), threads=args.threads), tol)
    expect = _expect(args, True)
    return RunReport(
        "verify-mixed",
        {"d": args.d, "q": args.q, "r": args.r, "a_min": args.a_min, "a_max": args.a_max, "a_steps": args.a_steps, "threads": args.threads},
        rep,
        {"tol_crit": tol, "tol_not": max(tol, 1e-4)},
        [_profile_verdict(rep, expect) | {"expected": "critical" if expect else "not-critical", "observed": rep.verdict.value}],
        table=[[a, R] for a, R in zip(rep.a_grid, rep.R_values)],
    )


def cmd_series(args) -> RunReport:
    cfg = make_config(args.p, args.d)
    tol = args.tol if args.tol is not None else 1e-6
    config = {"d": args.d, "p": args.p, "kmax": args.kmax}
    if cfg.case is Case.CRITICAL:
        raise DomainError("no series expansion is used at p = 2")
    if cfg.case is Case.SUBCRITICAL:
        rep = series_consistency(cfg, args.kmax, QuadSpec(), tol)
        # a consistent geometric fit is what criticality would require
        expect = _expect(args, False)
        verdicts = [_verdict("geometric-fit", rep.consistent == expect)]
        table = [[k, v, s, res] for k, v, s, res in zip(rep.ks, rep.values, rep.signs, rep.residuals)]
        return RunReport("series", config, rep, {"fit_tol": tol}, verdicts, table=table)
    vals = [series_I_prime_k(k, cfg, QuadSpec()).value.real for k in range(args.kmax + 1)]
    signs = sign_pattern(vals)
    results = {"cfg": cfg, "ks": list(range(args.kmax + 1)), "values": vals, "signs": signs}
    return RunReport("series", config, results, {}, [], table=[[k, v, s, ""] for k, (v, s) in enumerate(zip(vals, signs))])


def cmd_contour_check(args) -> RunReport:
    tol = args.tol if args.tol is not None else 1e-8
    spec = QuadSpec()
    rows, table, worst = [], [], 0.0
    for i, (gamma, h, closed) in enumerate(equivalence_suite()):
        line = real_line_form(gamma, h, spec).require("real-line form").value
        cont = lemma_integration(gamma, h, spec).require("contour form").value
        diff = abs(line - cont)
        ok = diff <= tol * max(1.0, abs(cont))
        if closed is not None:
            ok = ok and abs(cont - closed) <= tol * max(1.0, abs(closed))
        worst = max(worst, diff / max(1.0, abs(cont)))
        rows.append({"gamma": gamma, "hspec": h.__dict__, "real_line": line, "contour": cont, "closed": closed, "agree": ok})
        table.append([i, gamma, line.real, cont.real, "" if closed is None else closed, diff])
    verdicts = [_verdict("equivalence", all(r["agree"] for r in rows))]
    return RunReport("contour-check", {}, {"instances": rows, "max_scaled_diff": worst}, {"tol": tol}, verdicts, table=table)


def cmd_variation(args) -> RunReport:
    q = args.q if args.q is not None else 4.0
    r = args.r if args.r is not None else 8.0
    if not (q > 1 and r > 1):
        raise DomainError("q and r must exceed 1")
    grid = GridSpec(args.d).build()
    F = sample_extension(grid, GaussianParams.standard(args.d), args.threads)
    G = sample_extension(grid, GaussianParams.make(args.d, z=1.0), args.threads)
    mags = [1e-2, 3e-3, 1e-3, 3e-4]
    rep = remainder_slope(F, G, q, r, mags)
    self_rep = remainder_slope(F, F, q, r, mags)
    threshold = args.tol if args.tol is not None else 1.15
    verdicts = [
        _verdict("slope>threshold", None if rep.degenerate else rep.fitted_slope > threshold),
        _verdict("self-slope~2", None if self_rep.degenerate else abs(self_rep.fitted_slope - 2.0) <= 0.1),
    ]
    return RunReport(
        "variation",
        {"d": args.d, "q": q, "r": r, "z_magnitudes": mags, "threads": args.threads},
        {"width_z1": rep, "self": self_rep},
        {"slope_threshold": threshold, "self_slope_band": 0.1},
        verdicts,
        table=[[m, v] for m, v in rep.remainders],
    )


def cmd_functional(args) -> RunReport:
    tol = args.tol if args.tol is not None else 1e-6
    rng = np.random.default_rng(args.seed)
    f = GaussianParams.standard(args.d)
    if args.q is not None or args.r is not None:
        if args.q is None or args.r is None:
            raise DomainError("the mixed functional needs both --q and --r")
        pair = check_admissible(args.r, args.q, args.d)
        if not pair:
            raise DomainError(f"not an admissible pair: {pair.reason}")
        value = lambda g: psi_value(g, pair)  # noqa: E731
        name, closed, config = "psi", None, {"d": args.d, "q": args.q, "r": args.r}
    else:
        if args.p is None:
            raise DomainError("functional needs --p, or --q and --r")
        cfg = make_config(args.p, args.d)
        value = lambda g: phi_value(g, cfg)  # noqa: E731
        name, closed, config = "phi", phi_standard_closed(cfg), {"d": args.d, "p": args.p}
    base = value(f)
    sym = [value(apply_symmetry(f, SymmetryElement.random(args.d, rng))) for _ in range(args.samples)]
    devs = [abs(s / base - 1.0) for s in sym]
    verdicts = [_verdict("symmetry-invariance", max(devs, default=0.0) <= tol)]
    results = {"name": name, "value": base, "closed": closed, "symmetry_values": sym, "symmetry_rel_dev": devs}
    if closed is not None:
        results["closed_rel_err"] = abs(base / closed - 1.0)
        verdicts.insert(0, _verdict("closed-form", results["closed_rel_err"] <= tol))
    table = [[name, base]] + ([[f"{name}_closed", closed]] if closed is not None else [])
    table += [[f"{name}_sym{i}", s] for i, s in enumerate(sym)]
    return RunReport("functional", config | {"seed": args.seed, "samples": args.samples}, results, {"rel_tol": tol}, verdicts, table=table)


def cmd_derivative(args) -> RunReport:
    if args.d != 2:
        raise DomainError("derivative is implemented for d = 2")
    cfg = make_config(args.p, 2)
    f = GaussianParams.standard(2)
    names = list(direction_dictionary().items())

    def one(item):
        return item[0], directional_derivative_phi(f, item[1], cfg)

    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            reps = list(pool.map(one, names))
    else:
        reps = [one(item) for item in names]
    zero_tol = args.tol if args.tol is not None else DERIVATIVE_ZERO_TOL
    expect = _expect(args, cfg.case is Case.CRITICAL)
    rel = [r.relative for _, r in reps]
    if expect:
        ok = all(x < zero_tol for x in rel)
    else:
        ok = any(x > DERIVATIVE_NONZERO_TOL for x in rel)
    return RunReport(
        "derivative",
        {"d": 2, "p": args.p, "threads": args.threads},
        {name: r for name, r in reps},
        {"zero_tol": zero_tol, "nonzero_tol": DERIVATIVE_NONZERO_TOL},
        [_verdict("criticality", ok) | {"expected": "critical" if expect else "not-critical"}],
        table=[[name, r.real, r.imag, r.relative] for name, r in reps],
    )


COMMANDS = {
    "verify-el": (cmd_verify_el, "constancy of R(a) = I(a) exp((p-1) a)"),
    "verify-mixed": (cmd_verify_mixed, "constancy of J(a) exp(a) for an admissible (q, r)"),
    "series": (cmd_series, "power-series coefficients I_k (p < 2) or I'_k (p > 2)"),
    "contour-check": (cmd_contour_check, "real-line vs folded-contour equivalence suite"),
    "variation": (cmd_variation, "first-variation remainder slopes of the mixed norm"),
    "functional": (cmd_functional, "functional values and symmetry invariance"),
    "derivative": (cmd_derivative, "directional derivatives of the functional in d = 2"),
}


def build_parser() -> argparse.ArgumentParser:
    schema = "\n".join(f"  {k}: {v}" for k, v in CSV_SCHEMAS.items())
    parser = argparse.ArgumentParser(
        prog="gausscrit",
        description=__doc__,
        epilog="CSV columns per command:\n" + schema,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--d", type=int, default=2)
        p.add_argument("--p", type=float, required=name in ("verify-el", "series", "derivative"))
        p.add_argument("--q", type=float)
        p.add_argument("--r", type=float)
        p.add_argument("--a-min", type=float, default=0.0)
        p.add_argument("--a-max", type=float, default=8.0)
        p.add_argument("--a-steps", type=int, default=21)
        p.add_argument("--kmax", type=int, default=12)
        p.add_argument("--tol", type=float, help="primary verdict tolerance (command specific)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--assert", dest="assert_", action="store_true", help="exit 4 unless every verdict passes")
        p.add_argument("--expect", choices=("critical", "not-critical"))
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--samples", type=int, default=10, help="random symmetry elements (functional)")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--out", help="write the report to this path instead of stdout")
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    fn = COMMANDS[args.command][0]
    start = time.perf_counter()
    try:
        report = fn(args)
    except (DomainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, CrossCheckError, FloatingPointError) as exc:
        print(f"non-convergence: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    report.timing_ms = int(round(1000 * (time.perf_counter() - start)))
    text = report.to_csv() if args.format == "csv" else to_json(report) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.assert_ and not report.passed:
        return EXIT_ASSERT
    return EXIT_OK


def main() -> None:
    sys.exit(run())
