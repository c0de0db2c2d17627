"""Command-line interface.

Exit codes: 0 success, 1 analysis-level error (for example an unbounded
average bias), 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Optional, Sequence

from . import __version__
from .attrib import AttributableConfig, attributable_interval
from .calibrate import IntermittencyCalibration, gamma_prime_from_intermittency
from .core import Calibration, SensitivityError, UnboundedAverageBias, summarize
from .mcnemar import (
    Method,
    SensResult,
    SensStatus,
    gamma_sens_search,
    pvalue_bounds,
    trimmed_gamma_search,
)
from .studyfile import StudyFile, StudyFileError, load, load_bundled
from .verify import (
    SimulationConfig,
    sandwich_check,
    simulate_tails,
    theorem1_check,
    variance_jensen_check,
)

EXIT_OK = 0
EXIT_ANALYSIS = 1
EXIT_USAGE = 2

DEFAULT_U_PAIRS = "1,0;0.5,0.25;0,0.25"


class UsageError(Exception):
    pass


# argparse type helpers ---------------------------------------------------


def _open_unit(text: str) -> float:
    v = float(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"must lie strictly between 0 and 1, got {text}")
    return v


def _unit(text: str) -> float:
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {text}")
    return v


def _half_open_unit(text: str) -> float:
    v = float(text)
    if not 0.0 <= v < 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1), got {text}")
    return v


def _gamma(text: str) -> float:
    v = float(text)
    if not math.isfinite(v) or v < 1.0:
        raise argparse.ArgumentTypeError(f"must be a finite value >= 1, got {text}")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return v


def _prob_list(text: str) -> list[float]:
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed probability list {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("probability list is empty")
    for x in values:
        if not 0.0 <= x <= 1.0:
            raise argparse.ArgumentTypeError(f"{x} is not a probability")
    return values


def _u_pairs(text: str) -> list[tuple[float, float]]:
    pairs = []
    for chunk in text.split(";"):
        if not chunk.strip():
            continue
        parts = chunk.split(",")
        try:
            u1, u2 = (float(x) for x in parts)
        except ValueError:
            raise argparse.ArgumentTypeError(
                f"malformed pair {chunk!r}; expected 'u1,u2' pairs separated by ';'"
            ) from None
        if not (0.0 <= u1 <= 1.0 and 0.0 <= u2 <= 1.0):
            raise argparse.ArgumentTypeError(f"pair {chunk!r} is outside [0, 1]")
        pairs.append((u1, u2))
    if not pairs:
        raise argparse.ArgumentTypeError("no confounder pairs given")
    return pairs


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed integer list {text!r}") from None


# output helpers ------------------------------------------------------------


def _num(x: Optional[float]):
    """JSON-safe float: infinities become strings."""
    if x is None:
        return None
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return None
    return x


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=False)


def _fmt_gamma(res: SensResult) -> str:
    if res.status is SensStatus.NOT_SIGNIFICANT_AT_GAMMA_ONE:
        return "n.s."
    if res.status is SensStatus.INSENSITIVE_UP_TO_CAP:
        return f">{res.gamma_sens:g}"
    return f"{res.gamma_sens:.2f}"


def _sens_json(res: SensResult) -> dict:
    return {
        "status": res.status.value,
        "gamma_sens": _num(res.gamma_sens),
        "method": res.method.value,
        "alpha": res.alpha,
        "calibration_note": res.calibration_note,
        "continuity": res.continuity,
        "trimmed_pairs": res.trimmed,
    }


def _load_studies(path: Optional[str]) -> StudyFile:
    if path is None:
        return load_bundled()
    try:
        return load(path)
    except FileNotFoundError:
        raise UsageError(f"input file not found: {path}") from None
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except StudyFileError as exc:
        raise UsageError(str(exc)) from None


# commands -------------------------------------------------------------------


def cmd_mcnemar(args) -> int:
    studies = _load_studies(args.input)
    rows = []
    for study in studies:
        summ = summarize(study.table)
        b = pvalue_bounds(summ, args.gamma, args.method, args.continuity)
        rows.append((study, summ, b, b.upper <= args.alpha))
    if args.format == "json":
        out = {
            "parameters": {
                "gamma": args.gamma,
                "alpha": args.alpha,
                "method": args.method,
                "continuity": args.continuity,
            },
            "studies": [
                dict(
                    study.to_dict(),
                    S=summ.S,
                    T=summ.T,
                    c_plus=summ.c_plus,
                    p_lower=b.lower,
                    p_upper=b.upper,
                    significant=sig,
                )
                for study, summ, b, sig in rows
            ],
        }
        print(_dump(out))
        return EXIT_OK
    print(f"McNemar sensitivity bounds: Gamma={args.gamma:g}, alpha={args.alpha:g}, method={args.method}")
    print(f"{'study':<28}{'S':>6}{'T':>6}{'p_lower':>14}{'p_upper':>14}  verdict")
    for study, summ, b, sig in rows:
        verdict = "significant" if sig else "not significant"
        print(f"{study.label:<28}{summ.S:>6}{summ.T:>6}{b.lower:>14.6g}{b.upper:>14.6g}  {verdict}")
    return EXIT_OK


def _search(summ, args, method: str) -> SensResult:
    if args.trim_beta:
        return trimmed_gamma_search(summ, args.trim_beta, args.alpha, method, args.tol, args.continuity)
    return gamma_sens_search(summ, args.alpha, method, args.tol, args.continuity)


def _gamma_rows(studies: StudyFile, args) -> list:
    rows = []
    for study in studies:
        summ = summarize(study.table)
        rows.append(
            (study, summ, _search(summ, args, "exact"), _search(summ, args, "normal"))
        )
    return rows


def _gamma_table(rows, args) -> list[str]:
    lines = [
        f"Gamma_sens (largest Gamma with upper p-value <= {args.alpha:g}); "
        "valid under worst-case and average-case readings",
    ]
    if args.trim_beta:
        lines.append(f"trimming beta={args.trim_beta:g} (ceil(beta*S) treated-positive pairs dropped)")
    lines.append(f"{'control window':<28}{'S':>6}{'T':>6}{'exact':>10}{'normal':>10}")
    for study, summ, ex, no in rows:
        lines.append(f"{study.label:<28}{summ.S:>6}{summ.T:>6}{_fmt_gamma(ex):>10}{_fmt_gamma(no):>10}")
    return lines


def cmd_gamma_search(args) -> int:
    studies = _load_studies(args.input)
    rows = _gamma_rows(studies, args)
    if args.format == "json":
        out = {
            "parameters": {
                "alpha": args.alpha,
                "trim_beta": args.trim_beta,
                "tol": args.tol,
                "continuity": args.continuity,
            },
            "studies": [
                dict(study.to_dict(), S=summ.S, T=summ.T, exact=_sens_json(ex), normal=_sens_json(no))
                for study, summ, ex, no in rows
            ],
        }
        print(_dump(out))
        return EXIT_OK
    print("\n".join(_gamma_table(rows, args)))
    return EXIT_OK


def _attrib_config(args) -> AttributableConfig:
    try:
        return AttributableConfig(
            alpha=args.alpha, gamma=args.gamma, calibration=args.calibration, p_min=args.p_min
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _attrib_rows(studies: StudyFile, config: AttributableConfig) -> list:
    return [(s, summarize(s.table), attributable_interval(summarize(s.table), config)) for s in studies]


def _attrib_table(rows, config: AttributableConfig) -> list[str]:
    avg = config.calibration is Calibration.AVERAGE_CASE
    head = "Gamma'" if avg else "Gamma"
    lines = [
        f"Attributable effects, one-sided {100 * (1 - config.alpha):g}% sensitivity intervals "
        f"({config.calibration.value}, p_min={config.p_min:g})",
        "lower bound (inclusive), A >= a_bar; equivalently A > a* with a* = a_bar - 1",
        f"{'control window':<28}{'|D(+,-)|':>9}{'a_bar':>7}{'a*':>5}{head:>8}"
        + (f"{'implied Gamma':>15}" if avg else ""),
    ]
    for study, summ, res in rows:
        line = (
            f"{study.label:<28}{summ.T:>9}{res.a_lower_inclusive:>7}"
            f"{res.a_star_exclusive:>5}{config.gamma:>8.2f}"
        )
        if avg:
            line += f"{res.implied_worst_case_gamma:>15.2f}"
        lines.append(line)
    return lines


def _attrib_json(study, summ, res) -> dict:
    return dict(
        study.to_dict(),
        S=summ.S,
        T=summ.T,
        c_plus=summ.c_plus,
        a_lower_inclusive=res.a_lower_inclusive,
        a_star_exclusive=res.a_star_exclusive,
        implied_worst_case_gamma=_num(res.implied_worst_case_gamma),
        stop_reason=res.stop_reason,
        statement=res.statement(),
        deviate_trace=[
            {"a": e.a, "p_a": _num(e.p_a), "deviate": _num(e.deviate)} for e in res.deviate_trace
        ],
    )


def cmd_attributable(args) -> int:
    config = _attrib_config(args)
    studies = _load_studies(args.input)
    rows = _attrib_rows(studies, config)
    if args.format == "json":
        out = {
            "parameters": {
                "alpha": config.alpha,
                "gamma": config.gamma,
                "calibration": config.calibration.value,
                "p_min": config.p_min,
            },
            "studies": [_attrib_json(*row) for row in rows],
        }
        print(_dump(out))
        return EXIT_OK
    lines = _attrib_table(rows, config)
    lines.append("")
    for study, _, res in rows:
        lines.append(f"{study.label}: {res.statement()}")
    print("\n".join(lines))
    return EXIT_OK


def cmd_calibrate(args) -> int:
    cal = IntermittencyCalibration(args.rho, args.p_driving, args.p_not_driving)
    try:
        gp = gamma_prime_from_intermittency(cal)
    except UnboundedAverageBias as exc:
        raise UnboundedAverageBias(
            f"{exc}. With rho={cal.rho:g} no subject is ever driving in the control "
            "window, so the average-case calibration cannot be bounded."
        ) from exc
    if args.format == "json":
        print(_dump({"rho": cal.rho, "p_driving": cal.p_driving,
                     "p_not_driving": cal.p_not_driving, "p_bar": cal.p_bar, "gamma_prime": gp}))
    else:
        print(f"p_bar  = {cal.p_bar:.6g}")
        print(f"Gamma' = {gp:.6g}")
    return EXIT_OK


def cmd_report(args) -> int:
    studies = _load_studies(args.input)
    ns = argparse.Namespace(alpha=args.alpha, trim_beta=0.0, tol=1e-4, continuity=False)
    grows = _gamma_rows(studies, ns)
    config = AttributableConfig(
        alpha=args.alpha, gamma=args.gamma_prime, calibration=Calibration.AVERAGE_CASE, p_min=0.0
    )
    arows = _attrib_rows(studies, config)
    if args.format == "json":
        out = {
            "gamma_sens": [
                {"label": s.label, "exact": _sens_json(ex), "normal": _sens_json(no)}
                for s, _, ex, no in grows
            ],
            "attributable": [_attrib_json(*row) for row in arows],
        }
        print(_dump(out))
        return EXIT_OK
    print("\n".join(_gamma_table(grows, ns) + [""] + _attrib_table(arows, config)))
    return EXIT_OK


def _verify_theorem1(args) -> int:
    rep = theorem1_check(args.p)
    if args.format == "json":
        print(_dump({
            "p": args.p,
            "domain_note": rep.domain_note,
            "holds_on_corrected_domain": rep.holds_on_corrected_domain,
            "holds_on_literal_domain": rep.holds_on_literal_domain,
            "records": [
                {"a": r.a, "poisson_binomial_tail": r.lhs_tail, "binomial_tail": r.rhs_tail,
                 "holds": r.holds, "literal_domain": r.in_literal_domain,
                 "corrected_domain": r.in_corrected_domain}
                for r in rep.records
            ],
        }))
    else:
        print(rep.domain_note)
        print(f"{'a':>4}{'PB tail':>14}{'binom tail':>14}  holds  literal  corrected")
        for r in rep.records:
            print(f"{r.a:>4}{r.lhs_tail:>14.6g}{r.rhs_tail:>14.6g}  {'yes' if r.holds else 'NO':<5}  "
                  f"{'yes' if r.in_literal_domain else '-':<7}  {'yes' if r.in_corrected_domain else '-'}")
        print(f"corrected domain: {'holds' if rep.holds_on_corrected_domain else 'VIOLATED'}; "
              f"literal domain: {'holds' if rep.holds_on_literal_domain else 'violated'}")
    return EXIT_OK if rep.holds_on_corrected_domain else EXIT_ANALYSIS


def _verify_sandwich(args) -> int:
    rep = sandwich_check(args.p, args.gamma)
    lhs, rhs, jensen = variance_jensen_check(args.p)
    ok = rep.holds_everywhere and jensen
    if args.format == "json":
        print(_dump({
            "p": args.p,
            "gamma": args.gamma,
            "holds": rep.holds_everywhere,
            "records": [
                {"k": r.a, "lower_tail": r.lower_tail, "poisson_binomial_tail": r.lhs_tail,
                 "upper_tail": r.rhs_tail, "holds": r.holds}
                for r in rep.records
            ],
            "variance": {"sum_p_1mp": lhs, "S_pbar_1mpbar": rhs, "holds": jensen},
        }))
    else:
        print(f"{'k':>4}{'lower':>14}{'PB tail':>14}{'upper':>14}  holds")
        for r in rep.records:
            print(f"{r.a:>4}{r.lower_tail:>14.6g}{r.lhs_tail:>14.6g}{r.rhs_tail:>14.6g}  {'yes' if r.holds else 'NO'}")
        print(f"variance: sum p(1-p) = {lhs:.6g} <= S p_bar (1-p_bar) = {rhs:.6g}: {'yes' if jensen else 'NO'}")
    return EXIT_OK if ok else EXIT_ANALYSIS


def _verify_simulate(args) -> int:
    config = SimulationConfig(tuple(args.u), args.gamma_log, args.reps, args.seed)
    S = len(config.u_pairs)
    thresholds = args.thresholds if args.thresholds is not None else list(range(S + 1))
    try:
        res = simulate_tails(config, thresholds, workers=args.workers)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    ok = res.agrees(3.5)
    if args.format == "json":
        print(_dump({
            "p": list(res.p),
            "reps": res.reps,
            "seed": res.seed,
            "thresholds": list(res.thresholds),
            "empirical": list(res.empirical),
            "std_errors": list(res.std_errors),
            "exact": list(res.exact),
            "z_scores": [_num(z) for z in res.z_scores],
            "agrees_within_3_5_se": ok,
        }))
    else:
        print("p = [" + ", ".join(f"{x:.6f}" for x in res.p) + f"], reps={res.reps}, seed={res.seed}")
        print(f"{'a':>4}{'empirical':>12}{'se':>12}{'exact':>12}{'z':>9}")
        for a, e, se, x, z in zip(res.thresholds, res.empirical, res.std_errors, res.exact, res.z_scores):
            print(f"{a:>4}{e:>12.6f}{se:>12.6f}{x:>12.6f}{z:>9.3f}")
        print(f"agreement within 3.5 standard errors: {'yes' if ok else 'NO'}")
    return EXIT_OK if ok else EXIT_ANALYSIS


# parser -------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, input_: bool = True) -> None:
    if input_:
        p.add_argument("--input", "-i", metavar="PATH",
                       help="study file (.json or .csv); defaults to the bundled cellphone data")
    p.add_argument("--format", choices=("table", "json"), default="table")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="matchsens",
        description="Worst-case and average-case sensitivity analysis for matched pairs "
        "with binary treatment and outcome.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mcnemar", help="p-value bounds at a given Gamma")
    _add_common(p)
    p.add_argument("--gamma", type=_gamma, default=1.0)
    p.add_argument("--alpha", type=_open_unit, default=0.05)
    p.add_argument("--method", choices=[m.value for m in Method], default="exact")
    p.add_argument("--continuity", action="store_true", help="continuity correction (normal method)")
    p.set_defaults(func=cmd_mcnemar)

    p = sub.add_parser("gamma-search", help="Gamma_sens per study, exact and normal")
    _add_common(p)
    p.add_argument("--alpha", type=_open_unit, default=0.05)
    p.add_argument("--trim-beta", type=_half_open_unit, default=0.0,
                   help="drop ceil(beta*S) treated-positive pairs before the search")
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--continuity", action="store_true")
    p.set_defaults(func=cmd_gamma_search)

    p = sub.add_parser("attributable", help="sensitivity interval for attributable effects")
    _add_common(p)
    p.add_argument("--gamma", type=_gamma, default=2.1)
    p.add_argument("--calibration", choices=[c.value for c in Calibration], default="average_case")
    p.add_argument("--alpha", type=_open_unit, default=0.05)
    p.add_argument("--p-min", type=_half_open_unit, default=0.0)
    p.set_defaults(func=cmd_attributable)

    p = sub.add_parser("calibrate", help="average-case Gamma' from a driving intermittency rate")
    p.add_argument("--rho", type=_unit, required=True)
    p.add_argument("--p-driving", type=_unit, default=0.5)
    p.add_argument("--p-not-driving", type=_unit, default=1.0)
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("report", help="Gamma_sens and attributable-effect tables together")
    _add_common(p)
    p.add_argument("--alpha", type=_open_unit, default=0.05)
    p.add_argument("--gamma-prime", type=_gamma, default=2.1)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("verify", help="exact and Monte Carlo checks of the tail orderings")
    vsub = p.add_subparsers(dest="check", required=True)

    v = vsub.add_parser("theorem1", help="Poisson-Binomial vs Binomial(S, p_bar) upper tails")
    v.add_argument("--p", type=_prob_list, required=True, help="comma-separated probabilities")
    _add_common(v, input_=False)
    v.set_defaults(func=_verify_theorem1)

    v = vsub.add_parser("sandwich", help="worst-case tail bounds and the variance inequality")
    v.add_argument("--p", type=_prob_list, required=True)
    v.add_argument("--gamma", type=_gamma, required=True)
    _add_common(v, input_=False)
    v.set_defaults(func=_verify_sandwich)

    v = vsub.add_parser("simulate", help="seeded simulation under the logistic confounder model")
    v.add_argument("--u", type=_u_pairs, default=_u_pairs(DEFAULT_U_PAIRS),
                   help=f"confounder pairs 'u1,u2;u1,u2;...' (default {DEFAULT_U_PAIRS!r})")
    v.add_argument("--gamma-log", type=float, default=math.log(9.0),
                   help="log of the odds bound (default log 9)")
    v.add_argument("--reps", type=_positive_int, default=100_000)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--thresholds", type=_int_list, default=None)
    v.add_argument("--workers", type=_positive_int, default=1)
    _add_common(v, input_=False)
    v.set_defaults(func=_verify_simulate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"matchsens: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SensitivityError as exc:
        print(f"matchsens: {exc.code}: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    except ValueError as exc:
        print(f"matchsens: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
