"""``trapwalk`` command line.

Every command prints one JSON document (or CSV for tabular commands) on
stdout.  Exit codes: 0 success, 1 no result (exhausted search), 2 invalid
input, 3 budget exceeded, 64 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Any, Sequence

from . import criticality, exact_engine, mc_sim, monotonicity, path_enumerator
from .errors import BudgetExceeded, TrapwalkError, ValidationError
from .landscape import Landscape, RecursionParams, generate_recursive, validate_c
from .rational import format_rational, parse_natural, parse_rational

EXIT_OK = 0
EXIT_NO_RESULT = 1
EXIT_INVALID = 2
EXIT_BUDGET = 3
EXIT_USAGE = 64

TABULAR = {"enumerate", "verify-bounds", "sweep"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: D401 - argparse hook
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise UsageError(message)


# ---------------------------------------------------------------- input helpers


def _natural(args, name: str, minimum: int = 0, default=None):
    raw = getattr(args, name, None)
    if raw is None:
        return default
    return parse_natural(raw, minimum=minimum, what=f"--{name.replace('_', '-')}")


def _params(args, n_default: int = 1) -> RecursionParams:
    if args.i1 is None or args.c is None:
        raise ValidationError("--i1 and --c are required")
    I1 = _natural(args, "i1", minimum=1)
    n = _natural(args, "n", minimum=1, default=n_default)
    return RecursionParams(I1, parse_rational(args.c), n)


def _read_json(path: str) -> Any:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from exc


def _landscape(args, n_default: int = 1) -> Landscape:
    """From --landscape FILE, or generated from --i1/--c/--n; --wall overrides the wall."""
    if getattr(args, "landscape", None):
        ls = Landscape.from_json(_read_json(args.landscape))
    else:
        ls = generate_recursive(_params(args, n_default))
    wall = _natural(args, "wall", minimum=1)
    return ls if wall is None else ls.with_wall(wall)


# ---------------------------------------------------------------- commands


def cmd_gen(args) -> dict:
    params = _params(args)
    ls = _landscape(args)
    return {
        **ls.to_json(),
        "I1": params.I1,
        "c": format_rational(params.c),
        "m": params.m,
        "n": params.n_intervals,
    }


def cmd_classify(args) -> dict:
    params = _params(args)
    max_shift = _natural(args, "k", minimum=1, default=criticality.DEFAULT_MAX_SHIFT)
    report = criticality.classify(params, max_shift)
    doc = {"I1": params.I1, "c": format_rational(params.c), **report.to_json()}
    doc["series_upper_bound"] = None
    if report.verdict == "finite":
        imax = _natural(args, "imax", minimum=1, default=10)
        doc["series_upper_bound"] = criticality.series_bound_upper(params, imax, max_shift).to_json()
    return doc


def cmd_expect(args) -> dict:
    ls = _landscape(args)
    res = exact_engine.expected_survival(ls)
    return {
        "landscape": ls.to_json(),
        "expected_tau": format_rational(res.expected_tau),
        "expected_tau_float": float(res.expected_tau),
        "death_prob": format_rational(res.death_prob),
        "wall_prob": format_rational(res.wall_prob),
        "expected_visits": format_rational(res.expected_visits),
        "visit_counts": [format_rational(v) for v in res.visit_counts],
        "sojourn": [format_rational(w) for w in res.sojourn],
    }


def _sim_config(args) -> mc_sim.SimConfig:
    return mc_sim.SimConfig(
        seed=_natural(args, "seed", default=0),
        n_paths=_natural(args, "paths", minimum=1, default=10_000),
        worker_count=_natural(args, "workers", minimum=1, default=1),
        mode=args.mode,
        path_cap=_natural(args, "cap", minimum=1, default=mc_sim.DEFAULT_PATH_CAP),
    )


def cmd_simulate(args) -> dict:
    ls = _landscape(args)
    est = mc_sim.simulate(ls, _sim_config(args))
    doc = est.to_json()
    if args.exact:
        exact = exact_engine.expected_survival(ls).expected_tau
        doc["exact"] = format_rational(exact)
        doc["z_score"] = est.z_score(float(exact))
    return doc


def _enumeration_landscape(args) -> tuple[Landscape, int]:
    imax = _natural(args, "imax", minimum=1, default=6)
    if getattr(args, "landscape", None):
        return _landscape(args), imax
    params = _params(args, n_default=imax)
    return generate_recursive(RecursionParams(params.I1, params.c, max(params.n_intervals, imax))), imax


def cmd_enumerate(args) -> dict:
    ls, imax = _enumeration_landscape(args)
    rows = []
    for i in range(1, imax + 1):
        for kappa in path_enumerator.enumerate_K(i):
            prob = path_enumerator.prob_A_kappa(ls, kappa)
            y = path_enumerator.expected_Y_given_Aplus(ls, kappa)
            rows.append({
                "i": i,
                "kappa": list(kappa),
                "prob": format_rational(prob),
                "expected_Y": format_rational(y),
                "contribution": format_rational(prob * y),
            })
    return {"i_max": imax, "count": len(rows), "sequences": rows}


def cmd_verify_bounds(args) -> dict:
    params = _params(args)
    ls, imax = _enumeration_landscape(args)
    report = path_enumerator.verify_lemma41_bounds(ls, params.c, imax)
    return {
        "I1": params.I1,
        "c": format_rational(params.c),
        "i_max": imax,
        "n_sequences": report.n_sequences,
        "n_checks": len(report.checks),
        "n_violations": len(report.violations),
        "checks": report.to_json(),
    }


def cmd_monotonicity(args) -> dict:
    if args.search:
        B1 = _natural(args, "b1", minimum=1, default=10)
        B3 = _natural(args, "b3", minimum=1, default=60)
        offsets = [parse_natural(v, minimum=1, what="--offsets") for v in args.offsets.split(",")]
        pair = monotonicity.find_counterexample(B1, B3, offsets)
        stats = monotonicity.compute_split_stats(pair.first, pair.k)
        return {"mode": "search", "found": True, "witness": pair.to_json(), "split": stats.to_json()}
    ls = _landscape(args)
    k = _natural(args, "k", minimum=1)
    if k is None:
        raise ValidationError("--k is required")
    stats = monotonicity.compute_split_stats(ls, k)
    tau = exact_engine.expected_survival(ls).expected_tau
    doc = {
        "mode": "split",
        "split": stats.to_json(),
        "expected_tau": format_rational(tau),
        "survival_via_split": format_rational(monotonicity.survival_via_split(stats)),
        "insertion_identities": None,
        "nonmono_rhs": None,
    }
    if k <= ls.n_intervals:
        doc["insertion_identities"] = monotonicity.verify_lemma52(ls, k).to_json()
        doc["nonmono_rhs"] = format_rational(monotonicity.nonmono_condition_rhs(stats))
    return doc


def _read_trajectory(path: str) -> list:
    doc = _read_json(path)
    if isinstance(doc, list):
        return doc
    if isinstance(doc, dict) and "trajectory" in doc:
        return doc["trajectory"]
    if isinstance(doc, dict) and "runs" in doc:
        return monotonicity.trajectory_from_runs(doc["runs"], doc.get("end", "*"))
    raise ValidationError("trajectory file must hold a list, {'trajectory': [...]} or {'runs': [...]}")


def cmd_replay(args) -> dict:
    ls = _landscape(args)
    traj = _read_trajectory(args.trajectory)
    res = mc_sim.replay(traj, ls)
    doc = res.to_json()
    doc["decomposition"] = None
    k = _natural(args, "k", minimum=1)
    if res.valid and k is not None:
        doc["decomposition"] = monotonicity.decompose_trajectory(traj, ls, k).to_json()
    if not res.valid:
        raise _InvalidResult(doc)
    return doc


class _InvalidResult(Exception):
    def __init__(self, doc: dict):
        super().__init__(doc.get("error"))
        self.doc = doc


# ---------------------------------------------------------------- sweep

SWEEP_COLUMNS = ["I1", "m", "c", "verdict", "witness_shift", "bound_shift", "upper_bound",
                 "truncated_n", "wall", "expected_tau", "mc_mean", "mc_stderr", "error"]


def _grid_points(config: dict) -> list[tuple[Any, Any]]:
    points: list[tuple[Any, Any]] = []
    grid = config.get("grid")
    if grid is not None:
        if not isinstance(grid, dict) or "I1" not in grid:
            raise ValidationError("'grid' must be an object with an 'I1' list")
        for I1 in grid["I1"]:
            if "m" in grid:
                ms = grid["m"]
            elif "m_max_factor" in grid:
                ms = range(grid.get("m_min", 1), grid["m_max_factor"] * I1 + 1)
            else:
                raise ValidationError("'grid' needs 'm' or 'm_max_factor'")
            points += [(I1, Fraction(m, I1) if isinstance(m, int) and isinstance(I1, int) and I1 > 0
                        else m) for m in ms]
    for p in config.get("points", []):
        if not isinstance(p, dict):
            raise ValidationError("each entry of 'points' must be an object")
        points.append((p.get("I1"), p.get("c")))
    return points


def _sweep_row(job) -> dict:
    (I1, c), trunc, mc = job
    row = dict.fromkeys(SWEEP_COLUMNS)
    try:
        if isinstance(I1, bool) or not isinstance(I1, int):
            raise ValidationError(f"I1 must be an integer, got {I1!r}")
        c = parse_rational(c if isinstance(c, (str, int, Fraction)) else str(c))
        row.update(I1=I1, c=format_rational(c))
        validity = validate_c(I1, c)
        if not validity.valid:
            raise ValidationError(f"c*I1 = {format_rational(validity.product)} is not a natural number")
        params = RecursionParams(I1, c)
        row["m"] = params.m
        report = criticality.classify(params)
        row.update(verdict=report.verdict, witness_shift=report.witness_shift)
        if report.verdict == "finite":
            bound = criticality.series_bound_upper(params)
            row.update(bound_shift=bound.shift, upper_bound=format_rational(bound.bound))
        if trunc:
            n = trunc.get("n", 3)
            ls = generate_recursive(RecursionParams(I1, c, n))
            ls = ls.with_wall(ls.last_trap + trunc.get("wall_offset", 1))
            row.update(truncated_n=n, wall=ls.wall,
                       expected_tau=format_rational(exact_engine.expected_survival(ls).expected_tau))
            if mc:
                cfg = mc_sim.SimConfig(seed=mc.get("seed", 0), n_paths=mc.get("paths", 1000),
                                       mode=mc.get("mode", "trap"))
                est = mc_sim.simulate(ls, cfg)
                row.update(mc_mean=est.mean, mc_stderr=est.std_error)
    except (TrapwalkError, ValueError, TypeError) as exc:
        row["error"] = str(exc)
    return row


def cmd_sweep(args) -> dict:
    config = _read_json(args.config)
    if not isinstance(config, dict):
        raise ValidationError("sweep config must be a JSON object")
    trunc = config.get("truncation")
    mc = config.get("mc")
    if mc and not trunc:
        raise ValidationError("'mc' cross-checks need a 'truncation' section")
    jobs = [(p, trunc, mc) for p in _grid_points(config)]
    workers = _natural(args, "workers", minimum=1, default=1)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_row, jobs))
    else:
        rows = [_sweep_row(j) for j in jobs]
    return {"columns": SWEEP_COLUMNS, "rows": rows}


# ---------------------------------------------------------------- output


def _to_csv(command: str, doc: dict) -> str:
    buf = io.StringIO()
    if command == "sweep":
        writer = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in doc["rows"]:
            writer.writerow({k: "" if v is None else v for k, v in row.items()})
    elif command == "enumerate":
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["i", "kappa", "prob", "expected_Y", "contribution"])
        for r in doc["sequences"]:
            writer.writerow([r["i"], " ".join(map(str, r["kappa"])), r["prob"],
                             r["expected_Y"], r["contribution"]])
    else:
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["kappa", "bound_kind", "lhs", "rhs", "holds"])
        for r in doc["checks"]:
            writer.writerow([" ".join(map(str, r["kappa"])), r["bound_kind"], r["lhs"], r["rhs"],
                             r["holds"]])
    return buf.getvalue()


COMMANDS = {
    "gen": cmd_gen,
    "classify": cmd_classify,
    "expect": cmd_expect,
    "simulate": cmd_simulate,
    "enumerate": cmd_enumerate,
    "verify-bounds": cmd_verify_bounds,
    "monotonicity": cmd_monotonicity,
    "replay": cmd_replay,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="trapwalk", description="Survival of a random walk among soft traps.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name: str, help_text: str, *groups: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text, description=help_text)
        if "recursion" in groups:
            p.add_argument("--i1", metavar="NAT", help="first interval length")
            p.add_argument("--c", metavar="RATIONAL", help="recursion constant, written a/b")
            p.add_argument("--n", metavar="NAT", help="number of intervals")
        if "landscape" in groups:
            p.add_argument("--landscape", metavar="PATH", help="landscape JSON file")
            p.add_argument("--wall", metavar="NAT", help="absorbing wall site (overrides the file)")
        p.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        return p

    add("gen", "Generate a recursive landscape", "recursion", "landscape")
    p = add("classify", "Certify finite or infinite expected survival", "recursion")
    p.add_argument("--k", metavar="NAT", help="largest tail shift to examine")
    p.add_argument("--imax", metavar="NAT", help="terms in the reported partial sum")
    add("expect", "Exact expected survival time of a walled landscape", "recursion", "landscape")
    p = add("simulate", "Monte Carlo estimate of the expected survival time", "recursion", "landscape")
    p.add_argument("--seed", metavar="U64")
    p.add_argument("--paths", metavar="NAT")
    p.add_argument("--workers", metavar="NAT")
    p.add_argument("--mode", choices=mc_sim.MODES, default="site")
    p.add_argument("--cap", metavar="NAT", help="step cap per path")
    p.add_argument("--exact", action="store_true", help="also report the exact value and z-score")
    p = add("enumerate", "List embedded-walk histories with their contributions", "recursion", "landscape")
    p.add_argument("--imax", metavar="NAT")
    p = add("verify-bounds", "Check every history against the geometric bounds", "recursion")
    p.add_argument("--imax", metavar="NAT")
    p = add("monotonicity", "Split statistics, site insertion and counterexample search",
            "recursion", "landscape")
    p.add_argument("--k", metavar="NAT", help="split index")
    p.add_argument("--search", action="store_true", help="search the three-interval family")
    p.add_argument("--b1", metavar="NAT")
    p.add_argument("--b3", metavar="NAT")
    p.add_argument("--offsets", default="1", metavar="LIST", help="comma-separated wall offsets")
    p = add("replay", "Validate an explicit trajectory and decompose it", "recursion", "landscape")
    p.add_argument("--trajectory", required=True, metavar="PATH")
    p.add_argument("--k", metavar="NAT", help="split index for the decomposition")
    p = add("sweep", "Classify a grid of recursion parameters")
    p.add_argument("config", metavar="CONFIG", help="JSON grid description")
    p.add_argument("--workers", metavar="NAT")
    return parser


def _emit(text: str, out: str | None) -> None:
    if out:
        try:
            with open(out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise ValidationError(f"cannot write {out}: {exc.strerror}") from exc
    else:
        sys.stdout.write(text)


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError:
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        if args.format == "csv" and args.command not in TABULAR:
            raise ValidationError(f"csv output is only available for {', '.join(sorted(TABULAR))}")
        doc = COMMANDS[args.command](args)
        text = _to_csv(args.command, doc) if args.format == "csv" else json.dumps(doc, indent=2) + "\n"
        _emit(text, args.out)
        return EXIT_OK
    except _InvalidResult as exc:
        sys.stdout.write(json.dumps(exc.doc, indent=2) + "\n")
        sys.stderr.write(f"trapwalk: invalid trajectory: {exc}\n")
        return EXIT_INVALID
    except monotonicity.SearchExhausted as exc:
        sys.stdout.write(json.dumps({"mode": "search", "found": False, "B1": exc.B1, "B3": exc.B3,
                                     "offsets": exc.offsets, "tried": exc.tried}, indent=2) + "\n")
        sys.stderr.write(f"trapwalk: {exc}\n")
        return EXIT_NO_RESULT
    except ValidationError as exc:
        sys.stderr.write(f"trapwalk: {exc}\n")
        return EXIT_INVALID
    except BudgetExceeded as exc:
        sys.stderr.write(f"trapwalk: budget exceeded: {exc}\n")
        return EXIT_BUDGET
    except TrapwalkError as exc:
        sys.stderr.write(f"trapwalk: {exc}\n")
        return EXIT_NO_RESULT


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
