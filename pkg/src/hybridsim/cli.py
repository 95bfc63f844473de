"""Command-line harness: generate instances, run seeded solver trials, run
verification suites, and render a summary table of prior runs.

Report JSON is canonical (sorted keys, tight separators) and carries no
wall-clock data, so repeating a command with the same seed reproduces the
file byte for byte; timings go to a separate ``.timing.json`` sidecar that
diffs are expected to ignore.  Per-trial randomness is drawn from
``derive_rng(seed, trial)``, which makes every row recomputable in
isolation: trials could be farmed out to workers without changing any
output.

Exit codes: 0 success, 1 threshold or check miss, 2 usage error, 3
validation violation.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from hybridsim.analysis import SUITES
from hybridsim.problems import (
    dumps_canonical,
    instance_from_obj,
    instance_to_obj,
    sample_scs,
    sample_serial,
    sample_simon,
    sample_ss,
)
from hybridsim.solvers import SOLVERS
from hybridsim.stats import derive_rng, wilson_interval

REPORT_FORMAT = 1
DEFAULT_THRESHOLD = 2 / 3
OUT_ENV = "HYBRIDSIM_OUT"

# (min_n, max_n): problems built on 2n-bit stage tables stop at n = 8, where
# a single table already holds 65536 entries.
PROBLEM_SIZES = {"simon": (2, 12), "serial": (2, 8), "ss": (2, 8), "scs": (2, 8)}

# Solvers whose program depth is a constructor parameter; all others build
# programs of a fixed natural depth.
BUDGETED = {("ss", "cq"), ("scs", "cq")}

KIND_TO_PROBLEM = {"simon": "simon", "serial": "serial", "shuffler": "ss", "scs": "scs"}


class UsageError(Exception):
    pass


def _out_dir(args) -> Path:
    root = args.out or os.environ.get(OUT_ENV) or "reports"
    return Path(root)


def _hidden_period(values) -> int | None:
    """XOR period of a table given as a value list, or None for 1-to-1."""
    size = len(values)
    for s in range(1, size):
        if all(values[x] == values[x ^ s] for x in range(size)):
            return s
    return None


def _require_size(problem: str, n: int, d: int | None):
    lo, hi = PROBLEM_SIZES[problem]
    if not lo <= n <= hi:
        raise UsageError(f"{problem} supports n in {lo}..{hi}, got {n}")
    if problem == "simon":
        if d is not None:
            raise UsageError("simon takes no --d")
    else:
        if d is None:
            raise UsageError(f"{problem} needs --d")
        if d < 1:
            raise UsageError(f"--d must be at least 1, got {d}")


def _sample_with_truth(problem, n, d, variant, rng):
    """Draw one instance plus the value a correct solver must report."""
    if problem == "simon":
        inst = sample_simon(n, rng)
        return inst, ("answer", inst.s)
    if problem == "serial":
        inst = sample_serial(d, n, rng, variant=variant)
        if variant == "decision":
            return inst, ("label", inst.label)
        return inst, ("answer", inst.answer)
    if problem == "ss":
        inst, s = sample_ss(d, n, rng)
        return inst, ("answer", s)
    inst = sample_scs(d, n, rng)
    return inst, ("answer", inst.s)


def _loaded_truth(problem, inst):
    if problem == "simon":
        return ("answer", inst.s)
    if problem == "serial":
        if inst.variant == "decision":
            return ("label", inst.label)
        return ("answer", inst.answer)
    if problem == "ss":
        s = _hidden_period([int(v) for v in inst.tuples[-1]])
        if s is None:
            raise UsageError("the hidden function of this instance has no period")
        return ("answer", s)
    return ("answer", inst.s)


def _natural_depth(problem, model, d) -> int:
    if problem == "simon":
        return 1
    if problem == "serial":
        return 1 if model == "cq" else 2 * d + 2
    if problem == "ss":
        return 2 * d + 1
    return 4 if model == "qc" else d + 6


def _write_report(outdir: Path, stem: str, report: dict, rows: list, header: list,
                  timing: dict) -> list[Path]:
    outdir.mkdir(parents=True, exist_ok=True)
    json_path = outdir / f"{stem}.json"
    json_path.write_text(dumps_canonical(report))
    csv_path = outdir / f"{stem}.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    timing_path = outdir / f"{stem}.timing.json"
    timing_path.write_text(json.dumps(timing, sort_keys=True) + "\n")
    return [json_path, csv_path, timing_path]


# -- gen ---------------------------------------------------------------------------


def cmd_gen(args) -> int:
    _require_size(args.problem, args.n, args.d)
    if args.variant == "decision" and args.problem != "serial":
        raise UsageError("--variant decision is only available for serial")
    rng = derive_rng(args.seed)
    inst, _ = _sample_with_truth(args.problem, args.n, args.d, args.variant, rng)
    if args.out:
        path = Path(args.out)
        path.parent.mkdir(parents=True, exist_ok=True)
    else:
        name = f"{args.problem}-n{args.n}"
        if args.d is not None:
            name += f"-d{args.d}"
        if args.variant == "decision":
            name += "-decision"
        outdir = _out_dir(args)
        outdir.mkdir(parents=True, exist_ok=True)
        path = outdir / f"{name}-s{args.seed}.json"
    path.write_text(dumps_canonical(instance_to_obj(inst, seed=args.seed)))
    print(f"wrote {path}")
    return 0


# -- solve -------------------------------------------------------------------------


def _solve_config(args):
    """Resolve (problem, n, d, fixed instance or None, stem fragment)."""
    if args.instance:
        source = Path(args.instance)
        if not source.is_file():
            raise UsageError(f"instance file not found: {source}")
        obj = json.loads(source.read_text())
        inst = instance_from_obj(obj)
        problem = KIND_TO_PROBLEM[obj["kind"]]
        n = obj["n"]
        d = obj.get("d", obj.get("c"))
        return problem, n, d, inst, f"solve-{Path(args.instance).stem}"
    if args.problem is None or args.n is None:
        raise UsageError("solve needs either --instance or --problem with --n")
    _require_size(args.problem, args.n, args.d)
    stem = f"solve-{args.problem}-n{args.n}"
    if args.d is not None:
        stem += f"-d{args.d}"
    return args.problem, args.n, args.d, None, stem


def cmd_solve(args) -> int:
    problem, n, d, fixed_inst, stem = _solve_config(args)
    if (problem, args.model) not in SOLVERS:
        raise UsageError(f"no solver for problem {problem!r} in model {args.model!r}")
    if args.trials < 1:
        raise UsageError(f"--trials must be positive, got {args.trials}")
    natural = _natural_depth(problem, args.model, d)
    budget = args.depth if args.depth is not None else natural
    stem += f"-{args.model}-depth{budget}-t{args.trials}-s{args.seed}"
    outdir = _out_dir(args)

    config = {
        "problem": problem,
        "model": args.model,
        "n": n,
        "d": d,
        "variant": args.variant,
        "depth": budget,
        "trials": args.trials,
        "seed": args.seed,
        "threshold": args.threshold,
        "source": Path(args.instance).name if args.instance else "config",
    }

    solver_kw = {}
    if (problem, args.model) in BUDGETED:
        solver_kw["budget"] = budget
    elif budget < natural:
        # fixed-depth program: a smaller budget can never validate
        report = {
            "format": REPORT_FORMAT,
            "command": "solve",
            "config": config,
            "violations": ["DEPTH_EXCEEDED"],
        }
        _write_report(outdir, stem, report, [], ["violation"],
                      {"stem": stem, "total_seconds": 0.0})
        print(f"validation violation: DEPTH_EXCEEDED "
              f"(program needs depth {natural}, budget {budget})", file=sys.stderr)
        return 3

    fixed_truth = _loaded_truth(problem, fixed_inst) if fixed_inst is not None else None
    solver = SOLVERS[(problem, args.model)]
    rows = []
    timings = []
    successes = 0
    for t in range(args.trials):
        rng = derive_rng(args.seed, t)
        start = time.perf_counter()
        if fixed_inst is None:
            inst, truth = _sample_with_truth(problem, n, d, args.variant, rng)
        else:
            inst, truth = fixed_inst, fixed_truth
        result = solver(inst, rng, **solver_kw)
        timings.append(time.perf_counter() - start)
        if result.detail.get("violations"):
            kinds = sorted(set(result.detail["violations"]))
            report = {
                "format": REPORT_FORMAT,
                "command": "solve",
                "config": config,
                "violations": kinds,
            }
            _write_report(outdir, stem, report, [], ["violation"],
                          {"stem": stem, "total_seconds": sum(timings)})
            print(f"validation violation: {', '.join(kinds)}", file=sys.stderr)
            return 3
        tag, want = truth
        got = result.answer if tag == "answer" else result.label
        ok = bool(result.success and got == want)
        successes += ok
        rows.append({
            "trial": t,
            "seed": [args.seed, t],
            "success": ok,
            "depth": result.depth,
            "qbar": result.qbar,
            "classical": result.classical_queries,
        })

    rate = successes / args.trials
    lo, hi = wilson_interval(successes, args.trials)
    passed = rate >= args.threshold
    report = {
        "format": REPORT_FORMAT,
        "command": "solve",
        "config": config,
        "rows": rows,
        "aggregate": {
            "successes": successes,
            "trials": args.trials,
            "rate": rate,
            "ci": [lo, hi],
            "threshold": args.threshold,
            "passed": passed,
        },
    }
    csv_rows = [
        [r["trial"], args.seed, r["success"], r["depth"], r["qbar"], r["classical"]]
        for r in rows
    ]
    paths = _write_report(
        outdir, stem, report, csv_rows,
        ["trial", "seed", "success", "depth", "qbar", "classical"],
        {"stem": stem, "per_trial_seconds": timings, "total_seconds": sum(timings)},
    )
    verdict = "PASS" if passed else "FAIL"
    print(f"{verdict} {problem}/{args.model}: {successes}/{args.trials} = {rate:.3f} "
          f"(ci {lo:.3f}..{hi:.3f}, threshold {args.threshold:.3f})")
    for path in paths:
        print(f"wrote {path}")
    return 0 if passed else 1


# -- verify ------------------------------------------------------------------------


def cmd_verify(args) -> int:
    rng = derive_rng(args.seed)
    start = time.perf_counter()
    results = SUITES[args.suite](rng, trials=args.trials)
    elapsed = time.perf_counter() - start
    checks = [r.to_obj() for r in results]
    for check in checks:
        verdict = "PASS" if check["passed"] else "FAIL"
        print(f"{verdict} {check['name']}: statistic={check['statistic']:.6g} "
              f"bound={check['bound']:.6g} ci=[{check['ci'][0]:.6g}, {check['ci'][1]:.6g}]")
    passed = all(c["passed"] for c in checks)
    report = {
        "format": REPORT_FORMAT,
        "command": "verify",
        "config": {"suite": args.suite, "seed": args.seed, "trials": args.trials},
        "checks": checks,
        "passed": passed,
    }
    stem = f"verify-{args.suite}-s{args.seed}"
    if args.trials is not None:
        stem += f"-t{args.trials}"
    csv_rows = [
        [c["name"], c["statistic"], c["bound"], c["ci"][0], c["ci"][1], c["passed"]]
        for c in checks
    ]
    paths = _write_report(
        _out_dir(args), stem, report, csv_rows,
        ["name", "statistic", "bound", "ci_lo", "ci_hi", "passed"],
        {"stem": stem, "total_seconds": elapsed},
    )
    for path in paths:
        print(f"wrote {path}")
    return 0 if passed else 1


# -- report ------------------------------------------------------------------------


def _collect_solve_reports(outdir: Path) -> tuple[list, list]:
    entries = []
    skipped = []
    for path in sorted(outdir.glob("*.json")):
        if path.name.endswith(".timing.json"):
            continue
        try:
            obj = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError):
            skipped.append(path.name)
            continue
        if not isinstance(obj, dict) or obj.get("command") != "solve":
            continue
        if obj.get("format") != REPORT_FORMAT:
            skipped.append(path.name)
            continue
        if "aggregate" not in obj:
            skipped.append(f"{path.name} (validation violation run)")
            continue
        entries.append((path.name, obj))
    return entries, skipped


def _render_figure(entries, path: Path, threshold: float):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    labels, rates, lows, highs = [], [], [], []
    for _, obj in entries:
        cfg, agg = obj["config"], obj["aggregate"]
        tag = f"{cfg['problem']}/{cfg['model']} depth {cfg['depth']} (n={cfg['n']})"
        labels.append(tag)
        rates.append(agg["rate"])
        lows.append(agg["rate"] - agg["ci"][0])
        highs.append(agg["ci"][1] - agg["rate"])
    y = np.arange(len(labels))
    fig, ax = plt.subplots(figsize=(8.0, 1.5 + 0.45 * len(labels)))
    ax.barh(y, rates, color="#5a78c4", height=0.6)
    ax.errorbar(rates, y, xerr=[lows, highs], fmt="none", ecolor="#303030", capsize=3)
    ax.axvline(threshold, color="#c44e52", linestyle="--", linewidth=1.2,
               label=f"threshold {threshold:.3f}")
    ax.set_yticks(y)
    ax.set_yticklabels(labels, fontsize=8)
    ax.invert_yaxis()
    ax.set_xlim(0.0, 1.05)
    ax.set_xlabel("measured success rate")
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def cmd_report(args) -> int:
    outdir = _out_dir(args)
    entries, skipped = _collect_solve_reports(outdir) if outdir.is_dir() else ([], [])
    for name in skipped:
        print(f"skipping {name}", file=sys.stderr)
    if not entries:
        print(f"no solve reports under {outdir}")
        return 0
    header = ["problem", "model", "depth", "n", "d", "trials", "rate", "ci_lo", "ci_hi", "passed"]
    table = []
    for _, obj in entries:
        cfg, agg = obj["config"], obj["aggregate"]
        table.append([
            cfg["problem"], cfg["model"], cfg["depth"], cfg["n"],
            "-" if cfg["d"] is None else cfg["d"],
            agg["trials"], f"{agg['rate']:.4f}",
            f"{agg['ci'][0]:.4f}", f"{agg['ci'][1]:.4f}", agg["passed"],
        ])
    table.sort(key=lambda row: (row[0], row[1], str(row[2])))
    widths = [max(len(str(v)) for v in [head] + [row[i] for row in table])
              for i, head in enumerate(header)]
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    for row in table:
        print("  ".join(str(v).ljust(w) for v, w in zip(row, widths)))
    csv_path = outdir / "summary.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(table)
    png_path = outdir / "summary.png"
    _render_figure(entries, png_path, args.threshold)
    print(f"wrote {csv_path}")
    print(f"wrote {png_path}")
    return 0


# -- entry point ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hybridsim",
        description="Generate layered-oracle instances, run depth-budgeted "
                    "solvers, and verify the statistical bounds behind them.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="sample an instance and write canonical JSON")
    gen.add_argument("--problem", required=True, choices=sorted(PROBLEM_SIZES))
    gen.add_argument("--n", type=int, required=True, help="problem size in bits")
    gen.add_argument("--d", type=int, default=None,
                     help="gated stages (serial) or cascade depth (ss, scs)")
    gen.add_argument("--variant", choices=["search", "decision"], default="search")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", default=None,
                     help=f"output file (default: under --out dir or ${OUT_ENV})")

    solve = sub.add_parser("solve", help="run seeded solver trials and write a report")
    solve.add_argument("--instance", default=None, help="instance JSON from gen")
    solve.add_argument("--problem", choices=sorted(PROBLEM_SIZES), default=None)
    solve.add_argument("--n", type=int, default=None)
    solve.add_argument("--d", type=int, default=None)
    solve.add_argument("--variant", choices=["search", "decision"], default="search")
    solve.add_argument("--model", required=True, choices=["qnc", "qc", "cq"])
    solve.add_argument("--depth", type=int, default=None,
                       help="depth budget (default: the solver's natural depth)")
    solve.add_argument("--trials", type=int, default=100)
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD,
                       help="acceptance success rate (default 2/3)")
    solve.add_argument("--out", default=None, help="output directory")

    verify = sub.add_parser("verify", help="run one verification suite")
    verify.add_argument("--suite", required=True, choices=sorted(SUITES))
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--trials", type=int, default=None,
                        help="sample volume (default: suite-specific full volume)")
    verify.add_argument("--out", default=None, help="output directory")

    report = sub.add_parser("report", help="summarize solve reports as table, CSV, PNG")
    report.add_argument("--out", default=None, help="directory holding solve reports")
    report.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    return parser


COMMANDS = {"gen": cmd_gen, "solve": cmd_solve, "verify": cmd_verify, "report": cmd_report}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, OSError) as err:
        print(f"validation violation: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
