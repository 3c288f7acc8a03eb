"""Command-line interface.

Subcommands:
    run          compute a range of starting values into an archive
    resume       continue an interrupted campaign from its checkpoint
    seq          print one aliquot trajectory
    verify-cycle check that a member list maps around cyclically
    profile      per-step digit counts of one sequence (plot data)
    report       regenerate a statistics table from an archive

`run` exits 0 only when no sequence aborted (or --allow-aborts is given).
"""

from __future__ import annotations

import argparse
import csv
import sys
from typing import Optional

from . import campaign as camp
from . import reports
from .arithmetic import DEFAULT_BUDGET, FactorBudget
from .cycles import format_members, parse_members, verify_cycle
from .engine import CYCLED, OPEN, TERMINATED, EngineConfig, run_sequence

REPORT_KINDS = (
    "survival",
    "parity",
    "lengths",
    "heights",
    "volumes",
    "penultimate",
    "odd-runs",
    "mergers",
    "odd-squares",
    "cycles",
    "profile",
)


def _budget_from_args(args) -> FactorBudget:
    return FactorBudget(
        trial_division_bound=args.trial_bound,
        rho_iteration_cap=args.rho_cap,
        max_digits=args.max_digits,
    )


def _add_budget_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--trial-bound", type=int, default=DEFAULT_BUDGET.trial_division_bound)
    p.add_argument("--rho-cap", type=int, default=DEFAULT_BUDGET.rho_iteration_cap)
    p.add_argument("--max-digits", type=int, default=DEFAULT_BUDGET.max_digits)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aliquot", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a campaign over a range of starts")
    p.add_argument("--lo", type=int, required=True)
    p.add_argument("--hi", type=int, required=True)
    p.add_argument("--digits", type=int, default=10)
    p.add_argument("--parity", choices=("all", "odd", "even"), default="all")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--checkpoint-every", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--index-bound", type=int, default=10**12)
    p.add_argument("--allow-aborts", action="store_true")
    _add_budget_args(p)

    p = sub.add_parser("resume", help="continue from a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--allow-aborts", action="store_true")

    p = sub.add_parser("seq", help="print one aliquot trajectory")
    p.add_argument("--start", type=int, required=True)
    p.add_argument("--digits", type=int, default=10)
    _add_budget_args(p)

    p = sub.add_parser("verify-cycle", help="check a cycle member list")
    p.add_argument("--members", required=True, help='e.g. "220,284" or "[ 220, 284 ]"')
    _add_budget_args(p)

    p = sub.add_parser("profile", help="per-step digit counts of one sequence")
    p.add_argument("--start", type=int, required=True)
    p.add_argument("--digits", type=int, default=10)
    _add_budget_args(p)

    p = sub.add_parser("report", help="regenerate a statistics table")
    p.add_argument("kind", choices=REPORT_KINDS)
    p.add_argument("--archive", help="campaign directory (not needed for odd-runs/profile)")
    p.add_argument("--out", help="write comma-separated rows here instead of a text table")
    p.add_argument("--digits", type=int, nargs="*", help="bounds for the survival table")
    p.add_argument("--class", dest="seq_class", default="all-odd-terminating",
                   choices=reports.LENGTH_CLASSES)
    p.add_argument("--limit", type=int, default=10**6, help="start limit for odd-runs")
    p.add_argument("--run-length", type=int, default=4, help="run length for odd-runs")
    p.add_argument("--start", type=int, help="start value for the profile kind")
    p.add_argument("--interval", type=int, default=10**5,
                   help="sub-interval width for survival --by-subinterval")
    p.add_argument("--by-subinterval", action="store_true",
                   help="emit the even-start decay table instead of plain survival")

    return parser


def _emit(rows: list[tuple], header: tuple, out: Optional[str]) -> None:
    if out:
        with open(out, "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f)
            w.writerow(header)
            w.writerows(rows)
        return
    widths = [
        max(len(str(h)), *(len(str(r[i])) for r in rows)) if rows else len(str(h))
        for i, h in enumerate(header)
    ]
    print("  ".join(str(h).rjust(w) for h, w in zip(header, widths)))
    for r in rows:
        print("  ".join(str(x).rjust(w) for x, w in zip(r, widths)))


def _cmd_run(args) -> int:
    config = camp.CampaignConfig(
        start_lo=args.lo,
        start_hi=args.hi,
        output_dir=args.out,
        digit_bound=args.digits,
        budget=_budget_from_args(args),
        parity_filter=args.parity,
        checkpoint_every=args.checkpoint_every,
        worker_count=args.jobs,
        index_bound=args.index_bound,
    )
    archive = camp.run_campaign(config)
    return _report_outcome(archive, args.allow_aborts)


def _cmd_resume(args) -> int:
    archive = camp.resume(args.checkpoint, worker_count=args.jobs)
    return _report_outcome(archive, args.allow_aborts)


def _report_outcome(archive: Optional[camp.RunArchive], allow_aborts: bool) -> int:
    if archive is None:
        print("campaign stopped early; checkpoint written")
        return 0
    counts = archive.counts
    print(
        f"terminated {counts['terminated']}  cycled {counts['cycled']}  "
        f"open {counts['open']}  aborted {counts['aborted']}"
    )
    if archive.abort_count:
        print(f"WARNING: {archive.abort_count} sequences aborted "
              f"(starts {archive.meta['aborted_starts'][:10]}...)", file=sys.stderr)
        if not allow_aborts:
            return 1
    return 0


def _cmd_seq(args) -> int:
    cfg = EngineConfig(digit_bound=args.digits, budget=_budget_from_args(args))
    rec = run_sequence(args.start, cfg)
    for v in rec.trajectory:
        print(v)
    if rec.status == TERMINATED:
        note = f"terminated, penultimate prime {rec.penultimate_prime}"
    elif rec.status == CYCLED:
        note = f"cycle of length {rec.period} after {rec.preperiod} steps"
    elif rec.status == OPEN:
        note = f"open at {args.digits} digits"
    else:
        note = f"aborted at {rec.failed_value}"
    print(
        f"# {note}; length {rec.length}, max {rec.max_value} at index {rec.max_index}, "
        f"height {rec.height_digits:.4f} digits / {rec.height_bits} bits, "
        f"volume {rec.volume:.3f}",
        file=sys.stderr,
    )
    return 0


def _cmd_verify_cycle(args) -> int:
    text = args.members
    members = parse_members(text if text.strip().startswith("[") else f"[{text}]")
    ok = verify_cycle(members, _budget_from_args(args))
    print(f"{format_members(members)}: {'cycle verified' if ok else 'NOT a cycle'}")
    return 0 if ok else 1


def _cmd_profile(args) -> int:
    cfg = EngineConfig(digit_bound=args.digits, budget=_budget_from_args(args))
    rec = run_sequence(args.start, cfg)
    for step, digits in reports.profile_series(rec):
        print(f"{step} {digits}")
    return 0


def _need_archive(args) -> camp.RunArchive:
    if not args.archive:
        raise SystemExit("this report kind needs --archive")
    return camp.RunArchive(args.archive)


def _cmd_report(args) -> int:
    kind = args.kind
    if kind == "survival":
        archive = _need_archive(args)
        ds = args.digits or list(range(2, archive.digit_bound + 1))
        if args.by_subinterval:
            decay = reports.even_open_decay(archive, ds, args.interval)
            n_bins = len(next(iter(decay.values()))[0]) if decay else 0
            header = ("d", *[f"bin{i}" for i in range(n_bins)], "total")
            rows = [(d, *cells, total) for d, (cells, total) in sorted(decay.items())]
        else:
            header = ("d", "terminating", "cycling", "open")
            rows = [(r.d, r.terminating, r.cycling, r.open)
                    for r in reports.survival_table(archive, ds)]
    elif kind == "parity":
        summary = reports.parity_summary(_need_archive(args))
        header = ("parity", "terminating", "cycling", "open")
        rows = [(k, *summary.rows[k]) for k in ("odd", "all-odd", "even", "all")]
    elif kind in ("lengths", "heights", "volumes"):
        metric = {"lengths": "length", "heights": "height_bits", "volumes": "volume"}[kind]
        hist = reports.metric_distribution(_need_archive(args), metric, args.seq_class)
        header = (metric, "count")
        rows = list(hist.bins)
    elif kind == "penultimate":
        tally = reports.penultimate_tally(_need_archive(args))
        header = ("prime", "count")
        rows = list(tally.counts)
    elif kind == "odd-runs":
        runs = reports.increasing_odd_runs(args.limit, args.run_length)
        header = tuple(f"v{i}" for i in range(args.run_length))
        rows = [tuple(r) for r in runs]
    elif kind == "mergers":
        hist = reports.merger_histogram(_need_archive(args))
        header = ("mergers", "mains")
        rows = list(hist.bins)
    elif kind == "odd-squares":
        table = reports.odd_open_entry_squares(_need_archive(args))
        header = ("square", "times", "merges-with")
        rows = list(table.per_square)
    elif kind == "cycles":
        header = ("cycle", "total", "main", "even", "entries")
        rows = [
            (format_members(c.members), c.total, c.main_count, c.even_count,
             "|".join(str(x) for x in c.hit_counts))
            for c in reports.cycle_report(_need_archive(args))
        ]
    else:  # profile
        if args.start is None:
            raise SystemExit("report profile needs --start")
        archive = args.archive and camp.RunArchive(args.archive)
        digits = archive.digit_bound if archive else 10
        rec = run_sequence(args.start, EngineConfig(digit_bound=digits))
        header = ("step", "digits")
        rows = reports.profile_series(rec)
    _emit(rows, header, args.out)
    return 0


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "resume": _cmd_resume,
        "seq": _cmd_seq,
        "verify-cycle": _cmd_verify_cycle,
        "profile": _cmd_profile,
        "report": _cmd_report,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
