"""Statistical tables and figure data regenerated from a campaign archive.

Every function here is a pure read of a finished RunArchive (plus, for the
increasing-run scan, fresh bounded iteration), so regenerating any table
twice yields identical output. Aborted records never contribute to any
statistic; they are surfaced separately by the campaign metadata.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .arithmetic import InvalidInput
from .campaign import RunArchive
from .cycles import CycleRecord, format_members
from .engine import (
    ABORTED,
    ALL_ODD,
    CYCLED,
    EVEN_START,
    ODD_TO_EVEN,
    OPEN,
    TERMINATED,
    EngineConfig,
    get_stepper,
)

__all__ = [
    "BoundExceeded",
    "SurvivalRow",
    "Histogram",
    "ParitySummary",
    "PenultimateTally",
    "MergerHistogram",
    "OddOpenSquares",
    "survival_table",
    "even_open_decay",
    "parity_summary",
    "length_distribution",
    "metric_distribution",
    "penultimate_tally",
    "increasing_odd_runs",
    "merger_histogram",
    "odd_open_entry_squares",
    "cycle_report",
    "profile_series",
    "LENGTH_CLASSES",
]


class BoundExceeded(InvalidInput):
    """Requested digit bound exceeds what the archive was computed to."""


@dataclass(frozen=True)
class SurvivalRow:
    d: int
    terminating: int
    cycling: int
    open: int


@dataclass(frozen=True)
class Histogram:
    metric: str
    sequence_class: str
    bins: tuple[tuple[int, int], ...]

    def total(self) -> int:
        return sum(c for _, c in self.bins)

    def count(self, key: int) -> int:
        for b, c in self.bins:
            if b == key:
                return c
        return 0


def _check_bounds(archive: RunArchive, d_list: Sequence[int]) -> None:
    bound = archive.digit_bound
    for d in d_list:
        if d > bound:
            raise BoundExceeded(f"d={d} exceeds archive bound {bound}")
        if d < 2:
            raise InvalidInput("survival bounds start at 2 digits")


def survival_table(archive: RunArchive, d_list: Sequence[int]) -> list[SurvivalRow]:
    """Terminating/cycling/open counts had the run stopped at each bound d.

    A record is open at d iff its maximum value has at least d digits;
    otherwise it keeps its final status. Aborted records are skipped.
    """
    _check_bounds(archive, d_list)
    ds = sorted(set(d_list))
    thresholds = [10 ** (d - 1) for d in ds]
    term = Counter()
    cyc = Counter()
    opn = Counter()
    for rec in archive.iter_records():
        if rec.status == ABORTED:
            continue
        mx = rec.max_value
        for d, thr in zip(ds, thresholds):
            if mx >= thr:
                opn[d] += 1
            elif rec.status == TERMINATED:
                term[d] += 1
            elif rec.status == CYCLED:
                cyc[d] += 1
            else:
                opn[d] += 1
    rows = [SurvivalRow(d, term[d], cyc[d], opn[d]) for d in ds]
    return [rows[ds.index(d)] for d in d_list]


def even_open_decay(
    archive: RunArchive, d_list: Sequence[int], interval: int = 10**5
) -> dict[int, tuple[list[int], int]]:
    """Per-subinterval counts of even starts reaching d digits, plus totals.

    Mirrors the survival decay table for even starting values; the start
    range is cut into consecutive blocks of `interval`.
    """
    _check_bounds(archive, d_list)
    lo, hi = archive.start_range
    n_bins = (hi - 1 - lo) // interval + 1
    ds = sorted(set(d_list))
    thresholds = [10 ** (d - 1) for d in ds]
    table = {d: [0] * n_bins for d in ds}
    for rec in archive.iter_records():
        if rec.status == ABORTED or rec.start % 2:
            continue
        mx = rec.max_value
        bin_i = (rec.start - lo) // interval
        for d, thr in zip(ds, thresholds):
            if mx >= thr:
                table[d][bin_i] += 1
    return {d: (table[d], sum(table[d])) for d in ds}


@dataclass(frozen=True)
class ParitySummary:
    """Terminating/cycling/open triples for the odd, all-odd, even, all rows.

    changeover_total counts odd starts whose sequence ever went even;
    changeover_by_square tallies the odd square that triggered each.
    """

    rows: dict[str, tuple[int, int, int]]
    changeover_total: int
    changeover_by_square: tuple[tuple[int, int], ...]

    def square_count(self, square: int) -> int:
        for sq, c in self.changeover_by_square:
            if sq == square:
                return c
        return 0


def parity_summary(archive: RunArchive) -> ParitySummary:
    order = {TERMINATED: 0, CYCLED: 1, OPEN: 2}
    rows = {k: [0, 0, 0] for k in ("odd", "all-odd", "even", "all")}
    squares = Counter()
    changeover = 0
    for rec in archive.iter_records():
        if rec.status == ABORTED:
            continue
        col = order[rec.status]
        rows["all"][col] += 1
        if rec.parity_class == EVEN_START:
            rows["even"][col] += 1
            continue
        rows["odd"][col] += 1
        if rec.parity_class == ALL_ODD:
            rows["all-odd"][col] += 1
        else:
            changeover += 1
            squares[rec.changeover_square] += 1
    by_square = tuple(sorted(squares.items()))
    return ParitySummary(
        rows={k: tuple(v) for k, v in rows.items()},
        changeover_total=changeover,
        changeover_by_square=by_square,
    )


LENGTH_CLASSES = (
    "all-odd-terminating",
    "odd-to-even-terminating",
    "even-terminating",
    "cycling",
    "open-main",
)


def metric_distribution(archive: RunArchive, metric: str, sequence_class: str) -> Histogram:
    """Histogram of length, height_bits, or volume (floored) over one class."""
    if sequence_class not in LENGTH_CLASSES:
        raise InvalidInput(f"unknown class {sequence_class!r}; pick from {LENGTH_CLASSES}")
    if metric not in ("length", "height_bits", "volume"):
        raise InvalidInput(f"unknown metric {metric!r}")
    mains: Optional[set[int]] = None
    if sequence_class == "open-main":
        mains = {s for s, is_main, _, _ in archive.iter_designations() if is_main}
    counts = Counter()
    for rec in archive.iter_records():
        if rec.status == ABORTED:
            continue
        if sequence_class == "all-odd-terminating":
            keep = rec.status == TERMINATED and rec.parity_class == ALL_ODD
        elif sequence_class == "odd-to-even-terminating":
            keep = rec.status == TERMINATED and rec.parity_class == ODD_TO_EVEN
        elif sequence_class == "even-terminating":
            keep = rec.status == TERMINATED and rec.parity_class == EVEN_START
        elif sequence_class == "cycling":
            keep = rec.status == CYCLED
        else:
            keep = rec.status == OPEN and rec.start in mains
        if not keep:
            continue
        if metric == "length":
            counts[rec.length] += 1
        elif metric == "height_bits":
            counts[rec.height_bits] += 1
        else:
            counts[int(rec.volume)] += 1
    return Histogram(
        metric=metric,
        sequence_class=sequence_class,
        bins=tuple(sorted(counts.items())),
    )


def length_distribution(archive: RunArchive, sequence_class: str) -> Histogram:
    """Exact counts of sequence lengths within one class of records."""
    return metric_distribution(archive, "length", sequence_class)


@dataclass(frozen=True)
class PenultimateTally:
    counts: tuple[tuple[int, int], ...]  # (prime, count), descending count
    solitary: tuple[int, ...]  # primes appearing exactly once

    def count(self, prime: int) -> int:
        for p, c in self.counts:
            if p == prime:
                return c
        return 0


def penultimate_tally(archive: RunArchive) -> PenultimateTally:
    """Penultimate-prime counts over all terminated records (start 1 has none)."""
    counter = Counter()
    for rec in archive.iter_records():
        if rec.status == TERMINATED and rec.penultimate_prime is not None:
            counter[rec.penultimate_prime] += 1
    ordered = tuple(sorted(counter.items(), key=lambda kv: (-kv[1], kv[0])))
    solitary = tuple(sorted(p for p, c in counter.items() if c == 1))
    return PenultimateTally(counts=ordered, solitary=solitary)


def increasing_odd_runs(
    limit: int, run_length: int, config: EngineConfig = EngineConfig()
) -> list[tuple[int, ...]]:
    """Strictly increasing runs of odd values in odd begin segments.

    Scans the maximal all-odd prefix of every odd start below limit and
    collects the distinct runs of run_length consecutive increasing values.
    """
    if limit < 3 or run_length < 2:
        raise InvalidInput("need limit >= 3 and run_length >= 2")
    stepper = get_stepper(config)
    found: set[tuple[int, ...]] = set()
    for start in range(1, limit, 2):
        prefix = [start]
        v = start
        seen = {start}
        while v != 1:
            v = stepper.step(v)
            if v % 2 == 0 or v in seen:
                break
            prefix.append(v)
            seen.add(v)
        for i in range(len(prefix) - run_length + 1):
            window = prefix[i : i + run_length]
            if all(window[j] < window[j + 1] for j in range(run_length - 1)):
                found.add(tuple(window))
    return sorted(found)


@dataclass(frozen=True)
class MergerHistogram:
    bins: tuple[tuple[int, int], ...]  # (merger count k, number of mains)
    top: tuple[tuple[int, int], ...]  # (main start, merger count), descending

    def count(self, k: int) -> int:
        for b, c in self.bins:
            if b == k:
                return c
        return 0


def merger_histogram(archive: RunArchive, status_filter: Optional[str] = OPEN) -> MergerHistogram:
    """How many mains have k clause-satisfied mergers (transitively attributed).

    status_filter restricts to mains of one final status (default open,
    matching the open-sequence merger table); None keeps all mains.
    """
    mains: dict[int, int] = {
        s: count for s, is_main, _, count in archive.iter_designations() if is_main
    }
    if status_filter is not None:
        wanted = {
            rec.start
            for rec in archive.iter_records()
            if rec.status == status_filter and rec.start in mains
        }
        mains = {s: c for s, c in mains.items() if s in wanted}
    bins = Counter(mains.values())
    top = tuple(sorted(mains.items(), key=lambda kv: (-kv[1], kv[0]))[:25])
    return MergerHistogram(bins=tuple(sorted(bins.items())), top=top)


@dataclass(frozen=True)
class OddOpenSquares:
    """Odd starts that stay open: their changeover squares and merge targets."""

    odd_length_histogram: tuple[tuple[int, int], ...]  # consecutive odd steps -> count
    per_square: tuple[tuple[int, int, int], ...]  # (square, times, main root)
    per_main: tuple[tuple[int, tuple[int, ...], int], ...]  # (main, squares, total)


def odd_open_entry_squares(archive: RunArchive) -> OddOpenSquares:
    opens: dict[int, tuple[int, int]] = {}
    for rec in archive.iter_records():
        if rec.status == OPEN and rec.parity_class == ODD_TO_EVEN:
            opens[rec.start] = (rec.changeover_square, rec.changeover_index)
    roots = {}
    if opens:
        wanted = set(opens)
        for start, _, root, _ in archive.iter_designations():
            if start in wanted:
                roots[start] = root
    lengths = Counter()
    square_times = Counter()
    square_root: dict[int, int] = {}
    per_main: dict[int, Counter] = {}
    for start, (square, idx) in opens.items():
        lengths[idx + 1] += 1
        square_times[square] += 1
        root = roots.get(start, start)
        square_root.setdefault(square, root)
        per_main.setdefault(root, Counter())[square] += 1
    per_square = tuple(
        (sq, square_times[sq], square_root[sq]) for sq in sorted(square_times)
    )
    mains = tuple(
        (root, tuple(sorted(cnt)), sum(cnt.values()))
        for root, cnt in sorted(per_main.items())
    )
    return OddOpenSquares(
        odd_length_histogram=tuple(sorted(lengths.items())),
        per_square=per_square,
        per_main=mains,
    )


def cycle_report(archive: RunArchive) -> list[CycleRecord]:
    """The cycle catalog, sorted by minimum member as serialized."""
    return archive.load_catalog()


def format_cycle_row(rec: CycleRecord) -> str:
    entries = "|".join(str(c) for c in rec.hit_counts)
    return (
        f"{format_members(rec.members)} : {rec.total} ({rec.main_count}) "
        f"even {rec.even_count} entry {entries}"
    )


def profile_series(record) -> list[tuple[int, int]]:
    """(step, decimal digit count) pairs for plotting a sequence profile."""
    if getattr(record, "trajectory", None) is not None:
        return [(i, len(str(v))) for i, v in enumerate(record.trajectory)]
    profile = getattr(record, "digit_profile", None)
    if profile is None:
        raise InvalidInput("record retains neither trajectory nor digit profile")
    return list(enumerate(profile))
