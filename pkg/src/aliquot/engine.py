"""Aliquot sequence iteration and per-sequence metrics.

run_sequence iterates the sum-of-proper-divisors step from a start value
until the first of: reaching 1 (terminated), repeating a value (cycled),
producing a value at the configured digit bound (open), or a factoring
failure (aborted, which is data rather than an exception).

Stored trajectories never contain the repeated cycle value, so for every
status the length equals len(trajectory) - 1: the index of the final 1
for terminators, preperiod + period - 1 for cyclers, and the number of
steps performed for open or aborted sequences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional, Sequence

from .arithmetic import (
    DEFAULT_BUDGET,
    FactorBudget,
    FactorFailure,
    InvalidInput,
    OversizeInput,
    factorize,
    sigma,
    sigma_table,
)

__all__ = [
    "EngineConfig",
    "SequenceRecord",
    "AliquotStepper",
    "run_sequence",
    "detect_cycle",
    "compute_metrics",
    "parity_profile",
    "classify_at",
    "record_to_line",
    "record_from_line",
    "ParsedRecord",
    "TERMINATED",
    "CYCLED",
    "OPEN",
    "ABORTED",
]

TERMINATED = "terminated"
CYCLED = "cycled"
OPEN = "open"
ABORTED = "aborted"

_STATUS_CODE = {TERMINATED: "T", CYCLED: "C", OPEN: "O", ABORTED: "A"}
_CODE_STATUS = {v: k for k, v in _STATUS_CODE.items()}

ALL_ODD = "all-odd"
ODD_TO_EVEN = "odd-to-even"
EVEN_START = "even-start"


@dataclass(frozen=True)
class EngineConfig:
    """Iteration parameters.

    digit_bound d stops a sequence once a value with at least d decimal
    digits (i.e. >= 10^(d-1)) is produced. sieve_limit controls the size
    of the in-memory sigma table used for small values.
    """

    digit_bound: int = 10
    budget: FactorBudget = DEFAULT_BUDGET
    keep_full_trajectory: bool = True
    sieve_limit: int = 10**7

    def __post_init__(self):
        if self.digit_bound < 2:
            raise InvalidInput("digit_bound must be >= 2")


class SequenceMetrics(NamedTuple):
    length: int
    max_value: int
    max_index: int
    height_digits: float
    height_bits: int
    volume: float


@dataclass
class SequenceRecord:
    """One computed aliquot trajectory with status and metrics."""

    start: int
    status: str
    length: int
    max_value: int
    max_index: int
    height_digits: float
    height_bits: int
    volume: float
    parity_class: str
    computed_bound: int
    changeover_square: Optional[int] = None
    changeover_index: Optional[int] = None
    penultimate_prime: Optional[int] = None
    preperiod: Optional[int] = None
    period: Optional[int] = None
    cycle_members: Optional[tuple[int, ...]] = None
    failed_value: Optional[int] = None
    trajectory: Optional[tuple[int, ...]] = None
    digit_profile: Optional[tuple[int, ...]] = None
    last_values: Optional[tuple[int, ...]] = None

    @property
    def cycle_min(self) -> Optional[int]:
        if self.cycle_members is None:
            return None
        return min(self.cycle_members)

    def compress(self) -> "SequenceRecord":
        """Drop the full trajectory, keeping per-step digit counts and landmarks."""
        if self.trajectory is None:
            return self
        profile = tuple(len(str(v)) for v in self.trajectory)
        return replace(
            self,
            trajectory=None,
            digit_profile=profile,
            last_values=tuple(self.trajectory[-3:]),
        )


class AliquotStepper:
    """Fast s(n) evaluator: sigma table for small n, memoized factorization above.

    Pure function of n for a fixed budget; the memo only caches, so results
    are identical across processes and call orders.
    """

    def __init__(
        self,
        budget: FactorBudget = DEFAULT_BUDGET,
        sieve_limit: int = 10**7,
        memo_limit: int = 10**13,
    ):
        self.budget = budget
        self.sieve_limit = sieve_limit
        self.memo_limit = memo_limit
        self._table = sigma_table(sieve_limit)
        self._memo: dict[int, int] = {}

    def step(self, n: int) -> int:
        """s(n) = sigma(n) - n for n >= 2."""
        if n <= self.sieve_limit:
            if n < 2:
                raise InvalidInput(f"aliquot step requires n >= 2, got {n}")
            return int(self._table[n]) - n
        value = self._memo.get(n)
        if value is None:
            value = sigma(factorize(n, self.budget)) - n
            if n < self.memo_limit:
                self._memo[n] = value
        return value

    __call__ = step


_STEPPERS: dict[tuple, AliquotStepper] = {}


def get_stepper(config: EngineConfig) -> AliquotStepper:
    """Process-wide stepper cache, one per (budget, sieve_limit)."""
    key = (config.budget, config.sieve_limit)
    stepper = _STEPPERS.get(key)
    if stepper is None:
        stepper = AliquotStepper(config.budget, config.sieve_limit)
        _STEPPERS[key] = stepper
    return stepper


def run_sequence(start: int, config: EngineConfig = EngineConfig()) -> SequenceRecord:
    """Iterate s from start until termination, cycle, digit bound, or failure."""
    if start < 1:
        raise InvalidInput(f"start must be >= 1, got {start}")
    stepper = get_stepper(config)
    bound_value = 10 ** (config.digit_bound - 1)

    traj = [start]
    status = OPEN
    preperiod = period = None
    failed = None

    if start == 1:
        status = TERMINATED
    elif start >= bound_value:
        status = OPEN
    else:
        seen = {start}
        v = start
        while True:
            try:
                v = stepper.step(v)
            except (FactorFailure, OversizeInput):
                status = ABORTED
                failed = traj[-1]
                break
            if v == 1:
                traj.append(v)
                status = TERMINATED
                break
            if v in seen:
                status = CYCLED
                preperiod = traj.index(v)
                period = len(traj) - preperiod
                break
            traj.append(v)
            if v >= bound_value:
                status = OPEN
                break
            seen.add(v)

    return _build_record(start, tuple(traj), status, preperiod, period, failed, config)


def _build_record(
    start: int,
    traj: tuple[int, ...],
    status: str,
    preperiod: Optional[int],
    period: Optional[int],
    failed: Optional[int],
    config: EngineConfig,
) -> SequenceRecord:
    m = compute_metrics(traj)
    parity, square, square_idx = _parity_scan(traj)
    record = SequenceRecord(
        start=start,
        status=status,
        length=m.length,
        max_value=m.max_value,
        max_index=m.max_index,
        height_digits=m.height_digits,
        height_bits=m.height_bits,
        volume=m.volume,
        parity_class=parity,
        computed_bound=config.digit_bound,
        changeover_square=square,
        changeover_index=square_idx,
        penultimate_prime=traj[-2] if status == TERMINATED and len(traj) > 1 else None,
        preperiod=preperiod,
        period=period,
        cycle_members=traj[preperiod:] if status == CYCLED else None,
        failed_value=failed,
        trajectory=traj,
    )
    if not config.keep_full_trajectory:
        record = record.compress()
    return record


def detect_cycle(trajectory: Sequence[int]) -> Optional[tuple[int, int]]:
    """Minimal (preperiod k0, period c) such that trajectory[k0 + c] == trajectory[k0].

    Accepts any sequence; returns None when no value recurs. For a repeated
    value, c is the gap to its second occurrence.
    """
    first: dict[int, int] = {}
    gaps: dict[int, int] = {}
    for i, v in enumerate(trajectory):
        j = first.get(v)
        if j is None:
            first[v] = i
        elif j not in gaps:
            gaps[j] = i - j
    if not gaps:
        return None
    k0 = min(gaps)
    return k0, gaps[k0]


def compute_metrics(trajectory: Sequence[int]) -> SequenceMetrics:
    """Length, maximum, height (digits and bits), and volume of a trajectory.

    Volume is the sum of log10 over all entries, without rounding first.
    """
    if not trajectory:
        raise InvalidInput("trajectory must be nonempty")
    max_value = trajectory[0]
    max_index = 0
    for i, v in enumerate(trajectory):
        if v > max_value:
            max_value = v
            max_index = i
    return SequenceMetrics(
        length=len(trajectory) - 1,
        max_value=max_value,
        max_index=max_index,
        height_digits=math.log10(max_value),
        height_bits=max_value.bit_length(),
        volume=math.fsum(map(math.log10, trajectory)),
    )


def _parity_scan(traj: Sequence[int]) -> tuple[str, Optional[int], Optional[int]]:
    if traj[0] % 2 == 0:
        return EVEN_START, None, None
    for i, v in enumerate(traj):
        if v % 2 == 0:
            # s(odd) is even only after an odd square
            return ODD_TO_EVEN, traj[i - 1], i - 1
    return ALL_ODD, None, None


def parity_profile(record: SequenceRecord) -> str:
    """Parity class of a record, re-derived from its trajectory."""
    if record.trajectory is None:
        return record.parity_class
    return _parity_scan(record.trajectory)[0]


def classify_at(record, d: int) -> str:
    """Status the record would have received at the smaller digit bound d.

    Open iff some entry reaches d digits before the recorded resolution;
    since repeats and the final 1 are never the largest entries, this is
    exactly max_value >= 10^(d-1).
    """
    status = record.status
    if status == ABORTED:
        raise InvalidInput("aborted records cannot be classified")
    bound = getattr(record, "computed_bound", None)
    if bound is not None and d > bound:
        raise InvalidInput(f"classification bound {d} exceeds computed bound {bound}")
    if record.max_value >= 10 ** (d - 1):
        return OPEN
    return status


# ---------------------------------------------------------------------------
# record line serialization (append-only UTF-8, one line per sequence)
#
# fields: start  status  length  height_digits  height_bits  volume  parity
#         detail  max_value  max_index
# detail: T -> penultimate prime ("-" for start 1); C -> "k0,c,min";
#         O -> digit bound; A -> failed value.
# parity: "A" (all odd), "X:<square>:<index>" (odd to even), "E" (even start).


class ParsedRecord(NamedTuple):
    start: int
    status: str
    length: int
    height_digits: float
    height_bits: int
    volume: float
    parity_class: str
    changeover_square: Optional[int]
    changeover_index: Optional[int]
    penultimate_prime: Optional[int]
    preperiod: Optional[int]
    period: Optional[int]
    cycle_min: Optional[int]
    digit_bound: Optional[int]
    failed_value: Optional[int]
    max_value: int
    max_index: int
    computed_bound: Optional[int] = None


def record_to_line(record: SequenceRecord) -> str:
    status = record.status
    if status == TERMINATED:
        detail = str(record.penultimate_prime) if record.penultimate_prime else "-"
    elif status == CYCLED:
        detail = f"{record.preperiod},{record.period},{record.cycle_min}"
    elif status == OPEN:
        detail = str(record.computed_bound)
    else:
        detail = str(record.failed_value)
    parity = record.parity_class
    if parity == ALL_ODD:
        pfield = "A"
    elif parity == EVEN_START:
        pfield = "E"
    else:
        pfield = f"X:{record.changeover_square}:{record.changeover_index}"
    return (
        f"{record.start}\t{_STATUS_CODE[status]}\t{record.length}\t"
        f"{record.height_digits:.4f}\t{record.height_bits}\t{record.volume:.3f}\t"
        f"{pfield}\t{detail}\t{record.max_value}\t{record.max_index}"
    )


def record_from_line(line: str, computed_bound: Optional[int] = None) -> ParsedRecord:
    (
        start,
        code,
        length,
        height_digits,
        height_bits,
        volume,
        pfield,
        detail,
        max_value,
        max_index,
    ) = line.rstrip("\n").split("\t")
    status = _CODE_STATUS[code]
    square = square_idx = None
    if pfield == "A":
        parity = ALL_ODD
    elif pfield == "E":
        parity = EVEN_START
    else:
        _, sq, si = pfield.split(":")
        parity = ODD_TO_EVEN
        square, square_idx = int(sq), int(si)
    penultimate = preperiod = period = cycle_min = bound = failed = None
    if status == TERMINATED:
        penultimate = None if detail == "-" else int(detail)
    elif status == CYCLED:
        k0, c, cmin = detail.split(",")
        preperiod, period, cycle_min = int(k0), int(c), int(cmin)
    elif status == OPEN:
        bound = int(detail)
    else:
        failed = int(detail)
    return ParsedRecord(
        start=int(start),
        status=status,
        length=int(length),
        height_digits=float(height_digits),
        height_bits=int(height_bits),
        volume=float(volume),
        parity_class=parity,
        changeover_square=square,
        changeover_index=square_idx,
        penultimate_prime=penultimate,
        preperiod=preperiod,
        period=period,
        cycle_min=cycle_min,
        digit_bound=bound,
        failed_value=failed,
        max_value=int(max_value),
        max_index=int(max_index),
        computed_bound=computed_bound,
    )
