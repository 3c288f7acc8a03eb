"""Catalog of aliquot cycles with per-member entry tallies.

Cycles are identified by their minimum member (distinct cycles are disjoint
as sets, so the minimum is a stable key). Discovery is dynamic: the catalog
only ever sees cycles that sequences actually entered.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .arithmetic import DEFAULT_BUDGET, FactorBudget, InvalidInput, aliquot_step
from .engine import CYCLED, SequenceRecord

__all__ = [
    "NotACycle",
    "CycleRecord",
    "CycleCatalog",
    "canonicalize",
    "verify_cycle",
    "cycle_kind",
    "format_members",
    "parse_members",
]


class NotACycle(ValueError):
    """The member list does not map around cyclically under s."""


def cycle_kind(period: int) -> str:
    if period == 1:
        return "perfect"
    if period == 2:
        return "amicable"
    return "sociable"


def verify_cycle(members: Sequence[int], budget: FactorBudget = DEFAULT_BUDGET) -> bool:
    """True iff s maps each member to the next, cyclically."""
    if not members:
        return False
    c = len(members)
    return all(aliquot_step(members[i], budget) == members[(i + 1) % c] for i in range(c))


def canonicalize(
    members: Sequence[int], budget: FactorBudget = DEFAULT_BUDGET
) -> tuple[int, ...]:
    """Rotate a verified cycle to start at its smallest member."""
    if not verify_cycle(members, budget):
        raise NotACycle(f"{list(members)} is not an aliquot cycle")
    if len(set(members)) != len(members):
        raise NotACycle("cycle members must be distinct")
    k = members.index(min(members))
    return tuple(members[k:]) + tuple(members[:k])


def format_members(members: Sequence[int]) -> str:
    return "[ " + ", ".join(str(m) for m in members) + " ]"


def parse_members(text: str) -> tuple[int, ...]:
    inner = text.strip()
    if not (inner.startswith("[") and inner.endswith("]")):
        raise InvalidInput(f"bad cycle member list: {text!r}")
    return tuple(int(tok) for tok in inner[1:-1].replace(",", " ").split())


@dataclass
class CycleRecord:
    """A canonical cycle with entry-point tallies.

    hit_counts[i] counts sequences whose first cycle value was members[i];
    their sum equals total.
    """

    members: tuple[int, ...]
    period: int
    kind: str
    hit_counts: list[int] = field(default_factory=list)
    total: int = 0
    main_count: int = 0
    even_count: int = 0

    @property
    def key(self) -> int:
        return self.members[0]


class CycleCatalog:
    """Mutable catalog keyed by cycle minimum; mutation is commit-phase only."""

    def __init__(self):
        self._cycles: dict[int, CycleRecord] = {}

    def __len__(self) -> int:
        return len(self._cycles)

    def get(self, key: int) -> Optional[CycleRecord]:
        return self._cycles.get(key)

    def records(self) -> list[CycleRecord]:
        return [self._cycles[k] for k in sorted(self._cycles)]

    def tally(self, record: SequenceRecord, is_main: bool) -> CycleRecord:
        """Count a cycled sequence against its cycle's entry point."""
        if record.status != CYCLED or not record.cycle_members:
            raise InvalidInput(f"record {record.start} is not a cycled sequence")
        entry = record.cycle_members[0]
        members = record.cycle_members
        k = members.index(min(members))
        canonical = tuple(members[k:]) + tuple(members[:k])
        key = canonical[0]
        rec = self._cycles.get(key)
        if rec is None:
            rec = CycleRecord(
                members=canonical,
                period=len(canonical),
                kind=cycle_kind(len(canonical)),
                hit_counts=[0] * len(canonical),
            )
            self._cycles[key] = rec
        rec.hit_counts[rec.members.index(entry)] += 1
        rec.total += 1
        if is_main:
            rec.main_count += 1
        if record.start % 2 == 0:
            rec.even_count += 1
        return rec

    # -- serialization (one row per cycle, sorted by minimum member) --------

    def rows(self) -> Iterable[str]:
        for rec in self.records():
            entries = "|".join(str(c) for c in rec.hit_counts)
            yield (
                f"{format_members(rec.members)}\t{rec.period}\t{rec.kind}\t"
                f"{rec.total}\t{rec.main_count}\t{rec.even_count}\t{entries}"
            )

    @staticmethod
    def parse_row(line: str) -> CycleRecord:
        members_s, period, kind, total, main, even, entries = line.rstrip("\n").split("\t")
        members = parse_members(members_s)
        return CycleRecord(
            members=members,
            period=int(period),
            kind=kind,
            hit_counts=[int(x) for x in entries.split("|")],
            total=int(total),
            main_count=int(main),
            even_count=int(even),
        )

    def state(self) -> dict[int, CycleRecord]:
        return self._cycles

    def restore(self, state: dict[int, CycleRecord]) -> None:
        self._cycles = state
