"""First-common-value bookkeeping across sequences.

Sequences are committed strictly in ascending start order. The first value
of a committed trajectory that some earlier sequence already produced
yields a merger event; the event only demotes the later sequence from main
status when the common value occurs no later than the sequence's maximum
(the "before the maximum" clause). Events failing the clause are kept as
tail junctions for audit but never affect designations or merger counts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .arithmetic import InvalidInput
from .engine import ABORTED, SequenceRecord

__all__ = [
    "ValueIndex",
    "MergerEvent",
    "MainDesignation",
    "MergerBookkeeper",
    "CommitOrderViolation",
    "UnknownStart",
    "format_junction",
    "parse_junction",
]


class CommitOrderViolation(RuntimeError):
    """A record was committed after some larger start."""


class UnknownStart(KeyError):
    """Queried a start that has not been committed."""


@dataclass(frozen=True)
class MergerEvent:
    merging_start: int
    owner_start: int
    common_value: int
    idx_in_merging: int
    idx_in_owner: int
    clause_satisfied: bool


@dataclass(frozen=True)
class MainDesignation:
    start: int
    is_main: bool
    main_root: int


def format_junction(event: MergerEvent) -> str:
    """Junction notation "S:i=T:j=x" for sequence S merging with T at value x."""
    return (
        f"{event.merging_start}:{event.idx_in_merging}"
        f"={event.owner_start}:{event.idx_in_owner}={event.common_value}"
    )


def parse_junction(text: str) -> tuple[int, int, int, int, int]:
    """Inverse of format_junction: (merging, idx_merging, owner, idx_owner, value)."""
    left, mid, value = text.split("=")
    merging, idx_merging = left.split(":")
    owner, idx_owner = mid.split(":")
    return int(merging), int(idx_merging), int(owner), int(idx_owner), int(value)


# (owner, idx) packed into one int to keep the index compact; trajectory
# indices stay far below the 2^24 slot.
_IDX_BITS = 24
_IDX_MASK = (1 << _IDX_BITS) - 1


class ValueIndex:
    """Map value -> (owner_start, step_index) for the first sequence producing it.

    Entries are never overwritten; values at or above `bound` are not
    indexed (mergers at such values go undetected by design).
    """

    def __init__(self, bound: int = 10**12):
        self.bound = bound
        self._map: dict[int, int] = {}

    def __len__(self) -> int:
        return len(self._map)

    def __contains__(self, value: int) -> bool:
        return value in self._map

    def lookup(self, value: int) -> Optional[tuple[int, int]]:
        packed = self._map.get(value)
        if packed is None:
            return None
        return packed >> _IDX_BITS, packed & _IDX_MASK

    def insert_new(self, value: int, owner_start: int, step_index: int) -> None:
        if value >= self.bound or value in self._map:
            return
        if step_index > _IDX_MASK:
            raise InvalidInput(f"step index {step_index} exceeds index packing range")
        self._map[value] = (owner_start << _IDX_BITS) | step_index

    def state(self) -> dict[int, int]:
        return self._map

    def restore(self, state: dict[int, int]) -> None:
        self._map = state


class MergerBookkeeper:
    """Serial commit-phase state: value index, designations, merger counts."""

    def __init__(self, index_bound: int = 10**12):
        self.index = ValueIndex(index_bound)
        self._root: dict[int, int] = {}
        self._merged_into: dict[int, int] = {}  # main root -> clause-satisfied mergers
        self._last_committed: Optional[int] = None

    def commit(self, record: SequenceRecord) -> tuple[MainDesignation, Optional[MergerEvent]]:
        """Scan a record against earlier sequences and adopt its values.

        Requires ascending-start commit order and a record that still
        carries its full trajectory.
        """
        start = record.start
        if record.status == ABORTED:
            raise InvalidInput(f"aborted record {start} cannot be committed")
        if record.trajectory is None:
            raise InvalidInput(f"record {start} was compressed before commit")
        if self._last_committed is not None and start <= self._last_committed:
            raise CommitOrderViolation(
                f"start {start} committed after {self._last_committed}"
            )
        self._last_committed = start

        event = None
        traj = record.trajectory
        index = self.index
        hit = len(traj)
        for i, value in enumerate(traj):
            found = index.lookup(value)
            if found is not None:
                owner, idx_owner = found
                event = MergerEvent(
                    merging_start=start,
                    owner_start=owner,
                    common_value=value,
                    idx_in_merging=i,
                    idx_in_owner=idx_owner,
                    clause_satisfied=i <= record.max_index,
                )
                hit = i
                break
        for i in range(hit):
            index.insert_new(traj[i], start, i)

        if event is not None and event.clause_satisfied:
            root = self._root.get(event.owner_start, event.owner_start)
            self._root[start] = root
            self._merged_into[root] = self._merged_into.get(root, 0) + 1
        else:
            self._root[start] = start
        return self.designation(start), event

    def main_root(self, start: int) -> int:
        """Smallest main start reachable through the merger chain."""
        root = self._root.get(start)
        if root is None:
            raise UnknownStart(start)
        return root

    def designation(self, start: int) -> MainDesignation:
        root = self.main_root(start)
        return MainDesignation(start=start, is_main=root == start, main_root=root)

    def merger_count(self, start: int) -> int:
        """Clause-satisfied mergers attributed (transitively) to a main start."""
        return self._merged_into.get(start, 0)

    def committed_starts(self) -> Iterable[int]:
        return self._root.keys()

    def state(self) -> dict:
        return {
            "index": self.index.state(),
            "index_bound": self.index.bound,
            "root": self._root,
            "merged_into": self._merged_into,
            "last_committed": self._last_committed,
        }

    def restore(self, state: dict) -> None:
        self.index = ValueIndex(state["index_bound"])
        self.index.restore(state["index"])
        self._root = state["root"]
        self._merged_into = state["merged_into"]
        self._last_committed = state["last_committed"]
