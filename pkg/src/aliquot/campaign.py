"""Campaign orchestration: ranges of starts, parallel compute, serial commit.

Workers compute sequence records speculatively in parallel; a single
committer consumes them in ascending-start order, so merger ownership and
cycle tallies match a fully sequential run. Archives are deterministic:
identical configuration yields byte-identical files regardless of worker
count, chunking, or checkpoint cadence.

Archive layout (all deterministic, UTF-8):
    records.tsv       one line per start (engine.record_to_line format)
    mergers.tsv       junction string + tab + clause flag (1/0) per event
    designations.tsv  start, is_main (1/0), main_root, merger count
    cycles.tsv        cycle catalog rows (cycles.CycleCatalog format)
    meta.json         config echo, digest, tallies, abort count
Wall-clock timing goes to run.log, which is not part of archive identity.
"""

from __future__ import annotations

import hashlib
import json
import os
import pickle
import time
from dataclasses import dataclass, field
from multiprocessing import get_context
from pathlib import Path
from typing import Iterator, Optional

from .arithmetic import DEFAULT_BUDGET, FactorBudget, InvalidInput
from .cycles import CycleCatalog, CycleRecord
from .engine import (
    ABORTED,
    CYCLED,
    EngineConfig,
    ParsedRecord,
    SequenceRecord,
    get_stepper,
    record_from_line,
    record_to_line,
    run_sequence,
)
from .mergers import MergerBookkeeper, MergerEvent, format_junction, parse_junction

__all__ = [
    "CampaignConfig",
    "RunArchive",
    "Checkpoint",
    "run_campaign",
    "resume",
    "DigestMismatch",
    "CorruptCheckpoint",
    "IoFailure",
]

RECORDS_FILE = "records.tsv"
MERGERS_FILE = "mergers.tsv"
DESIGNATIONS_FILE = "designations.tsv"
CYCLES_FILE = "cycles.tsv"
META_FILE = "meta.json"
CHECKPOINT_FILE = "checkpoint.pkl"
LOG_FILE = "run.log"

_PARITIES = ("all", "odd", "even")


class DigestMismatch(RuntimeError):
    """Checkpoint was produced under a different campaign configuration."""


class CorruptCheckpoint(RuntimeError):
    """Checkpoint file cannot be loaded or is internally inconsistent."""


class IoFailure(OSError):
    """Archive directory or files cannot be created or written."""


@dataclass(frozen=True)
class CampaignConfig:
    """A range of starting values plus engine and bookkeeping parameters.

    Only semantic fields (range, digit bound, budget, parity filter, index
    bound) enter the config digest; execution knobs (workers, chunking,
    checkpoints, output path) cannot change results.
    """

    start_lo: int
    start_hi: int
    output_dir: str
    digit_bound: int = 10
    budget: FactorBudget = DEFAULT_BUDGET
    parity_filter: str = "all"
    checkpoint_every: int = 0
    worker_count: int = 1
    index_bound: int = 10**12
    sieve_limit: int = 10**7
    chunk_size: int = 2048
    stop_after: Optional[int] = None  # commit at most this many starts (testing hook)

    def __post_init__(self):
        if not 1 <= self.start_lo < self.start_hi:
            raise InvalidInput("need 1 <= start_lo < start_hi")
        if self.digit_bound < 2:
            raise InvalidInput("digit_bound must be >= 2")
        if self.worker_count < 1 or self.chunk_size < 1:
            raise InvalidInput("worker_count and chunk_size must be >= 1")
        if self.parity_filter not in _PARITIES:
            raise InvalidInput(f"parity_filter must be one of {_PARITIES}")

    def digest(self) -> str:
        payload = json.dumps(
            {
                "lo": self.start_lo,
                "hi": self.start_hi,
                "digits": self.digit_bound,
                "budget": [
                    self.budget.trial_division_bound,
                    self.budget.rho_iteration_cap,
                    self.budget.max_digits,
                ],
                "parity": self.parity_filter,
                "index_bound": self.index_bound,
            },
            sort_keys=True,
        )
        return hashlib.sha256(payload.encode()).hexdigest()

    def engine_config(self) -> EngineConfig:
        return EngineConfig(
            digit_bound=self.digit_bound,
            budget=self.budget,
            keep_full_trajectory=True,
            sieve_limit=self.sieve_limit,
        )

    def starts(self, from_start: Optional[int] = None) -> Iterator[int]:
        lo = self.start_lo if from_start is None else from_start
        if self.parity_filter == "odd":
            lo += lo % 2 == 0
            yield from range(lo, self.start_hi, 2)
        elif self.parity_filter == "even":
            lo += lo % 2 == 1
            yield from range(lo, self.start_hi, 2)
        else:
            yield from range(lo, self.start_hi)

    def expected_records(self) -> int:
        lo, hi = self.start_lo, self.start_hi
        if self.parity_filter == "all":
            return hi - lo
        odd = (hi - lo + (lo % 2)) // 2
        return odd if self.parity_filter == "odd" else hi - lo - odd

    def meta_echo(self) -> dict:
        return {
            "start_lo": self.start_lo,
            "start_hi": self.start_hi,
            "digit_bound": self.digit_bound,
            "budget": {
                "trial_division_bound": self.budget.trial_division_bound,
                "rho_iteration_cap": self.budget.rho_iteration_cap,
                "max_digits": self.budget.max_digits,
            },
            "parity_filter": self.parity_filter,
            "index_bound": self.index_bound,
        }


@dataclass
class Checkpoint:
    """Resumable committer state; produces archives byte-identical to one-shot runs."""

    digest: str
    config: CampaignConfig
    last_committed: Optional[int]
    committed: int
    records_offset: int
    mergers_offset: int
    tallies: dict
    bookkeeper_state: dict
    catalog_state: dict


# ---------------------------------------------------------------------------
# worker side

_WORKER_CONFIG: Optional[EngineConfig] = None


def _init_worker(engine_config: EngineConfig) -> None:
    global _WORKER_CONFIG
    _WORKER_CONFIG = engine_config
    get_stepper(engine_config)


def _compute_chunk(bounds: tuple[int, int, str]) -> list[SequenceRecord]:
    lo, hi, parity = bounds
    cfg = _WORKER_CONFIG
    step = 2 if parity in ("odd", "even") else 1
    return [run_sequence(s, cfg) for s in range(lo, hi, step)]


def _chunk_tasks(config: CampaignConfig, from_start: Optional[int]) -> Iterator[tuple[int, int, str]]:
    starts = list(config.starts(from_start))
    for i in range(0, len(starts), config.chunk_size):
        block = starts[i : i + config.chunk_size]
        yield block[0], block[-1] + 1, config.parity_filter


# ---------------------------------------------------------------------------
# committer

class _Committer:
    """Owns the serial phase: files, bookkeeper, catalog, tallies."""

    def __init__(self, config: CampaignConfig, fresh: bool):
        self.config = config
        self.dir = Path(config.output_dir)
        try:
            self.dir.mkdir(parents=True, exist_ok=True)
            mode = "w" if fresh else "r+"
            self.records_f = open(self.dir / RECORDS_FILE, mode, encoding="utf-8")
            self.mergers_f = open(self.dir / MERGERS_FILE, mode, encoding="utf-8")
        except OSError as exc:
            raise IoFailure(f"cannot open archive files in {self.dir}: {exc}") from exc
        self.book = MergerBookkeeper(config.index_bound)
        self.catalog = CycleCatalog()
        self.tallies = {"terminated": 0, "cycled": 0, "open": 0, "aborted": 0}
        self.committed = 0
        self.aborted_starts: list[int] = []

    def consume(self, record: SequenceRecord) -> None:
        self.records_f.write(record_to_line(record) + "\n")
        if record.status == ABORTED:
            self.tallies["aborted"] += 1
            self.aborted_starts.append(record.start)
            self.committed += 1
            return
        designation, event = self.book.commit(record)
        if event is not None:
            flag = "1" if event.clause_satisfied else "0"
            self.mergers_f.write(f"{format_junction(event)}\t{flag}\n")
        if record.status == CYCLED:
            self.catalog.tally(record, designation.is_main)
        self.tallies[record.status] += 1
        self.committed += 1

    def write_checkpoint(self) -> None:
        self.records_f.flush()
        self.mergers_f.flush()
        cp = Checkpoint(
            digest=self.config.digest(),
            config=self.config,
            last_committed=self.book.state()["last_committed"],
            committed=self.committed,
            records_offset=self.records_f.tell(),
            mergers_offset=self.mergers_f.tell(),
            tallies=dict(self.tallies),
            bookkeeper_state=self.book.state(),
            catalog_state=self.catalog.state(),
        )
        tmp = self.dir / (CHECKPOINT_FILE + ".tmp")
        with open(tmp, "wb") as f:
            pickle.dump(cp, f, protocol=pickle.HIGHEST_PROTOCOL)
        os.replace(tmp, self.dir / CHECKPOINT_FILE)

    def restore(self, cp: Checkpoint) -> None:
        self.records_f.truncate(cp.records_offset)
        self.records_f.seek(cp.records_offset)
        self.mergers_f.truncate(cp.mergers_offset)
        self.mergers_f.seek(cp.mergers_offset)
        self.book.restore(cp.bookkeeper_state)
        self.catalog.restore(cp.catalog_state)
        self.tallies = dict(cp.tallies)
        self.committed = cp.committed
        self.aborted_starts = []

    def finalize(self, wall_seconds: float) -> None:
        self.records_f.flush()
        self.mergers_f.flush()
        with open(self.dir / DESIGNATIONS_FILE, "w", encoding="utf-8") as f:
            for start in self.book.committed_starts():
                d = self.book.designation(start)
                count = self.book.merger_count(start) if d.is_main else 0
                f.write(f"{start}\t{int(d.is_main)}\t{d.main_root}\t{count}\n")
        with open(self.dir / CYCLES_FILE, "w", encoding="utf-8") as f:
            for row in self.catalog.rows():
                f.write(row + "\n")
        meta = {
            "config": self.config.meta_echo(),
            "digest": self.config.digest(),
            "counts": dict(self.tallies),
            "abort_count": self.tallies["aborted"],
            "aborted_starts": self.aborted_starts,
            "record_count": self.committed,
            "expected_records": self.config.expected_records(),
            "complete": True,
        }
        with open(self.dir / META_FILE, "w", encoding="utf-8") as f:
            json.dump(meta, f, sort_keys=True, indent=1)
            f.write("\n")
        with open(self.dir / LOG_FILE, "a", encoding="utf-8") as f:
            f.write(f"committed {self.committed} starts in {wall_seconds:.1f}s\n")

    def close(self) -> None:
        self.records_f.close()
        self.mergers_f.close()


def _drive(config: CampaignConfig, committer: _Committer, from_start: Optional[int]) -> bool:
    """Feed records to the committer; returns False when stop_after interrupted."""
    tasks = _chunk_tasks(config, from_start)
    next_checkpoint = config.checkpoint_every or None
    stop_at = config.stop_after

    def handle(chunk: list[SequenceRecord]) -> bool:
        nonlocal next_checkpoint
        for record in chunk:
            committer.consume(record)
            if next_checkpoint and committer.committed >= next_checkpoint:
                committer.write_checkpoint()
                next_checkpoint += config.checkpoint_every
            if stop_at is not None and committer.committed >= stop_at:
                return False
        return True

    if config.worker_count == 1:
        _init_worker(config.engine_config())
        for task in tasks:
            if not handle(_compute_chunk(task)):
                return False
    else:
        # fork so the parent's sigma table is shared copy-on-write
        ctx = get_context("fork")
        get_stepper(config.engine_config())
        with ctx.Pool(config.worker_count, _init_worker, (config.engine_config(),)) as pool:
            for chunk in pool.imap(_compute_chunk, tasks):
                if not handle(chunk):
                    pool.terminate()
                    return False
    return True


def run_campaign(config: CampaignConfig) -> Optional["RunArchive"]:
    """Run every start in the configured range; returns the finished archive.

    With stop_after set (testing hook) the run halts early after writing a
    checkpoint and returns None; resume() completes it.
    """
    t0 = time.monotonic()
    committer = _Committer(config, fresh=True)
    try:
        finished = _drive(config, committer, from_start=None)
        if not finished:
            committer.write_checkpoint()
            return None
        committer.finalize(time.monotonic() - t0)
    finally:
        committer.close()
    return RunArchive(config.output_dir)


def load_checkpoint(path: str | os.PathLike) -> Checkpoint:
    try:
        with open(path, "rb") as f:
            cp = pickle.load(f)
    except (OSError, pickle.UnpicklingError, EOFError, AttributeError) as exc:
        raise CorruptCheckpoint(f"cannot load checkpoint {path}: {exc}") from exc
    if not isinstance(cp, Checkpoint) or cp.digest != cp.config.digest():
        raise CorruptCheckpoint(f"checkpoint {path} is internally inconsistent")
    return cp


def resume(
    checkpoint_path: str | os.PathLike,
    config: Optional[CampaignConfig] = None,
    worker_count: Optional[int] = None,
) -> Optional["RunArchive"]:
    """Continue a campaign from a checkpoint; archive matches a one-shot run.

    A config passed in must agree with the checkpoint's digest (execution
    knobs such as worker_count may differ); otherwise DigestMismatch.
    """
    cp = load_checkpoint(checkpoint_path)
    if config is not None and config.digest() != cp.digest:
        raise DigestMismatch(
            f"checkpoint digest {cp.digest[:12]} does not match config {config.digest()[:12]}"
        )
    from dataclasses import replace

    # adopt execution knobs from the caller's config, but the archive being
    # completed is always the one holding the checkpoint
    cfg = replace(cp.config, stop_after=None) if config is None else config
    cfg = replace(cfg, output_dir=str(Path(checkpoint_path).parent))
    if worker_count is not None:
        cfg = _with_workers(cfg, worker_count)

    t0 = time.monotonic()
    committer = _Committer(cfg, fresh=False)
    try:
        committer.restore(cp)
        from_start = _next_start(cfg, cp)
        finished = True
        if from_start is not None:
            finished = _drive(cfg, committer, from_start=from_start)
        if not finished:
            committer.write_checkpoint()
            return None
        committer.finalize(time.monotonic() - t0)
    finally:
        committer.close()
    return RunArchive(cfg.output_dir)


def _next_start(config: CampaignConfig, cp: Checkpoint) -> Optional[int]:
    starts = list(config.starts())
    if cp.committed >= len(starts):
        return None
    return starts[cp.committed]


def _with_workers(config: CampaignConfig, workers: int) -> CampaignConfig:
    from dataclasses import replace

    return replace(config, worker_count=workers)


# ---------------------------------------------------------------------------
# archive access

class RunArchive:
    """Read access to a finished campaign directory."""

    def __init__(self, path: str | os.PathLike):
        self.path = Path(path)
        meta_path = self.path / META_FILE
        if not meta_path.exists():
            raise IoFailure(f"{self.path} is not a finished archive (missing {META_FILE})")
        with open(meta_path, encoding="utf-8") as f:
            self.meta = json.load(f)

    @property
    def digit_bound(self) -> int:
        return self.meta["config"]["digit_bound"]

    @property
    def counts(self) -> dict:
        return self.meta["counts"]

    @property
    def abort_count(self) -> int:
        return self.meta["abort_count"]

    @property
    def start_range(self) -> tuple[int, int]:
        return self.meta["config"]["start_lo"], self.meta["config"]["start_hi"]

    def iter_records(self) -> Iterator[ParsedRecord]:
        bound = self.digit_bound
        with open(self.path / RECORDS_FILE, encoding="utf-8") as f:
            for line in f:
                yield record_from_line(line, computed_bound=bound)

    def iter_events(self) -> Iterator[MergerEvent]:
        with open(self.path / MERGERS_FILE, encoding="utf-8") as f:
            for line in f:
                junction, flag = line.rstrip("\n").split("\t")
                merging, i, owner, j, value = parse_junction(junction)
                yield MergerEvent(merging, owner, value, i, j, flag == "1")

    def iter_designations(self) -> Iterator[tuple[int, bool, int, int]]:
        with open(self.path / DESIGNATIONS_FILE, encoding="utf-8") as f:
            for line in f:
                start, is_main, root, count = line.rstrip("\n").split("\t")
                yield int(start), is_main == "1", int(root), int(count)

    def load_catalog(self) -> list[CycleRecord]:
        rows = []
        with open(self.path / CYCLES_FILE, encoding="utf-8") as f:
            for line in f:
                rows.append(CycleCatalog.parse_row(line))
        return rows

    def file_digests(self) -> dict[str, str]:
        """sha256 of each deterministic archive file (run.log excluded)."""
        out = {}
        for name in (RECORDS_FILE, MERGERS_FILE, DESIGNATIONS_FILE, CYCLES_FILE, META_FILE):
            h = hashlib.sha256()
            with open(self.path / name, "rb") as f:
                for block in iter(lambda: f.read(1 << 20), b""):
                    h.update(block)
            out[name] = h.hexdigest()
        return out
