"""Shared fixtures.

The full-range campaign powering the acceptance suite takes a few minutes;
set ALIQUOT_ACCEPT_DIR to a writable directory to cache it between runs
(archives are keyed by config digest, so stale caches are never reused).
"""

import os
from pathlib import Path

import pytest

from aliquot.campaign import CampaignConfig, RunArchive, run_campaign

FULL_RANGE = (1, 10**6)
FULL_DIGITS = 10


def _cached_campaign(config: CampaignConfig) -> RunArchive:
    out = Path(config.output_dir)
    meta = out / "meta.json"
    if meta.exists():
        try:
            archive = RunArchive(out)
            if archive.meta.get("digest") == config.digest() and archive.meta.get("complete"):
                return archive
        except Exception:
            pass
    return run_campaign(config)


def _campaign_dir(tmp_path_factory, name: str) -> str:
    base = os.environ.get("ALIQUOT_ACCEPT_DIR")
    if base:
        d = Path(base) / name
        d.mkdir(parents=True, exist_ok=True)
        return str(d)
    return str(tmp_path_factory.mktemp(name))


@pytest.fixture(scope="session")
def full_archive(tmp_path_factory) -> RunArchive:
    """The d=10 campaign over every start below a million."""
    config = CampaignConfig(
        start_lo=FULL_RANGE[0],
        start_hi=FULL_RANGE[1],
        output_dir=_campaign_dir(tmp_path_factory, "full_d10"),
        digit_bound=FULL_DIGITS,
        worker_count=2,
        chunk_size=4096,
    )
    return _cached_campaign(config)


@pytest.fixture(scope="session")
def small_archive(tmp_path_factory) -> RunArchive:
    """A quick archive over starts 1..20000 at d=10 for report tests."""
    config = CampaignConfig(
        start_lo=1,
        start_hi=20000,
        output_dir=_campaign_dir(tmp_path_factory, "small_d10"),
        digit_bound=10,
    )
    return _cached_campaign(config)
