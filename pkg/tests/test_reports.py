"""Report generation over small and synthetic archives."""

import pytest

from aliquot.arithmetic import aliquot_brute
from aliquot.campaign import CampaignConfig, run_campaign
from aliquot.engine import OPEN, TERMINATED, EngineConfig, run_sequence
from aliquot.reports import (
    BoundExceeded,
    increasing_odd_runs,
    length_distribution,
    merger_histogram,
    metric_distribution,
    odd_open_entry_squares,
    parity_summary,
    penultimate_tally,
    profile_series,
    survival_table,
    even_open_decay,
    cycle_report,
)


class TestSurvival:
    def test_final_bound_matches_archive_counts(self, small_archive):
        row = survival_table(small_archive, [small_archive.digit_bound])[0]
        counts = small_archive.counts
        assert (row.terminating, row.cycling, row.open) == (
            counts["terminated"],
            counts["cycled"],
            counts["open"],
        )

    def test_monotone_in_d(self, small_archive):
        rows = survival_table(small_archive, list(range(4, 11)))
        for a, b in zip(rows, rows[1:]):
            assert a.open >= b.open
            assert a.terminating <= b.terminating
            assert a.cycling <= b.cycling

    def test_row_sums_constant(self, small_archive):
        rows = survival_table(small_archive, [4, 7, 10])
        sums = {r.terminating + r.cycling + r.open for r in rows}
        assert len(sums) == 1

    def test_bound_exceeded(self, small_archive):
        with pytest.raises(BoundExceeded):
            survival_table(small_archive, [11])

    def test_single_digit_range_by_hand(self, tmp_path):
        # starts 2..9 at d=2: the perfect number 6 cycles, everything else
        # terminates below 10 (checked against the brute oracle)
        config = CampaignConfig(
            start_lo=2, start_hi=10, output_dir=str(tmp_path / "tiny"), digit_bound=2
        )
        archive = run_campaign(config)
        row = survival_table(archive, [2])[0]
        statuses = []
        for n in range(2, 10):
            v, seen = n, {n}
            while True:
                v = aliquot_brute(v) if v > 1 else 1
                if v == 1:
                    statuses.append("T")
                    break
                if v in seen or v == n:
                    statuses.append("C")
                    break
                if v >= 10:
                    statuses.append("O")
                    break
                seen.add(v)
        assert row.terminating == statuses.count("T") == 7
        assert row.cycling == statuses.count("C") == 1
        assert row.open == statuses.count("O") == 0

    def test_even_decay_consistency(self, small_archive):
        decay = even_open_decay(small_archive, [6, 10], interval=5000)
        cells, total = decay[10]
        assert sum(cells) == total
        # decay is monotone: fewer even survivors at a larger bound
        assert decay[6][1] >= decay[10][1]


class TestParitySummary:
    def test_rows_add_up(self, small_archive):
        s = parity_summary(small_archive)
        for i in range(3):
            assert s.rows["odd"][i] + s.rows["even"][i] == s.rows["all"][i]
            assert s.rows["all-odd"][i] <= s.rows["odd"][i]

    def test_changeover_squares_are_odd_squares(self, small_archive):
        import math

        s = parity_summary(small_archive)
        assert s.changeover_total == sum(c for _, c in s.changeover_by_square)
        for sq, _ in s.changeover_by_square:
            assert sq % 2 == 1 and math.isqrt(sq) ** 2 == sq

    def test_all_odd_terminators_never_high(self, small_archive):
        for rec in small_archive.iter_records():
            if rec.parity_class == "all-odd":
                assert rec.max_value < 10**7


class TestDistributions:
    def test_length_histogram_totals(self, small_archive):
        hist = length_distribution(small_archive, "all-odd-terminating")
        summary = parity_summary(small_archive)
        assert hist.total() == summary.rows["all-odd"][0]

    def test_prime_lengths(self, small_archive):
        hist = length_distribution(small_archive, "all-odd-terminating")
        # length 1 row counts exactly the odd primes in range
        from aliquot.arithmetic import prime_sieve

        lo, hi = small_archive.start_range
        odd_primes = sum(1 for p in prime_sieve(hi - 1) if p % 2 and p >= lo)
        assert hist.count(1) == odd_primes

    def test_metric_histograms(self, small_archive):
        for metric in ("length", "height_bits", "volume"):
            hist = metric_distribution(small_archive, metric, "cycling")
            assert hist.total() == small_archive.counts["cycled"]

    def test_open_main_class(self, small_archive):
        hist = length_distribution(small_archive, "open-main")
        mains = {s for s, m, _, _ in small_archive.iter_designations() if m}
        opens = sum(
            1 for r in small_archive.iter_records() if r.status == OPEN and r.start in mains
        )
        assert hist.total() == opens


class TestPenultimate:
    def test_solitary_and_ordering(self, small_archive):
        tally = penultimate_tally(small_archive)
        counts = dict(tally.counts)
        assert tally.count(9173) == 1  # only 100771 reaches it below 20000
        assert 9173 in tally.solitary
        ordered = [c for _, c in tally.counts]
        assert ordered == sorted(ordered, reverse=True)
        assert sum(counts.values()) == sum(
            1
            for r in small_archive.iter_records()
            if r.status == TERMINATED and r.penultimate_prime
        )

    def test_prime_archive_counts_itself(self, tmp_path):
        config = CampaignConfig(
            start_lo=9173, start_hi=9174, output_dir=str(tmp_path / "p"), digit_bound=10
        )
        tally = penultimate_tally(run_campaign(config))
        assert tally.counts == ((9173, 1),)


class TestIncreasingRuns:
    def test_pairs_match_brute_force(self):
        runs = increasing_odd_runs(1000, 2)
        brute_pairs = set()
        for n in range(3, 1000, 2):
            prefix = [n]
            v = n
            while v != 1:
                v = aliquot_brute(v)
                if v % 2 == 0 or v in prefix:
                    break
                prefix.append(v)
            for a, b in zip(prefix, prefix[1:]):
                if a < b:
                    brute_pairs.add((a, b))
        assert set(runs) == brute_pairs
        assert (945, 975) in brute_pairs  # smallest odd abundant number

    def test_runs_are_increasing_and_odd(self):
        for run in increasing_odd_runs(20000, 3):
            assert all(v % 2 for v in run)
            assert all(a < b for a, b in zip(run, run[1:]))

    def test_limit_validation(self):
        with pytest.raises(Exception):
            increasing_odd_runs(2, 2)
        with pytest.raises(Exception):
            increasing_odd_runs(100, 1)


class TestMergerHistogram:
    def test_synthetic_chain(self, tmp_path):
        # 855855 terminates; 886545 merges into it
        config = CampaignConfig(
            start_lo=855855,
            start_hi=886546,
            output_dir=str(tmp_path / "m"),
            digit_bound=10,
        )
        archive = run_campaign(config)
        counts = {s: c for s, m, _, c in archive.iter_designations() if m}
        assert counts.get(855855, 0) >= 1  # 886545 merges into it
        roots = {s: r for s, _, r, _ in archive.iter_designations()}
        assert roots[886545] == 855855

    def test_no_merger_archive(self, tmp_path):
        config = CampaignConfig(
            start_lo=6, start_hi=7, output_dir=str(tmp_path / "n"), digit_bound=10
        )
        archive = run_campaign(config)
        hist = merger_histogram(archive, status_filter=None)
        assert hist.bins == ((0, 1),)

    def test_totals_match_designations(self, small_archive):
        hist = merger_histogram(small_archive, status_filter=None)
        mains = [c for _, m, _, c in small_archive.iter_designations() if m]
        assert sum(k * c for k, c in hist.bins) == sum(mains)
        assert sum(c for _, c in hist.bins) == len(mains)


class TestOddOpenSquares:
    def test_structure(self, small_archive):
        table = odd_open_entry_squares(small_archive)
        total = sum(c for _, c in table.odd_length_histogram)
        assert total == sum(t for _, t, _ in table.per_square)
        assert total == sum(t for _, _, t in table.per_main)
        for sq, times, root in table.per_square:
            assert sq % 2 == 1
            assert times >= 1

    def test_no_odd_opens(self, tmp_path):
        config = CampaignConfig(
            start_lo=2, start_hi=60, output_dir=str(tmp_path / "no"), digit_bound=10
        )
        table = odd_open_entry_squares(run_campaign(config))
        assert table.per_square == ()
        assert table.odd_length_histogram == ()


class TestProfileAndCycles:
    def test_profile_series(self):
        rec = run_sequence(100771, EngineConfig(digit_bound=10))
        assert profile_series(rec) == [(0, 6), (1, 4), (2, 1)]

    def test_profile_from_compressed(self):
        rec = run_sequence(855441, EngineConfig(digit_bound=10, keep_full_trajectory=False))
        series = profile_series(rec)
        assert len(series) == 69
        assert series[0] == (0, 6)
        assert max(d for _, d in series) == len(str(rec.max_value))

    def test_cycle_report_deterministic(self, small_archive):
        a = cycle_report(small_archive)
        b = cycle_report(small_archive)
        assert a == b
        keys = [c.members[0] for c in a]
        assert keys == sorted(keys)
