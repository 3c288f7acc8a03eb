"""Engine tests: iteration, stop rules, metrics, parity, serialization."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aliquot.arithmetic import InvalidInput, aliquot_brute
from aliquot.engine import (
    ABORTED,
    ALL_ODD,
    CYCLED,
    EVEN_START,
    ODD_TO_EVEN,
    OPEN,
    TERMINATED,
    EngineConfig,
    classify_at,
    compute_metrics,
    detect_cycle,
    parity_profile,
    record_from_line,
    record_to_line,
    run_sequence,
)

from paper_data import SEQ_681831, SEQ_855441, SEQ_886545, SEQ_966195

D10 = EngineConfig(digit_bound=10)
D15 = EngineConfig(digit_bound=15)


class TestRunSequence:
    def test_terminator_100771(self):
        rec = run_sequence(100771, D10)
        assert rec.trajectory == (100771, 9173, 1)
        assert rec.status == TERMINATED
        assert rec.length == 2
        assert rec.penultimate_prime == 9173

    def test_longest_all_odd_terminator(self):
        rec = run_sequence(966195, D10)
        assert rec.trajectory == SEQ_966195
        assert rec.status == TERMINATED
        assert rec.length == 23
        assert rec.parity_class == ALL_ODD

    def test_perfect_number(self):
        rec = run_sequence(6, D10)
        assert rec.status == CYCLED
        assert (rec.preperiod, rec.period) == (0, 1)
        assert rec.length == 0
        assert rec.trajectory == (6,)

    def test_cycler_783225(self):
        rec = run_sequence(783225, D15)
        assert rec.status == CYCLED
        assert (rec.preperiod, rec.period) == (47, 2)
        assert rec.length == 48
        assert rec.max_value == 783225
        assert rec.max_index == 0
        assert rec.cycle_members == (1184, 1210)

    def test_cycle_entry_through_square_681831(self):
        rec = run_sequence(681831, D10)
        assert rec.trajectory == SEQ_681831
        assert rec.status == CYCLED
        assert rec.cycle_members == (6,)
        assert rec.parity_class == ODD_TO_EVEN
        assert rec.changeover_square == 328329  # 573^2
        assert rec.changeover_index == 1

    def test_merged_maximum_height_chain(self):
        rec = run_sequence(886545, D10)
        assert rec.trajectory == SEQ_886545
        assert rec.length == 6
        assert rec.parity_class == ALL_ODD

    def test_start_one(self):
        rec = run_sequence(1, D10)
        assert rec.status == TERMINATED
        assert rec.length == 0
        assert rec.penultimate_prime is None
        assert rec.trajectory == (1,)
        assert rec.parity_class == ALL_ODD

    def test_prime_start(self):
        rec = run_sequence(9173, D10)
        assert rec.trajectory == (9173, 1)
        assert rec.length == 1
        assert rec.penultimate_prime == 9173

    def test_open_sequence(self):
        rec = run_sequence(276, EngineConfig(digit_bound=4))
        assert rec.status == OPEN
        assert rec.trajectory[-1] >= 10**3
        assert all(v < 10**3 for v in rec.trajectory[:-1])
        assert rec.length == len(rec.trajectory) - 1

    def test_start_at_bound_is_open(self):
        rec = run_sequence(966195, EngineConfig(digit_bound=6))
        assert rec.status == OPEN
        assert rec.trajectory == (966195,)
        assert rec.length == 0

    def test_rejects_zero(self):
        with pytest.raises(InvalidInput):
            run_sequence(0, D10)

    def test_aborted_is_data(self):
        from aliquot.arithmetic import FactorBudget

        cfg = EngineConfig(
            digit_bound=40,
            budget=FactorBudget(trial_division_bound=100, rho_iteration_cap=1, max_digits=120),
            sieve_limit=1000,
        )
        start = 1000003 * 1000033  # semiprime out of reach of that budget
        rec = run_sequence(start, cfg)
        assert rec.status == ABORTED
        assert rec.failed_value == start
        assert rec.trajectory == (start,)
        assert rec.length == 0

    def test_step_consistency_small(self):
        for start in (12, 842, 100771, 1578):
            rec = run_sequence(start, D10)
            for a, b in zip(rec.trajectory, rec.trajectory[1:]):
                if 2 <= a <= 10**7:
                    assert aliquot_brute(a) == b

    def test_compressed_record(self):
        cfg = EngineConfig(digit_bound=10, keep_full_trajectory=False)
        rec = run_sequence(855441, cfg)
        assert rec.trajectory is None
        assert len(rec.digit_profile) == 69
        assert rec.digit_profile[0] == 6
        assert rec.last_values == (63, 41, 1)
        assert rec.length == 68


class TestDetectCycle:
    def test_fixed_point(self):
        assert detect_cycle([6, 6]) == (0, 1)

    def test_amicable(self):
        assert detect_cycle([220, 284, 220]) == (0, 2)

    def test_none(self):
        assert detect_cycle([5, 7, 9]) is None
        assert detect_cycle([]) is None

    def test_preperiod(self):
        assert detect_cycle([9, 4, 7, 4, 7]) == (1, 2)

    def test_prefers_smallest_preperiod(self):
        # 5 recurs from index 0 even though 7's repeat is seen first
        assert detect_cycle([5, 7, 7, 5]) == (0, 3)

    def test_matches_engine_on_783225(self):
        rec = run_sequence(783225, D15)
        traj = list(rec.trajectory) + [rec.trajectory[rec.preperiod]]
        assert detect_cycle(traj) == (47, 2)

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.integers(min_value=0, max_value=30), min_size=0, max_size=40))
    def test_reports_a_true_repeat(self, xs):
        res = detect_cycle(xs)
        if res is None:
            assert len(set(xs)) == len(xs)
        else:
            k0, c = res
            assert c > 0
            assert xs[k0 + c] == xs[k0]
            # minimality of the preperiod: nothing before k0 ever recurs
            for i in range(k0):
                assert xs[i] not in xs[i + 1 :]
            # minimality of the period for this preperiod
            assert xs[k0] not in xs[k0 + 1 : k0 + c]


class TestComputeMetrics:
    def test_trivial(self):
        m = compute_metrics([1])
        assert m.length == 0
        assert m.volume == 0.0
        assert m.height_digits == 0.0

    def test_855441_metrics(self):
        m = compute_metrics(SEQ_855441)
        assert m.length == 68
        assert abs(m.height_digits - 5.932) < 0.001
        assert abs(m.volume - 267.309) < 0.001

    def test_966195_volume(self):
        m = compute_metrics(SEQ_966195)
        assert abs(m.volume - 88.8379) < 0.001

    def test_max_index_is_first_attainment(self):
        m = compute_metrics([3, 9, 2, 9, 1])
        assert m.max_value == 9
        assert m.max_index == 1

    def test_height_bits(self):
        m = compute_metrics([1024, 7])
        assert m.height_bits == 11

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.integers(min_value=1, max_value=10**9), min_size=1, max_size=50))
    def test_volume_dominates_height(self, xs):
        m = compute_metrics(xs)
        assert m.volume >= m.height_digits - 1e-9
        assert m.volume == pytest.approx(math.fsum(math.log10(x) for x in xs))


class TestParityAndClassify:
    def test_even_start(self):
        assert run_sequence(48, D10).parity_class == EVEN_START

    def test_parity_profile_matches_field(self):
        for start in (1, 9, 48, 100771, 681831, 966195):
            rec = run_sequence(start, D10)
            assert parity_profile(rec) == rec.parity_class

    def test_square_start_changeover(self):
        rec = run_sequence(9, D10)  # 9 -> 4 -> 3 -> 1
        assert rec.parity_class == ODD_TO_EVEN
        assert rec.changeover_square == 9
        assert rec.changeover_index == 0

    def test_changeover_square_is_odd_square(self):
        for start in range(3, 4000, 2):
            rec = run_sequence(start, D10)
            if rec.parity_class == ODD_TO_EVEN:
                sq = rec.changeover_square
                assert sq % 2 == 1
                assert math.isqrt(sq) ** 2 == sq

    def test_classify_at_monotone(self):
        rec = run_sequence(966195, D10)
        assert classify_at(rec, 7) == TERMINATED
        assert classify_at(rec, 6) == OPEN
        assert classify_at(rec, 2) == OPEN

    def test_classify_at_cycle(self):
        rec = run_sequence(6, D10)
        for d in range(2, 11):
            assert classify_at(rec, d) == CYCLED

    def test_classify_at_rejects_larger_bound(self):
        rec = run_sequence(6, D10)
        with pytest.raises(InvalidInput):
            classify_at(rec, 11)


class TestRecordLines:
    def test_round_trip(self):
        for start in (1, 6, 9, 28, 100771, 220, 681831, 966195):
            rec = run_sequence(start, D10)
            line = record_to_line(rec)
            parsed = record_from_line(line, computed_bound=10)
            assert parsed.start == rec.start
            assert parsed.status == rec.status
            assert parsed.length == rec.length
            assert parsed.max_value == rec.max_value
            assert parsed.max_index == rec.max_index
            assert parsed.parity_class == rec.parity_class
            assert parsed.changeover_square == rec.changeover_square
            assert parsed.penultimate_prime == rec.penultimate_prime
            assert parsed.preperiod == rec.preperiod
            assert parsed.period == rec.period
            assert parsed.cycle_min == rec.cycle_min
            assert parsed.height_bits == rec.height_bits
            assert parsed.volume == pytest.approx(rec.volume, abs=0.001)

    def test_line_format_stable(self):
        rec = run_sequence(100771, D10)
        line = record_to_line(rec)
        assert line == "100771\tT\t2\t5.0033\t17\t8.966\tA\t9173\t100771\t0"
