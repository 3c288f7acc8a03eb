"""Cycle canonicalization, verification, and entry tallies."""

import pytest

from aliquot.cycles import (
    CycleCatalog,
    NotACycle,
    canonicalize,
    cycle_kind,
    format_members,
    parse_members,
    verify_cycle,
)
from aliquot.engine import EngineConfig, run_sequence

from paper_data import (
    AMICABLE_PAIRS,
    CYCLE_4A,
    CYCLE_4B,
    CYCLE_5,
    CYCLE_28,
    PERFECT_NUMBERS,
)

D10 = EngineConfig(digit_bound=10)


class TestVerify:
    def test_perfect(self):
        assert verify_cycle([6])
        assert verify_cycle([8128])

    def test_five_cycle(self):
        assert verify_cycle(CYCLE_5)

    def test_four_cycles(self):
        assert verify_cycle(CYCLE_4A)
        assert verify_cycle(CYCLE_4B)

    def test_c28(self):
        assert verify_cycle(CYCLE_28)

    def test_rejects_non_cycle(self):
        assert not verify_cycle([220, 285])
        assert not verify_cycle([12])
        assert not verify_cycle([])

    def test_rotation_invariant(self):
        assert verify_cycle([284, 220])


class TestCanonicalize:
    def test_rotates_to_minimum(self):
        assert canonicalize([284, 220]) == (220, 284)

    def test_five_cycle_rotation(self):
        rotated = CYCLE_5[2:] + CYCLE_5[:2]
        assert canonicalize(rotated) == tuple(CYCLE_5)

    def test_singleton(self):
        assert canonicalize([6]) == (6,)

    def test_rejects_non_cycle(self):
        with pytest.raises(NotACycle):
            canonicalize([220, 284, 220])
        with pytest.raises(NotACycle):
            canonicalize([10, 12])


class TestKind:
    def test_kinds(self):
        assert cycle_kind(1) == "perfect"
        assert cycle_kind(2) == "amicable"
        assert cycle_kind(5) == "sociable"


class TestMemberFormat:
    def test_paper_style(self):
        assert format_members((220, 284)) == "[ 220, 284 ]"

    def test_round_trip(self):
        for members in ((6,), (220, 284), tuple(CYCLE_5)):
            assert parse_members(format_members(members)) == members


class TestTally:
    def test_pair_member_entering_own_cycle(self):
        catalog = CycleCatalog()
        rec = run_sequence(220, D10)
        out = catalog.tally(rec, is_main=True)
        assert out.members == (220, 284)
        assert out.total == 1
        assert out.hit_counts == [1, 0]
        assert out.kind == "amicable"

    def test_entry_member_is_first_cycle_value(self):
        catalog = CycleCatalog()
        rec = run_sequence(783225, EngineConfig(digit_bound=15))
        out = catalog.tally(rec, is_main=True)
        assert out.members == (1184, 1210)
        assert out.hit_counts == [1, 0]  # entered at 1184

    def test_counts_accumulate(self):
        catalog = CycleCatalog()
        for start, main in ((220, True), (284, False), (562, False)):
            catalog.tally(run_sequence(start, D10), is_main=main)
        rec = catalog.get(220)
        assert rec.total == 3
        assert rec.main_count == 1
        assert rec.even_count == 3
        assert sum(rec.hit_counts) == rec.total

    def test_rejects_non_cycler(self):
        catalog = CycleCatalog()
        with pytest.raises(Exception):
            catalog.tally(run_sequence(12, D10), is_main=True)

    def test_row_round_trip(self):
        catalog = CycleCatalog()
        catalog.tally(run_sequence(6, D10), is_main=True)
        catalog.tally(run_sequence(25, D10), is_main=True)  # 25 -> 6
        rows = list(catalog.rows())
        parsed = CycleCatalog.parse_row(rows[0])
        assert parsed.members == (6,)
        assert parsed.total == 2
        assert parsed.main_count == 2
        assert parsed.even_count == 1  # only the start 6 itself is even
        assert parsed.hit_counts == [2]


class TestPaperCatalog:
    def test_all_48_amicable_pairs_verify(self):
        for pair in AMICABLE_PAIRS:
            assert verify_cycle(pair), pair
            assert canonicalize(pair) == pair

    def test_perfect_numbers_verify(self):
        for p in PERFECT_NUMBERS:
            assert verify_cycle([p]), p
