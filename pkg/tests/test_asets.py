import json

import pytest

from deltachain.asets import ASetFamily, asets_to_json, build_asets, validate
from deltachain.combinatorics import (
    MultiIndex,
    Partition,
    bell_number,
    enumerate_partitions,
)


def mi(s: str) -> MultiIndex:
    return MultiIndex.from_string(s)


def family_for(alpha: str, blocks: tuple[str, ...]) -> ASetFamily:
    fams = build_asets(mi(alpha))
    key = Partition(mi(alpha), tuple(mi(b) for b in blocks))
    return fams[key]


# -- construction ---------------------------------------------------------------

def test_families_for_the_square():
    fams = build_asets(mi("11"))
    assert len(fams) == 2

    whole = family_for("11", ("11",))
    assert whole.base_set == (mi("00"), mi("01"), mi("10"))
    assert whole.block_set(mi("11")) == (mi("11"),)

    pairs = family_for("11", ("10", "01"))
    assert pairs.base_set == (mi("00"),)
    assert pairs.block_set(mi("10")) == (mi("10"),)
    assert pairs.block_set(mi("01")) == (mi("01"),)


def test_family_keys_follow_the_partition_table():
    for alpha in ("11", "111", "1111"):
        fams = build_asets(mi(alpha))
        assert list(fams) == list(enumerate_partitions(mi(alpha)))


def test_known_family_of_the_cube():
    fam = family_for("111", ("100", "011"))
    assert fam.base_set == (mi("000"), mi("001"), mi("010"))
    assert fam.block_set(mi("100")) == (mi("100"),)
    assert fam.block_set(mi("011")) == (mi("011"),)


def test_family_counts_match_bell_numbers():
    for k in range(1, 7):
        fams = build_asets(MultiIndex.ones(k))
        assert len(fams) == bell_number(k)


def test_zero_target_family():
    fams = build_asets(mi("000"))
    assert len(fams) == 1
    (fam,) = fams.values()
    assert fam.base_set == (mi("000"),)
    assert fam.partition.blocks == ()


def test_sparse_support_families_embed_the_dense_ones():
    sparse = build_asets(mi("101"))
    dense = build_asets(mi("11"))
    assert len(sparse) == len(dense)
    positions = (0, 2)
    for (sp, sfam), (dp, dfam) in zip(sparse.items(), dense.items()):
        assert sp.blocks == tuple(b.embed(positions, 3) for b in dp.blocks)
        for skey, dkey in zip(sfam.keys(), dfam.keys()):
            assert sfam.sets[skey] == tuple(
                m.embed(positions, 3) for m in dfam.sets[dkey]
            )


# -- validation ------------------------------------------------------------------

def test_small_families_satisfy_every_condition():
    for alpha in ("1", "11", "111"):
        for fam in build_asets(mi(alpha)).values():
            report = validate(fam)
            assert report.ok, report.to_obj()


def test_validation_catches_an_injected_target():
    fam = family_for("11", ("10", "01"))
    broken = ASetFamily(fam.partition, dict(fam.sets))
    broken.sets[mi("00")] = (mi("00"), mi("11"))
    report = validate(broken)
    assert not report.ok
    by_name = {c.name: c for c in report.conditions}
    assert not by_name["base-extras"].ok
    assert "11" in by_name["base-extras"].offenders


def test_validation_catches_duplicates_across_sets():
    fam = family_for("11", ("10", "01"))
    broken = ASetFamily(fam.partition, dict(fam.sets))
    broken.sets[mi("10")] = (mi("10"), mi("01"))
    report = validate(broken)
    by_name = {c.name: c for c in report.conditions}
    assert not by_name["disjoint"].ok
    assert by_name["disjoint"].offenders == ("01",)


def test_validation_catches_a_missing_anchor():
    fam = family_for("11", ("10", "01"))
    broken = ASetFamily(fam.partition, dict(fam.sets))
    broken.sets[mi("10")] = ()
    report = validate(broken)
    by_name = {c.name: c for c in report.conditions}
    assert not by_name["anchored"].ok


def test_validation_catches_an_order_decrease():
    fam = family_for("111", ("110", "001"))
    broken = ASetFamily(fam.partition, dict(fam.sets))
    # put a first-order element into the set of the second-order block
    broken.sets[mi("110")] = (mi("110"), mi("100"))
    report = validate(broken)
    by_name = {c.name: c for c in report.conditions}
    assert not by_name["order-increase"].ok


def test_structural_conditions_hold_everywhere_small():
    """Disjointness, anchoring, and order increase hold for every family
    up to order six; the two order-bound conditions do not (see below)."""
    always = ("disjoint", "anchored", "order-increase")
    for k in range(1, 7):
        for fam in build_asets(MultiIndex.ones(k)).values():
            by_name = {c.name: c for c in validate(fam).conditions}
            for name in always:
                assert by_name[name].ok, (k, fam.partition, name)


def test_the_order_bound_conditions_fail_from_order_four():
    """The recursion provably violates the two maxord-bound conditions.

    First failing family: partition {1001, 0110} of 1111, reached from the
    parent partition {100, 011} of 111 by flipping the first block.  The
    base set picks up the parent's first-order extras with a digit
    appended (0011, 0101 — order 2, not < maxord 2), and the unflipped
    block's set picks up 0111 (order 3, not <= maxord 2).  The expansion
    identity itself is unaffected, which the numeric suites verify
    exactly; the bounds are a descriptive claim about the sets, not an
    ingredient of the formula's correctness.
    """
    fam = family_for("1111", ("1001", "0110"))
    assert fam.base_set == (
        mi("0000"),
        mi("0001"),
        mi("0010"),
        mi("0100"),
        mi("1000"),
        mi("0011"),
        mi("0101"),
    )
    assert fam.block_set(mi("0110")) == (mi("0110"), mi("0111"))

    by_name = {c.name: c for c in validate(fam).conditions}
    assert by_name["disjoint"].ok
    assert by_name["anchored"].ok
    assert by_name["order-increase"].ok
    assert not by_name["base-extras"].ok
    assert set(by_name["base-extras"].offenders) == {"0011", "0101"}
    assert not by_name["block-extras"].ok
    assert by_name["block-extras"].offenders == ("0110:0111",)


# -- serialization ----------------------------------------------------------------

def test_json_dump_is_deterministic_and_well_formed():
    a = asets_to_json(mi("111"))
    b = asets_to_json(mi("111"))
    assert a == b
    rows = json.loads(a)
    assert len(rows) == 5
    assert all(set(r) == {"partition", "sets", "valid"} for r in rows)
    assert all(r["valid"] for r in rows)


def test_json_dump_with_validation_details():
    rows = json.loads(asets_to_json(mi("1111"), include_validation=True))
    assert len(rows) == bell_number(4)
    flagged = [r for r in rows if not r["valid"]]
    assert flagged, "the order-bound violations must be reported"
    for r in flagged:
        bad = [
            name
            for name, c in r["conditions"].items()
            if not c["ok"]
        ]
        assert set(bad) <= {"base-extras", "block-extras"}
        for name in bad:
            assert r["conditions"][name]["offenders"]
