import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pcmkit.core import (
    TOP,
    LawCheck,
    LawReport,
    PcmStructure,
    PcmUsageError,
    SubjState,
    check_pcm_laws,
    is_separate,
    join,
    product,
    render_element,
    splits,
    star_split,
    subjective_states,
)
from pcmkit.instances import OWN, OWNBAR, SERVE, WAIT, FinMap, pcm_O, pcm_tickets


def test_O_join_table():
    O = pcm_O()
    assert join(O, OWN, OWNBAR) is OWN
    assert join(O, OWN, OWN) is TOP
    assert join(O, OWNBAR, OWNBAR) is OWNBAR
    for x in O:
        assert join(O, x, O.unit) is x


def test_is_separate():
    O = pcm_O()
    assert is_separate(O, OWN, OWNBAR)
    assert not is_separate(O, OWN, OWN)
    for y in O:
        assert not is_separate(O, TOP, y)
    U = pcm_tickets(2)
    assert not is_separate(U, FinMap({1: WAIT}), FinMap({1: SERVE}))


def test_out_of_carrier_is_usage_error():
    with pytest.raises(PcmUsageError):
        join(pcm_O(), OWN, "own")
    with pytest.raises(PcmUsageError):
        is_separate(pcm_tickets(2), FinMap({3: WAIT}), FinMap())


def test_product_is_pointwise_and_not_normal():
    OO = product(pcm_O(), pcm_O())
    assert OO.join((OWN, OWNBAR), (OWNBAR, OWNBAR)) == (OWN, OWNBAR)
    assert OO.unit == (OWNBAR, OWNBAR)
    assert not OO.is_defined((OWN, TOP))
    assert (OWN, TOP) != OO.top
    assert not OO.is_normal
    assert product(pcm_O(), pcm_O()) is OO


def test_defined_iff_separate_from_unit():
    for p in (pcm_O(), product(pcm_O(), pcm_O()), pcm_tickets(2)):
        for x in p:
            assert p.is_defined(x) == is_separate(p, x, p.unit)


def test_star_split_examples():
    O = pcm_O()
    pairs = star_split(O, SubjState(OWN, OWNBAR))
    assert (SubjState(OWN, OWNBAR), SubjState(OWNBAR, OWN)) in pairs
    s = SubjState(OWNBAR, OWN)
    assert (s, s) in star_split(O, s)


def test_star_split_reconstructs_parent():
    U = pcm_tickets(2)
    for s in subjective_states(U):
        for s1, s2 in star_split(U, s):
            assert U.join(s1.self, s2.self) == s.self
            assert s1.other == U.join(s2.self, s.other)
            assert s2.other == U.join(s1.self, s.other)


def test_splits_of_undefined_is_empty():
    assert splits(pcm_O(), TOP) == []


def test_check_pcm_laws_catches_broken_unit():
    def bad_join(x, y):
        if x is TOP or y is TOP or (x == "a" and y == "a"):
            return TOP
        if x == "e" and y == "a":
            return "e"
        return "a" if "a" in (x, y) else "e"

    p = PcmStructure("broken", ("e", "a", TOP), bad_join, "e", TOP, lambda x: x is not TOP)
    report = check_pcm_laws(p)
    assert report["unit"].status == "fail"
    assert report["unit"].witness == ("a",)
    assert report["top-absorbing"].passed


def test_absorbing_own_mutant_keeps_other_laws():
    def join_fn(x, y):
        if x is TOP or y is TOP:
            return TOP
        return OWN if OWN in (x, y) else OWNBAR

    p = PcmStructure("O-dup", (OWNBAR, OWN, TOP), join_fn, OWNBAR, TOP, lambda x: x is not TOP)
    report = check_pcm_laws(p)
    assert report.passed
    assert report["top-absorbing"].passed


def test_closure_failure_is_reported():
    p = PcmStructure("leaky", (0, 1, TOP), lambda x, y: 2 if (x, y) == (1, 1) else (TOP if TOP in (x, y) else max(x, y)), 0, TOP, lambda x: x is not TOP)
    report = check_pcm_laws(p)
    assert report["closure"].witness == (1, 1)
    assert len(report.checks) == 1


def test_duplicate_carrier_rejected():
    with pytest.raises(PcmUsageError):
        PcmStructure("dup", (0, 0, TOP), max, 0, TOP, lambda x: True)


def test_law_check_requires_witness_on_fail():
    with pytest.raises(PcmUsageError):
        LawCheck("x", "fail")


def test_report_json_shape():
    r = LawReport("demo")
    r.add("ok", None)
    r.add("bad", (FinMap({1: SERVE}), TOP, OWN))
    doc = json.loads(json.dumps(r.to_json(), ensure_ascii=False))
    assert doc["suite"] == "demo"
    assert doc["checks"][0] == {"law": "ok", "status": "pass"}
    assert doc["checks"][1]["witness"] == [["1↦serve"], "top", "own"]
    assert render_element((OWN, TOP)) == ["own", "top"]
    assert "[FAIL] bad" in r.to_text()


@given(st.sampled_from(pcm_tickets(2).elements), st.sampled_from(pcm_tickets(2).elements))
def test_separate_means_disjoint_domains(x, y):
    U = pcm_tickets(2)
    expected = x is not TOP and y is not TOP and not set(x) & set(y)
    assert is_separate(U, x, y) == expected


def test_join_table_matches_function():
    U = pcm_tickets(2)
    for i, x in enumerate(U):
        for j, y in enumerate(U):
            assert U.elements[U.table[i, j]] == U.raw_join(x, y)
    assert U.table.dtype == np.int32
