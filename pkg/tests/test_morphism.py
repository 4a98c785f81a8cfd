import pytest

from pcmkit.core import TOP, PcmUsageError
from pcmkit.instances import (
    OWN,
    OWNBAR,
    SERVE,
    USED,
    WAIT,
    FinMap,
    Op,
    morph_alpha,
    morph_count,
    morph_count_serve,
    morph_filter,
    morph_hist_own,
    morph_psi,
    morph_sigma,
    pcm_natmax,
    pcm_O,
    pcm_tickets,
    seprel_alpha,
    seprel_hist,
)
from pcmkit.morphism import (
    Morphism,
    apply,
    arrow_product,
    check_cancellative,
    check_category_laws,
    check_framing_lemmas,
    check_invertible_morph,
    check_morphism_laws,
    compose,
    const_unit,
    equalizer,
    find_split,
    identity,
    join_morphism,
    kernel,
    proj1,
    proj2,
    restrict,
    tensor,
)
from pcmkit.seprel import check_invertible_rel, check_seprel_laws, rel_trivial

F = FinMap
B = 3


def test_apply_examples():
    U = pcm_tickets(B)
    x = F({1: WAIT, 2: SERVE})
    assert apply(identity(U), x) == x
    assert apply(const_unit(pcm_O(), pcm_O()), OWN) is OWNBAR
    assert apply(join_morphism(pcm_O()), (OWN, OWNBAR)) is OWN
    with pytest.raises(PcmUsageError):
        apply(identity(U), F({9: WAIT}))


def test_constructions_evaluate():
    assert morph_count_serve(B)(F({1: SERVE, 2: WAIT})) == 1
    assert tensor(morph_sigma(B), morph_psi(B))(F()) == (F(), 1)
    a2 = arrow_product(morph_alpha(2), morph_alpha(2))
    assert a2((F({1: SERVE}), F())) == (OWN, OWNBAR)


def test_restrict():
    r = restrict(identity(pcm_tickets(B)), seprel_alpha(B))
    assert r(F({1: SERVE, 2: SERVE})) is TOP
    assert r(F()) == F()
    assert r(TOP) is TOP
    assert check_morphism_laws(r).passed


def test_kernel_and_equalizer():
    k = kernel(morph_alpha(B))
    assert k.holds(F({1: WAIT}), F({2: USED}))
    assert not k.holds(F({1: SERVE}), F())
    eq = equalizer(morph_alpha(B), const_unit(pcm_tickets(B), pcm_O()))
    assert eq.equals(k)
    assert check_seprel_laws(k).passed and check_seprel_laws(eq).passed


def test_carrier_mismatch():
    with pytest.raises(PcmUsageError):
        compose(morph_alpha(B), morph_alpha(B))
    with pytest.raises(PcmUsageError):
        tensor(morph_alpha(B), identity(pcm_O()))
    with pytest.raises(PcmUsageError):
        equalizer(morph_alpha(B), morph_psi(B))


@pytest.mark.parametrize(
    "make",
    [
        lambda: identity(pcm_tickets(B)),
        lambda: const_unit(pcm_tickets(B), pcm_O()),
        lambda: proj1(pcm_O(), pcm_O()),
        lambda: proj2(pcm_O(), pcm_O()),
        lambda: join_morphism(pcm_O()),
        lambda: morph_sigma(B),
        lambda: morph_psi(B),
        lambda: morph_filter(SERVE, B),
        lambda: morph_count(B),
        lambda: morph_count_serve(B),
        lambda: morph_alpha(B),
        lambda: morph_hist_own(B),
    ],
)
def test_morphism_laws(make):
    report = check_morphism_laws(make())
    assert report.passed, report.to_text()


def test_psi_is_max_homomorphism():
    psi, U = morph_psi(B), pcm_tickets(B)
    for x in U.defined_elements:
        for y in U.defined_elements:
            if U.is_defined(U.join(x, y)):
                assert psi(U.join(x, y)) == max(psi(x), psi(y))


def test_alpha_with_trivial_relation_fails_distributivity():
    a = morph_alpha(B)
    bad = Morphism(a.source, a.target, a._fn, rel_trivial(a.source), "α/trivial")
    report = check_morphism_laws(bad)
    assert report.failed() == ["distributivity"]
    x, y = report["distributivity"].witness
    assert len(x) == len(y) == 1
    assert list(x.values()) == list(y.values()) == [SERVE]


def test_closure_violation_reported():
    m = Morphism(pcm_O(), pcm_natmax(2), lambda x: 7, name="escape")
    report = check_morphism_laws(m)
    assert report["closure"].status == "fail"


def test_invertible_morphisms():
    for m in (morph_alpha(B), morph_hist_own(B)):
        assert check_invertible_morph(m).passed


def test_invertibility_closed_under_compose_and_arrow():
    assert check_invertible_morph(compose(morph_alpha(B), morph_sigma(B))).passed
    assert check_invertible_morph(arrow_product(identity(pcm_O()), morph_alpha(B))).passed
    assert check_invertible_morph(arrow_product(morph_alpha(2), morph_alpha(2))).passed


def test_tensor_is_not_invertible():
    report = check_invertible_morph(tensor(identity(pcm_O()), identity(pcm_O())))
    assert report["seprel:invertibility"].passed
    a, b1, b2 = report["split-realisation"].witness
    assert a is OWN and {b1, b2} == {(OWN, OWNBAR), (OWNBAR, OWN)}
    assert not check_invertible_morph(tensor(morph_alpha(B), morph_alpha(B))).passed


def test_find_split():
    a = F({1: SERVE, 2: WAIT})
    a1, a2 = find_split(morph_alpha(B), a, OWNBAR, OWN)
    assert morph_alpha(B)(a1) is OWNBAR and morph_alpha(B)(a2) is OWN
    assert pcm_tickets(B).join(a1, a2) == a
    assert find_split(morph_alpha(B), F(), OWN, OWNBAR) is None


def test_cancellativity():
    assert check_cancellative(pcm_O()).passed
    assert check_cancellative(pcm_tickets(B)).passed
    report = check_cancellative(pcm_natmax(5))
    a, b, c = report["cancellativity"].witness
    assert b != c and max(a, b) == max(a, c)
    N = pcm_natmax(5)
    assert N.join(3, 2) == N.join(3, 1)


def test_equalizer_invertible_over_cancellative_target():
    eq = equalizer(morph_alpha(B), const_unit(pcm_tickets(B), pcm_O()))
    assert check_invertible_rel(eq).passed


def _diagonal_mutant(n=3):
    N = pcm_natmax(n)
    diag = equalizer(proj1(N, N), proj2(N, N))
    return diag, restrict(proj1(N, N), diag)


def test_framing_lemmas():
    assert check_framing_lemmas(rel_trivial(pcm_O()), identity(pcm_O())).passed
    assert check_framing_lemmas(seprel_alpha(2), morph_alpha(2)).passed
    assert check_framing_lemmas(seprel_hist(2), morph_hist_own(2)).passed


def test_framing_mutant_fails_reverse_direction():
    diag, m = _diagonal_mutant()
    assert check_morphism_laws(m).passed
    assert not check_invertible_rel(diag).passed
    report = check_framing_lemmas(diag, m)
    assert report["split-frame ⇒"].passed
    assert not report["split-frame ⇐"].passed
    assert not report["duplicable ⇐"].passed


def test_framing_needs_one_carrier():
    with pytest.raises(PcmUsageError):
        check_framing_lemmas(seprel_alpha(2), morph_hist_own(2))


def test_category_laws():
    ms = [identity(pcm_tickets(B)), morph_filter(SERVE, B), morph_count(B), morph_psi(B)]
    report = check_category_laws(ms)
    assert report.passed, report.to_text()
    assert report.stats["composable triples"] > 0
    lhs = compose(compose(morph_count(B), morph_filter(SERVE, B)), identity(pcm_tickets(B)))
    rhs = compose(morph_count(B), compose(morph_filter(SERVE, B), identity(pcm_tickets(B))))
    assert lhs.same_as(rhs)


def test_history_ownership():
    w = morph_hist_own(B)
    assert w(F()) is OWNBAR
    assert w(F({1: Op.L})) is OWN
    assert w(F({1: Op.L, 2: Op.U})) is OWNBAR
    assert w(TOP) is TOP
