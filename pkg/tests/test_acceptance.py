"""One test per acceptance criterion; each records PASS/FAIL for the summary block."""
import time

from pcmkit.core import check_pcm_laws, product
from pcmkit.instances import (
    SERVE,
    USED,
    WAIT,
    count_serve,
    morph_alpha,
    morph_count,
    morph_count_serve,
    morph_filter,
    morph_hist_own,
    morph_psi,
    morph_sigma,
    pcm_hist,
    pcm_natmax,
    pcm_O,
    pcm_tickets,
    rel_ordered,
    rel_upsilon,
    seprel_alpha,
    seprel_hist,
)
from pcmkit.morphism import (
    Morphism,
    arrow_product,
    check_cancellative,
    check_framing_lemmas,
    check_invertible_morph,
    check_morphism_laws,
    compose,
    const_unit,
    equalizer,
    identity,
    join_morphism,
    kernel,
    proj1,
    proj2,
    restrict,
    tensor,
)
from pcmkit.seprel import check_invertible_rel, check_seprel_laws, rel_intersect, rel_join, rel_trivial, rel_unit
from pcmkit.subpcm import check_inject_invertibility, check_separateness_matches, check_subpcm_axioms, quotient
from pcmkit.ticketlock import (
    check_rebased_exploration,
    check_simulation_to_quotient,
    check_stability,
    check_statespace_preservation,
    replay,
    resource_TL,
    run_lock,
    thread_program,
)

def _failed(reports):
    return [f"{r.suite}: {law}" for r in reports for law in r.failed()]

def test_criterion_1_pcm_laws(acceptance):
    start = time.perf_counter()
    oxo = product(pcm_O(), pcm_O())
    reports = [check_pcm_laws(p) for p in (pcm_O(), pcm_natmax(5), pcm_tickets(3), pcm_hist(3), oxo)]
    elapsed = time.perf_counter() - start
    bad = _failed(reports)
    ok = not bad and reports[-1].stats["normal"] is False and elapsed < 60
    acceptance(1, ok, f"5 suites, O×O non-normal detected, {elapsed:.2f}s" if ok else f"{bad} {elapsed:.2f}s")
    assert ok

def test_criterion_2_seprels(acceptance):
    B = 3
    t = pcm_tickets(B)
    rels = [
        rel_unit(t),
        rel_trivial(t),
        rel_intersect(seprel_alpha(B), rel_ordered(B)),
        rel_join(pcm_O()),
        seprel_alpha(B),
        seprel_hist(B),
        rel_ordered(B),
        kernel(morph_alpha(B)),
        equalizer(morph_alpha(B), const_unit(t, pcm_O())),
    ]
    reports = [check_seprel_laws(r) for r in rels]
    bad = _failed(reports)
    closure_ok = all(r["unit-closure"].passed for r in reports)
    ups = check_seprel_laws(rel_upsilon(B))
    domains = [set(x) for x in ups["associativity"].witness]
    ups_ok = ups.failed() == ["associativity"] and domains == [{2}, {1}, {3}]
    ok = not bad and closure_ok and ups_ok
    acceptance(2, ok, f"{len(rels)} seprels pass, υ fails associativity at domains {domains}" if ok else str(bad))
    assert ok

def test_criterion_3_morphisms(acceptance):
    B = 3
    t, o = pcm_tickets(B), pcm_O()
    ms = [
        identity(t),
        const_unit(t, o),
        proj1(o, o),
        proj2(o, o),
        join_morphism(o),
        morph_sigma(B),
        morph_psi(B),
        *(morph_filter(lab, B) for lab in (WAIT, SERVE, USED)),
        morph_count(B),
        morph_count_serve(B),
        morph_alpha(B),
        morph_hist_own(B),
    ]
    bad = _failed([check_morphism_laws(m) for m in ms])
    alpha = morph_alpha(B)
    mistyped = Morphism.from_images(t, o, alpha.images, rel_trivial(t), "α")
    report = check_morphism_laws(mistyped)
    witness = report["distributivity"].witness
    serves = [count_serve(x) for x in witness]
    mut_ok = report.failed() == ["distributivity"] and serves == [1, 1]
    ok = not bad and mut_ok
    acceptance(3, ok, f"{len(ms)} morphisms pass, mistyped α fails distributivity at {witness}" if ok else str(bad))
    assert ok

def test_criterion_4_invertibility(acceptance):
    B = 3
    t, o = pcm_tickets(B), pcm_O()
    rel_reports = [check_invertible_rel(r) for r in (rel_trivial(t), seprel_alpha(B), seprel_hist(B))]
    w = quotient(t, seprel_alpha(B))
    morph_reports = [
        check_invertible_morph(morph_alpha(B)),
        check_invertible_morph(morph_hist_own(B)),
        check_inject_invertibility(morph_alpha(B), w),
        check_invertible_morph(compose(morph_alpha(B), morph_sigma(B))),
        check_invertible_morph(arrow_product(identity(o), morph_alpha(B))),
    ]
    bad = _failed(rel_reports + morph_reports)
    tens = check_invertible_morph(tensor(identity(o), identity(o)))
    eq = check_invertible_rel(equalizer(identity(o), const_unit(o, o)))
    canc_o = check_cancellative(o)
    canc_n = check_cancellative(pcm_natmax(5))
    cw = canc_n["cancellativity"].witness
    ok = not bad and not tens.passed and eq.passed and canc_o.passed and not canc_n.passed and cw is not None
    detail = f"tensor fails at {tens['split-realisation'].witness}, natmax cancellativity witness {cw}"
    acceptance(4, ok, detail if ok else str(bad))
    assert ok

def test_criterion_5_quotient(acceptance):
    B = 3
    r = seprel_alpha(B)
    w = quotient(pcm_tickets(B), r)
    axioms = check_subpcm_axioms(w)
    sep = check_separateness_matches(w, r)
    oxo = product(pcm_O(), pcm_O())
    wo = quotient(oxo, rel_trivial(oxo))
    ok = axioms.passed and sep.passed and w.sub.is_normal and wo.sub.is_normal and check_subpcm_axioms(wo).passed
    acceptance(5, ok, f"U/⊥α has {len(w.sub)} elements, normal, ⊥ = ⊥α; O×O/trivial normal" if ok else str(axioms.failed() + sep.failed()))
    assert ok

def test_criterion_6_framing(acceptance):
    report = check_framing_lemmas(seprel_alpha(2), morph_alpha(2))
    n = pcm_natmax(2)
    mutant = restrict(proj1(n, n), equalizer(proj1(n, n), proj2(n, n)))
    mreport = check_framing_lemmas(mutant.seprel, mutant)
    mfailed = set(mreport.failed())
    ok = report.passed and {"duplicable ⇐", "split-frame ⇐"} <= mfailed and not mfailed & {"duplicable ⇒", "split-frame ⇒"}
    acceptance(6, ok, f"α at tickets(2) passes, mutant fails {sorted(mfailed)}" if ok else str(report.failed()))
    assert ok

def test_criterion_7_ticket_lock(acceptance):
    start = time.perf_counter()
    result = run_lock(2, 1, 4)
    elapsed = time.perf_counter() - start
    mutant = run_lock(2, 1, 4, mutate="lock", checks=["mutex"])
    configs = replay(resource_TL(4, "lock"), [thread_program(1, mutant=True)] * 2, mutant.trace)
    replay_ok = sum(count_serve(ts.self) for ts in configs[-1]) > 1
    res = resource_TL(4)
    props = [check_stability(res), check_statespace_preservation(res)]
    bad = _failed(props)
    ok = result.passed and elapsed < 10 and mutant.check == "mutex" and replay_ok and not bad
    detail = f"{result.states} states in {elapsed:.2f}s, mutant violates mutex after {len(mutant.trace) - 1} steps"
    acceptance(7, ok, detail if ok else f"{result.status} {result.check} {result.detail} {bad}")
    assert ok

def test_criterion_8_simulation(acceptance):
    sim = check_simulation_to_quotient(resource_TL(3))
    rebased = check_rebased_exploration(2, 1, 3)
    ok = sim.passed and rebased.passed
    acceptance(8, ok, "each transition preserves ⊥α at B=3, rebased α′-abstractions identical" if ok else str(sim.failed() + rebased.failed()))
    assert ok
