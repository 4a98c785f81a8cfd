"""Quotients U/R of a PCM by a separating relation, and the sub-PCM axioms."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import LawReport, PcmStructure, PcmUsageError, check_pcm_laws, first_true
from .morphism import Morphism, check_invertible_morph, check_morphism_laws, compose, identity
from .seprel import SepRel, check_seprel_laws, rel_trivial


@dataclass(frozen=True)
class SubPcmWitness:
    sub: PcmStructure
    super: PcmStructure
    inject: Morphism
    retract: Morphism


def quotient(p: PcmStructure, r: SepRel) -> SubPcmWitness:
    """Restrict the join of ``p`` to R-related pairs.

    The carrier keeps the elements related to the unit, plus ⊤; every
    other element of ``p`` collapses onto ⊤ under the retraction.
    """
    if r.base != p:
        raise PcmUsageError(f"relation {r.name} is not over {p.name}")
    laws = check_seprel_laws(r)
    if not laws.passed:
        raise PcmUsageError(f"{r.name} is not a separating relation (fails {', '.join(laws.failed())})")

    R, T = r.matrix, p.table
    keep = R[:, p.unit_index]
    kept = [e for e, k in zip(p.elements, keep) if k]
    elements = (*kept, p.top)
    top = p.top

    def join(x, y):
        if x == top or y == top:
            return top
        i, j = p.index(x), p.index(y)
        return p.elements[T[i, j]] if R[i, j] else top

    sub = PcmStructure(f"{p.name}/{r.name}", elements, join, p.unit, top, lambda z: z != top)
    inject = Morphism(sub, p, lambda x: x, rel_trivial(sub), "ι")
    retract_img = np.array([sub.index(e) if k else sub.top_index for e, k in zip(p.elements, keep)])
    retract = Morphism.from_images(p, sub, retract_img, r, "ρ")
    return SubPcmWitness(sub, p, inject, retract)


def identity_witness(p: PcmStructure) -> SubPcmWitness:
    """``p`` as a sub-PCM of itself."""
    i = identity(p)
    inject = Morphism.from_images(p, p, i.images, rel_trivial(p), "ι")
    retract = Morphism.from_images(p, p, i.images, rel_trivial(p), "ρ")
    return SubPcmWitness(p, p, inject, retract)


def check_subpcm_axioms(w: SubPcmWitness) -> LawReport:
    sub, sup = w.sub, w.super
    inj, ret = w.inject, w.retract
    report = LawReport(f"sub-pcm axioms: {sub.name} ⊆ {sup.name}")
    report.extend(check_pcm_laws(sub), prefix="sub:")
    report.extend(check_morphism_laws(inj), prefix="inject:")
    report.extend(check_morphism_laws(ret), prefix="retract:")
    if any(c.law.endswith(":closure") and not c.passed for c in report.checks):
        return report

    ii, ri = inj.images, ret.images
    n_sub = len(sub)
    u_sub, u_sup = sub.unit_index, sup.unit_index
    Rret = ret.seprel.matrix

    bad = np.flatnonzero(ri[ii] != np.arange(n_sub))
    report.add("retract∘inject = id", (sub.elements[bad[0]],) if bad.size else None)

    round_trip = Rret[:, u_sup] & (ii[ri] != np.arange(len(sup)))
    idx = first_true(round_trip)
    report.add("inject∘retract = id on ρ-defined", None if idx is None else (sup.elements[idx[0]],))

    sep_sub = sub.defined_mask[sub.table]
    images_sep = sep_sub[ri[:, None], ri[None, :]]
    idx = first_true(images_sep & ~Rret)
    report.add("separate images ⇒ ρ-related", None if idx is None else (sup.elements[idx[0]], sup.elements[idx[1]]))

    sup_sep_unit = sup.defined_mask[sup.table[ii, u_sup]]
    sub_sep_unit = sub.defined_mask[sub.table[:, u_sub]]
    bad = np.flatnonzero(sup_sep_unit & ~sub_sep_unit)
    report.add("injected defined ⇒ defined", (sub.elements[bad[0]],) if bad.size else None)
    report.stats["sub elements"] = n_sub
    report.stats["sub normal"] = sub.is_normal
    return report


def check_separateness_matches(w: SubPcmWitness, r: SepRel) -> LawReport:
    """On the sub-PCM carrier, x ⊥ y holds exactly when x R y does."""
    sub, sup = w.sub, w.super
    idx = np.array([sup.index(e) for e in sub.elements])
    sep_sub = sub.defined_mask[sub.table]
    rel = r.matrix[idx[:, None], idx[None, :]]
    report = LawReport(f"separateness of {sub.name} versus {r.name}")
    hit = first_true(sep_sub != rel)
    report.add("⊥ = R", None if hit is None else (sub.elements[hit[0]], sub.elements[hit[1]]))
    return report


def check_inject_invertibility(m: Morphism, w: SubPcmWitness) -> LawReport:
    """Invertibility of m ∘ ι for a morphism out of the super-PCM."""
    if m.source != w.super:
        raise PcmUsageError(f"{m.name} does not start at {w.super.name}")
    return check_invertible_morph(compose(m, w.inject))
