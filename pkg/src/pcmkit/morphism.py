"""Partial PCM morphisms: constructions, law checks, invertibility, framing."""
from __future__ import annotations

import itertools
from functools import cached_property
from typing import Callable, Iterable

import numpy as np

from .core import (
    Element,
    LawReport,
    PcmStructure,
    PcmUsageError,
    first_true,
    product,
)
from .seprel import SepRel, check_invertible_rel, check_seprel_laws, rel_join, rel_trivial


class Morphism:
    """A total function between carriers, paired with the relation on which it distributes."""

    def __init__(
        self,
        source: PcmStructure,
        target: PcmStructure,
        fn: Callable[[Element], Element],
        seprel: SepRel | None = None,
        name: str = "φ",
    ):
        if seprel is not None and seprel.base != source:
            raise PcmUsageError(f"seprel {seprel.name} is not over {source.name}")
        self.source = source
        self.target = target
        self._fn = fn
        self.seprel = seprel if seprel is not None else rel_trivial(source)
        self.name = name

    def __repr__(self) -> str:
        return f"Morphism({self.name!r}: {self.source.name} → {self.target.name})"

    @classmethod
    def from_images(cls, source, target, images: np.ndarray, seprel: SepRel, name: str) -> Morphism:
        img = np.asarray(images, dtype=np.int64)
        m = cls(source, target, lambda x: target.elements[img[source.index(x)]], seprel, name)
        m.__dict__["_images"] = (img, None)
        return m

    @cached_property
    def _images(self):
        out = np.empty(len(self.source), dtype=np.int64)
        bad = None
        for i, x in enumerate(self.source.elements):
            y = self._fn(x)
            if y in self.target:
                out[i] = self.target.index(y)
            else:
                if bad is None:
                    bad = x
                out[i] = self.target.top_index
        return out, bad

    @property
    def images(self) -> np.ndarray:
        """Target carrier index of the image of each source element."""
        img, bad = self._images
        if bad is not None:
            raise PcmUsageError(f"{self.name} maps {bad!r} outside {self.target.name}")
        return img

    def __call__(self, x: Element) -> Element:
        return self.target.elements[self.images[self.source.index(x)]]

    def same_as(self, other: Morphism) -> bool:
        """Extensional equality of maps and relations."""
        return (
            self.source == other.source
            and self.target == other.target
            and np.array_equal(self.images, other.images)
            and self.seprel.equals(other.seprel)
        )


def apply(m: Morphism, x: Element) -> Element:
    return m(x)


def identity(p: PcmStructure) -> Morphism:
    return Morphism.from_images(p, p, np.arange(len(p)), rel_trivial(p), f"id[{p.name}]")


def const_unit(p: PcmStructure, q: PcmStructure) -> Morphism:
    """Send every defined element to the unit of ``q`` and everything else to ⊤."""
    img = np.where(p.defined_mask, q.unit_index, q.top_index)
    return Morphism.from_images(p, q, img, rel_trivial(p), f"const-unit[{p.name}→{q.name}]")


def proj1(p: PcmStructure, q: PcmStructure) -> Morphism:
    pq = product(p, q)
    return Morphism(pq, p, lambda a: a[0], rel_trivial(pq), "π1")


def proj2(p: PcmStructure, q: PcmStructure) -> Morphism:
    pq = product(p, q)
    return Morphism(pq, q, lambda a: a[1], rel_trivial(pq), "π2")


def join_morphism(p: PcmStructure) -> Morphism:
    """(a, b) ↦ a ⊕ b on p × p, distributing over the join relation."""
    pp = product(p, p)
    return Morphism(pp, p, lambda a: p.join(a[0], a[1]), rel_join(p), f"join[{p.name}]")


def compose(a: Morphism, b: Morphism) -> Morphism:
    """a ∘ b: apply b first."""
    if b.target != a.source:
        raise PcmUsageError(f"cannot compose {a.name} after {b.name}: {b.target.name} ≠ {a.source.name}")
    bi = b.images
    rel = b.seprel.matrix & a.seprel.matrix[bi[:, None], bi[None, :]]
    seprel = SepRel.from_matrix(b.source, rel, f"{a.name}∘{b.name}")
    return Morphism.from_images(b.source, a.target, a.images[bi], seprel, f"{a.name}∘{b.name}")


def tensor(a: Morphism, b: Morphism) -> Morphism:
    """x ↦ (a x, b x), distributing where both do."""
    if a.source != b.source:
        raise PcmUsageError(f"tensor needs a shared source, got {a.source.name} and {b.source.name}")
    target = product(a.target, b.target)
    nb = len(b.target)
    img = a.images * nb + b.images
    rel = SepRel.from_matrix(a.source, a.seprel.matrix & b.seprel.matrix, f"{a.seprel.name}∩{b.seprel.name}")
    return Morphism.from_images(a.source, target, img, rel, f"{a.name}⊗{b.name}")


def arrow_product(a: Morphism, b: Morphism) -> Morphism:
    """(x1, x2) ↦ (a x1, b x2), with the componentwise relation."""
    source = product(a.source, b.source)
    target = product(a.target, b.target)
    na, nb = len(a.source), len(b.source)
    ia, ib = np.divmod(np.arange(na * nb), nb)
    img = a.images[ia] * len(b.target) + b.images[ib]
    rel = a.seprel.matrix[ia[:, None], ia[None, :]] & b.seprel.matrix[ib[:, None], ib[None, :]]
    seprel = SepRel.from_matrix(source, rel, f"{a.seprel.name}×{b.seprel.name}")
    return Morphism.from_images(source, target, img, seprel, f"{a.name}×{b.name}")


def restrict(m: Morphism, r: SepRel) -> Morphism:
    """m(x) where x R 𝟙, ⊤ elsewhere; the relation tightens to ⊥_m ∩ R."""
    if r.base != m.source:
        raise PcmUsageError(f"relation {r.name} is not over {m.source.name}")
    p = m.source
    keep = r.matrix[:, p.unit_index]
    img = np.where(keep, m.images, m.target.top_index)
    rel = SepRel.from_matrix(p, m.seprel.matrix & r.matrix, f"{m.seprel.name}∩{r.name}")
    return Morphism.from_images(p, m.target, img, rel, f"{m.name}/{r.name}")


def kernel(m: Morphism) -> SepRel:
    at_unit = m.images == m.target.unit_index
    rel = m.seprel.matrix & at_unit[:, None] & at_unit[None, :]
    return SepRel.from_matrix(m.source, rel, f"ker({m.name})")


def equalizer(a: Morphism, b: Morphism) -> SepRel:
    if a.source != b.source or a.target != b.target:
        raise PcmUsageError(f"equalizer needs parallel morphisms, got {a!r} and {b!r}")
    agree = a.images == b.images
    rel = a.seprel.matrix & b.seprel.matrix & agree[:, None] & agree[None, :]
    return SepRel.from_matrix(a.source, rel, f"eq({a.name},{b.name})")


def _witness(p: PcmStructure, idx):
    if idx is None:
        return None
    return tuple(p.elements[i] for i in idx)


def check_morphism_laws(m: Morphism) -> LawReport:
    s, t = m.source, m.target
    report = LawReport(f"morphism laws: {m.name}: {s.name} → {t.name}")
    bad = m._images[1]
    report.add("closure", None if bad is None else (bad,))
    if bad is not None:
        return report
    img = m.images
    report.add("unit-preservation", None if img[s.unit_index] == t.unit_index else (s.unit,))
    report.add("top-preservation", None if img[s.top_index] == t.top_index else (s.top,))
    R = m.seprel.matrix
    joined_images = t.table[img[:, None], img[None, :]]
    ok = t.defined_mask[joined_images] & (img[s.table] == joined_images)
    report.add("distributivity", _witness(s, first_true(R & ~ok)))
    report.extend(check_seprel_laws(m.seprel), prefix="seprel:")
    return report


def check_invertible_morph(m: Morphism) -> LawReport:
    """Every split of a defined image is realised by a related split of the source."""
    s, t = m.source, m.target
    report = LawReport(f"morphism invertibility: {m.name}")
    report.extend(check_invertible_rel(m.seprel), prefix="seprel:")
    R, img = m.seprel.matrix, m.images
    Ts, Tt, Dt = s.table, t.table, t.defined_mask
    witness = None
    for a in np.flatnonzero(R[:, s.unit_index]):
        b = img[a]
        b1s, b2s = np.nonzero((Tt == b) & Dt[b])
        if b1s.size == 0:
            continue
        a1s, a2s = np.nonzero((Ts == a) & R)
        realised = set(zip(img[a1s].tolist(), img[a2s].tolist()))
        for b1, b2 in zip(b1s.tolist(), b2s.tolist()):
            if (b1, b2) not in realised:
                witness = (s.elements[a], t.elements[b1], t.elements[b2])
                break
        if witness is not None:
            break
    report.add("split-realisation", witness)
    return report


def find_split(m: Morphism, a: Element, b1: Element, b2: Element) -> tuple[Element, Element] | None:
    """Least source split a = a1 ⊕ a2 with a1 ⊥_m a2 mapping onto (b1, b2)."""
    s, t = m.source, m.target
    ia, j1, j2 = s.index(a), t.index(b1), t.index(b2)
    img = m.images
    hits = (s.table == ia) & m.seprel.matrix & (img[:, None] == j1) & (img[None, :] == j2)
    idx = first_true(hits)
    return None if idx is None else (s.elements[idx[0]], s.elements[idx[1]])


def check_cancellative(p: PcmStructure) -> LawReport:
    """a ⊕ b = a ⊕ c ⇒ b = c, whenever both joins are defined."""
    T, D = p.table, p.defined_mask
    n = len(p)
    ab = T[:, :, None]
    ac = T[:, None, :]
    same = (ab == ac) & D[ab] & D[ac]
    distinct = ~np.eye(n, dtype=bool)[None, :, :]
    report = LawReport(f"cancellativity: {p.name}")
    report.add("cancellativity", _witness(p, first_true(same & distinct)))
    return report


def _states_by_index(p: PcmStructure):
    T, D = p.table, p.defined_mask
    xs, ys = np.nonzero(D[T])
    return list(zip(xs.tolist(), ys.tolist()))


def _star_splits_idx(p: PcmStructure, self_i: int, other_i: int):
    T, D = p.table, p.defined_mask
    a1s, a2s = np.nonzero((T == self_i) & D[self_i])
    for a1, a2 in zip(a1s.tolist(), a2s.tolist()):
        yield (a1, int(T[a2, other_i])), (a2, int(T[a1, other_i]))


def check_framing_lemmas(r: SepRel, m: Morphism) -> LawReport:
    """Duplicability of the lifted relation, and F(b1 ⊕ b2) ⟺ F(b1) ∗ F(b2) for m.

    Both sides are evaluated on every well-formed subjective state, with
    ∗ ranging over all star splits of the state.
    """
    if r.base != m.source:
        raise PcmUsageError("framing needs the relation and the morphism over one carrier")
    p, t = m.source, m.target
    E = p.elements
    R, Rm, img = r.matrix, m.seprel.matrix, m.images
    states = _states_by_index(p)
    report = LawReport(f"framing lemmas: {r.name}, {m.name}")

    fwd = bwd = None
    for si, oi in states:
        lhs = bool(R[si, oi])
        rhs = any(R[s1] and R[s2] for s1, s2 in _star_splits_idx(p, si, oi))
        if lhs and not rhs and fwd is None:
            fwd = (E[si], E[oi])
        if rhs and not lhs and bwd is None:
            bwd = (E[si], E[oi])
    report.add("duplicable ⇒", fwd)
    report.add("duplicable ⇐", bwd)

    Tt, Dt = t.table, t.defined_mask
    target_pairs = [(b1, b2) for b1, b2 in zip(*np.nonzero(Dt[Tt]))]
    fwd = bwd = None
    for si, oi in states:
        splits = list(_star_splits_idx(p, si, oi))
        # (image of self, image of other-self) pairs realised by related splits
        realised = {(int(img[s1[0]]), int(img[s2[0]])) for s1, s2 in splits if Rm[s1] and Rm[s2]}
        here = bool(Rm[si, oi])
        for b1, b2 in target_pairs:
            lhs = here and img[si] == Tt[b1, b2]
            rhs = (int(b1), int(b2)) in realised
            if lhs and not rhs and fwd is None:
                fwd = (E[si], E[oi], t.elements[b1], t.elements[b2])
            if rhs and not lhs and bwd is None:
                bwd = (E[si], E[oi], t.elements[b1], t.elements[b2])
    report.add("split-frame ⇒", fwd)
    report.add("split-frame ⇐", bwd)
    report.stats["states"] = len(states)
    return report


def check_category_laws(morphisms: Iterable[Morphism]) -> LawReport:
    """Identity and associativity laws over every composable chain in ``morphisms``."""
    ms = list(morphisms)
    report = LawReport("category laws")
    for f in ms:
        left = compose(identity(f.target), f)
        right = compose(f, identity(f.source))
        report.add(f"id∘{f.name} = {f.name}", _diff(left, f))
        report.add(f"{f.name}∘id = {f.name}", _diff(right, f))
    chains = 0
    for f, g, h in itertools.product(ms, repeat=3):
        if f.source != g.target or g.source != h.target:
            continue
        chains += 1
        lhs = compose(compose(f, g), h)
        rhs = compose(f, compose(g, h))
        report.add(f"({f.name}∘{g.name})∘{h.name} = {f.name}∘({g.name}∘{h.name})", _diff(lhs, rhs))
    report.stats["morphisms"] = len(ms)
    report.stats["composable triples"] = chains
    return report


def _diff(a: Morphism, b: Morphism) -> tuple | None:
    """First source element (or pair) where two morphisms disagree, or None."""
    p = a.source
    idx = first_true(a.images != b.images)
    if idx is not None:
        return (p.elements[idx[0]],)
    idx = first_true(a.seprel.matrix != b.seprel.matrix)
    return _witness(p, idx)
