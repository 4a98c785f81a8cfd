"""Separating relations over a finite topped PCM."""
from __future__ import annotations

from functools import cached_property
from typing import Callable

import numpy as np

from .core import (
    Element,
    LawReport,
    PcmStructure,
    PcmUsageError,
    first_true,
    product,
)


class SepRel:
    """A binary relation on ``base``.

    By default the predicate is only consulted on pairs of defined
    elements, so relations built here are false on ⊤ by construction.
    Pass ``guarded=False`` to evaluate ``holds`` on the whole carrier
    (useful for building deliberately broken relations).
    """

    def __init__(
        self,
        base: PcmStructure,
        holds: Callable[[Element, Element], bool],
        name: str,
        guarded: bool = True,
        notes: tuple[str, ...] = (),
    ):
        self.base = base
        self._holds = holds
        self.name = name
        self.guarded = guarded
        self.notes = notes

    def __repr__(self) -> str:
        return f"SepRel({self.name!r} on {self.base.name})"

    @classmethod
    def from_matrix(cls, base: PcmStructure, matrix: np.ndarray, name: str, notes=()) -> SepRel:
        """Wrap a precomputed boolean matrix indexed by carrier position."""
        m = np.asarray(matrix, dtype=bool)
        if m.shape != (len(base), len(base)):
            raise PcmUsageError(f"matrix shape {m.shape} does not fit {base.name}")
        rel = cls(base, lambda x, y: bool(m[base.index(x), base.index(y)]), name, guarded=False, notes=notes)
        rel.__dict__["matrix"] = m
        return rel

    @cached_property
    def matrix(self) -> np.ndarray:
        p = self.base
        n = len(p)
        out = np.zeros((n, n), dtype=bool)
        mask = p.defined_mask
        for i, x in enumerate(p.elements):
            if self.guarded and not mask[i]:
                continue
            for j, y in enumerate(p.elements):
                if self.guarded and not mask[j]:
                    continue
                out[i, j] = bool(self._holds(x, y))
        return out

    def holds(self, x: Element, y: Element) -> bool:
        p = self.base
        return bool(self.matrix[p.index(x), p.index(y)])

    __call__ = holds

    def equals(self, other: SepRel) -> bool:
        """Extensional equality over the shared carrier."""
        return self.base == other.base and np.array_equal(self.matrix, other.matrix)


def _same_base(r1: SepRel, r2: SepRel) -> PcmStructure:
    if r1.base != r2.base:
        raise PcmUsageError(f"relations {r1.name} and {r2.name} live on different carriers")
    return r1.base


def rel_unit(p: PcmStructure) -> SepRel:
    m = np.zeros((len(p), len(p)), dtype=bool)
    m[p.unit_index, p.unit_index] = True
    return SepRel.from_matrix(p, m, "unit")


def rel_trivial(p: PcmStructure) -> SepRel:
    """The largest separating relation: plain separateness."""
    return SepRel.from_matrix(p, p.defined_mask[p.table], "trivial")


def rel_intersect(r1: SepRel, r2: SepRel) -> SepRel:
    p = _same_base(r1, r2)
    return SepRel.from_matrix(p, r1.matrix & r2.matrix, f"{r1.name}∩{r2.name}", r1.notes + r2.notes)


def rel_join(p: PcmStructure) -> SepRel:
    """On ``p × p``: (a1, a2) J (b1, b2) iff a1 ⊕ a2 ⊕ b1 ⊕ b2 is defined."""
    pp = product(p, p)

    def holds(a, b):
        total = p.join(p.join(a[0], a[1]), p.join(b[0], b[1]))
        return p.is_defined(total)

    return SepRel(pp, holds, "J")


def rel_lift_downclosed(p: PcmStructure, pred: Callable[[Element], bool], name: str | None = None) -> SepRel:
    """x R y iff pred(x ⊕ y) and x ⊥ y.

    Only a separating relation when ``pred`` is downward closed; see
    :func:`check_downclosed`.
    """
    label = name or f"lift({getattr(pred, '__name__', 'pred')})"
    ok = np.array([p.is_defined(z) and bool(pred(z)) for z in p.elements], dtype=bool)
    note = f"unit law relies on {getattr(pred, '__name__', 'pred')}(unit) holding"
    return SepRel.from_matrix(p, ok[p.table], label, notes=(note,))


def check_downclosed(p: PcmStructure, pred: Callable[[Element], bool]) -> LawReport:
    """Sweep pred(x ⊕ y) ⇒ pred(x) over separate pairs."""
    report = LawReport(f"down-closure: {getattr(pred, '__name__', 'pred')} on {p.name}")
    ok = np.array([p.is_defined(z) and bool(pred(z)) for z in p.elements], dtype=bool)
    T = p.table
    bad = ok[T] & ~ok[:, None]
    idx = first_true(bad)
    report.add("down-closed", None if idx is None else tuple(p.elements[i] for i in idx))
    return report


def tern_holds(r: SepRel, x: Element, y: Element, z: Element) -> bool:
    """x R y R z, i.e. x R y and (x ⊕ y) R z."""
    p = r.base
    return r.holds(x, y) and r.holds(p.join(x, y), z)


def _witness(p: PcmStructure, idx):
    if idx is None:
        return None
    return tuple(p.elements[i] for i in idx)


def check_seprel_laws(r: SepRel) -> LawReport:
    p = r.base
    R, T, D = r.matrix, p.table, p.defined_mask
    u = p.unit_index
    n = len(p)
    ar = np.arange(n)
    report = LawReport(f"seprel laws: {r.name} on {p.name}")

    report.add("definedness", _witness(p, first_true(R & ~D[:, None])))
    report.add("strengthening", _witness(p, first_true(R & ~D[T])))
    report.add("unit", None if R[u, u] else (p.unit, p.unit))
    report.add("symmetry", _witness(p, first_true(R != R.T)))
    premise = R[:, :, None] & R[T]  # x R y ∧ (x⊕y) R z
    concl = R[ar[:, None, None], T[None, :, :]] & R[None, :, :]  # x R (y⊕z) ∧ y R z
    report.add("associativity", _witness(p, first_true(premise & ~concl)))
    report.add("unit-closure", _witness(p, first_true(R & ~R[T, u])))
    for note in r.notes:
        report.stats.setdefault("notes", []).append(note)
    report.stats["related pairs"] = int(R.sum())
    return report


def check_invertible_rel(r: SepRel) -> LawReport:
    """a1 R (a2 ⊕ a′) ∧ a2 R (a1 ⊕ a′) ⇒ a1 R a2 R a′, over all triples."""
    p = r.base
    R, T = r.matrix, p.table
    n = len(p)
    ar = np.arange(n)
    a1 = ar[:, None, None]
    a2 = ar[None, :, None]
    a3 = ar[None, None, :]
    premise = R[a1, T[a2, a3]] & R[a2, T[a1, a3]]
    concl = R[a1, a2] & R[T[a1, a2], a3]
    report = LawReport(f"relation invertibility: {r.name} on {p.name}")
    report.add("invertibility", _witness(p, first_true(premise & ~concl)))
    return report
