"""Concrete PCMs, morphisms and relations for ownership, tickets and lock histories."""
from __future__ import annotations

import enum
import itertools
from collections.abc import Mapping
from functools import lru_cache

import numpy as np

from .core import TOP, PcmStructure, PcmUsageError, product
from .morphism import Morphism, compose
from .seprel import SepRel, rel_lift_downclosed, rel_trivial


class _Named(enum.Enum):
    def __repr__(self) -> str:
        return self.value

    __str__ = __repr__


class Own(_Named):
    OWNBAR = "ownbar"
    OWN = "own"


class Label(_Named):
    WAIT = "wait"
    SERVE = "serve"
    USED = "used"


class Op(_Named):
    L = "L"
    U = "U"


OWN, OWNBAR = Own.OWN, Own.OWNBAR
WAIT, SERVE, USED = Label.WAIT, Label.SERVE, Label.USED


class FinMap(Mapping):
    """Immutable finite map with positive integer keys."""

    __slots__ = ("_items", "_hash")

    def __init__(self, entries=()):
        items = dict(entries)
        for k in items:
            if not isinstance(k, int) or k < 1:
                raise PcmUsageError(f"map keys must be positive integers, got {k!r}")
        self._items = tuple(sorted(items.items()))
        self._hash = hash(self._items)

    def __getitem__(self, key):
        for k, v in self._items:
            if k == key:
                return v
        raise KeyError(key)

    def __iter__(self):
        return (k for k, _ in self._items)

    def __len__(self) -> int:
        return len(self._items)

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if isinstance(other, FinMap):
            return self._items == other._items
        return NotImplemented

    def __repr__(self) -> str:
        if not self._items:
            return "∅"
        return "{" + ", ".join(f"{k}↦{v!r}" for k, v in self._items) + "}"

    def render(self) -> list[str]:
        return [f"{k}↦{v!r}" for k, v in self._items]

    def set(self, key: int, value) -> FinMap:
        d = dict(self._items)
        d[key] = value
        return FinMap(d)

    def union(self, other: FinMap) -> FinMap:
        return FinMap(itertools.chain(self._items, other._items))

    def keys_with(self, value) -> list[int]:
        return [k for k, v in self._items if v == value]


EMPTY = FinMap()


def singleton(key: int, value) -> FinMap:
    return FinMap({key: value})


# ---------------------------------------------------------------------------
# structures


@lru_cache(maxsize=None)
def pcm_O() -> PcmStructure:
    """Exclusive ownership: own ⊕ own is undefined, ownbar is the unit."""

    def join(x, y):
        if x is TOP or y is TOP:
            return TOP
        if x is OWN and y is OWN:
            return TOP
        return OWN if OWN in (x, y) else OWNBAR

    return PcmStructure("O", (OWNBAR, OWN, TOP), join, OWNBAR, TOP, lambda x: x is not TOP)


@lru_cache(maxsize=None)
def pcm_natmax(n: int) -> PcmStructure:
    if n < 1:
        raise PcmUsageError("natmax needs n ≥ 1")

    def join(x, y):
        if x is TOP or y is TOP:
            return TOP
        return max(x, y)

    return PcmStructure(f"natmax({n})", (*range(1, n + 1), TOP), join, 1, TOP, lambda x: x is not TOP)


@lru_cache(maxsize=None)
def pcm_additive(cap: int) -> PcmStructure:
    """Naturals up to ``cap`` under addition; overflow is ⊤."""

    def join(x, y):
        if x is TOP or y is TOP or x + y > cap:
            return TOP
        return x + y

    return PcmStructure(f"nat+({cap})", (*range(cap + 1), TOP), join, 0, TOP, lambda x: x is not TOP)


def _finmap_join(x, y):
    if x is TOP or y is TOP:
        return TOP
    if any(k in y for k in x):
        return TOP
    return x.union(y)


@lru_cache(maxsize=None)
def pcm_finmap(keys: tuple, values: tuple, name: str | None = None) -> PcmStructure:
    """Finite maps ``keys ⇀ values`` under disjoint union.

    Enumeration is odometer order: each key is absent or takes one of
    ``values``, with the largest key varying fastest.
    """
    keys, values = tuple(sorted(keys)), tuple(values)
    elements = []
    for choice in itertools.product((None, *values), repeat=len(keys)):
        elements.append(FinMap((k, v) for k, v in zip(keys, choice) if v is not None))
    elements.append(TOP)
    label = name or f"finmap({len(keys)},{len(values)})"
    return PcmStructure(label, elements, _finmap_join, EMPTY, TOP, lambda x: x is not TOP)


def pcm_tickets(bound: int) -> PcmStructure:
    if bound < 1:
        raise PcmUsageError("ticket bound must be ≥ 1")
    return pcm_finmap(tuple(range(1, bound + 1)), tuple(Label), f"tickets({bound})")


def pcm_hist(bound: int) -> PcmStructure:
    if bound < 1:
        raise PcmUsageError("history bound must be ≥ 1")
    return pcm_finmap(tuple(range(1, bound + 1)), tuple(Op), f"hist({bound})")


# ---------------------------------------------------------------------------
# ticket maps


def _need_map(x, what: str):
    if not isinstance(x, FinMap):
        raise PcmUsageError(f"{what} needs a defined map, got {x!r}")


def fresh(x: FinMap) -> int:
    """Least positive key not in the map."""
    _need_map(x, "fresh")
    k = 1
    while k in x:
        k += 1
    return k


def display(x: FinMap) -> int:
    """Largest used key plus one (1 when nothing is used)."""
    _need_map(x, "display")
    return max(x.keys_with(USED), default=0) + 1


def count_serve(x: FinMap) -> int:
    return len(x.keys_with(SERVE))


def pred_ordered(x: FinMap) -> bool:
    """used keys < serve keys < wait keys, and used < wait."""
    _need_map(x, "ordered")
    used, serve, wait = x.keys_with(USED), x.keys_with(SERVE), x.keys_with(WAIT)

    def below(a, b):
        return not a or not b or max(a) < min(b)

    return below(used, serve) and below(serve, wait) and below(used, wait)


def pred_no_gaps(x: FinMap) -> bool:
    """Every present key above 1 has its predecessor present."""
    _need_map(x, "no_gaps")
    return all(k == 1 or (k - 1) in x for k in x)


def _top_guard(fn):
    def wrapped(x):
        return TOP if x is TOP else fn(x)

    wrapped.__name__ = fn.__name__
    return wrapped


def morph_sigma(bound: int) -> Morphism:
    """Projection of the ticket component; the identity on bare ticket maps."""
    p = pcm_tickets(bound)
    return Morphism(p, p, lambda x: x, rel_trivial(p), "σ")


def morph_psi(bound: int) -> Morphism:
    p = pcm_tickets(bound)
    return Morphism(p, pcm_natmax(bound + 1), _top_guard(display), rel_trivial(p), "ψ")


def morph_filter(label: Label, bound: int) -> Morphism:
    p = pcm_tickets(bound)

    @_top_guard
    def keep(x):
        return FinMap((k, v) for k, v in x.items() if v == label)

    return Morphism(p, p, keep, rel_trivial(p), f"filter[{label!r}]")


def morph_count(bound: int) -> Morphism:
    p = pcm_tickets(bound)
    return Morphism(p, pcm_additive(bound), _top_guard(len), rel_trivial(p), "count")


def morph_count_serve(bound: int) -> Morphism:
    m = compose(morph_count(bound), morph_filter(SERVE, bound))
    m.name = "#serve"
    return m


def seprel_alpha(bound: int) -> SepRel:
    """At most one serve ticket across both sides, and disjoint domains."""
    p = pcm_tickets(bound)
    serves = np.array([0 if x is TOP else count_serve(x) for x in p.elements])
    rel = (serves[:, None] + serves[None, :] <= 1) & p.defined_mask[p.table]
    return SepRel.from_matrix(p, rel, "⊥α")


def morph_alpha(bound: int) -> Morphism:
    p = pcm_tickets(bound)

    @_top_guard
    def alpha(x):
        return OWN if count_serve(x) else OWNBAR

    return Morphism(p, pcm_O(), alpha, seprel_alpha(bound), "α")


def rel_ordered(bound: int) -> SepRel:
    return rel_lift_downclosed(pcm_tickets(bound), pred_ordered, "ordered-lift")


def rel_upsilon(bound: int) -> SepRel:
    """Lift of no_gaps: not associative, kept as a counterexample."""
    return rel_lift_downclosed(pcm_tickets(bound), pred_no_gaps, "υ")


# ---------------------------------------------------------------------------
# histories


def last_key(h: FinMap) -> int:
    _need_map(h, "last_key")
    return max(h, default=0)


def pred_alternating(h: FinMap) -> bool:
    """Keys run 1..n with L at odd and U at even timestamps."""
    _need_map(h, "alternating")
    keys = sorted(h)
    if keys != list(range(1, len(keys) + 1)):
        return False
    return all(h[k] is (Op.L if k % 2 else Op.U) for k in keys)


def _hist_side_ok(x: FinMap, joined: FinMap) -> bool:
    last = last_key(joined)
    return all(last <= t or x.get(t + 1) is Op.U for t in x.keys_with(Op.L))


def seprel_hist(bound: int) -> SepRel:
    """Each lock entry is either final in the joint history or unlocked next by the same side."""
    p = pcm_hist(bound)

    def holds(x, y):
        joined = p.join(x, y)
        if joined is TOP:
            return False
        return _hist_side_ok(x, joined) and _hist_side_ok(y, joined)

    return SepRel(p, holds, "⊥hist")


def morph_hist_own(bound: int) -> Morphism:
    p = pcm_hist(bound)

    @_top_guard
    def omega(h):
        t = last_key(h)
        return OWN if t > 0 and h[t] is Op.L else OWNBAR

    return Morphism(p, pcm_O(), omega, seprel_hist(bound), "ω")


def pcm_OxO() -> PcmStructure:
    return product(pcm_O(), pcm_O())
