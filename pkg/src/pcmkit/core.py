"""Topped partial commutative monoids over finite carriers.

Every structure carries an explicit absorbing element, so ``join`` is total
and undefinedness is an ordinary value.  Carriers are finite, ordered
enumerations; all law checks are exhaustive sweeps whose first
counterexample (in enumeration order) is reported.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Any, Callable, Hashable, Iterable, Iterator, NamedTuple, Sequence

import numpy as np

Element = Hashable


class PcmUsageError(ValueError):
    """Raised on out-of-carrier inputs and mismatched structures."""


class _Top:
    __slots__ = ()

    def __repr__(self) -> str:
        return "⊤"

    def __reduce__(self):
        return "TOP"


TOP = _Top()


class PcmStructure:
    """A finite topped PCM ``(A, join, unit, top, D)``.

    ``join`` must be total on ``elements``; ``defined`` is the predicate for
    the defined set ``D``.  Structures compare equal when their names and
    carriers agree, so independently built products of the same factors
    are interchangeable.
    """

    def __init__(
        self,
        name: str,
        elements: Iterable[Element],
        join: Callable[[Element, Element], Element],
        unit: Element,
        top: Element,
        defined: Callable[[Element], bool],
    ):
        self.name = name
        self.elements = tuple(elements)
        self._join = join
        self.unit = unit
        self.top = top
        self._defined = defined
        self._pos = {e: i for i, e in enumerate(self.elements)}
        if len(self._pos) != len(self.elements):
            raise PcmUsageError(f"{name}: carrier contains duplicate elements")
        if unit not in self._pos or top not in self._pos:
            raise PcmUsageError(f"{name}: unit and top must belong to the carrier")

    def __repr__(self) -> str:
        return f"PcmStructure({self.name!r}, {len(self)} elements)"

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[Element]:
        return iter(self.elements)

    def __contains__(self, x: object) -> bool:
        try:
            return x in self._pos
        except TypeError:
            return False

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, PcmStructure):
            return NotImplemented
        return self.name == other.name and self.elements == other.elements

    def __hash__(self) -> int:
        return hash((self.name, len(self.elements)))

    def index(self, x: Element) -> int:
        try:
            return self._pos[x]
        except (KeyError, TypeError):
            raise PcmUsageError(f"{x!r} is not in the carrier of {self.name}") from None

    def join(self, x: Element, y: Element) -> Element:
        i, j = self.index(x), self.index(y)
        return self.elements[self.table[i, j]]

    def is_defined(self, x: Element) -> bool:
        return bool(self.defined_mask[self.index(x)])

    @property
    def unit_index(self) -> int:
        return self._pos[self.unit]

    @property
    def top_index(self) -> int:
        return self._pos[self.top]

    def raw_join(self, x: Element, y: Element) -> Element:
        """Apply the underlying join function without carrier validation."""
        return self._join(x, y)

    def closure_violation(self) -> tuple[Element, Element] | None:
        return self._build()[1]

    def _build(self):
        n = len(self.elements)
        table = np.empty((n, n), dtype=np.int32)
        bad = None
        for i, x in enumerate(self.elements):
            row = table[i]
            for j, y in enumerate(self.elements):
                k = self._pos.get(self._join(x, y))
                if k is None:
                    if bad is None:
                        bad = (x, y)
                    k = self._pos[self.top]
                row[j] = k
        return table, bad

    @cached_property
    def _built(self):
        return self._build()

    @property
    def table(self) -> np.ndarray:
        """``n x n`` array of join results as carrier indices."""
        table, bad = self._built
        if bad is not None:
            raise PcmUsageError(f"{self.name}: join of {bad[0]!r} and {bad[1]!r} leaves the carrier")
        return table

    @cached_property
    def defined_mask(self) -> np.ndarray:
        return np.array([bool(self._defined(e)) for e in self.elements], dtype=bool)

    @cached_property
    def defined_elements(self) -> tuple[Element, ...]:
        return tuple(e for e, d in zip(self.elements, self.defined_mask) if d)

    @property
    def is_normal(self) -> bool:
        """True when ⊤ is the only undefined element."""
        undefined = np.flatnonzero(~self.defined_mask)
        return list(undefined) == [self.top_index]


def join(p: PcmStructure, x: Element, y: Element) -> Element:
    return p.join(x, y)


def is_separate(p: PcmStructure, x: Element, y: Element) -> bool:
    i, j = p.index(x), p.index(y)
    return bool(p.defined_mask[p.table[i, j]])


@lru_cache(maxsize=None)
def product(p: PcmStructure, q: PcmStructure) -> PcmStructure:
    """Cartesian product with pointwise join; the result is usually not normal."""

    def pjoin(a, b):
        return (p.raw_join(a[0], b[0]), q.raw_join(a[1], b[1]))

    def pdefined(a):
        return p.is_defined(a[0]) and q.is_defined(a[1])

    return PcmStructure(
        f"{p.name}×{q.name}",
        itertools.product(p.elements, q.elements),
        pjoin,
        (p.unit, q.unit),
        (p.top, q.top),
        pdefined,
    )


class SubjState(NamedTuple):
    """A thread's view: its private part and the combined environment."""

    self: Element
    other: Element


def is_well_formed(p: PcmStructure, s: SubjState) -> bool:
    return is_separate(p, s.self, s.other)


def subjective_states(p: PcmStructure) -> list[SubjState]:
    """All well-formed (self, other) pairs, in carrier order."""
    table, mask = p.table, p.defined_mask
    xs, ys = np.nonzero(mask[table])
    return [SubjState(p.elements[i], p.elements[j]) for i, j in zip(xs, ys)]


def splits(p: PcmStructure, x: Element) -> list[tuple[Element, Element]]:
    """Pairs (a1, a2) with a1 ⊕ a2 = x and the join defined, in carrier order."""
    k = p.index(x)
    if not p.defined_mask[k]:
        return []
    xs, ys = np.nonzero(p.table == k)
    return [(p.elements[i], p.elements[j]) for i, j in zip(xs, ys)]


def star_split(p: PcmStructure, s: SubjState) -> set[tuple[SubjState, SubjState]]:
    """All (s1, s2) with s = s1 ⋆ s2."""
    out = set()
    for a1, a2 in splits(p, s.self):
        s1 = SubjState(a1, p.join(a2, s.other))
        s2 = SubjState(a2, p.join(a1, s.other))
        out.add((s1, s2))
    return out


# ---------------------------------------------------------------------------
# law reports


@dataclass(frozen=True)
class LawCheck:
    law: str
    status: str
    witness: tuple | None = None

    def __post_init__(self):
        if self.status not in ("pass", "fail"):
            raise PcmUsageError(f"bad status {self.status!r}")
        if self.status == "fail" and self.witness is None:
            raise PcmUsageError(f"failing law {self.law!r} needs a witness")

    @property
    def passed(self) -> bool:
        return self.status == "pass"


@dataclass
class LawReport:
    suite: str
    checks: list[LawCheck] = field(default_factory=list)
    stats: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, law: str, witness: tuple | None) -> None:
        """Record ``law`` as passing when ``witness`` is None, failing otherwise."""
        self.checks.append(LawCheck(law, "pass" if witness is None else "fail", witness))

    def extend(self, other: LawReport, prefix: str = "") -> None:
        for c in other.checks:
            self.checks.append(LawCheck(prefix + c.law, c.status, c.witness))

    def __getitem__(self, law: str) -> LawCheck:
        for c in self.checks:
            if c.law == law:
                return c
        raise KeyError(law)

    def failed(self) -> list[str]:
        return [c.law for c in self.checks if not c.passed]

    def to_json(self) -> dict:
        checks = []
        for c in self.checks:
            entry: dict[str, Any] = {"law": c.law, "status": c.status}
            if c.witness is not None:
                entry["witness"] = [render_element(w) for w in c.witness]
            checks.append(entry)
        return {"suite": self.suite, "checks": checks, "stats": dict(self.stats)}

    def to_text(self) -> str:
        lines = [f"== {self.suite}"]
        for c in self.checks:
            line = f"  [{c.status.upper():4}] {c.law}"
            if c.witness is not None:
                line += "  witness: " + ", ".join(format_element(w) for w in c.witness)
            lines.append(line)
        for k, v in self.stats.items():
            lines.append(f"  {k}: {v}")
        return "\n".join(lines)


def render_element(x: Any) -> Any:
    """Canonical JSON literal: ⊤ is "top", maps are sorted ``k↦v`` lists."""
    if x is TOP:
        return "top"
    if hasattr(x, "render"):
        return x.render()
    if isinstance(x, tuple):
        return [render_element(v) for v in x]
    if isinstance(x, (bool, int, str)) or x is None:
        return x
    value = getattr(x, "value", None)
    if isinstance(value, str):
        return value
    return str(x)


def format_element(x: Any) -> str:
    if isinstance(x, tuple) and not hasattr(x, "render"):
        return "(" + ", ".join(format_element(v) for v in x) + ")"
    value = getattr(x, "value", None)
    if isinstance(value, str):
        return value
    return repr(x)


def first_true(mask: np.ndarray) -> tuple[int, ...] | None:
    """Index of the first True entry in C order, or None."""
    flat = np.flatnonzero(mask)
    if flat.size == 0:
        return None
    return tuple(int(i) for i in np.unravel_index(flat[0], mask.shape))


def _witness(p: PcmStructure, idx: Sequence[int] | None) -> tuple | None:
    if idx is None:
        return None
    return tuple(p.elements[i] for i in idx)


def check_pcm_laws(p: PcmStructure) -> LawReport:
    report = LawReport(f"pcm laws: {p.name}")
    bad = p.closure_violation()
    report.add("closure", bad)
    if bad is not None:
        return report

    n = len(p)
    T, D = p.table, p.defined_mask
    u, top = p.unit_index, p.top_index
    ar = np.arange(n)

    report.add("commutativity", _witness(p, first_true(T != T.T)))
    lhs = T[T]  # (x⊕y)⊕z
    rhs = T[ar[:, None, None], T[None, :, :]]  # x⊕(y⊕z)
    report.add("associativity", _witness(p, first_true(lhs != rhs)))
    report.add("unit", _witness(p, first_true((T[:, u] != ar) | (T[u, :] != ar))))
    report.add("top-undefined", (p.top,) if D[top] else None)
    report.add("unit-defined", None if D[u] else (p.unit,))
    downward = D[T] & ~(D[:, None] & D[None, :])
    report.add("join-defined-downward", _witness(p, first_true(downward)))
    report.add("top-absorbing", _witness(p, first_true((T[:, top] != top) | (T[top, :] != top))))
    report.stats["elements"] = n
    report.stats["normal"] = p.is_normal
    return report
