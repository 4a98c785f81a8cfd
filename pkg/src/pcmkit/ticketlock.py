"""The ticket-lock resource and a bounded interleaving explorer.

Each thread owns a ticket map; the environment of a thread is the join
of every other thread's map.  The dispenser value is the number of drawn
tickets and the display is ``display(ŝ)``, so neither is stored.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

from .core import TOP, LawReport, PcmStructure, PcmUsageError, SubjState, subjective_states
from .instances import (
    EMPTY,
    OWN,
    OWNBAR,
    SERVE,
    USED,
    WAIT,
    FinMap,
    count_serve,
    display,
    fresh,
    morph_alpha,
    pcm_tickets,
    pred_no_gaps,
    pred_ordered,
    seprel_alpha,
)
from .morphism import compose
from .subpcm import quotient


def swap(s: SubjState) -> SubjState:
    return SubjState(s.other, s.self)


@dataclass(frozen=True)
class Transition:
    """A guarded update of the self component of a subjective state."""

    name: str
    guard: Callable[[SubjState], bool]
    update: Callable[[SubjState], SubjState]

    def step(self, s: SubjState) -> SubjState | None:
        return self.update(s) if self.guard(s) else None


def transpose(tr: Transition) -> Transition:
    """The same transition taken by the environment."""
    if tr.name.endswith("ᵀ"):
        name = tr.name[:-1]
    else:
        name = tr.name + "ᵀ"
    return Transition(name, lambda s: tr.guard(swap(s)), lambda s: swap(tr.update(swap(s))))


def _hat(pcm: PcmStructure, s: SubjState):
    return pcm.join(s.self, s.other)


def tr_taketx(pcm: PcmStructure, bound: int) -> Transition:
    def guard(s):
        joined = _hat(pcm, s)
        return joined is not TOP and fresh(joined) <= bound

    def update(s):
        t = fresh(_hat(pcm, s))
        return SubjState(s.self.set(t, WAIT), s.other)

    return Transition("taketx", guard, update)


def tr_lock(pcm: PcmStructure) -> Transition:
    def guard(s):
        joined = _hat(pcm, s)
        return joined is not TOP and s.self.get(display(joined)) is WAIT

    def update(s):
        return SubjState(s.self.set(display(_hat(pcm, s)), SERVE), s.other)

    return Transition("lock", guard, update)


def tr_lock_unguarded(pcm: PcmStructure) -> Transition:
    """Serves the thread's least waiting ticket without consulting the display."""

    def guard(s):
        return _hat(pcm, s) is not TOP and bool(s.self.keys_with(WAIT))

    def update(s):
        return SubjState(s.self.set(min(s.self.keys_with(WAIT)), SERVE), s.other)

    return Transition("lock", guard, update)


def tr_unlock(pcm: PcmStructure) -> Transition:
    def guard(s):
        joined = _hat(pcm, s)
        return joined is not TOP and s.self.get(display(joined)) is SERVE

    def update(s):
        return SubjState(s.self.set(display(_hat(pcm, s)), USED), s.other)

    return Transition("unlock", guard, update)


@dataclass
class Resource:
    name: str
    pcm: PcmStructure
    bound: int
    invariants: tuple[tuple[str, Callable], ...]
    transitions: tuple[Transition, ...]
    separation: Callable[[SubjState], bool]

    def joined(self, s: SubjState):
        return _hat(self.pcm, s)

    def in_statespace(self, s: SubjState) -> bool:
        joined = self.joined(s)
        return joined is not TOP and all(pred(joined) for _, pred in self.invariants)

    def transition(self, name: str) -> Transition:
        for tr in self.transitions:
            if tr.name == name:
                return tr
        raise PcmUsageError(f"{self.name} has no transition {name!r}")

    def all_transitions(self) -> list[Transition]:
        return [*self.transitions, *(transpose(t) for t in self.transitions)]


def resource_TL(bound: int, mutate: str | None = None, rebased: bool = False) -> Resource:
    """Ticket-lock resource over ticket maps with keys ≤ ``bound``.

    ``mutate="lock"`` swaps in a lock step that ignores the display.
    ``rebased=True`` runs over the quotient of ticket maps by ⊥α.
    """
    if mutate not in (None, "lock"):
        raise PcmUsageError(f"unknown mutation {mutate!r}; only 'lock' is supported")
    rel = seprel_alpha(bound)
    pcm = quotient(pcm_tickets(bound), rel).sub if rebased else pcm_tickets(bound)
    lock = tr_lock_unguarded(pcm) if mutate == "lock" else tr_lock(pcm)
    name = "TL" + ("/⊥α" if rebased else "") + ("[lock!]" if mutate else "")

    def separation(s):
        return rel.holds(s.self, s.other)

    return Resource(
        name,
        pcm,
        bound,
        (("ordered", pred_ordered), ("no_gaps", pred_no_gaps)),
        (tr_taketx(pcm, bound), lock, tr_unlock(pcm)),
        separation,
    )


# ---------------------------------------------------------------------------
# programs


class Regs(NamedTuple):
    x: int | None = None
    y: int | None = None
    t: int | None = None
    k: FinMap | None = None


class View(NamedTuple):
    """What an assertion sees: the thread's state, the joint map and its registers."""

    self: FinMap
    other: FinMap
    joined: FinMap
    display: int
    regs: Regs


Assertion = tuple[str, Callable[[View], bool]]


@dataclass(frozen=True)
class ProgramPoint:
    kind: str
    assertions: tuple[Assertion, ...] = ()


@dataclass(frozen=True)
class Program:
    name: str
    points: tuple[ProgramPoint, ...]
    post: tuple[Assertion, ...] = ()


def _alpha(x: FinMap):
    return OWN if count_serve(x) else OWNBAR


def _sep_alpha(v: View) -> bool:
    return count_serve(v.self) + count_serve(v.other) <= 1


def _holds_wait(v: View) -> bool:
    r = v.regs
    return r.k is not None and r.x is not None and v.self == r.k.set(r.x, WAIT) and r.x not in r.k


def _serve_only_at(v: View, t: int) -> bool:
    return v.self.get(t) is SERVE and v.self.keys_with(SERVE) == [t]


LOCK_PRE = (("lock.pre", lambda v: _alpha(v.self) is OWNBAR and _sep_alpha(v)),)
LOCK_POST = (
    ("lock.post", lambda v: v.regs.k is not None and v.self == v.regs.k.set(v.display, SERVE)),
    ("lock.abstract-post", lambda v: _alpha(v.self) is OWN and _sep_alpha(v)),
)
UNLOCK_PRE = (
    ("unlock.abstract-pre", lambda v: _alpha(v.self) is OWN and _sep_alpha(v)),
    ("unlock.unique-serve", lambda v: len(v.self.keys_with(SERVE)) == 1 and pred_ordered(v.joined) and pred_no_gaps(v.joined)),
    ("unlock.serve-at-display", lambda v: _serve_only_at(v, v.display)),
)
UNLOCK_POST = (
    ("unlock.post", lambda v: v.regs.k is not None and v.self == v.regs.k.set(v.regs.t, USED)),
    ("unlock.no-serve", lambda v: not v.self.keys_with(SERVE) and _sep_alpha(v)),
    ("unlock.abstract-post", lambda v: _alpha(v.self) is OWNBAR and _sep_alpha(v)),
)


def prog_lock(mutant: bool = False) -> Program:
    draw = ProgramPoint("draw", LOCK_PRE)
    if mutant:
        return Program("lock!", (draw, ProgramPoint("lock")), (("lock.abstract-post", LOCK_POST[1][1]),))
    return Program(
        "lock",
        (
            draw,
            ProgramPoint("observe", (("lock.drawn", lambda v: _holds_wait(v) and v.display <= v.regs.x),)),
            ProgramPoint(
                "until",
                (("lock.spin", lambda v: _holds_wait(v) and v.regs.y is not None and v.regs.y <= v.display <= v.regs.x),),
            ),
            ProgramPoint("lock", (("lock.turn", lambda v: _holds_wait(v) and v.regs.y == v.display == v.regs.x),)),
        ),
        LOCK_POST,
    )


def prog_unlock() -> Program:
    return Program(
        "unlock",
        (
            ProgramPoint("snapshot", UNLOCK_PRE),
            ProgramPoint(
                "unlock",
                (("unlock.pre", lambda v: v.regs.t == v.display and v.self == v.regs.k.set(v.regs.t, SERVE)),),
            ),
        ),
        UNLOCK_POST,
    )


def seq(*programs: Program) -> Program:
    """Run programs in order; each post is checked at the start of the next."""
    points: list[ProgramPoint] = []
    carry: tuple[Assertion, ...] = ()
    for prog in programs:
        first, *rest = prog.points
        points.append(ProgramPoint(first.kind, carry + first.assertions))
        points.extend(rest)
        carry = prog.post
    points.append(ProgramPoint("done", carry))
    return Program(";".join(p.name for p in programs), tuple(points))


def thread_program(rounds: int, mutant: bool = False) -> Program:
    return seq(*[p for _ in range(rounds) for p in (prog_lock(mutant), prog_unlock())])


# ---------------------------------------------------------------------------
# exploration


class ThreadState(NamedTuple):
    pc: int
    regs: Regs
    self: FinMap


GlobalConfig = tuple  # tuple[ThreadState, ...]

CHECKS = ("mutex", "statespace", "stability", "outline", "simulation")


@dataclass
class ExplorationResult:
    status: str
    check: str | None = None
    detail: str | None = None
    trace: list = field(default_factory=list)
    states: int = 0
    terminals: list = field(default_factory=list)
    configs: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def report(self, suite: str = "exploration") -> LawReport:
        rep = LawReport(suite)
        if self.passed:
            rep.add("all reachable configurations", None)
        else:
            final = self.trace[-1][2] if self.trace else ()
            rep.add(f"{self.check}: {self.detail}", tuple(ts.self for ts in final) or ("empty",))
        rep.stats["states"] = self.states
        rep.stats["terminal configurations"] = len(self.terminals)
        if self.trace:
            rep.stats["trace"] = [f"t{tid}:{step}" for tid, step, _ in self.trace[1:]]
        return rep


def _other(res: Resource, config, i: int):
    acc = res.pcm.unit
    for j, ts in enumerate(config):
        if j != i:
            acc = res.pcm.join(acc, ts.self)
    return acc


def _view(res: Resource, config, i: int) -> View | None:
    ts = config[i]
    other = _other(res, config, i)
    joined = res.pcm.join(ts.self, other)
    if joined is TOP:
        return None
    return View(ts.self, other, joined, display(joined), ts.regs)


def _step(res: Resource, prog: Program, config, i: int):
    """The successor of ``config`` when thread ``i`` moves, with the step name."""
    ts = config[i]
    point = prog.points[ts.pc]
    kind = point.kind
    if kind == "done":
        return None
    s = SubjState(ts.self, _other(res, config, i))
    joined = res.joined(s)
    if joined is TOP:
        return None
    regs = ts.regs
    new_self = ts.self
    pc = ts.pc + 1
    if kind == "draw":
        tr = res.transition("taketx")
        nxt = tr.step(s)
        if nxt is None:
            return None
        regs = Regs(x=fresh(joined), k=ts.self)
        new_self = nxt.self
        name = "taketx"
    elif kind == "observe":
        regs = regs._replace(y=display(joined))
        name = "observe"
    elif kind == "until":
        if regs.x != regs.y:
            pc = ts.pc - 1
        name = "until"
    elif kind in ("lock", "unlock"):
        nxt = res.transition(kind).step(s)
        if nxt is None:
            return None
        new_self = nxt.self
        name = kind
    elif kind == "snapshot":
        t = display(joined)
        regs = regs._replace(t=t, k=FinMap((k, v) for k, v in ts.self.items() if k != t))
        name = "snapshot"
    else:  # pragma: no cover - program points are built by this module
        raise PcmUsageError(f"unknown program point {kind!r}")
    new = ThreadState(pc, regs, new_self)
    return name, config[:i] + (new,) + config[i + 1 :]


def _violation(res: Resource, programs: Sequence[Program], config, checks) -> tuple[str, str] | None:
    pcm = res.pcm
    joined = pcm.unit
    for ts in config:
        joined = pcm.join(joined, ts.self)
    if joined is TOP:
        return "statespace", "thread maps overlap"
    for check in CHECKS:
        if check not in checks:
            continue
        if check == "mutex":
            owners = [i for i, ts in enumerate(config) if count_serve(ts.self)]
            if len(owners) > 1 or count_serve(joined) > 1:
                return "mutex", f"threads {owners} hold serve tickets"
        elif check == "statespace":
            for name, pred in res.invariants:
                if not pred(joined):
                    return "statespace", f"{name} fails on {joined!r}"
        elif check == "stability":
            for i, ts in enumerate(config):
                if not res.separation(SubjState(ts.self, _other(res, config, i))):
                    return "stability", f"thread {i} is not ⊥α-separate from its environment"
        elif check == "outline":
            for i, ts in enumerate(config):
                view = _view(res, config, i)
                for label, pred in programs[i].points[ts.pc].assertions:
                    if view is None or not pred(view):
                        return "outline", f"thread {i} fails {label} at pc {ts.pc}"
        elif check == "simulation":
            base = pcm_tickets(res.bound)
            for i, ts in enumerate(config):
                s = SubjState(ts.self, _other(res, config, i))
                if not res.separation(s):
                    return "simulation", f"thread {i} leaves the ⊥α quotient"
                if base.join(s.self, s.other) != joined:
                    return "simulation", f"thread {i} sees a different joint map"
    return None


def initial_config(threads: int):
    return tuple(ThreadState(0, Regs(), EMPTY) for _ in range(threads))


def explore(
    res: Resource,
    programs: Sequence[Program],
    checks: Sequence[str] = CHECKS,
) -> ExplorationResult:
    """Breadth-first search over all interleavings of ``programs``.

    Every reachable configuration is checked; the first violation found
    comes with a shortest trace from the initial configuration.
    """
    unknown = set(checks) - set(CHECKS)
    if unknown:
        raise PcmUsageError(f"unknown checks {sorted(unknown)}; choose from {list(CHECKS)}")
    draws = sum(1 for prog in programs for p in prog.points if p.kind == "draw")
    if draws > res.bound:
        raise PcmUsageError(f"{draws} tickets drawn in total but the bound is {res.bound}")

    start = initial_config(len(programs))
    parent = {start: None}
    order = [start]
    queue = deque([start])
    terminals = []

    def trace_to(config):
        out = []
        while config is not None:
            link = parent[config]
            if link is None:
                out.append((None, "init", config))
                break
            prev, tid, step = link
            out.append((tid, step, config))
            config = prev
        return out[::-1]

    bad = _violation(res, programs, start, checks)
    if bad:
        return ExplorationResult("violation", *bad, trace_to(start), 1)
    while queue:
        config = queue.popleft()
        moved = False
        for i, prog in enumerate(programs):
            nxt = _step(res, prog, config, i)
            if nxt is None:
                continue
            moved = True
            name, new = nxt
            if new in parent:
                continue
            parent[new] = (config, i, name)
            order.append(new)
            bad = _violation(res, programs, new, checks)
            if bad:
                return ExplorationResult("violation", *bad, trace_to(new), len(parent))
            queue.append(new)
        if not moved:
            terminals.append(config)
    return ExplorationResult("pass", states=len(parent), terminals=terminals, configs=order)


def replay(res: Resource, programs: Sequence[Program], trace) -> list:
    """Re-execute the (thread, step) pairs of a trace and return the configurations visited."""
    config = initial_config(len(programs))
    seen = [config]
    for tid, step, expected in trace:
        if tid is None:
            continue
        nxt = _step(res, programs[tid], config, tid)
        if nxt is None or nxt[0] != step:
            raise PcmUsageError(f"step {step!r} of thread {tid} is not enabled")
        config = nxt[1]
        if expected is not None and config != expected:
            raise PcmUsageError(f"replay diverged after {step!r} of thread {tid}")
        seen.append(config)
    return seen


def run_lock(threads: int, rounds: int, bound: int, mutate: str | None = None, checks=CHECKS) -> ExplorationResult:
    res = resource_TL(bound, mutate)
    programs = [thread_program(rounds, mutant=mutate == "lock") for _ in range(threads)]
    return explore(res, programs, checks)


# ---------------------------------------------------------------------------
# resource-level checks


def _statespace_states(res: Resource) -> list[SubjState]:
    return [s for s in subjective_states(res.pcm) if res.in_statespace(s)]


def check_statespace_preservation(res: Resource) -> LawReport:
    """Each transition and its transposition maps state-space states to state-space states."""
    report = LawReport(f"state-space preservation: {res.name}")
    states = _statespace_states(res)
    for tr in res.all_transitions():
        bad = {name: None for name, _ in res.invariants}
        for s in states:
            nxt = tr.step(s)
            if nxt is None:
                continue
            joined = res.joined(nxt)
            for name, pred in res.invariants:
                if bad[name] is None and (joined is TOP or not pred(joined)):
                    bad[name] = (s.self, s.other, nxt.self, nxt.other)
        for name, _ in res.invariants:
            report.add(f"{tr.name} preserves {name}", bad[name])
    report.stats["states"] = len(states)
    return report


def _closure(start, successors):
    """Breadth-first closure; returns the first (state, successor) whose successor is rejected."""
    seen = set(start)
    queue = deque(start)
    while queue:
        item = queue.popleft()
        for nxt, ok in successors(item):
            if not ok:
                return item, nxt
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return None


def check_stability(res: Resource) -> LawReport:
    """Invariants kept under any sequence of own and environment steps."""
    report = LawReport(f"stability: {res.name}")
    states = _statespace_states(res)
    steps = res.all_transitions()
    env_steps = [transpose(t) for t in res.transitions]

    for name, pred in res.invariants:

        def succ(s, pred=pred):
            for tr in steps:
                nxt = tr.step(s)
                if nxt is not None:
                    joined = res.joined(nxt)
                    yield nxt, joined is not TOP and pred(joined)

        hit = _closure(states, succ)
        report.add(f"{name} stable", None if hit is None else (*hit[0], *hit[1]))

    def succ_sep(s):
        for tr in steps:
            nxt = tr.step(s)
            if nxt is not None:
                yield nxt, res.separation(nxt)

    hit = _closure([s for s in states if res.separation(s)], succ_sep)
    report.add("⊥α stable", None if hit is None else (*hit[0], *hit[1]))

    def waiting(item):
        s, t = item
        return s.self.get(t) is WAIT and display(res.joined(s)) <= t

    def succ_wait(item):
        s, t = item
        for tr in env_steps:
            nxt = tr.step(s)
            if nxt is not None:
                yield (nxt, t), waiting((nxt, t))

    start = [(s, t) for s in states for t in s.self if waiting((s, t))]
    hit = _closure(start, succ_wait)
    report.add("waiting ticket bounds the display", None if hit is None else (*hit[0][0], hit[0][1], *hit[1][0]))
    report.stats["states"] = len(states)
    return report


def check_simulation_to_quotient(res: Resource) -> LawReport:
    """Every step preserves ⊥α, so the resource can run over the ⊥α quotient."""
    report = LawReport(f"simulation side-condition: {res.name}")
    states = [s for s in _statespace_states(res) if res.separation(s)]
    for tr in res.all_transitions():
        bad = None
        for s in states:
            nxt = tr.step(s)
            if nxt is not None and not res.separation(nxt):
                bad = (s.self, s.other, nxt.self, nxt.other)
                break
        report.add(f"{tr.name} preserves ⊥α", bad)
    report.stats["states"] = len(states)
    report.stats["note"] = "⊥α is invariant, so the separation conjunct of the abstract specs can be dropped"
    return report


def abstraction(res: Resource, configs) -> set:
    """(pc, ownership) per thread for each configuration, through α on the resource carrier."""
    base = pcm_tickets(res.bound)
    alpha = morph_alpha(res.bound)
    if res.pcm != base:
        w = quotient(base, seprel_alpha(res.bound))
        alpha = compose(alpha, w.inject)
    return {tuple((ts.pc, alpha(ts.self)) for ts in config) for config in configs}


def check_rebased_exploration(threads: int, rounds: int, bound: int) -> LawReport:
    """Exploring over the quotient reaches the same abstract configurations."""
    programs = [thread_program(rounds) for _ in range(threads)]
    plain = explore(resource_TL(bound), programs)
    rebased_res = resource_TL(bound, rebased=True)
    rebased = explore(rebased_res, programs)
    report = LawReport(f"rebased exploration: {threads}×{rounds} at bound {bound}")
    report.add("plain exploration passes", None if plain.passed else (plain.check, plain.detail))
    report.add("rebased exploration passes", None if rebased.passed else (rebased.check, rebased.detail))
    a = abstraction(resource_TL(bound), plain.configs)
    b = abstraction(rebased_res, rebased.configs)
    diff = sorted(a ^ b, key=repr)
    report.add("α′-abstractions identical", (diff[0],) if diff else None)
    report.stats["abstract configurations"] = len(a)
    report.stats["plain states"] = plain.states
    report.stats["rebased states"] = rebased.states
    return report
