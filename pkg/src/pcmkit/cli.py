"""Command-line driver: law suites, invertibility, quotients and lock exploration.

Exit codes: 0 when every check passes, 1 when a violation is reported,
2 on usage errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from typing import Callable

from .core import LawReport, PcmUsageError, check_pcm_laws, product
from .instances import (
    SERVE,
    USED,
    WAIT,
    morph_alpha,
    morph_count,
    morph_count_serve,
    morph_filter,
    morph_hist_own,
    morph_psi,
    morph_sigma,
    pcm_additive,
    pcm_hist,
    pcm_natmax,
    pcm_O,
    pcm_tickets,
    rel_ordered,
    rel_upsilon,
    seprel_alpha,
    seprel_hist,
)
from .morphism import (
    Morphism,
    arrow_product,
    check_cancellative,
    check_category_laws,
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
from .seprel import (
    check_invertible_rel,
    check_seprel_laws,
    rel_intersect,
    rel_join,
    rel_trivial,
    rel_unit,
)
from .subpcm import check_inject_invertibility, check_separateness_matches, check_subpcm_axioms, quotient
from .ticketlock import (
    CHECKS,
    check_rebased_exploration,
    check_simulation_to_quotient,
    check_stability,
    check_statespace_preservation,
    run_lock,
    resource_TL,
)


class UsageError(Exception):
    pass


def _pcm(name: str, b: int):
    table = {
        "O": pcm_O,
        "OxO": lambda: product(pcm_O(), pcm_O()),
        "natmax": lambda: pcm_natmax(b),
        "nat+": lambda: pcm_additive(b),
        "tickets": lambda: pcm_tickets(b),
        "hist": lambda: pcm_hist(b),
    }
    if name not in table:
        raise UsageError(f"unknown structure {name!r}; known: {', '.join(table)}")
    return table[name]()


def _alpha_trivial(b: int) -> Morphism:
    a = morph_alpha(b)
    return Morphism(a.source, a.target, a._fn, rel_trivial(a.source), "α/trivial")


def _eq_mutant(b: int) -> Morphism:
    """Projection restricted to the diagonal of natmax × natmax; its relation is not invertible."""
    n = pcm_natmax(b)
    diag = equalizer(proj1(n, n), proj2(n, n))
    return restrict(proj1(n, n), diag)


SEPRELS: dict[str, Callable] = {
    "unit": lambda b: rel_unit(pcm_tickets(b)),
    "trivial": lambda b: rel_trivial(pcm_tickets(b)),
    "intersect": lambda b: rel_intersect(seprel_alpha(b), rel_ordered(b)),
    "join": lambda b: rel_join(pcm_O()),
    "alpha": seprel_alpha,
    "hist": seprel_hist,
    "ordered": rel_ordered,
    "upsilon": rel_upsilon,
    "kernel-alpha": lambda b: kernel(morph_alpha(b)),
    "eq-alpha": lambda b: equalizer(morph_alpha(b), const_unit(pcm_tickets(b), pcm_O())),
}

MORPHISMS: dict[str, Callable] = {
    "id": lambda b: identity(pcm_tickets(b)),
    "const-unit": lambda b: const_unit(pcm_tickets(b), pcm_O()),
    "proj1": lambda b: proj1(pcm_O(), pcm_O()),
    "proj2": lambda b: proj2(pcm_O(), pcm_O()),
    "join": lambda b: join_morphism(pcm_O()),
    "sigma": morph_sigma,
    "psi": morph_psi,
    "filter-wait": lambda b: morph_filter(WAIT, b),
    "filter-serve": lambda b: morph_filter(SERVE, b),
    "filter-used": lambda b: morph_filter(USED, b),
    "count": morph_count,
    "count-serve": morph_count_serve,
    "alpha": morph_alpha,
    "omega": morph_hist_own,
    "alpha-trivial": _alpha_trivial,
}

FRAMING: dict[str, Callable] = {
    "alpha": lambda b: (seprel_alpha(b), morph_alpha(b)),
    "omega": lambda b: (seprel_hist(b), morph_hist_own(b)),
    "trivial-O": lambda b: (rel_trivial(pcm_O()), identity(pcm_O())),
    "mutant": lambda b: (_eq_mutant(b).seprel, _eq_mutant(b)),
}


def _alpha_inject(b: int) -> Morphism:
    w = quotient(pcm_tickets(b), seprel_alpha(b))
    return compose(morph_alpha(b), w.inject)


INVERT_RELS: dict[str, Callable] = {
    "trivial": lambda b: rel_trivial(pcm_tickets(b)),
    "alpha": seprel_alpha,
    "hist": seprel_hist,
    "eq-alpha": SEPRELS["eq-alpha"],
    "eq-diagonal": lambda b: _eq_mutant(b).seprel,
}

INVERT_MORPHS: dict[str, Callable] = {
    "alpha": morph_alpha,
    "omega": morph_hist_own,
    "alpha-inject": _alpha_inject,
    "compose": lambda b: compose(morph_alpha(b), morph_sigma(b)),
    "arrow": lambda b: arrow_product(identity(pcm_O()), morph_alpha(b)),
    "tensor-O": lambda b: tensor(identity(pcm_O()), identity(pcm_O())),
    "tensor-alpha": lambda b: tensor(morph_alpha(b), morph_alpha(b)),
}


def _laws(name: str, b: int) -> list[LawReport]:
    kind, _, rest = name.partition("-")
    if kind == "pcm":
        return [check_pcm_laws(_pcm(rest, b))]
    if kind == "seprel" and rest in SEPRELS:
        return [check_seprel_laws(SEPRELS[rest](b))]
    if kind == "morphism" and rest in MORPHISMS:
        return [check_morphism_laws(MORPHISMS[rest](b))]
    if kind == "cancellativity":
        return [check_cancellative(_pcm(rest, b))]
    if kind == "category" and rest == "tickets":
        return [
            check_category_laws(
                [identity(pcm_tickets(b)), morph_filter(SERVE, b), morph_count(b), morph_psi(b), morph_sigma(b)]
            )
        ]
    if kind == "framing" and rest in FRAMING:
        r, m = FRAMING[rest](b)
        return [check_framing_lemmas(r, m)]
    raise UsageError(f"unknown suite {name!r}\n" + _registry())


def _registry() -> str:
    lines = ["known suites:"]
    lines.append("  pcm-{O,OxO,natmax,nat+,tickets,hist}")
    lines.append("  cancellativity-{O,OxO,natmax,nat+,tickets,hist}")
    lines.append("  seprel-{" + ",".join(SEPRELS) + "}")
    lines.append("  morphism-{" + ",".join(MORPHISMS) + "}")
    lines.append("  category-tickets")
    lines.append("  framing-{" + ",".join(FRAMING) + "}")
    lines.append("invertibility targets:")
    lines.append("  rel-{" + ",".join(INVERT_RELS) + "}")
    lines.append("  morph-{" + ",".join(INVERT_MORPHS) + "}")
    return "\n".join(lines)


def _invert(name: str, b: int) -> list[LawReport]:
    kind, _, rest = name.partition("-")
    if kind == "rel" and rest in INVERT_RELS:
        return [check_invertible_rel(INVERT_RELS[rest](b))]
    if kind == "morph" and rest in INVERT_MORPHS:
        return [check_invertible_morph(INVERT_MORPHS[rest](b))]
    raise UsageError(f"unknown invertibility target {name!r}\n" + _registry())


SUB_RELS = {
    "trivial": lambda p, b: rel_trivial(p),
    "unit": lambda p, b: rel_unit(p),
    "alpha": lambda p, b: seprel_alpha(b),
    "hist": lambda p, b: seprel_hist(b),
    "ordered": lambda p, b: rel_ordered(b),
}


def _subpcm(pcm_name: str, rel_name: str, b: int) -> list[LawReport]:
    p = _pcm(pcm_name, b)
    if rel_name not in SUB_RELS:
        raise UsageError(f"unknown relation {rel_name!r}; known: {', '.join(SUB_RELS)}")
    r = SUB_RELS[rel_name](p, b)
    if r.base != p:
        raise UsageError(f"relation {rel_name} lives on {r.base.name}, not {p.name}")
    w = quotient(p, r)
    reports = [check_subpcm_axioms(w), check_separateness_matches(w, r)]
    if rel_name == "alpha":
        reports.append(check_inject_invertibility(morph_alpha(b), w))
    elif rel_name == "hist":
        reports.append(check_inject_invertibility(morph_hist_own(b), w))
    else:
        reports.append(check_inject_invertibility(identity(p), w))
    return reports


def _explore(args) -> list[LawReport]:
    checks = [c.strip() for c in args.check.split(",") if c.strip()] if args.check else list(CHECKS)
    unknown = set(checks) - set(CHECKS)
    if unknown:
        raise UsageError(f"unknown checks {sorted(unknown)}; choose from {', '.join(CHECKS)}")
    if args.threads < 1 or args.rounds < 1 or args.bound < 1:
        raise UsageError("threads, rounds and bound must be positive")
    if args.threads * args.rounds > args.bound:
        raise UsageError(f"{args.threads}×{args.rounds} tickets do not fit bound {args.bound}")
    result = run_lock(args.threads, args.rounds, args.bound, args.mutate, checks)
    suite = f"explore {args.threads}×{args.rounds} at bound {args.bound}" + (" [lock!]" if args.mutate else "")
    reports = [result.report(suite)]
    res = resource_TL(args.bound, args.mutate)
    if "statespace" in checks:
        reports.append(check_statespace_preservation(res))
    if "stability" in checks:
        reports.append(check_stability(res))
    if "simulation" in checks:
        reports.append(check_simulation_to_quotient(res))
        if not args.mutate:
            reports.append(check_rebased_exploration(args.threads, args.rounds, args.bound))
    return reports


def _counterexample(name: str, b: int) -> list[LawReport]:
    if name != "upsilon":
        raise UsageError(f"unknown counterexample {name!r}; known: upsilon")
    report = check_seprel_laws(rel_upsilon(b))
    check = report["associativity"]
    if check.witness is not None:
        x, y, z = check.witness
        report.stats["domains"] = ", ".join("{" + ",".join(map(str, sorted(e))) + "}" for e in (x, y, z))
        report.stats["instance"] = f"x υ y and (x⊕y) υ z hold, but y υ z fails for x={x!r}, y={y!r}, z={z!r}"
    return [report]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pcmkit", description=__doc__.splitlines()[0])
    parser.add_argument("--format", choices=("text", "json"), default="text")
    parser.add_argument("--output", metavar="PATH", help="also write the report to PATH")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("laws", help="run a law suite")
    p.add_argument("name")
    p.add_argument("--bound", type=int, default=3)

    p = sub.add_parser("invert", help="run an invertibility check")
    p.add_argument("name")
    p.add_argument("--bound", type=int, default=3)

    p = sub.add_parser("subpcm", help="build a quotient and check the sub-PCM axioms")
    p.add_argument("pcm")
    p.add_argument("rel")
    p.add_argument("--bound", type=int, default=3)

    p = sub.add_parser("explore", help="explore ticket-lock interleavings")
    p.add_argument("--threads", type=int, default=2)
    p.add_argument("--rounds", type=int, default=1)
    p.add_argument("--bound", type=int, default=4)
    p.add_argument("--mutate", choices=("lock",))
    p.add_argument("--check", help="comma-separated subset of " + ",".join(CHECKS))

    p = sub.add_parser("counterexample", help="show a known non-example")
    p.add_argument("name")
    p.add_argument("--bound", type=int, default=3)

    sub.add_parser("list", help="list the built-in registry")
    return parser


def render(reports: list[LawReport], fmt: str) -> str:
    if fmt == "json":
        payload = reports[0].to_json() if len(reports) == 1 else [r.to_json() for r in reports]
        return json.dumps(payload, ensure_ascii=False, indent=2)
    return "\n".join(r.to_text() for r in reports)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "list":
            print(_registry())
            return 0
        if getattr(args, "bound", 1) < 1:
            raise UsageError("bound must be positive")
        if args.command == "laws":
            reports = _laws(args.name, args.bound)
        elif args.command == "invert":
            reports = _invert(args.name, args.bound)
        elif args.command == "subpcm":
            reports = _subpcm(args.pcm, args.rel, args.bound)
        elif args.command == "explore":
            reports = _explore(args)
        else:
            reports = _counterexample(args.name, args.bound)
    except (UsageError, PcmUsageError) as exc:
        print(f"pcmkit: {exc}", file=sys.stderr)
        return 2

    out = render(reports, args.format)
    print(out)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(out + "\n")
    return 0 if all(r.passed for r in reports) else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
