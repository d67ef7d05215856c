"""Command-line interface.

Exit codes are a stable contract:

    prove           0 proved, 1 unknown, 2 refuted
    strength        the level number (1..5), 10 when no level is assigned
    compare         0 verdict computed
    counterfactual  0 witness found, 3 no consistent revision found
    explain         0 explanation rendered
    check-kb        0 document valid

    64              usage, parse, sort or name errors (any command)

Rationals print as exact fractions.  MUCAL_DEPTH overrides the default
proof depth; --depth overrides both.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from typing import Optional

from .errors import MucalError
from .kb import KbDocument, load_kb
from .logic import StrengthLevel
from .prover import Proof, prove, rho
from .reasonable import ReasonablenessVerdict, RevisionWitness
from .strength import StrengthEngine, explain as explain_judgment
from .syntax import parse_formula, print_formula


def _proof_trace(proof: Proof, indent: str = "") -> str:
    lines = []
    for i, s in enumerate(proof.steps):
        ins = ",".join(str(j) for j in s.inputs)
        assm = ",".join(str(a) for a in s.assumptions)
        lines.append(
            f"{indent}{i}. {s.rule}[{ins}]" + (f" assume({assm})" if assm else "")
            + " " + print_formula(s.formula)
        )
    return "\n".join(lines)


def _proof_dict(proof: Proof) -> dict:
    return {
        "goal": print_formula(proof.goal),
        "premises": [print_formula(p) for p in proof.premises_used],
        "depth": proof.depth,
        "steps": [
            {
                "index": i,
                "rule": s.rule,
                "inputs": list(s.inputs),
                "assumptions": list(s.assumptions),
                "formula": print_formula(s.formula),
            }
            for i, s in enumerate(proof.steps)
        ],
    }


def _witness_dict(w: Optional[RevisionWitness]) -> Optional[dict]:
    if w is None:
        return None
    return {
        "theta": list(w.theta_labels),
        "lambda": list(w.lam_labels),
        "distance": str(Fraction(w.distance)),
    }


def _verdict_dict(v: ReasonablenessVerdict) -> dict:
    out = {"holds": v.holds, "clause": v.clause, "note": v.note}
    ev = {}
    for k, val in v.evidence.items():
        if isinstance(val, Fraction):
            ev[k] = str(val)
        elif isinstance(val, RevisionWitness):
            ev[k] = _witness_dict(val)
        elif isinstance(val, Proof):
            ev[k] = {"steps": len(val.steps)}
        elif val is None:
            ev[k] = None
        else:
            ev[k] = str(val)
    out["evidence"] = ev
    return out


def _load(args) -> KbDocument:
    kb = load_kb(args.kb)
    depth = os.environ.get("MUCAL_DEPTH")
    if depth is not None:
        kb.params.proof_depth = int(depth)
    if getattr(args, "depth", None) is not None:
        kb.params.proof_depth = args.depth
    if getattr(args, "u", None) is not None:
        kb.params.u = args.u
    return kb


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        print(text)


def cmd_prove(args) -> int:
    kb = _load(args)
    goal = parse_formula(args.formula, kb.sig)
    result = prove(kb.all_premises(), goal, depth=kb.params.proof_depth, refute=True)
    lines = [f"{result.outcome}: {print_formula(goal)}"]
    payload = {"outcome": result.outcome, "goal": print_formula(goal)}
    if result.proof is not None:
        payload["cost"] = str(rho(result.proof))
        payload["proof"] = _proof_dict(result.proof)
        lines.append(f"cost: {rho(result.proof)}")
        if args.trace:
            lines.append(_proof_trace(result.proof))
    _emit(args, payload, "\n".join(lines))
    return {"proved": 0, "unknown": 1, "refuted": 2}[result.outcome]


def cmd_strength(args) -> int:
    kb = _load(args)
    goal = parse_formula(args.formula, kb.sig)
    engine = StrengthEngine(kb)
    engine.saturate(args.rounds, agent=args.agent, moment=args.at)
    j = engine.classify(args.agent, args.at, goal)
    report = explain_judgment(j)
    lines = [
        f"level {int(j.level)} ({j.level.label}) for {print_formula(goal)}",
        f"satisfied levels: {sorted(j.satisfied_levels)}",
    ]
    if args.trace:
        for d in report["details"]:
            tail = d.get("evidence") or d.get("note") or ""
            mark = ""
            if "satisfied" in d:
                mark = " [satisfied]" if d["satisfied"] else " [not satisfied]"
            lines.append(f"- {d['comparison']}{mark}" + (f" :: {tail}" if tail else ""))
    _emit(args, report, "\n".join(lines))
    return int(j.level) if j.level != StrengthLevel.NONE else 10


def cmd_compare(args) -> int:
    kb = _load(args)
    f = parse_formula(args.formula, kb.sig)
    g = parse_formula(args.other, kb.sig)
    engine = StrengthEngine(kb)
    v = engine.reason.more_reasonable(args.agent, args.at, f, g)
    from .strength import _verdict_detail

    if v.note == "irreflexive":
        text = "not more reasonable (irreflexive)"
    elif v.holds:
        text = f"more reasonable via clause {v.clause}"
    elif v.clause == "inapplicable":
        text = f"inapplicable: {v.note or 'no clause decides the pair'}"
    else:
        text = f"not more reasonable (decided by clause {v.clause})"
    detail = _verdict_detail(v)
    payload = _verdict_dict(v)
    payload["left"] = print_formula(f)
    payload["right"] = print_formula(g)
    _emit(args, payload, text + "\n" + detail)
    return 0


def cmd_counterfactual(args) -> int:
    kb = _load(args)
    goal = parse_formula(args.formula, kb.sig)
    engine = StrengthEngine(kb)
    w = engine.reason.delta(args.agent, args.at, goal)
    if w is None:
        _emit(args, {"witness": None}, "no consistent revision found")
        return 3
    adds = ", ".join(w.theta_labels) or "(none)"
    drops = ", ".join(w.lam_labels) or "(none)"
    lines = [
        f"delta: {w.distance}",
        f"additions: {adds}",
        f"removals: {drops}",
    ]
    if args.trace and w.proof is not None:
        lines.append(_proof_trace(w.proof))
    payload = {"witness": _witness_dict(w)}
    if w.proof is not None:
        payload["proof"] = _proof_dict(w.proof)
    _emit(args, payload, "\n".join(lines))
    return 0


def cmd_explain(args) -> int:
    kb = _load(args)
    goal = parse_formula(args.formula, kb.sig)
    engine = StrengthEngine(kb)
    engine.saturate(args.rounds, agent=args.agent, moment=args.at)
    j = engine.classify(args.agent, args.at, goal)
    report = explain_judgment(j)
    lines = [report["headline"]]
    for d in report["details"]:
        tail = d.get("evidence") or d.get("note") or ""
        mark = ""
        if "satisfied" in d:
            mark = " [satisfied]" if d["satisfied"] else " [not satisfied]"
        lines.append(f"- {d['comparison']}{mark}" + (f" :: {tail}" if tail else ""))
    _emit(args, report, "\n".join(lines))
    return 0


def cmd_check_kb(args) -> int:
    kb = _load(args)
    info = {
        "axioms": len(kb.axioms),
        "certain": len(kb.certain_axioms()),
        "candidates": len(kb.candidates),
        "probabilities": len(kb.prob_entries),
        "agents": kb.agents(),
        "moments": kb.order().moments,
        "finitely_ground": kb.finitely_ground(),
    }
    text = "\n".join(f"{k}: {v}" for k, v in info.items())
    _emit(args, info, text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mucal",
        description="reasoner for sorted modal event-calculus knowledge bases",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, agent=False, formula=True):
        p.add_argument("--kb", required=True, help="knowledge-base file")
        p.add_argument("--depth", type=int, default=None, help="proof depth budget")
        p.add_argument("--u", type=int, default=None, help="level-spread bound")
        p.add_argument("--rounds", type=int, default=3, help="saturation rounds")
        p.add_argument("--trace", action="store_true", help="emit proof/evidence traces")
        p.add_argument("--json", action="store_true", help="machine-readable output")
        if agent:
            p.add_argument("--agent", required=True)
            p.add_argument("--at", required=True, help="moment of evaluation")
        if formula:
            p.add_argument("formula", help="formula in surface syntax")

    p = sub.add_parser("prove", help="prove a formula from the KB")
    common(p)
    p.set_defaults(fn=cmd_prove)

    p = sub.add_parser("strength", help="grade a belief's strength level")
    common(p, agent=True)
    p.set_defaults(fn=cmd_strength)

    p = sub.add_parser("compare", help="which of two formulas is more reasonable")
    common(p, agent=True)
    p.add_argument("other", help="the formula compared against")
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("counterfactual", help="closest consistent revision deriving the formula")
    common(p, agent=True)
    p.set_defaults(fn=cmd_counterfactual)

    p = sub.add_parser("explain", help="explain the strength judgment")
    common(p, agent=True)
    p.set_defaults(fn=cmd_explain)

    p = sub.add_parser("check-kb", help="validate a KB file")
    common(p, formula=False)
    p.set_defaults(fn=cmd_check_kb)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 64 if e.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (MucalError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 64


if __name__ == "__main__":
    sys.exit(main())
