"""Knowledge-base files: parsing, validation, and derived views.

A KB file is a sequence of forms, one of::

    (sort <name> [<parent>])
    (const <name> <sort>)
    (func <name> (<sort>...) <sort>)
    (axiom <label> [:certain] <formula>)
    (pr <agent> <moment> <formula> <rational>)
    (candidate <label> <formula>)
    (prior <moment> <moment>)
    (param <name> <value>)

Rationals accept ``1/5``, ``0.2`` or ``1`` and are kept exact.
Symbols must be declared before use.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from . import eventcalc
from .errors import KbError, ParseError, SortError, UnknownSymbolError
from .logic import (
    App, Atom, Const, Formula, Signature, Var, is_numeral, normalize,
    well_sorted,
)
from .syntax import Node, formula_from_node, read_all


@dataclass
class AxiomEntry:
    label: str
    formula: Formula
    certain: bool = False


@dataclass
class CandidateEntry:
    label: str
    formula: Formula


@dataclass
class ProbEntry:
    agent: str
    moment: str
    formula: Formula
    value: Fraction


@dataclass
class Params:
    u: int = 2
    proof_depth: int = 3
    add_max: int = 2
    remove_max: int = 2
    consistency_depth: int = 256
    ec_flavor: str = "minimal"


_PARAM_NAMES = {
    "u": "u",
    "proof-depth": "proof_depth",
    "add-max": "add_max",
    "remove-max": "remove_max",
    "consistency-depth": "consistency_depth",
    "ec-flavor": "ec_flavor",
}


class KbDocument:
    """A validated knowledge base: signature, axioms, probabilities,
    revision candidates, moment order and parameters."""

    def __init__(self) -> None:
        self.sig = Signature()
        self.axioms: list = []
        self.prob_entries: list = []
        self.candidates: list = []
        self.prior_pairs: list = []
        self.params = Params()
        self._order: Optional[eventcalc.MomentOrder] = None
        self._herbrand: Optional[dict] = None
        self._finite: bool = True

    # -- declared names -------------------------------------------------

    def agents(self) -> list:
        return sorted(
            n for n, s in self.sig.constants.items() if self.sig.sort_le(s, "Agent")
        )

    def moment_names(self) -> list:
        names = {n for n, s in self.sig.constants.items() if s == "Moment"}
        for a, b in self.prior_pairs:
            names.update((a, b))
        for e in self.prob_entries:
            names.add(e.moment)
        for t in self._all_ground_terms():
            if t.sort == "Moment" and isinstance(t, Const):
                names.add(t.name)
        return sorted(names)

    def order(self) -> eventcalc.MomentOrder:
        if self._order is None:
            self._order = eventcalc.MomentOrder(self.moment_names(), self.prior_pairs)
        return self._order

    # -- term universe ---------------------------------------------------

    def _all_ground_terms(self) -> list:
        terms: dict = {}

        def walk_term(t):
            if isinstance(t, Const):
                terms.setdefault(t, None)
            elif isinstance(t, App):
                for a in t.args:
                    walk_term(a)
                if not any(isinstance(a, Var) or _has_var(a) for a in t.args):
                    terms.setdefault(t, None)

        def walk(f):
            if isinstance(f, Atom):
                walk_term(f.term)
                return
            from .logic import MODAL, children
            if isinstance(f, MODAL):
                walk_term(f.agent)
                walk_term(f.moment)
            for c in children(f):
                walk(c)

        for ax in self.axioms:
            walk(ax.formula)
        for c in self.candidates:
            walk(c.formula)
        for e in self.prob_entries:
            walk(e.formula)
        return list(terms)

    def herbrand(self) -> dict:
        """Ground terms per sort, closed under declared functions.

        Closure rounds are capped; if new terms still appear at the cap the
        instance is flagged not finitely ground (see ``finitely_ground``).
        """
        if self._herbrand is not None:
            return self._herbrand
        by_sort: dict = {}

        def add(t) -> bool:
            fresh = False
            sort = t.sort
            cur: Optional[str] = sort
            while cur is not None:
                bucket = by_sort.setdefault(cur, {})
                if t not in bucket:
                    bucket[t] = None
                    fresh = True
                cur = self.sig.sorts.get(cur)
            return fresh

        for name in sorted(self.sig.constants):
            add(Const(name, self.sig.constants[name]))
        for m in self.moment_names():
            if is_numeral(m):
                add(Const(m, "Moment"))
        for t in self._all_ground_terms():
            add(t)

        self._finite = True
        for _ in range(4):
            grew = False
            for fn in sorted(self.sig.functions):
                arg_sorts, result = self.sig.functions[fn]
                if result == "Boolean" or not arg_sorts:
                    continue
                pools = [sorted(by_sort.get(s, {}), key=str) for s in arg_sorts]
                if any(not p for p in pools):
                    continue
                combos = [()]
                for pool in pools:
                    combos = [c + (t,) for c in combos for t in pool]
                for combo in combos:
                    if add(App(fn, combo, result)):
                        grew = True
            if not grew:
                break
        else:
            self._finite = False

        from .syntax import print_term
        self._herbrand = {
            s: tuple(sorted(bucket, key=print_term)) for s, bucket in by_sort.items()
        }
        return self._herbrand

    def finitely_ground(self) -> bool:
        self.herbrand()
        return self._finite

    # -- theory views ----------------------------------------------------

    def background(self) -> tuple:
        return eventcalc.background(self)

    def all_premises(self) -> tuple:
        """Every axiom plus the event-calculus/moment background."""
        return tuple(a.formula for a in self.axioms) + self.background()

    def certain_axioms(self) -> list:
        return [a for a in self.axioms if a.certain]

    def removable_axioms(self) -> list:
        return [a for a in self.axioms if not a.certain]


def _require(cond: bool, msg: str, node: Node) -> None:
    if not cond:
        raise ParseError(msg, node.line, node.col)


def _sym(node: Node, what: str) -> str:
    _require(not node.is_list, f"expected {what}", node)
    return node.token.text


def parse_rational(text: str, node: Node) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"malformed rational {text!r}", node.line, node.col)


def parse_kb(text: str) -> KbDocument:
    """Parse and fully validate a KB document."""
    kb = KbDocument()
    labels: set = set()
    pr_keys: set = set()
    for form in read_all(text):
        _require(form.is_list and bool(form.items), "expected a top-level form", form)
        head = _sym(form.items[0], "a form keyword")
        rest = form.items[1:]
        if head == "sort":
            _require(len(rest) in (1, 2), "(sort <name> [<parent>])", form)
            name = _sym(rest[0], "sort name")
            parent = _sym(rest[1], "parent sort") if len(rest) == 2 else None
            try:
                kb.sig.declare_sort(name, parent)
            except (SortError, UnknownSymbolError) as e:
                raise ParseError(str(e), form.line, form.col)
        elif head == "const":
            _require(len(rest) == 2, "(const <name> <sort>)", form)
            try:
                kb.sig.declare_const(_sym(rest[0], "name"), _sym(rest[1], "sort"))
            except (SortError, UnknownSymbolError) as e:
                raise ParseError(str(e), form.line, form.col)
        elif head == "func":
            _require(len(rest) == 3 and rest[1].is_list, "(func <name> (<sorts>) <sort>)", form)
            args = [_sym(x, "sort") for x in rest[1].items]
            try:
                kb.sig.declare_func(_sym(rest[0], "name"), args, _sym(rest[2], "sort"))
            except (SortError, UnknownSymbolError) as e:
                raise ParseError(str(e), form.line, form.col)
        elif head == "axiom":
            _require(len(rest) in (2, 3), "(axiom <label> [:certain] <formula>)", form)
            label = _sym(rest[0], "label")
            certain = False
            body = rest[1]
            if len(rest) == 3:
                _require(_sym(rest[1], "flag") == ":certain", "unknown axiom flag", rest[1])
                certain = True
                body = rest[2]
            if label in labels:
                raise ParseError(f"duplicate label {label!r}", form.line, form.col)
            labels.add(label)
            formula = formula_from_node(body, kb.sig)
            _validate_formula(formula, kb.sig, body)
            kb.axioms.append(AxiomEntry(label, formula, certain))
        elif head == "candidate":
            _require(len(rest) == 2, "(candidate <label> <formula>)", form)
            label = _sym(rest[0], "label")
            if label in labels:
                raise ParseError(f"duplicate label {label!r}", form.line, form.col)
            labels.add(label)
            formula = formula_from_node(rest[1], kb.sig)
            _validate_formula(formula, kb.sig, rest[1])
            kb.candidates.append(CandidateEntry(label, formula))
        elif head == "pr":
            _require(len(rest) == 4, "(pr <agent> <moment> <formula> <rational>)", form)
            agent = _sym(rest[0], "agent")
            moment = _sym(rest[1], "moment")
            if agent not in kb.sig.constants or not kb.sig.sort_le(
                kb.sig.constants[agent], "Agent"
            ):
                raise ParseError(f"{agent!r} is not a declared agent", rest[0].line, rest[0].col)
            if not is_numeral(moment) and kb.sig.constants.get(moment) != "Moment":
                raise ParseError(f"{moment!r} is not a declared moment", rest[1].line, rest[1].col)
            formula = formula_from_node(rest[2], kb.sig)
            _validate_formula(formula, kb.sig, rest[2])
            from .logic import Falsum as _Falsum
            if isinstance(normalize(formula), _Falsum):
                raise ParseError("probability entries cannot target falsum",
                                 rest[2].line, rest[2].col)
            value = parse_rational(_sym(rest[3], "rational"), rest[3])
            if not (0 <= value <= 1):
                raise ParseError(
                    f"probability {value} out of range [0,1]", rest[3].line, rest[3].col
                )
            key = (agent, moment, normalize(formula))
            if key in pr_keys:
                raise ParseError("duplicate probability entry", form.line, form.col)
            pr_keys.add(key)
            kb.prob_entries.append(ProbEntry(agent, moment, formula, value))
        elif head == "prior":
            _require(len(rest) == 2, "(prior <moment> <moment>)", form)
            pair = []
            for item in rest:
                m = _sym(item, "moment")
                if not is_numeral(m) and kb.sig.constants.get(m) != "Moment":
                    raise ParseError(f"{m!r} is not a declared moment", item.line, item.col)
                pair.append(m)
            kb.prior_pairs.append((pair[0], pair[1]))
        elif head == "param":
            _require(len(rest) == 2, "(param <name> <value>)", form)
            name = _sym(rest[0], "param name")
            if name not in _PARAM_NAMES:
                raise ParseError(f"unknown param {name!r}", rest[0].line, rest[0].col)
            value = _sym(rest[1], "value")
            if name == "ec-flavor":
                if value not in ("minimal", "inertial"):
                    raise ParseError("ec-flavor is minimal|inertial", rest[1].line, rest[1].col)
                kb.params.ec_flavor = value
            else:
                if not value.isdigit():
                    raise ParseError(f"param {name!r} expects a natural", rest[1].line, rest[1].col)
                setattr(kb.params, _PARAM_NAMES[name], int(value))
        else:
            raise ParseError(f"unknown form {head!r}", form.line, form.col)

    try:
        kb.order()
    except KbError as e:
        raise KbError(f"moment order: {e}")
    return kb


def _validate_formula(f: Formula, sig: Signature, node: Node) -> None:
    # sugar expansion only rearranges already-checked subformulas, so the
    # surface check suffices here
    try:
        ok = well_sorted(f, sig)
    except UnknownSymbolError as e:
        raise ParseError(str(e), node.line, node.col)
    if not ok:
        raise ParseError("formula is not well-sorted", node.line, node.col)


def _has_var(t) -> bool:
    if isinstance(t, Var):
        return True
    if isinstance(t, App):
        return any(_has_var(a) for a in t.args)
    return False


def load_kb(path: str) -> KbDocument:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_kb(fh.read())
