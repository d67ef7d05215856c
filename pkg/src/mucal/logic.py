"""Sorted terms and formulas, and the structural operations on them.

The language is a multi-sorted first-order language over event-calculus
function symbols, extended with three agent/moment-indexed operators:
belief, perception and withholding.  Withholding and exclusive
disjunction are definable sugar; :func:`expand_sugar` removes them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import IntEnum
from typing import Iterable, Optional, Union

from .errors import SortError, UnknownSymbolError

# ---------------------------------------------------------------------------
# Sorts and signatures

BUILTIN_SORTS: dict[str, Optional[str]] = {
    "Object": None,
    "Agent": None,
    "Self": "Agent",
    "ActionType": None,
    "Event": None,
    "Action": "Event",
    "Moment": None,
    "Boolean": None,
    "Fluent": None,
    "Numeric": None,
}

CORE_FUNCTIONS: dict[str, tuple[tuple[str, ...], str]] = {
    "action": (("Agent", "ActionType"), "Action"),
    "initially": (("Fluent",), "Boolean"),
    "holds": (("Fluent", "Moment"), "Boolean"),
    "happens": (("Event", "Moment"), "Boolean"),
    "clipped": (("Moment", "Fluent", "Moment"), "Boolean"),
    "initiates": (("Event", "Fluent", "Moment"), "Boolean"),
    "terminates": (("Event", "Fluent", "Moment"), "Boolean"),
    "prior": (("Moment", "Moment"), "Boolean"),
}


def is_numeral(name: str) -> bool:
    return name.lstrip("-").isdigit() and name.lstrip("-") != ""


class Signature:
    """Declared sorts, constants and function symbols.

    Integer literals are admitted everywhere as constants of sort Moment;
    they never need a declaration.
    """

    def __init__(self) -> None:
        self.sorts: dict[str, Optional[str]] = dict(BUILTIN_SORTS)
        self.constants: dict[str, str] = {}
        self.functions: dict[str, tuple[tuple[str, ...], str]] = dict(CORE_FUNCTIONS)

    def declare_sort(self, name: str, parent: Optional[str] = None) -> None:
        if name in self.sorts:
            raise SortError(f"sort {name!r} already declared")
        if parent is not None and parent not in self.sorts:
            raise UnknownSymbolError(parent, f"unknown parent sort {parent!r}")
        self.sorts[name] = parent
        if self._has_cycle(name):
            del self.sorts[name]
            raise SortError(f"sort {name!r} would create a cycle")

    def _has_cycle(self, start: str) -> bool:
        seen = set()
        cur: Optional[str] = start
        while cur is not None:
            if cur in seen:
                return True
            seen.add(cur)
            cur = self.sorts.get(cur)
        return False

    def declare_const(self, name: str, sort: str) -> None:
        if sort not in self.sorts:
            raise UnknownSymbolError(sort, f"unknown sort {sort!r}")
        if name in self.constants or name in self.functions:
            raise SortError(f"symbol {name!r} already declared")
        self.constants[name] = sort

    def declare_func(self, name: str, arg_sorts: Iterable[str], result: str) -> None:
        arg_sorts = tuple(arg_sorts)
        for s in arg_sorts + (result,):
            if s not in self.sorts:
                raise UnknownSymbolError(s, f"unknown sort {s!r}")
        if name in self.functions or name in self.constants:
            raise SortError(f"symbol {name!r} already declared")
        self.functions[name] = (arg_sorts, result)

    def sort_le(self, a: str, b: str) -> bool:
        """True when sort a is b or a declared subsort of b."""
        cur: Optional[str] = a
        while cur is not None:
            if cur == b:
                return True
            cur = self.sorts.get(cur)
        return False

    def const(self, name: str) -> "Const":
        if is_numeral(name):
            return Const(name, "Moment")
        if name not in self.constants:
            raise UnknownSymbolError(name)
        return Const(name, self.constants[name])


# ---------------------------------------------------------------------------
# Terms

@dataclass(frozen=True)
class Var:
    name: str
    sort: str


@dataclass(frozen=True)
class Const:
    name: str
    sort: str


@dataclass(frozen=True)
class App:
    fn: str
    args: tuple
    sort: str


Term = Union[Var, Const, App]


def term_free_vars(t: Term) -> frozenset:
    if isinstance(t, Var):
        return frozenset([t])
    if isinstance(t, App):
        out: frozenset = frozenset()
        for a in t.args:
            out |= term_free_vars(a)
        return out
    return frozenset()


def term_symbols(t: Term) -> frozenset:
    if isinstance(t, (Var, Const)):
        return frozenset([t.name])
    return frozenset([t.fn]).union(*[term_symbols(a) for a in t.args]) if t.args else frozenset([t.fn])


def term_weight(t: Term) -> int:
    if isinstance(t, App):
        return 1 + sum(term_weight(a) for a in t.args)
    return 1


def subst_term(t: Term, var: Var, repl: Term) -> Term:
    if isinstance(t, Var):
        return repl if t == var else t
    if isinstance(t, App):
        return App(t.fn, tuple(subst_term(a, var, repl) for a in t.args), t.sort)
    return t


# ---------------------------------------------------------------------------
# Formulas

@dataclass(frozen=True)
class Atom:
    term: Term  # Boolean-sorted term


@dataclass(frozen=True)
class Falsum:
    pass


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    args: tuple


@dataclass(frozen=True)
class Or:
    args: tuple


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Iff:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Xor:
    args: tuple  # sugar: pairwise-exclusive disjunction


@dataclass(frozen=True)
class Forall:
    var: Var
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: Var
    body: "Formula"


@dataclass(frozen=True)
class Believes:
    agent: Term
    moment: Term
    body: "Formula"


@dataclass(frozen=True)
class Perceives:
    agent: Term
    moment: Term
    body: "Formula"


@dataclass(frozen=True)
class Withholds:
    agent: Term
    moment: Term
    body: "Formula"  # sugar: neither believes body nor its negation


Formula = Union[
    Atom, Falsum, Not, And, Or, Implies, Iff, Xor,
    Forall, Exists, Believes, Perceives, Withholds,
]

MODAL = (Believes, Perceives, Withholds)
NARY = (And, Or, Xor)
BINARY = (Implies, Iff)
QUANT = (Forall, Exists)


class StrengthLevel(IntEnum):
    """Graded belief strengths, totally ordered none < 1 < ... < 5."""

    NONE = 0
    ACCEPTABLE = 1
    PRESUMPTION = 2
    BEYOND_REASONABLE_DOUBT = 3
    EVIDENT = 4
    CERTAIN = 5

    @property
    def label(self) -> str:
        return {
            0: "none",
            1: "acceptable",
            2: "some presumption in favor",
            3: "beyond reasonable doubt",
            4: "evident",
            5: "certain",
        }[int(self)]


# ---------------------------------------------------------------------------
# Structural traversal helpers

def children(f: Formula) -> tuple:
    if isinstance(f, Not):
        return (f.body,)
    if isinstance(f, NARY):
        return f.args
    if isinstance(f, BINARY):
        return (f.left, f.right)
    if isinstance(f, QUANT):
        return (f.body,)
    if isinstance(f, MODAL):
        return (f.body,)
    return ()


def rebuild(f: Formula, kids: tuple) -> Formula:
    if isinstance(f, Not):
        return Not(kids[0])
    if isinstance(f, (And, Or, Xor)):
        return type(f)(tuple(kids))
    if isinstance(f, (Implies, Iff)):
        return type(f)(kids[0], kids[1])
    if isinstance(f, (Forall, Exists)):
        return type(f)(f.var, kids[0])
    if isinstance(f, MODAL):
        return type(f)(f.agent, f.moment, kids[0])
    return f


def free_vars(f: Formula) -> frozenset:
    """Variables with at least one occurrence not bound by a quantifier."""
    if isinstance(f, Atom):
        return term_free_vars(f.term)
    if isinstance(f, QUANT):
        return free_vars(f.body) - {f.var}
    if isinstance(f, MODAL):
        return term_free_vars(f.agent) | term_free_vars(f.moment) | free_vars(f.body)
    out: frozenset = frozenset()
    for c in children(f):
        out |= free_vars(c)
    return out


def symbols(f: Formula) -> frozenset:
    """Distinct non-logical symbol names occurring in f."""
    if isinstance(f, Atom):
        return term_symbols(f.term)
    if isinstance(f, MODAL):
        out = term_symbols(f.agent) | term_symbols(f.moment)
        return out | symbols(f.body)
    out = frozenset()
    for c in children(f):
        out |= symbols(c)
    return out


def constant_symbols(f: Formula) -> frozenset:
    """Function and constant names occurring in f; variables excluded."""

    def of_term(t: Term) -> frozenset:
        if isinstance(t, Var):
            return frozenset()
        if isinstance(t, Const):
            return frozenset([t.name])
        out = frozenset([t.fn])
        for a in t.args:
            out |= of_term(a)
        return out

    if isinstance(f, Atom):
        return of_term(f.term)
    if isinstance(f, MODAL):
        return of_term(f.agent) | of_term(f.moment) | constant_symbols(f.body)
    out: frozenset = frozenset()
    for c in children(f):
        out |= constant_symbols(c)
    return out


def weight(f: Formula) -> int:
    """Symbol-occurrence count; an atomic 0-ary predicate weighs 1."""
    if isinstance(f, Atom):
        return term_weight(f.term)
    if isinstance(f, Falsum):
        return 1
    if isinstance(f, MODAL):
        return 1 + term_weight(f.agent) + term_weight(f.moment) + weight(f.body)
    return 1 + sum(weight(c) for c in children(f))


def substitute(f: Formula, var: Var, t: Term, sig: Optional[Signature] = None) -> Formula:
    """Replace free occurrences of var by t, capture-avoiding.

    When a signature is supplied the replacement's sort must be a subsort
    of the variable's sort.
    """
    if sig is not None:
        if not sig.sort_le(_term_sort(t), var.sort):
            raise SortError(
                f"cannot substitute {_term_sort(t)} term for {var.sort} variable {var.name!r}"
            )
    elif _term_sort(t) != var.sort and not _builtin_le(_term_sort(t), var.sort):
        raise SortError(
            f"cannot substitute {_term_sort(t)} term for {var.sort} variable {var.name!r}"
        )
    return _subst(f, var, t)


def _term_sort(t: Term) -> str:
    return t.sort


def _builtin_le(a: str, b: str) -> bool:
    cur: Optional[str] = a
    while cur is not None:
        if cur == b:
            return True
        cur = BUILTIN_SORTS.get(cur)
    return False


def _subst(f: Formula, var: Var, t: Term) -> Formula:
    if isinstance(f, Atom):
        return Atom(subst_term(f.term, var, t))
    if isinstance(f, QUANT):
        if f.var == var:
            return f
        if f.var in term_free_vars(t):
            fresh = _fresh_var(f.var, free_vars(f.body) | term_free_vars(t))
            body = _subst(f.body, f.var, fresh)
            return type(f)(fresh, _subst(body, var, t))
        return type(f)(f.var, _subst(f.body, var, t))
    if isinstance(f, MODAL):
        return type(f)(
            subst_term(f.agent, var, t),
            subst_term(f.moment, var, t),
            _subst(f.body, var, t),
        )
    kids = tuple(_subst(c, var, t) for c in children(f))
    return rebuild(f, kids)


def substitute_unchecked(f: Formula, var: Var, t: Term) -> Formula:
    """Substitution without the sort-compatibility check; for internal use
    where the replacement is drawn from a sort-correct ground universe."""
    return _subst(f, var, t)


def _fresh_var(v: Var, avoid: frozenset) -> Var:
    names = {x.name for x in avoid}
    i = 0
    name = f"{v.name}_{i}"
    while name in names:
        i += 1
        name = f"{v.name}_{i}"
    return Var(name, v.sort)


def expand_sugar(f: Formula) -> Formula:
    """Remove withholding and exclusive-disjunction nodes.

    Withholding unfolds to the conjunction of the two negated beliefs;
    exclusive disjunction to the inclusive disjunction plus pairwise
    exclusion.  Idempotent.
    """
    if isinstance(f, Withholds):
        body = expand_sugar(f.body)
        return And((
            Not(Believes(f.agent, f.moment, body)),
            Not(Believes(f.agent, f.moment, Not(body))),
        ))
    if isinstance(f, Xor):
        args = tuple(expand_sugar(a) for a in f.args)
        pairs = tuple(Not(And((a, b))) for a, b in itertools.combinations(args, 2))
        return And((Or(args),) + pairs)
    kids = tuple(expand_sugar(c) for c in children(f))
    return rebuild(f, kids)


def negation_of(f: Formula) -> Formula:
    """The complementary formula: strips one top-level negation if present."""
    if isinstance(f, Not):
        return f.body
    return Not(f)


# ---------------------------------------------------------------------------
# Well-sortedness

def well_sorted(f: Formula, sig: Signature) -> bool:
    """Check arity and sort discipline against a signature.

    Returns False on a sort mismatch; raises UnknownSymbolError when a
    symbol has no declaration at all.
    """
    try:
        _check_formula(f, sig, {})
        return True
    except SortError:
        return False


def _check_term(t: Term, sig: Signature, env: dict) -> str:
    if isinstance(t, Var):
        bound = env.get(t.name)
        if bound is not None and bound != t.sort:
            raise SortError(f"variable {t.name!r} used at sort {t.sort}, bound at {bound}")
        if t.sort not in sig.sorts:
            raise UnknownSymbolError(t.sort)
        return t.sort
    if isinstance(t, Const):
        if is_numeral(t.name):
            return t.sort
        declared = sig.constants.get(t.name)
        if declared is None:
            raise UnknownSymbolError(t.name)
        if declared != t.sort:
            raise SortError(f"constant {t.name!r} declared {declared}, used as {t.sort}")
        return declared
    if t.fn not in sig.functions:
        raise UnknownSymbolError(t.fn)
    arg_sorts, result = sig.functions[t.fn]
    if len(t.args) != len(arg_sorts):
        raise SortError(f"{t.fn!r} expects {len(arg_sorts)} arguments, got {len(t.args)}")
    for a, want in zip(t.args, arg_sorts):
        got = _check_term(a, sig, env)
        if not sig.sort_le(got, want):
            raise SortError(f"{t.fn!r} argument has sort {got}, expected {want}")
    return result


def _check_formula(f: Formula, sig: Signature, env: dict) -> None:
    if isinstance(f, Atom):
        result = _check_term(f.term, sig, env)
        if result != "Boolean":
            raise SortError(f"atom has sort {result}, expected Boolean")
        return
    if isinstance(f, Falsum):
        return
    if isinstance(f, MODAL):
        a = _check_term(f.agent, sig, env)
        if not sig.sort_le(a, "Agent"):
            raise SortError(f"modal agent argument has sort {a}")
        m = _check_term(f.moment, sig, env)
        if not sig.sort_le(m, "Moment"):
            raise SortError(f"modal moment argument has sort {m}")
        _check_formula(f.body, sig, env)
        return
    if isinstance(f, QUANT):
        if f.var.sort not in sig.sorts:
            raise UnknownSymbolError(f.var.sort)
        inner = dict(env)
        inner[f.var.name] = f.var.sort
        _check_formula(f.body, sig, inner)
        return
    for c in children(f):
        _check_formula(c, sig, env)


# ---------------------------------------------------------------------------
# Normalization (the equality used for set membership everywhere)

def _struct_key(f: Formula, depth: dict, level: int) -> str:
    """Alpha-invariant structural key; bound variables keyed by binder depth."""
    if isinstance(f, Atom):
        return "a(" + _term_key(f.term, depth) + ")"
    if isinstance(f, Falsum):
        return "false"
    if isinstance(f, Not):
        return "n(" + _struct_key(f.body, depth, level) + ")"
    if isinstance(f, NARY):
        tag = {And: "and", Or: "or", Xor: "xor"}[type(f)]
        return tag + "(" + ",".join(_struct_key(a, depth, level) for a in f.args) + ")"
    if isinstance(f, BINARY):
        tag = "imp" if isinstance(f, Implies) else "iff"
        return tag + "(" + _struct_key(f.left, depth, level) + "," + _struct_key(f.right, depth, level) + ")"
    if isinstance(f, QUANT):
        tag = "all" if isinstance(f, Forall) else "ex"
        inner = dict(depth)
        inner[f.var.name] = level
        return f"{tag}[{f.var.sort}](" + _struct_key(f.body, inner, level + 1) + ")"
    tag = {Believes: "bel", Perceives: "per", Withholds: "wit"}[type(f)]
    return tag + "(" + _term_key(f.agent, depth) + "," + _term_key(f.moment, depth) + "," + _struct_key(f.body, depth, level) + ")"


def _term_key(t: Term, depth: dict) -> str:
    if isinstance(t, Var):
        if t.name in depth:
            return f"b{depth[t.name]}"
        return f"v:{t.name}:{t.sort}"
    if isinstance(t, Const):
        return f"c:{t.name}"
    return t.fn + "(" + ",".join(_term_key(a, depth) for a in t.args) + ")"


def struct_key(f: Formula) -> str:
    return _struct_key(f, {}, 0)


def _ac_sort(f: Formula) -> Formula:
    """Flatten and order associative-commutative connectives."""
    if isinstance(f, (And, Or)):
        flat: list = []
        for a in f.args:
            a = _ac_sort(a)
            if type(a) is type(f):
                flat.extend(a.args)
            else:
                flat.append(a)
        flat.sort(key=struct_key)
        if len(flat) == 1:
            return flat[0]
        return type(f)(tuple(flat))
    kids = tuple(_ac_sort(c) for c in children(f))
    return rebuild(f, kids)


def _alpha(f: Formula, env: dict, counter: list) -> Formula:
    if isinstance(f, Atom):
        return Atom(_alpha_term(f.term, env))
    if isinstance(f, QUANT):
        fresh = Var(f"_v{counter[0]}", f.var.sort)
        counter[0] += 1
        inner = dict(env)
        inner[f.var] = fresh
        return type(f)(fresh, _alpha(f.body, inner, counter))
    if isinstance(f, MODAL):
        return type(f)(
            _alpha_term(f.agent, env),
            _alpha_term(f.moment, env),
            _alpha(f.body, env, counter),
        )
    kids = tuple(_alpha(c, env, counter) for c in children(f))
    return rebuild(f, kids)


def _alpha_term(t: Term, env: dict) -> Term:
    if isinstance(t, Var):
        return env.get(t, t)
    if isinstance(t, App):
        return App(t.fn, tuple(_alpha_term(a, env) for a in t.args), t.sort)
    return t


def normalize(f: Formula) -> Formula:
    """Canonical form: sugar expanded, AC connectives flattened and
    ordered, bound variables renamed deterministically.

    Two formulas are treated as equal throughout the package exactly when
    their normal forms coincide.
    """
    return _alpha(_ac_sort(expand_sugar(f)), {}, [0])


def equivalent(f: Formula, g: Formula) -> bool:
    return normalize(f) == normalize(g)


# ---------------------------------------------------------------------------
# Ground-term utilities shared by the prover and the model checker

def stated_ground_atoms(formulas: Iterable[Formula], fn: str) -> set:
    """Argument tuples of ground `fn` atoms stated positively, at the top
    level or inside top-level conjunctions."""
    out = set()
    for f in formulas:
        stack = [f]
        while stack:
            g = stack.pop()
            if isinstance(g, And):
                stack.extend(g.args)
            elif (
                isinstance(g, Atom)
                and isinstance(g.term, App)
                and g.term.fn == fn
                and not term_free_vars(g.term)
            ):
                out.add(g.term.args)
    return out


def collect_ground_terms(
    formulas: Iterable[Formula], parents: Optional[dict] = None
) -> dict:
    """Ground subterms grouped by sort; each term also joins the buckets of
    its ancestor sorts.  Buckets are deterministically ordered."""
    parents = BUILTIN_SORTS if parents is None else parents
    buckets: dict = {}

    def add(t: Term) -> None:
        cur: Optional[str] = t.sort
        while cur is not None:
            buckets.setdefault(cur, {}).setdefault(t, None)
            cur = parents.get(cur)

    def walk_term(t: Term) -> None:
        if isinstance(t, Const):
            add(t)
        elif isinstance(t, App):
            for a in t.args:
                walk_term(a)
            if not term_free_vars(t):
                add(t)

    def walk(f: Formula) -> None:
        if isinstance(f, Atom):
            walk_term(f.term)
            return
        if isinstance(f, MODAL):
            walk_term(f.agent)
            walk_term(f.moment)
        for c in children(f):
            walk(c)

    for f in formulas:
        walk(f)
    return {
        s: tuple(sorted(b, key=lambda t: _term_key(t, {})))
        for s, b in buckets.items()
    }


def order_from_premises(formulas: Iterable[Formula]):
    """Strict moment order stated by a premise set: ground prior atoms plus
    numeric order, transitively closed.  Returns (lt, moments)."""
    pairs = set()
    moments = set()
    for args in stated_ground_atoms(formulas, "prior"):
        a, b = args
        if isinstance(a, Const) and isinstance(b, Const):
            pairs.add((a.name, b.name))
            moments.update((a.name, b.name))
    for s, terms in collect_ground_terms(formulas).items():
        if s == "Moment":
            for t in terms:
                if isinstance(t, Const):
                    moments.add(t.name)
    numerals = sorted((m for m in moments if is_numeral(m)), key=int)
    for i, a in enumerate(numerals):
        for b in numerals[i + 1:]:
            pairs.add((a, b))
    changed = True
    while changed:
        changed = False
        for (a, b) in sorted(pairs):
            for (c, d) in sorted(pairs):
                if b == c and (a, d) not in pairs:
                    pairs.add((a, d))
                    changed = True
    return frozenset(pairs), frozenset(moments)
