"""Goal-directed natural-deduction proof search over the sorted modal
language, with replayable proof objects.

Search shape: premises are saturated forward with the elimination rules
(conjunction, implication, ground universal instantiation, perception
lifting, contradiction detection); goals are decomposed backward with the
introduction rules; case splits over disjunctive or existential premises
and reductio consume the depth budget.  Iterative deepening over that
budget keeps results deterministic and near-minimal.

Quantifier reasoning is ground: instantiation and case analysis range
over the finite term universe of the instance, so every quantifier rule
is sound under domain closure and the bounded search is exhaustible.
Belief goals are proved by the derived closure rule: collect the believed
contents at earlier-or-equal moments and prove the body from them with a
fresh sub-search.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import UnknownNameError
from .logic import (
    And, App, Atom, Believes, Const, Exists, Falsum, Forall, Formula, Iff,
    Implies, Not, Or, Perceives, Term, collect_ground_terms, expand_sugar,
    normalize, negation_of, order_from_premises, struct_key,
    substitute_unchecked, symbols,
)
from .syntax import print_term

# ---------------------------------------------------------------------------
# Contextualization

@dataclass(frozen=True)
class ContextFrame:
    agent: Term
    moment: Term
    kind: str = "B"  # B (belief) or P (perception)
    positive: bool = True


@dataclass(frozen=True)
class ContextualizedFormula:
    body: Formula  # first-order: inner modal subformulas become opaque atoms
    context: tuple


def quote_inner_modals(f: Formula) -> Formula:
    """Replace modal subformulas by opaque Boolean atoms so the result is
    pure first-order.  The quoted atom key is the normalized body."""
    if isinstance(f, (Believes, Perceives)):
        tag = "@bel" if isinstance(f, Believes) else "@per"
        quoted = Const("q" + struct_key(normalize(f.body)), "Object")
        return Atom(App(tag, (f.agent, f.moment, quoted), "Boolean"))
    from .logic import children, rebuild
    return rebuild(f, tuple(quote_inner_modals(c) for c in children(f)))


def contextualize(f: Formula) -> ContextualizedFormula:
    """Strip the modal prefix into context frames; negated modal prefixes
    tag their frame negative.  Total on well-sorted, sugar-free input."""
    f = expand_sugar(f)
    frames = []
    cur = f
    while True:
        if isinstance(cur, (Believes, Perceives)):
            frames.append(ContextFrame(
                cur.agent, cur.moment,
                "B" if isinstance(cur, Believes) else "P", True,
            ))
            cur = cur.body
        elif isinstance(cur, Not) and isinstance(cur.body, (Believes, Perceives)):
            inner = cur.body
            frames.append(ContextFrame(
                inner.agent, inner.moment,
                "B" if isinstance(inner, Believes) else "P", False,
            ))
            cur = inner.body
        else:
            break
    return ContextualizedFormula(quote_inner_modals(cur), tuple(frames))


# ---------------------------------------------------------------------------
# Proof objects

@dataclass(frozen=True)
class Step:
    rule: str
    inputs: tuple
    formula: Formula
    assumptions: tuple
    extra: tuple = ()


@dataclass(frozen=True)
class Proof:
    goal: Formula
    premises_used: tuple
    steps: tuple
    depth: int
    universe: tuple  # ((sort, (term, ...)), ...)


@dataclass(frozen=True)
class ProofResult:
    outcome: str  # proved | refuted | unknown
    proof: Optional[Proof] = None


def rho(p: Proof) -> Fraction:
    """Proof cost: step count plus a small distinct-symbol tie-break."""
    syms: frozenset = frozenset()
    for s in p.steps:
        syms |= symbols(s.formula)
    return Fraction(len(p.steps)) + Fraction(len(syms), 1000)


# ---------------------------------------------------------------------------
# Search internals

_SATURATION_CAP = 4000


class _Node:
    __slots__ = ("rule", "inputs", "formula", "extra", "assumptions", "key")

    def __init__(self, rule, inputs, formula, extra=(), assumptions=None, key=None):
        self.rule = rule
        self.inputs = tuple(inputs)
        self.formula = formula
        self.extra = extra
        if assumptions is None:
            assumptions = frozenset()
            for n in self.inputs:
                assumptions |= n.assumptions
        self.assumptions = assumptions
        self.key = key if key is not None else _nk(formula)


_NK_CACHE: dict = {}


def _nk(f: Formula) -> str:
    got = _NK_CACHE.get(f)
    if got is None:
        got = struct_key(normalize(f))
        _NK_CACHE[f] = got
    return got


_FALSE_KEY = struct_key(Falsum())


class _Env:
    """An immutable saturated fact set.  `key` identifies the content, so
    failure memoization transfers between branches that reach the same
    premise set; successful nodes are cached per instance because their
    assumption bookkeeping is tied to this environment's assume nodes."""

    __slots__ = ("nodes", "key", "memo")

    def __init__(self, nodes: dict):
        self.nodes = nodes
        self.key = frozenset(nodes)
        self.memo: dict = {}


class _Search:
    def __init__(self, gamma: tuple, goal: Formula, universe: dict, order):
        self.gamma = gamma
        self.goal = goal
        self.universe = universe
        self.lt = order
        self.moments = sorted({t.name for t in universe.get("Moment", ()) if isinstance(t, Const)})
        self.overflow = False
        self.fails: dict = {}

    # -- forward saturation ------------------------------------------------

    def base_env(self) -> _Env:
        nodes: dict = {}
        new = []
        for g in self.gamma:
            n = _Node("premise", (), g)
            if n.key not in nodes:
                nodes[n.key] = n
                new.append(n)
        self._saturate(nodes, new)
        return _Env(nodes)

    def extend(self, env: _Env, formulas: tuple):
        nodes = dict(env.nodes)
        assumes = []
        new = []
        for f in formulas:
            n = _Node("assume", (), f, assumptions=frozenset())
            n.assumptions = frozenset([n])
            if n.key not in nodes:
                # an already-derived fact needs no assumption; the fresh
                # assume node still stands in for discharge bookkeeping
                nodes[n.key] = n
                new.append(n)
            assumes.append(n)
        self._saturate(nodes, new)
        return _Env(nodes), assumes

    def _saturate(self, nodes: dict, new: list) -> None:
        imps: list = [n for n in nodes.values() if isinstance(n.formula, Implies)]
        work = list(new)
        idx = 0

        def add(node: _Node) -> None:
            if len(nodes) > _SATURATION_CAP:
                self.overflow = True
                return
            if node.key in nodes:
                return
            nodes[node.key] = node
            work.append(node)

        while idx < len(work):
            n = work[idx]
            idx += 1
            f = n.formula
            if isinstance(f, And):
                for k, arg in enumerate(f.args):
                    add(_Node("and_elim", (n,), arg, extra=(k,)))
            elif isinstance(f, Iff):
                add(_Node("iff_elim", (n,), Implies(f.left, f.right), extra=("lr",)))
                add(_Node("iff_elim", (n,), Implies(f.right, f.left), extra=("rl",)))
            elif isinstance(f, Not) and isinstance(f.body, Not):
                add(_Node("dn_elim", (n,), f.body.body))
            elif isinstance(f, Forall):
                self._instantiate_forall(n, add)
            elif isinstance(f, Implies):
                imps.append(n)
            elif isinstance(f, Perceives):
                self._lift_percept(n, add)
            # contradiction detection
            neg = negation_of(f)
            partner = nodes.get(_nk(neg))
            if partner is not None and _FALSE_KEY not in nodes:
                pos, negn = (partner, n) if isinstance(f, Not) else (n, partner)
                add(_Node("neg_elim", (pos, negn), Falsum()))
            # implication firing
            fired = True
            while fired:
                fired = False
                for imp in list(imps):
                    if imp.key not in nodes:
                        continue
                    out_key = _nk(imp.formula.right)
                    if out_key in nodes:
                        continue
                    ante = self._antecedent_node(imp.formula.left, nodes)
                    if ante is not None:
                        add(_Node("imp_elim", (imp, ante), imp.formula.right))
                        fired = True
            if self.overflow:
                return

    def _antecedent_node(self, ante: Formula, nodes: dict) -> Optional[_Node]:
        got = nodes.get(_nk(ante))
        if got is not None:
            return got
        if isinstance(ante, And):
            parts = [nodes.get(_nk(a)) for a in ante.args]
            if all(p is not None for p in parts):
                n = _Node("and_intro", tuple(parts), ante)
                nodes[n.key] = n
                return n
        return None

    def _instantiate_forall(self, n: _Node, add) -> None:
        vars_: list = []
        body = n.formula
        while isinstance(body, Forall):
            vars_.append(body.var)
            body = body.body
        pools = [self.universe.get(v.sort, ()) for v in vars_]
        if any(not p for p in pools):
            return
        total = 1
        for p in pools:
            total *= len(p)
        if total > 600:
            self.overflow = True
            return
        combos = [()]
        for pool in pools:
            combos = [c + (t,) for c in combos for t in pool]
        for combo in combos:
            inst = body
            for v, t in zip(vars_, combo):
                inst = substitute_unchecked(inst, v, t)
            add(_Node("forall_elim", (n,), inst,
                      extra=tuple(zip(vars_, combo))))

    def _lift_percept(self, n: _Node, add) -> None:
        f = n.formula
        if not isinstance(f.moment, Const):
            return
        t1 = f.moment.name
        for m in self.moments:
            if (t1, m) in self.lt:
                add(_Node("r_p", (n,), Believes(f.agent, Const(m, "Moment"), f.body),
                          extra=((t1, m),)))

    # -- backward search -----------------------------------------------------

    def prove(self, env: _Env, goal: Formula, budget: int, seen: frozenset,
              splits: frozenset):
        key = _nk(goal)
        local = (key, budget)
        if local in env.memo:
            return env.memo[local]
        fk = (env.key, key, budget)
        if fk in self.fails or (env.key, key) in seen:
            return None
        seen = seen | {(env.key, key)}

        node = self._prove_inner(env, goal, key, budget, seen, splits)
        if node is not None:
            env.memo[local] = node
        else:
            self.fails[fk] = True
        return node

    def _prove_inner(self, env: _Env, goal: Formula, key: str, budget: int,
                     seen: frozenset, splits: frozenset):
        got = env.nodes.get(key)
        if got is not None:
            return got
        falsum = env.nodes.get(_FALSE_KEY)
        if falsum is not None and not isinstance(goal, Falsum):
            return _Node("efq", (falsum,), goal)

        if isinstance(goal, Falsum):
            # complementary literal pairs are caught during saturation; here
            # only try to close negated premises structurally (budget 0),
            # deeper contradictions come from the split fallback below
            for k in sorted(env.nodes):
                n = env.nodes[k]
                if isinstance(n.formula, Not):
                    sub = self.prove(env, n.formula.body, 0, seen, splits)
                    if sub is not None:
                        return _Node("neg_elim", (sub, n), Falsum())
        elif isinstance(goal, And):
            parts = []
            for arg in goal.args:
                sub = self.prove(env, arg, budget, seen, splits)
                if sub is None:
                    parts = None
                    break
                parts.append(sub)
            if parts is not None:
                return _Node("and_intro", tuple(parts), goal)
        elif isinstance(goal, Or):
            for arg in goal.args:
                sub = self.prove(env, arg, budget, seen, splits)
                if sub is not None:
                    return _Node("or_intro", (sub,), goal)
        elif isinstance(goal, Implies):
            if budget > 0:
                env2, (a,) = self.extend(env, (goal.left,))
                if not self.overflow:
                    sub = self.prove(env2, goal.right, budget - 1, seen, splits)
                    if sub is not None:
                        return _Node("imp_intro", (sub, a), goal,
                                     assumptions=(sub.assumptions | a.assumptions) - {a})
        elif isinstance(goal, Iff):
            lr = self.prove(env, Implies(goal.left, goal.right), budget, seen, splits)
            if lr is not None:
                rl = self.prove(env, Implies(goal.right, goal.left), budget, seen, splits)
                if rl is not None:
                    return _Node("iff_intro", (lr, rl), goal)
        elif isinstance(goal, Not):
            if budget > 0:
                env2, (a,) = self.extend(env, (goal.body,))
                if not self.overflow:
                    sub = self.prove(env2, Falsum(), budget - 1, seen, splits)
                    if sub is not None:
                        return _Node("neg_intro", (sub, a), goal,
                                     assumptions=(sub.assumptions | a.assumptions) - {a})
        elif isinstance(goal, Forall):
            pool = self.universe.get(goal.var.sort, ())
            if pool:
                parts = []
                for t in pool:
                    inst = substitute_unchecked(goal.body, goal.var, t)
                    sub = self.prove(env, inst, budget, seen, splits)
                    if sub is None:
                        parts = None
                        break
                    parts.append(sub)
                if parts is not None:
                    return _Node("forall_intro_ground", tuple(parts), goal, extra=pool)
        elif isinstance(goal, Exists):
            for t in self.universe.get(goal.var.sort, ()):
                inst = substitute_unchecked(goal.body, goal.var, t)
                sub = self.prove(env, inst, budget, seen, splits)
                if sub is not None:
                    return _Node("exists_intro", (sub,), goal, extra=(t,))
        elif isinstance(goal, Believes):
            node = self._prove_belief(env, goal, budget, seen, splits)
            if node is not None:
                return node

        if budget <= 0:
            return None

        # case split over a disjunctive premise
        for k in sorted(env.nodes):
            if k in splits:
                continue
            n = env.nodes[k]
            if isinstance(n.formula, Or):
                cases = self._split(env, goal, n, n.formula.args, budget,
                                    seen, splits | {k})
                if cases is not None:
                    return _Node("or_elim", (n,) + cases, goal,
                                 assumptions=self._discharge(n, cases))
            elif isinstance(n.formula, Exists):
                pool = self.universe.get(n.formula.var.sort, ())
                if not pool:
                    continue
                insts = tuple(
                    substitute_unchecked(n.formula.body, n.formula.var, t) for t in pool
                )
                cases = self._split(env, goal, n, insts, budget, seen, splits | {k})
                if cases is not None:
                    return _Node("exists_elim_ground", (n,) + cases, goal,
                                 extra=pool,
                                 assumptions=self._discharge(n, cases))
        # reductio
        if isinstance(goal, (Atom, Believes, Perceives, Exists, Or)):
            env2, (a,) = self.extend(env, (negation_of(goal),))
            if not self.overflow:
                sub = self.prove(env2, Falsum(), budget - 1, seen, splits)
                if sub is not None:
                    return _Node("raa", (sub, a), goal,
                                 assumptions=(sub.assumptions | a.assumptions) - {a})
        return None

    def _split(self, env: _Env, goal: Formula, src: _Node, branches: tuple,
               budget: int, seen: frozenset, splits: frozenset):
        out = []
        for b in branches:
            env2, (a,) = self.extend(env, (b,))
            if self.overflow:
                return None
            sub = self.prove(env2, goal, budget - 1, seen, splits)
            if sub is None:
                return None
            out.extend((a, sub))
        return tuple(out)

    @staticmethod
    def _discharge(src: _Node, cases: tuple) -> frozenset:
        assm = src.assumptions
        for a, c in zip(cases[0::2], cases[1::2]):
            assm |= c.assumptions - {a}
        return assm

    def _prove_belief(self, env: _Env, goal: Believes, budget: int,
                      seen: frozenset, splits: frozenset):
        if not isinstance(goal.moment, Const):
            return None
        target_agent = print_term(goal.agent)
        target_moment = goal.moment.name
        belief_nodes = []
        contents = []
        for k in sorted(env.nodes):
            n = env.nodes[k]
            f = n.formula
            if isinstance(f, Believes) and isinstance(f.moment, Const):
                if print_term(f.agent) != target_agent:
                    continue
                m = f.moment.name
                if m == target_moment or (m, target_moment) in self.lt:
                    belief_nodes.append(n)
                    contents.append(f.body)
        if not contents:
            return None
        sub = prove(tuple(contents), goal.body, depth=budget,
                    universe=self.universe, order=self.lt)
        if sub.outcome != "proved":
            return None
        used = {_nk(f) for f in sub.proof.premises_used}
        kept = [n for n in belief_nodes if _nk(n.formula.body) in used]
        return _Node("r_b", tuple(kept or belief_nodes), goal,
                     extra=(sub.proof,))


# ---------------------------------------------------------------------------
# Assembly

def _assemble(root: _Node, goal: Formula, gamma: tuple, universe: dict,
              ) -> Proof:
    order: list = []
    seen: set = set()

    def visit(n: _Node) -> None:
        if id(n) in seen:
            return
        seen.add(id(n))
        for i in n.inputs:
            visit(i)
        order.append(n)

    visit(root)
    index = {id(n): i for i, n in enumerate(order)}
    steps = []
    for n in order:
        steps.append(Step(
            rule=n.rule,
            inputs=tuple(index[id(i)] for i in n.inputs),
            formula=n.formula,
            assumptions=tuple(sorted(index[id(a)] for a in n.assumptions)),
            extra=n.extra,
        ))
    premises = sorted(
        {s.formula for s in steps if s.rule == "premise"},
        key=struct_key,
    )
    depth = max((len(s.assumptions) for s in steps), default=0)
    uni = tuple(sorted((s, tuple(ts)) for s, ts in universe.items()))
    return Proof(goal=goal, premises_used=tuple(premises), steps=tuple(steps),
                 depth=depth, universe=uni)


# ---------------------------------------------------------------------------
# Public entry points

def prove(
    gamma,
    goal: Formula,
    depth: int = 3,
    universe: Optional[dict] = None,
    order=None,
    refute: bool = False,
) -> ProofResult:
    """Search for a proof of the goal from the premise set.

    Returns proved with a replayable proof, refuted (when asked) with a
    proof of the negated goal, or unknown once the depth budget and the
    bounded search space are exhausted.
    """
    gamma = tuple(expand_sugar(g) for g in gamma)
    goal_x = expand_sugar(goal)
    if universe is None:
        universe = collect_ground_terms(gamma + (goal_x,))
    if order is None:
        order, _ = order_from_premises(gamma + (goal_x,))
    search = _Search(gamma, goal_x, universe, order)
    env = search.base_env()
    if search.overflow:
        return ProofResult("unknown")
    for budget in range(depth + 1):
        node = search.prove(env, goal_x, budget, frozenset(), frozenset())
        if node is not None and not node.assumptions:
            return ProofResult("proved", _assemble(node, goal_x, gamma, universe))
        if search.overflow:
            return ProofResult("unknown")
    if refute:
        neg = prove(gamma, negation_of(goal_x), depth=depth,
                    universe=universe, order=order)
        if neg.outcome == "proved":
            return ProofResult("refuted", neg.proof)
    return ProofResult("unknown")


def projection(kb, agent: str, moment: str, exclude=frozenset(), extra=()) -> tuple:
    """The agent-relative premise set: certain axioms, believed contents at
    earlier-or-equal moments, percept contents at strictly earlier moments,
    plus the moment/event-calculus background.

    `exclude` drops axioms by label (revision removals); `extra` appends
    assumed additions, which the agent holds directly.
    """
    if agent not in kb.agents():
        raise UnknownNameError(f"unknown agent {agent!r}")
    if moment not in kb.order().moments:
        raise UnknownNameError(f"unknown moment {moment!r}")
    order = kb.order()
    out = []
    for ax in kb.axioms:
        if ax.label in exclude:
            continue
        f = expand_sugar(ax.formula)
        if ax.certain:
            out.append(f)
            continue
        if isinstance(f, Believes) and isinstance(f.moment, Const):
            if print_term(f.agent) == agent and order.le(f.moment.name, moment):
                out.append(f.body)
        elif isinstance(f, Perceives) and isinstance(f.moment, Const):
            if print_term(f.agent) == agent and order.lt(f.moment.name, moment):
                out.append(f.body)
    out.extend(expand_sugar(x) for x in extra)
    out.extend(kb.background())
    return tuple(out)


def prove_for_agent(kb, agent: str, moment: str, goal: Formula,
                    depth: Optional[int] = None) -> ProofResult:
    """Provability relative to what the agent holds at the moment."""
    prems = projection(kb, agent, moment)
    return prove(
        prems,
        goal,
        depth=depth if depth is not None else kb.params.proof_depth,
        universe=_kb_universe(kb, prems, goal),
    )


def _kb_universe(kb, prems: tuple, goal: Formula) -> dict:
    base = dict(kb.herbrand())
    extra = collect_ground_terms(prems + (goal,), parents=kb.sig.sorts)
    for s, ts in extra.items():
        have = dict.fromkeys(base.get(s, ()))
        for t in ts:
            have.setdefault(t, None)
        base[s] = tuple(sorted(have, key=print_term))
    return base


def consistent(gamma, depth: int = 256, universe: Optional[dict] = None) -> str:
    """Consistency of a formula set; see models.consistent."""
    from . import models

    return models.consistent(gamma, atom_budget=depth, universe=universe)
