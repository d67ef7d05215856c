"""The agent/moment-indexed reasonableness comparison.

A comparison of two formulas resolves through a strict three-clause
cascade on their contents: declared probabilities when both are tabled,
proof cost when both are derivable for the agent, and otherwise the
minimal-revision distance delta.

Attitude handling: a belief about the comparison frame compares by its
content; a negated belief compares like belief in the negated content;
withholding compares only against belief in the same content, where
"withholding beats believing" coincides with the opposite belief winning,
and "believing beats withholding" requires the maximal grade of the
deciding clause (probability exactly 1, or derivable outright while the
negation is not).  These reductions are what make the strength hierarchy
collapse-free: level subsumption holds by construction instead of by
luck.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Optional

from .logic import (
    And, Believes, Const, Falsum, Formula, Not, expand_sugar, negation_of,
    normalize, struct_key, weight,
)
from .prover import Proof, _kb_universe, projection, prove, rho
from . import models


# ---------------------------------------------------------------------------
# Probability table

@dataclass
class ProbTable:
    entries: dict = field(default_factory=dict)  # (agent, moment, key) -> Fraction

    @classmethod
    def from_kb(cls, kb) -> "ProbTable":
        table = cls()
        for e in kb.prob_entries:
            table.entries[(e.agent, e.moment, struct_key(normalize(e.formula)))] = e.value
        return table


def pr_lookup(table: ProbTable, agent: str, moment: str, f: Formula) -> Optional[Fraction]:
    """Declared value, else the complement of the declared negation, else
    undefined.  Never invents values."""
    key = (agent, moment, struct_key(normalize(f)))
    if key in table.entries:
        return table.entries[key]
    neg_key = (agent, moment, struct_key(normalize(negation_of(f))))
    if neg_key in table.entries:
        return 1 - table.entries[neg_key]
    return None


# ---------------------------------------------------------------------------
# Set distance

def pi(g1, g2) -> int:
    """Weighted symmetric difference of two formula sets."""
    left = {struct_key(normalize(f)): f for f in g1}
    right = {struct_key(normalize(f)): f for f in g2}
    total = 0
    for k, f in left.items():
        if k not in right:
            total += weight(f)
    for k, f in right.items():
        if k not in left:
            total += weight(f)
    return total


# ---------------------------------------------------------------------------
# Revision witnesses

@dataclass(frozen=True)
class RevisionWitness:
    theta: tuple      # (label, formula) additions
    lam: tuple        # (label, formula) removals
    distance: int
    proof: Optional[Proof]

    @property
    def theta_labels(self) -> tuple:
        return tuple(l for l, _ in self.theta)

    @property
    def lam_labels(self) -> tuple:
        return tuple(l for l, _ in self.lam)


@dataclass(frozen=True)
class ReasonablenessVerdict:
    holds: bool
    clause: str  # I | II | III | inapplicable
    evidence: dict = field(default_factory=dict)
    note: str = ""


# ---------------------------------------------------------------------------
# Engine

class ReasonEngine:
    """Caches proofs, consistency checks and revision searches for one KB."""

    def __init__(self, kb):
        self.kb = kb
        self.prob = ProbTable.from_kb(kb)
        self._provable: dict = {}
        self._delta: dict = {}
        self._feasible: dict = {}
        self._budget_hits: set = set()  # delta keys with budget-skipped pairs

    # -- agent-relative derivability ------------------------------------

    def provable(self, agent: str, moment: str, f: Formula) -> Optional[Proof]:
        content = self._strip_frame(f, agent, moment)
        key = (agent, moment, struct_key(normalize(content)))
        if key not in self._provable:
            prems = projection(self.kb, agent, moment)
            res = prove(
                prems, content,
                depth=self.kb.params.proof_depth,
                universe=_kb_universe(self.kb, prems, content),
            )
            self._provable[key] = res.proof if res.outcome == "proved" else None
        return self._provable[key]

    def _strip_frame(self, f: Formula, agent: str, moment: str) -> Formula:
        f = expand_sugar(f)
        while (
            isinstance(f, Believes)
            and isinstance(f.agent, Const) and f.agent.name == agent
            and isinstance(f.moment, Const) and f.moment.name == moment
        ):
            f = f.body
        return f

    # -- delta ------------------------------------------------------------

    def delta(self, agent: str, moment: str, goal: Formula) -> Optional[RevisionWitness]:
        """Minimal-distance consistent revision that derives the goal.

        The addition space is layered: subsets of the declared candidate
        pool are searched first; the goal itself is admitted as the
        fallback addition only when no pool-based pair is feasible.
        Removals range over non-certain axioms.  Ties break on
        (distance, change count, labels).
        """
        content = self._strip_frame(goal, agent, moment)
        ckey = (agent, moment, struct_key(normalize(content)))
        if ckey in self._delta:
            return self._delta[ckey]

        # falsum gets no zero-distance shortcut even from an inconsistent
        # base; only the consistency-constrained search below may speak
        direct = (
            None if isinstance(normalize(content), Falsum)
            else self.provable(agent, moment, content)
        )
        if direct is not None:
            witness = RevisionWitness((), (), 0, direct)
            self._delta[ckey] = witness
            return witness

        axiom_keys = {struct_key(normalize(a.formula)) for a in self.kb.axioms}
        pool = [
            (c.label, c.formula)
            for c in sorted(self.kb.candidates, key=lambda c: c.label)
            if struct_key(normalize(c.formula)) not in axiom_keys
        ]
        removables = sorted(self.kb.removable_axioms(), key=lambda a: a.label)
        add_max = self.kb.params.add_max
        remove_max = self.kb.params.remove_max

        def search(thetas) -> Optional[tuple]:
            best = None
            for theta in thetas:
                for lam_size in range(remove_max + 1):
                    for lam in combinations(removables, lam_size):
                        found = self._try_pair(agent, moment, content, theta, lam)
                        if found is None:
                            continue
                        key = (
                            found.distance,
                            len(found.theta) + len(found.lam),
                            found.theta_labels,
                            found.lam_labels,
                        )
                        if best is None or key < best[0]:
                            best = (key, found)
            return best

        pool_subsets = [
            theta
            for size in range(1, min(add_max, len(pool)) + 1)
            for theta in combinations(pool, size)
        ]
        best = search(pool_subsets)
        if best is None:
            # the goal itself as the trivial addition keeps delta total;
            # admitted only when the declared pool yields no feasible pair
            best = search([(("+goal", content),)])
        witness = best[1] if best is not None else None
        self._delta[ckey] = witness
        return witness

    def _try_pair(self, agent, moment, content, theta, lam) -> Optional[RevisionWitness]:
        lam_labels = frozenset(a.label for a in lam)
        theta_forms = tuple(f for _, f in theta)
        fkey = (
            tuple((l, struct_key(normalize(f))) for l, f in theta),
            tuple(sorted(lam_labels)),
        )

        check_set = tuple(
            a.formula for a in self.kb.axioms if a.label not in lam_labels
        ) + theta_forms + self.kb.background()
        if fkey not in self._feasible:
            self._feasible[fkey] = models.consistent(
                check_set,
                atom_budget=self.kb.params.consistency_depth,
                universe=_kb_universe(self.kb, check_set, Falsum()),
            )
        if self._feasible[fkey] != models.CONSISTENT:
            if self._feasible[fkey] == models.UNKNOWN:
                # conservative: a budget-exhausted check makes the pair
                # infeasible, and the verdict will say so
                self._budget_hits.add(
                    (agent, moment, struct_key(normalize(content)))
                )
            return None

        prems = projection(self.kb, agent, moment, exclude=lam_labels, extra=theta_forms)
        res = prove(
            prems, content,
            depth=self.kb.params.proof_depth,
            universe=_kb_universe(self.kb, prems, content),
        )
        if res.outcome != "proved":
            return None
        distance = sum(weight(f) for f in theta_forms) + sum(
            weight(a.formula) for a in lam
        )
        return RevisionWitness(
            theta=tuple(theta),
            lam=tuple((a.label, a.formula) for a in lam),
            distance=distance,
            proof=res.proof,
        )

    # -- the cascade -------------------------------------------------------

    def more_reasonable(self, agent: str, moment: str, f: Formula,
                        g: Formula) -> ReasonablenessVerdict:
        fx = expand_sugar(f)
        gx = expand_sugar(g)
        if normalize(fx) == normalize(gx):
            return ReasonablenessVerdict(False, "inapplicable", note="irreflexive")
        fa = self._attitude(fx, agent, moment)
        ga = self._attitude(gx, agent, moment)

        if fa[0] == "W" or ga[0] == "W":
            return self._with_withholding(agent, moment, fa, ga)
        return self._compare_contents(agent, moment, fa[1], ga[1])

    def _attitude(self, f: Formula, agent: str, moment: str):
        def frame_match(m) -> bool:
            return (
                isinstance(m, Believes)
                and isinstance(m.agent, Const) and m.agent.name == agent
                and isinstance(m.moment, Const) and m.moment.name == moment
            )

        if frame_match(f):
            return ("B", f.body)
        if isinstance(f, Not) and frame_match(f.body):
            # not believing compares like believing the opposite
            return ("B", negation_of(f.body.body))
        if isinstance(f, And) and len(f.args) == 2:
            a, b = f.args
            if (
                isinstance(a, Not) and frame_match(a.body)
                and isinstance(b, Not) and frame_match(b.body)
            ):
                ca, cb = a.body.body, b.body.body
                complementary = (
                    normalize(negation_of(ca)) == normalize(cb)
                    or normalize(ca) == normalize(negation_of(cb))
                )
                if complementary:
                    if isinstance(ca, Not) and not isinstance(cb, Not):
                        content = cb
                    else:
                        content = ca
                    return ("W", content)
        return ("B", f)

    def _with_withholding(self, agent, moment, fa, ga) -> ReasonablenessVerdict:
        def family(c: Formula) -> tuple:
            return (struct_key(normalize(c)), struct_key(normalize(negation_of(c))))

        if fa[0] == "W" and ga[0] == "W":
            if struct_key(normalize(fa[1])) in family(ga[1]):
                return ReasonablenessVerdict(False, "inapplicable", note="irreflexive")
            return ReasonablenessVerdict(
                False, "inapplicable", note="withholding comparisons need a shared content"
            )
        if fa[0] == "W":
            phi = ga[1]
            if struct_key(normalize(fa[1])) not in family(phi):
                return ReasonablenessVerdict(
                    False, "inapplicable",
                    note="withholding comparisons need a shared content",
                )
            # withholding beats believing exactly when the opposite belief does
            return self._compare_contents(agent, moment, negation_of(phi), phi)
        phi = fa[1]
        if struct_key(normalize(ga[1])) not in family(phi):
            return ReasonablenessVerdict(
                False, "inapplicable",
                note="withholding comparisons need a shared content",
            )
        return self._belief_over_withholding(agent, moment, phi)

    def _belief_over_withholding(self, agent, moment, phi: Formula) -> ReasonablenessVerdict:
        """Believing must reach the deciding clause's maximal grade to beat
        withholding; anything short of that leaves withholding standing."""
        p = pr_lookup(self.prob, agent, moment, phi)
        if p is not None:
            pneg = pr_lookup(self.prob, agent, moment, negation_of(phi))
            holds = p == 1 and pneg == 0
            return ReasonablenessVerdict(
                holds, "I", evidence={"pr_left": p, "pr_right": pneg},
                note="belief-vs-withholding at the certainty threshold",
            )
        wpos = self.delta(agent, moment, phi)
        wneg = self.delta(agent, moment, negation_of(phi))
        if wpos is None and wneg is None:
            return ReasonablenessVerdict(
                False, "inapplicable", note="no consistent revision reaches either side"
            )
        holds = wpos is not None and wpos.distance == 0 and (
            wneg is None or wneg.distance > 0
        )
        return ReasonablenessVerdict(
            holds, "III",
            evidence={"delta_left": wpos, "delta_right": wneg},
            note="belief-vs-withholding at the zero-revision grade",
        )

    def _compare_contents(self, agent, moment, x: Formula, y: Formula) -> ReasonablenessVerdict:
        if normalize(x) == normalize(y):
            return ReasonablenessVerdict(False, "inapplicable", note="irreflexive")
        # falsum never enters the probability or proof-cost clauses: it has
        # no probability and no derivation worth costing even from an
        # inconsistent base, so nothing can be less reasonable than it
        x_false = isinstance(normalize(x), Falsum)
        y_false = isinstance(normalize(y), Falsum)
        px = None if x_false else pr_lookup(self.prob, agent, moment, x)
        py = None if y_false else pr_lookup(self.prob, agent, moment, y)
        if px is not None and py is not None:
            return ReasonablenessVerdict(
                px > py, "I", evidence={"pr_left": px, "pr_right": py}
            )
        proof_x = None if x_false else self.provable(agent, moment, x)
        proof_y = None if y_false else self.provable(agent, moment, y)
        if proof_x is not None and proof_y is not None:
            cx, cy = rho(proof_x), rho(proof_y)
            return ReasonablenessVerdict(
                cx < cy, "II",
                evidence={"rho_left": cx, "rho_right": cy,
                          "proof_left": proof_x, "proof_right": proof_y},
            )
        wx = self.delta(agent, moment, x)
        wy = self.delta(agent, moment, y)
        note = ""
        for side in (x, y):
            key = (agent, moment, struct_key(normalize(self._strip_frame(side, agent, moment))))
            if key in self._budget_hits:
                note = "some revision pairs were skipped on a budget-exhausted check"
        if wx is None and wy is None:
            return ReasonablenessVerdict(
                False, "inapplicable",
                note=note or "no consistent revision reaches either side",
            )
        holds = wx is not None and (wy is None or wx.distance < wy.distance)
        return ReasonablenessVerdict(
            holds, "III", evidence={"delta_left": wx, "delta_right": wy},
            note=note,
        )


def delta(kb, agent: str, moment: str, goal: Formula) -> Optional[RevisionWitness]:
    return ReasonEngine(kb).delta(agent, moment, goal)


def more_reasonable(kb, agent: str, moment: str, f: Formula, g: Formula) -> ReasonablenessVerdict:
    return ReasonEngine(kb).more_reasonable(agent, moment, f, g)
