"""Moment ordering and the selectable event-calculus background theory.

Two flavors: ``minimal`` contributes no frame axioms at all, so fluent
persistence must be assumed explicitly where a scenario needs it;
``inertial`` adds the usual discrete inertia schema over
holds/happens/initiates/terminates/initially/clipped.  Because the prover
is classical, the inertial flavor also materializes ground clipping
completion facts at load time: for every fluent and ordered moment pair,
``(not (clipped r f s))`` is asserted unless the KB states a terminating
event inside the window (or asserts the clipping itself).
"""

from __future__ import annotations

from typing import Iterable, Optional

from .errors import KbError, UnknownNameError
from .logic import And, App, Atom, Const, Forall, Implies, Not, Var, is_numeral


class MomentOrder:
    """Strict partial order over moment names.

    The relation is the transitive closure of declared prior facts plus
    numeric order on integer literals.  Construction fails on cycles,
    which also covers declared facts contradicting numeric order.
    """

    def __init__(self, moments: Iterable[str], declared: Iterable[tuple]):
        self.moments = sorted(set(moments))
        edges = set()
        for a, b in declared:
            edges.add((a, b))
        numerals = sorted((m for m in self.moments if is_numeral(m)), key=int)
        for i, a in enumerate(numerals):
            for b in numerals[i + 1:]:
                edges.add((a, b))
        self._closure = self._close(edges)
        for m in self.moments:
            if (m, m) in self._closure:
                raise KbError(f"moment ordering has a cycle through {m!r}")

    def _close(self, edges: set) -> frozenset:
        closure = set(edges)
        changed = True
        while changed:
            changed = False
            for (a, b) in sorted(closure):
                for (c, d) in sorted(closure):
                    if b == c and (a, d) not in closure:
                        closure.add((a, d))
                        changed = True
        return frozenset(closure)

    def lt(self, a: str, b: str) -> bool:
        return (a, b) in self._closure

    def le(self, a: str, b: str) -> bool:
        return a == b or self.lt(a, b)

    def pairs(self) -> list:
        return sorted(self._closure)

    def minimum(self) -> Optional[str]:
        """The unique minimal moment, when one exists."""
        minima = [m for m in self.moments if not any(self.lt(x, m) for x in self.moments)]
        if len(minima) == 1:
            return minima[0]
        return None


def before(kb, t1: str, t2: str) -> bool:
    """Strict moment comparison against the KB's loaded order."""
    order = kb.order()
    for name in (t1, t2):
        if name not in order.moments:
            raise UnknownNameError(f"unknown moment {name!r}")
    return order.lt(t1, t2)


def _v(name: str, sort: str) -> Var:
    return Var(name, sort)


def ec_axioms(flavor: str) -> tuple:
    """The flavor's axiom schemas, independent of any KB."""
    if flavor == "minimal":
        return ()
    if flavor != "inertial":
        raise KbError(f"unknown ec flavor {flavor!r}")
    e = _v("e", "Event")
    f = _v("f", "Fluent")
    t1 = _v("t1", "Moment")
    t2 = _v("t2", "Moment")
    inertia = Forall(e, Forall(f, Forall(t1, Forall(t2, Implies(
        And((
            Atom(App("happens", (e, t1), "Boolean")),
            Atom(App("initiates", (e, f, t1), "Boolean")),
            Atom(App("prior", (t1, t2), "Boolean")),
            Not(Atom(App("clipped", (t1, f, t2), "Boolean"))),
        )),
        Atom(App("holds", (f, t2), "Boolean")),
    )))))
    return (inertia,)


def _moment_const(name: str) -> Const:
    return Const(name, "Moment")


def _stated_ground_atoms(kb, fn: str) -> set:
    from .logic import stated_ground_atoms

    return stated_ground_atoms((ax.formula for ax in kb.axioms), fn)


def background(kb) -> tuple:
    """Ground moment-order facts plus the selected flavor's theory."""
    order = kb.order()
    facts = [
        Atom(App("prior", (_moment_const(a), _moment_const(b)), "Boolean"))
        for a, b in order.pairs()
    ]
    out = list(ec_axioms(kb.params.ec_flavor)) + facts
    if kb.params.ec_flavor == "inertial":
        out.extend(_clipping_completion(kb, order))
        out.extend(_initially_bridge(kb, order))
    return tuple(out)


def _clipping_completion(kb, order: MomentOrder) -> list:
    happens = _stated_ground_atoms(kb, "happens")
    terminates = _stated_ground_atoms(kb, "terminates")
    stated_clipped = _stated_ground_atoms(kb, "clipped")
    universe = kb.herbrand()
    fluents = universe.get("Fluent", ())
    out = []
    for fl in fluents:
        for r in order.moments:
            for s in order.moments:
                if not order.lt(r, s):
                    continue
                triple = (_moment_const(r), fl, _moment_const(s))
                clipped_here = triple in stated_clipped
                if not clipped_here:
                    for (ev, tfl, tm) in sorted(terminates, key=str):
                        if tfl != fl:
                            continue
                        t = tm.name
                        if (ev, tm) in happens and order.le(r, t) and order.lt(t, s):
                            clipped_here = True
                            break
                atom = Atom(App("clipped", triple, "Boolean"))
                out.append(atom if clipped_here else Not(atom))
    return out


def _initially_bridge(kb, order: MomentOrder) -> list:
    m0 = order.minimum()
    if m0 is None:
        return []
    f = _v("f", "Fluent")
    t = _v("t", "Moment")
    start = _moment_const(m0)
    return [
        Forall(f, Implies(
            Atom(App("initially", (f,), "Boolean")),
            Atom(App("holds", (f, start), "Boolean")),
        )),
        Forall(f, Forall(t, Implies(
            And((
                Atom(App("initially", (f,), "Boolean")),
                Atom(App("prior", (start, t), "Boolean")),
                Not(Atom(App("clipped", (start, f, t), "Boolean"))),
            )),
            Atom(App("holds", (f, t), "Boolean")),
        ))),
    ]
