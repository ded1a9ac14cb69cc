"""HCS with VASS guards: membership, emptiness engines, and the reductions.

Cover-guard emptiness runs either through the product VASS plus a
coverability engine, or through an on-the-fly exploration of
(state, per-guard configuration) tuples with omega acceleration. A
deterministic guard whose only enabled move would drive a counter negative
is dead: it rejects every extension of the history, but the outer system
keeps running on transitions the guard does not control.

The two-counter-machine translation guards each zero-test with a one-state
reach-acceptance counter tracker, making language emptiness of the result
equivalent to 2CM reachability; a bounded breadth-first search provides the
matching semi-decision.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from math import inf
from typing import Optional, Sequence

from .automata import Alphabet, FiniteAutomaton
from .core import Hcs, HcsSemantics, guard_kind, member
from .errors import ContractError, InputError, ResourceLimitError, UnsupportedGuardError
from .vass import (
    COVER,
    DEFAULT_NODE_CAP,
    REACH,
    CoverabilityInstance,
    Vass,
    config_accepting,
    decide_coverability,
    initial_configs,
)


def hcs_vass_member(hcs: Hcs, word: Sequence[str], max_configs: int = DEFAULT_NODE_CAP) -> bool:
    """Membership where guard queries are answered by VASS run search."""
    return member(hcs, word, max_configs)


def complete_vass(vass: Vass, sink_name: str = "vsink") -> Vass:
    """Structural completion: missing (state, symbol) pairs move to a
    non-accepting sink with zero counter effect. Preserves determinism."""
    keys = {(src, label) for src, label, _, _ in vass.transitions if label is not None}
    missing = [
        (q, a)
        for q in range(len(vass.states))
        for a in range(len(vass.alphabet))
        if (q, a) not in keys
    ]
    if not missing:
        return vass
    name = sink_name
    while name in vass.states:
        name = "_" + name
    sink = len(vass.states)
    zero = (0,) * vass.dim
    transitions = list(vass.transitions)
    transitions += [(q, a, zero, sink) for q, a in missing]
    transitions += [(sink, a, zero, sink) for a in range(len(vass.alphabet))]
    return Vass(
        alphabet=vass.alphabet,
        dim=vass.dim,
        states=vass.states + (name,),
        initial=vass.initial,
        accepting=vass.accepting,
        transitions=tuple(transitions),
        mode=vass.mode,
    )


def _cover_dvass_guards(hcs: Hcs, operation: str) -> dict[str, Vass]:
    guards: dict[str, Vass] = {}
    for name, guard in hcs.guards.items():
        if guard_kind(guard) != "vass":
            raise UnsupportedGuardError(f"{operation} requires VASS guards; {name!r} is not one")
        if guard.mode != COVER:
            raise UnsupportedGuardError(f"{operation} requires cover-mode guards; {name!r} is reach")
        guards[name] = guard
    return guards


def product_vass(hcs: Hcs, assume_non_dying: bool = False) -> Vass:
    """Product of the underlying automaton with all cover-DVASS guards.

    States are (underlying state, guard states ...) tuples; the counters of
    all guards are stacked into one vector and a single fresh final state is
    reached by zero-effect epsilon moves from accepting tuples. Structural
    incompleteness is repaired with sinks, but a guard that can die makes
    the product miss runs, so the caller must assert non-dying guards.
    """
    guards = _cover_dvass_guards(hcs, "product_vass")
    for name, guard in guards.items():
        if not guard.deterministic:
            raise UnsupportedGuardError(f"product_vass requires deterministic guards; {name!r} is not")
    if not assume_non_dying:
        raise ContractError(
            "product_vass is only faithful for guards that cannot die; "
            "pass assume_non_dying=True to assert this"
        )
    names = hcs.guard_names()
    completed = [complete_vass(guards[name]) for name in names]
    index_of = {name: i for i, name in enumerate(names)}
    dims = [g.dim for g in completed]
    total_dim = sum(dims) if dims else 1
    zero = (0,) * total_dim

    # Deterministic per-guard step tables over the completed guards.
    step: list[dict[tuple[int, int], tuple[int, tuple[int, ...]]]] = []
    for g in completed:
        table = {}
        for src, label, update, dst in g.transitions:
            table[(src, label)] = (dst, update)
        step.append(table)

    auto = hcs.underlying
    start = (auto.initial,) + tuple(g.initial for g in completed)
    order: dict[tuple[int, ...], int] = {start: 0}
    tuples = [start]
    transitions: list[tuple[int, Optional[int], tuple[int, ...], int]] = []
    queue = deque([0])

    def tuple_id(node: tuple[int, ...]) -> int:
        if node not in order:
            order[node] = len(order)
            tuples.append(node)
            queue.append(order[node])
        return order[node]

    by_src: dict[int, list[tuple[int, Optional[int], int]]] = {}
    for t, (src, label, dst) in enumerate(auto.transitions):
        by_src.setdefault(src, []).append((t, label, dst))
    while queue:
        v = queue.popleft()
        node = tuples[v]
        q, guard_states = node[0], node[1:]
        for t, label, dst in by_src.get(q, ()):
            gname = hcs.guarded.get(t)
            if gname is not None:
                gi = index_of[gname]
                if guard_states[gi] not in completed[gi].accepting:
                    continue
            if label is None:
                transitions.append((v, None, zero, tuple_id((dst,) + guard_states)))
                continue
            new_states = []
            update: list[int] = []
            for gi, g in enumerate(completed):
                nxt, u = step[gi][(guard_states[gi], label)]
                new_states.append(nxt)
                update.extend(u)
            if not completed:
                update = [0] * total_dim
            transitions.append((v, label, tuple(update), tuple_id((dst,) + tuple(new_states))))

    final = len(tuples)
    names_out = ["(" + " ".join([auto.states[n[0]]] + [
        completed[i].states[s] for i, s in enumerate(n[1:])
    ]) + ")" for n in tuples]
    names_out.append("t")
    for v, node in enumerate(tuples):
        if node[0] in auto.accepting:
            transitions.append((v, None, zero, final))
    return Vass(
        alphabet=hcs.alphabet,
        dim=total_dim,
        states=tuple(names_out),
        initial=0,
        accepting=frozenset({final}),
        transitions=tuple(transitions),
        mode=COVER,
    )


def hcs_cover_empty(
    hcs: Hcs,
    engine: str = "onthefly",
    node_cap: int = DEFAULT_NODE_CAP,
    assume_non_dying: bool = False,
) -> bool:
    """Emptiness for an HCS with cover-VASS guards.

    The default on-the-fly engine explores (state, per-guard configuration)
    tuples with Karp-Miller acceleration; dead guards are tracked exactly, so
    dying guards need no caller assertion. Non-deterministic guards fall back
    to an exact set-of-configurations search that reports non-emptiness as
    soon as a witness depth is reached but raises at the cap instead of ever
    guessing "empty".
    """
    guards = _cover_dvass_guards(hcs, "hcs_cover_empty")
    if engine == "product":
        product = product_vass(hcs, assume_non_dying=assume_non_dying)
        final = len(product.states) - 1
        instance = CoverabilityInstance(
            vass=product,
            source=product.initial,
            target=final,
            target_counters=(0,) * product.dim,
        )
        return not decide_coverability(instance, "km", node_cap).coverable
    if engine != "onthefly":
        raise InputError(f"unknown emptiness engine {engine!r}")
    if all(g.deterministic for g in guards.values()):
        return _onthefly_empty_deterministic(hcs, node_cap)
    return _onthefly_empty_sets(hcs, node_cap)


DEAD = "dead"


def _onthefly_empty_deterministic(hcs: Hcs, node_cap: int) -> bool:
    """Karp-Miller style exploration with per-guard config-or-dead entries."""
    names = hcs.guard_names()
    completed = [complete_vass(hcs.guards[name]) for name in names]
    index_of = {name: i for i, name in enumerate(names)}
    step: list[dict[tuple[int, int], tuple[int, tuple[int, ...]]]] = []
    for g in completed:
        step.append({(src, label): (dst, update) for src, label, update, dst in g.transitions})
    auto = hcs.underlying
    by_src: dict[int, list[tuple[int, Optional[int], int]]] = {}
    for t, (src, label, dst) in enumerate(auto.transitions):
        by_src.setdefault(src, []).append((t, label, dst))

    def guard_step(gi: int, state, label: int):
        if state == DEAD:
            return DEAD
        s, counters = state
        dst, update = step[gi][(s, label)]
        nxt = tuple(c + u for c, u in zip(counters, update))
        if any(c < 0 for c in nxt):
            return DEAD
        return (dst, nxt)

    def accepting_guard(gi: int, state) -> bool:
        return state != DEAD and state[0] in completed[gi].accepting

    @dataclass
    class Node:
        control: tuple  # (q, ((state, counters) | DEAD, ...))
        parent: Optional[int]

    start = (auto.initial, tuple((g.initial, (0,) * g.dim) for g in completed))
    if auto.initial in auto.accepting:
        return False
    nodes = [Node(start, None)]
    queue = deque([0])
    while queue:
        v = queue.popleft()
        q, guard_states = nodes[v].control
        # Leaf rule: equal to an ancestor.
        cur = nodes[v].parent
        is_leaf = False
        while cur is not None:
            if nodes[cur].control == nodes[v].control:
                is_leaf = True
                break
            cur = nodes[cur].parent
        if is_leaf:
            continue
        for t, label, dst in by_src.get(q, ()):
            gname = hcs.guarded.get(t)
            if gname is not None and not accepting_guard(index_of[gname], guard_states[index_of[gname]]):
                continue
            if label is None:
                advanced = guard_states
            else:
                advanced = tuple(guard_step(gi, gs, label) for gi, gs in enumerate(guard_states))
            advanced = _accelerate_guards(nodes, v, dst, advanced)
            if dst in auto.accepting:
                return False
            if len(nodes) >= node_cap:
                raise ResourceLimitError(f"on-the-fly exploration exceeded {node_cap} nodes", node_cap)
            nodes.append(Node((dst, advanced), v))
            queue.append(len(nodes) - 1)
    return True


def _accelerate_guards(nodes, parent: int, dst: int, guard_states: tuple) -> tuple:
    """Omega-accelerate strictly grown counters against tree ancestors.

    Only guards alive in both configurations with the same control state are
    compared; a dead entry sits below every live one, so growth through
    death cannot be pumped and is simply left alone.
    """
    current = guard_states
    changed = True
    while changed:
        changed = False
        cur = parent
        while cur is not None:
            aq, astates = nodes[cur].control
            if aq == dst and _guardvec_leq(astates, current):
                grown = []
                for gi, (old, new) in enumerate(zip(astates, current)):
                    if old == DEAD or new == DEAD:
                        continue
                    comps = [
                        j
                        for j, (x, y) in enumerate(zip(old[1], new[1]))
                        if y != inf and x < y
                    ]
                    if comps:
                        grown.append((gi, comps))
                if grown:
                    updated = list(current)
                    for gi, comps in grown:
                        state, counters = updated[gi]
                        vec = list(counters)
                        for j in comps:
                            vec[j] = inf
                        updated[gi] = (state, tuple(vec))
                    current = tuple(updated)
                    changed = True
                    break
            cur = nodes[cur].parent
    return current


def _guardvec_leq(a: tuple, b: tuple) -> bool:
    for x, y in zip(a, b):
        if x == DEAD:
            continue  # dead sits below everything
        if y == DEAD or x[0] != y[0]:
            return False
        if any(p > q for p, q in zip(x[1], y[1])):
            return False
    return True


def _onthefly_empty_sets(hcs: Hcs, node_cap: int) -> bool:
    """Exact exploration for non-deterministic cover-VASS guards.

    Tracks the full configuration set of every guard, so both verdicts are
    sound when the search space is finite; unbounded counter growth hits the
    node cap instead of producing an unsound "empty".
    """
    semantics = HcsSemantics(hcs, node_cap)
    start = (hcs.underlying.initial, tuple(tr.initial() for tr in semantics.trackers))
    seen = {start}
    queue = deque([start])
    accepting = hcs.underlying.accepting
    while queue:
        q, guard_states = queue.popleft()
        if q in accepting:
            return False
        successors = []
        for dst, g in semantics.eps_edges.get(q, ()):
            if semantics._guard_ok(guard_states, g):
                successors.append((dst, guard_states))
        for a in range(len(hcs.alphabet)):
            advanced = None
            for dst, g in semantics.sigma_edges.get((q, a), ()):
                if semantics._guard_ok(guard_states, g):
                    if advanced is None:
                        advanced = tuple(
                            tr.step(s, a) for tr, s in zip(semantics.trackers, guard_states)
                        )
                    successors.append((dst, advanced))
        for node in successors:
            if node not in seen:
                if len(seen) >= node_cap:
                    raise ResourceLimitError(
                        f"set-based exploration exceeded {node_cap} configurations "
                        "(emptiness of non-deterministic cover-VASS guards is a semi-decision)",
                        node_cap,
                    )
                seen.add(node)
                queue.append(node)
    return True


# ---------------------------------------------------------------------------
# Two-counter machines

ACTIONS = ("inc1", "dec1", "zero1", "inc2", "dec2", "zero2")


@dataclass(frozen=True)
class TwoCounterMachine:
    """A Minsky machine: increment, guarded decrement, and zero tests."""

    states: tuple[str, ...]
    transitions: tuple[tuple[int, str, int], ...]
    source: int
    target: int

    def __post_init__(self):
        n = len(self.states)
        if len(set(self.states)) != n:
            raise InputError("duplicate state names")
        if not (0 <= self.source < n and 0 <= self.target < n):
            raise InputError("source/target state index out of range")
        seen = set()
        for src, action, dst in self.transitions:
            if action not in ACTIONS:
                raise InputError(f"unknown action {action!r}")
            if not (0 <= src < n and 0 <= dst < n):
                raise InputError("transition state index out of range")
            if (src, action) in seen:
                raise InputError(
                    f"action determinacy violated: two {action!r} transitions from "
                    f"{self.states[src]!r}"
                )
            seen.add((src, action))


def two_counter_run_words(machine: TwoCounterMachine, max_len: int) -> frozenset[tuple[str, ...]]:
    """Action sequences of runs (source, (0,0)) -> (target, (0,0)), by length."""
    accepted: set[tuple[str, ...]] = set()
    frontier: list[tuple[int, int, int, tuple[str, ...]]] = [(machine.source, 0, 0, ())]
    for _ in range(max_len + 1):
        nxt = []
        for state, c1, c2, word in frontier:
            if state == machine.target and c1 == 0 and c2 == 0:
                accepted.add(word)
            if len(word) == max_len:
                continue
            for src, action, dst in machine.transitions:
                if src != state:
                    continue
                d1, d2 = c1, c2
                if action == "inc1":
                    d1 += 1
                elif action == "inc2":
                    d2 += 1
                elif action == "dec1":
                    if c1 == 0:
                        continue
                    d1 -= 1
                elif action == "dec2":
                    if c2 == 0:
                        continue
                    d2 -= 1
                elif action == "zero1" and c1 != 0:
                    continue
                elif action == "zero2" and c2 != 0:
                    continue
                nxt.append((dst, d1, d2, word + (action,)))
        frontier = nxt
        if not frontier:
            break
    return frozenset(accepted)


def _counter_tracker(counter: int) -> Vass:
    """One-state reach-acceptance 1-VASS tracking one 2CM counter."""
    alpha = Alphabet(ACTIONS)
    transitions = []
    for action in ACTIONS:
        if action == f"inc{counter}":
            update = (1,)
        elif action == f"dec{counter}":
            update = (-1,)
        else:
            update = (0,)
        transitions.append((0, alpha.index(action), update, 0))
    return Vass(
        alphabet=alpha,
        dim=1,
        states=(f"track{counter}",),
        initial=0,
        accepting=frozenset({0}),
        transitions=tuple(transitions),
        mode=REACH,
    )


def two_cm_to_hcs(machine: TwoCounterMachine) -> Hcs:
    """Translate 2CM reachability into language emptiness with reach guards.

    The underlying DFA mirrors the machine; two appended zero tests route
    the old target through fresh states r and s, so acceptance forces both
    counters back to exactly zero. Every zero-test transition is guarded by
    the matching counter tracker.
    """
    if any(src == machine.target and action == "zero1" for src, action, _ in machine.transitions):
        raise InputError(
            "the target state already has a zero1 transition; "
            "the appended zero-test tail would break action determinacy"
        )
    alpha = Alphabet(ACTIONS)
    states = list(machine.states)

    def fresh(base: str) -> int:
        name = base
        while name in states:
            name = "_" + name
        states.append(name)
        return len(states) - 1

    r = fresh("r")
    s = fresh("s")
    transitions: list[tuple[int, Optional[int], int]] = [
        (src, alpha.index(action), dst) for src, action, dst in machine.transitions
    ]
    guarded: dict[int, str] = {}
    for t, (src, action, dst) in enumerate(machine.transitions):
        if action == "zero1":
            guarded[t] = "G1"
        elif action == "zero2":
            guarded[t] = "G2"
    guarded[len(transitions)] = "G1"
    transitions.append((machine.target, alpha.index("zero1"), r))
    guarded[len(transitions)] = "G2"
    transitions.append((r, alpha.index("zero2"), s))
    underlying = FiniteAutomaton(
        alphabet=alpha,
        states=tuple(states),
        initial=machine.source,
        accepting=frozenset({s}),
        transitions=tuple(transitions),
    )
    return Hcs(alpha, underlying, {"G1": _counter_tracker(1), "G2": _counter_tracker(2)}, guarded)


@dataclass(frozen=True)
class BoundedEmptiness:
    """Outcome of the bounded semi-decision: a witness or "unknown up to"."""

    status: str  # "nonempty" | "unknown"
    witness: Optional[tuple[str, ...]]
    max_len: int

    @property
    def nonempty(self) -> bool:
        return self.status == "nonempty"


def bounded_reach_empty(hcs: Hcs, max_len: int, node_cap: int = DEFAULT_NODE_CAP) -> BoundedEmptiness:
    """Exhaustive configuration search over words up to ``max_len``.

    Never answers "empty": it either finds an accepted word or reports that
    none exists up to the bound.
    """
    semantics = HcsSemantics(hcs, node_cap)
    accepting = hcs.underlying.accepting

    def closure(layer: dict) -> None:
        stack = list(layer)
        while stack:
            q, guard_states = stack.pop()
            for dst, g in semantics.eps_edges.get(q, ()):
                node = (dst, guard_states)
                if node not in layer and semantics._guard_ok(guard_states, g):
                    layer[node] = layer[(q, guard_states)]
                    stack.append(node)

    start = (hcs.underlying.initial, tuple(tr.initial() for tr in semantics.trackers))
    layer: dict[tuple, tuple[str, ...]] = {start: ()}
    closure(layer)
    seen_words = 0
    for depth in range(max_len + 1):
        for (q, _), word in layer.items():
            if q in accepting:
                return BoundedEmptiness("nonempty", word, max_len)
        if depth == max_len:
            break
        nxt: dict[tuple, tuple[str, ...]] = {}
        for (q, guard_states), word in layer.items():
            for a in range(len(hcs.alphabet)):
                advanced = None
                for dst, g in semantics.sigma_edges.get((q, a), ()):
                    if semantics._guard_ok(guard_states, g):
                        if advanced is None:
                            advanced = tuple(
                                tr.step(s, a) for tr, s in zip(semantics.trackers, guard_states)
                            )
                        node = (dst, advanced)
                        if node not in nxt:
                            nxt[node] = word + (hcs.alphabet.symbols[a],)
        closure(nxt)
        seen_words += len(nxt)
        if seen_words > node_cap:
            raise ResourceLimitError(f"bounded search exceeded {node_cap} configurations", node_cap)
        layer = nxt
    return BoundedEmptiness("unknown", None, max_len)


def delimited_star_hcs(vass: Vass) -> Hcs:
    """Recognize the delimited Kleene star of a cover-VASS language.

    The outer DFA accepts a single delimiter or delimiter-separated blocks;
    the guard is the input VASS behind a fresh initial state that skips any
    prefix and enters the original machine at the last delimiter, so each
    guard query checks exactly the most recent block. When the block
    language contains the empty word, consecutive delimiters close an empty
    block: that case is a fact about the language, not the history, so it
    becomes an unguarded self-loop.
    """
    if vass.mode != COVER:
        raise ContractError("the delimited star construction takes a cover-mode VASS")
    if "$" in vass.alphabet:
        raise InputError('the VASS alphabet already contains "$"')
    extended = Alphabet(vass.alphabet.symbols + ("$",))
    dollar = extended.index("$")
    n_sigma = len(vass.alphabet)

    guard_states = ["p0"]
    for name in vass.states:
        display = name
        while display in guard_states:
            display = "_" + display
        guard_states.append(display)
    zero = (0,) * vass.dim
    guard_transitions = [(0, a, zero, 0) for a in range(len(extended))]
    guard_transitions.append((0, dollar, zero, vass.initial + 1))
    guard_transitions += [
        (src + 1, label, update, dst + 1) for src, label, update, dst in vass.transitions
    ]
    guard = Vass(
        alphabet=extended,
        dim=vass.dim,
        states=tuple(guard_states),
        initial=0,
        accepting=frozenset(q + 1 for q in vass.accepting),
        transitions=tuple(guard_transitions),
        mode=COVER,
    )

    transitions: list[tuple[int, Optional[int], int]] = [(0, dollar, 1)]
    transitions += [(1, a, 2) for a in range(n_sigma)]
    transitions += [(2, a, 2) for a in range(n_sigma)]
    guarded = {len(transitions): "block"}
    transitions.append((2, dollar, 1))
    empty_block_ok = any(config_accepting(vass, q, c) for q, c in initial_configs(vass))
    if empty_block_ok:
        transitions.append((1, dollar, 1))
    underlying = FiniteAutomaton(
        alphabet=extended,
        states=("before", "after_delim", "in_block"),
        initial=0,
        accepting=frozenset({1}),
        transitions=tuple(transitions),
    )
    return Hcs(extended, underlying, {"block": guard}, guarded)
