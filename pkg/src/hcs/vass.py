"""Vector addition systems with states: semantics and coverability engines.

A VASS is a finite control with d counters that stay non-negative; a
transition fires only when the updated counters are all >= 0. Acceptance is
either "cover" (accepting control state, counters unconstrained) or "reach"
(accepting state with all counters exactly zero).

Coverability is decided exactly by two engines: a Karp-Miller tree with
omega-acceleration, and backward search over upward-closed sets represented
by their minimal basis vectors. Both return a replayable firing sequence
when the target is coverable.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from math import ceil, inf
from typing import Iterable, Optional, Sequence

from .automata import Alphabet
from .errors import ContractError, InputError, ResourceLimitError

COVER = "cover"
REACH = "reach"

#: Default cap on explored configurations/nodes.
DEFAULT_NODE_CAP = 1_000_000


@dataclass(frozen=True)
class Vass:
    """A d-dimensional VASS over a named alphabet.

    Transitions are (from-state, label, update, to-state) with label a symbol
    index or None for epsilon and update an integer vector of length ``dim``.
    """

    alphabet: Alphabet
    dim: int
    states: tuple[str, ...]
    initial: int
    accepting: frozenset[int]
    transitions: tuple[tuple[int, Optional[int], tuple[int, ...], int], ...]
    mode: str = COVER
    deterministic: bool = field(init=False)

    def __post_init__(self):
        if self.dim < 1:
            raise InputError("VASS dimension must be at least 1")
        if self.mode not in (COVER, REACH):
            raise InputError(f"unknown VASS mode {self.mode!r}")
        n = len(self.states)
        if len(set(self.states)) != n:
            raise InputError("duplicate state names")
        if not 0 <= self.initial < n:
            raise InputError("initial state index out of range")
        if any(not 0 <= q < n for q in self.accepting):
            raise InputError("accepting state index out of range")
        keys = []
        for src, label, update, dst in self.transitions:
            if not (0 <= src < n and 0 <= dst < n):
                raise InputError("transition state index out of range")
            if label is not None and not 0 <= label < len(self.alphabet):
                raise InputError("transition label index out of range")
            if len(update) != self.dim or not all(isinstance(u, int) for u in update):
                raise InputError(f"update vector {update} does not have dimension {self.dim}")
            keys.append((src, label))
        det = all(label is not None for _, label, _, _ in self.transitions) and len(set(keys)) == len(keys)
        object.__setattr__(self, "deterministic", det)

    def unary_size(self) -> int:
        """Unary size: states plus, per transition, the largest |update| (at least 1)."""
        total = len(self.states)
        for _, _, update, _ in self.transitions:
            total += max(1, *(abs(u) for u in update)) if update else 1
        return total

    def state_index(self, name: str) -> int:
        try:
            return self.states.index(name)
        except ValueError:
            raise InputError(f"unknown state {name!r}") from None


def _fire(counters: tuple[int, ...], update: tuple[int, ...]) -> Optional[tuple[int, ...]]:
    out = tuple(c + u for c, u in zip(counters, update))
    if any(c < 0 for c in out):
        return None
    return out


def config_accepting(vass: Vass, state: int, counters: tuple[int, ...]) -> bool:
    """Acceptance of a single configuration under the VASS's mode."""
    if state not in vass.accepting:
        return False
    if vass.mode == REACH:
        return all(c == 0 for c in counters)
    return True


def eps_closure_configs(
    vass: Vass,
    configs: Iterable[tuple[int, tuple[int, ...]]],
    max_configs: int = DEFAULT_NODE_CAP,
) -> frozenset[tuple[int, tuple[int, ...]]]:
    """Close a configuration set under epsilon transitions.

    Epsilon cycles with positive counter effect make this set infinite; we
    fail loudly at the cap instead of looping.
    """
    closure = set(configs)
    stack = list(closure)
    eps = [(src, update, dst) for src, label, update, dst in vass.transitions if label is None]
    while stack:
        state, counters = stack.pop()
        for src, update, dst in eps:
            if src != state:
                continue
            nxt = _fire(counters, update)
            if nxt is None:
                continue
            cfg = (dst, nxt)
            if cfg not in closure:
                if len(closure) >= max_configs:
                    raise ResourceLimitError(
                        f"epsilon closure exceeded {max_configs} configurations", max_configs
                    )
                closure.add(cfg)
                stack.append(cfg)
    return frozenset(closure)


def step_configs(
    vass: Vass,
    configs: Iterable[tuple[int, tuple[int, ...]]],
    symbol: int,
    max_configs: int = DEFAULT_NODE_CAP,
) -> frozenset[tuple[int, tuple[int, ...]]]:
    """All configurations reachable by reading one symbol (plus epsilon moves)."""
    nxt = set()
    for state, counters in configs:
        for src, label, update, dst in vass.transitions:
            if src != state or label != symbol:
                continue
            fired = _fire(counters, update)
            if fired is not None:
                nxt.add((dst, fired))
    return eps_closure_configs(vass, nxt, max_configs)


def initial_configs(vass: Vass, max_configs: int = DEFAULT_NODE_CAP) -> frozenset[tuple[int, tuple[int, ...]]]:
    return eps_closure_configs(vass, [(vass.initial, (0,) * vass.dim)], max_configs)


def vass_accepts(vass: Vass, word: Sequence[str], max_configs: int = DEFAULT_NODE_CAP) -> bool:
    """Exhaustive run search: does some run over ``word`` end accepting?

    Counters on a length-n run are bounded by n times the largest update, so
    the search space is finite for models without effectful epsilon cycles.
    """
    indices = [vass.alphabet.index(sym) for sym in word]
    configs = initial_configs(vass, max_configs)
    for a in indices:
        configs = step_configs(vass, configs, a, max_configs)
        if not configs:
            return False
    return any(config_accepting(vass, q, c) for q, c in configs)


def bounded_accepted_word(
    vass: Vass, max_len: int, max_configs: int = DEFAULT_NODE_CAP
) -> Optional[list[str]]:
    """Shortest accepted word of length at most ``max_len``, if any."""
    configs = initial_configs(vass, max_configs)
    words: dict[tuple[int, tuple[int, ...]], list[str]] = {c: [] for c in configs}
    for depth in range(max_len + 1):
        for (q, counters), word in words.items():
            if config_accepting(vass, q, counters):
                return word
        if depth == max_len:
            break
        nxt: dict[tuple[int, tuple[int, ...]], list[str]] = {}
        for (q, counters), word in words.items():
            for a in range(len(vass.alphabet)):
                for cfg in step_configs(vass, [(q, counters)], a, max_configs):
                    if cfg not in nxt:
                        nxt[cfg] = word + [vass.alphabet.symbols[a]]
        words = nxt
        if not words:
            break
    return None


@dataclass(frozen=True)
class CoverabilityInstance:
    """Cover ``target`` (state, counter lower bounds) from (source, source_counters)."""

    vass: Vass
    source: int
    target: int
    target_counters: tuple[int, ...]
    source_counters: tuple[int, ...] = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.vass.mode != COVER:
            raise ContractError("coverability is defined for cover-mode VASS")
        if self.source_counters is None:
            object.__setattr__(self, "source_counters", (0,) * self.vass.dim)
        if len(self.target_counters) != self.vass.dim or len(self.source_counters) != self.vass.dim:
            raise InputError("counter vectors must match the VASS dimension")
        if any(c < 0 for c in self.target_counters) or any(c < 0 for c in self.source_counters):
            raise InputError("counter vectors must be non-negative")


@dataclass(frozen=True)
class CoverabilityResult:
    coverable: bool
    witness: Optional[tuple[int, ...]]  # transition indices, replayable from the source
    engine: str
    nodes_explored: int

    def witness_word(self, vass: Vass) -> Optional[list[str]]:
        """Witness as a symbol list ("eps" for epsilon-labelled transitions)."""
        if self.witness is None:
            return None
        out = []
        for t in self.witness:
            label = vass.transitions[t][1]
            out.append("eps" if label is None else vass.alphabet.symbols[label])
        return out


def replay_transitions(
    vass: Vass, start: tuple[int, tuple[int, ...]], firing: Sequence[int]
) -> tuple[int, tuple[int, ...]]:
    """Replay a firing sequence under step semantics; raises if a step is illegal."""
    state, counters = start
    for t in firing:
        src, _, update, dst = vass.transitions[t]
        if src != state:
            raise InputError(f"transition {t} does not start in state {vass.states[state]}")
        fired = _fire(counters, update)
        if fired is None:
            raise InputError(f"transition {t} would drive a counter negative at {counters}")
        state, counters = dst, fired
    return state, counters


def decide_coverability(
    instance: CoverabilityInstance,
    engine: str = "km",
    node_cap: int = DEFAULT_NODE_CAP,
) -> CoverabilityResult:
    """Decide coverability with the requested engine ("km" or "backward")."""
    if engine in ("km", "karp-miller", "karpmiller"):
        return _karp_miller(instance, node_cap)
    if engine == "backward":
        return _backward(instance, node_cap)
    raise InputError(f"unknown coverability engine {engine!r}")


# ---------------------------------------------------------------------------
# Karp-Miller tree


@dataclass
class _Node:
    state: int
    vec: tuple  # entries are ints or math.inf (omega)
    parent: Optional[int]
    via: Optional[int]  # transition index from parent
    # accelerations applied at creation, in order: (cycle transitions, pre-omega vec)
    accels: list


def _vec_leq(a: tuple, b: tuple) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _karp_miller(instance: CoverabilityInstance, node_cap: int) -> CoverabilityResult:
    vass = instance.vass
    by_state: dict[int, list[int]] = {}
    for i, (src, _, _, _) in enumerate(vass.transitions):
        by_state.setdefault(src, []).append(i)

    nodes: list[_Node] = [_Node(instance.source, tuple(instance.source_counters), None, None, [])]
    queue = deque([0])
    explored = 0
    while queue:
        idx = queue.popleft()
        node = nodes[idx]
        explored += 1
        if node.state == instance.target and _vec_leq(instance.target_counters, node.vec):
            witness = _km_witness(vass, nodes, idx, instance)
            return CoverabilityResult(True, tuple(witness), "km", explored)
        # Leaf rule: a node equal to a strict ancestor is not expanded.
        if _has_equal_ancestor(nodes, idx):
            continue
        for t in by_state.get(node.state, ()):
            _, _, update, dst = vass.transitions[t]
            vec = tuple(v + u for v, u in zip(node.vec, update))
            if any(v < 0 for v in vec):
                continue
            if len(nodes) >= node_cap:
                raise ResourceLimitError(f"Karp-Miller tree exceeded {node_cap} nodes", node_cap)
            child = _Node(dst, vec, idx, t, [])
            nodes.append(child)
            _accelerate(vass, nodes, len(nodes) - 1)
            queue.append(len(nodes) - 1)
    return CoverabilityResult(False, None, "km", explored)


def _has_equal_ancestor(nodes: list[_Node], idx: int) -> bool:
    node = nodes[idx]
    cur = node.parent
    while cur is not None:
        anc = nodes[cur]
        if anc.state == node.state and anc.vec == node.vec:
            return True
        cur = anc.parent
    return False


def _accelerate(vass: Vass, nodes: list[_Node], idx: int) -> None:
    """Set strictly-grown components to omega, recording the pumping cycles."""
    node = nodes[idx]
    changed = True
    while changed:
        changed = False
        cur = node.parent
        while cur is not None:
            anc = nodes[cur]
            if anc.state == node.state and _vec_leq(anc.vec, node.vec):
                # Omega entries are inherited along the path, so a component
                # finite at the node is finite at every ancestor too.
                comps = [j for j in range(vass.dim) if node.vec[j] != inf and anc.vec[j] < node.vec[j]]
                if comps:
                    cycle = _path_transitions(nodes, cur, idx)
                    node.accels.append((tuple(cycle), tuple(node.vec)))
                    vec = list(node.vec)
                    for j in comps:
                        vec[j] = inf
                    node.vec = tuple(vec)
                    changed = True
                    break
            cur = anc.parent


def _path_transitions(nodes: list[_Node], ancestor: int, idx: int) -> list[int]:
    out: list[int] = []
    cur = idx
    while cur != ancestor:
        node = nodes[cur]
        out.append(node.via)
        cur = node.parent
    out.reverse()
    return out


def _cycle_effect(vass: Vass, cycle: Sequence[int]) -> list[int]:
    eff = [0] * vass.dim
    for t in cycle:
        update = vass.transitions[t][2]
        for j in range(vass.dim):
            eff[j] += update[j]
    return eff


def _firing_requirement(vass: Vass, firing: Sequence[int]) -> list[int]:
    """Minimal start vector from which the sequence fires once."""
    req = [0] * vass.dim
    running = [0] * vass.dim
    for t in firing:
        update = vass.transitions[t][2]
        for j in range(vass.dim):
            running[j] += update[j]
            if -running[j] > req[j]:
                req[j] = -running[j]
    return req


def _km_witness(
    vass: Vass, nodes: list[_Node], idx: int, instance: CoverabilityInstance
) -> list[int]:
    """Expand a covering tree branch into a concrete firing sequence.

    Accelerated segments are pumped a computed number of times, working
    backwards from the target vector so every intermediate requirement is met.
    """
    path: list[int] = []
    cur = idx
    while cur is not None:
        path.append(cur)
        cur = nodes[cur].parent
    path.reverse()

    needed = list(instance.target_counters)
    seq: list[int] = []
    for node_idx in reversed(path[1:]):
        node = nodes[node_idx]
        for cycle, pre_vec in reversed(node.accels):
            effect = _cycle_effect(vass, cycle)
            req = _firing_requirement(vass, cycle)
            k = 0
            for j in range(vass.dim):
                base = pre_vec[j]
                if base == inf or effect[j] <= 0:
                    continue
                if needed[j] > base:
                    k = max(k, ceil((needed[j] - base) / effect[j]))
            if k > 0:
                seq[0:0] = list(cycle) * k
                for j in range(vass.dim):
                    lowest_start = req[j] + (k - 1) * max(0, -effect[j])
                    needed[j] = max(0, lowest_start, needed[j] - k * effect[j])
        update = vass.transitions[node.via][2]
        needed = [max(0, -u, nd - u) for nd, u in zip(needed, update)]
        seq.insert(0, node.via)
    if any(nd > have for nd, have in zip(needed, instance.source_counters)):
        raise AssertionError("witness reconstruction produced an infeasible requirement")
    return seq


# ---------------------------------------------------------------------------
# Backward coverability over upward-closed sets


def _backward(instance: CoverabilityInstance, node_cap: int) -> CoverabilityResult:
    vass = instance.vass
    into_state: dict[int, list[int]] = {}
    for i, (_, _, _, dst) in enumerate(vass.transitions):
        into_state.setdefault(dst, []).append(i)

    # Minimal basis of configurations from which the target is coverable,
    # each carrying a firing sequence that works from anything above it.
    basis: dict[int, list[tuple[tuple[int, ...], tuple[int, ...]]]] = {
        instance.target: [(tuple(instance.target_counters), ())]
    }
    worklist = deque([(instance.target, tuple(instance.target_counters), ())])
    explored = 0
    while worklist:
        state, vec, seq = worklist.popleft()
        if (vec, seq) not in basis.get(state, []):
            continue  # pruned while queued
        explored += 1
        if explored > node_cap:
            raise ResourceLimitError(f"backward coverability exceeded {node_cap} elements", node_cap)
        for t in into_state.get(state, ()):
            src, _, update, _ = vass.transitions[t]
            pred = tuple(max(0, -u, v - u) for v, u in zip(vec, update))
            entry = (pred, (t,) + seq)
            existing = basis.setdefault(src, [])
            if any(_vec_leq(old, pred) for old, _ in existing):
                continue
            basis[src] = [(old, s) for old, s in existing if not _vec_leq(pred, old)]
            basis[src].append(entry)
            worklist.append((src, pred, entry[1]))
    for vec, seq in basis.get(instance.source, []):
        if _vec_leq(vec, instance.source_counters):
            return CoverabilityResult(True, seq, "backward", explored)
    return CoverabilityResult(False, None, "backward", explored)
