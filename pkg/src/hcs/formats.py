"""The canonical JSON document formats binding all model types together.

Each document is an object with a "type" field in {nfa, dfa, hcs, game,
vass, countdown, 2cm}. Parsing is strict: unknown fields are rejected,
"eps" is reserved for epsilon labels, and "$" is an ordinary symbol.
Round trips are stable (parse(serialize(x)) equals x structurally);
``canonicalize`` additionally sorts transition lists so that fmt output is
byte-identical for structurally equal models.
"""

from __future__ import annotations

import json
from typing import Any, Optional

from .automata import EPS_NAME, Alphabet, FiniteAutomaton
from .core import Hcs
from .errors import InputError
from .games import CountdownGame, HcsGame, Objective
from .vass import Vass
from .vassguards import ACTIONS, TwoCounterMachine

Model = Any  # FiniteAutomaton | Hcs | HcsGame | Vass | CountdownGame | TwoCounterMachine


def _expect_keys(doc: dict, context: str, required: tuple[str, ...], optional: tuple[str, ...] = ()):
    missing = [k for k in required if k not in doc]
    if missing:
        raise InputError(f"{context}: missing fields {missing}")
    unknown = [k for k in doc if k not in required and k not in optional]
    if unknown:
        raise InputError(f"{context}: unknown fields {unknown}")


def _state_index(states: list[str], name: Any, context: str) -> int:
    if name not in states:
        raise InputError(f"{context}: unknown state {name!r}")
    return states.index(name)


def _label_index(alpha: Alphabet, label: Any, context: str) -> Optional[int]:
    if label == EPS_NAME:
        return None
    if not isinstance(label, str) or label not in alpha:
        raise InputError(f"{context}: unknown symbol {label!r}")
    return alpha.index(label)


# ---------------------------------------------------------------------------
# Serialization


def _automaton_fields(fa: FiniteAutomaton) -> dict:
    return {
        "alphabet": list(fa.alphabet.symbols),
        "states": list(fa.states),
        "initial": fa.states[fa.initial],
        "accepting": [fa.states[q] for q in sorted(fa.accepting)],
        "transitions": [
            {
                "from": fa.states[src],
                "label": EPS_NAME if label is None else fa.alphabet.symbols[label],
                "to": fa.states[dst],
            }
            for src, label, dst in fa.transitions
        ],
    }


def _hcs_fields(hcs: Hcs) -> dict:
    doc = _automaton_fields(hcs.underlying)
    for idx, name in sorted(hcs.guarded.items()):
        doc["transitions"][idx]["guard"] = name
    doc["guards"] = {name: to_document(hcs.guards[name]) for name in sorted(hcs.guards)}
    return doc


def to_document(model: Model) -> dict:
    """Serialize any model value to its JSON document."""
    if isinstance(model, FiniteAutomaton):
        return {"type": "dfa" if model.deterministic else "nfa", **_automaton_fields(model)}
    if isinstance(model, HcsGame):
        doc = {"type": "game", **_hcs_fields(model.hcs)}
        states = model.hcs.underlying.states
        doc["owner"] = {states[q]: model.owner[q] for q in range(len(states))}
        doc["objective"] = {
            "kind": model.objective.kind,
            "states": [states[q] for q in sorted(model.objective.states)],
        }
        return doc
    if isinstance(model, Hcs):
        return {"type": "hcs", **_hcs_fields(model)}
    if isinstance(model, Vass):
        return {
            "type": "vass",
            "alphabet": list(model.alphabet.symbols),
            "dim": model.dim,
            "mode": model.mode,
            "states": list(model.states),
            "initial": model.states[model.initial],
            "accepting": [model.states[q] for q in sorted(model.accepting)],
            "transitions": [
                {
                    "from": model.states[src],
                    "label": EPS_NAME if label is None else model.alphabet.symbols[label],
                    "update": list(update),
                    "to": model.states[dst],
                }
                for src, label, update, dst in model.transitions
            ],
        }
    if isinstance(model, CountdownGame):
        return {
            "type": "countdown",
            "states": list(model.states),
            "initial": model.states[model.initial],
            "target": model.target,
            "edges": [
                {"from": model.states[src], "weight": weight, "to": model.states[dst]}
                for src, weight, dst in model.edges
            ],
        }
    if isinstance(model, TwoCounterMachine):
        return {
            "type": "2cm",
            "states": list(model.states),
            "transitions": [
                {"from": model.states[src], "action": action, "to": model.states[dst]}
                for src, action, dst in model.transitions
            ],
            "source": model.states[model.source],
            "target": model.states[model.target],
        }
    raise InputError(f"cannot serialize {type(model).__name__}")


# ---------------------------------------------------------------------------
# Parsing


def _parse_alphabet(doc: dict, context: str) -> Alphabet:
    symbols = doc["alphabet"]
    if not isinstance(symbols, list) or not all(isinstance(s, str) for s in symbols):
        raise InputError(f"{context}: alphabet must be a list of strings")
    return Alphabet(tuple(symbols))


def _parse_automaton(doc: dict, context: str, allow_guards: bool = False):
    alpha = _parse_alphabet(doc, context)
    states = doc["states"]
    if not isinstance(states, list) or not all(isinstance(s, str) for s in states):
        raise InputError(f"{context}: states must be a list of strings")
    initial = _state_index(states, doc["initial"], context)
    accepting = frozenset(_state_index(states, q, context) for q in doc["accepting"])
    transitions = []
    guarded: dict[int, str] = {}
    for i, entry in enumerate(doc["transitions"]):
        _expect_keys(
            entry,
            f"{context}: transition {i}",
            ("from", "label", "to"),
            ("guard",) if allow_guards else (),
        )
        src = _state_index(states, entry["from"], context)
        dst = _state_index(states, entry["to"], context)
        label = _label_index(alpha, entry["label"], context)
        transitions.append((src, label, dst))
        if allow_guards and "guard" in entry:
            guarded[i] = entry["guard"]
    automaton = FiniteAutomaton(
        alphabet=alpha,
        states=tuple(states),
        initial=initial,
        accepting=accepting,
        transitions=tuple(transitions),
    )
    return automaton, guarded


def _parse_hcs(doc: dict, context: str) -> Hcs:
    underlying, guarded = _parse_automaton(doc, context, allow_guards=True)
    guards = {}
    for name, guard_doc in doc.get("guards", {}).items():
        guards[name] = from_document(guard_doc)
        if isinstance(guards[name], (HcsGame, CountdownGame, TwoCounterMachine)):
            raise InputError(f"{context}: guard {name!r} must be an automaton, VASS, or HCS")
    return Hcs(underlying.alphabet, underlying, guards, guarded)


def from_document(doc: dict) -> Model:
    """Parse a JSON document into the corresponding model value."""
    if not isinstance(doc, dict) or "type" not in doc:
        raise InputError('a model document must be an object with a "type" field')
    kind = doc["type"]
    base = ("type", "alphabet", "states", "initial", "accepting", "transitions")
    if kind in ("nfa", "dfa"):
        _expect_keys(doc, kind, base)
        automaton, _ = _parse_automaton(doc, kind)
        if kind == "dfa" and not automaton.deterministic:
            raise InputError('document of type "dfa" is not deterministic')
        return automaton
    if kind == "hcs":
        _expect_keys(doc, kind, base, ("guards",))
        return _parse_hcs(doc, kind)
    if kind == "game":
        _expect_keys(doc, kind, base, ("guards", "owner", "objective"))
        hcs = _parse_hcs({k: v for k, v in doc.items() if k not in ("owner", "objective")}, kind)
        states = hcs.underlying.states
        owner_doc = doc.get("owner", {})
        owner = []
        for name in states:
            if name not in owner_doc:
                raise InputError(f"game: state {name!r} has no owner")
            if owner_doc[name] not in (0, 1):
                raise InputError(f"game: owner of {name!r} must be 0 or 1")
            owner.append(owner_doc[name])
        unknown_owners = [n for n in owner_doc if n not in states]
        if unknown_owners:
            raise InputError(f"game: owner map names unknown states {unknown_owners}")
        objective_doc = doc.get("objective")
        if objective_doc is None:
            raise InputError("game: missing objective")
        _expect_keys(objective_doc, "game objective", ("kind", "states"))
        objective = Objective(
            objective_doc["kind"],
            frozenset(_state_index(list(states), q, "game objective") for q in objective_doc["states"]),
        )
        return HcsGame(hcs, tuple(owner), objective)
    if kind == "vass":
        _expect_keys(doc, kind, ("type", "alphabet", "dim", "mode", "states", "initial", "accepting", "transitions"))
        alpha = _parse_alphabet(doc, kind)
        states = doc["states"]
        transitions = []
        for i, entry in enumerate(doc["transitions"]):
            _expect_keys(entry, f"vass transition {i}", ("from", "label", "update", "to"))
            update = entry["update"]
            if not isinstance(update, list) or not all(isinstance(u, int) for u in update):
                raise InputError(f"vass transition {i}: update must be a list of integers")
            transitions.append(
                (
                    _state_index(states, entry["from"], kind),
                    _label_index(alpha, entry["label"], kind),
                    tuple(update),
                    _state_index(states, entry["to"], kind),
                )
            )
        return Vass(
            alphabet=alpha,
            dim=doc["dim"],
            states=tuple(states),
            initial=_state_index(states, doc["initial"], kind),
            accepting=frozenset(_state_index(states, q, kind) for q in doc["accepting"]),
            transitions=tuple(transitions),
            mode=doc["mode"],
        )
    if kind == "countdown":
        _expect_keys(doc, kind, ("type", "states", "initial", "target", "edges"))
        states = doc["states"]
        if not isinstance(doc["target"], int):
            raise InputError("countdown: target must be an integer")
        edges = []
        for i, entry in enumerate(doc["edges"]):
            _expect_keys(entry, f"countdown edge {i}", ("from", "weight", "to"))
            if not isinstance(entry["weight"], int):
                raise InputError(f"countdown edge {i}: weight must be an integer")
            edges.append(
                (
                    _state_index(states, entry["from"], kind),
                    entry["weight"],
                    _state_index(states, entry["to"], kind),
                )
            )
        return CountdownGame(
            states=tuple(states),
            initial=_state_index(states, doc["initial"], kind),
            target=doc["target"],
            edges=tuple(edges),
        )
    if kind == "2cm":
        _expect_keys(doc, kind, ("type", "states", "transitions", "source", "target"))
        states = doc["states"]
        transitions = []
        for i, entry in enumerate(doc["transitions"]):
            _expect_keys(entry, f"2cm transition {i}", ("from", "action", "to"))
            if entry["action"] not in ACTIONS:
                raise InputError(f"2cm transition {i}: unknown action {entry['action']!r}")
            transitions.append(
                (
                    _state_index(states, entry["from"], kind),
                    entry["action"],
                    _state_index(states, entry["to"], kind),
                )
            )
        return TwoCounterMachine(
            states=tuple(states),
            transitions=tuple(transitions),
            source=_state_index(states, doc["source"], kind),
            target=_state_index(states, doc["target"], kind),
        )
    raise InputError(f"unknown document type {kind!r}")


# ---------------------------------------------------------------------------
# Canonical form


def _transition_key(t):
    src, label, dst = t[0], t[1], t[-1]
    return (src, -1 if label is None else label, dst)


def canonicalize(model: Model) -> Model:
    """Sort transition lists (recursively through guards) for stable output."""
    if isinstance(model, FiniteAutomaton):
        return FiniteAutomaton(
            alphabet=model.alphabet,
            states=model.states,
            initial=model.initial,
            accepting=model.accepting,
            transitions=tuple(sorted(model.transitions, key=_transition_key)),
        )
    if isinstance(model, HcsGame):
        return HcsGame(canonicalize(model.hcs), model.owner, model.objective)
    if isinstance(model, Hcs):
        annotated = [
            (t, hg)
            for t, hg in (
                (model.underlying.transitions[i], model.guarded.get(i))
                for i in range(len(model.underlying.transitions))
            )
        ]
        annotated.sort(key=lambda pair: _transition_key(pair[0]))
        underlying = FiniteAutomaton(
            alphabet=model.underlying.alphabet,
            states=model.underlying.states,
            initial=model.underlying.initial,
            accepting=model.underlying.accepting,
            transitions=tuple(t for t, _ in annotated),
        )
        guarded = {i: g for i, (_, g) in enumerate(annotated) if g is not None}
        guards = {name: canonicalize(model.guards[name]) for name in sorted(model.guards)}
        return Hcs(model.alphabet, underlying, guards, guarded)
    if isinstance(model, Vass):
        return Vass(
            alphabet=model.alphabet,
            dim=model.dim,
            states=model.states,
            initial=model.initial,
            accepting=model.accepting,
            transitions=tuple(
                sorted(model.transitions, key=lambda t: (t[0], -1 if t[1] is None else t[1], t[3], t[2]))
            ),
            mode=model.mode,
        )
    if isinstance(model, CountdownGame):
        return CountdownGame(model.states, model.initial, model.target, tuple(sorted(model.edges)))
    if isinstance(model, TwoCounterMachine):
        return TwoCounterMachine(
            model.states,
            tuple(sorted(model.transitions, key=lambda t: (t[0], ACTIONS.index(t[1]), t[2]))),
            model.source,
            model.target,
        )
    raise InputError(f"cannot canonicalize {type(model).__name__}")


def dumps(doc: dict) -> str:
    """Deterministic pretty form used by fmt and for files on disk."""
    return json.dumps(doc, indent=2) + "\n"


def dumps_line(doc: dict) -> str:
    """Single-line form used for CLI verdicts."""
    return json.dumps(doc, separators=(", ", ": "))


def load_path(path: str) -> Model:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            doc = json.load(handle)
    except FileNotFoundError:
        raise InputError(f"no such file: {path}") from None
    except json.JSONDecodeError as err:
        raise InputError(f"{path} is not valid JSON: {err}") from None
    return from_document(doc)


def save_path(path: str, model: Model) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(dumps(to_document(model)))
