"""Ready-made example models: the shared fixture set used by tests, docs,
and the shipped model documents.

The two branching examples over {a, b} share three guards: alternating
words, length divisible by three, and words containing two consecutive a's.
The four-eyes workflow and the traffic-light controller show the intended
modelling style: prerequisites and safety rules written over the global
action history instead of a joint state space.
"""

from __future__ import annotations

from .automata import Alphabet, FiniteAutomaton
from .core import Hcs
from .vass import COVER, Vass
from .vassguards import TwoCounterMachine

AB = Alphabet(("a", "b"))


def guard_alternating() -> FiniteAutomaton:
    """Words of alternating a's and b's that are empty or start with a."""
    return FiniteAutomaton(
        alphabet=AB,
        states=("start", "after_a", "after_b", "dead"),
        initial=0,
        accepting=frozenset({0, 1, 2}),
        transitions=(
            (0, 0, 1),
            (0, 1, 3),
            (1, 0, 3),
            (1, 1, 2),
            (2, 0, 1),
            (2, 1, 3),
            (3, 0, 3),
            (3, 1, 3),
        ),
    )


def guard_length_multiple_of_three() -> FiniteAutomaton:
    """Words whose length is a multiple of three."""
    return FiniteAutomaton(
        alphabet=AB,
        states=("len0", "len1", "len2"),
        initial=0,
        accepting=frozenset({0}),
        transitions=tuple((i, a, (i + 1) % 3) for i in range(3) for a in (0, 1)),
    )


def guard_contains_aa() -> FiniteAutomaton:
    """NFA for words containing two consecutive a's."""
    return FiniteAutomaton(
        alphabet=AB,
        states=("scan", "one_a", "found"),
        initial=0,
        accepting=frozenset({2}),
        transitions=(
            (0, 0, 0),
            (0, 1, 0),
            (0, 0, 1),
            (1, 0, 2),
            (2, 0, 2),
            (2, 1, 2),
        ),
    )


def _shared_guard_table() -> dict[str, FiniteAutomaton]:
    return {
        "alternating": guard_alternating(),
        "len_mod_3": guard_length_multiple_of_three(),
        "contains_aa": guard_contains_aa(),
    }


def branching_empty_hcs() -> Hcs:
    """Chain of three guarded a-transitions whose language is empty.

    The first guard forces a pure-a prefix, the second then needs two b's,
    after which two consecutive a's can never have occurred.
    """
    underlying = FiniteAutomaton(
        alphabet=AB,
        states=("u0", "u1", "u2", "u3"),
        initial=0,
        accepting=frozenset({3}),
        transitions=(
            (0, 0, 1),  # a, guarded: alternating
            (1, 0, 2),  # a, guarded: len_mod_3
            (2, 0, 3),  # a, guarded: contains_aa
            (0, 1, 0),
            (1, 1, 1),
            (2, 1, 2),
            (3, 0, 3),
            (3, 1, 3),
        ),
    )
    return Hcs(
        AB,
        underlying,
        _shared_guard_table(),
        {0: "alternating", 1: "len_mod_3", 2: "contains_aa"},
    )


def branching_nonempty_hcs() -> Hcs:
    """Two-branch variant of the same guards; accepts "baaba"."""
    underlying = FiniteAutomaton(
        alphabet=AB,
        states=("p1", "p2", "p3", "p4", "p5"),
        initial=0,
        accepting=frozenset({4}),
        transitions=(
            (0, 0, 1),  # a to upper branch
            (0, 1, 2),  # b to lower branch
            (1, 0, 3),  # a, guarded: alternating
            (2, 1, 3),  # b, guarded: len_mod_3
            (3, 0, 4),  # a, guarded: contains_aa
            (3, 1, 4),  # b, guarded: contains_aa
            (1, 1, 1),
            (2, 0, 2),
            (4, 0, 4),
            (4, 1, 4),
        ),
    )
    return Hcs(
        AB,
        underlying,
        _shared_guard_table(),
        {2: "alternating", 3: "len_mod_3", 4: "contains_aa", 5: "contains_aa"},
    )


# ---------------------------------------------------------------------------
# Four-eyes approval workflow

FOUR_EYES_ALPHABET = Alphabet(
    ("SubmitA", "SubmitB", "Approve1", "Approve2", "CompleteA", "CompleteB")
)


def contains_symbol_dfa(alpha: Alphabet, symbol: str) -> FiniteAutomaton:
    """Two-state DFA: has the given symbol occurred in the history?"""
    target = alpha.index(symbol)
    transitions = []
    for a in range(len(alpha)):
        transitions.append((0, a, 1 if a == target else 0))
        transitions.append((1, a, 1))
    return FiniteAutomaton(
        alphabet=alpha,
        states=(f"no_{symbol}", f"seen_{symbol}"),
        initial=0,
        accepting=frozenset({1}),
        transitions=tuple(transitions),
    )


def four_eyes_hcs() -> Hcs:
    """Approval workflow: completion needs both approvals and the matching submission.

    Approvals arrive in either order; the guards read them off the history,
    so the underlying automaton never encodes approval order in its states.
    """
    alpha = FOUR_EYES_ALPHABET
    sym = {name: alpha.index(name) for name in alpha.symbols}
    underlying = FiniteAutomaton(
        alphabet=alpha,
        states=("idle", "open", "checked1", "checked2", "done"),
        initial=0,
        accepting=frozenset({4}),
        transitions=(
            (0, sym["SubmitA"], 1),
            (0, sym["SubmitB"], 1),
            (1, sym["Approve1"], 1),
            (1, sym["Approve2"], 1),
            (1, None, 2),  # guarded: approval 1 recorded
            (2, None, 3),  # guarded: approval 2 recorded
            (3, sym["CompleteA"], 4),  # guarded: submission A recorded
            (3, sym["CompleteB"], 4),  # guarded: submission B recorded
        ),
    )
    guards = {
        "saw_approve1": contains_symbol_dfa(alpha, "Approve1"),
        "saw_approve2": contains_symbol_dfa(alpha, "Approve2"),
        "saw_submit_a": contains_symbol_dfa(alpha, "SubmitA"),
        "saw_submit_b": contains_symbol_dfa(alpha, "SubmitB"),
    }
    return Hcs(
        alpha,
        underlying,
        guards,
        {4: "saw_approve1", 5: "saw_approve2", 6: "saw_submit_a", 7: "saw_submit_b"},
    )


# ---------------------------------------------------------------------------
# Traffic lights: a three-layer nested model

TRAFFIC_ALPHABET = Alphabet(
    ("t1_green", "t1_orange", "t1_red", "t2_green", "t2_orange", "t2_red")
)


def _light_is_red_dfa(light: int) -> FiniteAutomaton:
    """Is light ``light`` currently red? Lights start red."""
    alpha = TRAFFIC_ALPHABET
    green = alpha.index(f"t{light}_green")
    orange = alpha.index(f"t{light}_orange")
    red = alpha.index(f"t{light}_red")
    transitions = []
    for state in (0, 1):
        for a in range(len(alpha)):
            if a == red:
                transitions.append((state, a, 0))
            elif a in (green, orange):
                transitions.append((state, a, 1))
            else:
                transitions.append((state, a, state))
    return FiniteAutomaton(
        alphabet=alpha,
        states=("red", "not_red"),
        initial=0,
        accepting=frozenset({0}),
        transitions=tuple(transitions),
    )


def _light_controller(light: int) -> Hcs:
    """Controller for one light: green is allowed only in the red phase and
    only while the other light shows red.

    The phase machine replays the light's own actions; a guarded epsilon
    move into the accepting state performs the 'other light is red' check on
    the full history at query time.
    """
    alpha = TRAFFIC_ALPHABET
    other = 2 if light == 1 else 1
    green = alpha.index(f"t{light}_green")
    orange = alpha.index(f"t{light}_orange")
    red = alpha.index(f"t{light}_red")
    # States: 0 red phase, 1 green phase, 2 orange phase, 3 query-accept.
    transitions: list[tuple[int, int | None, int]] = []
    guarded: dict[int, str] = {}
    # Red phase: strays loop, green advances (guarded), then the cycle.
    for a in range(len(alpha)):
        if a == green:
            guarded[len(transitions)] = "other_red"
            transitions.append((0, a, 1))
        else:
            transitions.append((0, a, 0))
    for a in range(len(alpha)):
        transitions.append((1, a, 2 if a == orange else 1))
    for a in range(len(alpha)):
        transitions.append((2, a, 0 if a == red else 2))
    guarded[len(transitions)] = "other_red"
    transitions.append((0, None, 3))
    # The accept state mirrors the red phase so replays can continue.
    for a in range(len(alpha)):
        if a == green:
            guarded[len(transitions)] = "other_red"
            transitions.append((3, a, 1))
        else:
            transitions.append((3, a, 0))
    underlying = FiniteAutomaton(
        alphabet=alpha,
        states=("phase_red", "phase_green", "phase_orange", "green_ok"),
        initial=0,
        accepting=frozenset({3}),
        transitions=tuple(transitions),
    )
    return Hcs(alpha, underlying, {"other_red": _light_is_red_dfa(other)}, guarded)


def traffic_lights_hcs() -> Hcs:
    """Outer bus holding both controllers; only the green commands are guarded."""
    alpha = TRAFFIC_ALPHABET
    transitions = tuple((0, a, 0) for a in range(len(alpha)))
    underlying = FiniteAutomaton(
        alphabet=alpha,
        states=("bus",),
        initial=0,
        accepting=frozenset({0}),
        transitions=transitions,
    )
    guarded = {
        alpha.index("t1_green"): "light1_ok",
        alpha.index("t2_green"): "light2_ok",
    }
    return Hcs(
        alpha,
        underlying,
        {"light1_ok": _light_controller(1), "light2_ok": _light_controller(2)},
        guarded,
    )


def all_trivial_hcs() -> Hcs:
    """Guard-free HCS over {a, b}; language (a|b)*a(a|b)*."""
    underlying = FiniteAutomaton(
        alphabet=AB,
        states=("n0", "n1"),
        initial=0,
        accepting=frozenset({1}),
        transitions=((0, 0, 0), (0, 1, 0), (0, 0, 1), (1, 0, 1), (1, 1, 1)),
    )
    return Hcs(AB, underlying, {}, {})


# ---------------------------------------------------------------------------
# VASS models

def count_balanced_vass() -> Vass:
    """Cover-1-VASS for a^n b^m with m <= n: increment on a, decrement on b."""
    return Vass(
        alphabet=AB,
        dim=1,
        states=("counting", "draining"),
        initial=0,
        accepting=frozenset({1}),
        transitions=(
            (0, 0, (1,), 0),
            (0, None, (0,), 1),
            (1, 1, (-1,), 1),
        ),
        mode=COVER,
    )


def six_state_two_counter_machine() -> TwoCounterMachine:
    """Small 2CM used as the structural fixture for the zero-test translation."""
    return TwoCounterMachine(
        states=("p1", "p2", "p3", "p4", "p5", "p6"),
        transitions=(
            (0, "inc1", 0),
            (0, "zero2", 1),
            (0, "zero1", 2),
            (2, "inc2", 1),
            (1, "dec1", 3),
            (3, "inc2", 4),
            (4, "inc2", 1),
            (1, "zero1", 5),
        ),
        source=0,
        target=5,
    )
