import pytest

from hcs.automata import accepts
from hcs.bench import (
    cycle_dfa,
    first_primes,
    prime_family,
    report_table,
    verify_succinctness,
)
from hcs.core import hcs_size, member
from hcs.errors import ContractError, InputError

from oracles import all_words


class TestCycleDfa:
    def test_length_one_accepts_everything(self):
        one = cycle_dfa(1)
        for n in range(6):
            assert accepts(one, ["a"] * n)

    def test_length_three(self):
        c3 = cycle_dfa(3)
        assert accepts(c3, ["a"] * 3)
        assert not accepts(c3, ["a"] * 2)

    def test_counts(self):
        c5 = cycle_dfa(5)
        assert len(c5.states) == 5 and len(c5.transitions) == 5

    def test_zero_rejected(self):
        with pytest.raises(InputError):
            cycle_dfa(0)


class TestPrimeFamily:
    def test_first_primes(self):
        assert first_primes(4) == [2, 3, 5, 7]

    def test_k1_language(self):
        family = prime_family(1)
        for n in range(7):
            assert member(family, ["a"] * n + ["$"]) == (n % 2 == 0)

    def test_arithmetic_predicate_exhaustive_k2(self):
        # Divisibility by 6 plus exactly two trailing delimiters, checked on
        # every word over {a, $} up to twice the prime product.
        from oracles import HcsStepper

        family = prime_family(2)
        stepper = HcsStepper(family)
        symbols = family.alphabet.symbols

        def predicate(word):
            if len(word) < 2 or word[-1] != "$" or word[-2] != "$":
                return False
            body = word[:-2]
            return all(s == "a" for s in body) and len(body) % 6 == 0

        def walk(state, word):
            assert stepper.accepting(state) == predicate(word), word
            if len(word) == 12:
                return
            for i, sym in enumerate(symbols):
                walk(stepper.step(state, i), word + [sym])

        walk(stepper.initial(), [])

    def test_size_grows_polynomially(self):
        for k in range(1, 6):
            assert hcs_size(prime_family(k)) <= 64 * k**3


class TestReports:
    def test_cap_enforced(self):
        with pytest.raises(ContractError):
            verify_succinctness(7)

    def test_k_must_be_positive(self):
        with pytest.raises(InputError):
            verify_succinctness(0)

    def test_boundary_k1(self):
        report = verify_succinctness(1)
        assert report.minimal_dfa_states >= 2 == report.bound_2k

    def test_exact_value_k3(self):
        assert verify_succinctness(3).minimal_dfa_states == 34

    def test_k4_lower_bound(self):
        assert verify_succinctness(4).minimal_dfa_states >= 210

    def test_table_alignment(self):
        reports = [verify_succinctness(k) for k in (1, 2)]
        table = report_table(reports)
        lines = table.splitlines()
        assert len(lines) == 3
        assert len({len(line.rstrip()) for line in lines}) <= 3
        assert "prime_product" in lines[0]
