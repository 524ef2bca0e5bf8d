import itertools

import numpy as np
import pytest

from recnum.dfa import irregularity, language_cost
from recnum.generators import (
    LexiconSpec, build_neighbourhood, canonical_numeral, check_expression, enumerate_alternatives,
    generate_random_system, greedy_extremes, lexicon_of, random_lexicon, random_population,
    variants_share_stats,
)
from recnum.numerals import (
    NUMBERS, SYM_PLUS, SYM_TIMES, Numeral, atom, builtin_system, evaluate, render, terms,
    tokenize, validate_system,
)

BASQUE = LexiconSpec(frozenset(range(1, 11)), frozenset({10, 20}))


def brute_force(n, length, lexicon):
    """Oracle: every alternating atom/combinator string of the given length,
    filtered by value and by the expression grammar."""
    atoms = [atom(a) for a in sorted(lexicon.atoms)]
    ops = [SYM_PLUS, SYM_TIMES]
    k = (length + 1) // 2
    found = set()
    for a in itertools.product(atoms, repeat=k):
        for o in itertools.product(ops, repeat=k - 1):
            syms = [a[0]]
            for op, x in zip(o, a[1:]):
                syms += [op, x]
            num = Numeral(tuple(syms))
            if evaluate(num) == n and grammatical(num, lexicon):
                found.add(num)
    return found


def grammatical(num, lexicon):
    parts = terms(num)
    factor_lists = [f for _, f in parts]
    if len(set(factor_lists)) != len(factor_lists):
        return False
    for i, (_, f) in enumerate(parts):
        if len(f) > 2:
            return False
        if len(f) == 2 and not (f[0] in lexicon.digits and f[0] > 1 and f[1] in lexicon.multipliers):
            return False
        if len(f) == 1 and f[0] not in lexicon.multipliers and i < len(parts) - 1:
            return False
    return True


def test_basque_91_alternatives():
    got = {render(x) for x in enumerate_alternatives(91, 7, BASQUE)}
    assert got == {"4*20+10+1", "10+4*20+1", "8*10+10+1", "10+8*10+1", "7*10+20+1", "20+7*10+1"}


@pytest.mark.parametrize("n,length", [(91, 7), (23, 5), (40, 3), (57, 5), (11, 3), (99, 7)])
def test_alternatives_match_brute_force(n, length):
    assert enumerate_alternatives(n, length, BASQUE) == brute_force(n, length, BASQUE)


def test_every_alternative_is_well_formed():
    for n in (23, 46, 91):
        for length in (3, 5, 7):
            for num in enumerate_alternatives(n, length, BASQUE):
                assert evaluate(num) == n and num.length == length
                assert check_expression(num, BASQUE)


def test_no_alternatives_for_even_length():
    assert enumerate_alternatives(5, 2, BASQUE) == set()


def test_lexicon_of_builtins():
    assert lexicon_of(builtin_system("mandarin")) == LexiconSpec(frozenset(range(1, 10)), frozenset({10}))
    lex = lexicon_of(builtin_system("basque_like"))
    assert lex.multipliers == {10, 20} and lex.digits == frozenset(range(1, 10))


def test_canonical_is_greedy():
    lex = LexiconSpec(frozenset(range(1, 5)), frozenset({5, 20}))
    assert render(canonical_numeral(67, lex)) == "3*20+5+2"


def test_random_system_deterministic_and_valid():
    rng = np.random.default_rng(5)
    lex = random_lexicon(rng)
    a = generate_random_system(lex, 9)
    b = generate_random_system(lex, 9)
    assert a.numerals == b.numerals
    assert validate_system(a).accepted


def test_random_population_properties():
    mandarin = irregularity(builtin_system("mandarin")).bits
    systems = random_population(30, 7)
    for system in systems:
        assert validate_system(system).accepted
        lex = lexicon_of(system)
        assert 5 <= lex.size <= 13 and len(lex.multipliers) >= 2
        assert irregularity(system).bits > mandarin
        for n in NUMBERS:
            assert check_expression(system[n], lex)
            assert system[n].length <= canonical_numeral(n, lex).length
    assert [s.numerals for s in random_population(3, 7)] == [s.numerals for s in systems[:3]]


def test_neighbourhood_without_variation():
    hood = build_neighbourhood(builtin_system("mandarin"), seed=0)
    assert hood.size == 1 and not hood.has_variation


def test_neighbourhood_variants_preserve_lengths():
    hood = build_neighbourhood(builtin_system("basque_like"), seed=1, n_random=3)
    assert hood.has_variation and hood.size > 10
    assert len(hood.variants) == 6
    assert variants_share_stats(hood)
    base = hood.base_system
    for v in hood.variants:
        assert validate_system(v).accepted
        assert all(v[n].length == base[n].length for n in NUMBERS)
    assert hood.branching()[91] == 6


def test_greedy_choices_are_locally_extreme():
    hood = build_neighbourhood(builtin_system("french_like"), seed=0)
    for direction, pick in (("most_regular", min), ("least_regular", max)):
        system = greedy_extremes(hood, direction)
        prefix = []
        for n in NUMBERS:
            opts = hood.alternatives[n]
            costs = [language_cost(prefix + [o]).bits for o in opts]
            assert language_cost(prefix + [system[n]]).bits == pick(costs)
            prefix.append(system[n])
    most = irregularity(greedy_extremes(hood, "most_regular")).bits
    least = irregularity(greedy_extremes(hood, "least_regular")).bits
    assert most < least


def test_greedy_rejects_unknown_direction():
    hood = build_neighbourhood(builtin_system("basque_like"), seed=0)
    with pytest.raises(ValueError):
        greedy_extremes(hood, "sideways")


def test_alternatives_match_brute_force_on_random_lexicons():
    rng = np.random.default_rng(21)
    for _ in range(50):
        lex = random_lexicon(rng)
        n = int(rng.integers(1, 100))
        length = int(rng.choice([1, 3, 5]))
        assert enumerate_alternatives(n, length, lex) == brute_force(n, length, lex), (n, length, lex)
