"""Comparison populations: random baselines and same-length neighbourhoods.

Expressions are built from additive terms joined by ``+`` (or ``-`` when the
lexicon has it). A term is a bare atom or a ``digit*multiplier`` product.
These constraints keep the space close to attested morphology:

* the terms of one numeral are pairwise distinct,
* a bare digit (an atom that is not a multiplier) can only be the last term,
* products never have 1 as their digit.

Under these rules Basque 91 (``4*20+10+1``) has exactly six same-length
alternatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable

import numpy as np

from .dfa import language_cost
from .numerals import (
    MINUS, NUMBERS, PLUS, SYM_MINUS, SYM_PLUS, SYM_TIMES, TIMES, Numeral,
    NumeralSystem, atom, evaluate, require_valid, terms,
)


@dataclass(frozen=True)
class LexiconSpec:
    digits: frozenset[int]
    multipliers: frozenset[int]
    combinators: frozenset[str] = frozenset({PLUS, TIMES})

    def __post_init__(self):
        object.__setattr__(self, "digits", frozenset(self.digits))
        object.__setattr__(self, "multipliers", frozenset(self.multipliers))
        object.__setattr__(self, "combinators", frozenset(self.combinators))
        if not self.combinators:
            raise ValueError("lexicon needs at least one combinator")
        if not self.combinators <= {PLUS, MINUS, TIMES}:
            raise ValueError(f"unknown combinators {set(self.combinators) - {PLUS, MINUS, TIMES}}")
        if any(v < 1 for v in self.digits | self.multipliers):
            raise ValueError("atom values must be positive")

    @property
    def atoms(self) -> frozenset[int]:
        return self.digits | self.multipliers

    @property
    def size(self) -> int:
        return len(self.atoms)

    def describe(self) -> dict:
        return {
            "digits": sorted(self.digits),
            "multipliers": sorted(self.multipliers),
            "combinators": sorted(self.combinators),
        }


def lexicon_of(system: NumeralSystem) -> LexiconSpec:
    """Digits, multipliers and combinators used by a system.

    Multipliers are taken from the system's metadata when present, otherwise
    they are the atoms that occur right of ``*``.
    """
    left, right, bare, combs = set(), set(), set(), set()
    for num in system.numerals.values():
        for i, s in enumerate(num.symbols):
            if not s.is_atom:
                combs.add(s.kind)
        for _, factors in terms(num):
            if len(factors) == 1:
                bare.add(factors[0])
            else:
                left.update(factors[:-1])
                right.add(factors[-1])
    multipliers = set(system.multipliers) if system.multipliers else set(right)
    digits = left | {a for a in bare if a not in multipliers}
    return LexiconSpec(frozenset(digits), frozenset(multipliers), frozenset(combs or {PLUS}))


# ---------------------------------------------------------------------------
# Expression space


@dataclass(frozen=True)
class _Term:
    factors: tuple[int, ...]
    value: int
    is_digit: bool

    @property
    def length(self) -> int:
        return 2 * len(self.factors) - 1


def _terms(lexicon: LexiconSpec) -> list[_Term]:
    out = [_Term((a,), a, a not in lexicon.multipliers) for a in sorted(lexicon.atoms)]
    if TIMES in lexicon.combinators:
        out += [
            _Term((d, m), d * m, False)
            for d in sorted(lexicon.digits) for m in sorted(lexicon.multipliers)
            if d > 1  # 1*m is just m
        ]
    return out


def _numeral(chosen: list[tuple[int, _Term]]) -> Numeral:
    syms = []
    for i, (sign, term) in enumerate(chosen):
        if i:
            syms.append(SYM_PLUS if sign > 0 else SYM_MINUS)
        for j, f in enumerate(term.factors):
            if j:
                syms.append(SYM_TIMES)
            syms.append(atom(f))
    return Numeral(tuple(syms))


@lru_cache(maxsize=4096)
def _expressions(n: int, length: int, lexicon: LexiconSpec) -> tuple[Numeral, ...]:
    all_terms = _terms(lexicon)
    signs = [s for s, op in ((1, PLUS), (-1, MINUS)) if op in lexicon.combinators]
    max_value = max((t.value for t in all_terms), default=0)
    found: list[Numeral] = []
    chosen: list[tuple[int, _Term]] = []

    def extend(total: int, remaining: int):
        # remaining = symbols still to place, including the joiner before the next term
        if remaining == 0:
            if total == n:
                found.append(_numeral(chosen))
            return
        if chosen and chosen[-1][1].is_digit:
            return  # a bare digit must be last
        if abs(n - total) > max_value * ((remaining + 1) // 2):
            return
        joiner = 1 if chosen else 0
        for term in all_terms:
            need = joiner + term.length
            if need > remaining or any(t is term for _, t in chosen):
                continue
            for sign in (signs if chosen else [1]):
                new_total = total + sign * term.value
                if MINUS not in lexicon.combinators and new_total > n:
                    continue
                chosen.append((sign, term))
                extend(new_total, remaining - need)
                chosen.pop()

    if length >= 1 and length % 2 == 1:
        extend(0, length)
    return tuple(sorted(found, key=Numeral.sort_key))


def enumerate_alternatives(n: int, length: int, lexicon: LexiconSpec) -> set[Numeral]:
    """All well-formed numerals of exactly ``length`` symbols that evaluate to ``n``."""
    return set(_expressions(n, length, lexicon))


def expressions_up_to(n: int, max_length: int, lexicon: LexiconSpec) -> list[Numeral]:
    out = []
    for length in range(1, max_length + 1, 2):
        out.extend(_expressions(n, length, lexicon))
    return out


def canonical_numeral(n: int, lexicon: LexiconSpec) -> Numeral | None:
    """Greedy largest-multiplier-first expression, or None if the greedy fails."""
    chosen: list[tuple[int, _Term]] = []
    rest = n
    mults = sorted(lexicon.multipliers, reverse=True)
    while rest:
        if rest in lexicon.atoms:
            chosen.append((1, _Term((rest,), rest, rest not in lexicon.multipliers)))
            rest = 0
            break
        for m in mults:
            k = rest // m
            if k == 0:
                continue
            if k == 1:
                chosen.append((1, _Term((m,), m, False)))
            elif k in lexicon.digits and TIMES in lexicon.combinators:
                chosen.append((1, _Term((k, m), k * m, False)))
            else:
                continue
            rest -= k * m
            break
        else:
            return None
    if len(chosen) > 1 and PLUS not in lexicon.combinators:
        return None
    return _numeral(chosen)


class GenerationError(ValueError):
    pass


def length_cap(n: int, lexicon: LexiconSpec) -> int:
    canon = canonical_numeral(n, lexicon)
    if canon is None:
        raise GenerationError(f"{n} cannot be expressed canonically with lexicon {lexicon.describe()}")
    return canon.length


def generate_random_system(lexicon: LexiconSpec, seed: int, name: str | None = None) -> NumeralSystem:
    """For each n, a uniformly random expression no longer than its canonical form."""
    rng = np.random.default_rng(seed)
    numerals = {}
    for n in NUMBERS:
        options = expressions_up_to(n, length_cap(n, lexicon), lexicon)
        if not options:
            raise GenerationError(f"no expression for {n}")
        numerals[n] = options[int(rng.integers(len(options)))]
    system = NumeralSystem(
        name=name or f"random_{seed}",
        numerals=numerals,
        source="generated",
        multipliers=lexicon.multipliers,
        meta={"kind": "random", "seed": str(seed)},
    )
    return require_valid(system)


MULTIPLIER_POOL = (5, 6, 8, 9, 10, 12, 15, 20)


def random_lexicon(rng: np.random.Generator, size: int | None = None,
                   max_tries: int = 1000) -> LexiconSpec:
    """A lexicon of 5..13 atoms whose canonical expressions cover 1..99."""
    for _ in range(max_tries):
        s = int(rng.integers(5, 14)) if size is None else size
        k = int(rng.integers(2, 4))  # at least two bases
        mults = frozenset(int(m) for m in rng.choice(MULTIPLIER_POOL, size=k, replace=False))
        n_digits = s - k
        if n_digits < 1:
            continue
        digits = []
        d = 1
        while len(digits) < n_digits:
            if d not in mults:
                digits.append(d)
            d += 1
        lex = LexiconSpec(frozenset(digits), mults)
        if lex.size == s and all(canonical_numeral(n, lex) is not None for n in NUMBERS):
            return lex
    raise GenerationError(f"no expressive lexicon found in {max_tries} tries")


def random_population(count: int, seed: int) -> list[NumeralSystem]:
    """``count`` random baselines, each with its own sampled lexicon."""
    out = []
    for i, child in enumerate(np.random.SeedSequence(seed).spawn(count)):
        rng = np.random.default_rng(child)
        lex = random_lexicon(rng)
        out.append(generate_random_system(lex, int(rng.integers(2**31)), name=f"random_{seed}_{i:03d}"))
    return out


# ---------------------------------------------------------------------------
# Neighbourhoods


@dataclass
class Neighbourhood:
    base_system: NumeralSystem
    lexicon: LexiconSpec
    alternatives: dict[int, list[Numeral]]
    variants: list[NumeralSystem] = field(default_factory=list)

    @property
    def size(self) -> int:
        """Number of distinct systems in the neighbourhood."""
        return math.prod(len(opts) for opts in self.alternatives.values())

    def branching(self) -> dict[int, int]:
        return {n: len(opts) for n, opts in self.alternatives.items()}

    @property
    def has_variation(self) -> bool:
        return self.size > 1


def build_neighbourhood(base: NumeralSystem, seed: int, n_random: int = 0) -> Neighbourhood:
    """Same-length alternatives for every number, plus the greedy extremes.

    Variants are, in order: the base itself, the most regular and least
    regular greedy systems, then ``n_random`` uniform random combinations.
    """
    require_valid(base)
    lex = lexicon_of(base)
    alternatives = {}
    for n in NUMBERS:
        opts = set(_expressions(n, base[n].length, lex))
        opts.add(base[n])
        alternatives[n] = sorted(opts, key=Numeral.sort_key)
    hood = Neighbourhood(base, lex, alternatives)
    hood.variants.append(base.with_numerals(base.numerals, name=f"{base.name}", source=base.source))
    hood.variants.append(greedy_extremes(hood, "most_regular"))
    hood.variants.append(greedy_extremes(hood, "least_regular"))
    rng = np.random.default_rng(seed)
    for i in range(n_random):
        numerals = {n: opts[int(rng.integers(len(opts)))] for n, opts in alternatives.items()}
        hood.variants.append(base.with_numerals(
            numerals, name=f"{base.name}~random_{i:02d}", source="generated"))
    return hood


def greedy_extremes(neighbourhood: Neighbourhood, direction: str) -> NumeralSystem:
    """Pick forms for n = 1..99 in turn, each minimising (or maximising) the
    cost of the minimal DFA over the forms chosen so far."""
    if direction not in ("most_regular", "least_regular"):
        raise ValueError(f"unknown direction {direction!r}")
    sign = 1.0 if direction == "most_regular" else -1.0
    chosen: dict[int, Numeral] = {}
    for n in NUMBERS:
        opts = neighbourhood.alternatives[n]
        if len(opts) == 1:
            chosen[n] = opts[0]
            continue
        prefix = list(chosen.values())
        best, best_score = None, math.inf
        for opt in opts:  # already in lexicographic order; strict < keeps the first tie
            score = sign * language_cost(prefix + [opt]).bits
            if score < best_score:
                best, best_score = opt, score
        chosen[n] = best
    base = neighbourhood.base_system
    system = base.with_numerals(chosen, name=f"{base.name}~{direction}", source="generated")
    return require_valid(system)


def check_expression(num: Numeral, lexicon: LexiconSpec) -> bool:
    """Whether ``num`` lies in the expression space of ``lexicon``."""
    seen = []
    parts = terms(num)
    for i, (sign, factors) in enumerate(parts):
        if sign < 0 and MINUS not in lexicon.combinators:
            return False
        if len(factors) == 1:
            if factors[0] not in lexicon.atoms:
                return False
            if factors[0] not in lexicon.multipliers and i != len(parts) - 1:
                return False
        elif len(factors) == 2:
            if factors[0] not in lexicon.digits or factors[1] not in lexicon.multipliers or factors[0] == 1:
                return False
            if TIMES not in lexicon.combinators:
                return False
        else:
            return False
        if factors in seen:
            return False
        seen.append(factors)
    return True


def variants_share_stats(hood: Neighbourhood) -> bool:
    from .numerals import stats
    ref = stats(hood.base_system)
    return all(stats(v) == ref for v in hood.variants)


def describe_alternatives(hood: Neighbourhood, numbers: Iterable[int] | None = None) -> dict:
    numbers = NUMBERS if numbers is None else numbers
    from .numerals import render
    return {str(n): [render(x) for x in hood.alternatives[n]] for n in numbers}
