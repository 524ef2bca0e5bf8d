"""Minimal partial DFAs for finite numeral languages and their bit cost.

The irregularity of a system is the description length of the smallest
partial DFA that accepts exactly its numeral strings:

    |Z| * (2 log2|S| + log2|Sigma|) + log2|S| + |S|

with Z the stored transitions, S the states and Sigma the symbols that occur.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .numerals import NUMBERS, Numeral, NumeralSystem, Symbol

Word = tuple[Symbol, ...]


@dataclass(frozen=True)
class Dfa:
    states: frozenset[int]
    alphabet: frozenset[Symbol]
    transitions: Mapping[tuple[int, Symbol], int]
    initial: int
    accepting: frozenset[int]

    @property
    def state_count(self) -> int:
        return len(self.states)

    @property
    def transition_count(self) -> int:
        return len(self.transitions)

    def out(self, state: int) -> dict[Symbol, int]:
        return {sym: dst for (src, sym), dst in self.transitions.items() if src == state}

    def adjacency(self) -> dict[int, dict[Symbol, int]]:
        adj: dict[int, dict[Symbol, int]] = {q: {} for q in self.states}
        for (src, sym), dst in self.transitions.items():
            adj[src][sym] = dst
        return adj

    def accepts(self, word: Sequence[Symbol]) -> bool:
        q = self.initial
        for sym in word:
            key = (q, sym)
            if key not in self.transitions:
                return False
            q = self.transitions[key]
        return q in self.accepting


def _as_word(x) -> Word:
    return tuple(x.symbols) if isinstance(x, Numeral) else tuple(x)


def build_trie(strings: Iterable) -> Dfa:
    """Prefix-tree acceptor for a finite set of symbol sequences (or Numerals)."""
    words = {_as_word(s) for s in strings}
    if not words:
        raise ValueError("cannot build a trie for an empty language")
    if any(len(w) == 0 for w in words):
        raise ValueError("empty strings are not allowed")
    trans: dict[tuple[int, Symbol], int] = {}
    accepting = set()
    count = 1
    for word in sorted(words, key=lambda w: tuple(s.sort_key() for s in w)):
        q = 0
        for sym in word:
            nxt = trans.get((q, sym))
            if nxt is None:
                nxt = count
                count += 1
                trans[(q, sym)] = nxt
            q = nxt
        accepting.add(q)
    return Dfa(
        states=frozenset(range(count)),
        alphabet=frozenset(sym for (_, sym) in trans),
        transitions=trans,
        initial=0,
        accepting=frozenset(accepting),
    )


class CyclicAutomatonError(ValueError):
    pass


def _postorder(adj: Mapping[int, Mapping[Symbol, int]], start: int) -> list[int]:
    """Reachable states, children before parents. Raises on cycles."""
    order: list[int] = []
    colour: dict[int, int] = {}  # 1 = on stack, 2 = done
    stack = [(start, iter(sorted(adj[start].items(), key=lambda kv: kv[0].sort_key())))]
    colour[start] = 1
    while stack:
        q, it = stack[-1]
        for _, dst in it:
            c = colour.get(dst)
            if c == 1:
                raise CyclicAutomatonError("automaton has a cycle; only finite languages are supported")
            if c is None:
                colour[dst] = 1
                stack.append((dst, iter(sorted(adj[dst].items(), key=lambda kv: kv[0].sort_key()))))
                break
        else:
            stack.pop()
            colour[q] = 2
            order.append(q)
    return order


def minimize(dfa: Dfa) -> Dfa:
    """Merge states with identical right languages in an acyclic partial DFA.

    States are processed children-first, so each state's right language is
    identified by (is_final, {symbol: class of target}). Useless states and
    transitions into them are dropped; no trap state is introduced.
    """
    adj = dfa.adjacency()
    order = _postorder(adj, dfa.initial)
    signature_class: dict[tuple, int] = {}
    cls: dict[int, int | None] = {}
    for q in order:
        edges = tuple(sorted(
            ((sym.sort_key(), sym, cls[dst]) for sym, dst in adj[q].items() if cls[dst] is not None),
            key=lambda e: e[0],
        ))
        final = q in dfa.accepting
        if not final and not edges:
            cls[q] = None  # dead: cannot reach acceptance
            continue
        sig = (final, tuple((sym, c) for _, sym, c in edges))
        cls[q] = signature_class.setdefault(sig, len(signature_class))
    if cls[dfa.initial] is None:
        raise ValueError("automaton accepts nothing")

    # renumber in breadth-first order from the initial state
    by_class = {c: sig for sig, c in signature_class.items()}
    number = {cls[dfa.initial]: 0}
    queue = [cls[dfa.initial]]
    trans: dict[tuple[int, Symbol], int] = {}
    accepting = set()
    for c in queue:
        final, edges = by_class[c]
        if final:
            accepting.add(number[c])
        for sym, d in edges:
            if d not in number:
                number[d] = len(number)
                queue.append(d)
            trans[(number[c], sym)] = number[d]
    return Dfa(
        states=frozenset(range(len(number))),
        alphabet=frozenset(sym for (_, sym) in trans),
        transitions=trans,
        initial=0,
        accepting=frozenset(accepting),
    )


def language(dfa: Dfa) -> set[Word]:
    """All accepted words (finite languages only)."""
    adj = dfa.adjacency()
    out: set[Word] = set()

    def walk(q: int, prefix: Word, depth: int):
        if depth > len(dfa.states):
            raise CyclicAutomatonError("automaton has a cycle")
        if q in dfa.accepting:
            out.add(prefix)
        for sym, dst in adj[q].items():
            walk(dst, prefix + (sym,), depth + 1)

    walk(dfa.initial, (), 0)
    return out


def right_language(dfa: Dfa, state: int) -> frozenset[Word]:
    return frozenset(language(Dfa(dfa.states, dfa.alphabet, dfa.transitions, state, dfa.accepting)))


# ---------------------------------------------------------------------------
# Description length


@dataclass(frozen=True)
class IrregularityScore:
    bits: float
    state_count: int
    transition_count: int
    alphabet_size: int


def description_length(transitions: int, states: int, alphabet: int) -> float:
    if states < 1 or alphabet < 1:
        raise ValueError("need at least one state and one symbol")
    log_s = math.log2(states)
    return transitions * (2 * log_s + math.log2(alphabet)) + log_s + states


def encoding_cost(dfa: Dfa) -> IrregularityScore:
    z, s, a = dfa.transition_count, dfa.state_count, len(dfa.alphabet)
    return IrregularityScore(description_length(z, s, a), s, z, a)


def minimal_dfa(words: Iterable) -> Dfa:
    return minimize(build_trie(words))


def language_cost(words: Iterable) -> IrregularityScore:
    """Bit cost of the minimal DFA for a finite set of words."""
    return encoding_cost(minimal_dfa(words))


def irregularity(system: NumeralSystem, numbers: Iterable[int] = NUMBERS) -> IrregularityScore:
    """Irregularity of the numerals for ``numbers`` (an inclusive range such as range(1, 21))."""
    numbers = list(numbers)
    if not numbers:
        raise ValueError("empty number range")
    return language_cost(system.numerals[n] for n in numbers)


def windows(window: int = 10) -> list[range]:
    if window < 1:
        raise ValueError("window must be >= 1")
    if window > len(NUMBERS):
        raise ValueError(f"window must be <= {len(NUMBERS)}")
    return [range(lo, lo + window) for lo in range(NUMBERS.start, NUMBERS.stop - window + 1)]


def local_irregularity(system: NumeralSystem, window: int = 10) -> float:
    """Unweighted mean irregularity over all windows of consecutive numbers."""
    scores = [irregularity(system, r).bits for r in windows(window)]
    return math.fsum(scores) / len(scores)
