"""Recursive numeral expressions and numeral systems over 1..99.

A numeral is an infix arithmetic expression over morphemes: number atoms
(``4``, ``20``) alternating with the combinators ``+``, ``-`` and ``*``.
Numerals are written compactly, e.g. ``"4*20+10+1"``; multi-digit runs are a
single atom.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping

MIN_N = 1
MAX_N = 99
NUMBERS = range(MIN_N, MAX_N + 1)

ATOM = "atom"
PLUS = "+"
MINUS = "-"
TIMES = "*"
COMBINATORS = (PLUS, MINUS, TIMES)


class NumeralSyntaxError(ValueError):
    """Raised for malformed compact numeral strings."""


@dataclass(frozen=True, order=False)
class Symbol:
    kind: str
    value: int | None = None

    def __post_init__(self):
        if self.kind == ATOM:
            if not isinstance(self.value, int) or self.value < 1:
                raise ValueError(f"atom value must be a positive integer, got {self.value!r}")
        elif self.kind in COMBINATORS:
            if self.value is not None:
                raise ValueError("combinators carry no value")
        else:
            raise ValueError(f"unknown symbol kind {self.kind!r}")

    @property
    def is_atom(self) -> bool:
        return self.kind == ATOM

    def sort_key(self) -> tuple[int, int]:
        # atoms before combinators, atoms by value
        if self.kind == ATOM:
            return (0, self.value)
        return (1, COMBINATORS.index(self.kind))

    def __str__(self) -> str:
        return str(self.value) if self.kind == ATOM else self.kind


def atom(value: int) -> Symbol:
    return Symbol(ATOM, value)


SYM_PLUS = Symbol(PLUS)
SYM_MINUS = Symbol(MINUS)
SYM_TIMES = Symbol(TIMES)
_COMBINATOR_SYMBOLS = {PLUS: SYM_PLUS, MINUS: SYM_MINUS, TIMES: SYM_TIMES}


@dataclass(frozen=True)
class Numeral:
    symbols: tuple[Symbol, ...]

    def __post_init__(self):
        syms = tuple(self.symbols)
        object.__setattr__(self, "symbols", syms)
        if not syms:
            raise NumeralSyntaxError("empty numeral")
        if len(syms) % 2 == 0:
            raise NumeralSyntaxError("numeral must start and end with an atom")
        for i, s in enumerate(syms):
            if (i % 2 == 0) != s.is_atom:
                raise NumeralSyntaxError(
                    f"position {i + 1} must be {'an atom' if i % 2 == 0 else 'a combinator'}"
                )

    @property
    def length(self) -> int:
        return len(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __str__(self) -> str:
        return render(self)

    def sort_key(self) -> tuple:
        return tuple(s.sort_key() for s in self.symbols)

    def atoms(self) -> list[int]:
        return [s.value for s in self.symbols if s.is_atom]


_TOKEN = re.compile(r"\d+|[+\-*]|\s+|.")


def tokenize(text: str) -> Numeral:
    """Parse a compact numeral string such as ``"2*10+3"``.

    Whitespace is ignored. Raises NumeralSyntaxError on anything that is not
    an alternating atom/combinator sequence of positive atoms.
    """
    symbols: list[Symbol] = []
    for tok in _TOKEN.findall(text):
        if tok.isspace():
            continue
        if tok.isdigit():
            value = int(tok)
            if value == 0:
                raise NumeralSyntaxError(f"zero-valued atom in {text!r}")
            if symbols and symbols[-1].is_atom:
                raise NumeralSyntaxError(f"adjacent atoms in {text!r}")
            symbols.append(atom(value))
        elif tok in _COMBINATOR_SYMBOLS:
            if not symbols:
                raise NumeralSyntaxError(f"leading combinator in {text!r}")
            if not symbols[-1].is_atom:
                raise NumeralSyntaxError(f"adjacent combinators in {text!r}")
            symbols.append(_COMBINATOR_SYMBOLS[tok])
        else:
            raise NumeralSyntaxError(f"unexpected character {tok!r} in {text!r}")
    if not symbols:
        raise NumeralSyntaxError("empty numeral")
    if not symbols[-1].is_atom:
        raise NumeralSyntaxError(f"trailing combinator in {text!r}")
    return Numeral(tuple(symbols))


def render(numeral: Numeral) -> str:
    return "".join(str(s) for s in numeral.symbols)


def evaluate(numeral: Numeral) -> int:
    """Arithmetic value with ``*`` binding tighter than left-associative ``+``/``-``."""
    syms = numeral.symbols
    total = 0
    sign = 1
    term = syms[0].value
    for i in range(1, len(syms), 2):
        op, rhs = syms[i].kind, syms[i + 1].value
        if op == TIMES:
            term *= rhs
        else:
            total += sign * term
            sign = 1 if op == PLUS else -1
            term = rhs
    return total + sign * term


def terms(numeral: Numeral) -> list[tuple[int, tuple[int, ...]]]:
    """Split into additive terms: ``[(sign, factors), ...]``."""
    out = []
    sign = 1
    factors = [numeral.symbols[0].value]
    syms = numeral.symbols
    for i in range(1, len(syms), 2):
        op, rhs = syms[i].kind, syms[i + 1].value
        if op == TIMES:
            factors.append(rhs)
        else:
            out.append((sign, tuple(factors)))
            sign = 1 if op == PLUS else -1
            factors = [rhs]
    out.append((sign, tuple(factors)))
    return out


# ---------------------------------------------------------------------------
# Systems


@dataclass(frozen=True)
class NumeralSystem:
    """A mapping from each number in 1..99 to one numeral.

    ``multipliers`` optionally records which atoms act as bases; when absent it
    is inferred from the forms (see :func:`recnum.generators.lexicon_of`).
    """

    name: str
    numerals: Mapping[int, Numeral]
    source: str = "builtin"
    multipliers: frozenset[int] | None = None
    meta: Mapping[str, str] = field(default_factory=dict, compare=False)

    def __getitem__(self, n: int) -> Numeral:
        return self.numerals[n]

    def forms(self, numbers: Iterable[int] = NUMBERS) -> list[Numeral]:
        return [self.numerals[n] for n in numbers]

    def symbols(self) -> set[Symbol]:
        return {s for num in self.numerals.values() for s in num.symbols}

    def with_numerals(self, numerals: Mapping[int, Numeral], name: str | None = None,
                      source: str | None = None) -> "NumeralSystem":
        return NumeralSystem(
            name=name or self.name,
            numerals=dict(numerals),
            source=source or self.source,
            multipliers=self.multipliers,
            meta=dict(self.meta),
        )


@dataclass(frozen=True)
class ValidationFailure:
    kind: str  # "missing", "mismatch", "duplicate", "out_of_range"
    n: int
    detail: str


@dataclass
class ValidationReport:
    name: str
    failures: list[ValidationFailure]

    @property
    def accepted(self) -> bool:
        return not self.failures

    def __str__(self) -> str:
        if self.accepted:
            return f"{self.name}: ok"
        lines = [f"{self.name}: {len(self.failures)} failure(s)"]
        lines += [f"  {f.kind} at {f.n}: {f.detail}" for f in self.failures]
        return "\n".join(lines)


def validate_system(system: NumeralSystem) -> ValidationReport:
    failures = []
    for n in NUMBERS:
        if n not in system.numerals:
            failures.append(ValidationFailure("missing", n, "no numeral"))
    for n in sorted(k for k in system.numerals if k not in NUMBERS):
        failures.append(ValidationFailure("out_of_range", n, "key outside 1..99"))
    seen: dict[tuple[Symbol, ...], int] = {}
    for n in sorted(system.numerals):
        num = system.numerals[n]
        value = evaluate(num)
        if value != n:
            failures.append(ValidationFailure("mismatch", n, f"{render(num)} evaluates to {value}"))
        if num.symbols in seen:
            failures.append(
                ValidationFailure("duplicate", n, f"{render(num)} already used for {seen[num.symbols]}")
            )
        else:
            seen[num.symbols] = n
    return ValidationReport(system.name, failures)


class InvalidSystemError(ValueError):
    def __init__(self, report: ValidationReport):
        super().__init__(str(report))
        self.report = report


def require_valid(system: NumeralSystem) -> NumeralSystem:
    report = validate_system(system)
    if not report.accepted:
        raise InvalidSystemError(report)
    return system


@dataclass(frozen=True)
class SystemStats:
    lexicon_size_atoms: int
    lexicon_size_all: int
    avg_complexity: Fraction


def stats(system: NumeralSystem) -> SystemStats:
    syms = system.symbols()
    lengths = sum(system.numerals[n].length for n in NUMBERS)
    return SystemStats(
        lexicon_size_atoms=sum(1 for s in syms if s.is_atom),
        lexicon_size_all=len(syms),
        avg_complexity=Fraction(lengths, len(NUMBERS)),
    )


# ---------------------------------------------------------------------------
# Built-in systems


def _positional(n: int, base: int) -> str:
    if n <= base - 1:
        return str(n)
    if n == base:
        return str(base)
    tens, unit = divmod(n, base)
    head = str(base) if tens == 1 else f"{tens}*{base}"
    return head if unit == 0 else f"{head}+{unit}"


def _below_twenty(n: int) -> str:
    # 1..10 atomic, 11..19 as 10+d
    return str(n) if n <= 10 else f"10+{n - 10}"


def _french(n: int) -> str:
    if n < 70:
        return _positional(n, 10)
    if n < 80:
        return "3*20+" + _below_twenty(n - 60)
    return "4*20" if n == 80 else "4*20+" + _below_twenty(n - 80)


def _basque(n: int) -> str:
    if n < 20:
        return _below_twenty(n)
    scores, rest = divmod(n, 20)
    head = "20" if scores == 1 else f"{scores}*20"
    return head if rest == 0 else f"{head}+{_below_twenty(rest)}"


def _nahuatl_rest(n: int) -> str:
    # 1..5 atomic; 5, 10, 15 are additive sub-bases
    if n <= 5 or n in (10, 15):
        return str(n)
    sub = max(b for b in (5, 10, 15) if b < n)
    return f"{sub}+{n - sub}"


def _nahuatl(n: int) -> str:
    if n < 20:
        return _nahuatl_rest(n)
    scores, rest = divmod(n, 20)
    head = "20" if scores == 1 else f"{scores}*20"
    return head if rest == 0 else f"{head}+{_nahuatl_rest(rest)}"


_BUILTINS = {
    "mandarin": (lambda n: _positional(n, 10), None),
    "base10": (lambda n: _positional(n, 10), None),
    "base20": (lambda n: _positional(n, 20), None),
    "french_like": (_french, frozenset({10, 20})),
    "basque_like": (_basque, frozenset({10, 20})),
    "nahuatl_like": (_nahuatl, frozenset({5, 10, 15, 20})),
}

BUILTIN_NAMES = tuple(_BUILTINS)


def builtin_system(name: str) -> NumeralSystem:
    """Return a built-in system: mandarin, base10, base20 (or ``base(b)``),
    french_like, basque_like, nahuatl_like."""
    m = re.fullmatch(r"base\((\d+)\)", name)
    if m:
        name = f"base{m.group(1)}"
    if name not in _BUILTINS:
        raise KeyError(f"unknown builtin system {name!r}; choose from {', '.join(BUILTIN_NAMES)}")
    form, multipliers = _BUILTINS[name]
    numerals = {n: tokenize(form(n)) for n in NUMBERS}
    return NumeralSystem(name=name, numerals=numerals, source="builtin", multipliers=multipliers)


# ---------------------------------------------------------------------------
# System-definition files


class SystemFileError(ValueError):
    def __init__(self, path, lineno: int | None, message: str):
        where = f"{path}:{lineno}" if lineno else str(path)
        super().__init__(f"{where}: {message}")
        self.lineno = lineno


def parse_system(text: str, name: str = "system", source: str = "ingested",
                 path: str = "<string>") -> NumeralSystem:
    """Parse the ``<n>\\t<numeral>`` format.

    Comment lines of the form ``# key: value`` are kept as metadata; the keys
    ``name`` and ``multipliers`` (space separated) are interpreted.
    """
    numerals: dict[int, Numeral] = {}
    meta: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = re.fullmatch(r"#\s*([A-Za-z_]+)\s*:\s*(.*)", line)
            if m:
                meta[m.group(1)] = m.group(2).strip()
            continue
        parts = raw.rstrip("\r\n").split("\t")
        if len(parts) != 2:
            raise SystemFileError(path, lineno, "expected '<n><TAB><numeral>'")
        key, form = parts[0].strip(), parts[1].strip()
        if not key.isdigit():
            raise SystemFileError(path, lineno, f"bad number {key!r}")
        n = int(key)
        if n not in NUMBERS:
            raise SystemFileError(path, lineno, f"number {n} outside 1..99")
        if n in numerals:
            raise SystemFileError(path, lineno, f"number {n} defined twice")
        try:
            numerals[n] = tokenize(form)
        except NumeralSyntaxError as exc:
            raise SystemFileError(path, lineno, str(exc)) from None
    missing = [n for n in NUMBERS if n not in numerals]
    if missing:
        raise SystemFileError(path, None, f"missing numbers: {missing[:10]}{'...' if len(missing) > 10 else ''}")
    multipliers = None
    if meta.get("multipliers"):
        multipliers = frozenset(int(x) for x in meta["multipliers"].split())
    return NumeralSystem(
        name=meta.get("name", name), numerals=numerals, source=meta.get("source", source),
        multipliers=multipliers, meta=meta,
    )


def format_system(system: NumeralSystem, extra: Mapping[str, str] | None = None) -> str:
    lines = [f"# name: {system.name}", f"# source: {system.source}"]
    if system.multipliers:
        lines.append("# multipliers: " + " ".join(str(m) for m in sorted(system.multipliers)))
    for key, value in (extra or {}).items():
        lines.append(f"# {key}: {value}")
    lines += [f"{n}\t{render(system.numerals[n])}" for n in sorted(system.numerals)]
    return "\n".join(lines) + "\n"


def read_system(path: str | Path) -> NumeralSystem:
    path = Path(path)
    return parse_system(path.read_text(encoding="utf-8"), name=path.stem, path=str(path))


def write_system(system: NumeralSystem, path: str | Path, extra: Mapping[str, str] | None = None) -> None:
    Path(path).write_text(format_system(system, extra), encoding="utf-8")
