"""Alphabets, exact covertext sources, secret-bit providers and the codec contract.

Strings are plain ``str`` objects whose characters are alphabet symbols.
Secret bits travel as ``str`` of ``'0'``/``'1'`` characters, so the empty
string is the empty message (written Λ in the docs).
"""

from __future__ import annotations

import abc
import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterator, NamedTuple, Sequence, Union

DEFAULT_BUDGET = 2**26


class StegoError(Exception):
    """Base class for all toolkit errors."""


class AlphabetError(StegoError, ValueError):
    pass


class BudgetExceeded(StegoError):
    """An exhaustive enumeration would exceed the configured string budget."""

    def __init__(self, needed: int, budget: int):
        self.needed = needed
        self.budget = budget
        super().__init__(f"enumeration of {needed} strings exceeds budget {budget}")


class SecretExhausted(StegoError):
    """A finite secret provider ran out of bits."""


class ContractViolation(StegoError):
    """A codec broke the stegosystem contract (length change, bit overuse)."""


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple[str, ...]

    def __init__(self, symbols: Union[str, Sequence[str]]):
        syms = tuple(symbols)
        if len(syms) < 2:
            raise AlphabetError("alphabet needs at least two symbols")
        if any(len(s) != 1 for s in syms):
            raise AlphabetError("symbols must be single characters")
        if len(set(syms)) != len(syms):
            raise AlphabetError(f"duplicate symbols in {''.join(syms)!r}")
        object.__setattr__(self, "symbols", syms)
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(syms)})

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __contains__(self, symbol) -> bool:
        return symbol in self._index

    def __str__(self) -> str:
        return "".join(self.symbols)

    def index(self, symbol: str) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise AlphabetError(f"symbol {symbol!r} not in alphabet {self}") from None

    @property
    def bits_per_symbol(self) -> int:
        """ceil(log2 |A|), the per-letter cap on embedded bits."""
        return (len(self.symbols) - 1).bit_length()

    def sort_key(self, x: str) -> tuple[int, ...]:
        return tuple(self._index[c] for c in x)

    def check(self, x: str, n: int | None = None) -> str:
        for c in x:
            if c not in self._index:
                raise AlphabetError(f"symbol {c!r} not in alphabet {self}")
        if n is not None and len(x) != n:
            raise AlphabetError(f"string of length {len(x)} where n={n} expected")
        return x


BINARY = Alphabet("ab")


def enumerate_strings(alphabet: Alphabet, n: int, budget: int = DEFAULT_BUDGET) -> Iterator[str]:
    """Yield every string of length ``n`` in the alphabet's lexicographic order."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    count = len(alphabet) ** n
    if count > budget:
        raise BudgetExceeded(count, budget)
    for tup in itertools.product(alphabet.symbols, repeat=n):
        yield "".join(tup)


def _fraction(value) -> Fraction:
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


class Source(abc.ABC):
    """An exact probability model over strings of one length."""

    alphabet: Alphabet

    @abc.abstractmethod
    def mass(self, x: str) -> Fraction: ...

    @abc.abstractmethod
    def support(self, n: int, budget: int = DEFAULT_BUDGET) -> Iterator[str]:
        """Strings of length ``n`` with nonzero mass, in lexicographic order."""

    @abc.abstractmethod
    def describe(self) -> str: ...


@dataclass(frozen=True)
class IIDSource(Source):
    alphabet: Alphabet
    probs: tuple[Fraction, ...]

    def __post_init__(self):
        probs = tuple(_fraction(p) for p in self.probs)
        object.__setattr__(self, "probs", probs)
        if len(probs) != len(self.alphabet):
            raise ValueError("one probability per symbol required")
        if any(p < 0 for p in probs):
            raise ValueError("probabilities must be nonnegative")
        if sum(probs) != 1:
            raise ValueError(f"probabilities sum to {sum(probs)}, not 1")

    @classmethod
    def uniform(cls, alphabet: Alphabet | str = BINARY) -> "IIDSource":
        alphabet = alphabet if isinstance(alphabet, Alphabet) else Alphabet(alphabet)
        k = len(alphabet)
        return cls(alphabet, tuple(Fraction(1, k) for _ in range(k)))

    @classmethod
    def binary(cls, p_a, alphabet: Alphabet = BINARY) -> "IIDSource":
        p_a = _fraction(p_a)
        return cls(alphabet, (p_a, 1 - p_a))

    def prob(self, symbol: str) -> Fraction:
        return self.probs[self.alphabet.index(symbol)]

    def mass(self, x: str) -> Fraction:
        m = Fraction(1)
        for c in x:
            m *= self.probs[self.alphabet.index(c)]
        return m

    def support(self, n: int, budget: int = DEFAULT_BUDGET) -> Iterator[str]:
        dead = {s for s, p in zip(self.alphabet, self.probs) if p == 0}
        for x in enumerate_strings(self.alphabet, n, budget):
            if not dead or not dead.intersection(x):
                yield x

    def describe(self) -> str:
        return ",".join(f"{s}={p.numerator}/{p.denominator}" for s, p in zip(self.alphabet, self.probs))


@dataclass(frozen=True)
class SubsetSource(Source):
    """Uniform distribution over an explicit set of equal-length strings."""

    n: int
    members: frozenset[str]
    alphabet: Alphabet = BINARY
    label: str = field(default="subset", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "members", frozenset(self.members))
        for x in self.members:
            self.alphabet.check(x, self.n)

    def __len__(self) -> int:
        return len(self.members)

    def mass(self, x: str) -> Fraction:
        self.alphabet.check(x, self.n)
        if x in self.members:
            return Fraction(1, len(self.members))
        return Fraction(0)

    def support(self, n: int | None = None, budget: int = DEFAULT_BUDGET) -> Iterator[str]:
        if n is not None and n != self.n:
            raise AlphabetError(f"subset source has n={self.n}, asked for n={n}")
        if len(self.members) > budget:
            raise BudgetExceeded(len(self.members), budget)
        return iter(self.sorted())

    def sorted(self) -> list[str]:
        return sorted(self.members, key=self.alphabet.sort_key)

    def describe(self) -> str:
        return f"{self.label}(n={self.n},|X|={len(self.members)})"


def string_mass(source: Source, x: str) -> Fraction:
    source.alphabet.check(x)
    return source.mass(x)


def binary_entropy(p) -> float:
    """H2(p) in bits, with 0 log 0 = 0."""
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability {p} outside [0, 1]")
    if p in (0.0, 1.0):
        return 0.0
    return -(p * math.log2(p) + (1 - p) * math.log2(1 - p))


def shannon_entropy(source: IIDSource) -> float:
    return -sum(float(p) * math.log2(p) for p in source.probs if p > 0) + 0.0


def subset_entropy(source: SubsetSource) -> float:
    if not source.members:
        raise ValueError("entropy of an empty subset source is undefined")
    return math.log2(len(source.members))


# -- source config files ------------------------------------------------------

def parse_source(text: str) -> Source:
    """Parse a source config.

    Either ``symbol=p/q`` lines (line order is alphabet order) or a
    ``subset n=<n>`` header followed by one member string per line.
    Blank lines and ``#`` comments are ignored.
    """
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ValueError("empty source config")
    head = lines[0]
    if head.startswith("subset"):
        parts = dict(p.split("=", 1) for p in head.split()[1:])
        if "n" not in parts:
            raise ValueError("subset header must declare n=<n>")
        n = int(parts["n"])
        members = lines[1:]
        if len(set(members)) != len(members):
            raise ValueError("duplicate members in subset source")
        symbols = parts.get("alphabet")
        if symbols is None:
            seen = sorted(set("".join(members)))
            symbols = "".join(seen) if len(seen) >= 2 else "ab"
        return SubsetSource(n, frozenset(members), Alphabet(symbols))
    symbols, probs = [], []
    for ln in lines:
        if "=" not in ln:
            raise ValueError(f"malformed source line {ln!r}; expected symbol=p/q")
        sym, val = (s.strip() for s in ln.split("=", 1))
        symbols.append(sym)
        probs.append(Fraction(val))
    return IIDSource(Alphabet(symbols), tuple(probs))


def format_source(source: Source) -> str:
    if isinstance(source, IIDSource):
        return "".join(f"{s}={p.numerator}/{p.denominator}\n" for s, p in zip(source.alphabet, source.probs))
    lines = [f"subset n={source.n} alphabet={source.alphabet}"] + source.sorted()
    return "\n".join(lines) + "\n"


def load_source(spec: str) -> Source:
    """Resolve ``uniformK`` names, inline ``a=2/3,b=1/3`` specs, or config file paths."""
    if spec.startswith("uniform") and spec[7:].isdigit():
        k = int(spec[7:])
        return IIDSource.uniform(Alphabet("abcdefghijklmnopqrstuvwxyz"[:k]))
    path = Path(spec)
    if path.is_file():
        return parse_source(path.read_text())
    if "=" in spec and "\n" not in spec and not spec.startswith("subset"):
        return parse_source(spec.replace(",", "\n"))
    raise ValueError(f"unknown source {spec!r}: not a builtin name, inline spec or file")


# -- secret bits ----------------------------------------------------------------

class SecretProvider(abc.ABC):
    """On-demand supplier of fair secret bits; counts what it hands out."""

    def __init__(self):
        self.consumed = 0

    def take(self, k: int) -> str:
        if k < 0:
            raise ValueError("cannot take a negative number of bits")
        bits = self._next(k)
        self.consumed += k
        return bits

    @abc.abstractmethod
    def _next(self, k: int) -> str: ...


class FixedBits(SecretProvider):
    """Bits from an explicit finite sequence; raises on exhaustion."""

    def __init__(self, bits: str):
        super().__init__()
        if set(bits) - {"0", "1"}:
            raise ValueError("secret bits must be '0'/'1' characters")
        self.bits = bits

    def _next(self, k: int) -> str:
        end = self.consumed + k
        if end > len(self.bits):
            raise SecretExhausted(
                f"secret has {len(self.bits)} bits, {end} requested")
        return self.bits[self.consumed:end]

    @property
    def used(self) -> str:
        return self.bits[:self.consumed]


class SeededBits(SecretProvider):
    """Unbounded bits from Python's Mersenne Twister seeded with ``seed``.

    Bits are drawn in 32-bit words, most significant first, so the stream
    does not depend on how callers chunk their requests.
    """

    def __init__(self, seed: int):
        super().__init__()
        self.seed = seed
        self._rng = random.Random(seed)
        self._buf = ""

    def _next(self, k: int) -> str:
        while len(self._buf) < self.consumed + k:
            self._buf += format(self._rng.getrandbits(32), "032b")
        return self._buf[self.consumed:self.consumed + k]

    @property
    def used(self) -> str:
        return self._buf[:self.consumed]


# -- codec contract -------------------------------------------------------------

class EncodeResult(NamedTuple):
    t: int
    stegotext: str


class StegoCodec(abc.ABC):
    """Encoder/decoder pair over strings of one alphabet.

    ``encode`` reads exactly ``t`` bits from the provider and returns a
    stegotext of the input's length; ``decode`` is total and returns the
    embedded bits ('' when nothing is embedded).
    """

    name: str = "codec"
    alphabet: Alphabet = BINARY

    @abc.abstractmethod
    def encode(self, x: str, secrets: SecretProvider) -> EncodeResult: ...

    @abc.abstractmethod
    def decode(self, x: str) -> str: ...

    def max_bits(self, n: int) -> int:
        return n * self.alphabet.bits_per_symbol
