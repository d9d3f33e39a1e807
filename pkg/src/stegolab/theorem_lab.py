"""Computable pieces of the impossibility argument for high-rate stegosystems.

Kolmogorov complexity is incomputable.  Everywhere below it is replaced by
``complexity_proxy``: the length of a zlib (DEFLATE, LZ77 + Huffman)
compression with pinned parameters.  Columns derived from it are labelled
``proxy`` and must never be read as K itself.  Random subsets stand in for
sets of maximal complexity.
"""

from __future__ import annotations

import math
import random
import zlib
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple

from .core import (
    BINARY,
    Alphabet,
    BudgetExceeded,
    EncodeResult,
    SecretProvider,
    StegoCodec,
    SubsetSource,
    _fraction,
    binary_entropy,
)
from .verifier import outcomes

EXACT_BINOMIAL_LIMIT = 2**20
MAX_SUBSET_N = 20

ZLIB_PARAMS = {"level": 9, "method": "deflated", "wbits": 15, "memLevel": 9, "strategy": "default"}


def gamma(delta) -> float:
    delta = float(delta)
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta={delta} outside [0, 1]")
    return 1.0 - binary_entropy((1.0 - delta) / 2.0)


def min_codeword_count(n: int, delta) -> int:
    """Smallest |Z| compatible with speed ``delta`` over 2**(n-1) equiprobable words."""
    d = _fraction(delta)
    return math.ceil(d * 2 ** (n - 1))


def log_binomial(m: int, k: int) -> float:
    """log2 C(m, k); exact big-integer binomial up to ``EXACT_BINOMIAL_LIMIT``."""
    if not 0 <= k <= m:
        raise ValueError(f"need 0 <= k <= m, got m={m}, k={k}")
    if m <= EXACT_BINOMIAL_LIMIT:
        return math.log2(math.comb(m, k))
    return (math.lgamma(m + 1) - math.lgamma(k + 1) - math.lgamma(m - k + 1)) / math.log(2)


def log_binomial_method(m: int) -> str:
    return "exact" if m <= EXACT_BINOMIAL_LIMIT else "lgamma"


class StirlingCheck(NamedTuple):
    exact: float
    bound: float
    relative_gap: float


def stirling_bound_check(n: int, delta) -> StirlingCheck:
    """Compare log2 C(2^n, 2^(n-1)(1-delta)) with its entropy estimate 2^n H2((1-delta)/2)."""
    if n > MAX_SUBSET_N:
        raise BudgetExceeded(2**n, 2**MAX_SUBSET_N)
    d = _fraction(delta)
    if not 0 <= d <= 1:
        raise ValueError(f"delta={delta} outside [0, 1]")
    m = 2**n
    k = round(Fraction(m, 2) * (1 - d))
    exact = log_binomial(m, k)
    bound = m * binary_entropy((1 - d) / 2)
    return StirlingCheck(exact, bound, abs(exact - bound) / m)


def random_subset_source(n: int, seed: int, alphabet: Alphabet = BINARY) -> SubsetSource:
    """Uniformly random half of A^n (binary), reproducible from ``seed``."""
    if len(alphabet) != 2:
        raise ValueError("random subset sources are binary")
    if n < 1:
        raise ValueError("n must be positive")
    if n > MAX_SUBSET_N:
        raise BudgetExceeded(2**n, 2**MAX_SUBSET_N)
    a, b = alphabet.symbols
    picks = random.Random(seed).sample(range(2**n), 2 ** (n - 1))
    table = str.maketrans("01", a + b)
    members = frozenset(format(v, f"0{n}b").translate(table) for v in picks)
    return SubsetSource(n, members, alphabet, label=f"random-subset(seed={seed})")


def structured_subset_source(n: int, alphabet: Alphabet = BINARY) -> SubsetSource:
    """All strings starting with the first symbol: a half of A^n with a one-line description."""
    a, b = alphabet.symbols[:2]
    table = str.maketrans("01", a + b)
    members = frozenset(a + format(v, f"0{n - 1}b").translate(table) for v in range(2 ** (n - 1)))
    return SubsetSource(n, members, alphabet, label="first-symbol-fixed")


class SubsetStegoWitness(StegoCodec):
    """Table-driven stegosystem over a uniform subset source.

    Each pair {lo, hi} (lo lexicographically smaller) carries one bit:
    a member of the pair is replaced by lo for bit 0 and hi for bit 1.
    Unpaired strings pass through with t = 0.
    """

    name = "witness"

    def __init__(self, source: SubsetSource, pairs: Iterable[tuple[str, str]]):
        self.source = source
        self.alphabet = source.alphabet
        key = self.alphabet.sort_key
        self.pairs: list[tuple[str, str]] = []
        self._partner: dict[str, tuple[str, str]] = {}
        for p, q in pairs:
            lo, hi = sorted((p, q), key=key)
            if lo == hi:
                raise ValueError(f"cannot pair {lo!r} with itself")
            for s in (lo, hi):
                if s in self._partner:
                    raise ValueError(f"{s!r} appears in two pairs")
                if s not in source.members:
                    raise ValueError(f"{s!r} is not in the subset")
                self._partner[s] = (lo, hi)
            self.pairs.append((lo, hi))

    def encode(self, x: str, secrets: SecretProvider) -> EncodeResult:
        pair = self._partner.get(x)
        if pair is None:
            return EncodeResult(0, x)
        return EncodeResult(1, pair[secrets.take(1) == "1"])

    def decode(self, x: str) -> str:
        pair = self._partner.get(x)
        if pair is None:
            return ""
        return "0" if x == pair[0] else "1"

    def max_bits(self, n: int) -> int:
        return min(1, n)


def build_pairing_witness(source: SubsetSource, pair_fraction, seed: int) -> SubsetStegoWitness:
    frac = _fraction(pair_fraction)
    if not 0 <= frac <= 1:
        raise ValueError("pair_fraction must lie in [0, 1]")
    k = math.floor(frac * len(source) / 2)
    if frac > 0 and len(source) < 2:
        raise ValueError("need at least two strings to pair")
    members = source.sorted()
    random.Random(seed).shuffle(members)
    pairs = [(members[2 * i], members[2 * i + 1]) for i in range(k)]
    return SubsetStegoWitness(source, pairs)


class FlipLastWitness(StegoCodec):
    """Rule-based full-rate witness for ``structured_subset_source``.

    The last letter of a member carries one bit; the rest is left alone.
    """

    name = "flip-last"

    def __init__(self, source: SubsetSource):
        self.source = source
        self.alphabet = source.alphabet
        self._lead = self.alphabet.symbols[0]

    def _covered(self, x: str) -> bool:
        return len(x) >= 2 and x[0] == self._lead and x[-1] in self.alphabet.symbols[:2]

    def encode(self, x, secrets):
        if not self._covered(x):
            return EncodeResult(0, x)
        return EncodeResult(1, x[:-1] + self.alphabet.symbols[int(secrets.take(1))])

    def decode(self, x):
        if not self._covered(x):
            return ""
        return "0" if x[-1] == self.alphabet.symbols[0] else "1"

    def max_bits(self, n):
        return min(1, n)

    def rule_text(self) -> str:
        a, b = self.alphabet.symbols[:2]
        return (f"n={self.source.n}\nX: x[0]=={a}\n"
                f"decode: x in X -> 0 if x[-1]=={a}, 1 if x[-1]=={b}\n")


@dataclass(frozen=True)
class CodewordSets:
    Z: frozenset
    Z0: frozenset
    Z1: frozenset


def codeword_sets(codec: StegoCodec, domain: Iterable[str]) -> CodewordSets:
    z0, z1 = set(), set()
    for x in domain:
        bits = codec.decode(x)
        if bits:
            (z0 if bits[0] == "0" else z1).add(x)
    return CodewordSets(frozenset(z0 | z1), frozenset(z0), frozenset(z1))


def max_t(codec: StegoCodec, domain: Iterable[str], n: int) -> int:
    return max((o.t for x in domain for o in outcomes(codec, x, codec.max_bits(n))), default=0)


@dataclass
class ClosureResult:
    fixpoint: frozenset
    k0: int
    sizes: list[int]
    escaped: frozenset = field(default_factory=frozenset)

    @property
    def violation(self) -> bool:
        return bool(self.escaped)


def phi(codec: StegoCodec, T: Iterable[str], bound: int) -> set[str]:
    """Encoder images of T under every secret starting with 1."""
    return {o.stegotext for x in T for o in outcomes(codec, x, bound, start="1")}


def closure(codec: StegoCodec, X: Iterable[str], T0: Iterable[str]) -> ClosureResult:
    """Iterate T_k = T_{k-1} | phi(T_{k-1}) inside X until nothing new appears.

    Images that land outside X are collected in ``escaped`` (a security
    violation for a codec claimed secure over X) and not iterated further.
    """
    X = frozenset(X)
    T = frozenset(T0)
    if not T <= X:
        raise ValueError("T0 must be a subset of X")
    n = len(next(iter(X))) if X else 0
    bound = 1 + max_t(codec, X, n)
    escaped: set[str] = set()
    sizes = [len(T)]
    k = 0
    while True:
        images = phi(codec, T, bound)
        escaped |= images - X
        nxt = T | (images & X)
        if nxt == T:
            break
        T = nxt
        k += 1
        sizes.append(len(T))
    return ClosureResult(T, k, sizes, frozenset(escaped))


# -- complexity proxy ------------------------------------------------------------

def complexity_proxy(payload: bytes) -> int:
    """Compressed size in bytes under the pinned zlib parameters."""
    if not payload:
        raise ValueError("payload must be nonempty")
    c = zlib.compressobj(level=9, method=zlib.DEFLATED, wbits=15, memLevel=9,
                         strategy=zlib.Z_DEFAULT_STRATEGY)
    return len(c.compress(payload) + c.flush())


def serialize_decode_table(codec: StegoCodec, domain: Iterable[str]) -> bytes:
    """``string<TAB>bits`` per codeword, lexicographic, newline-terminated."""
    key = codec.alphabet.sort_key
    z = codeword_sets(codec, domain).Z
    return "".join(f"{x}\t{codec.decode(x)}\n" for x in sorted(z, key=key)).encode("ascii")


class ExperimentRow(NamedTuple):
    n: int
    kind: str
    seed: int | None
    table_bytes: int
    proxy: int


def decoder_description_experiment(n_range: Iterable[int], seeds: Iterable[int]) -> list[ExperimentRow]:
    """Proxy sizes of full-rate decoders: random-X tables vs the structured-X rule."""
    seeds = list(seeds)
    rows = []
    for n in n_range:
        if not 2 <= n <= MAX_SUBSET_N:
            raise BudgetExceeded(2**n, 2**MAX_SUBSET_N)
        for seed in seeds:
            src = random_subset_source(n, seed)
            witness = build_pairing_witness(src, 1, seed)
            table = serialize_decode_table(witness, src.members)
            rows.append(ExperimentRow(n, "random", seed, len(table), complexity_proxy(table)))
        rule = FlipLastWitness(structured_subset_source(n)).rule_text().encode("ascii")
        rows.append(ExperimentRow(n, "structured", None, len(rule), complexity_proxy(rule)))
    return rows
