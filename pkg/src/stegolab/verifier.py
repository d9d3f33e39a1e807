"""Exact and statistical checks of stegosystem security, speed and decoding.

Exact checks sweep every covertext in the source support together with
every secret prefix the encoder can read.  Rather than running the encoder
on all 2**B prefixes, prefixes are grown on demand: the encoder runs on a
short prefix and, when it asks for more bits than the prefix holds, every
extension of the missing length is queued.  Each completed prefix of length
L stands for the 2**(B - L) full-length prefixes that extend it, so the
weights are identical to the full enumeration.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor, ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, NamedTuple, Optional

import numpy as np
from scipy import stats

from .core import (
    DEFAULT_BUDGET,
    Alphabet,
    AlphabetError,
    ContractViolation,
    EncodeResult,
    IIDSource,
    SecretProvider,
    Source,
    StegoCodec,
    FixedBits,
)


def fraction_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


# -- negative controls ----------------------------------------------------------

class IdentityCodec(StegoCodec):
    """Embeds nothing; output is the input."""

    name = "identity"

    def __init__(self, alphabet: Alphabet):
        self.alphabet = alphabet

    def encode(self, x, secrets):
        return EncodeResult(0, x)

    def decode(self, x):
        return ""


class ConstantCodec(StegoCodec):
    """Maps every covertext to the all-first-symbol string. Insecure."""

    name = "constant"

    def __init__(self, alphabet: Alphabet):
        self.alphabet = alphabet

    def encode(self, x, secrets):
        return EncodeResult(0, self.alphabet.symbols[0] * len(x))

    def decode(self, x):
        return ""


class SwappedDecoder(StegoCodec):
    """Wraps a codec and flips every decoded bit. Breaks round trips."""

    def __init__(self, inner: StegoCodec):
        self.inner = inner
        self.alphabet = inner.alphabet
        self.name = f"swapped-{inner.name}"

    def encode(self, x, secrets):
        return self.inner.encode(x, secrets)

    def decode(self, x):
        return self.inner.decode(x).translate(str.maketrans("01", "10"))


# -- adaptive secret enumeration -----------------------------------------------

class _NeedMore(Exception):
    def __init__(self, needed: int):
        self.needed = needed


class _PrefixBits(SecretProvider):
    def __init__(self, prefix: str):
        super().__init__()
        self.prefix = prefix

    def _next(self, k):
        end = self.consumed + k
        if end > len(self.prefix):
            raise _NeedMore(end)
        return self.prefix[self.consumed:end]


class Outcome(NamedTuple):
    prefix: str   # secret bits fed; 2**-(len(prefix) - len(start)) is its weight
    t: int
    stegotext: str


def outcomes(codec: StegoCodec, x: str, bound: int, start: str = "") -> Iterator[Outcome]:
    """Every distinct encoder run on ``x`` over secrets beginning with ``start``.

    Outcomes come in lexicographic prefix order.  Raises ContractViolation
    when the encoder reads more than ``bound`` bits, misreports ``t`` or
    changes the length.
    """
    stack = [start]
    while stack:
        prefix = stack.pop()
        provider = _PrefixBits(prefix)
        try:
            res = codec.encode(x, provider)
        except _NeedMore as exc:
            if exc.needed > bound:
                raise ContractViolation(
                    f"{codec.name} read more than {bound} secret bits on {x!r}") from None
            ext = exc.needed - len(prefix)
            for v in range((1 << ext) - 1, -1, -1):
                stack.append(prefix + format(v, f"0{ext}b"))
            continue
        if res.t != provider.consumed:
            raise ContractViolation(
                f"{codec.name} reported t={res.t} but consumed {provider.consumed} bits on {x!r}")
        if len(res.stegotext) != len(x):
            raise ContractViolation(f"{codec.name} changed the length of {x!r}")
        yield Outcome(prefix, res.t, res.stegotext)


def default_bound(codec: StegoCodec, n: int) -> int:
    return codec.max_bits(n)


# -- exhaustive sweep -------------------------------------------------------------

@dataclass
class _Tally:
    dist: dict
    masses: dict
    weighted_t: Fraction
    counterexample: Optional[tuple]

    def merge(self, other: "_Tally") -> "_Tally":
        dist = dict(self.dist)
        for k, v in other.dist.items():
            dist[k] = dist.get(k, 0) + v
        return _Tally(
            dist,
            {**self.masses, **other.masses},
            self.weighted_t + other.weighted_t,
            self.counterexample or other.counterexample,
        )


def _sweep_chunk(codec: StegoCodec, source: Source, xs: list[str], bound: int) -> _Tally:
    dist: dict[str, Fraction] = {}
    masses = {}
    weighted_t = Fraction(0)
    counterexample = None
    for x in xs:
        m = source.mass(x)
        masses[x] = m
        for out in outcomes(codec, x, bound):
            w = Fraction(m.numerator, m.denominator << len(out.prefix))
            dist[out.stegotext] = dist.get(out.stegotext, 0) + w
            weighted_t += w * out.t
            if counterexample is None:
                sent = out.prefix[:out.t]
                got = codec.decode(out.stegotext)
                if got != sent:
                    counterexample = (x, sent, out.stegotext, got)
    return _Tally(dist, masses, weighted_t, counterexample)


def _chunks(items: list, parts: int) -> list[list]:
    parts = max(1, min(parts, len(items) or 1))
    size = -(-len(items) // parts)
    return [items[i:i + size] for i in range(0, len(items), size)] or [[]]


def _sweep(codec, source, n, bound=None, budget=DEFAULT_BUDGET, workers=1) -> _Tally:
    bound = default_bound(codec, n) if bound is None else bound
    xs = list(source.support(n, budget))
    chunks = _chunks(xs, workers)
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            tallies = list(pool.map(_sweep_chunk, [codec] * len(chunks), [source] * len(chunks),
                                    chunks, [bound] * len(chunks)))
    else:
        tallies = [_sweep_chunk(codec, source, c, bound) for c in chunks]
    total = tallies[0]
    for t in tallies[1:]:
        total = total.merge(t)
    return total


def exact_output_distribution(codec: StegoCodec, source: Source, n: int, bound: int | None = None,
                              budget: int = DEFAULT_BUDGET, workers: int = 1) -> dict[str, Fraction]:
    """Exact Pr(StEnc = x') for every reachable x', in lexicographic order."""
    dist = _sweep(codec, source, n, bound, budget, workers).dist
    key = codec.alphabet.sort_key
    return {k: dist[k] for k in sorted(dist, key=key)}


def measure_speed(codec: StegoCodec, source: Source, n: int, bound: int | None = None,
                  budget: int = DEFAULT_BUDGET, workers: int = 1) -> Fraction:
    """Exact E[t] / n."""
    if n == 0:
        return Fraction(0)
    return _sweep(codec, source, n, bound, budget, workers).weighted_t / n


class RoundtripResult(NamedTuple):
    ok: bool
    counterexample: Optional[tuple]   # (covertext, bits sent, stegotext, bits decoded)


def verify_roundtrip(codec: StegoCodec, source: Source, n: int, bound: int | None = None,
                     budget: int = DEFAULT_BUDGET) -> RoundtripResult:
    cx = _sweep(codec, source, n, bound, budget).counterexample
    return RoundtripResult(cx is None, cx)


@dataclass(frozen=True)
class SecurityReport:
    codec: str
    source: str
    n: int
    secure: bool
    max_discrepancy: Fraction
    worst_string: Optional[str]
    roundtrip_ok: bool
    exact_speed: Fraction

    def to_dict(self) -> dict:
        return {
            "codec": self.codec,
            "source": self.source,
            "n": self.n,
            "secure": self.secure,
            "max_discrepancy": fraction_str(self.max_discrepancy),
            "worst_string": self.worst_string,
            "roundtrip_ok": self.roundtrip_ok,
            "exact_speed": fraction_str(self.exact_speed),
        }


def verify_perfect_security(codec: StegoCodec, source: Source, n: int, bound: int | None = None,
                            budget: int = DEFAULT_BUDGET, workers: int = 1) -> SecurityReport:
    tally = _sweep(codec, source, n, bound, budget, workers)
    for x in tally.dist:
        try:
            codec.alphabet.check(x)
        except AlphabetError as exc:
            raise ContractViolation(f"{codec.name} emitted {x!r}: {exc}") from None
    worst, worst_key, max_gap = None, None, Fraction(0)
    for x in set(tally.dist) | set(tally.masses):
        mass = tally.masses[x] if x in tally.masses else source.mass(x)
        gap = abs(tally.dist.get(x, Fraction(0)) - mass)
        if gap == 0:
            continue
        key = codec.alphabet.sort_key(x)
        if gap > max_gap or (gap == max_gap and key < worst_key):
            worst, worst_key, max_gap = x, key, gap
    speed = tally.weighted_t / n if n else Fraction(0)
    return SecurityReport(
        codec=codec.name,
        source=source.describe(),
        n=n,
        secure=max_gap == 0,
        max_discrepancy=max_gap,
        worst_string=worst,
        roundtrip_ok=tally.counterexample is None,
        exact_speed=speed,
    )


# -- Monte Carlo ---------------------------------------------------------------------

MIN_TRIALS = 1000


@dataclass(frozen=True)
class MonteCarloReport:
    codec: str
    source: str
    n: int
    trials: int
    seed: int
    threads: int
    chi2: float
    dof: int
    p_value: float
    alpha: float
    rejected: bool
    empirical_speed: float
    speed_ci: tuple[float, float]
    pair_counts: dict

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["speed_ci"] = list(self.speed_ci)
        return d


def _mc_chunk(codec: StegoCodec, source: IIDSource, n: int, trials: int, seed: int, index: int):
    rng = np.random.default_rng([seed, index])
    k = len(source.alphabet)
    probs = np.array([float(p) for p in source.probs])
    codes = np.frombuffer("".join(source.alphabet.symbols).encode("ascii"), dtype=np.uint8)
    covers = codes[rng.choice(k, size=(trials, n), p=probs)].tobytes().decode("ascii")
    nbits = codec.max_bits(n)
    secrets = (rng.integers(0, 2, size=(trials, nbits), dtype=np.uint8) + ord("0")).tobytes().decode("ascii")
    pairs: Counter = Counter()
    ts = []
    for i in range(trials):
        x = covers[i * n:(i + 1) * n]
        res = codec.encode(x, FixedBits(secrets[i * nbits:(i + 1) * nbits]))
        y = res.stegotext
        pairs.update(y[j:j + 2] for j in range(0, n - 1, 2))
        ts.append(res.t)
    return pairs, ts


def monte_carlo_check(codec: StegoCodec, source: IIDSource, n: int, trials: int, seed: int,
                      threads: int = 1, alpha: float = 0.001) -> MonteCarloReport:
    """Chi-square of pair-type counts in stegotexts against the source.

    Covertexts and secrets come from numpy's PCG64 generator seeded with
    ``[seed, chunk index]``; trials are split into ``threads`` chunks, so a
    report is reproducible for a fixed seed and thread count.
    """
    if trials < MIN_TRIALS:
        raise ValueError(f"monte carlo check needs at least {MIN_TRIALS} trials")
    if n < 2:
        raise ValueError("n must be at least 2 to form pairs")
    sizes = [trials // threads + (i < trials % threads) for i in range(threads)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(lambda i: _mc_chunk(codec, source, n, sizes[i], seed, i), range(threads)))
    pairs: Counter = Counter()
    ts: list[int] = []
    for p, t in results:
        pairs.update(p)
        ts.extend(t)

    labels = [a + b for a in source.alphabet for b in source.alphabet]
    total_pairs = trials * (n // 2)
    expected = np.array([float(source.mass(lab)) * total_pairs for lab in labels])
    observed = np.array([pairs.get(lab, 0) for lab in labels], dtype=float)
    live = expected > 0
    if observed[~live].sum() > 0:
        chi2, p_value = math.inf, 0.0
    else:
        chi2, p_value = stats.chisquare(observed[live], expected[live])
        chi2, p_value = float(chi2), float(p_value)
    dof = int(live.sum()) - 1

    rates = np.array(ts, dtype=float) / n
    mean = float(rates.mean())
    half = 1.96 * float(rates.std(ddof=1)) / math.sqrt(trials)
    return MonteCarloReport(
        codec=codec.name,
        source=source.describe(),
        n=n,
        trials=trials,
        seed=seed,
        threads=threads,
        chi2=chi2,
        dof=dof,
        p_value=p_value,
        alpha=alpha,
        rejected=p_value < alpha,
        empirical_speed=mean,
        speed_ci=(mean - half, mean + half),
        pair_counts={lab: int(pairs.get(lab, 0)) for lab in labels},
    )
