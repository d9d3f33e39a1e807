"""Pair stegosystem for binary i.i.d. covertexts.

The covertext is read two letters at a time.  ``aa`` and ``bb`` are copied
through; a mixed pair is rewritten to ``ab`` for secret bit 0 and ``ba`` for
secret bit 1.  Under any i.i.d. source ``ab`` and ``ba`` have equal
probability, so the output has the source distribution exactly.
"""

from __future__ import annotations

import enum
from fractions import Fraction

from .core import BINARY, Alphabet, AlphabetError, EncodeResult, IIDSource, SecretProvider, StegoCodec


class PairClass(enum.Enum):
    U = "u"
    V0 = "v0"
    V1 = "v1"


def _require_binary(alphabet: Alphabet):
    if len(alphabet) != 2:
        raise AlphabetError(f"pair codec needs a binary alphabet, got {alphabet}")


def classify_pairs(x: str, alphabet: Alphabet = BINARY) -> list[tuple[PairClass, str]]:
    _require_binary(alphabet)
    alphabet.check(x)
    a, b = alphabet.symbols
    mixed = {a + b: PairClass.V0, b + a: PairClass.V1}
    out = []
    for i in range(0, len(x) - 1, 2):
        pair = x[i:i + 2]
        out.append((mixed.get(pair, PairClass.U), pair))
    return out


class PairCodec(StegoCodec):
    name = "pair"

    def __init__(self, alphabet: Alphabet = BINARY):
        _require_binary(alphabet)
        self.alphabet = alphabet
        a, b = alphabet.symbols
        self._v = (a + b, b + a)

    def __repr__(self):
        return f"PairCodec({self.alphabet})"

    def encode(self, x: str, secrets: SecretProvider) -> EncodeResult:
        self.alphabet.check(x)
        out = []
        t = 0
        for i in range(0, len(x) - 1, 2):
            pair = x[i:i + 2]
            if pair in self._v:
                pair = self._v[secrets.take(1) == "1"]
                t += 1
            out.append(pair)
        if len(x) % 2:
            out.append(x[-1])
        return EncodeResult(t, "".join(out))

    def decode(self, x: str) -> str:
        self.alphabet.check(x)
        v0, v1 = self._v
        bits = []
        for i in range(0, len(x) - 1, 2):
            pair = x[i:i + 2]
            if pair == v0:
                bits.append("0")
            elif pair == v1:
                bits.append("1")
        return "".join(bits)


def expected_rate(source: IIDSource, n: int | None = None) -> Fraction:
    """Closed-form speed mu(a)*mu(b) in bits per letter.

    For odd ``n`` the trailing letter carries nothing, so the speed is
    scaled by ``(n - 1) / n``.
    """
    _require_binary(source.alphabet)
    pa, pb = source.probs
    rate = pa * pb
    if n is not None and n % 2:
        rate = rate * Fraction(n - 1, n)
    return rate
