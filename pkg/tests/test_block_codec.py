from fractions import Fraction
from itertools import permutations, product

import pytest
from hypothesis import given, settings, strategies as st

from stegolab.block_codec import (
    BlockCodec,
    TypeClass,
    class_of,
    class_size,
    decomposition,
    embed_block,
    expected_class_bits,
    expected_rate,
    extract_block,
    rank,
    unrank,
)
from stegolab.core import BINARY, Alphabet, BudgetExceeded, FixedBits, IIDSource, SecretExhausted, enumerate_strings
from stegolab.pair_codec import PairCodec

TERNARY = Alphabet("abc")


def listing(block, alphabet=BINARY):
    """Brute-force lexicographic listing of a block's type class."""
    return sorted(set("".join(p) for p in permutations(block)), key=alphabet.sort_key)


def test_class_of():
    assert class_of("abab").counts == (2, 2)
    assert class_of("aaaa").counts == (4, 0)
    assert class_of("cab", TERNARY).counts == (1, 1, 1)


def test_class_size_against_enumeration():
    assert class_size(TypeClass((2, 2))) == len(listing("aabb")) == 6
    assert class_size(TypeClass((5, 0, 0))) == 1
    assert class_size(TypeClass((1, 1, 1))) == len(listing("abc", TERNARY)) == 6


def test_rank_examples():
    assert rank("ab") == 0 and rank("ba") == 1
    assert rank("aabb") == 0
    assert listing("aabb") == ["aabb", "abab", "abba", "baab", "baba", "bbaa"]
    assert rank("abab") == 1


@pytest.mark.parametrize("alphabet,l", [(BINARY, 6), (TERNARY, 5), (Alphabet("abcd"), 4)])
def test_rank_matches_brute_listing(alphabet, l):
    seen = set()
    for x in enumerate_strings(alphabet, l):
        key = tuple(sorted(x))
        if key in seen:
            continue
        seen.add(key)
        members = listing(x, alphabet)
        tc = class_of(x, alphabet)
        assert tc.size == len(members)
        for r, m in enumerate(members):
            assert rank(m, alphabet) == r
            assert unrank(tc, r, alphabet) == m


def test_unrank_range():
    with pytest.raises(ValueError):
        unrank(TypeClass((2, 2)), 6)
    with pytest.raises(ValueError):
        unrank(TypeClass((2, 2)), -1)


@given(st.text(alphabet="abcd", min_size=1, max_size=24))
def test_rank_unrank_inverse(block):
    alphabet = Alphabet("abcd")
    tc = class_of(block, alphabet)
    r = rank(block, alphabet)
    assert 0 <= r < tc.size
    assert unrank(tc, r, alphabet) == block


@given(st.integers(1, 10**30))
def test_decomposition_partitions_the_class(size):
    parts = decomposition(size)
    assert sum(p.size for p in parts) == size
    assert all(a.bits > b.bits for a, b in zip(parts, parts[1:]))
    offset = 0
    for p in parts:
        assert p.offset == offset
        offset += p.size


def test_decomposition_of_six():
    assert [(p.offset, p.size) for p in decomposition(6)] == [(0, 4), (4, 2)]


def test_embed_examples():
    assert embed_block("ab", FixedBits("1")) == (1, "ba")
    assert embed_block("aaa", FixedBits("")) == (0, "aaa")
    assert embed_block("abba", FixedBits("11")) == (2, "baab")
    # rank 4 and 5 share the 2-element part and carry one bit
    assert rank("baba") == 4
    assert embed_block("baba", FixedBits("0")) == (1, "baba")
    assert embed_block("baba", FixedBits("1")) == (1, "bbaa")


def test_extract_examples():
    assert extract_block("ba") == "1"
    assert extract_block("aaaa") == ""
    assert extract_block("baab") == "11"


def test_embed_exhaustion():
    with pytest.raises(SecretExhausted):
        embed_block("abba", FixedBits("1"))


def test_embed_stays_in_part():
    for x in enumerate_strings(TERNARY, 4):
        tc = class_of(x, TERNARY)
        r = rank(x, TERNARY)
        part = next(p for p in decomposition(tc.size) if p.offset <= r < p.offset + p.size)
        for bits in product("01", repeat=part.bits):
            b, y = embed_block(x, FixedBits("".join(bits)), TERNARY)
            assert b == part.bits
            assert part.offset <= rank(y, TERNARY) < part.offset + part.size
            assert class_of(y, TERNARY) == tc
            assert extract_block(y, TERNARY) == "".join(bits)


def test_l2_equals_pair_codec():
    block, pair = BlockCodec(BINARY, 2), PairCodec()
    for n in range(9):
        for x in enumerate_strings(BINARY, n):
            for bits in product("01", repeat=4):
                y = "".join(bits)
                assert block.encode(x, FixedBits(y)) == pair.encode(x, FixedBits(y))
            assert block.decode(x) == pair.decode(x)


def test_constant_blocks_carry_nothing():
    codec = BlockCodec(TERNARY, 3)
    assert codec.encode("aaabbbccc", FixedBits("")) == (0, "aaabbbccc")


def test_remainder_passes_through():
    codec = BlockCodec(BINARY, 4)
    res = codec.encode("abbaab", FixedBits("11"))
    assert res == (2, "baabab")
    assert codec.decode(res.stegotext) == "11"


@settings(max_examples=200)
@given(st.sampled_from(["ab", "abc", "abcde"]), st.integers(1, 7), st.data())
def test_codec_roundtrip_property(symbols, l, data):
    alphabet = Alphabet(symbols)
    codec = BlockCodec(alphabet, l)
    x = data.draw(st.text(alphabet=symbols, max_size=30))
    y = data.draw(st.text(alphabet="01", min_size=codec.max_bits(len(x)), max_size=codec.max_bits(len(x))))
    p = FixedBits(y)
    res = codec.encode(x, p)
    assert res.t == p.consumed and len(res.stegotext) == len(x)
    assert codec.decode(res.stegotext) == y[:res.t]


def _brute_rate(source, l):
    """E[bits]/l by enumerating every block and its class by permutation listing."""
    total = Fraction(0)
    for x in enumerate_strings(source.alphabet, l):
        members = listing(x, source.alphabet)
        size, r = len(members), members.index(x)
        offset, bits = 0, 0
        for b in range(size.bit_length() - 1, -1, -1):
            if size >> b & 1:
                if r < offset + 2**b:
                    bits = b
                    break
                offset += 2**b
        total += source.mass(x) * bits
    return total / l


def test_expected_rate_examples():
    uni = IIDSource.uniform()
    assert expected_rate(uni, 2) == Fraction(1, 4)
    assert expected_rate(uni, 4) == Fraction(13, 32) == _brute_rate(uni, 4)
    assert expected_rate(uni, 8) == Fraction(565, 1024) == _brute_rate(uni, 8)


@pytest.mark.parametrize("source,l", [
    (IIDSource.binary(Fraction(1, 3)), 6),
    (IIDSource(TERNARY, ("1/2", "1/3", "1/6")), 4),
    (IIDSource(TERNARY, ("0", "1/4", "3/4")), 5),
])
def test_expected_rate_against_brute(source, l):
    assert expected_rate(source, l) == _brute_rate(source, l)


def test_expected_rate_budget():
    with pytest.raises(BudgetExceeded):
        expected_rate(IIDSource.uniform(), 30, budget=2**20)


def test_rate_increases_toward_entropy():
    uni = IIDSource.uniform()
    rates = [expected_rate(uni, l) for l in (2, 4, 8, 16)]
    assert all(a < b for a, b in zip(rates, rates[1:]))
    assert rates[-1] < 1


def test_per_class_bit_bound():
    import math
    for l in range(1, 17):
        for k in range(l + 1):
            size = math.comb(l, k)
            assert expected_class_bits(size) >= math.log2(size) - 2
