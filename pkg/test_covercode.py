import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings, strategies as st

from app.core.exceptions import InputError
from app.models.code import Word
from app.services import covercode


@pytest.mark.parametrize("length, order, hamming_len", [(0, 0, 0), (1, 1, 1), (2, 1, 1), (7, 3, 7), (10, 3, 7), (15, 4, 15)])
def test_build_code_orders(length, order, hamming_len):
    code = covercode.build_code(length)
    assert (code.order, code.hamming_len) == (order, hamming_len)


def test_length_seven_has_sixteen_codewords():
    assert covercode.count_codewords_exhaustive(covercode.build_code(7)) == 16


def test_length_ten_density_and_count():
    code = covercode.build_code(10)
    assert covercode.density(code) == 0.125
    assert covercode.count_codewords_exhaustive(code) == 128 == covercode.codeword_count(code)


def test_zero_word_is_always_a_codeword():
    for n in (0, 1, 7, 12, 100):
        assert covercode.contains(covercode.build_code(n), Word.zeros(n))


def test_empty_word_in_empty_code():
    code = covercode.build_code(0)
    assert covercode.contains(code, Word.zeros(0))
    assert covercode.flip_to_code(code, Word.zeros(0)) is None


def test_single_bit_word_flips_back_to_zero():
    code = covercode.build_code(7)
    w = Word.from_string("1000000")
    assert not covercode.contains(code, w)
    assert covercode.flip_to_code(code, w) == 1
    assert w.flipped(1) == Word.zeros(7)


def test_suffix_bits_are_free():
    code = covercode.build_code(10)
    assert covercode.contains(code, Word.from_string("0000000111"))


def test_length_mismatch_is_rejected():
    with pytest.raises(InputError):
        covercode.contains(covercode.build_code(7), Word.zeros(6))
    with pytest.raises(InputError):
        covercode.flip_to_code(covercode.build_code(3), Word.zeros(4))


@pytest.mark.parametrize("length", range(0, 21))
def test_covering_radius_one(length):
    assert covercode.verify_covering(covercode.build_code(length))


@pytest.mark.parametrize("length", range(0, 16))
def test_codeword_count_matches_density(length):
    code = covercode.build_code(length)
    assert covercode.count_codewords_exhaustive(code) == 2 ** (length - code.order)
    if length:
        assert covercode.density(code) <= 2 / (length + 1)


def test_verify_covering_guard():
    with pytest.raises(InputError):
        covercode.verify_covering(covercode.build_code(40))


@hyp_settings(max_examples=300)
@given(st.sampled_from([7, 10, 31, 100]).flatmap(lambda n: st.lists(st.booleans(), min_size=n, max_size=n)))
def test_flip_lands_in_code(bits):
    w = Word(bits)
    code = covercode.build_code(w.length)
    t = covercode.flip_to_code(code, w)
    if t is None:
        assert covercode.contains(code, w)
    else:
        assert 1 <= t <= code.hamming_len
        assert covercode.contains(code, w.flipped(t))


@pytest.mark.slow
def test_flip_soundness_million_words():
    rng = np.random.default_rng(2024)
    for length in (7, 10, 31, 100):
        code = covercode.build_code(length)
        for row in rng.integers(0, 2, (250_000, length)).astype(bool):
            w = Word(row)
            t = covercode.flip_to_code(code, w)
            assert t is None or covercode.contains(code, w.flipped(t))


def test_long_words_use_blocked_syndrome():
    length = (1 << 21) + 5
    code = covercode.build_code(length)
    w = Word.zeros(length).flipped(1_500_000).flipped(3)
    assert covercode.syndrome(code, w) == 1_500_000 ^ 3
    assert covercode.contains(code, w.flipped(covercode.flip_to_code(code, w)))


@pytest.mark.parametrize("length, size", [(0, 1), (1, 1), (2, 2), (3, 2), (4, 4), (5, 7)])
def test_exhaustive_min_cover_sizes(length, size):
    cover = covercode.exhaustive_min_cover(length)
    assert len(cover) == size
    covered = set()
    for c in cover:
        covered.add(str(c))
        for t in range(1, length + 1):
            covered.add(str(c.flipped(t)))
    assert len(covered) == 2 ** length


def test_hamming_prefix_is_optimal_at_length_three():
    assert len(covercode.exhaustive_min_cover(3)) == covercode.codeword_count(covercode.build_code(3))


def test_exhaustive_min_cover_guard():
    with pytest.raises(InputError):
        covercode.exhaustive_min_cover(6)


def test_word_parsing():
    assert str(Word.from_string("10 1·1")) == "1011"
    assert Word.from_int(5, 4) == Word.from_string("0101")
    with pytest.raises(InputError):
        Word.from_string("012")
    with pytest.raises(IndexError):
        Word.zeros(3)[0]
