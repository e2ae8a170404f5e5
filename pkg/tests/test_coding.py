import itertools
import math

import numpy as np
import pytest

from blindaccess.coding import (
    bits_to_int,
    cipher_bit_length,
    decode_message,
    draw_message_and_signal,
    encode_message,
    int_to_bits,
    message_bit_length,
    message_space_size,
    random_index,
    subset_rank,
    subset_unrank,
)


class TestSpaceSize:
    def test_counting(self):
        assert message_space_size(16, 3) == math.comb(16, 3) * 2**2
        assert message_space_size(4, 1) == 4
        assert message_space_size(5, 5) == 2**4

    def test_bit_lengths(self):
        size = message_space_size(16, 3)
        full = message_bit_length(16, 3)
        safe = cipher_bit_length(16, 3)
        assert 2**full >= size > 2 ** (full - 1)
        assert 2**safe <= size < 2 ** (safe + 1)

    def test_invalid(self):
        with pytest.raises(ValueError):
            message_space_size(4, 0)
        with pytest.raises(ValueError):
            message_space_size(4, 5)


class TestSubsetCodec:
    def test_colex_order_oracle(self):
        # Colexicographic order sorts subsets by their reversed tuples.
        for e, s in ((7, 3), (6, 2), (5, 1)):
            subsets = sorted(
                itertools.combinations(range(e), s), key=lambda c: tuple(reversed(c))
            )
            for position, subset in enumerate(subsets):
                assert subset_rank(subset) == position
                assert subset_unrank(position, s) == subset

    def test_rank_zero_is_initial_segment(self):
        assert subset_unrank(0, 4) == (0, 1, 2, 3)

    def test_rejects_unsorted(self):
        with pytest.raises(ValueError):
            subset_rank((2, 1))


class TestMessageCodec:
    def test_zero_message(self):
        b = encode_message(0, 8, 3)
        assert np.flatnonzero(b).tolist() == [0, 1, 2]
        assert b[[0, 1, 2]].tolist() == [1.0, 1.0, 1.0]

    def test_round_trip_full_space_small(self):
        for e, s in ((6, 2), (5, 3), (4, 1)):
            for m in range(message_space_size(e, s)):
                b = encode_message(m, e, s)
                assert np.count_nonzero(b) == s
                assert set(np.unique(b[b != 0])) <= {-1.0, 1.0}
                assert b[np.flatnonzero(b)[0]] == 1.0  # anchor
                assert decode_message(b, s) == m

    def test_round_trip_random_large(self):
        rng = np.random.default_rng(0)
        size = message_space_size(16, 3)
        for _ in range(1000):
            m = random_index(size, rng)
            assert decode_message(encode_message(m, 16, 3), 3) == m

    def test_out_of_range_index(self):
        with pytest.raises(ValueError):
            encode_message(message_space_size(6, 2), 6, 2)

    def test_decode_is_total_on_noisy_input(self):
        rng = np.random.default_rng(1)
        noisy = rng.standard_normal(12)
        m = decode_message(noisy, 3)
        assert 0 <= m < message_space_size(12, 3)

    def test_decode_scale_invariant(self):
        b = encode_message(37, 10, 3)
        assert decode_message(0.01 * b, 3) == 37


class TestBits:
    def test_round_trip(self):
        for width in (1, 5, 13):
            for x in (0, 1, (1 << width) - 1):
                assert bits_to_int(int_to_bits(x, width)) == x

    def test_big_endian(self):
        assert int_to_bits(6, 4).tolist() == [0, 1, 1, 0]

    def test_overflow_rejected(self):
        with pytest.raises(ValueError):
            int_to_bits(8, 3)


class TestDraw:
    def test_structure_and_determinism(self):
        rng1 = np.random.default_rng(5)
        rng2 = np.random.default_rng(5)
        bits1, b1 = draw_message_and_signal(16, 3, rng1)
        bits2, b2 = draw_message_and_signal(16, 3, rng2)
        assert np.array_equal(bits1, bits2)
        assert np.array_equal(b1, b2)
        assert bits1.size == message_bit_length(16, 3)
        assert np.count_nonzero(b1) == 3

    def test_message_matches_signal(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            bits, b = draw_message_and_signal(12, 2, rng)
            assert decode_message(b, 2) == bits_to_int(bits)

    def test_random_index_range(self):
        rng = np.random.default_rng(7)
        huge = message_space_size(128, 15)
        assert huge > 2**63  # exercises the beyond-int64 path
        draws = [random_index(huge, rng) for _ in range(20)]
        assert all(0 <= x < huge for x in draws)
