"""Sparse message codec: integer index <-> s-sparse sign vector.

A message index m in [0, C(E, s) * 2^(s-1)) splits into a support part and
a sign part:

    support rank = m >> (s - 1)        (combinatorial number system,
                                        colexicographic order)
    sign bits    = m & (2^(s-1) - 1)

The support rank enumerates the s-subsets of {0, ..., E-1}; the sign bits
map, most significant first, onto the non-anchor support positions in
ascending order (bit 0 -> +1, bit 1 -> -1). The smallest support index is
the anchor and always carries +1. Blind factorization determines the code
vector only up to a global sign, and the fixed anchor is what removes it.
"""

from __future__ import annotations

import math

import numpy as np


def message_space_size(E: int, s: int) -> int:
    """Number of encodable messages, C(E, s) * 2^(s-1)."""
    if not 1 <= s <= E:
        raise ValueError(f"s must be in [1, {E}], got {s}")
    return math.comb(E, s) << max(s - 1, 0)


def message_bit_length(E: int, s: int) -> int:
    """Bits needed to write any index of the full message space."""
    return max((message_space_size(E, s) - 1).bit_length(), 1)


def cipher_bit_length(E: int, s: int) -> int:
    """Largest width W with 2^W <= C(E, s) * 2^(s-1).

    A W-bit string XORed with any W-bit key stays below 2^W, so
    ciphertexts of this width are always encodable support/sign indices.
    """
    size = message_space_size(E, s)
    return max(size.bit_length() - 1, 1)


def subset_rank(support) -> int:
    """Colexicographic rank of an ascending index tuple."""
    rank = 0
    prev = -1
    for i, c in enumerate(support, start=1):
        if c <= prev:
            raise ValueError(f"support must be strictly ascending, got {tuple(support)}")
        prev = c
        rank += math.comb(c, i)
    return rank


def subset_unrank(rank: int, s: int) -> tuple[int, ...]:
    """Inverse of :func:`subset_rank`: the s-subset at a colex rank."""
    if rank < 0:
        raise ValueError(f"rank must be non-negative, got {rank}")
    out = []
    r = rank
    for i in range(s, 0, -1):
        c = i - 1
        while math.comb(c + 1, i) <= r:
            c += 1
        out.append(c)
        r -= math.comb(c, i)
    return tuple(sorted(out))


def encode_message(index: int, E: int, s: int) -> np.ndarray:
    """Code vector b of length E for a message index.

    b has exactly s nonzero entries in {-1, +1}; the smallest support
    index is the +1 anchor and the remaining positions carry the sign
    bits.
    """
    size = message_space_size(E, s)
    if not 0 <= index < size:
        raise ValueError(f"index {index} outside message space [0, {size})")
    sign_width = s - 1
    support = subset_unrank(index >> sign_width, s)
    if support[-1] >= E:
        raise ValueError(f"support rank out of range for E={E}")
    sign_bits = int_to_bits(index & ((1 << sign_width) - 1), sign_width)
    b = np.zeros(E)
    b[support[0]] = 1.0
    for pos, bit in zip(support[1:], sign_bits):
        b[pos] = 1.0 if bit == 0 else -1.0
    return b


def decode_message(b, s: int) -> int:
    """Message index read from a (possibly noisy) code vector.

    The support is taken as the s entries of largest magnitude (ties to
    the smallest index) and the signs from their real parts, so the
    decoder is total even on imperfect inputs.
    """
    b = np.asarray(b)
    if not 1 <= s <= b.size:
        raise ValueError(f"s must be in [1, {b.size}], got {s}")
    ranked = np.argsort(-np.abs(b), kind="stable")
    support = np.sort(ranked[:s])
    bits = [0 if np.real(b[pos]) > 0 else 1 for pos in support[1:]]
    return (subset_rank(support.tolist()) << (s - 1)) | bits_to_int(
        np.array(bits, dtype=np.uint8)
    )


def int_to_bits(x: int, width: int) -> np.ndarray:
    """Big-endian bit array of x with the given width."""
    if x < 0 or (width >= 0 and x >> width):
        raise ValueError(f"{x} does not fit in {width} bits")
    return np.array([(x >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.uint8)


def bits_to_int(bits) -> int:
    bits = np.asarray(bits)
    out = 0
    for b in bits.tolist():
        out = (out << 1) | int(b)
    return out


def random_index(size: int, rng: np.random.Generator) -> int:
    """Uniform integer in [0, size), valid beyond the 64-bit range."""
    if size < 1:
        raise ValueError("size must be positive")
    nbits = size.bit_length()
    while True:
        x = 0
        for _ in range(0, nbits, 32):
            x = (x << 32) | int(rng.integers(0, 1 << 32))
        x &= (1 << nbits) - 1
        if x < size:
            return x


def draw_message_and_signal(
    E: int, s: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Uniform message over the full space and its code vector.

    Returns (message_bits, b) where message_bits is the big-endian index
    of width :func:`message_bit_length`.
    """
    index = random_index(message_space_size(E, s), rng)
    return int_to_bits(index, message_bit_length(E, s)), encode_message(index, E, s)
