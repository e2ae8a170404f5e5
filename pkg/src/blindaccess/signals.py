"""Cyclic signal primitives for the lifted convolution model.

Signals are plain 1-D numpy arrays over the real or complex field; every
operation here is a pure function and works for both fields. The direct
quadratic evaluation of the circular convolution is the reference
definition, with an FFT path available for speed.
"""

from __future__ import annotations

import math

import numpy as np

# Below this length the FFT round trip costs more than the direct product.
_FFT_CUTOFF = 128


def as_signal(v) -> np.ndarray:
    arr = np.asarray(v)
    if arr.ndim != 1:
        raise ValueError(f"signal must be 1-D, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError("signal must be non-empty")
    return arr


def zero_pad(v, n: int) -> np.ndarray:
    """Extend v with trailing zeros to length n."""
    v = as_signal(v)
    if n < v.size:
        raise ValueError(f"cannot pad length {v.size} down to {n}")
    out = np.zeros(n, dtype=v.dtype)
    out[: v.size] = v
    return out


def cyclic_shift(v, k: int) -> np.ndarray:
    """Shift v down by k positions modulo its length.

    out[i] = v[(i - k) mod n]; k may be any integer, and shifting by 0 or
    by a multiple of n is the identity.
    """
    return np.roll(as_signal(v), int(k))


def circular_convolve(f, g, method: str = "auto") -> np.ndarray:
    """Circular convolution (f * g)[j] = sum_i f[i] g[(j - i) mod n].

    Commutative and linear in each argument. ``method`` selects the
    evaluation path: "direct" is the defining quadratic sum, "fft" the
    transform identity, "auto" switches to the FFT above a size cutoff.
    Both paths agree to ~1e-12 relative error.
    """
    f = as_signal(f)
    g = as_signal(g)
    n = f.size
    if g.size != n:
        raise ValueError(f"length mismatch: {n} vs {g.size}")
    if method == "auto":
        method = "fft" if n > _FFT_CUTOFF else "direct"
    if method == "direct":
        # out = f @ G with G[i, j] = g[(j - i) mod n]
        idx = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
        return f @ g[idx]
    if method == "fft":
        if np.iscomplexobj(f) or np.iscomplexobj(g):
            return np.fft.ifft(np.fft.fft(f) * np.fft.fft(g))
        return np.fft.irfft(np.fft.rfft(f) * np.fft.rfft(g), n)
    raise ValueError(f"unknown method {method!r}")


def truncated_circulant(v, width: int) -> np.ndarray:
    """First ``width`` columns of the circulant matrix of v.

    Column d (0-based) is v cyclically shifted down by d, so multiplying
    by a length-``width`` vector h equals circular_convolve(v, zero_pad(h)).
    """
    v = as_signal(v)
    n = v.size
    if not 1 <= width <= n:
        raise ValueError(f"width must be in [1, {n}], got {width}")
    idx = (np.arange(n)[:, None] - np.arange(width)[None, :]) % n
    return v[idx]


def rank_one_factor(X) -> tuple[np.ndarray, np.ndarray]:
    """Best rank-one factorization X ~ outer(b, h), anchored.

    Returns the leading singular pair rescaled so that the
    largest-magnitude entry of b equals +1 exactly (smallest index on
    ties); h absorbs the inverse scale, so outer(b, h) is unchanged and
    optimal in the least-squares sense.
    """
    X = np.asarray(X)
    if X.ndim != 2:
        raise ValueError(f"expected a matrix, got shape {X.shape}")
    if not np.any(X):
        raise ValueError("zero matrix has no rank-one factor")
    u, sing, vh = np.linalg.svd(X, full_matrices=False)
    b = u[:, 0]
    # X ~ s1 * u1 * v1^H entrywise means h_j = s1 * conj(v1_j), which is
    # exactly row 0 of vh scaled by s1.
    h = sing[0] * vh[0, :]
    # Magnitudes within a relative 1e-9 of the max count as tied, so the
    # smallest-index rule is stable against last-ulp noise in the SVD.
    mags = np.abs(b)
    anchor = int(np.flatnonzero(mags >= (1.0 - 1e-9) * mags.max())[0])
    scale = b[anchor]
    return b / scale, h * scale


def rate(n: int, s: int) -> float:
    """Bits per dimension of an s-of-n support code: log2(C(n, s)) / n.

    Evaluated through log-gamma so large (n, s) stay finite and accurate.
    """
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    if not 0 <= s <= n:
        raise ValueError(f"s must be in [0, {n}], got {s}")
    log2_binom = (
        math.lgamma(n + 1) - math.lgamma(s + 1) - math.lgamma(n - s + 1)
    ) / math.log(2.0)
    return log2_binom / n
