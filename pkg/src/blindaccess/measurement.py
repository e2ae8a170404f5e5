"""Lifted measurement operator for multi-user blind deconvolution.

The unknown lifted vector z is flat over (user p, delay tap d, code entry
e) with the entry index fastest:

    flat(p, d, e) = (p * N_d + d) * E + e

so each user block is the column-major vectorization of its E x N_d
rank-one matrix outer(b_p, h_p). The operator superimposes the
delay-shifted images of the coded tap blocks,

    y = sum_p sum_d cyclic_shift(Q_p @ z[p, d, :], d)

which on a rank-one user block reduces to the circular convolution of
Q_p b_p with the zero-padded channel h_p.

The matrix-free apply/adjoint pair is the primary representation; the
dense matrix exists for small instances and as a test oracle only, behind
a memory budget.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from . import seeds

DENSE_BUDGET_BYTES = 512 * 2**20

_DUMP_MAGIC = b"QBNK"


@dataclass(frozen=True)
class ModelDims:
    """Problem dimensions: slot length N, delay spread N_d, code length E,
    user count N_r."""

    N: int
    N_d: int
    E: int
    N_r: int

    def __post_init__(self):
        for name in ("N", "N_d", "E", "N_r"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.N_d > self.N:
            raise ValueError(f"delay spread N_d={self.N_d} exceeds N={self.N}")

    @property
    def lifted_dim(self) -> int:
        return self.N_d * self.E * self.N_r


def flat_index(p: int, d: int, e: int, dims: ModelDims) -> int:
    """Flat position of (user, tap, entry) in a lifted vector."""
    if not (0 <= p < dims.N_r and 0 <= d < dims.N_d and 0 <= e < dims.E):
        raise IndexError(f"triple ({p}, {d}, {e}) out of range for {dims}")
    return (p * dims.N_d + d) * dims.E + e


def as_blocks(z, dims: ModelDims) -> np.ndarray:
    """View a lifted vector as a (N_r, N_d, E) block array."""
    z = np.asarray(z)
    if z.shape != (dims.lifted_dim,):
        raise ValueError(f"lifted vector must have shape ({dims.lifted_dim},), got {z.shape}")
    return z.reshape(dims.N_r, dims.N_d, dims.E)


def user_matrix(z, p: int, dims: ModelDims) -> np.ndarray:
    """User p's block as the E x N_d matrix X with X[:, d] = z[p, d, :]."""
    return as_blocks(z, dims)[p].T


def draw_codebooks(dims: ModelDims, seed: int, field: str = "real") -> np.ndarray:
    """Per-user coding matrices Q_p, shape (N_r, N, E).

    User p's matrix comes from the documented stream
    ``derive_rng(seed, seeds.CODEBOOK, p)``: i.i.d. standard normal
    entries, or circularly symmetric unit-variance complex normals for
    field="complex". The same seed therefore reproduces the same
    codebooks on both ends of the link.
    """
    if field not in ("real", "complex"):
        raise ValueError(f"field must be 'real' or 'complex', got {field!r}")
    shape = (dims.N, dims.E)
    books = np.empty(
        (dims.N_r, *shape), dtype=np.float64 if field == "real" else np.complex128
    )
    for p in range(dims.N_r):
        rng = seeds.derive_rng(seed, seeds.CODEBOOK, p)
        if field == "real":
            books[p] = rng.standard_normal(shape)
        else:
            books[p] = (
                rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
            ) / np.sqrt(2.0)
    return books


def save_codebooks(path, codebooks) -> None:
    """Dump real codebooks to a binary file for cross-checks.

    Layout: magic ``QBNK``, then N, E, N_r as little-endian uint32, then
    the N_r matrices in user order, each row-major little-endian float64.
    """
    q = np.asarray(codebooks)
    if q.ndim != 3:
        raise ValueError(f"expected (N_r, N, E) codebooks, got shape {q.shape}")
    if np.iscomplexobj(q):
        raise ValueError("binary dump supports real codebooks only")
    n_r, n, e = q.shape
    with open(path, "wb") as fh:
        fh.write(_DUMP_MAGIC)
        fh.write(struct.pack("<III", n, e, n_r))
        fh.write(np.ascontiguousarray(q, dtype="<f8").tobytes())


def load_codebooks(path) -> np.ndarray:
    """Read a codebook dump written by :func:`save_codebooks`."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _DUMP_MAGIC:
            raise ValueError(f"bad magic {magic!r}, expected {_DUMP_MAGIC!r}")
        n, e, n_r = struct.unpack("<III", fh.read(12))
        payload = fh.read()
    expected = n_r * n * e * 8
    if len(payload) != expected:
        raise ValueError(f"truncated dump: {len(payload)} bytes, expected {expected}")
    return np.frombuffer(payload, dtype="<f8").reshape(n_r, n, e).copy()


class MeasurementOperator:
    """Matrix-free lifted operator y = M z for the multi-user model.

    Immutable after construction; apply/adjoint are pure, so one operator
    can be shared across concurrent solver instances.
    """

    def __init__(self, codebooks, dims: ModelDims):
        books = np.asarray(codebooks)
        if books.shape != (dims.N_r, dims.N, dims.E):
            raise ValueError(
                f"codebooks shape {books.shape} does not match dims "
                f"({dims.N_r}, {dims.N}, {dims.E})"
            )
        self.codebooks = books
        self.dims = dims
        # Row i of the gather picks y[(i + d) mod N] for tap column d.
        self._shift_idx = (
            np.arange(dims.N)[:, None] + np.arange(dims.N_d)[None, :]
        ) % dims.N
        # Mean squared column norm; every column of the big matrix is a
        # cyclic shift of a codebook column, so this is the natural scale
        # for column-normalized gradient steps.
        self.column_scale = float(
            np.mean(np.sum(np.abs(books) ** 2, axis=1))
        )

    @classmethod
    def from_seed(cls, dims: ModelDims, seed: int, field: str = "real"):
        return cls(draw_codebooks(dims, seed, field), dims)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.dims.N, self.dims.lifted_dim)

    def apply(self, z) -> np.ndarray:
        """y = M z."""
        dims = self.dims
        blocks = as_blocks(z, dims)
        out_dtype = np.result_type(self.codebooks.dtype, blocks.dtype)
        y = np.zeros(dims.N, dtype=out_dtype)
        for p in range(dims.N_r):
            w = self.codebooks[p] @ blocks[p].T  # (N, N_d), column d = Q_p z[p, d, :]
            y += w[:, 0]
            for d in range(1, dims.N_d):
                y[d:] += w[: dims.N - d, d]
                y[:d] += w[dims.N - d :, d]
        return y

    def adjoint(self, y) -> np.ndarray:
        """z = M^H y, with result[p, d, :] = Q_p^H cyclic_shift(y, -d)."""
        dims = self.dims
        y = np.asarray(y)
        if y.shape != (dims.N,):
            raise ValueError(f"expected signal of shape ({dims.N},), got {y.shape}")
        shifted = y[self._shift_idx]  # (N, N_d), column d = shift(y, -d)
        out_dtype = np.result_type(self.codebooks.dtype, y.dtype)
        out = np.empty((dims.N_r, dims.N_d, dims.E), dtype=out_dtype)
        for p in range(dims.N_r):
            out[p] = (self.codebooks[p].conj().T @ shifted).T
        return out.reshape(-1)

    def column(self, p: int, d: int, e: int) -> np.ndarray:
        """Single column of the dense matrix: codebook column e of user p,
        cyclically shifted by tap d."""
        flat_index(p, d, e, self.dims)  # bounds check
        return np.roll(self.codebooks[p][:, e], d)

    def extract_columns(self, support) -> np.ndarray:
        """Columns for a support, materialized in iteration order.

        ``support`` is any iterable of (user, tap, entry) triples. Columns
        are recomputed on demand; supports are tiny so this is cheap.
        """
        triples = list(support)
        dims = self.dims
        out = np.empty((dims.N, len(triples)), dtype=self.codebooks.dtype)
        for i, (p, d, e) in enumerate(triples):
            out[:, i] = self.column(p, d, e)
        return out

    def build_dense(self, max_bytes: int = DENSE_BUDGET_BYTES) -> np.ndarray:
        """Dense N x (N_d E N_r) matrix; refuses above the memory budget.

        Intended for small instances and cross-checks; production solves
        use the matrix-free path.
        """
        dims = self.dims
        need = dims.N * dims.lifted_dim * self.codebooks.itemsize
        if need > max_bytes:
            raise ValueError(
                f"dense operator needs {need} bytes, over the {max_bytes} byte "
                "budget; use the matrix-free apply/adjoint instead"
            )
        dense = np.empty((dims.N, dims.lifted_dim), dtype=self.codebooks.dtype)
        for p in range(dims.N_r):
            for d in range(dims.N_d):
                start = (p * dims.N_d + d) * dims.E
                dense[:, start : start + dims.E] = np.roll(self.codebooks[p], d, axis=0)
        return dense
