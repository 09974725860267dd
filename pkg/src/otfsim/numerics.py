"""Complex linear-algebra kernels with complex-multiplication accounting.

Everything here works on plain ``numpy`` arrays: vectors are 1-D complex
arrays, matrices are 2-D. The only stateful object is :class:`CmCounter`,
which tallies complex multiplications (CMs) per pipeline stage so that
modem implementations can be audited against closed-form cost formulas.

Counting convention: one P-point radix-2 FFT is charged exactly
``(P/2)*log2(P)`` CMs (trivial twiddles included); a direct P-point DFT is
charged ``P**2``. Additions, sign flips and data movement are free.
"""

from __future__ import annotations

import warnings

import numpy as np
import scipy.linalg


class SingularMatrixError(ValueError):
    """A linear system is singular or too close to singular to solve."""


class CmCounter:
    """Monotone tally of complex multiplications, keyed by stage label."""

    def __init__(self):
        self._stages: dict[str, int] = {}

    def add(self, stage: str, count: int) -> None:
        if count < 0:
            raise ValueError("CM count increment must be non-negative")
        self._stages[stage] = self._stages.get(stage, 0) + int(count)

    def stage_total(self, stage: str) -> int:
        return self._stages.get(stage, 0)

    def total(self) -> int:
        return sum(self._stages.values())

    def breakdown(self) -> dict[str, int]:
        return dict(self._stages)

    def __repr__(self):
        return f"CmCounter(total={self.total()}, stages={self._stages!r})"


def is_power_of_two(p: int) -> bool:
    return p >= 1 and (p & (p - 1)) == 0


def ilog2(p: int) -> int:
    """Exact integer log2; raises for non-powers of two."""
    if not is_power_of_two(p):
        raise ValueError(f"{p} is not a power of two")
    return p.bit_length() - 1


def fft_cm_cost(p: int) -> int:
    """CMs charged for one P-point transform under the counting convention."""
    if is_power_of_two(p):
        return (p // 2) * ilog2(p)
    return p * p


def dft_matrix(p: int, inverse: bool = False) -> np.ndarray:
    """Unitary P-point DFT matrix, [F]_pq = exp(-j*2*pi*p*q/P)/sqrt(P)."""
    if p < 1:
        raise ValueError("DFT size must be >= 1")
    sign = 1.0 if inverse else -1.0
    grid = np.outer(np.arange(p), np.arange(p))
    return np.exp(sign * 2j * np.pi * grid / p) / np.sqrt(p)


def _bit_reverse_indices(p: int) -> np.ndarray:
    bits = p.bit_length() - 1
    idx = np.arange(p)
    rev = np.zeros(p, dtype=np.intp)
    for _ in range(bits):
        rev = (rev << 1) | (idx & 1)
        idx >>= 1
    return rev


def _fft_pow2(x: np.ndarray, inverse: bool) -> np.ndarray:
    """Iterative radix-2 Cooley-Tukey along axis 0 of a (P, B) array."""
    p = x.shape[0]
    if p == 1:
        return x.astype(np.complex128, copy=True)
    sign = 1.0 if inverse else -1.0
    y = x[_bit_reverse_indices(p)].astype(np.complex128)
    m = 2
    while m <= p:
        half = m // 2
        tw = np.exp(sign * 2j * np.pi * np.arange(half) / m)
        blocks = y.reshape(p // m, m, -1)
        upper = blocks[:, :half, :]
        lower = blocks[:, half:, :] * tw[None, :, None]
        blocks[:, :half, :], blocks[:, half:, :] = upper + lower, upper - lower
        m *= 2
    return y / np.sqrt(p)


def dft(
    v: np.ndarray,
    inverse: bool = False,
    axis: int = 0,
    counter: CmCounter | None = None,
    stage: str = "dft",
) -> np.ndarray:
    """Unitary DFT (or IDFT) along one axis.

    Power-of-two lengths run through the radix-2 FFT and are charged
    ``(P/2)*log2(P)`` CMs per transformed vector; every other length falls
    back to the direct matrix product and is charged ``P**2``.

    Parameters
    ----------
    v : array_like
        Complex input; any shape, transformed along `axis`.
    inverse : bool
        Apply the inverse (conjugate-kernel) transform.
    axis : int
        Axis along which to transform.
    counter : CmCounter, optional
        Charged with the conventional CM cost under `stage`.
    """
    v = np.asarray(v, dtype=np.complex128)
    if v.ndim == 0 or v.shape[axis] < 1:
        raise ValueError("dft input must have length >= 1 along the transform axis")
    p = v.shape[axis]
    n_vectors = v.size // p
    moved = np.moveaxis(v, axis, 0)
    flat = moved.reshape(p, -1)
    if is_power_of_two(p):
        out = _fft_pow2(flat, inverse)
    else:
        out = dft_matrix(p, inverse=inverse) @ flat
    if counter is not None:
        counter.add(stage, n_vectors * fft_cm_cost(p))
    return np.moveaxis(out.reshape(moved.shape), 0, axis)


def circ_conv2d(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """2-D circular convolution of equal-shape matrices.

    ``C[k, l] = sum_p sum_q A[p, q] * B[(k - p) mod M, (l - q) mod N]``
    """
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.ndim != 2 or a.shape != b.shape:
        raise ValueError(f"shape mismatch for 2D circular convolution: {a.shape} vs {b.shape}")
    return np.fft.ifft2(np.fft.fft2(a) * np.fft.fft2(b))


def vec(a: np.ndarray) -> np.ndarray:
    """Stack the columns of `a` into one vector (column-major)."""
    a = np.asarray(a)
    if a.ndim != 2:
        raise ValueError("vec expects a matrix")
    return a.reshape(-1, order="F")


def unvec(v: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vec`: reshape a vector into a (rows, cols) matrix."""
    v = np.asarray(v)
    if v.ndim != 1 or v.size != rows * cols:
        raise ValueError(f"cannot unvec length-{v.size} vector into {rows}x{cols}")
    return v.reshape(rows, cols, order="F")


def lu_factor_checked(a: np.ndarray):
    """Partial-pivot LU factorization with an explicit singularity check.

    Pivots below ``1e-12 * max|A|`` are treated as singular and reported
    via :class:`SingularMatrixError` instead of producing garbage. The
    returned factorization feeds ``scipy.linalg.lu_solve``.
    """
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("expected a square matrix")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a)
    pivot_floor = 1e-12 * np.max(np.abs(a))
    if not np.all(np.abs(np.diag(lu)) > pivot_floor):
        raise SingularMatrixError(
            f"matrix is singular or near-singular (pivot below {pivot_floor:.3e})"
        )
    return lu, piv


def solve_dense(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``A x = b`` by partial-pivot LU elimination (checked pivots)."""
    b = np.asarray(b, dtype=np.complex128)
    if b.shape[0] != np.asarray(a).shape[0]:
        raise ValueError("right-hand side length does not match matrix size")
    return scipy.linalg.lu_solve(lu_factor_checked(a), b)


def block_circulant_assemble(blocks: list[np.ndarray]) -> np.ndarray:
    """Assemble the MN x MN block-circulant matrix from N blocks of size M x M.

    Block (r, c) of the result is ``blocks[(r - c) mod N]``, i.e. the blocks
    form the first block column and wrap circularly.
    """
    if len(blocks) < 1:
        raise ValueError("need at least one block")
    blocks = [np.asarray(blk, dtype=np.complex128) for blk in blocks]
    m = blocks[0].shape[0]
    for blk in blocks:
        if blk.shape != (m, m):
            raise ValueError("all blocks must be square with identical shape")
    n = len(blocks)
    out = np.empty((m * n, m * n), dtype=np.complex128)
    for r in range(n):
        for c in range(n):
            out[r * m : (r + 1) * m, c * m : (c + 1) * m] = blocks[(r - c) % n]
    return out
