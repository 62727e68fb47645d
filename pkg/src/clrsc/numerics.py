"""Dense linear algebra helpers and seeded random constructions."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence, Union

import numpy as np
import scipy.linalg

from .errors import ContractViolation, NumericalFailure

# singular values at or below this are treated as exact zeros
SVD_ZERO = 1e-12

StreamId = Union[int, Sequence[int]]


class SvdResult(NamedTuple):
    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray


@dataclass
class RngStream:
    """A reproducible random stream keyed by ``(seed, stream)``.

    The generator is numpy's PCG64 seeded through ``SeedSequence(seed,
    spawn_key=stream)``, so every ``(seed, stream)`` pair names a fixed,
    statistically independent sequence. Streams are stateful; do not share one
    between concurrent tasks.
    """

    seed: int
    stream: StreamId = 0
    _gen: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        key = (self.stream,) if np.isscalar(self.stream) else tuple(self.stream)
        self.stream = tuple(int(s) for s in key)
        ss = np.random.SeedSequence(int(self.seed), spawn_key=self.stream)
        self._gen = np.random.Generator(np.random.PCG64(ss))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def child(self, *stream: int) -> "RngStream":
        """Fresh stream whose id extends this one's."""
        return RngStream(self.seed, self.stream + tuple(stream))


def check_finite(m, name="matrix"):
    if not np.all(np.isfinite(m)):
        raise NumericalFailure(f"{name} contains non-finite entries", shape=np.shape(m))


def thin_svd(m) -> SvdResult:
    """Economy SVD returning ``min(rows, cols)`` components.

    Very wide matrices with few rows (the consensus matrix is ``c x N^2``) go
    through the eigendecomposition of the small Gram matrix ``m m^T``.
    """
    m = np.asarray(m, dtype=float)
    check_finite(m)
    rows, cols = m.shape
    if rows <= 16 and cols >= 4 * rows:
        res = _gram_svd(m)
        if res is not None:
            return res
    try:
        U, s, Vt = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError:
        # gesdd occasionally fails where the slower QR-iteration driver succeeds
        try:
            U, s, Vt = scipy.linalg.svd(m, full_matrices=False, lapack_driver="gesvd")
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure(f"SVD did not converge for {rows}x{cols} matrix", shape=m.shape) from exc
    return SvdResult(U, s, Vt.T)


def _gram_svd(m):
    vals, vecs = np.linalg.eigh(m @ m.T)
    order = np.argsort(vals)[::-1]
    vals, U = vals[order], vecs[:, order]
    sigma = np.sqrt(np.clip(vals, 0.0, None))
    if np.any(sigma <= SVD_ZERO):
        # right vectors for null directions are not recoverable from the Gram matrix
        return None
    V = (m.T @ U) / sigma
    return SvdResult(U, sigma, V)


def sym_eig_smallest(m, k: int):
    """The ``k`` smallest eigenpairs of a symmetric matrix, ascending."""
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    if m.ndim != 2 or m.shape[1] != n:
        raise ContractViolation(f"expected a square matrix, got shape {m.shape}")
    if not 1 <= k <= n:
        raise ContractViolation(f"k={k} outside [1, {n}]")
    if np.max(np.abs(m - m.T), initial=0.0) > 1e-10:
        raise ContractViolation("matrix is not symmetric within 1e-10")
    check_finite(m)
    try:
        vals, vecs = np.linalg.eigh((m + m.T) / 2)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigendecomposition failed for {n}x{n} matrix", shape=m.shape) from exc
    return vals[:k], vecs[:, :k]


def random_orthonormal(rng: RngStream, rows: int, cols: int) -> np.ndarray:
    """``rows x cols`` matrix with orthonormal columns (Haar distributed)."""
    if cols > rows:
        raise ContractViolation(f"cannot fit {cols} orthonormal columns in dimension {rows}")
    G = rng.generator.standard_normal((rows, cols))
    Q, R = np.linalg.qr(G)
    # sign fix makes the distribution uniform
    return Q * np.where(np.diag(R) < 0, -1.0, 1.0)


def random_rotation(rng: RngStream, n: int) -> np.ndarray:
    """Uniformly random element of SO(n)."""
    if n < 1:
        raise ContractViolation("rotation dimension must be >= 1")
    Q = random_orthonormal(rng, n, n)
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q


def gaussian_matrix(rng: RngStream, rows: int, cols: int, sigma: float = 1.0) -> np.ndarray:
    if sigma < 0:
        raise ContractViolation("sigma must be nonnegative")
    return sigma * rng.generator.standard_normal((rows, cols))
