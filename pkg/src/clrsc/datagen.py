"""Multi-view data generators and PSNR-calibrated noise."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ContractViolation
from .metrics import noise_sigma
from .numerics import RngStream, gaussian_matrix, random_orthonormal, random_rotation


@dataclass
class MultiViewDataset:
    views: list
    labels: Optional[np.ndarray] = None  # values in 1..k
    k: int = 0

    def __post_init__(self):
        self.views = [np.asarray(v, dtype=float) for v in self.views]
        if not self.views:
            raise ContractViolation("a dataset needs at least one view")
        n = self.views[0].shape[1]
        for i, v in enumerate(self.views):
            if v.ndim != 2 or v.shape[1] != n:
                raise ContractViolation(f"view {i} has shape {v.shape}; all views need N={n} columns")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=int).ravel()
            if self.labels.size != n:
                raise ContractViolation(f"{self.labels.size} labels for N={n} samples")
            if self.labels.min() < 1 or self.labels.max() > self.k:
                raise ContractViolation(f"labels must lie in 1..{self.k}")
        if self.k < 1:
            raise ContractViolation("k must be >= 1")

    @property
    def n_samples(self) -> int:
        return self.views[0].shape[1]

    @property
    def n_views(self) -> int:
        return len(self.views)


def gen_synthetic(rng: RngStream, ambient=100, k=5, dim=4, per_cluster=20, views=2) -> MultiViewDataset:
    """Union of ``k`` subspaces of dimension ``dim`` in R^ambient.

    For each view independently: a random orthonormal basis ``U_1``, then
    ``U_{j+1} = T U_j`` for one random rotation ``T``; cluster ``j`` holds
    ``per_cluster`` points ``U_j Q_j`` with standard normal ``Q_j``.
    """
    if min(ambient, k, dim, per_cluster, views) < 1:
        raise ContractViolation("all generator sizes must be positive")
    if dim > ambient:
        raise ContractViolation(f"subspace dimension {dim} exceeds ambient {ambient}")
    out = []
    for v in range(views):
        s = rng.child(v)
        U = random_orthonormal(s, ambient, dim)
        T = random_rotation(s, ambient)
        blocks = []
        for _ in range(k):
            blocks.append(U @ gaussian_matrix(s, dim, per_cluster))
            U = T @ U
        out.append(np.hstack(blocks))
    labels = np.repeat(np.arange(1, k + 1), per_cluster)
    return MultiViewDataset(out, labels, k)


def gen_semisynthetic(rng: RngStream, library, k=5, endmembers=5, repeats=10, views=2) -> MultiViewDataset:
    """Mixtures of library spectra, one mixture per cluster repeated column-wise.

    Each cluster draws ``endmembers`` distinct library columns and iid
    Uniform(0, 1) weights; the whole draw is repeated for every view.
    """
    library = np.asarray(library, dtype=float)
    if library.ndim != 2 or library.shape[1] < endmembers:
        raise ContractViolation(
            f"library has {library.shape[-1] if library.ndim == 2 else 0} spectra, need >= {endmembers}"
        )
    if min(k, endmembers, repeats, views) < 1:
        raise ContractViolation("all generator sizes must be positive")
    out = []
    for v in range(views):
        gen = rng.child(v).generator
        blocks = []
        for _ in range(k):
            idx = gen.choice(library.shape[1], size=endmembers, replace=False)
            weights = gen.uniform(0.0, 1.0, size=endmembers)
            x = library[:, idx] @ weights
            blocks.append(np.repeat(x[:, None], repeats, axis=1))
        out.append(np.hstack(blocks))
    labels = np.repeat(np.arange(1, k + 1), repeats)
    return MultiViewDataset(out, labels, k)


def standin_library(rng: RngStream, bands=321, count=100) -> np.ndarray:
    """Smooth positive reflectance-like curves, ``bands x count``.

    A gently sloped continuum in [0.3, 0.8] with 2-5 Gaussian absorption
    features, clipped into (0, 1]. Used when no real spectral library is given.
    """
    gen = rng.generator
    t = np.linspace(0.0, 1.0, bands)
    lib = np.empty((bands, count))
    for j in range(count):
        curve = gen.uniform(0.3, 0.8) + gen.uniform(-0.2, 0.2) * t + gen.uniform(-0.1, 0.1) * t**2
        for _ in range(gen.integers(2, 6)):
            centre, width, depth = gen.uniform(0, 1), gen.uniform(0.01, 0.08), gen.uniform(0.05, 0.3)
            curve = curve - depth * np.exp(-0.5 * ((t - centre) / width) ** 2)
        lib[:, j] = np.clip(curve, 0.01, 1.0)
    return lib


def add_noise_at_psnr(rng: RngStream, clean: MultiViewDataset, target_psnr: float) -> MultiViewDataset:
    """Additive iid Gaussian noise per view, scaled so the expected PSNR
    (peak = max |entry| of that clean view) equals ``target_psnr``."""
    if not math.isfinite(target_psnr):
        raise ContractViolation("target PSNR must be finite")
    noisy = []
    for v, X in enumerate(clean.views):
        peak = float(np.max(np.abs(X)))
        sigma = noise_sigma(peak, target_psnr) if peak > 0 else 0.0
        noisy.append(X + gaussian_matrix(rng.child(v), *X.shape, sigma=sigma))
    labels = None if clean.labels is None else clean.labels.copy()
    return MultiViewDataset(noisy, labels, clean.k)
