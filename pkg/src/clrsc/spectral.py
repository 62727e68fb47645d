"""Affinity fusion and normalized spectral clustering."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation
from .numerics import RngStream, sym_eig_smallest

KMEANS_RESTARTS = 20
KMEANS_MAX_ITER = 300
KMEANS_TOL = 1e-9


@dataclass
class ClusterAssignment:
    labels: np.ndarray  # values in 1..k
    k: int
    wcss: float = float("nan")


def fuse_affinity(stack) -> np.ndarray:
    """``W_ij = sqrt(sum_k Z_k[i,j]^2) + sqrt(sum_k Z_k[j,i]^2)``.

    Accepts a ``CoefficientStack`` or a plain list of coefficient matrices.
    """
    Zs = stack.Z if hasattr(stack, "Z") else stack
    Zs = [np.asarray(z, dtype=float) for z in Zs]
    shape = Zs[0].shape
    if any(z.shape != shape for z in Zs) or shape[0] != shape[1]:
        raise ContractViolation("coefficient matrices must share one square shape")
    mag = np.sqrt(sum(z * z for z in Zs))
    return mag + mag.T


def normalized_laplacian(w) -> np.ndarray:
    """``I - D^{-1/2} W D^{-1/2}``; isolated vertices get a zero scaling."""
    w = np.asarray(w, dtype=float)
    deg = w.sum(axis=1)
    inv_sqrt = np.zeros_like(deg)
    pos = deg > 0
    inv_sqrt[pos] = 1.0 / np.sqrt(deg[pos])
    L = np.eye(len(deg)) - inv_sqrt[:, None] * w * inv_sqrt[None, :]
    return (L + L.T) / 2


def spectral_embed(lap, k: int) -> np.ndarray:
    n = lap.shape[0]
    if k > n:
        raise ContractViolation(f"cannot embed {n} points into {k} eigenvectors")
    _, vecs = sym_eig_smallest(lap, k)
    norms = np.linalg.norm(vecs, axis=1, keepdims=True)
    return np.divide(vecs, norms, out=np.zeros_like(vecs), where=norms > 0)


def _kmeans_pp(points, k, gen):
    n = len(points)
    centers = [points[gen.integers(n)]]
    d2 = np.sum((points - centers[0]) ** 2, axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx = gen.integers(n)
        else:
            idx = int(np.searchsorted(np.cumsum(d2), gen.random() * total, side="right"))
            idx = min(idx, n - 1)
        centers.append(points[idx])
        d2 = np.minimum(d2, np.sum((points - points[idx]) ** 2, axis=1))
    return np.array(centers)


def _sq_dists(points, centers):
    return np.sum((points[:, None, :] - centers[None, :, :]) ** 2, axis=2)


def _lloyd(points, k, gen, max_iter):
    centers = _kmeans_pp(points, k, gen)
    prev = np.inf
    for _ in range(max_iter):
        d = _sq_dists(points, centers)
        labels = np.argmin(d, axis=1)
        counts = np.bincount(labels, minlength=k)
        for j in np.flatnonzero(counts == 0):
            # re-seed an empty cluster on the point farthest from its center
            far = int(np.argmax(d[np.arange(len(points)), labels]))
            centers[j] = points[far]
            d = _sq_dists(points, centers)
            labels = np.argmin(d, axis=1)
        counts = np.bincount(labels, minlength=k)
        for j in range(k):
            if counts[j]:
                centers[j] = points[labels == j].mean(axis=0)
        wcss = float(np.sum((points - centers[labels]) ** 2))
        if prev - wcss <= KMEANS_TOL * max(prev, 1e-300):
            break
        prev = wcss
    d = _sq_dists(points, centers)
    labels = np.argmin(d, axis=1)
    wcss = float(np.sum(d[np.arange(len(points)), labels]))
    return labels, wcss


def kmeans(points, k: int, rng: RngStream, restarts: int = KMEANS_RESTARTS, max_iter: int = KMEANS_MAX_ITER) -> ClusterAssignment:
    """Lloyd's algorithm with k-means++ seeding; the restart with the lowest
    within-cluster sum of squares wins (earliest restart on ties)."""
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    n = len(points)
    if not 1 <= k <= n:
        raise ContractViolation(f"k={k} must lie in [1, {n}]")
    best = None
    for r in range(restarts):
        gen = rng.child(r).generator
        labels, wcss = _lloyd(points, k, gen, max_iter)
        if best is None or wcss < best[1]:
            best = (labels, wcss)
    return ClusterAssignment(labels=best[0] + 1, k=k, wcss=best[1])


def cluster(w, k: int, rng: RngStream, restarts: int = KMEANS_RESTARTS) -> ClusterAssignment:
    """Normalized-cut style segmentation of an affinity matrix into ``k`` groups."""
    emb = spectral_embed(normalized_laplacian(w), k)
    return kmeans(emb, k, rng, restarts=restarts)
