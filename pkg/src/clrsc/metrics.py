"""Clustering accuracy, PSNR and coefficient agreement."""

import itertools
import math

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ContractViolation

EXHAUSTIVE_MAX_K = 8


def best_label_matching(confusion) -> np.ndarray:
    """Column index matched to each row, maximizing total matched counts.

    Exhaustive search up to 8 labels, Hungarian assignment above that.
    """
    C = np.asarray(confusion)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ContractViolation(f"confusion matrix must be square, got {C.shape}")
    k = C.shape[0]
    if k <= EXHAUSTIVE_MAX_K:
        return _exhaustive_matching(C)
    return _assignment_matching(C)


def _exhaustive_matching(C):
    k = C.shape[0]
    rows = np.arange(k)
    best, best_perm = -1, None
    for perm in itertools.permutations(range(k)):
        score = C[rows, perm].sum()
        if score > best:
            best, best_perm = score, perm
    return np.array(best_perm, dtype=int)


def _assignment_matching(C):
    rows, cols = linear_sum_assignment(C, maximize=True)
    perm = np.empty(C.shape[0], dtype=int)
    perm[rows] = cols
    return perm


def _labels(x):
    return np.asarray(x.labels if hasattr(x, "labels") else x).ravel()


def sca(predicted, truth) -> float:
    """Subspace clustering accuracy in percent under the best label matching."""
    if truth is None:
        raise ContractViolation("SCA needs ground-truth labels")
    p, t = _labels(predicted), _labels(truth)
    if p.shape != t.shape:
        raise ContractViolation(f"label vectors differ in length: {p.size} vs {t.size}")
    if t.size == 0:
        raise ContractViolation("empty label vectors")
    _, ti = np.unique(t, return_inverse=True)
    _, pi = np.unique(p, return_inverse=True)
    k = max(ti.max(), pi.max()) + 1
    C = np.zeros((k, k), dtype=np.int64)
    np.add.at(C, (ti, pi), 1)
    perm = best_label_matching(C)
    correct = C[np.arange(k), perm].sum()
    return 100.0 - (t.size - correct) * 100.0 / t.size


def psnr(clean, noisy, s: float) -> float:
    """``10 log10(s^2 / MSE)`` in dB; identical inputs give ``inf``."""
    clean = np.asarray(clean, dtype=float)
    noisy = np.asarray(noisy, dtype=float)
    if clean.shape != noisy.shape:
        raise ContractViolation(f"shape mismatch {clean.shape} vs {noisy.shape}")
    if not s > 0:
        raise ContractViolation("peak value must be positive")
    mse = float(np.mean((clean - noisy) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(s * s / mse)


def noise_sigma(peak: float, target_psnr: float) -> float:
    """Gaussian noise level whose expected PSNR against ``peak`` is ``target_psnr``."""
    return peak * 10.0 ** (-target_psnr / 20.0)


def coeff_difference(stack) -> float:
    """``||Z_1 - Z_2||_F``; for more than two views, the mean over all pairs."""
    Zs = stack.Z if hasattr(stack, "Z") else stack
    if len(Zs) < 2:
        raise ContractViolation("coefficient difference needs at least two views")
    diffs = [np.linalg.norm(a - b) for a, b in itertools.combinations(Zs, 2)]
    return float(np.mean(diffs))
