"""Closed-form proximal operators used by the solvers."""

import numpy as np

from .errors import ContractViolation
from .numerics import SVD_ZERO, thin_svd


def svt(m, beta):
    """Singular value thresholding.

    Returns ``argmin_Z beta*||Z||_* + 0.5*||Z - m||_F^2``, i.e. ``m`` with every
    singular value soft-thresholded by ``beta``.
    """
    if beta < 0:
        raise ContractViolation(f"threshold must be nonnegative, got {beta}")
    m = np.asarray(m, dtype=float)
    if beta == 0:
        return m.copy()
    U, s, V = thin_svd(m)
    s = np.where(s > SVD_ZERO, s, 0.0)
    keep = s > beta
    if not np.any(keep):
        return np.zeros_like(m)
    return (U[:, keep] * (s[keep] - beta)) @ V[:, keep].T


def prox_l12_columns(v, tau):
    """Column-wise group shrinkage, the prox of ``tau * sum_i ||v_i||_2``.

    Columns whose norm does not exceed ``tau`` become exactly zero; the rest
    are scaled by ``(||v_i|| - tau) / ||v_i||``.
    """
    if tau < 0:
        raise ContractViolation(f"threshold must be nonnegative, got {tau}")
    v = np.asarray(v, dtype=float)
    norms = np.linalg.norm(v, axis=0)
    scale = np.zeros_like(norms)
    big = norms > tau
    scale[big] = (norms[big] - tau) / norms[big]
    return v * scale


def frobenius_error_prox(r, mu):
    """Minimizer of ``||E||_F^2 + (mu/2)*||r - E||_F^2``, which is ``r*mu/(mu+2)``."""
    if mu <= 0:
        raise ContractViolation(f"mu must be positive, got {mu}")
    return np.asarray(r, dtype=float) * (mu / (mu + 2.0))


def nuclear_norm(m):
    return float(np.sum(thin_svd(m).sigma))


def l12_norm(m):
    return float(np.sum(np.linalg.norm(m, axis=0)))
