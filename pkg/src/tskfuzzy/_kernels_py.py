"""Vectorised NumPy kernels for the batched TSK forward and backward pass.

Both kernels take the antecedent inputs ``A`` (N x Ma) and the consequent
inputs ``Z`` (N x Mc) separately so that feature-augmented models can reuse
them. ``mask`` is an optional boolean N x R array; a False entry removes the
rule from that sample's prediction and gradient.

Rule weights are normalised after shifting log-firing levels by their
per-sample maximum, so the weighted average never divides by zero.
"""

import numpy as np


def _normalised_weights(A, centers, sigmas, mask):
    diff = A[:, None, :] - centers[None, :, :]
    inv_var = 1.0 / (sigmas * sigmas)
    log_fire = -0.5 * np.einsum("nrm,rm->nr", diff * diff, inv_var)
    if mask is not None:
        log_fire = np.where(mask, log_fire, -np.inf)
    top = np.max(log_fire, axis=1, keepdims=True)
    fire = np.exp(log_fire - top)
    phi = fire / np.sum(fire, axis=1, keepdims=True)
    return diff, inv_var, phi


def forward(A, Z, centers, sigmas, weights, mask=None):
    """Return the TSK output for every row of ``A``/``Z``."""
    _, _, phi = _normalised_weights(A, centers, sigmas, mask)
    rule_out = weights[:, 0][None, :] + Z @ weights[:, 1:].T
    return np.sum(phi * rule_out, axis=1)


def value_and_grad(A, Z, y, centers, sigmas, weights, mask=None, input_grads=False):
    """Predictions and gradients of ``0.5 * sum((pred - y)**2)``.

    Returns ``(pred, g_centers, g_sigmas, g_weights, g_A, g_Z)``; the last two
    are None unless ``input_grads`` is set.
    """
    diff, inv_var, phi = _normalised_weights(A, centers, sigmas, mask)
    rule_out = weights[:, 0][None, :] + Z @ weights[:, 1:].T
    pred = np.sum(phi * rule_out, axis=1)
    err = pred - y

    # d loss / d log-firing of rule r for sample n
    dlog = (err[:, None] * phi) * (rule_out - pred[:, None])
    scaled = diff * inv_var[None, :, :]
    g_centers = np.einsum("nr,nrm->rm", dlog, scaled)
    g_sigmas = np.einsum("nr,nrm->rm", dlog, scaled * diff) / sigmas
    ephi = err[:, None] * phi
    g_weights = np.empty_like(weights)
    g_weights[:, 0] = ephi.sum(axis=0)
    g_weights[:, 1:] = ephi.T @ Z

    g_A = g_Z = None
    if input_grads:
        g_A = -np.einsum("nr,nrm->nm", dlog, scaled)
        g_Z = err[:, None] * (phi @ weights[:, 1:])
    return pred, g_centers, g_sigmas, g_weights, g_A, g_Z
