"""Metrics and theory oracles: network MSD, divergence detection, the leaky
bias fixed point, mean-stability step-size bounds, and steady-state readout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DIVERGENCE_THRESHOLD",
    "MsdTrace",
    "DivergenceReport",
    "network_msd_db",
    "msd_trace_db",
    "linear_deviation",
    "leaky_fixed_point",
    "step_size_upper_bound",
    "detect_divergence",
    "steady_state_msd",
]

# max-norm above which an estimate counts as divergent: far above any
# converging trajectory at these scales, far below float overflow
DIVERGENCE_THRESHOLD = 1e6


@dataclass(frozen=True)
class MsdTrace:
    """Ensemble-averaged network MSD learning curve.

    ``per_iteration_db[i]`` is the network MSD in dB after round i + 1,
    averaged in the linear domain over the non-divergent trials and then
    converted to dB. ``per_node_db`` holds the analogous per-node deviation
    curves, shape (horizon, N). Divergent trials are excluded from the
    averages and counted. Exactly-zero deviation appears as the -inf
    sentinel, never as a floor value.
    """

    per_iteration_db: np.ndarray
    per_node_db: np.ndarray | None
    trials: int
    divergent_trials: int


@dataclass(frozen=True)
class DivergenceReport:
    """First non-finite or threshold-crossing estimate in a snapshot stack."""

    divergent: bool
    first_iteration: int | None = None
    node: int | None = None


def network_msd_db(w_table: np.ndarray, w_o: np.ndarray) -> float:
    """Network mean-square deviation in dB.

    10 * log10 of the node-averaged squared deviation between the estimate
    table (N x M) and the true vector. Returns -inf when the deviation is
    exactly zero.
    """
    dev = np.asarray(w_table, dtype=float) - np.asarray(w_o, dtype=float)
    total = float((dev * dev).sum())
    n = dev.shape[0]
    if total == 0.0:
        return float("-inf")
    return 10.0 * math.log10(total / n)


def linear_deviation(snapshots: np.ndarray, w_o: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Linear-domain deviation curves from a snapshot stack (T, N, M).

    Returns (network, per_node): network[i] is the node-averaged squared
    deviation at index i, per_node[i, k] node k's squared deviation.
    """
    dev = snapshots - np.asarray(w_o, dtype=float)[None, None, :]
    per_node = (dev * dev).sum(axis=2)
    return per_node.mean(axis=1), per_node


def msd_trace_db(snapshots: np.ndarray, w_o: np.ndarray) -> np.ndarray:
    """Per-index network MSD in dB for a snapshot stack (T, N, M)."""
    network, _ = linear_deviation(snapshots, w_o)
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(network)


def leaky_fixed_point(r: np.ndarray, gamma: float, w_o: np.ndarray) -> np.ndarray:
    """Biased solution of the leakage-regularized least-squares cost.

    For regressor covariance R, the minimizer of the mean-square error plus
    gamma * ||w||^2 is (R + gamma * I)^{-1} R w_o; gamma = 0 returns w_o
    whenever R is invertible. Raises numpy.linalg.LinAlgError when
    R + gamma * I is singular (gamma = 0 with rank-deficient R).
    """
    r = np.asarray(r, dtype=float)
    w_o = np.asarray(w_o, dtype=float)
    if gamma < 0.0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    m = w_o.shape[0]
    if r.shape != (m, m):
        raise ValueError(f"R must be {m} x {m}, got {r.shape}")
    return np.linalg.solve(r + gamma * np.eye(m), r @ w_o)


def step_size_upper_bound(sigma_u_sq: float, m: int, gamma: float = 0.0) -> float:
    """Mean-stability step-size bound for white regressors.

    With covariance sigma_u_sq * I (any tap count m >= 1) the largest
    eigenvalue is sigma_u_sq, so the bound is 2 / (gamma + sigma_u_sq):
    the contraction |1 - mu * (gamma + lambda)| < 1 holds for every
    eigenvalue lambda at any step size below it.
    """
    if sigma_u_sq <= 0.0:
        raise ValueError(f"sigma_u_sq must be positive, got {sigma_u_sq}")
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if gamma < 0.0:
        raise ValueError(f"gamma must be >= 0, got {gamma}")
    return 2.0 / (gamma + sigma_u_sq)


def detect_divergence(snapshots: np.ndarray, threshold: float = DIVERGENCE_THRESHOLD) -> DivergenceReport:
    """Flag the first estimate with a non-finite entry or max-norm above
    ``threshold``.

    ``snapshots`` is a stack (T, N, M) or a single table (N, M); the
    reported iteration is the index into the given stack.
    """
    if threshold <= 0.0:
        raise ValueError(f"threshold must be positive, got {threshold}")
    arr = np.asarray(snapshots)
    if arr.ndim == 2:
        arr = arr[None, :, :]
    if arr.ndim != 3:
        raise ValueError(f"expected an (N, M) table or (T, N, M) stack, got shape {arr.shape}")
    with np.errstate(invalid="ignore"):
        bad = ~np.isfinite(arr) | (np.abs(arr) > threshold)
    bad_nodes = bad.any(axis=2)
    if not bad_nodes.any():
        return DivergenceReport(divergent=False)
    flat = int(np.argmax(bad_nodes))
    t, k = divmod(flat, bad_nodes.shape[1])
    return DivergenceReport(divergent=True, first_iteration=t, node=k)


def steady_state_msd(trace: MsdTrace | np.ndarray, window: int) -> float:
    """Mean of the final ``window`` dB values of a learning curve."""
    arr = np.asarray(getattr(trace, "per_iteration_db", trace), dtype=float)
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    if window > arr.shape[0]:
        raise ValueError(f"window {window} exceeds trace length {arr.shape[0]}")
    return float(arr[-window:].mean())
