"""Diffusion LMS and leaky diffusion LMS as synchronous-round state machines.

Each round has two strict phases. Adapt-then-combine (ATC): every node first
forms an intermediate estimate from the previous round's estimates and the
data-shared innovations, then fuses neighbors' intermediates.
Combine-then-adapt (CTA) runs the phases in the opposite order. Setting the
leakage coefficient to zero recovers plain diffusion LMS exactly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from diffusion_lms.network import CombinationWeights, Topology
from diffusion_lms.signals import FrameStream, SampleFrame

__all__ = [
    "ORDERINGS",
    "AlgorithmSpec",
    "NodeState",
    "init_state",
    "atc_step",
    "cta_step",
    "run_filter",
]

ORDERINGS = ("atc", "cta")


@dataclass(frozen=True)
class AlgorithmSpec:
    """Algorithm selector: phase ordering, step size, leakage coefficient.

    gamma = 0 gives plain diffusion LMS; gamma > 0 adds an l2 pull toward
    zero ((1 - mu * gamma) shrinkage of the adapted estimate). mu = 0 is
    permitted and makes the adaptation phase a no-op.
    """

    ordering: str
    mu: float
    gamma: float = 0.0

    def __post_init__(self) -> None:
        if self.ordering not in ORDERINGS:
            raise ValueError(f"ordering must be one of {ORDERINGS}, got {self.ordering!r}")
        if not self.mu >= 0.0:
            raise ValueError(f"mu must be >= 0, got {self.mu}")
        if not self.gamma >= 0.0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")


@dataclass(frozen=True)
class NodeState:
    """Per-node estimates ``w`` and intermediate estimates ``phi``, each N x M."""

    w: np.ndarray
    phi: np.ndarray

    def __post_init__(self) -> None:
        w = np.asarray(self.w, dtype=float)
        phi = np.asarray(self.phi, dtype=float)
        if w.shape != phi.shape or w.ndim != 2:
            raise ValueError("w and phi must share an (N, M) shape")
        w.setflags(write=False)
        phi.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "phi", phi)


def init_state(n: int, m: int) -> NodeState:
    """All-zero initial state."""
    if n < 1 or m < 1:
        raise ValueError(f"need n >= 1 and m >= 1, got ({n}, {m})")
    return NodeState(w=np.zeros((n, m)), phi=np.zeros((n, m)))


def _innovation(w_table: np.ndarray, u: np.ndarray, d: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Data-shared innovation sums, one row per node.

    Row k is sum over l of c[l, k] * (d_l - u_l . w_k) * u_l: the c-weighted
    neighbor innovations evaluated at node k's own reference estimate.
    """
    errors = d[:, None] - u @ w_table.T  # entry (l, k) = d_l - u_l . w_k
    return (u.T @ (c * errors)).T


def _atc_update(
    w: np.ndarray,
    u: np.ndarray,
    d: np.ndarray,
    mu: float,
    gamma: float,
    a: np.ndarray,
    c: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    phi = (1.0 - mu * gamma) * w + mu * _innovation(w, u, d, c)
    return a.T @ phi, phi


def _cta_update(
    w: np.ndarray,
    u: np.ndarray,
    d: np.ndarray,
    mu: float,
    gamma: float,
    a: np.ndarray,
    c: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    phi = a.T @ w
    w_new = (1.0 - mu * gamma) * phi + mu * _innovation(phi, u, d, c)
    return w_new, phi


def atc_step(
    state: NodeState,
    frame: SampleFrame,
    spec: AlgorithmSpec,
    weights: CombinationWeights,
    topology: Topology | None = None,
) -> NodeState:
    """One adapt-then-combine round.

    Adaptation reads only the previous round's estimates: every node shrinks
    its own estimate by (1 - mu * gamma) and adds the c-weighted neighbor
    innovations; the combination phase then a-averages the fresh
    intermediates. Passing a topology additionally validates weight support.
    """
    _check_step_args(state, frame, weights, topology)
    w_new, phi = _atc_update(state.w, frame.u, frame.d, spec.mu, spec.gamma, weights.a, weights.c)
    return NodeState(w=w_new, phi=phi)


def cta_step(
    state: NodeState,
    frame: SampleFrame,
    spec: AlgorithmSpec,
    weights: CombinationWeights,
    topology: Topology | None = None,
) -> NodeState:
    """One combine-then-adapt round.

    Every node first a-averages neighbors' previous estimates into its
    intermediate, then adapts from that intermediate using the c-weighted
    neighbor innovations evaluated at it.
    """
    _check_step_args(state, frame, weights, topology)
    w_new, phi = _cta_update(state.w, frame.u, frame.d, spec.mu, spec.gamma, weights.a, weights.c)
    return NodeState(w=w_new, phi=phi)


def _check_step_args(
    state: NodeState,
    frame: SampleFrame,
    weights: CombinationWeights,
    topology: Topology | None,
) -> None:
    n, m = state.w.shape
    if frame.u.shape != (n, m):
        raise ValueError(f"frame regressors shape {frame.u.shape} does not match state {state.w.shape}")
    if frame.d.shape != (n,):
        raise ValueError(f"frame measurements shape {frame.d.shape} does not match {n} nodes")
    if weights.node_count != n:
        raise ValueError(f"weights are for {weights.node_count} nodes, state has {n}")
    if topology is not None:
        weights.validate_support(topology)


def run_filter(
    topology: Topology,
    weights: CombinationWeights,
    spec: AlgorithmSpec,
    source: FrameStream | Iterable[SampleFrame],
    horizon: int | None = None,
) -> np.ndarray:
    """Drive one algorithm over a source for ``horizon`` synchronous rounds.

    Returns the estimate snapshots as an array of shape (horizon + 1, N, M):
    index 0 is the all-zero initial table, index i the table after round i.
    Non-finite states are returned as-is (overflow during divergence is
    silenced, never masked); detection is the analysis layer's job. A
    horizon of 0 returns only the initial snapshot. Deterministic given a
    deterministic source.
    """
    if horizon is not None and horizon < 0:
        raise ValueError(f"horizon must be >= 0, got {horizon}")
    weights.validate_support(topology)
    n = topology.node_count
    a, c = weights.a, weights.c
    mu, gamma = spec.mu, spec.gamma
    update = _atc_update if spec.ordering == "atc" else _cta_update

    if isinstance(source, FrameStream):
        if source.node_count != n:
            raise ValueError(f"source has {source.node_count} nodes, topology has {n}")
        total = len(source) if horizon is None else horizon
        if total > len(source):
            raise ValueError(f"horizon {total} exceeds source length {len(source)}")
        m = source.taps
        out = np.empty((total + 1, n, m))
        w = np.zeros((n, m))
        out[0] = w
        u_all, d_all = source.u, source.d
        with np.errstate(over="ignore", invalid="ignore"):
            for i in range(total):
                w, _ = update(w, u_all[i], d_all[i], mu, gamma, a, c)
                out[i + 1] = w
        return out

    it = iter(source)
    try:
        first = next(it)
    except StopIteration:
        raise ValueError("source yielded no frames") from None
    if first.u.shape[0] != n:
        raise ValueError(f"source has {first.u.shape[0]} nodes, topology has {n}")
    w = np.zeros_like(first.u)
    snapshots = [w.copy()]
    done = 0
    with np.errstate(over="ignore", invalid="ignore"):
        for frame in itertools.chain([first], it):
            if horizon is not None and done >= horizon:
                break
            w, _ = update(w, frame.u, frame.d, mu, gamma, a, c)
            snapshots.append(w.copy())
            done += 1
    return np.stack(snapshots)
