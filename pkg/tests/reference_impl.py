"""Independent per-node reference implementations used as test oracles.

These follow the plain diffusion LMS recursions literally: explicit loops
over nodes, neighbor sums accumulated in ascending node order, no code
shared with the production step functions.
"""

from __future__ import annotations

import numpy as np


def atc_dlms_step(w, u, d, mu, a, c, node_order=None):
    """One plain adapt-then-combine round, node by node.

    Adaptation: phi_k = w_k + mu * sum_l c[l,k] * (d_l - u_l . w_k) * u_l.
    Combination: w_k = sum_l a[l,k] * phi_l.
    ``node_order`` permutes the outer loop only; the inner sums always run
    in ascending l.
    """
    n, m = w.shape
    order = list(range(n)) if node_order is None else list(node_order)
    phi = np.zeros_like(w)
    for k in order:
        acc = np.zeros(m)
        for l in range(n):
            if c[l, k] != 0.0:
                err = d[l] - u[l] @ w[k]
                acc = acc + c[l, k] * err * u[l]
        phi[k] = w[k] + mu * acc
    w_new = np.zeros_like(w)
    for k in order:
        acc = np.zeros(m)
        for l in range(n):
            if a[l, k] != 0.0:
                acc = acc + a[l, k] * phi[l]
        w_new[k] = acc
    return w_new, phi


def cta_dlms_step(w, u, d, mu, a, c, node_order=None):
    """One plain combine-then-adapt round, node by node.

    Combination: phi_k = sum_l a[l,k] * w_l.
    Adaptation: w_k = phi_k + mu * sum_l c[l,k] * (d_l - u_l . phi_k) * u_l.
    """
    n, m = w.shape
    order = list(range(n)) if node_order is None else list(node_order)
    phi = np.zeros_like(w)
    for k in order:
        acc = np.zeros(m)
        for l in range(n):
            if a[l, k] != 0.0:
                acc = acc + a[l, k] * w[l]
        phi[k] = acc
    w_new = np.zeros_like(w)
    for k in order:
        acc = np.zeros(m)
        for l in range(n):
            if c[l, k] != 0.0:
                err = d[l] - u[l] @ phi[k]
                acc = acc + c[l, k] * err * u[l]
        w_new[k] = phi[k] + mu * acc
    return w_new, phi


def standalone_leaky_lms(u_seq, d_seq, mu, gamma):
    """Single-filter leaky LMS trajectory from zero init.

    Returns the (T + 1, M) stack of estimates, index 0 the initial zero
    vector.
    """
    steps, m = u_seq.shape
    w = np.zeros(m)
    out = [w.copy()]
    for i in range(steps):
        err = d_seq[i] - u_seq[i] @ w
        w = (1.0 - mu * gamma) * w + mu * err * u_seq[i]
        out.append(w.copy())
    return np.stack(out)
