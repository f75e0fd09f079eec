"""Finite-difference verification of analytic gradients."""

from __future__ import annotations

import numpy as np

from maskscore.nn.layers import Network, l2_loss


def grad_check(
    net: Network,
    x: np.ndarray,
    target: np.ndarray,
    supervision: np.ndarray,
    epsilon: float = 1e-5,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    Checks every parameter entry of the network under the supervised L2 loss.
    Relative error uses max(|analytic|, |numeric|, 1) as the denominator so
    near-zero gradients are compared absolutely.
    """
    net.zero_grads()
    pred = net.forward(x)
    _, dpred = l2_loss(pred, target, supervision)
    net.backward(dpred)
    analytic = [g.copy() for g in net.grads()]

    worst = 0.0
    for p, ga in zip(net.params(), analytic, strict=True):
        flat_p = p.reshape(-1)
        flat_g = ga.reshape(-1)
        for i in range(flat_p.size):
            orig = flat_p[i]
            flat_p[i] = orig + epsilon
            lp, _ = l2_loss(net.forward(x), target, supervision)
            flat_p[i] = orig - epsilon
            lm, _ = l2_loss(net.forward(x), target, supervision)
            flat_p[i] = orig
            gn = (lp - lm) / (2.0 * epsilon)
            err = abs(flat_g[i] - gn) / max(abs(flat_g[i]), abs(gn), 1.0)
            worst = max(worst, err)
    return worst
