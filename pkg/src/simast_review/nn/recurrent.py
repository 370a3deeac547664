"""A single-direction GRU as one differentiable op with hand-written BPTT.

Gate layout in the packed weights is ``[update | reset | candidate]``::

    z_t = sigmoid(x_t Wz + h_{t-1} Uz + bz)
    r_t = sigmoid(x_t Wr + h_{t-1} Ur + br)
    c_t = tanh(x_t Wc + (r_t * h_{t-1}) Uc + bc)
    h_t = (1 - z_t) * c_t + z_t * h_{t-1}
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit

from simast_review.errors import ShapeError
from simast_review.nn.tensor import Array, Tensor, make_result


GATES = 3


def _check_shapes(x: Tensor, weight_input: Tensor, weight_hidden: Tensor, bias: Tensor) -> int:
    if x.data.ndim != 2:
        raise ShapeError(f"gru input must be a matrix, got shape {x.shape}")
    hidden = weight_hidden.shape[0] if weight_hidden.data.ndim == 2 else -1
    if weight_hidden.shape != (hidden, GATES * hidden):
        raise ShapeError(f"gru: recurrent weight shape {weight_hidden.shape} is not (h, 3h)")
    if weight_input.shape != (x.shape[1], GATES * hidden):
        raise ShapeError(
            f"gru: cannot multiply input {x.shape} with input weight {weight_input.shape}"
        )
    if bias.shape != (GATES * hidden,):
        raise ShapeError(f"gru: bias shape {bias.shape} does not match weight {weight_hidden.shape}")
    return hidden


def gru(
    x: Tensor,
    weight_input: Tensor,
    weight_hidden: Tensor,
    bias: Tensor,
    *,
    reverse: bool = False,
) -> Tensor:
    """Run a GRU over the rows of ``x`` from a zero state.

    Returns an ``n x h`` matrix whose row ``t`` is the hidden state after reading row ``t``.
    With ``reverse=True`` rows are read last to first, but the output stays aligned with
    the input rows.
    """
    hidden = _check_shapes(x, weight_input, weight_hidden, bias)
    n = x.shape[0]
    w = weight_input.data
    u = weight_hidden.data
    u_update = u[:, :hidden]
    u_reset = u[:, hidden : 2 * hidden]
    u_candidate = u[:, 2 * hidden :]

    projected = x.data @ w + bias.data
    states = np.zeros((n, hidden), dtype=np.float64)
    steps: list[tuple[int, Array, Array, Array, Array]] = []
    h_prev = np.zeros(hidden, dtype=np.float64)
    for t in range(n - 1, -1, -1) if reverse else range(n):
        a = projected[t]
        z = expit(a[:hidden] + h_prev @ u_update)
        r = expit(a[hidden : 2 * hidden] + h_prev @ u_reset)
        c = np.tanh(a[2 * hidden :] + (r * h_prev) @ u_candidate)
        h_t = (1.0 - z) * c + z * h_prev
        states[t] = h_t
        steps.append((t, h_prev, z, r, c))
        h_prev = h_t

    def grad_fn(g: Array) -> tuple[Array, Array, Array, Array]:
        d_projected = np.zeros_like(projected)
        d_u = np.zeros_like(u)
        dh_carry = np.zeros(hidden, dtype=np.float64)
        for t, h_before, z, r, c in reversed(steps):
            dh = g[t] + dh_carry
            dz = dh * (h_before - c)
            dc = dh * (1.0 - z)
            dh_before = dh * z

            d_candidate = dc * (1.0 - c * c)
            d_gated = u_candidate @ d_candidate
            d_u[:, 2 * hidden :] += np.outer(r * h_before, d_candidate)
            dr = d_gated * h_before
            dh_before += d_gated * r

            d_update = dz * z * (1.0 - z)
            d_reset = dr * r * (1.0 - r)
            d_u[:, :hidden] += np.outer(h_before, d_update)
            d_u[:, hidden : 2 * hidden] += np.outer(h_before, d_reset)
            dh_before += u_update @ d_update + u_reset @ d_reset

            d_projected[t, :hidden] = d_update
            d_projected[t, hidden : 2 * hidden] = d_reset
            d_projected[t, 2 * hidden :] = d_candidate
            dh_carry = dh_before
        return (
            d_projected @ w.T,
            x.data.T @ d_projected,
            d_u,
            d_projected.sum(axis=0),
        )

    return make_result("gru", states, (x, weight_input, weight_hidden, bias), grad_fn)
