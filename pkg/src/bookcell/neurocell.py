"""Per-cell neural network: one hidden layer, tanh activations, fixed weights.

Inputs and outputs are laid out per connection slot. For a network with
N slots the input vector is

    [S_1, L_1, E_1, ..., S_N, L_N, E_N, light_r, light_g, light_b, touch]

and the output vector is

    [S_1, L_1, E_1, ..., S_N, L_N, E_N, READ, EAT, FUSION, LIGHT]

The per-slot S input is the neighbor's S output multiplied by this cell's
coupling strength S' for that slot; S' itself is the only state that changes
over a cell's life, via the simplified Hebb rule `S' += ds * S`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .genome import NetDims


class ShapeError(ValueError):
    pass


@dataclass(frozen=True)
class NeuralNet:
    """Weights split into the two layer matrices, bias column last."""

    dims: NetDims
    w1: np.ndarray  # (n_hidden, n_in + 1)
    w2: np.ndarray  # (n_out, n_hidden + 1)

    @classmethod
    def from_flat(cls, dims: NetDims, flat) -> "NeuralNet":
        flat = np.asarray(flat, dtype=np.float64)
        if flat.size != dims.n_weights:
            raise ShapeError(f"expected {dims.n_weights} weights, got {flat.size}")
        split = dims.n_hidden * (dims.n_in + 1)
        w1 = flat[:split].reshape(dims.n_hidden, dims.n_in + 1)
        w2 = flat[split:].reshape(dims.n_out, dims.n_hidden + 1)
        return cls(dims=dims, w1=w1, w2=w2)

    def to_flat(self) -> np.ndarray:
        return np.concatenate([self.w1.ravel(), self.w2.ravel()])


def forward(net: NeuralNet, inputs) -> np.ndarray:
    """tanh(W2 . [tanh(W1 . [x; 1]); 1]); every output lies in (-1, 1)."""
    x = np.asarray(inputs, dtype=np.float64)
    if x.shape != (net.dims.n_in,):
        raise ShapeError(f"expected {net.dims.n_in} inputs, got {x.shape}")
    hidden = np.tanh(net.w1 @ np.append(x, 1.0))
    return np.tanh(net.w2 @ np.append(hidden, 1.0))


def forward_batch(w1: np.ndarray, w2: np.ndarray, inputs: np.ndarray) -> np.ndarray:
    """Vectorized forward over many cells; must agree with forward() exactly.

    w1: (n, n_hidden, n_in+1), w2: (n, n_out, n_hidden+1), inputs: (n, n_in).
    """
    n = inputs.shape[0]
    xb = np.concatenate([inputs, np.ones((n, 1))], axis=1)
    hidden = np.tanh(np.einsum("nhi,ni->nh", w1, xb))
    hb = np.concatenate([hidden, np.ones((n, 1))], axis=1)
    return np.tanh(np.einsum("noh,nh->no", w2, hb))


def hebb_update(s_prime: float, s_out: float, delta_s: float) -> float:
    """Coupling update S'(t+dt) = S'(t) + ds * S(t), exactly."""
    return s_prime + delta_s * s_out


def gather_inputs(dims: NetDims, slot_s_out, slot_l_out, slot_e_out,
                  slot_occupied, s_prime, light, touched: bool) -> np.ndarray:
    """Assemble the input vector for one cell.

    slot_* are per-slot values from the connected neighbors (ignored where
    slot_occupied is false); light is the (r, g, b) intensity hitting the
    cell this step, normalized here into ratios summing to at most 1.
    """
    if len(slot_occupied) > dims.n_slots:
        raise ShapeError(f"more than {dims.n_slots} slots supplied")
    x = np.zeros(dims.n_in)
    for k in range(len(slot_occupied)):
        if slot_occupied[k]:
            x[3 * k + 0] = slot_s_out[k] * s_prime[k]
            x[3 * k + 1] = slot_l_out[k]
            x[3 * k + 2] = slot_e_out[k]
    total = float(light[0] + light[1] + light[2])
    base = 3 * dims.n_slots
    if total > 0.0:
        x[base + 0] = light[0] / total
        x[base + 1] = light[1] / total
        x[base + 2] = light[2] / total
    x[base + 3] = 1.0 if touched else 0.0
    return x


# Output column helpers (per-slot block first, then the four scalars).
def out_col_s(slot: int) -> int:
    return 3 * slot


def out_col_l(slot: int) -> int:
    return 3 * slot + 1


def out_col_e(slot: int) -> int:
    return 3 * slot + 2


def scalar_cols(dims: NetDims) -> tuple[int, int, int, int]:
    """(READ, EAT, FUSION, LIGHT) column indices."""
    base = 3 * dims.n_slots
    return base, base + 1, base + 2, base + 3
