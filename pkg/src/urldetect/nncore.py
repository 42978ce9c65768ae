"""Numerical primitives and the recurrent kernel.

Everything here is plain numpy. The LSTM uses the standard four-gate
formulation (input/forget/output gates plus tanh candidate, no peepholes):

    i = sigmoid(W_i x + U_i h_prev + b_i)
    f = sigmoid(W_f x + U_f h_prev + b_f)
    o = sigmoid(W_o x + U_o h_prev + b_o)
    g = tanh   (W_g x + U_g h_prev + b_g)
    c = f * c_prev + i * g
    h = o * tanh(c)

Two code paths exist on purpose: per-timestep reference ops
(`lstm_cell_forward` / `lstm_cell_backward` / `lstm_sequence`) that follow
the equations one step at a time, and a vectorized batch kernel
(`lstm_batch_forward` / `lstm_batch_backward`) used by training. The batch
kernel is validated against the reference path and finite differences.

Default precision is float32; gradient checking runs the same code in
float64 (arrays carry their dtype through every op).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def sigmoid(x: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function, elementwise."""
    x = np.asarray(x)
    z = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0 / (1.0 + z), z / (1.0 + z))


def tanh_v(x: np.ndarray) -> np.ndarray:
    return np.tanh(x)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Max-subtracted softmax over the last axis."""
    logits = np.asarray(logits)
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def cross_entropy(probs: np.ndarray, label: int) -> float:
    """-log(probs[label]), with the probability floored at 1e-12."""
    if not 0 <= label < len(probs):
        raise ValueError(f"label {label} out of range for {len(probs)} classes")
    return float(-np.log(max(float(probs[label]), 1e-12)))


class LstmWeights:
    """One direction's LSTM parameters.

    Stored stacked for speed: `w_x` is (4H, E) with the four gate blocks in
    the order [input, forget, output, candidate]; `w_h` is (4H, H); `b` is
    (4H,). Per-gate matrices are row-slice views (w_i, u_i, b_i, ...).
    """

    def __init__(self, w_x: np.ndarray, w_h: np.ndarray, b: np.ndarray):
        hidden4, embed = w_x.shape
        if hidden4 % 4 != 0:
            raise ValueError("stacked gate dimension must be a multiple of 4")
        hidden = hidden4 // 4
        if w_h.shape != (hidden4, hidden) or b.shape != (hidden4,):
            raise ValueError(
                f"inconsistent LSTM shapes: w_x {w_x.shape}, w_h {w_h.shape}, b {b.shape}"
            )
        self.w_x = w_x
        self.w_h = w_h
        self.b = b
        self.hidden = hidden
        self.embed = embed

    @classmethod
    def zeros(cls, hidden: int, embed: int, dtype=np.float32) -> "LstmWeights":
        return cls(
            np.zeros((4 * hidden, embed), dtype=dtype),
            np.zeros((4 * hidden, hidden), dtype=dtype),
            np.zeros(4 * hidden, dtype=dtype),
        )

    def _gate(self, arr: np.ndarray, k: int) -> np.ndarray:
        return arr[k * self.hidden : (k + 1) * self.hidden]

    # i, f, o, g gate views in stacking order
    w_i = property(lambda self: self._gate(self.w_x, 0))
    w_f = property(lambda self: self._gate(self.w_x, 1))
    w_o = property(lambda self: self._gate(self.w_x, 2))
    w_g = property(lambda self: self._gate(self.w_x, 3))
    u_i = property(lambda self: self._gate(self.w_h, 0))
    u_f = property(lambda self: self._gate(self.w_h, 1))
    u_o = property(lambda self: self._gate(self.w_h, 2))
    u_g = property(lambda self: self._gate(self.w_h, 3))
    b_i = property(lambda self: self._gate(self.b, 0))
    b_f = property(lambda self: self._gate(self.b, 1))
    b_o = property(lambda self: self._gate(self.b, 2))
    b_g = property(lambda self: self._gate(self.b, 3))

    def copy(self) -> "LstmWeights":
        return LstmWeights(self.w_x.copy(), self.w_h.copy(), self.b.copy())

    def astype(self, dtype) -> "LstmWeights":
        return LstmWeights(
            self.w_x.astype(dtype), self.w_h.astype(dtype), self.b.astype(dtype)
        )


@dataclass
class CellState:
    h: np.ndarray
    c: np.ndarray

    @classmethod
    def zeros(cls, hidden: int, dtype=np.float32) -> "CellState":
        return cls(np.zeros(hidden, dtype=dtype), np.zeros(hidden, dtype=dtype))


@dataclass
class TapeEntry:
    """Forward-pass values cached for one timestep's backward computation."""

    x: np.ndarray
    h_prev: np.ndarray
    c_prev: np.ndarray
    i: np.ndarray
    f: np.ndarray
    o: np.ndarray
    g: np.ndarray
    c: np.ndarray
    tanh_c: np.ndarray


def lstm_cell_forward(
    x: np.ndarray, prev: CellState, w: LstmWeights
) -> tuple[CellState, TapeEntry]:
    """One LSTM step. x: (E,), prev.h/prev.c: (H,)."""
    if x.shape != (w.embed,) or prev.h.shape != (w.hidden,):
        raise ValueError(
            f"dimension mismatch: x {x.shape}, h {prev.h.shape}, "
            f"weights expect embed={w.embed} hidden={w.hidden}"
        )
    a = w.w_x @ x + w.w_h @ prev.h + w.b
    hid = w.hidden
    gates = sigmoid(a[: 3 * hid])
    i, f, o = gates[:hid], gates[hid : 2 * hid], gates[2 * hid :]
    g = np.tanh(a[3 * hid :])
    c = f * prev.c + i * g
    tanh_c = np.tanh(c)
    h = o * tanh_c
    tape = TapeEntry(x=x, h_prev=prev.h, c_prev=prev.c, i=i, f=f, o=o, g=g, c=c, tanh_c=tanh_c)
    return CellState(h=h, c=c), tape


def lstm_cell_backward(
    grad_h: np.ndarray, grad_c: np.ndarray, tape: TapeEntry, w: LstmWeights
) -> tuple[np.ndarray, np.ndarray, np.ndarray, LstmWeights]:
    """Reverse of lstm_cell_forward for one timestep.

    Returns (grad_x, grad_h_prev, grad_c_prev, grad_w). grad_w holds this
    step's parameter gradients only; accumulation is the caller's job.
    """
    i, f, o, g = tape.i, tape.f, tape.o, tape.g
    do = grad_h * tape.tanh_c
    dc_total = grad_c + grad_h * o * (1.0 - tape.tanh_c**2)
    di = dc_total * g
    df = dc_total * tape.c_prev
    dg = dc_total * i
    grad_c_prev = dc_total * f
    # gradients w.r.t. the pre-activations, stacked in gate order
    da = np.concatenate(
        [di * i * (1.0 - i), df * f * (1.0 - f), do * o * (1.0 - o), dg * (1.0 - g**2)]
    )
    grad_w = LstmWeights(np.outer(da, tape.x), np.outer(da, tape.h_prev), da)
    grad_x = w.w_x.T @ da
    grad_h_prev = w.w_h.T @ da
    return grad_x, grad_h_prev, grad_c_prev, grad_w


def lstm_sequence(
    seq: np.ndarray | list[np.ndarray], w: LstmWeights, direction: str
) -> tuple[CellState, list[TapeEntry]]:
    """Run the cell over a full sequence of valid timesteps.

    direction "forward" iterates t = 0..L-1, "backward" iterates t = L-1..0.
    Returns the final state and one tape entry per processed step, in
    processing order.
    """
    if len(seq) == 0:
        raise ValueError("empty sequence")
    if direction not in ("forward", "backward"):
        raise ValueError(f"unknown direction {direction!r}")
    order = range(len(seq)) if direction == "forward" else range(len(seq) - 1, -1, -1)
    state = CellState.zeros(w.hidden, dtype=w.w_x.dtype)
    tapes = []
    for t in order:
        state, tape = lstm_cell_forward(np.asarray(seq[t]), state, w)
        tapes.append(tape)
    return state, tapes


def gradient_check(
    loss_fn,
    params: np.ndarray,
    analytic_grad: np.ndarray,
    eps: float = 1e-5,
    max_coords: int | None = None,
    seed: int = 0,
) -> float:
    """Compare an analytic gradient against central finite differences.

    loss_fn maps a flat float64 parameter vector to a scalar. Checks every
    coordinate, or a seeded random subset (never fewer than 200) when
    max_coords is given. Returns max_k |a - n| / max(1e-8, |a| + |n|).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    theta = np.array(params, dtype=np.float64)
    grad = np.asarray(analytic_grad, dtype=np.float64)
    if theta.shape != grad.shape:
        raise ValueError("params and analytic gradient differ in shape")
    dim = theta.size
    if max_coords is not None and dim > max(200, max_coords):
        rng = np.random.default_rng(seed)
        coords = rng.choice(dim, size=max(200, max_coords), replace=False)
    else:
        coords = np.arange(dim)
    worst = 0.0
    for k in coords:
        orig = theta[k]
        theta[k] = orig + eps
        f_plus = float(loss_fn(theta))
        theta[k] = orig - eps
        f_minus = float(loss_fn(theta))
        theta[k] = orig
        if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
            raise FloatingPointError("non-finite loss during gradient check")
        numeric = (f_plus - f_minus) / (2.0 * eps)
        a = float(grad[k])
        rel = abs(a - numeric) / max(1e-8, abs(a) + abs(numeric))
        worst = max(worst, rel)
    return worst


# ---------------------------------------------------------------------------
# Vectorized batch kernel. Sequences are processed a timestep at a time over
# the whole batch; rows must be sorted by valid length descending so the
# active rows at step t are always the leading slice. Rows past their length
# are simply never touched, which is exactly equivalent to stopping each
# sequence at its own final step.
# ---------------------------------------------------------------------------


def lstm_batch_forward(
    x: np.ndarray, lens: np.ndarray, w: LstmWeights, want_tape: bool = False
) -> tuple[np.ndarray, np.ndarray, list]:
    """Run the LSTM over a batch of embedded sequences.

    x: (B, T, E) with rows sorted by lens descending; lens: (B,) valid
    lengths >= 1. Returns final hidden (B, H), final cell (B, H), and the
    per-step tape (empty unless want_tape).
    """
    batch, steps, _ = x.shape
    hid = w.hidden
    if np.any(np.diff(lens) > 0):
        raise ValueError("batch rows must be sorted by valid length, descending")
    if lens[-1] < 1:
        raise ValueError("every sequence needs at least one valid timestep")
    counts = (lens[:, None] > np.arange(steps)[None, :]).sum(axis=0)
    h = np.zeros((batch, hid), dtype=x.dtype)
    c = np.zeros((batch, hid), dtype=x.dtype)
    tape = []
    for t in range(int(lens[0])):
        n = int(counts[t])
        h_prev = h[:n].copy()
        c_prev = c[:n].copy()
        a = x[:n, t] @ w.w_x.T + h_prev @ w.w_h.T + w.b
        gates = sigmoid(a[:, : 3 * hid])
        i, f, o = gates[:, :hid], gates[:, hid : 2 * hid], gates[:, 2 * hid :]
        g = np.tanh(a[:, 3 * hid :])
        c_new = f * c_prev + i * g
        tanh_c = np.tanh(c_new)
        h[:n] = o * tanh_c
        c[:n] = c_new
        if want_tape:
            tape.append((n, h_prev, c_prev, i, f, o, g, tanh_c))
    return h, c, tape


def lstm_batch_backward(
    grad_h: np.ndarray,
    grad_c: np.ndarray,
    x: np.ndarray,
    w: LstmWeights,
    tape: list,
) -> tuple[np.ndarray, LstmWeights]:
    """Backprop through lstm_batch_forward.

    grad_h/grad_c: (B, H) gradients at each row's final state. Returns the
    gradient w.r.t. x (B, T, E) and the summed parameter gradients.
    """
    dh = grad_h.astype(x.dtype, copy=True)
    dc = grad_c.astype(x.dtype, copy=True)
    dx = np.zeros_like(x)
    dw = LstmWeights.zeros(w.hidden, w.embed, dtype=x.dtype)
    for t in range(len(tape) - 1, -1, -1):
        n, h_prev, c_prev, i, f, o, g, tanh_c = tape[t]
        dht = dh[:n]
        do = dht * tanh_c
        dc_total = dc[:n] + dht * o * (1.0 - tanh_c**2)
        di = dc_total * g
        df = dc_total * c_prev
        dg = dc_total * i
        da = np.concatenate(
            [di * i * (1.0 - i), df * f * (1.0 - f), do * o * (1.0 - o), dg * (1.0 - g**2)],
            axis=1,
        )
        dw.w_x += da.T @ x[:n, t]
        dw.w_h += da.T @ h_prev
        dw.b += da.sum(axis=0)
        dx[:n, t] = da @ w.w_x
        dh[:n] = da @ w.w_h
        dc[:n] = dc_total * f
    return dx, dw
