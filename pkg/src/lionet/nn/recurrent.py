"""Recurrent cells (LSTM, GRU, vanilla RNN) and BPTT over whole sequences.

Weight layout per cell: input kernel ``W (n_in, G*m)``, recurrent kernel
``U (m, G*m)`` and bias ``b (G*m,)`` where ``G`` is the gate count (4, 3, 1).
LSTM gate order is input, forget, cell, output; GRU order is update, reset,
candidate with the reset gate applied before the recurrent product.
"""

from __future__ import annotations

import numpy as np

from .layers import Layer, Param, sigmoid, uniform_init


class _Cell:
    gates = 1

    def __init__(self, n_in: int, m: int, name: str, rng: np.random.Generator | None = None):
        if n_in < 1 or m < 1:
            raise ValueError("cell sizes must be positive")
        rng = rng if rng is not None else np.random.default_rng(0)
        self.n_in, self.m = n_in, m
        G = self.gates
        self.W = Param(f"{name}.W", uniform_init(rng, (n_in, G * m), n_in))
        self.U = Param(f"{name}.U", uniform_init(rng, (m, G * m), m))
        self.b = Param(f"{name}.b", uniform_init(rng, (G * m,), n_in))

    def params(self):
        return [self.W, self.U, self.b]

    def initial_state(self, batch: int, dtype=np.float64):
        z = np.zeros((batch, self.m), dtype=dtype)
        return z, z.copy()


class LstmCell(_Cell):
    gates = 4

    def __init__(self, n_in, m, name="lstm", rng=None):
        super().__init__(n_in, m, name, rng)
        self.b.value[m:2 * m] = 1.0  # forget-gate bias

    def step(self, xw, h, c):
        m = self.m
        a = xw + h @ self.U.value
        i = sigmoid(a[:, :m])
        f = sigmoid(a[:, m:2 * m])
        g = np.tanh(a[:, 2 * m:3 * m])
        o = sigmoid(a[:, 3 * m:])
        c_new = f * c + i * g
        tc = np.tanh(c_new)
        h_new = o * tc
        return h_new, c_new, (h, c, i, f, g, o, tc)

    def step_bwd(self, dh, dc, cache):
        h, c, i, f, g, o, tc = cache
        do = dh * tc
        dc = dc + dh * o * (1.0 - tc * tc)
        da = np.concatenate([
            dc * g * i * (1.0 - i),
            dc * c * f * (1.0 - f),
            dc * i * (1.0 - g * g),
            do * o * (1.0 - o),
        ], axis=1)
        self.U.grad += h.T @ da
        return da, da @ self.U.value.T, dc * f


class GruCell(_Cell):
    gates = 3

    def step(self, xw, h, c):
        m = self.m
        U = self.U.value
        a_zr = xw[:, :2 * m] + h @ U[:, :2 * m]
        z = sigmoid(a_zr[:, :m])
        r = sigmoid(a_zr[:, m:])
        rh = r * h
        hh = np.tanh(xw[:, 2 * m:] + rh @ U[:, 2 * m:])
        h_new = z * h + (1.0 - z) * hh
        return h_new, c, (h, z, r, rh, hh)

    def step_bwd(self, dh, dc, cache):
        h, z, r, rh, hh = cache
        m = self.m
        U = self.U.value
        da_h = dh * (1.0 - z) * (1.0 - hh * hh)
        drh = da_h @ U[:, 2 * m:].T
        da_z = dh * (h - hh) * z * (1.0 - z)
        da_r = drh * h * r * (1.0 - r)
        da_zr = np.concatenate([da_z, da_r], axis=1)
        self.U.grad[:, :2 * m] += h.T @ da_zr
        self.U.grad[:, 2 * m:] += rh.T @ da_h
        dh_prev = dh * z + drh * r + da_zr @ U[:, :2 * m].T
        return np.concatenate([da_zr, da_h], axis=1), dh_prev, dc


class RnnCell(_Cell):
    gates = 1

    def step(self, xw, h, c):
        h_new = np.tanh(xw + h @ self.U.value)
        return h_new, c, (h, h_new)

    def step_bwd(self, dh, dc, cache):
        h, h_new = cache
        da = dh * (1.0 - h_new * h_new)
        self.U.grad += h.T @ da
        return da, da @ self.U.value.T, dc


CELLS = {"lstm": LstmCell, "gru": GruCell, "rnn": RnnCell}


def make_cell(kind: str, n_in: int, m: int, name: str, rng=None) -> _Cell:
    try:
        cls = CELLS[kind]
    except KeyError:
        raise ValueError(f"unknown cell {kind!r}; expected one of {sorted(CELLS)}") from None
    return cls(n_in, m, name=name, rng=rng)


def lstm_step(cell: LstmCell, h: np.ndarray, c: np.ndarray, x: np.ndarray):
    """One LSTM update ``(h, c, x) -> (h', c')`` for a batch of inputs."""
    if x.shape[-1] != cell.n_in or h.shape[-1] != cell.m or c.shape[-1] != cell.m:
        raise ValueError("lstm_step dimension mismatch")
    h2, c2, _ = cell.step(x @ cell.W.value + cell.b.value, h, c)
    return h2, c2


class Recurrent(Layer):
    """Runs one cell over ``(B, T, n_in)``.

    Returns the full hidden sequence when ``return_sequences`` else the last
    hidden state.  With ``reverse`` the sequence is processed from the last
    frame to the first and the output sequence is re-aligned to input time.
    """

    def __init__(self, cell: _Cell, return_sequences: bool = False, reverse: bool = False):
        self.cell = cell
        self.return_sequences = return_sequences
        self.reverse = reverse

    def params(self):
        return self.cell.params()

    def forward(self, x):
        if x.ndim != 3 or x.shape[2] != self.cell.n_in:
            raise ValueError(f"recurrent input must be (B, T, {self.cell.n_in}), got {x.shape}")
        B, T, _ = x.shape
        if self.reverse:
            x = x[:, ::-1]
        xw = x @ self.cell.W.value + self.cell.b.value
        h, c = self.cell.initial_state(B, x.dtype)
        caches = []
        hs = np.empty((B, T, self.cell.m), dtype=x.dtype) if self.return_sequences else None
        step = self.cell.step
        for t in range(T):
            h, c, cache = step(xw[:, t], h, c)
            caches.append(cache)
            if hs is not None:
                hs[:, t] = h
        self._x, self._caches = x, caches
        if hs is None:
            return h
        return hs[:, ::-1] if self.reverse else hs

    def backward(self, dy):
        x, caches = self._x, self._caches
        B, T, _ = x.shape
        m = self.cell.m
        if self.return_sequences:
            dseq = dy[:, ::-1] if self.reverse else dy
        dh = np.zeros((B, m), dtype=dy.dtype) if self.return_sequences else dy.copy()
        dc = np.zeros((B, m), dtype=dy.dtype)
        dxw = np.empty((B, T, self.cell.gates * m), dtype=dy.dtype)
        for t in range(T - 1, -1, -1):
            if self.return_sequences:
                dh = dh + dseq[:, t]
            dxw[:, t], dh, dc = self.cell.step_bwd(dh, dc, caches[t])
        n_in = self.cell.n_in
        self.cell.W.grad += x.reshape(-1, n_in).T @ dxw.reshape(-1, dxw.shape[2])
        self.cell.b.grad += dxw.sum(axis=(0, 1))
        dx = dxw @ self.cell.W.value.T
        return dx[:, ::-1] if self.reverse else dx


class Bidirectional(Layer):
    """Forward and reversed :class:`Recurrent` with outputs concatenated (2m)."""

    def __init__(self, fwd: Recurrent, bwd: Recurrent):
        if not bwd.reverse or fwd.reverse:
            raise ValueError("Bidirectional expects (forward, reversed) layers")
        self.fwd, self.bwd = fwd, bwd

    def params(self):
        return self.fwd.params() + self.bwd.params()

    def forward(self, x):
        return np.concatenate([self.fwd.forward(x), self.bwd.forward(x)], axis=-1)

    def backward(self, dy):
        m = self.fwd.cell.m
        return self.fwd.backward(dy[..., :m]) + self.bwd.backward(dy[..., m:])


def run_recurrent(cells, sequence: np.ndarray, bidirectional: bool = False) -> np.ndarray:
    """Last hidden feature of one cell, or of a (forward, backward) cell pair.

    ``sequence`` is ``(B, T, n_in)`` or ``(T, n_in)``.  In bidirectional mode
    the result is ``[h_fwd(T-1), h_bwd(0)]`` with ``2m`` channels.
    """
    seq = np.asarray(sequence)
    squeeze = seq.ndim == 2
    if squeeze:
        seq = seq[None]
    if bidirectional:
        fwd_cell, bwd_cell = cells
        out = Bidirectional(Recurrent(fwd_cell), Recurrent(bwd_cell, reverse=True)).forward(seq)
    else:
        cell = cells[0] if isinstance(cells, (list, tuple)) else cells
        out = Recurrent(cell).forward(seq)
    return out[0] if squeeze else out
