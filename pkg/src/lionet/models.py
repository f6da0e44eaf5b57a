"""The two odometry networks, their training loop and the model file format.

Both networks map a normalized ``(n, 6)`` IMU window to a raw
``(dl, dpsi)`` pair in metres / radians.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import struct
from contextlib import nullcontext
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from .dataio import LabeledDataset, NormStats, normalize
from .errors import ConfigMismatchError, DataError, ModelFormatError, NumericalError, StatsMismatchError
from .nn import (
    Adam,
    Bidirectional,
    CausalConv1d,
    Dense,
    GatedActivation,
    GlobalAvgPool,
    Recurrent,
    ReLU,
    make_cell,
    mse_loss,
)
from .types import PolarDelta, Window, wrap_angles

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
MAGIC = b"LIONETM\x00"
PRECISIONS = {"float64": np.float64, "float32": np.float32}


# --------------------------------------------------------------------------
# configs


@dataclass(frozen=True)
class LIONetConfig:
    filters: int = 32
    layers: int = 8
    dilations: tuple[int, ...] | None = None  # default 1, 2, 4, ... per layer
    kernel: int = 2
    window_n: int = 200
    in_channels: int = 6

    def __post_init__(self):
        if self.dilations is None:
            object.__setattr__(self, "dilations", tuple(2 ** i for i in range(self.layers)))
        object.__setattr__(self, "dilations", tuple(int(d) for d in self.dilations))
        if min(self.filters, self.layers, self.kernel, self.window_n) < 1:
            raise ValueError("LIONetConfig sizes must be positive")
        if len(self.dilations) != self.layers:
            raise ValueError(f"{self.layers} layers but {len(self.dilations)} dilations")

    @property
    def receptive_field(self) -> int:
        return 1 + (self.kernel - 1) * sum(self.dilations)


@dataclass(frozen=True)
class IONetConfig:
    cell: str = "lstm"
    layers: int = 1
    hidden: int = 128
    bidirectional: bool = False
    window_n: int = 200
    in_channels: int = 6

    def __post_init__(self):
        if self.cell not in ("lstm", "gru", "rnn"):
            raise ValueError(f"unknown cell {self.cell!r}")
        if self.layers < 1 or self.hidden < 1:
            raise ValueError("IONetConfig sizes must be positive")


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-5
    batch_size: int = 256
    epochs: int = 10
    seed: int = 0
    precision: str = "float64"
    deterministic: bool = True
    mirror: bool = False  # also train on left-right reflected windows
    lr_decay: float = 1.0  # learning rate multiplier applied after each epoch

    def __post_init__(self):
        if self.lr < 0 or self.batch_size < 1 or self.epochs < 1:
            raise ValueError("lr must be >= 0, batch_size and epochs >= 1")
        if not 0 < self.lr_decay <= 1:
            raise ValueError("lr_decay must be in (0, 1]")
        if self.precision not in PRECISIONS:
            raise ValueError(f"precision must be one of {sorted(PRECISIONS)}")


# --------------------------------------------------------------------------
# networks


class Model:
    arch = "model"

    def __init__(self, config):
        self.config = config
        self.norm_stats: NormStats | None = None
        self.dtype = np.float64

    def layers(self) -> list:
        raise NotImplementedError

    def params(self):
        out = []
        for layer in self.layers():
            out.extend(layer.params())
        return out

    def zero_grad(self) -> None:
        for p in self.params():
            p.grad[...] = 0.0

    def astype(self, dtype) -> Model:
        """Cast parameters in place (``float32`` is an inference mode)."""
        dtype = np.dtype(dtype).type
        for p in self.params():
            p.value = p.value.astype(dtype)
            p.grad = np.zeros_like(p.value)
        self.dtype = dtype
        return self

    @property
    def precision(self) -> str:
        return np.dtype(self.dtype).name

    def param_count(self) -> int:
        return sum(p.size for p in self.params())

    def state(self) -> dict[str, np.ndarray]:
        return {p.name: p.value.copy() for p in self.params()}

    def load_state(self, state: dict[str, np.ndarray]) -> None:
        for p in self.params():
            p.value[...] = state[p.name]

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.forward(x)


class LIONet(Model):
    """Dilated causal conv network.

    1x1 input conv (6 -> F), then per layer a causal dilated conv producing
    the filter and gate paths (F -> 2F) combined by the gated unit, and a 1x1
    conv (F -> F) whose output is both added to the block input (residual)
    and summed into the skip accumulator.  Skip sum -> ReLU -> mean over
    time -> dense F -> 2.
    """

    arch = "lionet"

    def __init__(self, config: LIONetConfig = LIONetConfig(), seed: int = 0, zero_head: bool = False):
        super().__init__(config)
        rng = np.random.default_rng(seed)
        F, k = config.filters, config.kernel
        self.input = CausalConv1d(config.in_channels, F, 1, 1, name="input", rng=rng)
        self.blocks = []
        for i, d in enumerate(config.dilations):
            self.blocks.append((
                CausalConv1d(F, 2 * F, k, d, name=f"block{i}.dilated", rng=rng),
                GatedActivation(),
                CausalConv1d(F, F, 1, 1, name=f"block{i}.out", rng=rng),
            ))
        self.relu = ReLU()
        self.pool = GlobalAvgPool()
        self.head = Dense(F, 2, name="head", rng=rng, zero=zero_head)

    def layers(self):
        out = [self.input]
        for blk in self.blocks:
            out.extend(blk)
        return out + [self.relu, self.pool, self.head]

    def features(self, x: np.ndarray) -> np.ndarray:
        """Per-timestep skip sum ``(B, T, F)`` before the ReLU / pooling head."""
        h = self.input.forward(x)
        skip = 0.0
        for dil, gate, out in self.blocks:
            o = out.forward(gate.forward(dil.forward(h)))
            skip = skip + o
            h = h + o
        return skip

    def forward(self, x):
        x = np.asarray(x, dtype=self.dtype)
        return self.head.forward(self.pool.forward(self.relu.forward(self.features(x))))

    def backward(self, dy):
        dskip = self.relu.backward(self.pool.backward(self.head.backward(dy)))
        dh = np.zeros_like(dskip)
        for dil, gate, out in reversed(self.blocks):
            dz = out.backward(dskip + dh)
            dh = dh + dil.backward(gate.backward(dz))
        return self.input.backward(dh)


class IONet(Model):
    """Recurrent stack over the window; last hidden feature(s) -> dense -> 2."""

    arch = "ionet"

    def __init__(self, config: IONetConfig = IONetConfig(), seed: int = 0, zero_head: bool = False):
        super().__init__(config)
        rng = np.random.default_rng(seed)
        m = config.hidden
        n_in = config.in_channels
        self.stack = []
        for i in range(config.layers):
            seqs = i < config.layers - 1
            fwd = Recurrent(make_cell(config.cell, n_in, m, f"rnn{i}", rng), return_sequences=seqs)
            if config.bidirectional:
                bwd = Recurrent(make_cell(config.cell, n_in, m, f"rnn{i}_rev", rng),
                                return_sequences=seqs, reverse=True)
                self.stack.append(Bidirectional(fwd, bwd))
                n_in = 2 * m
            else:
                self.stack.append(fwd)
                n_in = m
        self.head = Dense(n_in, 2, name="head", rng=rng, zero=zero_head)

    def layers(self):
        return self.stack + [self.head]

    def forward(self, x):
        h = np.asarray(x, dtype=self.dtype)
        for layer in self.stack:
            h = layer.forward(h)
        return self.head.forward(h)

    def backward(self, dy):
        d = self.head.backward(dy)
        for layer in reversed(self.stack):
            d = layer.backward(d)
        return d


def build_lionet(cfg: LIONetConfig = LIONetConfig(), seed: int = 0, zero_head: bool = False) -> LIONet:
    if cfg.receptive_field < cfg.window_n:
        raise ValueError(f"receptive field {cfg.receptive_field} < window length {cfg.window_n}")
    return LIONet(cfg, seed, zero_head)


def build_ionet(cfg: IONetConfig = IONetConfig(), seed: int = 0, zero_head: bool = False) -> IONet:
    return IONet(cfg, seed, zero_head)


def build_model(arch: str, config: dict | None = None, seed: int = 0) -> Model:
    config = dict(config or {})
    if arch == "lionet":
        return build_lionet(LIONetConfig(**config), seed)
    if arch == "ionet":
        return build_ionet(IONetConfig(**config), seed)
    raise ValueError(f"unknown architecture {arch!r}")


def lionet_param_formula(cfg: LIONetConfig) -> int:
    """Closed-form parameter count of :class:`LIONet`."""
    F, k, c = cfg.filters, cfg.kernel, cfg.in_channels
    per_block = (k * F * 2 * F + 2 * F) + (F * F + F)
    return (c * F + F) + cfg.layers * per_block + (F * 2 + 2)


def ionet_param_formula(cfg: IONetConfig) -> int:
    """Closed-form parameter count of :class:`IONet`."""
    gates = {"lstm": 4, "gru": 3, "rnn": 1}[cfg.cell]
    m, dirs = cfg.hidden, 2 if cfg.bidirectional else 1
    total, n_in = 0, cfg.in_channels
    for _ in range(cfg.layers):
        total += dirs * gates * ((n_in + m) * m + m)
        n_in = dirs * m
    return total + n_in * 2 + 2


# --------------------------------------------------------------------------
# inference


def _window_array(windows) -> tuple[np.ndarray, np.ndarray]:
    """Stack windows into ``(M, n, 6)``; also return which ones are pre-normalized."""
    if isinstance(windows, np.ndarray):
        X = windows[None] if windows.ndim == 2 else windows
        return X, np.zeros(len(X), dtype=bool)
    windows = list(windows)
    if not windows:
        return np.zeros((0, 0, 6)), np.zeros(0, dtype=bool)
    if isinstance(windows[0], Window):
        return np.stack([w.data for w in windows]), np.array([w.normalized for w in windows])
    return np.asarray(windows, dtype=np.float64), np.zeros(len(windows), dtype=bool)


def _resolve_stats(model: Model, stats: NormStats | None) -> NormStats | None:
    if model.norm_stats is not None and stats is not None and stats.checksum() != model.norm_stats.checksum():
        raise StatsMismatchError(
            f"normalization stats {stats.checksum()} differ from the model's {model.norm_stats.checksum()}")
    return stats if stats is not None else model.norm_stats


def forward_batched(model: Model, X: np.ndarray, batch_size: int = 256) -> np.ndarray:
    out = [model.forward(X[i:i + batch_size]) for i in range(0, len(X), batch_size)]
    return np.concatenate(out) if out else np.zeros((0, 2))


def predict_raw(model: Model, windows, stats: NormStats | None = None,
                batch_size: int = 256) -> tuple[np.ndarray, int]:
    """Network outputs ``(M, 2)`` with ``dl`` clamped at 0 and ``dpsi`` wrapped,
    plus the number of clamped outputs."""
    X, pre = _window_array(windows)
    if len(X) == 0:
        return np.zeros((0, 2)), 0
    if X.ndim != 3 or X.shape[2] != 6:
        raise DataError(f"windows must be (M, n, 6), got {X.shape}")
    if X.shape[1] != model.config.window_n:
        raise DataError(f"model expects {model.config.window_n}-frame windows, got {X.shape[1]}")
    stats = _resolve_stats(model, stats)
    if stats is not None:
        X = np.where(pre[:, None, None], X, normalize(X, stats))
    Y = forward_batched(model, X.astype(model.dtype), batch_size).astype(np.float64)
    if not np.all(np.isfinite(Y)):
        raise NumericalError("non-finite model output")
    neg = Y[:, 0] < 0
    clamped = int(neg.sum())
    if clamped:
        log.info("clamped %d negative dl prediction(s) to 0", clamped)
    Y[neg, 0] = 0.0
    Y[:, 1] = wrap_angles(Y[:, 1])
    return Y, clamped


def polar_mse(pred: np.ndarray, target: np.ndarray) -> float:
    """Mean squared error over both ``(dl, dpsi)`` components."""
    pred, target = np.asarray(pred, dtype=np.float64), np.asarray(target, dtype=np.float64)
    if pred.shape != target.shape:
        raise ValueError(f"shape mismatch {pred.shape} vs {target.shape}")
    return float(np.mean((pred - target) ** 2))


def predict(model: Model, windows, stats: NormStats | None = None, batch_size: int = 256) -> list[PolarDelta]:
    """Normalize (with ``stats`` or the model's own) and run the network."""
    Y, _ = predict_raw(model, windows, stats, batch_size)
    return [PolarDelta(dl, dpsi) for dl, dpsi in Y]


# --------------------------------------------------------------------------
# training


@dataclass
class History:
    train_mse: list[float] = field(default_factory=list)
    val_mse: list[float] = field(default_factory=list)
    best_epoch: int = -1

    def rows(self) -> list[tuple[int, float, float]]:
        vals = self.val_mse or [float("nan")] * len(self.train_mse)
        return [(i + 1, tr, va) for i, (tr, va) in enumerate(zip(self.train_mse, vals))]

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["epoch", "train_mse", "val_mse"])
            for epoch, tr, va in self.rows():
                w.writerow([epoch, repr(tr), repr(va)])


def evaluate_mse(model: Model, X: np.ndarray, Y: np.ndarray, batch_size: int = 256) -> float:
    """Polar-vector MSE on already normalized inputs."""
    if len(X) == 0:
        return float("nan")
    pred = forward_batched(model, X.astype(model.dtype), batch_size)
    return float(np.mean((pred - Y) ** 2))


# reflecting the world across the heading axis (y -> -y) flips ay and the
# x / z angular rates, and negates the heading change
MIRROR_X = np.array([1.0, -1.0, 1.0, -1.0, 1.0, -1.0])
MIRROR_Y = np.array([1.0, -1.0])


def train(model: Model, train_set: LabeledDataset, val_set: LabeledDataset | None = None,
          cfg: TrainConfig = TrainConfig(), on_epoch=None) -> tuple[Model, History]:
    """Shuffled mini-batch Adam on the MSE of ``(dl, dpsi)``.

    Inputs are standardized with the training set's stats, which are stored on
    the model.  With ``cfg.mirror`` every window is also used reflected.
    Parameters from the epoch with the lowest validation MSE are
    restored at the end (the last epoch when there is no validation set).
    """
    dtype = PRECISIONS[cfg.precision]
    if model.dtype != dtype:
        model.astype(dtype)
    stats = train_set.stats
    model.norm_stats = stats
    X, Y = train_set.X, train_set.Y
    if cfg.mirror:
        X, Y = np.concatenate([X, X * MIRROR_X]), np.concatenate([Y, Y * MIRROR_Y])
    X = normalize(X, stats).astype(dtype)
    Y = Y.astype(dtype)
    if val_set is not None:
        Xv = normalize(val_set.X, stats).astype(dtype)
        Yv = val_set.Y

    rng = np.random.default_rng(cfg.seed)
    opt = Adam(model.params(), lr=cfg.lr)
    hist = History()
    best, best_val = model.state(), np.inf
    # a single BLAS thread keeps floating-point reduction order fixed
    with threadpool_limits(limits=1) if cfg.deterministic else nullcontext():
        for epoch in range(cfg.epochs):
            opt.lr = cfg.lr * cfg.lr_decay ** epoch
            _run_epoch(model, opt, X, Y, rng, cfg, epoch, hist)
            if val_set is not None:
                val = evaluate_mse(model, Xv, Yv)
                hist.val_mse.append(val)
                if val < best_val:
                    best_val, best, hist.best_epoch = val, model.state(), epoch
            else:
                best, hist.best_epoch = model.state(), epoch
            log.info("epoch %d: train %.6g val %s", epoch + 1, hist.train_mse[-1],
                     f"{hist.val_mse[-1]:.6g}" if hist.val_mse else "-")
            if on_epoch is not None:
                on_epoch(epoch, hist)
    model.load_state(best)
    return model, hist


def _run_epoch(model, opt, X, Y, rng, cfg, epoch, hist) -> None:
    order = rng.permutation(len(X))
    sse, count = 0.0, 0
    for b, i in enumerate(range(0, len(X), cfg.batch_size)):
        idx = order[i:i + cfg.batch_size]
        pred = model.forward(X[idx])
        loss, dpred = mse_loss(pred, Y[idx])
        if not np.isfinite(loss):
            raise NumericalError(f"non-finite loss at epoch {epoch + 1}, batch {b} (lr={opt.lr})")
        model.zero_grad()
        model.backward(dpred)
        opt.step()
        sse += loss * len(idx)
        count += len(idx)
    hist.train_mse.append(sse / count)


# --------------------------------------------------------------------------
# serialization
#
# layout: MAGIC | u64 header length | header JSON | sha256(header) | payload
# payload: every parameter in ``params()`` order, little-endian, C order


def _config_dict(model: Model) -> dict:
    d = asdict(model.config)
    if "dilations" in d:
        d["dilations"] = list(d["dilations"])
    return d


def save(model: Model, path: str | Path) -> None:
    dt = np.dtype(model.dtype).newbyteorder("<")
    tensors, chunks, offset = [], [], 0
    for p in model.params():
        raw = np.ascontiguousarray(p.value, dtype=dt).tobytes()
        tensors.append({"name": p.name, "shape": list(p.value.shape), "offset": offset, "nbytes": len(raw)})
        chunks.append(raw)
        offset += len(raw)
    payload = b"".join(chunks)
    header = {
        "format_version": FORMAT_VERSION,
        "arch": model.arch,
        "config": _config_dict(model),
        "precision": model.precision,
        "norm_stats": None if model.norm_stats is None else {
            **model.norm_stats.to_dict(), "checksum": model.norm_stats.checksum()},
        "tensors": tensors,
        "payload_sha256": hashlib.sha256(payload).hexdigest(),
    }
    hb = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(hb)))
        fh.write(hb)
        fh.write(hashlib.sha256(hb).digest())
        fh.write(payload)


def read_header(path: str | Path) -> tuple[dict, bytes]:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such model file: {path}")
    blob = path.read_bytes()
    if blob[:8] != MAGIC:
        raise ModelFormatError(f"{path}: not a model file")
    if len(blob) < 16:
        raise ModelFormatError(f"{path}: truncated header")
    (n,) = struct.unpack("<Q", blob[8:16])
    if len(blob) < 16 + n + 32:
        raise ModelFormatError(f"{path}: truncated header")
    hb = blob[16:16 + n]
    if hashlib.sha256(hb).digest() != blob[16 + n:48 + n]:
        raise ModelFormatError(f"{path}: header checksum mismatch")
    header = json.loads(hb)
    if header.get("format_version") != FORMAT_VERSION:
        raise ModelFormatError(f"{path}: format version {header.get('format_version')} "
                               f"is not supported (expected {FORMAT_VERSION})")
    return header, blob[48 + n:]


def load(path: str | Path, expect_arch: str | None = None, expect_config=None) -> Model:
    """Read a model container; optionally insist on an architecture/config."""
    header, payload = read_header(path)
    total = sum(t["nbytes"] for t in header["tensors"])
    if len(payload) < total:
        raise ModelFormatError(f"{path}: truncated payload ({len(payload)} of {total} bytes)")
    if hashlib.sha256(payload).hexdigest() != header["payload_sha256"]:
        raise ModelFormatError(f"{path}: payload checksum mismatch")
    arch, config = header["arch"], header["config"]
    if expect_arch is not None and arch != expect_arch:
        raise ConfigMismatchError(f"{path}: holds a {arch} model, expected {expect_arch}")
    if expect_config is not None:
        want = asdict(expect_config)
        if "dilations" in want:
            want["dilations"] = list(want["dilations"])
        diff = {k: (config.get(k), v) for k, v in want.items() if config.get(k) != v}
        if diff:
            raise ConfigMismatchError(f"{path}: config mismatch (file, expected): {diff}")
    model = build_model(arch, config)
    dtype = PRECISIONS[header["precision"]]
    model.astype(dtype)
    le = np.dtype(dtype).newbyteorder("<")
    by_name = {t["name"]: t for t in header["tensors"]}
    for p in model.params():
        t = by_name.get(p.name)
        if t is None or tuple(t["shape"]) != p.value.shape:
            raise ModelFormatError(f"{path}: tensor {p.name} missing or misshapen")
        raw = payload[t["offset"]:t["offset"] + t["nbytes"]]
        p.value[...] = np.frombuffer(raw, dtype=le).reshape(p.value.shape)
    if header["norm_stats"] is not None:
        model.norm_stats = NormStats.from_dict(header["norm_stats"])
    return model


def model_id(model: Model) -> str:
    c = model.config
    if isinstance(c, LIONetConfig):
        return f"L-IONet({c.filters})"
    kind = {"lstm": "LSTM", "gru": "GRU", "rnn": "RNN"}[c.cell]
    bi = "Bi-" if c.bidirectional else ""
    return f"IONet {c.layers}-layer {bi}{kind}({c.hidden})"
