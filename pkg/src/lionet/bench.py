"""Single-window inference latency and model comparison tables."""

from __future__ import annotations

import csv
import json
import logging
import platform
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from threadpoolctl import threadpool_limits

from .dataio import LabeledDataset
from .errors import StatsMismatchError
from .models import Model, model_id, polar_mse, predict_raw

log = logging.getLogger(__name__)


def host_descriptor() -> str:
    cpu = platform.processor() or platform.machine()
    return f"{cpu} / {platform.system()} / python {platform.python_version()} / numpy {np.__version__}"


@dataclass(frozen=True)
class LatencyReport:
    model: str
    params: int
    precision: str
    threads: int
    warmup: int
    iters: int
    samples_ms: tuple[float, ...]
    median_ms: float
    p10_ms: float
    p90_ms: float
    mean_ms: float
    host: str = ""

    def __post_init__(self):
        if self.iters < 1 or len(self.samples_ms) != self.iters:
            raise ValueError("need iters >= 1 timing samples")
        if not self.p10_ms <= self.median_ms <= self.p90_ms:
            raise ValueError("quantiles out of order")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["samples_ms"] = list(self.samples_ms)
        return d

    def write_json(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


def time_inference(model: Model, window: np.ndarray | None = None, warmup: int = 50, iters: int = 500,
                   threads: int = 1, seed: int = 0) -> LatencyReport:
    """Time batch-1 forward passes with the BLAS pool pinned to ``threads``."""
    if iters < 1 or warmup < 0:
        raise ValueError("iters must be >= 1 and warmup >= 0")
    if window is None:
        window = np.random.default_rng(seed).standard_normal((model.config.window_n, 6))
    x = np.asarray(window, dtype=model.dtype).reshape(1, -1, 6)
    samples = np.empty(iters)
    with threadpool_limits(limits=threads):
        for _ in range(warmup):
            model.forward(x)
        for i in range(iters):
            t0 = time.perf_counter()
            model.forward(x)
            samples[i] = time.perf_counter() - t0
    ms = samples * 1e3
    return LatencyReport(model_id(model), model.param_count(), model.precision, threads, warmup, iters,
                         tuple(float(v) for v in ms), float(np.median(ms)), float(np.percentile(ms, 10)),
                         float(np.percentile(ms, 90)), float(ms.mean()), host_descriptor())


@dataclass(frozen=True)
class CompareRow:
    model: str
    params: int
    median_ms: float
    val_mse: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def compare(models: Sequence[Model], eval_set: LabeledDataset | None = None, warmup: int = 50,
            iters: int = 500, threads: int = 1, skipped: list | None = None) -> list[CompareRow]:
    """Parameter count, median latency and (with ``eval_set``) held-out MSE per
    model, sorted by MSE (unsorted without an eval set).

    Models whose normalization stats disagree with the eval set's are skipped;
    their ids and the reason are appended to ``skipped``.
    """
    rows = []
    for m in models:
        val = None
        if eval_set is not None:
            try:
                Y, _ = predict_raw(m, eval_set.X, eval_set.stats)
            except StatsMismatchError as exc:
                log.warning("skipping %s: %s", model_id(m), exc)
                if skipped is not None:
                    skipped.append((model_id(m), str(exc)))
                continue
            val = polar_mse(Y, eval_set.Y)
        rep = time_inference(m, warmup=warmup, iters=iters, threads=threads)
        rows.append(CompareRow(rep.model, rep.params, rep.median_ms, val))
    if eval_set is not None:
        rows.sort(key=lambda r: r.val_mse)
    return rows


def render_table(rows: Sequence[CompareRow]) -> str:
    lines = [f"{'model':<28} {'params':>9} {'median ms':>10} {'val mse':>10}"]
    for r in rows:
        val = "-" if r.val_mse is None else f"{r.val_mse:.5g}"
        lines.append(f"{r.model:<28} {r.params:>9d} {r.median_ms:>10.3f} {val:>10}")
    return "\n".join(lines)


def write_rows(rows: Sequence, path: str | Path) -> None:
    """Rows of dataclasses to CSV, or JSON (with machine info) by suffix."""
    dicts = [r.to_dict() for r in rows]
    if str(path).endswith(".json"):
        Path(path).write_text(json.dumps({"host": host_descriptor(), "rows": dicts}, indent=2) + "\n")
        return
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(dicts[0]) if dicts else [])
        w.writeheader()
        w.writerows(dicts)
