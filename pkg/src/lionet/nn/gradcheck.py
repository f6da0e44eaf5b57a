"""Central finite-difference gradient oracle."""

from __future__ import annotations

import numpy as np


def _rel_err(analytic: np.ndarray, numeric: np.ndarray) -> float:
    # elementwise error normalised by the tensor's largest gradient magnitude
    scale = max(np.max(np.abs(analytic), initial=0.0), np.max(np.abs(numeric), initial=0.0))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(analytic - numeric)) / scale)


def grad_check(obj, x: np.ndarray, eps: float = 1e-5, seed: int = 0,
               check_input: bool = True, report: dict | None = None) -> float:
    """Max relative error between analytic and central-difference gradients.

    ``obj`` is anything with ``forward(x)``, ``backward(dy)`` and
    ``params()``.  The scalar probed is ``sum(forward(x) * R)`` for a fixed
    random ``R``, so the analytic gradient is ``backward(R)``.  The error for
    a tensor is ``max|a - n| / max(max|a|, max|n|)`` (0 when both vanish);
    per-tensor errors are written to ``report`` when given.
    """
    x = np.array(x, dtype=np.float64)
    y = obj.forward(x)
    R = np.random.default_rng(seed).standard_normal(y.shape)

    def f(inp):
        return float(np.sum(obj.forward(inp) * R))

    for p in obj.params():
        p.grad[...] = 0.0
    obj.forward(x)
    dx = obj.backward(R)
    analytic = {p.name: p.grad.copy() for p in obj.params()}

    errors = {}
    for p in obj.params():
        num = np.zeros_like(p.value)
        flat, nflat = p.value.reshape(-1), num.reshape(-1)
        for i in range(flat.size):
            old = flat[i]
            flat[i] = old + eps
            fp = f(x)
            flat[i] = old - eps
            fm = f(x)
            flat[i] = old
            nflat[i] = (fp - fm) / (2.0 * eps)
        errors[p.name] = _rel_err(analytic[p.name], num)

    if check_input:
        num = np.zeros_like(x)
        xf, nflat = x.reshape(-1), num.reshape(-1)
        for i in range(xf.size):
            old = xf[i]
            xf[i] = old + eps
            fp = f(x)
            xf[i] = old - eps
            fm = f(x)
            xf[i] = old
            nflat[i] = (fp - fm) / (2.0 * eps)
        errors["<input>"] = _rel_err(np.asarray(dx), num)

    if report is not None:
        report.update(errors)
    return max(errors.values(), default=0.0)
