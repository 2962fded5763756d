"""LSTM cell hot kernels: compiled extension when built, numpy otherwise.

The fused compiled kernels avoid the temporaries of the numpy path; the
backward (pure elementwise products) gains the most, the forward relies on
libmvec's vectorized exp to match numpy's SIMD transcendentals. The backend
is picked once at import; ``COGSIM_PURE_PYTHON=1`` forces the numpy path
everywhere (used by the benchmark and the equivalence tests).
"""

from __future__ import annotations

import os

import numpy as np

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built; numpy fallback below
    _compiled = None


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-z))


def _forward_python(z, c_prev):
    hsz = z.shape[1] // 4
    i = _sigmoid(z[:, :hsz])
    f = _sigmoid(z[:, hsz : 2 * hsz])
    o = _sigmoid(z[:, 2 * hsz : 3 * hsz])
    g = np.tanh(z[:, 3 * hsz :])
    c = f * c_prev + i * g
    tc = np.tanh(c)
    return i, f, o, g, c, tc, o * tc


def _backward_python(dh, dc_in, i, f, o, g, tc, c_prev):
    dc = dc_in + dh * o * (1.0 - tc**2)
    dz = np.concatenate(
        [
            dc * g * i * (1.0 - i),
            dc * c_prev * f * (1.0 - f),
            dh * tc * o * (1.0 - o),
            dc * i * (1.0 - g**2),
        ],
        axis=1,
    )
    return dz, dc * f


def _contiguous(*arrays):
    return tuple(np.ascontiguousarray(a) for a in arrays)


def _forward_compiled(z, c_prev):
    return _compiled.lstm_cell_forward(*_contiguous(z, c_prev))


def _backward_compiled(dh, dc_in, i, f, o, g, tc, c_prev):
    return _compiled.lstm_cell_backward(*_contiguous(dh, dc_in, i, f, o, g, tc, c_prev))


# Every implementation pair, for benchmarking and equivalence testing.
IMPLEMENTATIONS: dict[str, tuple] = {"python": (_forward_python, _backward_python)}
if _compiled is not None:
    IMPLEMENTATIONS["compiled"] = (_forward_compiled, _backward_compiled)


def available_backends() -> list[str]:
    return list(IMPLEMENTATIONS)


def set_backend(name: str) -> None:
    """Switch the active kernel configuration (mainly for benchmarks/tests)."""
    global BACKEND, lstm_cell_forward, lstm_cell_backward
    if name not in IMPLEMENTATIONS:
        raise ValueError(f"backend {name!r} not available; have {available_backends()}")
    BACKEND = name
    lstm_cell_forward, lstm_cell_backward = IMPLEMENTATIONS[name]


BACKEND = "python"
lstm_cell_forward = _forward_python
lstm_cell_backward = _backward_python
if _compiled is not None and os.environ.get("COGSIM_PURE_PYTHON") != "1":
    set_backend("compiled")
