"""Compare the compiled LSTM cell kernels against the numpy fallback.

Times the raw cell forward/backward and one full training-batch gradient
computation at study scale (batch 128, hidden 256). Run from the repo root:

    python3 benchmarks/bench_kernels.py
"""

from __future__ import annotations

import time

import numpy as np

from cogsim import kernels, reasoner, taskgen


def time_call(fn, repeats: int = 500) -> float:
    fn()  # warmup
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - t0) / repeats * 1000.0


def main() -> None:
    rng = np.random.default_rng(0)
    bsz, hsz = 128, 256
    z = rng.standard_normal((bsz, 4 * hsz))
    c_prev = rng.standard_normal((bsz, hsz))
    dh = rng.standard_normal((bsz, hsz))
    dc = rng.standard_normal((bsz, hsz))

    questions = taskgen.enumerate_all()[:1024]
    x = np.stack([taskgen.encode(q) for q in questions])
    y = np.array([taskgen.answer(q) for q in questions])
    model = reasoner.ReasonerModel.init(hsz, seed=0)

    results: dict[str, dict[str, float]] = {}
    for backend, (fwd, bwd) in kernels.IMPLEMENTATIONS.items():
        kernels.set_backend(backend)
        i, f, o, g, _, tc, _ = fwd(z, c_prev)
        results[backend] = {
            "cell_forward_ms": time_call(lambda: fwd(z, c_prev)),
            "cell_backward_ms": time_call(lambda: bwd(dh, dc, i, f, o, g, tc, c_prev)),
            "train_batch_ms": time_call(
                lambda: reasoner.loss_and_grads(model, x[:128], y[:128]), repeats=20
            ),
        }
    kernels.set_backend("compiled" if "compiled" in kernels.IMPLEMENTATIONS else "python")

    names = list(results)
    print(f"{'kernel':<18}" + "".join(f"{n:>14}" for n in names) + f"{'speedup':>10}")
    for key in ("cell_forward_ms", "cell_backward_ms", "train_batch_ms"):
        row = f"{key:<18}" + "".join(f"{results[n][key]:>14.3f}" for n in names)
        if len(names) == 2:
            row += f"{results['python'][key] / results['compiled'][key]:>9.2f}x"
        print(row)
    if len(names) == 1:
        print("compiled extension not built; only the numpy fallback was timed")


if __name__ == "__main__":
    main()
