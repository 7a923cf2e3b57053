"""Compare the compiled and pure-Python integration kernels.

    python3 benchmarks/bench_kernels.py            # runs both backends
    python3 benchmarks/bench_kernels.py --inner    # one backend, chosen by LIENARD_NO_NUMBA

Each backend runs in its own interpreter because the flag is read at import.
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time


def inner(repeats: int) -> dict:
    import numpy as np

    from lienard._accel import backend
    from lienard.cycles import Displacement, find_cycles
    from lienard.integrate import IntegratorConfig, make_section
    from lienard.kernels import winding_numbers
    from lienard.polysys import build_rychkov

    sys_ = build_rychkov()
    a = {"mu1": -0.001, "mu3": 0.1, "mu5": -1.0}
    sec = make_section(sys_, a, (0.0, 10.0))
    disp = Displacement(sys_, a, sec, IntegratorConfig())

    t0 = time.perf_counter()
    disp.sample(0.3)  # includes JIT compilation (or cache load)
    warm = time.perf_counter() - t0

    t0 = time.perf_counter()
    vals = [disp.sample(0.3).displacement for _ in range(repeats)]
    per_return = (time.perf_counter() - t0) / repeats

    t0 = time.perf_counter()
    rep = find_cycles(sys_, a, sec, (16, "geometric"))
    scan = time.perf_counter() - t0

    th = np.linspace(0, 2 * np.pi, 2001)
    xs, ys = np.cos(th), np.sin(th)
    px, py = np.array([0.0, 2.0]), np.array([0.0, 0.0])
    winding_numbers(xs, ys, px, py)
    t0 = time.perf_counter()
    for _ in range(repeats):
        w, _ = winding_numbers(xs, ys, px, py)
    wind = (time.perf_counter() - t0) / repeats

    return {
        "backend": backend(),
        "first_call_s": warm,
        "first_return_s": per_return,
        "cycle_scan_16_s": scan,
        "winding_2000_s": wind,
        "displacement": vals[-1],
        "cycles": [c.s for c in rep.cycles],
        "windings": [int(v) for v in w],
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--inner", action="store_true")
    ap.add_argument("--repeats", type=int, default=20)
    args = ap.parse_args()
    if args.inner:
        print(json.dumps(inner(args.repeats)))
        return
    results = {}
    for flag in ("0", "1"):
        env = dict(os.environ, LIENARD_NO_NUMBA=flag)
        out = subprocess.run(
            [sys.executable, __file__, "--inner", "--repeats", str(args.repeats)],
            env=env, check=True, capture_output=True, text=True,
        )
        r = json.loads(out.stdout.strip().splitlines()[-1])
        results[r["backend"]] = r
    keys = ("first_call_s", "first_return_s", "cycle_scan_16_s", "winding_2000_s")
    print(f"{'':18s}" + "".join(f"{b:>14s}" for b in results) + f"{'speedup':>10s}")
    for k in keys:
        row = [results[b][k] for b in results]
        sp = row[-1] / row[0] if len(row) == 2 and row[0] > 0 else float("nan")
        print(f"{k:18s}" + "".join(f"{v:14.4g}" for v in row) + f"{sp:10.1f}")
    if len(results) == 2:
        n, p = results["numba"], results["python"]
        print(f"displacement agreement: {abs(n['displacement'] - p['displacement']):.3g}")
        print(f"cycles numba {n['cycles']}  python {p['cycles']}")


if __name__ == "__main__":
    main()
