"""Compare the compiled nearest-site kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--trials 200]

Part one times the three nearest-site implementations on snapshots of the
size a trial produces.  Part two times whole Monte Carlo trials in two child
processes, one per ``HETNET_NUMBA`` setting, and checks that both produce
the same estimates.
"""
import argparse
import json
import math
import os
import subprocess
import sys
import time

import numpy as np

from hetnet._accel import USE_NUMBA
from hetnet.simulator.kernels import nearest_sites_grid, nearest_sites_loop, nearest_sites_numpy

CHILD = r"""
import json, math, sys, time
from hetnet._accel import backend
from hetnet.configfile import load_config
from hetnet.simulator import run_campaign
cfg = load_config(sys.argv[1]); n = int(sys.argv[2])
run_campaign(cfg, 2, 0)  # compile / warm up
t0 = time.perf_counter(); rep = run_campaign(cfg, n, 1); dt = time.perf_counter() - t0
print(json.dumps({"backend": backend(), "sec_per_trial": dt / n,
                  "assoc": [rep.assoc(k).value for k in range(cfg.num_tiers)],
                  "sinr": [x for x in rep.sinr.tolist() if not math.isnan(x)]}))
"""


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_kernels(repeat):
    rng = np.random.default_rng(0)
    print(f"{'users':>7} {'sites':>6} {'grid ms':>9} {'loop ms':>9} {'numpy ms':>9}  identical")
    for n_users, n_sites in ((2000, 100), (2000, 1000), (20000, 1000), (20000, 4000)):
        r = 5000.0
        ux, uy = rng.uniform(-r, r, (2, n_users))
        sx, sy = rng.uniform(-r, r, (2, n_sites))
        ref = nearest_sites_numpy(ux, uy, sx, sy)
        row = [n_users, n_sites]
        same = True
        for fn in (nearest_sites_grid, nearest_sites_loop):
            if USE_NUMBA:
                fn(ux[:2], uy[:2], sx, sy)
                row.append(f"{1e3 * best_of(lambda: fn(ux, uy, sx, sy), repeat):9.2f}")
                out = fn(ux, uy, sx, sy)
                same &= np.array_equal(out[0], ref[0]) and np.array_equal(out[1], ref[1])
            else:
                row.append(f"{'n/a':>9}")
        row.append(f"{1e3 * best_of(lambda: nearest_sites_numpy(ux, uy, sx, sy), repeat):9.2f}")
        print(f"{row[0]:>7} {row[1]:>6} {row[2]} {row[3]} {row[4]}  {same}")


def bench_trials(config_path, trials):
    out = {}
    for flag in ("1", "0"):
        env = dict(os.environ, HETNET_NUMBA=flag)
        res = subprocess.run(
            [sys.executable, "-c", CHILD, config_path, str(trials)],
            env=env, capture_output=True, text=True, check=True,
        )
        out[flag] = json.loads(res.stdout)
    a, b = out["1"], out["0"]
    print(f"\nwhole trials ({trials}, {os.path.basename(config_path)}):")
    for r in (a, b):
        print(f"  {r['backend']:>6}: {1e3 * r['sec_per_trial']:.3f} ms/trial")
    print(f"  speed-up {b['sec_per_trial'] / a['sec_per_trial']:.2f}x, "
          f"identical estimates: {a['assoc'] == b['assoc'] and a['sinr'] == b['sinr']}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument(
        "--config",
        default=os.path.join(os.path.dirname(__file__), os.pardir, "configs", "three_tier.cfg"),
    )
    args = ap.parse_args()
    bench_kernels(args.repeat)
    bench_trials(os.path.abspath(args.config), args.trials)
    return 0


if __name__ == "__main__":
    sys.exit(main())
