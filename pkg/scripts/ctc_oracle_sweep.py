"""Sweep the CTC forward recursion against brute-force path enumeration.

Reports the worst absolute log-space discrepancy per (T, V) cell, and the
time spent in each implementation.

    python scripts/ctc_oracle_sweep.py --max-t 6 --max-v 4 --seeds 5
"""

import argparse
import itertools
import time

import numpy as np

from ethio_eval.ctc import NEG_INF, ctc_brute_force, ctc_log_likelihood


def random_log_probs(rng, T, V):
    x = rng.normal(size=(T, V))
    return x - np.log(np.exp(x).sum(axis=1, keepdims=True))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-t", type=int, default=6)
    ap.add_argument("--max-v", type=int, default=4)
    ap.add_argument("--max-len", type=int, default=3)
    ap.add_argument("--seeds", type=int, default=5)
    args = ap.parse_args()

    print("T,V,instances,max_abs_err,forward_ms,brute_ms")
    worst = 0.0
    for T in range(1, args.max_t + 1):
        for V in range(2, args.max_v + 1):
            n, err, t_fwd, t_bf = 0, 0.0, 0.0, 0.0
            for seed in range(args.seeds):
                lp = random_log_probs(np.random.default_rng([seed, T, V]), T, V)
                for length in range(args.max_len + 1):
                    for target in itertools.product(range(1, V), repeat=length):
                        t0 = time.perf_counter()
                        a = ctc_log_likelihood(lp, list(target))
                        t1 = time.perf_counter()
                        b = ctc_brute_force(lp, list(target))
                        t2 = time.perf_counter()
                        t_fwd += t1 - t0
                        t_bf += t2 - t1
                        n += 1
                        if a == NEG_INF and b == NEG_INF:
                            continue
                        err = max(err, abs(a - b))
            worst = max(worst, err)
            print(f"{T},{V},{n},{err:.3e},{1000 * t_fwd:.1f},{1000 * t_bf:.1f}")
    print(f"# worst discrepancy {worst:.3e}")


if __name__ == "__main__":
    main()
