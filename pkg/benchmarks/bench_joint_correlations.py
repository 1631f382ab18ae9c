"""Time the three routes to rho_k on the trine model.

    python3 benchmarks/bench_joint_correlations.py --kmax 10
"""
import argparse
import time

import numpy as np

from qdcomp.ensembles import ensemble_state_bruteforce, ensemble_state_markov
from qdcomp.modelio import trine_model
from qdcomp.numkit import hermitian_eigvals
from qdcomp.qmc import MarkovDynSystem, iter_joint_correlations


def timed(fn, *args):
    t0 = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - t0


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--kmax", type=int, default=10)
    parser.add_argument("--brute-max", type=int, default=8, help="largest k for full enumeration")
    args = parser.parse_args()

    model = trine_model()
    system = MarkovDynSystem.from_model(model)
    print(f"{'k':>3} {'qmc_s':>9} {'recursion_s':>12} {'brute_s':>9} {'eig_s':>8} {'max_diff':>10}")
    t_qmc = time.perf_counter()
    for k, rho in enumerate(iter_joint_correlations(system, args.kmax), 1):
        dt_qmc = time.perf_counter() - t_qmc
        rec, dt_rec = timed(ensemble_state_markov, model, k)
        diff = np.abs(rho - rec).max()
        dt_bf = float("nan")
        if k <= args.brute_max:
            bf, dt_bf = timed(ensemble_state_bruteforce, model, k)
            diff = max(diff, np.abs(rho - bf).max())
        _, dt_eig = timed(hermitian_eigvals, rho)
        print(f"{k:>3} {dt_qmc:>9.3f} {dt_rec:>12.3f} {dt_bf:>9.3f} {dt_eig:>8.3f} {diff:>10.2e}")
        t_qmc = time.perf_counter()


if __name__ == "__main__":
    main()
