"""Sweep shot counts on a fixed 5-site tree and tabulate parameter errors.

The error should fall roughly like 1/sqrt(shots); the table prints the
median and the 90th percentile over independent sampling seeds per decade.
"""

import argparse

import numpy as np

from gateway_tomo import (
    HamiltonianParams,
    NetworkGraph,
    assemble_single_excitation,
    compute_access_plan,
    eigendecompose,
    gauge_fix,
    measure_shots,
    reconstruct,
)


def max_abs_error(true: HamiltonianParams, got: HamiltonianParams) -> float:
    err = max(abs(got.local_fields[n] - b) for n, b in true.local_fields.items())
    return max(err, max(abs(got.couplings[e] - c) for e, c in true.couplings.items()))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=40, help="seeds per shot count")
    ap.add_argument("--decades", type=int, default=4,
                    help="shot counts 10^3 .. 10^(2+decades)")
    args = ap.parse_args()

    g = NetworkGraph.from_edges([(1, 2), (2, 3), (3, 4), (3, 5)])
    params = HamiltonianParams(
        {1: 0.3, 2: -0.4, 3: 0.1, 4: 0.7, 5: -0.6},
        {(1, 2): 0.9, (2, 3): 1.2, (3, 4): 0.8, (3, 5): 1.1},
    )
    plan = compute_access_plan(g)
    eig = gauge_fix(eigendecompose(assemble_single_excitation(g, params)),
                    plan.reference)
    print(f"access sites {list(plan.access_set)}, {args.trials} trials per row\n")
    print(f"{'shots':>10}  {'median err':>12}  {'p90 err':>12}")
    for decade in range(args.decades):
        shots = 10 ** (3 + decade)
        errs = []
        for seed in range(args.trials):
            meas = measure_shots(eig, plan.access_set, shots, seed=seed)
            result = reconstruct(g, plan, meas)
            errs.append(max_abs_error(params, result.params))
        errs = np.asarray(errs)
        print(f"{shots:>10d}  {np.median(errs):>12.3e}  "
              f"{np.percentile(errs, 90):>12.3e}")


if __name__ == "__main__":
    main()
