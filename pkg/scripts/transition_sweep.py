"""CHSH and error-corrected CHSH as the jump probability 0 -> 8 grows.

The jump happens after each measurement with probability p, so the CHSH
value is 2 + 2p. The error-corrected value is shown for a two-way swap
(8 jumps back to 0 with the same probability) and a one-way jump.
"""
import argparse

import numpy as np

from ctxlab.hvmodel import Model, TransitionKernel
from ctxlab.inequalities import catalog, corrected_chsh_value, model_expectation
from ctxlab.montecarlo import RunConfig, estimate_inequality


def jump_model(p: float, back: bool) -> Model:
    rows = np.eye(16)
    rows[0, 0], rows[0, 8] = 1 - p, p
    if back:
        rows[8, 8], rows[8, 0] = 1 - p, p
    return Model.point_mass("ABCD", 0, TransitionKernel.dense(rows))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--shots", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    chsh = catalog("chsh")
    print(f"{'p':>5}{'exact':>10}{'estimate':>12}{'+/-':>9}{'corrected (swap)':>19}{'corrected (one-way)':>22}")
    for p in np.linspace(0, 1, 11):
        m = jump_model(p, back=True)
        est = estimate_inequality(chsh, m, RunConfig(args.shots, args.seed))
        print(f"{p:>5.1f}{model_expectation(chsh, m):>10.4f}{est.mean:>12.4f}{est.std_error:>9.4f}"
              f"{corrected_chsh_value(m):>19.4f}{corrected_chsh_value(jump_model(p, back=False)):>22.4f}")


if __name__ == "__main__":
    main()
