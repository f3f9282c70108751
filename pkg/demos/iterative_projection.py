"""Refine pre-averaged directions by iterative projection.

Projecting the data onto one mode's current direction collapses the other
modes, which turns a weak tensor factor into a strong vector factor.  Sweeping
this across modes until the directions stop moving sharpens the pre-averaging
start.  The payoff is largest when factors are not uniformly strong, so this
script uses the mixed-strength setting: it prints the convergence trace and
compares the loading-space error of pre-averaging alone against the projected
estimate, both scored against the simulation truth.
"""

import numpy as np

from tenfact import (
    DgpConfig,
    PreaverageConfig,
    estimate_loading_space,
    preaverage_direction,
    projection_error,
    refine_directions,
    simulate_setting,
)


def main():
    cfg = DgpConfig(dims=(12, 10), t_steps=200, seed=2)
    truth = simulate_setting(cfg, setting="IIa")
    x = truth.series
    rng = np.random.default_rng(0)

    # Two directions per mode: the first seeds the refinement, both together
    # are the pure pre-averaging estimate of the rank-2 loading space.
    pre = [
        preaverage_direction(x, mode, PreaverageConfig(n_directions=2), rng=rng)[0]
        for mode in range(2)
    ]
    state = refine_directions(x, [e.columns[:, 0] for e in pre])

    print(f"converged after {state.iterations} sweeps")
    trace = ", ".join(f"{step:.2e}" for step in state.history)
    print(f"largest direction change per sweep: {trace}")

    for mode in range(2):
        refined = estimate_loading_space(x, mode, state, rank=2)
        err_pre = projection_error(pre[mode], truth.bases[mode])
        err_proj = projection_error(refined, truth.bases[mode])
        print(f"mode {mode}: loading-space error {err_pre:.4f} by "
              f"pre-averaging alone, {err_proj:.4f} after projection")


if __name__ == "__main__":
    main()
