"""Cooling transient from a thermal state: rate equation, master equation and quantum jumps."""
import argparse
import time
from pathlib import Path

import numpy as np

from eitcool import io
from eitcool.model import fig3_params
from eitcool.quantum_sim import DensityOperator, ThermalFock, evolve_master, fit_cooling, run_trajectories
from eitcool.rate_model import PopulationDistribution, cooling_rate, evolve_populations, steady_state_mean_n


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("out"))
    ap.add_argument("--n-max", type=int, default=35)
    ap.add_argument("--n0", type=float, default=2.0)
    ap.add_argument("--t-end", type=float, default=1.5e5)
    ap.add_argument("--n-times", type=int, default=251)
    ap.add_argument("--n-traj", type=int, default=500)
    ap.add_argument("--seed", type=int, default=12345)
    ap.add_argument("--skip-master", action="store_true")
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    p = fig3_params()
    t = np.linspace(0.0, args.t_end, args.n_times)

    rate = evolve_populations(p, PopulationDistribution.thermal(args.n0, 60), t)
    n_rate = np.array([d.mean for d in rate])
    columns, cols = ["t", "n_rate"], [t, n_rate]

    if not args.skip_master:
        t0 = time.perf_counter()
        me = evolve_master(p, DensityOperator.thermal(args.n0, args.n_max), t, args.n_max, store_states=False)
        print(f"master equation: {time.perf_counter() - t0:.1f} s ({me.method})")
        columns.append("n_master")
        cols.append(me.n_mean)

    t0 = time.perf_counter()
    mc = run_trajectories(p, ThermalFock(args.n0), t, args.n_traj, args.seed, args.n_max)
    print(f"trajectories: {time.perf_counter() - t0:.1f} s, {mc.n_jumps.mean():.1f} jumps/trajectory")
    columns += ["n_mc", "n_mc_stderr"]
    cols += [mc.n_mean, mc.n_mean_stderr]

    io.write_csv(args.out / "fig3_cooling.csv", columns, np.column_stack(cols).tolist())
    io.write_csv(args.out / "fig3_pn.csv", ("n", "p_rate", "p_mc"),
                 [(n, rate[-1].p[n], mc.final_pn.p[n]) for n in range(args.n_max + 1)])

    print(f"rate model: W = {cooling_rate(p):.4e}, n_s = {steady_state_mean_n(p):.5f}")
    for name, y in zip(columns[1:], cols[1:]):
        if name.endswith("stderr"):
            continue
        fit = fit_cooling(t, y)
        print(f"{name:9s} fit: W = {fit.w_fit:.4e}, n_s = {fit.n_s_fit:.5f}, final <n> = {y[-1]:.5f}")
    print(f"P(0): rate {rate[-1].p[0]:.4f}, mc {mc.final_pn.p[0]:.4f}")


if __name__ == "__main__":
    main()
