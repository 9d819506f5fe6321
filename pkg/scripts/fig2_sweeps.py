"""Cooling limit versus detuning (Omega_r = gamma) and versus coupling Rabi frequency (Delta = 2.5 gamma)."""
import argparse
from pathlib import Path

import numpy as np

from eitcool import io
from eitcool.model import fig3_params, optimal_detuning
from eitcool.rate_model import rate_sweep

COLUMNS = ("sweep_var", "a_plus", "a_minus", "n_s", "w", "status")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("out"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    p = fig3_params()

    by_delta = rate_sweep(p, "delta", np.linspace(0.05, 5.0, 496))
    by_rabi = rate_sweep(p, "omega_r", np.linspace(0.02, 3.0, 299))
    io.write_csv(args.out / "fig2_vs_delta.csv", COLUMNS, by_delta)
    io.write_csv(args.out / "fig2_vs_omega_r.csv", COLUMNS, by_rabi)

    for name, rows in (("Delta", by_delta), ("Omega_r", by_rabi)):
        ok = [r for r in rows if r.status == "ok"]
        best = min(ok, key=lambda r: r.n_s)
        print(f"min over {name}: n_s = {best.n_s:.5f} at {best.sweep_var:.3f}")
    d_opt = optimal_detuning(p.omega_r, p.nu)
    print(f"light shift = nu at Delta = {d_opt:.3f}: (1/4Delta)^2 = {(1 / (4 * d_opt)) ** 2:.5f}")


if __name__ == "__main__":
    main()
