"""Absorption profile around the dark resonance and the sideband markers."""
import argparse
from pathlib import Path

from eitcool import io
from eitcool.model import dressed_states, fig3_params
from eitcool.spectrum import SPECTRUM_COLUMNS, narrow_peak_maximum, sideband_weights, spectrum_scan


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("out"))
    ap.add_argument("--points", type=int, default=2001)
    ap.add_argument("--delta", type=float, default=2.5, help="common detuning of both lasers")
    args = ap.parse_args()

    p = fig3_params(delta_g=args.delta, delta_r=args.delta)
    args.out.mkdir(parents=True, exist_ok=True)
    pts = spectrum_scan(p, (-1.0, p.delta_r + 1.5), args.points)
    io.write_csv(args.out / "fig1_spectrum.csv", SPECTRUM_COLUMNS, [q.row() for q in pts])

    info = dressed_states(p)
    pos, peak = narrow_peak_maximum(p)
    carrier, red, blue = sideband_weights(p)
    io.write_csv(
        args.out / "fig1_markers.csv",
        ("label", "delta_g", "weight"),
        [("carrier", p.delta_g, carrier), ("red", p.delta_g + p.nu, red), ("blue", p.delta_g - p.nu, blue)],
    )
    print(f"light shift {info.delta_shift:.5f}, narrow width {info.narrow_width:.5f} (approx {info.approx_narrow_width:.5f})")
    print(f"narrow peak at {pos:.5f} (height {peak:.3e}); carrier/red/blue = {carrier:.2e}/{red:.4f}/{blue:.4f}")


if __name__ == "__main__":
    main()
