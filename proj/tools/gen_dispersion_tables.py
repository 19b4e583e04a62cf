#!/usr/bin/env python3
"""Write illustrative D(lambda) tables for the two single-mode fibres.

Step-index model: fused-silica Sellmeier material dispersion plus the
Marcuse approximation for waveguide dispersion. Core radius and NA are the
nominal values of the fibre types; the curves are smooth and plausible, not
datasheet-exact.
"""
import argparse
import math

C = 299792458.0
SELLMEIER_B = (0.6961663, 0.4079426, 0.8974794)
SELLMEIER_C = (0.0684043**2, 0.1162414**2, 9.896161**2)

FIBRES = {
    "fiber_780hp.csv": dict(core_radius_um=2.2, na=0.13, band=(760.0, 990.0)),
    "fiber_s630hp.csv": dict(core_radius_um=1.75, na=0.12, band=(610.0, 880.0)),
}


def index(lam_um):
    l2 = lam_um * lam_um
    return math.sqrt(1.0 + sum(b * l2 / (l2 - c) for b, c in zip(SELLMEIER_B, SELLMEIER_C)))


def material_d(lam_nm):
    lam = lam_nm / 1000.0
    h = 1e-3
    d2 = (index(lam + h) - 2.0 * index(lam) + index(lam - h)) / (h * h)  # 1/um^2
    return -lam / C * d2 * 1e12  # ps/(nm km)


def waveguide_d(lam_nm, core_radius_um, na):
    lam = lam_nm / 1000.0
    v = 2.0 * math.pi * core_radius_um * na / lam
    nc = index(lam)
    rel = na * na / (2.0 * nc * nc)
    f = 0.080 + 0.549 * (2.834 - v) ** 2
    return -(nc * rel / (C * lam * 1e-6)) * f / 1e-6  # s/m^2 -> ps/(nm km)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="data")
    ap.add_argument("--step-nm", type=float, default=2.0)
    args = ap.parse_args()
    for name, fib in FIBRES.items():
        lo, hi = fib["band"]
        n = int(round((hi - lo) / args.step_nm))
        with open(f"{args.out_dir}/{name}", "w") as fh:
            fh.write(f"# step-index model, core radius {fib['core_radius_um']} um, NA {fib['na']}\n")
            fh.write("lambda_nm,D_ps_per_nm_km\n")
            for i in range(n + 1):
                lam = lo + i * args.step_nm
                d = material_d(lam) + waveguide_d(lam, fib["core_radius_um"], fib["na"])
                fh.write(f"{lam:.1f},{d:.6f}\n")


if __name__ == "__main__":
    main()
