"""Ring-pattern study: synthetic template versus the derived kernel.

Writes two CSVs next to this script (or to --outdir) and prints the
width/ratio tables with the accumulation extrapolations.
"""

import argparse
import pathlib

from liesegang import rings
from liesegang.cli import emit_csv
from liesegang.kernel import build_kernel_table, synthetic_kernel
from liesegang.profile import ModelParams, solve_kappa


def describe(tag, pattern):
    print(f"== {tag}: {pattern.classification.value}, x* = {pattern.x_star:.10g}")
    print("   n      x_n             d_n          q_n")
    for n in range(1, len(pattern.zeros)):
        q = f"{pattern.ratios[n - 2]:.4f}" if n >= 2 else "     -"
        print(f"  {n:2d}  {pattern.zeros[n]:.10f}  {pattern.widths[n - 1]:.4e}  {q}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--outdir", default=str(pathlib.Path(__file__).parent))
    ap.add_argument("--ustar", type=float, default=0.2)
    args = ap.parse_args()
    outdir = pathlib.Path(args.outdir)

    synth = synthetic_kernel(0.5, 1.0)
    pat_s = rings.solve_pattern(synth, max_zeros=40, min_width=1e-9)
    describe("synthetic sigma=1/2", pat_s)
    print(f"   q* bound: {pat_s.q_star_bound:.6f}")

    profile = solve_kappa(ModelParams(1.0, 1.0, args.ustar))
    _, kern = build_kernel_table(profile, 2048, 1e-9)
    pat_m = rings.solve_pattern(kern, max_zeros=12, min_width=1e-6, horizon=100.0)
    describe(f"derived kernel u*={args.ustar}", pat_m)

    for tag, pat in (("synthetic", pat_s), ("model", pat_m)):
        rows = [
            (n, pat.zeros[n], pat.widths[n - 1],
             pat.ratios[n - 2] if n >= 2 else "")
            for n in range(1, len(pat.zeros))
        ]
        emit_csv(
            str(outdir / f"pattern_{tag}.csv"),
            {"classification": pat.classification.value, "x_star": pat.x_star,
             "q_star_bound": pat.q_star_bound},
            ["n", "x_n", "d_n", "q_n"], rows,
        )


if __name__ == "__main__":
    main()
