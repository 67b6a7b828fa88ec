"""Blending the two extreme decoders traces the whole distortion/perception curve.

For each alpha in [0, 1] the interpolated decoder outputs
alpha * gd(z) + (1 - alpha) * gp-sample; its measured distortion and
perception follow the closed forms

    D(alpha) = (1 + (1 - alpha)^2) * D_d        P(alpha) = alpha^2 * P_d

whenever the codec is globally MSE-optimal. This script measures both sides
of each identity on a 33-point discretized gaussian and prints the largest
gap, plus the curve slope dP/dD = alpha / (alpha - 1) checked by central
differences.

Run: python3 demos/02_interpolation_sweep.py
"""
import numpy as np

from dplab import (
    builtin_source,
    dp_derivatives,
    exhaustive_optimal_encoder,
    perceptual_decoder_for,
    sweep,
)


def main() -> None:
    source = builtin_source("gauss33")
    k = 4
    enc, gd, d_d = exhaustive_optimal_encoder(source, k)
    gp = perceptual_decoder_for(source, enc)
    print(f"source: gauss33 (33 atoms), rate 2 (K={k}), D_d = {d_d:.6f}")
    print()

    alphas = np.linspace(0.0, 1.0, 11)
    points = sweep(source, enc, gd, gp, alphas)

    print(f"{'alpha':>6}{'D measured':>14}{'D predicted':>14}{'P measured':>14}{'P predicted':>14}")
    for pt in points:
        print(f"{pt.alpha:>6.2f}{pt.d_measured:>14.8f}{pt.d_predicted:>14.8f}"
              f"{pt.p_measured:>14.8f}{pt.p_predicted:>14.8f}")

    d_gap = max(abs(pt.d_measured - pt.d_predicted) for pt in points)
    p_gap = max(abs(pt.p_measured - pt.p_predicted) for pt in points)
    print()
    print(f"max |D gap| = {d_gap:.3e}   max |P gap| = {p_gap:.3e}")
    print(f"endpoints: D(0) = {points[0].d_measured:.8f} = 2 * D_d = {2 * d_d:.8f}")

    # slope check: central differences of the measured columns vs the formula
    print()
    print(f"{'alpha':>6}{'dP/dD (diff)':>16}{'alpha/(alpha-1)':>18}")
    for i in range(1, len(points) - 1):
        dd = points[i + 1].d_measured - points[i - 1].d_measured
        dp = points[i + 1].p_measured - points[i - 1].p_measured
        slope, _ = dp_derivatives(points[i].alpha, d_d)
        print(f"{points[i].alpha:>6.2f}{dp / dd:>16.8f}{slope:>18.8f}")


if __name__ == "__main__":
    main()
