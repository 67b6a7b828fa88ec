"""Two decoders for the same encoder: conditional mean vs conditional resampler.

The conditional-mean table gd minimizes MSE but averages distinct inputs into
points the source never produces, so its output law is visibly wrong. The
resampler gp redraws a source point from the same cell, which reproduces the
source law exactly at the price of doubled MSE. Both facts are measured here
with exact W2 linear programs, no sampling anywhere.

Run: python3 demos/01_two_decoders.py
"""
from dplab import (
    builtin_source,
    decoder_output_dist,
    distortion,
    exhaustive_optimal_encoder,
    perceptual_decoder_for,
    w2sq_exact,
)


def main() -> None:
    source = builtin_source("u4")
    k = 2
    print(f"source: uniform on {source.points.ravel().tolist()}, rate 1 (K={k})")

    enc, gd, d_d = exhaustive_optimal_encoder(source, k)
    gp = perceptual_decoder_for(source, enc)
    print(f"optimal partition: {enc.assignment.tolist()}")
    print(f"conditional means: {gd.table.ravel().tolist()}")

    out_d = decoder_output_dist(source, enc, gd)
    out_p = decoder_output_dist(source, enc, gp)
    p_d = w2sq_exact(source, out_d).cost
    d_p = distortion(source, enc, gp)
    p_p = w2sq_exact(source, out_p).cost

    print()
    print(f"{'decoder':<20}{'MSE':>12}{'W2^2 to source':>18}")
    print(f"{'conditional mean':<20}{d_d:>12.6f}{p_d:>18.6f}")
    print(f"{'resampler':<20}{d_p:>12.6f}{p_p:>18.6f}")

    print()
    print(f"resampler MSE / mean MSE = {d_p / d_d:.6f}   (doubling: perfect realism costs 2x)")
    print(f"mean decoder W2^2 equals its own MSE: |P_d - D_d| = {abs(p_d - d_d):.3e}")
    print(f"resampler output law matches the source exactly: W2^2 = {p_p:.3e}")

    # resampler outputs live on supp(X); the mean decoder invents new points
    print()
    print(f"mean-decoder output support:  {out_d.points.ravel().tolist()}")
    print(f"resampler output support:     {out_p.points.ravel().tolist()}")


if __name__ == "__main__":
    main()
