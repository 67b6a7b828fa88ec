"""A penalty weight crossing 1 flips the optimal decoder's structure discontinuously.

The augmented objective W1(joint laws) + lambda * E||Xhat - Xd|| is minimized
exactly by one LP per lambda. Below lambda = 1 the optimizer reproduces the
(X, Xd) joint law perfectly and pays MSE = 2 * D_d; above 1 it collapses onto
the conditional means and pays MSE = D_d. The MSE column therefore steps down
by exactly D_d as lambda crosses 1, with nothing gradual in between. The
balance parameter beta maps onto lambda via (1 - beta) / beta, so the step
sits at beta = 0.5 on that axis.

Run: python3 demos/04_phase_transition.py
"""
from dplab import (
    beta_to_lambda,
    builtin_source,
    exhaustive_optimal_encoder,
    matched_pair_floor,
    phase_sweep,
)


def main() -> None:
    source = builtin_source("u4")
    enc, gd, d_d = exhaustive_optimal_encoder(source, 2)
    print(f"source: u4, rate 1, D_d = {d_d:.6f}")
    floor = matched_pair_floor(source, enc, gd)
    print(f"law-matching floor W1(p_Yd, p_Y) = {floor:.6f}")
    print()

    lambdas = [0.0, 0.25, 0.5, 0.75, 0.9, 1.0, 1.1, 1.5, 2.0]
    sols = phase_sweep(source, enc, gd, lambdas)

    print(f"{'lambda':>8}{'W1 gap':>12}{'mean dev':>12}{'MSE':>12}  phase")
    for s in sols:
        phase = {"ok": "matching" if s.lam < 1 else "collapse",
                 "indeterminate": "boundary"}[s.flag]
        print(f"{s.lam:>8.2f}{s.w1_gap:>12.6f}{s.mean_dev:>12.6f}{s.mse:>12.6f}  {phase}")

    print()
    print(f"MSE below the transition: 2 * D_d = {2 * d_d:.6f}")
    print(f"MSE above the transition:     D_d = {d_d:.6f}")
    print("below 1 the W1 gap is pinned at 0; above 1 the mean deviation is.")

    print()
    print("same transition on the balance-parameter axis:")
    for beta in (0.9, 0.6, 0.5, 0.4, 0.2):
        lam = beta_to_lambda(beta)
        side = "matching" if lam < 1 else ("boundary" if lam == 1 else "collapse")
        print(f"  beta = {beta:.2f}  ->  lambda = {lam:.4f}  ({side})")


if __name__ == "__main__":
    main()
