"""The alpha-interpolation decoder family and the constrained D(P) oracle.

interpolate() realizes the decoder that blends the conditional-mean table
with the conditional resampler; for a globally MSE-optimal pair its measured
distortion and perception obey the closed forms

    D(alpha) = (1 + (1-alpha)^2) * D_d        P(alpha) = alpha^2 * P_d

with alpha = min(sqrt(P/P_d), 1). constrained_oracle() solves the constrained
problem directly as one LP over stochastic decoder rows plus a coupling, so
those identities can be checked against an optimizer that knows nothing about
the interpolation construction. universal_encoder_check() brute-forces every
encoder to confirm none beats the MMSE partition at any perception budget.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from ._format import csv_text
from ._parallel import ordered_map
from .codec import (
    ENUMERATION_CAP,
    DeterministicDecoder,
    Encoder,
    StochasticDecoder,
    decoder_output_dist,
    distortion,
    exhaustive_optimal_encoder,
)
from .distcore import DiscreteDistribution, joint_from_encoder, make_distribution
from .transport import w2sq_exact

_LP_OPTIONS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
}

SWEEP_COLUMNS = ("alpha", "D_measured", "P_measured", "D_predicted", "P_predicted", "D_d", "P_d")


@dataclass(frozen=True, eq=False)
class InterpolatedDecoder:
    """alpha-blend of a deterministic table gd and a stochastic table gp."""

    alpha: float
    gd: DeterministicDecoder
    gp: StochasticDecoder
    realized: StochasticDecoder


@dataclass(frozen=True)
class TradeoffPoint:
    alpha: float
    d_measured: float
    p_measured: float
    d_predicted: float
    p_predicted: float
    d_d: float
    p_d: float

    def __post_init__(self):
        vals = (self.d_measured, self.p_measured, self.d_predicted,
                self.p_predicted, self.d_d, self.p_d)
        if any(v < 0 for v in vals) or not 0 <= self.alpha <= 1:
            raise ValueError("tradeoff point values must be nonnegative with alpha in [0,1]")
        # 1e-12 absolute guard keeps exact-zero cases (lossless rate) alive.
        if self.p_measured > self.p_d * (1 + 1e-6) + 1e-12:
            raise ValueError("measured perception exceeds the MMSE endpoint")
        if self.d_measured < self.d_d * (1 - 1e-6) - 1e-12:
            raise ValueError("measured distortion undercuts the MMSE optimum")

    def row(self) -> tuple:
        return (self.alpha, self.d_measured, self.p_measured,
                self.d_predicted, self.p_predicted, self.d_d, self.p_d)


def interpolate(gd: DeterministicDecoder, gp: StochasticDecoder, alpha: float) -> InterpolatedDecoder:
    """Decoder emitting alpha*gd[z] + (1-alpha)*x with x drawn from gp's row z."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha out of range [0, 1]")
    if gd.K != gp.K:
        raise ValueError(f"K mismatch: gd has {gd.K} rows, gp has {gp.K}")
    if gd.table.shape[1] != gp.out_support.shape[1]:
        raise ValueError("dimension mismatch between decoder tables")
    blocks = []
    weights = []
    for z in range(gd.K):
        mask = gp.table[z] > 0
        blocks.append(alpha * gd.table[z][None, :] + (1.0 - alpha) * gp.out_support[mask])
        weights.append(gp.table[z][mask])
    big = np.vstack(blocks)
    uniq, inverse = np.unique(big, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    table = np.zeros((gd.K, uniq.shape[0]))
    offset = 0
    for z in range(gd.K):
        w = weights[z]
        np.add.at(table[z], inverse[offset:offset + w.shape[0]], w)
        offset += w.shape[0]
    return InterpolatedDecoder(float(alpha), gd, gp, StochasticDecoder(uniq, table))


def alpha_for_perception(p: float, p_d: float) -> float:
    """min(sqrt(P/P_d), 1): the interpolation weight exhausting budget P."""
    if p < 0:
        raise ValueError("perception must be ≥ 0")
    if p_d <= 0:
        raise ValueError("P_d must be > 0 (lossless codec leaves nothing to interpolate)")
    return min(math.sqrt(p / p_d), 1.0)


def predicted_distortion(alpha: float, d_d: float) -> float:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha out of range [0, 1]")
    return (1.0 + (1.0 - alpha) ** 2) * d_d


def predicted_perception(alpha: float, p_d: float) -> float:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha out of range [0, 1]")
    return alpha * alpha * p_d


def dp_derivatives(alpha: float, d_d: float) -> Tuple[float, float]:
    """(dP/dD, d²P/dD²) along the bound; negative slope, positive curvature."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("derivatives defined for alpha strictly inside (0, 1)")
    if d_d <= 0:
        raise ValueError("D_d must be > 0")
    return alpha / (alpha - 1.0), 1.0 / (2.0 * (1.0 - alpha) ** 3 * d_d)


def evaluate_point(source: DiscreteDistribution, enc: Encoder, gd: DeterministicDecoder,
                   gp: StochasticDecoder, alpha: float) -> TradeoffPoint:
    """Measure (D, P) of the realized decoder and pair with the predictions."""
    realized = interpolate(gd, gp, alpha).realized
    d_meas = distortion(source, enc, realized)
    p_meas = w2sq_exact(source, decoder_output_dist(source, enc, realized)).cost
    d_d = distortion(source, enc, gd)
    p_d = w2sq_exact(source, decoder_output_dist(source, enc, gd)).cost
    return TradeoffPoint(
        alpha=float(alpha),
        d_measured=d_meas,
        p_measured=p_meas,
        d_predicted=predicted_distortion(alpha, d_d),
        p_predicted=predicted_perception(alpha, p_d),
        d_d=d_d,
        p_d=p_d,
    )


def sweep(source: DiscreteDistribution, enc: Encoder, gd: DeterministicDecoder,
          gp: StochasticDecoder, alphas: Sequence[float]) -> list:
    """One TradeoffPoint per grid value, emitted in grid order."""
    alphas = [float(a) for a in alphas]
    if any(not 0.0 <= a <= 1.0 for a in alphas):
        raise ValueError("alpha out of range [0, 1]")
    if any(b < a for a, b in zip(alphas, alphas[1:])):
        raise ValueError("alpha grid must be sorted ascending")
    return ordered_map(lambda a: evaluate_point(source, enc, gd, gp, a), alphas)


def sweep_to_csv(points: Sequence[TradeoffPoint]) -> str:
    return csv_text(SWEEP_COLUMNS, (p.row() for p in points))


def default_oracle_support(source: DiscreteDistribution, gd: DeterministicDecoder,
                           gp: StochasticDecoder,
                           alphas: Sequence[float] = (0.0, 0.25, 0.5, 0.75, 1.0)) -> np.ndarray:
    """supp(X) ∪ gd table ∪ every alpha-grid interpolation image, deduplicated."""
    parts = [source.points, gd.table]
    for a in alphas:
        parts.append(interpolate(gd, gp, float(a)).realized.out_support)
    return np.unique(np.vstack(parts), axis=0)


def _sq_table(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = a[:, None, :] - b[None, :, :]
    return np.einsum("imd,imd->im", d, d)


def constrained_oracle(source: DiscreteDistribution, enc: Encoder, p_budget: float,
                       out_support) -> Tuple[float, StochasticDecoder]:
    """Exact minimum distortion at perception budget P over a finite support.

    One LP over decoder rows q(x̂|z) and a coupling pi(x, x̂):

        min  Σ p(x,z) q(x̂|z) ‖x−x̂‖²
        s.t. rows of q are pmfs;  pi >= 0;  Σ_x̂ pi = p_X;
             Σ_x pi(x, x̂) = Σ_z p(z) q(x̂|z);  Σ pi ‖x−x̂‖² <= P.

    The coupling certifies that the decoder's output law sits within W2²-budget
    P of the source law.
    """
    if p_budget < 0:
        raise ValueError("perception must be ≥ 0")
    sup = np.asarray(out_support, dtype=np.float64)
    if sup.ndim == 1:
        sup = sup.reshape(-1, 1)
    if sup.size == 0:
        raise ValueError("out_support must be non-empty")
    if sup.shape[1] != source.dim:
        raise ValueError("dimension mismatch between out_support and source")
    sup = np.unique(sup, axis=0)

    j = joint_from_encoder(source, enc)
    pz = j.z_marginal()
    n, k, m = source.n, enc.K, sup.shape[0]
    sqx = _sq_table(source.points, sup)  # (n, m)
    cq = j.mass @ sqx                    # (k, m)

    nq, npi = k * m, n * m
    c = np.concatenate([cq.reshape(-1), np.zeros(npi)])
    eye_m = sparse.identity(m, format="csr")
    a_eq = sparse.vstack(
        [
            # each decoder row a pmf
            sparse.hstack([sparse.kron(sparse.identity(k), np.ones((1, m))),
                           sparse.csr_matrix((k, npi))]),
            # coupling rows reproduce p_X
            sparse.hstack([sparse.csr_matrix((n, nq)),
                           sparse.kron(sparse.identity(n), np.ones((1, m)))]),
            # coupling columns reproduce the decoder's output law
            sparse.hstack([-sparse.kron(pz.reshape(1, -1), eye_m),
                           sparse.kron(np.ones((1, n)), eye_m)]),
        ],
        format="csr",
    )
    b_eq = np.concatenate([np.ones(k), source.probs, np.zeros(m)])
    a_ub = sparse.csr_matrix(np.concatenate([np.zeros(nq), sqx.reshape(-1)])[None, :])

    res = linprog(c, A_ub=a_ub, b_ub=[p_budget], A_eq=a_eq, b_eq=b_eq,
                  bounds=(0, None), method="highs", options=_LP_OPTIONS)
    if res.status != 0:
        raise ValueError(
            "perception constraint infeasible on the given out_support"
            " (include supp(X) to make P=0 reachable)" if res.status == 2
            else f"oracle LP failed: {res.message}"
        )
    q = np.maximum(res.x[:nq].reshape(k, m), 0.0)
    q = q / q.sum(axis=1, keepdims=True)
    dec = StochasticDecoder(sup, q)
    return distortion(source, enc, dec), dec


@dataclass(frozen=True)
class UniversalityRow:
    p_budget: float
    d_star_mmse: float
    d_star_best: float
    best_assignment: tuple
    rel_gap: float


@dataclass(frozen=True)
class UniversalityReport:
    k: int
    rows: Tuple[UniversalityRow, ...]

    @property
    def max_rel_gap(self) -> float:
        return max((r.rel_gap for r in self.rows), default=0.0)

    def ok(self, tol: float = 1e-6) -> bool:
        return self.max_rel_gap <= tol


def _candidate_support(source: DiscreteDistribution, assignment: np.ndarray, k: int,
                       p_budget: float, alphas: Sequence[float]) -> np.ndarray:
    """Interpolation-image support for an arbitrary assignment.

    Works on nonempty cells only, so assignments that waste codes still get a
    fair candidate set (their empty rows cost the LP nothing).
    """
    pts, probs = source.points, source.probs
    parts = [pts]
    cell_means = []
    cell_masses = []
    cell_masks = []
    for z in range(k):
        mask = assignment == z
        w = probs[mask]
        if w.size == 0:
            continue
        cell_means.append((w @ pts[mask]) / w.sum())
        cell_masses.append(w.sum())
        cell_masks.append(mask)
    means = np.asarray(cell_means)
    out_law = make_distribution(means, np.asarray(cell_masses))
    p_d = w2sq_exact(source, out_law).cost
    alpha_set = sorted(set(float(a) for a in alphas)
                       | {min(math.sqrt(p_budget / p_d), 1.0) if p_d > 0 else 1.0})
    for a in alpha_set:
        for mean, mask in zip(means, cell_masks):
            parts.append(a * mean[None, :] + (1.0 - a) * pts[mask])
    parts.append(means)
    return np.unique(np.vstack(parts), axis=0)


def universal_encoder_check(source: DiscreteDistribution, k: int, p_grid: Sequence[float],
                            support_alphas: Sequence[float] = (0.0, 0.25, 0.5, 0.75, 1.0),
                            cap: int = ENUMERATION_CAP) -> UniversalityReport:
    """Brute-force confirmation that the MMSE partition is universally optimal.

    For each budget P, runs the constrained oracle under every one of the K^n
    assignments and reports the relative gap between the MMSE-optimal
    encoder's value and the overall minimum.
    """
    n = source.n
    if k**n > cap:
        raise ValueError(f"enumeration cap exceeded: K^n = {k}^{n} > {cap}")
    p_grid = [float(p) for p in p_grid]
    if any(p < 0 for p in p_grid):
        raise ValueError("perception must be ≥ 0")

    enc0, _, _ = exhaustive_optimal_encoder(source, k)
    d_mmse = {}
    for p in p_grid:
        sup = _candidate_support(source, np.asarray(enc0.assignment), k, p, support_alphas)
        d_mmse[p], _ = constrained_oracle(source, enc0, p, sup)

    best = {p: (math.inf, None) for p in p_grid}
    for assign in itertools.product(range(k), repeat=n):
        a = np.asarray(assign, dtype=np.int64)
        enc = Encoder(a, k)
        for p in p_grid:
            sup = _candidate_support(source, a, k, p, support_alphas)
            d_star, _ = constrained_oracle(source, enc, p, sup)
            if d_star < best[p][0]:
                best[p] = (d_star, assign)

    rows = []
    for p in p_grid:
        d_best, arg = best[p]
        gap = (d_mmse[p] - d_best) / max(abs(d_best), 1e-300)
        rows.append(UniversalityRow(p, d_mmse[p], d_best, tuple(arg), max(gap, 0.0)))
    return UniversalityReport(k, tuple(rows))
