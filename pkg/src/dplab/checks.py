"""Runtime invariant suite behind `dplab verify`.

Every check re-measures its quantity from scratch on the scenario's source and
rate, so a passing report certifies the installed build on this machine, not a
cached fixture. Checks that need an enumeration too large for the source are
reported as skipped rather than silently dropped.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .augmented import (
    augmented_objective,
    beta_to_lambda,
    conditioning_equivalence,
    matched_pair_floor,
    phase_sweep,
)
from .codec import (
    StochasticDecoder,
    distortion,
    exhaustive_optimal_encoder,
    lloyd_train,
    mmse_decoder_for,
    perceptual_decoder_for,
)
from .distcore import (
    DiscreteDistribution,
    conditional_x_given_z,
    joint_from_encoder,
    make_distribution,
)
from .tradeoff import (
    constrained_oracle,
    default_oracle_support,
    dp_derivatives,
    sweep,
    universal_encoder_check,
)
from .transport import w1_exact, w2sq_exact, w_1d_closed_form

UNIVERSALITY_CAP = 1024  # K^n above this -> the brute-force check is skipped


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    skipped: bool = False

    @property
    def label(self) -> str:
        if self.skipped:
            return "SKIP"
        return "PASS" if self.passed else "FAIL"

    def line(self) -> str:
        return f"{self.label} {self.name}: {self.detail}"


class _Ctx:
    """Shared scenario state so each check re-derives only what it asserts."""

    def __init__(self, source: DiscreteDistribution, k: int, seed: int, rel_tol: float):
        self.source = source
        self.k = k
        self.seed = seed
        self.rel_tol = rel_tol
        self.rng = np.random.default_rng(seed)
        self.enc, self.gd, self.d_d = exhaustive_optimal_encoder(source, k)
        self.gp = perceptual_decoder_for(source, self.enc)
        self.p_d = w2sq_exact(source, make_distribution(
            self.gd.table, joint_from_encoder(source, self.enc).z_marginal())).cost
        self.alphas21 = [i / 20 for i in range(21)]
        self.points21 = sweep(source, self.enc, self.gd, self.gp, self.alphas21)


def _check_canonical_support(ctx: _Ctx) -> CheckResult:
    rng = np.random.default_rng(ctx.seed + 1)
    pts = rng.integers(0, 5, size=(12, 2)).astype(np.float64)
    probs = rng.random(12) + 0.1
    probs /= probs.sum()
    d = make_distribution(pts, probs)
    again = make_distribution(d.points, d.probs)
    perm = rng.permutation(12)
    shuffled = make_distribution(pts[perm], probs[perm])
    stable = (np.array_equal(d.points, again.points)
              and np.array_equal(d.probs, again.probs)
              and np.array_equal(d.points, shuffled.points)
              and np.array_equal(d.probs, shuffled.probs))
    mass_gap = abs(float(d.probs.sum()) - 1.0)
    uniq = np.unique(d.points, axis=0).shape[0] == d.n
    ok = stable and uniq and mass_gap <= 1e-12
    return CheckResult(
        "canonical_support", ok,
        f"rebuild bit-stable={stable}, unique support={uniq}, mass gap {mass_gap:.3g} (tol 1e-12)",
    )


def _check_conditional_reassembly(ctx: _Ctx) -> CheckResult:
    j = joint_from_encoder(ctx.source, ctx.enc)
    pz = j.z_marginal()
    mix = np.zeros(ctx.source.n)
    for z in range(ctx.enc.K):
        cond = conditional_x_given_z(j, z)
        for pt, pr in zip(cond.points, cond.probs):
            i = int(np.nonzero((ctx.source.points == pt).all(axis=1))[0][0])
            mix[i] += pz[z] * pr
    gap = float(np.max(np.abs(mix - ctx.source.probs)))
    return CheckResult(
        "conditional_reassembly", gap <= 1e-12,
        f"max |Σ_z p(z)p(x|z) − p(x)| = {gap:.3g} (tol 1e-12)",
    )


def _check_resampler_marginal(ctx: _Ctx) -> CheckResult:
    from .codec import decoder_output_dist

    out = decoder_output_dist(ctx.source, ctx.enc, ctx.gp)
    same_support = np.array_equal(out.points, ctx.source.points)
    gap = (float(np.max(np.abs(out.probs - ctx.source.probs)))
           if same_support and out.n == ctx.source.n else math.inf)
    # ulp-level bound: each entry is pz*(p/pz), exact for dyadic masses
    return CheckResult(
        "resampler_marginal", same_support and gap <= 1e-15,
        f"support match={same_support}, max prob gap {gap:.3g} (tol 1e-15)",
    )


def _check_orthogonality(ctx: _Ctx) -> CheckResult:
    rng = np.random.default_rng(ctx.seed + 2)
    resid = ctx.source.points - ctx.gd.table[ctx.enc.assignment]
    worst = 0.0
    for _ in range(20):
        f = rng.normal(size=(ctx.enc.K, ctx.source.dim))
        val = float(np.einsum("i,id,id->", ctx.source.probs, resid, f[ctx.enc.assignment]))
        worst = max(worst, abs(val))
    return CheckResult(
        "mean_residual_orthogonality", worst <= 1e-10,
        f"max |E[(X−Xd)·f(Xd)]| over 20 draws = {worst:.3g} (tol 1e-10)",
    )


def _check_cross_term(ctx: _Ctx) -> CheckResult:
    # E‖Xd−Xp‖² with Xd, Xp conditionally independent given Z
    pz = joint_from_encoder(ctx.source, ctx.enc).z_marginal()
    diff = ctx.gd.table[:, None, :] - ctx.gp.out_support[None, :, :]
    sq = np.einsum("zmd,zmd->zm", diff, diff)
    lhs = float(np.einsum("z,zm,zm->", pz, ctx.gp.table, sq))
    gap = abs(lhs - ctx.d_d)
    return CheckResult(
        "cross_term_identity", gap <= 1e-10,
        f"|E‖Xd−Xp‖² − E‖X−Xd‖²| = {gap:.3g} (tol 1e-10)",
    )


def _check_training_monotonicity(ctx: _Ctx) -> CheckResult:
    trace: list = []
    lloyd_train(ctx.source, ctx.k, seed=ctx.seed, mse_trace=trace)
    drops = [b - a for a, b in zip(trace, trace[1:])]
    worst = max(drops, default=0.0)
    above_opt = trace[-1] >= ctx.d_d - 1e-12
    ok = worst <= 1e-12 and above_opt
    return CheckResult(
        "training_monotonicity", ok,
        f"max MSE increase along trace = {worst:.3g} (tol 1e-12), "
        f"final {trace[-1]:.6g} ≥ exhaustive {ctx.d_d:.6g}",
    )


def _check_endpoint_doubling(ctx: _Ctx) -> CheckResult:
    d0 = ctx.points21[0].d_measured
    gap = abs(d0 - 2.0 * ctx.d_d)
    return CheckResult(
        "endpoint_doubling", gap <= 1e-8,
        f"|D(0) − 2·D_d| = {gap:.3g} with D(0)={d0:.6g}, D_d={ctx.d_d:.6g} (tol 1e-8)",
    )


def _check_interpolation_identities(ctx: _Ctx) -> CheckResult:
    dgap = max(abs(p.d_measured - p.d_predicted) for p in ctx.points21)
    pgap = max(abs(p.p_measured - p.p_predicted) for p in ctx.points21)
    return CheckResult(
        "interpolation_identities", dgap <= 1e-8 and pgap <= 1e-8,
        f"21-point grid: max |D−(1+(1−α)²)D_d| = {dgap:.3g}, "
        f"max |P−α²P_d| = {pgap:.3g} (tol 1e-8)",
    )


def _check_oracle_tightness(ctx: _Ctx) -> CheckResult:
    sup = default_oracle_support(ctx.source, ctx.gd, ctx.gp)
    worst = 0.0
    for i in (0, 5, 10, 15, 20):
        pt = ctx.points21[i]
        d_star, _ = constrained_oracle(ctx.source, ctx.enc, pt.p_measured, sup)
        rel = abs(d_star - pt.d_measured) / max(abs(pt.d_measured), 1e-300)
        worst = max(worst, rel)
    return CheckResult(
        "oracle_tightness", worst <= ctx.rel_tol,
        f"max rel |D* − D(α)| over α∈{{0,.25,.5,.75,1}} = {worst:.3g} (tol {ctx.rel_tol:g})",
    )


def _check_universality(ctx: _Ctx) -> CheckResult:
    total = ctx.k ** ctx.source.n
    if total > UNIVERSALITY_CAP:
        return CheckResult(
            "encoder_universality", True,
            f"skipped: K^n = {ctx.k}^{ctx.source.n} exceeds {UNIVERSALITY_CAP}",
            skipped=True,
        )
    p_grid = [f * ctx.p_d for f in (0.0, 0.25, 0.5, 0.75, 1.0)]
    report = universal_encoder_check(ctx.source, ctx.k, p_grid)
    return CheckResult(
        "encoder_universality", report.ok(ctx.rel_tol),
        f"max rel MMSE-encoder gap over {total} assignments x 5 budgets = "
        f"{report.max_rel_gap:.3g} (tol {ctx.rel_tol:g})",
    )


def _check_phase_transition(ctx: _Ctx) -> CheckResult:
    lams = [0.0, 0.25, 0.5, 0.9, 1.0, 1.1, 1.5, 2.0]
    sols = phase_sweep(ctx.source, ctx.enc, ctx.gd, lams)
    worst = 0.0
    consistency = 0.0
    flags_ok = True
    for s in sols:
        recomputed = augmented_objective(ctx.source, ctx.enc, ctx.gd, s.decoder, s.lam)
        consistency = max(consistency, abs(recomputed - s.objective))
        if abs(s.lam - 1.0) <= 1e-9:
            flags_ok = flags_ok and s.flag == "indeterminate"
            continue
        flags_ok = flags_ok and s.flag == "ok"
        if s.lam < 1.0:
            worst = max(worst, s.w1_gap, abs(s.mse - 2.0 * ctx.d_d))
        else:
            worst = max(worst, s.mean_dev, abs(s.mse - ctx.d_d))
    ok = worst <= 1e-8 and consistency <= 1e-9 and flags_ok
    return CheckResult(
        "phase_transition", ok,
        f"max branch residual {worst:.3g} (tol 1e-8), "
        f"objective recompute gap {consistency:.3g} (tol 1e-9), flags ok={flags_ok}",
    )


def _check_objective_floor(ctx: _Ctx) -> CheckResult:
    floor = matched_pair_floor(ctx.source, ctx.enc, ctx.gd)
    worst_under = 0.0
    worst_eq = 0.0
    for lam in (0.25, 0.5, 0.9):
        sols = phase_sweep(ctx.source, ctx.enc, ctx.gd, [lam])
        obj = sols[0].objective
        worst_under = max(worst_under, lam * floor - obj)
        worst_eq = max(worst_eq, abs(obj - lam * floor))
    ok = worst_under <= 1e-9 and worst_eq <= 1e-8
    return CheckResult(
        "objective_floor", ok,
        f"max (λ·W₁ − objective) = {worst_under:.3g} (tol 1e-9), "
        f"max |objective − λ·W₁| = {worst_eq:.3g} (tol 1e-8)",
    )


def _check_beta_map(ctx: _Ctx) -> CheckResult:
    betas = [i / 10 for i in range(1, 11)]
    vals = [beta_to_lambda(b) for b in betas]
    decreasing = all(a > b for a, b in zip(vals, vals[1:]))
    at_one = vals[-1] == 0.0
    mid = abs(beta_to_lambda(0.5) - 1.0)
    ok = decreasing and at_one and mid == 0.0
    return CheckResult(
        "beta_map", ok,
        f"strictly decreasing={decreasing}, λ(1)=0 {at_one}, |λ(0.5)−1| = {mid:.3g}",
    )


def _check_conditioning_dichotomy(ctx: _Ctx) -> CheckResult:
    gaps_p = conditioning_equivalence(ctx.source, ctx.enc, ctx.gd, ctx.gp)
    copy_dec = StochasticDecoder(ctx.gd.table, np.eye(ctx.enc.K))
    gaps_c = conditioning_equivalence(ctx.source, ctx.enc, ctx.gd, copy_dec)
    resampler_zero = max(gaps_p) <= 1e-10
    copy_positive = min(gaps_c) > 1e-9
    ok = resampler_zero and copy_positive
    return CheckResult(
        "conditioning_dichotomy", ok,
        f"resampler gaps ({gaps_p[0]:.3g}, {gaps_p[1]:.3g}) ≤ 1e-10; "
        f"copy-Xd gaps ({gaps_c[0]:.3g}, {gaps_c[1]:.3g}) both positive",
    )


def _check_derivative_consistency(ctx: _Ctx) -> CheckResult:
    if ctx.d_d <= 0 or ctx.p_d <= 0:
        return CheckResult(
            "derivative_consistency", True,
            "skipped: D_d = 0 leaves no curve to differentiate", skipped=True,
        )
    alphas = [i / 100 for i in range(101)]
    pts = sweep(ctx.source, ctx.enc, ctx.gd, ctx.gp, alphas)
    d = [p.d_measured for p in pts]
    p = [p.p_measured for p in pts]
    worst = 0.0
    slopes = []
    for i in range(1, 100):
        est = (p[i + 1] - p[i - 1]) / (d[i + 1] - d[i - 1])
        ref, _ = dp_derivatives(alphas[i], ctx.d_d)
        worst = max(worst, abs(est - ref) / abs(ref))
        slopes.append(est)
    negative = all(s < 0 for s in slopes)
    # slope decreases in alpha, hence increases in D: convexity
    convex = all(b < a for a, b in zip(slopes, slopes[1:]))
    curvature_pos = all(dp_derivatives(a, ctx.d_d)[1] > 0 for a in alphas[1:-1])
    ok = worst <= 1e-3 and negative and convex and curvature_pos
    return CheckResult(
        "derivative_consistency", ok,
        f"max rel |ΔP/ΔD − α/(α−1)| = {worst:.3g} (tol 1e-3), "
        f"slopes negative={negative}, convex in D={convex and curvature_pos}",
    )


def _check_transport_agreement(ctx: _Ctx) -> CheckResult:
    rng = np.random.default_rng(ctx.seed + 3)
    worst = 0.0
    for _ in range(50):
        na, nb = int(rng.integers(2, 17)), int(rng.integers(2, 17))
        wa, wb = rng.random(na) + 0.05, rng.random(nb) + 0.05
        a = make_distribution(rng.normal(size=na), wa / wa.sum())
        b = make_distribution(rng.normal(size=nb), wb / wb.sum())
        worst = max(worst, abs(w1_exact(a, b).cost - w_1d_closed_form(a, b, 1)))
        worst = max(worst, abs(w2sq_exact(a, b).cost - w_1d_closed_form(a, b, 2)))
    return CheckResult(
        "transport_agreement", worst <= 1e-10,
        f"max |LP − closed form| over 50 seeded pairs, both orders = {worst:.3g} (tol 1e-10)",
    )


def _check_transport_axioms(ctx: _Ctx) -> CheckResult:
    rng = np.random.default_rng(ctx.seed + 4)
    worst_sym = worst_tri = worst_id = 0.0
    for _ in range(100):
        dists = []
        for _ in range(3):
            m = int(rng.integers(2, 7))
            w = rng.random(m) + 0.05
            dists.append(make_distribution(rng.normal(size=(m, 2)), w / w.sum()))
        a, b, c = dists
        ab, ba = w1_exact(a, b).cost, w1_exact(b, a).cost
        bc, ac = w1_exact(b, c).cost, w1_exact(a, c).cost
        worst_sym = max(worst_sym, abs(ab - ba))
        worst_tri = max(worst_tri, ac - (ab + bc))
        worst_id = max(worst_id, w1_exact(a, a).cost)
    ok = worst_sym <= 1e-10 and worst_tri <= 1e-10 and worst_id <= 1e-12
    return CheckResult(
        "transport_axioms", ok,
        f"100 triples: max symmetry gap {worst_sym:.3g}, max triangle excess "
        f"{worst_tri:.3g} (tol 1e-10), max W₁(a,a) {worst_id:.3g} (tol 1e-12)",
    )


def _check_optimal_pair_structure(ctx: _Ctx) -> CheckResult:
    from .codec import check_zd_xd_bijective

    gap_pd = abs(ctx.p_d - ctx.d_d)
    bij = check_zd_xd_bijective(ctx.enc, ctx.gd)
    closed_ok = True
    detail_extra = ""
    if ctx.source.dim == 1:
        out_law = make_distribution(
            ctx.gd.table, joint_from_encoder(ctx.source, ctx.enc).z_marginal())
        closed = w_1d_closed_form(ctx.source, out_law, 2)
        closed_gap = abs(closed - ctx.p_d)
        closed_ok = closed_gap <= 1e-10
        detail_extra = f", LP vs closed-form P_d gap {closed_gap:.3g} (tol 1e-10)"
    ok = gap_pd <= 1e-9 and bij and closed_ok
    return CheckResult(
        "optimal_pair_structure", ok,
        f"|P_d − D_d| = {gap_pd:.3g} (tol 1e-9), gd bijective={bij}{detail_extra}",
    )


_CHECKS = (
    _check_canonical_support,
    _check_conditional_reassembly,
    _check_resampler_marginal,
    _check_orthogonality,
    _check_cross_term,
    _check_training_monotonicity,
    _check_endpoint_doubling,
    _check_interpolation_identities,
    _check_oracle_tightness,
    _check_universality,
    _check_phase_transition,
    _check_objective_floor,
    _check_beta_map,
    _check_conditioning_dichotomy,
    _check_derivative_consistency,
    _check_transport_agreement,
    _check_transport_axioms,
    _check_optimal_pair_structure,
)


def run_checks(source: DiscreteDistribution, k: int, seed: int = 0,
               rel_tol: float = 1e-6) -> list:
    """Full invariant suite on one scenario; returns CheckResults in a fixed order."""
    ctx = _Ctx(source, k, seed, rel_tol)
    return [fn(ctx) for fn in _CHECKS]


def report_text(results) -> str:
    lines = [r.line() for r in results]
    failed = sum(1 for r in results if not r.passed)
    skipped = sum(1 for r in results if r.skipped)
    ran = len(results) - skipped
    lines.append(f"{ran - failed}/{ran} checks passed"
                 + (f", {skipped} skipped" if skipped else ""))
    return "\n".join(lines) + "\n"
