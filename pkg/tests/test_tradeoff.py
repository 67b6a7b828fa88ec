import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dplab.codec import (
    Encoder,
    exhaustive_optimal_encoder,
    mmse_decoder_for,
    perceptual_decoder_for,
)
from dplab.distcore import builtin_source, make_distribution
from dplab.tradeoff import (
    SWEEP_COLUMNS,
    TradeoffPoint,
    alpha_for_perception,
    constrained_oracle,
    default_oracle_support,
    dp_derivatives,
    evaluate_point,
    interpolate,
    predicted_distortion,
    predicted_perception,
    sweep,
    sweep_to_csv,
    universal_encoder_check,
)

U4 = builtin_source("u4")


@pytest.fixture(scope="module")
def u4_pair():
    enc, gd, d_d = exhaustive_optimal_encoder(U4, 2)
    gp = perceptual_decoder_for(U4, enc)
    return enc, gd, gp, d_d


def test_interpolate_endpoints(u4_pair):
    enc, gd, gp, _ = u4_pair
    top = interpolate(gd, gp, 1.0).realized
    assert np.array_equal(np.unique(top.out_support, axis=0), gd.table)
    bottom = interpolate(gd, gp, 0.0).realized
    assert np.array_equal(bottom.out_support, U4.points)
    assert np.array_equal(bottom.table, gp.table)


def test_interpolate_midpoint_cell0(u4_pair):
    enc, gd, gp, _ = u4_pair
    mid = interpolate(gd, gp, 0.5).realized
    assert mid.out_support.ravel().tolist() == [0.25, 0.75, 2.25, 2.75]
    assert mid.table[0].tolist() == [0.5, 0.5, 0.0, 0.0]
    assert mid.table[1].tolist() == [0.0, 0.0, 0.5, 0.5]


def test_interpolate_validation(u4_pair):
    enc, gd, gp, _ = u4_pair
    with pytest.raises(ValueError, match="alpha out of range"):
        interpolate(gd, gp, -0.1)
    with pytest.raises(ValueError, match="alpha out of range"):
        interpolate(gd, gp, 1.1)
    enc1 = Encoder(np.zeros(4, dtype=int), 1)
    with pytest.raises(ValueError, match="K mismatch"):
        interpolate(mmse_decoder_for(U4, enc1), gp, 0.5)


def test_alpha_for_perception():
    assert alpha_for_perception(0.25, 0.25) == 1.0
    assert alpha_for_perception(0.0, 0.25) == 0.0
    assert alpha_for_perception(0.0625, 0.25) == 0.5
    assert alpha_for_perception(9.0, 0.25) == 1.0
    with pytest.raises(ValueError, match="perception must be ≥ 0"):
        alpha_for_perception(-0.1, 0.25)
    with pytest.raises(ValueError, match="P_d must be > 0"):
        alpha_for_perception(0.1, 0.0)


def test_prediction_formulas():
    assert predicted_distortion(1.0, 0.25) == 0.25
    assert predicted_distortion(0.0, 0.25) == 0.5
    assert predicted_distortion(0.5, 0.25) == 0.3125
    assert predicted_perception(0.0, 0.25) == 0.0
    assert predicted_perception(1.0, 0.25) == 0.25
    assert predicted_perception(0.5, 0.25) == 0.0625
    with pytest.raises(ValueError, match="alpha out of range"):
        predicted_distortion(1.2, 0.25)
    with pytest.raises(ValueError, match="alpha out of range"):
        predicted_perception(-0.2, 0.25)


def test_dp_derivatives():
    slope, curv = dp_derivatives(0.5, 0.25)
    assert slope == -1.0
    assert curv == 16.0
    for alpha in (0.1, 0.3, 0.7, 0.9):
        s, c = dp_derivatives(alpha, 0.25)
        assert s < 0 and c > 0
    with pytest.raises(ValueError, match="strictly inside"):
        dp_derivatives(0.0, 0.25)
    with pytest.raises(ValueError, match="strictly inside"):
        dp_derivatives(1.0, 0.25)
    with pytest.raises(ValueError, match="D_d"):
        dp_derivatives(0.5, 0.0)


def test_evaluate_point_examples(u4_pair):
    enc, gd, gp, _ = u4_pair
    mid = evaluate_point(U4, enc, gd, gp, 0.5)
    assert mid.d_measured == 0.3125
    assert abs(mid.p_measured - 0.0625) <= 1e-9
    assert mid.d_predicted == 0.3125 and mid.p_predicted == 0.0625

    lo = evaluate_point(U4, enc, gd, gp, 0.0)
    assert lo.d_measured == 0.5 and lo.p_measured <= 1e-9

    hi = evaluate_point(U4, enc, gd, gp, 1.0)
    assert hi.d_measured == 0.25 and abs(hi.p_measured - 0.25) <= 1e-9


def test_tradeoff_point_invariants():
    TradeoffPoint(0.5, 0.3125, 0.0625, 0.3125, 0.0625, 0.25, 0.25)
    with pytest.raises(ValueError, match="exceeds"):
        TradeoffPoint(0.5, 0.3125, 0.3, 0.3125, 0.0625, 0.25, 0.25)
    with pytest.raises(ValueError, match="undercuts"):
        TradeoffPoint(0.5, 0.1, 0.0625, 0.3125, 0.0625, 0.25, 0.25)
    with pytest.raises(ValueError, match="alpha"):
        TradeoffPoint(1.5, 0.25, 0.25, 0.25, 0.25, 0.25, 0.25)
    with pytest.raises(ValueError, match="nonnegative"):
        TradeoffPoint(0.5, -0.1, 0.0625, 0.3125, 0.0625, 0.25, 0.25)


def test_sweep_five_point_grid(u4_pair):
    enc, gd, gp, _ = u4_pair
    pts = sweep(U4, enc, gd, gp, [0.0, 0.25, 0.5, 0.75, 1.0])
    d_col = [p.d_measured for p in pts]
    p_col = [p.p_measured for p in pts]
    assert d_col == [0.5, 0.390625, 0.3125, 0.265625, 0.25]
    assert np.allclose(p_col, [0.0, 0.015625, 0.0625, 0.140625, 0.25], atol=1e-9)
    assert all(p.d_d == 0.25 for p in pts)
    assert all(abs(p.p_d - 0.25) <= 1e-9 for p in pts)


def test_sweep_validation_and_empty(u4_pair):
    enc, gd, gp, _ = u4_pair
    assert sweep(U4, enc, gd, gp, []) == []
    with pytest.raises(ValueError, match="sorted ascending"):
        sweep(U4, enc, gd, gp, [0.5, 0.25])
    with pytest.raises(ValueError, match="alpha out of range"):
        sweep(U4, enc, gd, gp, [0.5, 1.25])


def test_sweep_csv_layout(u4_pair):
    enc, gd, gp, _ = u4_pair
    text = sweep_to_csv(sweep(U4, enc, gd, gp, [0.0, 1.0]))
    lines = text.split("\n")
    assert lines[0] == ",".join(SWEEP_COLUMNS)
    assert len(lines) == 4 and lines[3] == ""
    assert lines[1].startswith("0,0.5,")
    assert lines[2].startswith("1,0.25,")


def test_curve_monotone_convex(u4_pair):
    enc, gd, gp, _ = u4_pair
    pts = sweep(U4, enc, gd, gp, [i / 20 for i in range(21)])
    d_col = [p.d_measured for p in pts]
    p_col = [p.p_measured for p in pts]
    assert all(b <= a + 1e-9 for a, b in zip(d_col, d_col[1:]))
    assert all(b >= a - 1e-9 for a, b in zip(p_col, p_col[1:]))
    slopes = [(d2 - d1) / (p2 - p1)
              for (d1, p1), (d2, p2) in zip(zip(d_col, p_col), zip(d_col[1:], p_col[1:]))]
    assert all(s2 >= s1 - 1e-6 for s1, s2 in zip(slopes, slopes[1:]))


def test_default_oracle_support(u4_pair):
    enc, gd, gp, _ = u4_pair
    sup = default_oracle_support(U4, gd, gp)
    assert sup.shape == (18, 1)
    merged = np.unique(np.vstack([sup, U4.points, gd.table]), axis=0)
    assert merged.shape[0] == sup.shape[0]


def test_oracle_perfect_perception(u4_pair):
    enc, _, _, _ = u4_pair
    d_star, dec = constrained_oracle(U4, enc, 0.0, U4.points)
    assert abs(d_star - 0.5) <= 1e-9
    from dplab.codec import decoder_output_dist
    out = decoder_output_dist(U4, enc, dec)
    assert np.array_equal(out.points, U4.points)
    assert np.allclose(out.probs, U4.probs, atol=1e-9)


def test_oracle_inactive_budget(u4_pair):
    enc, gd, gp, _ = u4_pair
    sup = default_oracle_support(U4, gd, gp)
    d_star, _ = constrained_oracle(U4, enc, 0.25, sup)
    assert abs(d_star - 0.25) <= 1e-9
    d_star_loose, _ = constrained_oracle(U4, enc, 100.0, sup)
    assert abs(d_star_loose - 0.25) <= 1e-9


def test_oracle_midpoint_budget(u4_pair):
    enc, gd, gp, _ = u4_pair
    sup = default_oracle_support(U4, gd, gp)
    d_star, _ = constrained_oracle(U4, enc, 0.0625, sup)
    assert abs(d_star - 0.3125) <= 1e-8


def test_oracle_monotone_in_budget(u4_pair):
    enc, gd, gp, _ = u4_pair
    sup = default_oracle_support(U4, gd, gp)
    values = [constrained_oracle(U4, enc, p, sup)[0]
              for p in (0.0, 0.01, 0.0625, 0.15, 0.25)]
    assert all(b <= a + 1e-9 for a, b in zip(values, values[1:]))


def test_oracle_validation(u4_pair):
    enc, _, _, _ = u4_pair
    with pytest.raises(ValueError, match="perception must be ≥ 0"):
        constrained_oracle(U4, enc, -0.1, U4.points)
    with pytest.raises(ValueError, match="non-empty"):
        constrained_oracle(U4, enc, 0.0, np.zeros((0, 1)))
    with pytest.raises(ValueError, match="dimension mismatch"):
        constrained_oracle(U4, enc, 0.0, np.zeros((3, 2)))
    with pytest.raises(ValueError, match="infeasible"):
        constrained_oracle(U4, enc, 0.0, np.array([0.5, 2.5]))


def test_universality_u4():
    report = universal_encoder_check(U4, 2, [0.0, 0.0625, 0.25])
    assert report.ok(1e-6)
    assert report.max_rel_gap <= 1e-6
    assert [r.p_budget for r in report.rows] == [0.0, 0.0625, 0.25]
    for r in report.rows:
        assert r.d_star_mmse <= r.d_star_best * (1 + 1e-6) + 1e-12


def test_universality_two_cluster():
    src = make_distribution([0.0, 1.0, 4.0, 5.0], np.full(4, 0.25))
    report = universal_encoder_check(src, 2, [0.0, 0.25])
    assert report.ok(1e-6)


def test_universality_lossless_rate():
    report = universal_encoder_check(U4, 4, [0.0, 0.1])
    for r in report.rows:
        assert r.d_star_mmse <= 1e-9
        assert r.rel_gap <= 1e-6


def test_universality_validation():
    rng = np.random.default_rng(9)
    src = make_distribution(rng.normal(size=8), np.full(8, 0.125))
    with pytest.raises(ValueError, match="cap exceeded"):
        universal_encoder_check(src, 2, [0.0], cap=100)
    with pytest.raises(ValueError, match="perception must be ≥ 0"):
        universal_encoder_check(U4, 2, [-0.5])


@st.composite
def _small_sources(draw):
    n = draw(st.integers(min_value=3, max_value=5))
    pts = draw(st.lists(st.integers(min_value=-4, max_value=4),
                        min_size=n, max_size=n, unique=True))
    w = draw(st.lists(st.integers(min_value=1, max_value=6), min_size=n, max_size=n))
    w = np.asarray(w, dtype=np.float64)
    alpha = draw(st.sampled_from([0.0, 0.2, 0.5, 0.8, 1.0]))
    return make_distribution(np.asarray(pts, dtype=np.float64) / 2.0, w / w.sum()), alpha


@given(_small_sources())
@settings(max_examples=25, deadline=None)
def test_interpolation_identities_random_sources(case):
    src, alpha = case
    enc, gd, d_d = exhaustive_optimal_encoder(src, 2)
    gp = perceptual_decoder_for(src, enc)
    pt = evaluate_point(src, enc, gd, gp, alpha)
    assert abs(pt.d_measured - (1 + (1 - alpha) ** 2) * d_d) <= 1e-8
    assert abs(pt.p_measured - alpha ** 2 * pt.p_d) <= 1e-8
    assert abs(pt.p_d - d_d) <= 1e-9
