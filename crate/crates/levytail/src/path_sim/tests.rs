use super::*;
use crate::exact::{model_tail, LevyModel};
use crate::jump_laws::{fair_pm1, point_mass};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn model(sigma: f64, b: f64, lambda: f64, law: crate::jump_laws::JumpLaw) -> LevyModel {
    LevyModel::new(sigma, b, lambda, law).unwrap()
}

#[test]
fn bridge_inverse_median_and_shape() {
    // Standard bridge (a = c = 0, t = 1, σ = 1): P(M > m) = e^{-2m²}, so the
    // median is sqrt(ln 2 / 2).
    let med = bridge_max_inverse(0.0, 0.0, 1.0, 1.0, 0.5);
    assert!((med - (0.5 * std::f64::consts::LN_2).sqrt()).abs() < 1e-14);
    assert!((med - 0.58871).abs() < 1e-5);

    // p -> 1 recovers the endpoint maximum; monotone decreasing in p.
    let near_end = bridge_max_inverse(0.3, -0.2, 0.5, 1.0, 1.0 - 1e-15);
    assert!((near_end - 0.3).abs() < 1e-7);
    let mut prev = f64::INFINITY;
    for i in 1..50 {
        let m = bridge_max_inverse(0.1, 0.4, 0.7, 2.0, i as f64 / 50.0);
        assert!(m >= 0.4 && m < prev);
        prev = m;
    }
}

#[test]
fn bridge_inverse_ks_against_closed_form() {
    // Empirical CDF of 1e6 inverse-sampled maxima vs F(m) = 1 - e^{-2m²}.
    let n = 1_000_000usize;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut samples: Vec<f64> = (0..n)
        .map(|_| bridge_max_inverse(0.0, 0.0, 1.0, 1.0, rng.random()))
        .collect();
    samples.sort_by(f64::total_cmp);
    let mut ks = 0.0f64;
    for (i, &m) in samples.iter().enumerate() {
        let f = 1.0 - (-2.0 * m * m).exp();
        ks = ks.max((f - i as f64 / n as f64).abs());
        ks = ks.max((f - (i + 1) as f64 / n as f64).abs());
    }
    assert!(ks < 0.002, "KS = {ks}");
}

#[test]
fn forced_skeleton_examples() {
    // No diffusion, unit drift, one jump of size 2 at t = 0.5: the path runs
    // down to -0.5, jumps to 1.5, then drifts down to X(1) = 1. The supremum
    // is the post-jump value 1.5.
    let m = model(0.0, 1.0, 1.0, point_mass(2.0).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let p = build_sample(&m, &[0.5], &[2.0], &mut rng);
    assert_eq!(p.tau, 1);
    assert!((p.supremum - 1.5).abs() < 1e-14);
    assert!((p.endpoint - 1.0).abs() < 1e-14);
    assert_eq!(p.penultimate, Some(0.0));
    assert_eq!(p.sup_b, 0.0);
    assert!((p.sup_z - 2.0).abs() < 1e-14);

    // Pure positive-jump path with no drift: supremum equals the endpoint.
    let m = model(0.0, 0.0, 1.0, point_mass(1.0).unwrap());
    let p = build_sample(&m, &[0.2, 0.9], &[1.0, 1.0], &mut rng);
    assert_eq!(p.supremum, p.endpoint);
    assert!((p.endpoint - 2.0).abs() < 1e-14);
    assert_eq!(p.penultimate, Some(1.0));

    // Two jumps, negative second: penultimate is the value after the first.
    let m = model(0.0, 0.0, 1.0, fair_pm1());
    let p = build_sample(&m, &[0.3, 0.6], &[1.0, -1.0], &mut rng);
    assert_eq!(p.penultimate, Some(1.0));
    assert!((p.supremum - 1.0).abs() < 1e-14);
    assert!(p.endpoint.abs() < 1e-14);
}

#[test]
fn reflection_principle_with_negligible_jumps() {
    // σ = 1 and λ ≈ 0: P(sup > 1) = 2Φ̄(1) = 0.317311 by reflection.
    let m = model(1.0, 0.0, 1e-9, point_mass(1.0).unwrap());
    let trials = 1_000_000;
    let est = &estimate_events(&m, 1.0, &[EventKind::Supremum], trials, 11)[0];
    let expect = 0.317_310_5;
    assert!(
        (est.p_hat - expect).abs() < 3.0 * est.stderr,
        "p_hat = {}, stderr = {}",
        est.p_hat,
        est.stderr
    );
}

#[test]
fn per_path_invariants() {
    let m = model(0.5, 0.3, 2.0, fair_pm1());
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..5000 {
        let p = sample_path(&m, &mut rng);
        assert!(p.supremum >= 0.0);
        assert!(p.supremum >= p.endpoint);
        if let Some(v) = p.penultimate {
            assert!(p.supremum >= v - 1e-12);
        }
        assert!(p.sup_b >= 0.0 && p.sup_b >= p.gauss_end);
        assert!(p.sup_z >= 0.0);
        // sup(σB + Z - bt) <= sup σB + sup Z when the drift is nonnegative.
        assert!(p.supremum <= p.sup_b + p.sup_z + 1e-9);
    }
}

#[test]
fn estimates_identical_across_worker_modes() {
    let m = model(1.0, 0.2, 1.5, fair_pm1());
    let events = [
        EventKind::Endpoint,
        EventKind::Supremum,
        EventKind::PenultimateExcess,
        EventKind::SupBPlusSupZ,
        EventKind::SymPair,
    ];
    // Trials deliberately not a multiple of the block size.
    let trials = 3 * BLOCK_SIZE + 1234;
    let par = estimate_events_with_mode(&m, 0.8, &events, trials, 5, false);
    let seq = estimate_events_with_mode(&m, 0.8, &events, trials, 5, true);
    for (a, b) in par.iter().zip(&seq) {
        assert_eq!(a.hits, b.hits, "event {}", a.label);
        assert_eq!(a.trials, trials);
    }
}

#[test]
fn doob_style_bound_against_exact_endpoint() {
    // For a symmetric jump part with σ > 0 and no drift,
    // P(sup > u) <= 2 P(X(1) > u); check the MC side against the exact
    // endpoint with a 3-stderr allowance.
    let m = model(1.0, 0.0, 1.0, fair_pm1());
    let u = 1.5;
    let est = &estimate_events(&m, u, &[EventKind::Supremum], 200_000, 3)[0];
    let (tv, _) = model_tail(&m, u, 1e-12).unwrap();
    let endpoint = tv.mid_log().exp();
    assert!(
        est.p_hat <= 2.0 * endpoint + 3.0 * est.stderr,
        "sup = {}, 2*endpoint = {}",
        est.p_hat,
        2.0 * endpoint
    );
}

#[test]
fn mc_matches_exact_endpoint_on_discrete_configs() {
    // Endpoint probabilities from paths vs the deterministic series.
    let configs = [
        (0.0, 0.0, 1.0, point_mass(1.0).unwrap(), 1.5),
        (0.0, 0.5, 2.0, fair_pm1(), 0.5),
        (1.0, 0.0, 1.0, point_mass(2.0).unwrap(), 2.0),
        (0.5, 1.0, 3.0, fair_pm1(), 1.0),
    ];
    for (i, (sigma, b, lambda, law, u)) in configs.into_iter().enumerate() {
        let m = model(sigma, b, lambda, law);
        let est = &estimate_events(&m, u, &[EventKind::Endpoint], 200_000, 100 + i as u64)[0];
        let (tv, _) = model_tail(&m, u, 1e-12).unwrap();
        let exact = tv.mid_log().exp();
        assert!(est.hits >= 50, "config {i} too rare for this check");
        assert!(
            (est.p_hat - exact).abs() <= 3.0 * est.stderr,
            "config {i}: mc = {}, exact = {}, stderr = {}",
            est.p_hat,
            exact,
            est.stderr
        );
    }
}

#[test]
fn ratio_curve_trivial_and_flags() {
    // Nonnegative paths (positive jumps, no diffusion or drift): at u = -1
    // both events are certain, so the ratio is exactly 1 with no error.
    let m = model(0.0, 0.0, 1.0, point_mass(1.0).unwrap());
    let c = ratio_curve(&m, &[-1.0], 20_000, 9, DenominatorMode::Mc, 1e-10).unwrap();
    let p = &c.points[0];
    assert_eq!(p.ratio, 1.0);
    assert_eq!(p.numerator, 1.0);
    assert!(!p.low_confidence);

    // Far tail at modest trials: flagged low-confidence.
    let c = ratio_curve(&m, &[8.0], 20_000, 9, DenominatorMode::Exact, 1e-10).unwrap();
    assert!(c.points[0].low_confidence);

    // Exact-denominator mode brackets the MC ratio at a moderate level.
    let c = ratio_curve(&m, &[1.0], 200_000, 9, DenominatorMode::Exact, 1e-10).unwrap();
    let p = &c.points[0];
    assert!(p.ratio_lo <= p.ratio && p.ratio <= p.ratio_hi);
    assert!(p.ratio >= 1.0 - 3.0 * p.numerator_err / p.denominator);
    assert_eq!(p.method, "mc/exact");
}

#[test]
fn ratio_curve_mc_denominator_consistency() {
    // Paired MC ratio must agree with exact-denominator ratio within the
    // combined uncertainty on a diffusive model.
    let m = model(1.0, 0.0, 1.0, fair_pm1());
    let mc = ratio_curve(&m, &[0.5, 1.5], 400_000, 21, DenominatorMode::Mc, 1e-10).unwrap();
    let ex = ratio_curve(&m, &[0.5, 1.5], 400_000, 21, DenominatorMode::Exact, 1e-10).unwrap();
    for (a, b) in mc.points.iter().zip(&ex.points) {
        assert!(a.ratio >= 1.0, "sup tail dominates endpoint tail");
        assert!(
            (a.ratio - b.ratio).abs() <= (a.ratio_hi - a.ratio_lo) + (b.ratio_hi - b.ratio_lo),
            "u = {}: {} vs {}",
            a.u,
            a.ratio,
            b.ratio
        );
    }
}

#[test]
fn sym_identity_exact_fair_jumps() {
    // P(X + |Y| > u) = 2P(X + Y > u) - P(X > u + |Y|) for symmetric Y.
    let law = fair_pm1();
    let resid = sym_identity_residual(&law, 1.0, &[0.0, 0.5, 1.0, 2.0], ResidualMode::Exact)
        .unwrap();
    assert!(resid < 1e-10, "residual = {resid}");
}

#[test]
fn sym_identity_mc_agrees() {
    let law = fair_pm1();
    let resid = sym_identity_residual(
        &law,
        1.0,
        &[0.0, 0.5, 1.0, 2.0],
        ResidualMode::Mc {
            trials: 200_000,
            seed: 17,
        },
    )
    .unwrap();
    assert!(resid < 0.01, "residual = {resid}");
}

#[test]
fn penultimate_excess_event_semantics() {
    // With unit jumps, no diffusion, no drift: X(Γ_{τ-1}) > u and X(1) <= u
    // is impossible (the path never decreases), so the estimate is 0.
    let m = model(0.0, 0.0, 2.0, point_mass(1.0).unwrap());
    let est = &estimate_events(&m, 1.5, &[EventKind::PenultimateExcess], 50_000, 1)[0];
    assert_eq!(est.hits, 0);

    // With drift the path decays between jumps, so the event has mass.
    let m = model(0.0, 2.0, 3.0, point_mass(1.0).unwrap());
    let est = &estimate_events(&m, 0.5, &[EventKind::PenultimateExcess], 50_000, 1)[0];
    assert!(est.hits > 0);
}
