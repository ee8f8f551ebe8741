use super::*;
use crate::jump_laws::{exponential, fair_pm1, half_normal, lattice_factorial};

const TOL: f64 = 1e-10;

fn thm1_model(b: f64) -> LevyModel {
    LevyModel::new(1.0, b, 1.0, half_normal())
        .unwrap()
        .with_bracket_step(0.05)
        .unwrap()
}

#[test]
fn thm1_half_normal_trend() {
    let m = thm1_model(0.0);
    let rep = run_thm1(&m, &[2.0, 3.0, 4.0], 400_000, 1, TOL).unwrap();
    assert_eq!(rep.verdict, Verdict::Consistent, "notes: {:?}", rep.notes);
    assert_eq!(rep.rows.len(), 3);
    for r in &rep.rows {
        assert!(r.ratio >= 1.0 - (r.ratio_hi - r.ratio));
        assert!(r.numerator > 0.0 && r.denominator > 0.0);
    }
    assert!(!rep.certificates.is_empty());
}

#[test]
fn thm1_negative_drift_allowed() {
    let m = thm1_model(-1.0);
    let rep = run_thm1(&m, &[2.0, 3.0, 4.0], 200_000, 2, TOL).unwrap();
    assert_eq!(rep.verdict, Verdict::Consistent, "notes: {:?}", rep.notes);
}

#[test]
fn thm1_negative_level_row_is_trivial() {
    let m = thm1_model(0.0);
    let rep = run_thm1(&m, &[-1.0], 10_000, 3, TOL).unwrap();
    assert_eq!(rep.rows.len(), 1);
    assert_eq!(rep.rows[0].ratio, 1.0);
    assert_eq!(rep.rows[0].method, "trivial");
    assert_eq!(rep.verdict, Verdict::Consistent);
}

#[test]
fn thm1_rejects_zero_sigma() {
    let m = LevyModel::new(0.0, 0.0, 1.0, half_normal()).unwrap();
    assert!(run_thm1(&m, &[2.0], 1000, 0, TOL).is_err());
}

#[test]
fn thm2_half_normal_with_q_column() {
    let m = LevyModel::new(0.0, 1.0, 1.0, half_normal())
        .unwrap()
        .with_bracket_step(0.05)
        .unwrap();
    let rep = run_thm2(&m, &[1.0, 2.0, 3.0], 400_000, 4, TOL).unwrap();
    assert_eq!(rep.verdict, Verdict::Consistent, "notes: {:?}", rep.notes);
    let q: Vec<f64> = rep
        .aux
        .iter()
        .filter(|a| a.label == "Q_ratio")
        .map(|a| a.value)
        .collect();
    assert_eq!(q.len(), 3);
    assert!(q.iter().all(|&v| v > 0.0));
    assert!(q.windows(2).all(|w| w[1] < w[0]), "Q trace {q:?}");
}

#[test]
fn thm2_requires_drift_dominated_form() {
    let m = LevyModel::new(1.0, 1.0, 1.0, half_normal()).unwrap();
    assert!(run_thm2(&m, &[1.0], 1000, 0, TOL).is_err());
    let m = LevyModel::new(0.0, 0.0, 1.0, half_normal()).unwrap();
    assert!(run_thm2(&m, &[1.0], 1000, 0, TOL).is_err());
}

#[test]
fn thm3_upper_sequence_grows_lower_stays_at_one() {
    let m = LevyModel::new(0.0, 0.5, 1.0, lattice_factorial()).unwrap();
    let rep = run_thm3(&m, &[3, 4, 5], 0.01, 400_000, 5, TOL).unwrap();
    assert_eq!(rep.verdict, Verdict::Consistent, "notes: {:?}", rep.notes);
    let upper: Vec<f64> = rep.rows[..3].iter().map(|r| r.ratio).collect();
    assert!(upper.windows(2).all(|w| w[1] > w[0]), "upper {upper:?}");
    assert!(upper[0] > 1.5, "upper sequence should exceed 1 clearly");
    for r in &rep.rows[3..] {
        let ci = r.ratio_hi - r.ratio;
        assert!(r.ratio >= 1.0 - ci && r.ratio <= 1.0 + 3.0 * ci, "lower {}", r.ratio);
    }
    // The exact denominator matches the drift-shifted compound series.
    for a in rep.aux.iter().filter(|a| a.label == "denominator_series_check") {
        assert!(a.value < 1e-9);
    }
}

#[test]
fn thm4_excess_and_mc_windows() {
    let rep = run_thm4(&[3, 4, 5], 400_000, 6, 1.0, TOL).unwrap();
    assert_eq!(rep.verdict, Verdict::Consistent, "notes: {:?}", rep.notes);
    let deltas: Vec<f64> = rep
        .aux
        .iter()
        .filter(|a| a.label == "delta_excess")
        .map(|a| a.value)
        .collect();
    assert_eq!(deltas.len(), 3);
    assert!(deltas.iter().all(|&d| d > 0.0));
    for label in ["leading_term_scaled_err", "next_point_scaled_err", "smoothed_sum_scaled_err"] {
        let vals: Vec<f64> = rep
            .aux
            .iter()
            .filter(|a| a.label == label)
            .map(|a| a.value)
            .collect();
        assert_eq!(vals.len(), 3);
        assert!(vals.iter().all(|&v| v.is_finite() && v < 1e3), "{label}: {vals:?}");
    }
    // Three feasible u = n! rows plus two u = n·n! rows.
    assert_eq!(rep.rows.len(), 5);
}

#[test]
fn thm4_rejects_out_of_range_n() {
    assert!(run_thm4(&[], 1000, 0, 1.0, TOL).is_err());
    assert!(run_thm4(&[1, 3], 1000, 0, 1.0, TOL).is_err());
    assert!(run_thm4(&[9], 1000, 0, 1.0, TOL).is_err());
}

#[test]
fn pl2_ratio_climbs_toward_two() {
    let m = LevyModel::new(1.0, 0.0, 1.0, half_normal())
        .unwrap()
        .with_bracket_step(0.05)
        .unwrap();
    let rep = run_prop_pl2(
        &m,
        &[1.0, 2.0, 3.0, 4.0],
        &[0.25, 0.5, 1.0, 2.0, 4.0],
        400_000,
        7,
        TOL,
    )
    .unwrap();
    assert_eq!(rep.verdict, Verdict::Consistent, "notes: {:?}", rep.notes);
    let last = rep.rows.last().unwrap();
    assert!(last.ratio > 1.5 && last.ratio_lo > 1.3, "last ratio {}", last.ratio);
    // Closed-form limit table: l(1) = 2Φ(1), all values strictly inside (1,2).
    let l1 = rep
        .aux
        .iter()
        .find(|a| a.label == "l_alpha" && a.x == 1.0)
        .unwrap();
    assert!((l1.value - 1.682_689).abs() < 1e-5);
    assert!(rep.aux.iter().all(|a| a.label != "l_alpha" || (a.value > 1.0 && a.value < 2.0)));
}

#[test]
fn prop_main_symmetric_upper_bound() {
    let m = LevyModel::new(0.0, 0.0, 1.0, fair_pm1()).unwrap();
    let rep = run_prop_main(&m, &[0.5, 1.5, 2.5], 400_000, 8, TOL).unwrap();
    assert_eq!(rep.verdict, Verdict::Consistent, "notes: {:?}", rep.notes);
    for (r, d) in rep.rows.iter().zip(rep.aux.iter().filter(|a| a.label == "D")) {
        assert!(d.value > 0.0);
        assert!(r.numerator <= 2.0 * r.denominator - d.value + 3.0 * r.numerator_err);
        assert!(r.ratio >= 1.0 - (r.ratio_hi - r.ratio));
    }
}

#[test]
fn prop_pl_discretized_half_normal_decays() {
    // The decay of the compound ratio is only logarithmic in u (the optimal
    // jump count grows with the level), so the trace needs a long grid to
    // fall below the 0.05 verdict line.
    let law = discretize(&half_normal(), 0.25).unwrap();
    let grid: Vec<f64> = (1..=5).map(|i| 80.0 * i as f64).collect();
    let rep = run_prop_pl(&law, 1.0, 1.0, &grid, TOL).unwrap();
    assert_eq!(rep.verdict, Verdict::Consistent, "notes: {:?}", rep.notes);
    for r in &rep.rows {
        assert!(r.ratio > 0.0 && r.ratio <= 1.0);
    }
    assert!(rep.rows.last().unwrap().ratio < 0.05);
    let ratios: Vec<f64> = rep.rows.iter().map(|r| r.ratio).collect();
    assert!(ratios.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{ratios:?}");
}

#[test]
fn prop_pl_refuses_exponential_jumps() {
    let law = exponential(1.0).unwrap();
    let grid: Vec<f64> = (2..=10).map(|i| i as f64).collect();
    let rep = run_prop_pl(&law, 1.0, 1.0, &grid, TOL).unwrap();
    assert_eq!(rep.verdict, Verdict::HypothesesUnverified);
    assert!(rep.rows.is_empty());
}
