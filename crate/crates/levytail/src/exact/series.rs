//! Poisson-weighted tail series with certified truncation.
//!
//! Every series here has kth term bounded by a Poisson weight, so the
//! truncation remainder is bounded by the Poisson upper tail
//! e^{-λ} λ^{K+1}/(K+1)! · 1/(1 - λ/(K+2)), valid once K + 2 > λ.

use crate::error::{Error, Result};
use crate::exact::table::{sk_tail, ConvolutionTable};
use crate::logspace::{log1m_exp, LogSumAcc};

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SeriesTruncation {
    /// Depth at which the series was cut.
    pub k_used: usize,
    /// log of the certified remainder bound (includes table pruning losses).
    pub remainder_log_bound: f64,
}

/// log of e^{-λ} λ^k / k!.
pub fn log_poisson_pmf(lambda: f64, k: usize) -> f64 {
    let mut log_fact = 0.0;
    for j in 1..=k {
        log_fact += (j as f64).ln();
    }
    -lambda + k as f64 * lambda.ln() - log_fact
}

/// log upper bound on e^{-λ} Σ_{j>k} λ^j/j! (geometric domination).
/// Requires λ < k + 2; returns +∞ otherwise.
fn log_poisson_tail_bound(lambda: f64, log_pmf_next: f64, k: usize) -> f64 {
    let q = lambda / (k + 2) as f64;
    if q >= 1.0 {
        f64::INFINITY
    } else {
        log_pmf_next - (1.0 - q).ln()
    }
}

/// Shared driver: sums terms t_k with |t_k| ≤ e^{-λ} λ^k/k! · scale, stopping
/// once the Poisson remainder is below tol × partial sum. While the partial
/// sum is still identically zero no relative target exists, so the driver
/// keeps consuming terms (later terms may be the first nonzero ones) and only
/// accepts a zero total, against the absolute tolerance, once the table is
/// exhausted.
fn run_poisson_series<F: FnMut(usize, f64) -> f64>(
    lambda: f64,
    tol: f64,
    k_max: usize,
    extra_loss_log: f64,
    mut term_log: F,
) -> Result<(f64, SeriesTruncation)> {
    assert!(lambda > 0.0 && tol > 0.0);
    let log_tol = tol.ln();
    let mut acc = LogSumAcc::new();
    let mut log_pmf = -lambda;
    let mut rem = f64::INFINITY;
    for k in 0..=k_max {
        acc.add(term_log(k, log_pmf));
        let log_pmf_next = log_pmf + lambda.ln() - ((k + 1) as f64).ln();
        rem = log_poisson_tail_bound(lambda, log_pmf_next, k);
        let partial = acc.log_value();
        if partial > f64::NEG_INFINITY && rem <= log_tol + partial {
            let bound = crate::logspace::log_sum_exp(rem, extra_loss_log);
            return Ok((
                partial.min(0.0),
                SeriesTruncation {
                    k_used: k,
                    remainder_log_bound: bound,
                },
            ));
        }
        log_pmf = log_pmf_next;
    }
    if acc.is_empty() && rem <= log_tol {
        return Ok((
            f64::NEG_INFINITY,
            SeriesTruncation {
                k_used: k_max,
                remainder_log_bound: crate::logspace::log_sum_exp(rem, extra_loss_log),
            },
        ));
    }
    Err(Error::InsufficientDepth {
        k_max,
        remainder_log: rem,
        tol,
    })
}

/// Poisson mixture over k of P(σB(1) + S_k > u - k·shift) terms.
pub(crate) fn run_for_mixture(
    lambda: f64,
    table: &ConvolutionTable,
    sigma: f64,
    u: f64,
    per_jump_shift: f64,
    tol: f64,
) -> Result<(f64, SeriesTruncation)> {
    run_poisson_series(lambda, tol, table.depth(), table.total_pruned_log(), |k, log_pmf| {
        let level = u - k as f64 * per_jump_shift;
        let t = if sigma > 0.0 {
            crate::exact::table::gaussian_smoothed_tail(table, k, sigma, level)
        } else {
            sk_tail(table, k, level)
        };
        log_pmf + t
    })
}

/// log P(Z(1) > u) for the compound Poisson sum Z(1) = S_{N(1)}.
pub fn compound_tail(
    lambda: f64,
    table: &ConvolutionTable,
    u: f64,
    tol: f64,
) -> Result<(f64, SeriesTruncation)> {
    run_poisson_series(lambda, tol, table.depth(), table.total_pruned_log(), |k, log_pmf| {
        log_pmf + sk_tail(table, k, u)
    })
}

/// log G(u) = log Σ_{k≥2} λ^k P(S_{k-1} > u)/k!  (no e^{-λ} factor).
pub fn g_u(
    lambda: f64,
    table: &ConvolutionTable,
    u: f64,
    tol: f64,
) -> Result<(f64, SeriesTruncation)> {
    let (v, tr) = run_poisson_series(
        lambda,
        tol,
        table.depth(),
        table.total_pruned_log(),
        |k, log_pmf| {
            if k < 2 {
                f64::NEG_INFINITY
            } else {
                log_pmf + sk_tail(table, k - 1, u)
            }
        },
    )?;
    // The series carries e^{-λ} inside the pmf; G does not.
    Ok((
        v + lambda,
        SeriesTruncation {
            k_used: tr.k_used,
            remainder_log_bound: tr.remainder_log_bound + lambda,
        },
    ))
}

/// a_k = max{1 - (m+1) log k / k, 0}.
pub fn a_k_seq(k: usize, m: usize) -> f64 {
    assert!(k >= 1 && m >= 1);
    (1.0 - (m + 1) as f64 * (k as f64).ln() / k as f64).max(0.0)
}

/// log Q(u) = log λe^{-λ} Σ_k ∫₀^{a_k} ((λt)^{k-1}/(k-1)!) P(S_k > u + bt) dt.
///
/// Each t-integral is evaluated exactly: t ↦ P(S_k > u + bt) is a step
/// function with breakpoints at (y - u)/b over support points y, and
/// ∫ t^{k-1} dt integrates in closed form on each piece. The kth term is
/// bounded by e^{-λ} λ^k a_k^k / k! ≤ Poisson pmf, so Poisson-tail
/// truncation applies.
pub fn q_u(
    lambda: f64,
    drift_b: f64,
    table: &ConvolutionTable,
    m: usize,
    u: f64,
    tol: f64,
) -> Result<(f64, SeriesTruncation)> {
    if !(drift_b > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Q(u) requires positive drift, got {drift_b}"
        )));
    }
    run_poisson_series(lambda, tol, table.depth(), table.total_pruned_log(), |k, log_pmf| {
        if k == 0 {
            return f64::NEG_INFINITY;
        }
        let a_k = a_k_seq(k, m);
        if a_k <= 0.0 {
            return f64::NEG_INFINITY;
        }
        // Piece boundaries in t on [0, a_k]: 0, clipped breakpoints, a_k.
        let fold = table.fold(k);
        let mut cuts: Vec<f64> = vec![0.0, a_k];
        for &(idx, _) in fold.points() {
            let t = (fold.value(idx) - u) / drift_b;
            if t > 0.0 && t < a_k {
                cuts.push(t);
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        // k!/(k-1)!/k = 1: term = e^{-λ} λ^k/k! Σ_pieces P·(t1^k - t0^k).
        let mut piece_acc = LogSumAcc::new();
        for pair in cuts.windows(2) {
            let (t0, t1) = (pair[0], pair[1]);
            if t1 <= t0 {
                continue;
            }
            let mid = 0.5 * (t0 + t1);
            let log_p = sk_tail(table, k, u + drift_b * mid);
            if log_p == f64::NEG_INFINITY {
                continue;
            }
            let log_dt_k = if t0 == 0.0 {
                k as f64 * t1.ln()
            } else {
                k as f64 * t1.ln() + log1m_exp(k as f64 * (t0.ln() - t1.ln()))
            };
            piece_acc.add(log_p + log_dt_k);
        }
        log_pmf + piece_acc.log_value()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::table::convolution_table;
    use crate::jump_laws::point_mass;

    fn pm1_table(depth: usize) -> ConvolutionTable {
        convolution_table(&point_mass(1.0).unwrap(), depth, 0.0).unwrap()
    }

    #[test]
    fn compound_tail_is_poisson_upper_cdf() {
        // Unit jumps: P(Z > u) = P(N >= ceil(u+)) with N ~ Poisson(1).
        let t = pm1_table(40);
        let e = std::f64::consts::E;
        let (v, tr) = compound_tail(1.0, &t, 0.5, 1e-12).unwrap();
        assert!((v.exp() - (1.0 - 1.0 / e)).abs() < 1e-12);
        assert!(tr.remainder_log_bound <= (1e-12f64).ln() + v + 1e-9);

        let (v, _) = compound_tail(1.0, &t, 2.5, 1e-12).unwrap();
        assert!((v.exp() - (1.0 - (1.0 + 1.0 + 0.5) / e)).abs() < 1e-12);

        let (v, _) = compound_tail(1.0, &t, -1.0, 1e-12).unwrap();
        assert!(v.abs() < 1e-11);
    }

    #[test]
    fn compound_tail_depth_errors() {
        let t = pm1_table(3);
        assert!(matches!(
            compound_tail(5.0, &t, 0.5, 1e-12),
            Err(Error::InsufficientDepth { .. })
        ));
    }

    #[test]
    fn compound_tail_beyond_support_is_zero_with_certificate() {
        let t = pm1_table(40);
        let (v, tr) = compound_tail(1.0, &t, 1e6, 1e-10).unwrap();
        assert_eq!(v, f64::NEG_INFINITY);
        assert!(tr.remainder_log_bound <= (1e-10f64).ln());
    }

    #[test]
    fn g_series_closed_forms() {
        let t = pm1_table(60);
        let lam = 1.3f64;
        let (v, _) = g_u(lam, &t, -1.0, 1e-12).unwrap();
        assert!((v.exp() - (lam.exp() - 1.0 - lam)).abs() < 1e-12);

        // Unit jumps at u = 1.5: needs S_{k-1} > 1.5, i.e. k >= 3.
        let (v, _) = g_u(lam, &t, 1.5, 1e-12).unwrap();
        assert!((v.exp() - (lam.exp() - 1.0 - lam - lam * lam / 2.0)).abs() < 1e-12);

        let (v, _) = g_u(lam, &t, 1e6, 1e-9).unwrap();
        assert_eq!(v, f64::NEG_INFINITY);
    }

    #[test]
    fn a_k_values() {
        assert_eq!(a_k_seq(1, 1), 1.0);
        assert!((a_k_seq(2, 1) - (1.0 - 2.0f64.ln())).abs() < 1e-15);
        assert_eq!(a_k_seq(2, 3), 0.0);
    }

    #[test]
    fn q_below_support_matches_closed_form() {
        // u very negative: every probability is 1 and the t-integral gives
        // a_k^k/k!, so Q = e^{-λ} Σ_k λ^k a_k^k / k!.
        let t = pm1_table(60);
        let m = 1; // jumps >= 1 and b = 0.5 < 1
        let lam = 1.0;
        let (v, _) = q_u(lam, 0.5, &t, m, -10.0, 1e-12).unwrap();
        let mut expect = 0.0;
        for k in 1..60 {
            expect += (log_poisson_pmf(lam, k) + k as f64 * a_k_seq(k, m).max(1e-300).ln()).exp();
        }
        assert!((v.exp() - expect).abs() < 1e-12, "{} vs {expect}", v.exp());
    }

    #[test]
    fn q_step_integral_hand_check() {
        // λ=1, b=1, unit jumps, u=0.5: m = 2 (S_1 = 1 is never > 1), so
        // a_2..a_4 = 0 and the k=1 piece integrates 1 over t in [0, 0.5).
        let t = pm1_table(60);
        let m = crate::exact::table::m_index(&t, 1.0).unwrap();
        assert_eq!(m, 2);
        let (v, _) = q_u(1.0, 1.0, &t, m, 0.5, 1e-12).unwrap();
        let e1 = (-1.0f64).exp();
        assert!((v.exp() - 0.5 * e1).abs() < 1e-8, "{}", v.exp());
    }

    #[test]
    fn q_monotone_in_u() {
        let t = pm1_table(60);
        let mut prev = f64::INFINITY;
        for i in 0..20 {
            let u = -2.0 + i as f64 * 0.35;
            let (v, _) = q_u(1.0, 1.0, &t, 2, u, 1e-10).unwrap();
            assert!(v.exp() <= prev + 1e-13);
            prev = v.exp();
        }
    }
}
