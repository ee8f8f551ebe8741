//! Auxiliary closed forms and series-coefficient integrals used by the
//! factorial-jump experiments: exponential moments of the normal law, the
//! I_k weights, and the J_k crossing weights.

use crate::error::{Error, Result};
use crate::exact::table::ConvolutionTable;
use crate::logspace::{log_diff_exp, LogSumAcc};
use crate::normal::{log_norm_cdf, log_norm_tail, norm_cdf};
use crate::quad::adaptive_simpson;

/// (m₊, m₋, l) for the standard normal: m± = E[e^{±αB(1)} 1{±B(1)>0}]-style
/// one-sided exponential moments m₊ = e^{α²/2}Φ(α), m₋ = e^{α²/2}(1-Φ(α)),
/// and the limit constant l = 2m₊/(m₊+m₋) = 2Φ(α).
pub fn exp_moments_normal(alpha: f64) -> Result<(f64, f64, f64)> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "exponential-moment parameter must be positive, got {alpha}"
        )));
    }
    let scale = (0.5 * alpha * alpha).exp();
    let phi = norm_cdf(alpha);
    Ok((scale * phi, scale * (1.0 - phi), 2.0 * phi))
}

fn log_factorial(n: usize) -> f64 {
    (1..=n).map(|j| (j as f64).ln()).sum()
}

/// I_k = (1/(e(k-1)!)) ∫ P(S_{k-1} > s) φ(s) ds, exact over the step
/// structure of the S_{k-1} tail (k >= 2).
pub fn ik_value(k: usize, table: &ConvolutionTable) -> Result<f64> {
    if k < 2 || k - 1 > table.depth() {
        return Err(Error::InvalidParameter(format!(
            "ik_value needs 2 <= k <= depth+1, got k={k}, depth={}",
            table.depth()
        )));
    }
    let fold = table.fold(k - 1);
    let pts = fold.points();
    let mut acc = LogSumAcc::new();
    // s below the support: tail is 1, Gaussian weight Φ(y_min).
    acc.add(log_norm_cdf(fold.value(pts[0].0)));
    for i in 0..pts.len() - 1 {
        let a = fold.value(pts[i].0);
        let b = fold.value(pts[i + 1].0);
        let log_w = log_diff_exp(log_norm_tail(a), log_norm_tail(b));
        acc.add(fold.log_tail(a) + log_w);
    }
    Ok((acc.log_value() - 1.0 - log_factorial(k - 1)).exp())
}

/// Step pieces of s ↦ P(S_{k-2} <= s < S_{k-1}) = P(S_{k-1} > s) - P(S_{k-2} > s):
/// (piece start, piece end, log of the constant value on the piece).
///
/// Pieces starting more than 80 above the lowest breakpoint are dropped: the
/// Gaussian factor e^{-a²/(2y)} with y <= 1 makes them smaller than the
/// leading piece by a factor below e^{-3000}.
fn crossing_pieces(k: usize, table: &ConvolutionTable) -> Vec<(f64, f64, f64)> {
    let lo = table.fold(k - 2);
    let hi = table.fold(k - 1);
    let mut cuts: Vec<f64> = lo
        .points()
        .iter()
        .map(|&(i, _)| lo.value(i))
        .chain(hi.points().iter().map(|&(i, _)| hi.value(i)))
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let a_min = cuts[0];
    let mut pieces = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a > a_min + 80.0 {
            break;
        }
        let t_hi = hi.log_tail(a);
        let t_lo = lo.log_tail(a);
        if t_hi > t_lo {
            pieces.push((a, b.min(a_min + 160.0), log_diff_exp(t_hi, t_lo)));
        }
    }
    pieces
}

/// log of the crossing step function integrated against the N(0, y) density.
fn crossing_weight_log(pieces: &[(f64, f64, f64)], y: f64) -> f64 {
    let sqrt_y = y.sqrt();
    let mut acc = LogSumAcc::new();
    for &(a, b, delta) in pieces {
        let gauss = log_diff_exp(log_norm_tail(a / sqrt_y), log_norm_tail(b / sqrt_y));
        acc.add(delta + gauss);
    }
    acc.log_value()
}

/// J_k = (1/(e(k-2)!)) ∫₀¹ w_k(y) y^{k-1}(1-y) dy where w_k(y) integrates
/// the level-crossing probability P(S_{k-2} <= s < S_{k-1}) against N(0, y).
///
/// The crossing event is the corrected one: with strictly positive jumps the
/// variant with the inequalities swapped is empty (see `jk_value_swapped`).
pub fn jk_value(k: usize, table: &ConvolutionTable) -> Result<f64> {
    if k < 3 || k - 1 > table.depth() {
        return Err(Error::InvalidParameter(format!(
            "jk_value needs 3 <= k <= depth+1, got k={k}, depth={}",
            table.depth()
        )));
    }
    let pieces = crossing_pieces(k, table);
    let integrand = |y: f64| -> f64 {
        if y <= 0.0 || y >= 1.0 {
            return 0.0;
        }
        let log_w = crossing_weight_log(&pieces, y);
        (log_w + (k - 1) as f64 * y.ln() + (1.0 - y).ln()).exp()
    };
    let outer = adaptive_simpson(integrand, 0.0, 1.0, 1e-8, 1e-320);
    Ok(outer * (-1.0 - log_factorial(k - 2)).exp())
}

/// The weight under the swapped crossing event {S_{k-1} <= s < S_{k-2}}.
///
/// For laws with strictly positive jumps S_{k-1} >= S_{k-2} almost surely,
/// so the event is empty and the value is exactly 0; only that case is
/// supported (the joint law would be needed otherwise).
pub fn jk_value_swapped(k: usize, table: &ConvolutionTable) -> Result<f64> {
    if k < 3 {
        return Err(Error::InvalidParameter(format!(
            "jk_value_swapped needs k >= 3, got {k}"
        )));
    }
    if table.base().min_value() <= 0.0 {
        return Err(Error::InvalidParameter(
            "swapped crossing weight is only defined for strictly positive jumps".into(),
        ));
    }
    Ok(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::table::convolution_table;
    use crate::jump_laws::factorial_law;
    use crate::normal::norm_tail;

    fn fact_table(depth: usize) -> ConvolutionTable {
        convolution_table(&factorial_law(1.0).unwrap(), depth, 1e-20).unwrap()
    }

    #[test]
    fn exp_moment_closed_forms() {
        let (mp, mm, l) = exp_moments_normal(1.0).unwrap();
        let e_half = (0.5f64).exp();
        assert!((mp - e_half * norm_cdf(1.0)).abs() < 1e-14);
        assert!((mm - e_half * (1.0 - norm_cdf(1.0))).abs() < 1e-14);
        assert!((l - 1.682_689_492_137_086).abs() < 1e-9);

        let (_, _, l_small) = exp_moments_normal(1e-9).unwrap();
        assert!((l_small - 1.0).abs() < 1e-6);

        for &a in &[0.1, 0.5, 2.0, 5.0] {
            let (_, _, l) = exp_moments_normal(a).unwrap();
            assert!(l > 1.0 && l < 2.0, "alpha = {a}");
        }
    }

    #[test]
    fn i2_against_direct_quadrature() {
        // I_2 = (1/e) ∫ P(S_1 > s) φ(s) ds; oracle by brute-force Riemann sum.
        let t = fact_table(4);
        let got = ik_value(2, &t).unwrap();
        let law = factorial_law(1.0).unwrap();
        let n = 4_000_000;
        let (a, b) = (-10.0f64, 40.0f64);
        let h = (b - a) / n as f64;
        let mut oracle = 0.0;
        for i in 0..n {
            let s = a + (i as f64 + 0.5) * h;
            oracle += law.tail(s) * crate::normal::norm_pdf(s) * h;
        }
        oracle /= std::f64::consts::E;
        assert!((got - oracle).abs() < 1e-7, "{got} vs {oracle}");
        // Dominant term: Φ(1)/e plus a positive correction below 0.07.
        let main = norm_cdf(1.0) / std::f64::consts::E;
        assert!(got > main && got - main < 0.07, "{got}");
    }

    #[test]
    fn ik_bounds_and_sum() {
        let t = fact_table(12);
        let mut sum = 0.0;
        for k in 2..=12 {
            let v = ik_value(k, &t).unwrap();
            let cap = (-1.0 - log_factorial(k - 1)).exp();
            assert!(v > 0.0 && v <= cap + 1e-15, "k = {k}");
            sum += v;
        }
        assert!(sum <= 1.0);
    }

    #[test]
    fn j3_positive_and_bounded() {
        let t = fact_table(4);
        let j3 = jk_value(3, &t).unwrap();
        assert!(j3 > 0.0);
        // Dropping the jump-sum constraint bounds the crossing weight by
        // P(N(0,y) <= -1) = Φ̄(1/√y).
        let bound = adaptive_simpson(
            |y: f64| {
                if y <= 0.0 {
                    0.0
                } else {
                    norm_tail(1.0 / y.sqrt()) * y * y * (1.0 - y)
                }
            },
            0.0,
            1.0,
            1e-10,
            1e-320,
        ) / std::f64::consts::E;
        assert!(j3 <= bound + 1e-12, "{j3} vs {bound}");
    }

    #[test]
    fn jk_nonnegative_and_swapped_empty() {
        let t = fact_table(8);
        for k in 3..=8 {
            assert!(jk_value(k, &t).unwrap() >= 0.0);
            assert_eq!(jk_value_swapped(k, &t).unwrap(), 0.0);
        }
    }

    #[test]
    fn j3_against_direct_double_quadrature() {
        // Independent oracle: crossing probability for k=3 is
        // P(S_1 <= s < S_2) = P(S_2 > s) - P(S_1 > s), integrated directly.
        let t = fact_table(4);
        let law = factorial_law(1.0).unwrap();
        let two = convolution_table(&law, 2, 0.0).unwrap();
        let inner = |y: f64| -> f64 {
            let n = 20_000;
            let (a, b) = (0.5f64, 30.0f64);
            let h = (b - a) / n as f64;
            let mut s_acc = 0.0;
            for i in 0..n {
                let s = a + (i as f64 + 0.5) * h;
                let diff = crate::exact::table::sk_tail(&two, 2, s).exp()
                    - crate::exact::table::sk_tail(&two, 1, s).exp();
                s_acc += diff * crate::normal::norm_pdf(s / y.sqrt()) / y.sqrt() * h;
            }
            s_acc
        };
        let mut oracle = 0.0;
        let m = 400;
        for i in 0..m {
            let y = (i as f64 + 0.5) / m as f64;
            oracle += inner(y) * y * y * (1.0 - y) / m as f64;
        }
        oracle /= std::f64::consts::E;
        let got = jk_value(3, &t).unwrap();
        assert!(
            (got - oracle).abs() < 2e-4 * oracle.max(1e-12) + 1e-10,
            "{got} vs {oracle}"
        );
    }
}
