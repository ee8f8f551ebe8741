//! Iterated-convolution tables for partial sums S_k of i.i.d. jumps.

use crate::error::{Error, Result};
use crate::jump_laws::{DiscreteMasses, JumpLaw};
use crate::logspace::{log_sum_exp, LogSumAcc};
use crate::normal::log_norm_tail;

/// Default cap on the support size of any fold.
pub const SUPPORT_CAP: usize = 10_000_000;
/// Default per-fold pruning budget.
pub const DEFAULT_PRUNE_EPS: f64 = 1e-20;

/// Mass lists of S_0, S_1, ..., S_K for a discrete jump law, with per-fold
/// pruning bookkeeping.
#[derive(Debug, Clone)]
pub struct ConvolutionTable {
    base: DiscreteMasses,
    folds: Vec<DiscreteMasses>,
    /// pruned_log[k] = log of the cumulative mass pruned from S_0..S_k.
    pruned_log: Vec<f64>,
}

/// Builds the table of k-fold sums for `law` up to depth `k_max`.
pub fn convolution_table(law: &JumpLaw, k_max: usize, prune_eps: f64) -> Result<ConvolutionTable> {
    if k_max < 1 {
        return Err(Error::InvalidParameter(format!(
            "table depth must be at least 1, got {k_max}"
        )));
    }
    if !(prune_eps >= 0.0) || prune_eps > 1e-20 {
        return Err(Error::InvalidParameter(format!(
            "prune_eps must lie in [0, 1e-20], got {prune_eps}"
        )));
    }
    let base = law.masses()?.clone();
    let mut folds = Vec::with_capacity(k_max + 1);
    let mut pruned_log = Vec::with_capacity(k_max + 1);
    folds.push(DiscreteMasses::point(base.step(), 0));
    pruned_log.push(f64::NEG_INFINITY);
    for k in 1..=k_max {
        let (next, dropped) = folds[k - 1].convolve(&base, prune_eps, SUPPORT_CAP, k)?;
        pruned_log.push(log_sum_exp(pruned_log[k - 1], dropped));
        folds.push(next);
    }
    Ok(ConvolutionTable {
        base,
        folds,
        pruned_log,
    })
}

impl ConvolutionTable {
    pub fn base(&self) -> &DiscreteMasses {
        &self.base
    }

    /// Largest fold index K stored in the table.
    pub fn depth(&self) -> usize {
        self.folds.len() - 1
    }

    /// Mass list of S_k.
    pub fn fold(&self, k: usize) -> &DiscreteMasses {
        &self.folds[k]
    }

    /// log of the cumulative mass pruned across all folds.
    pub fn total_pruned_log(&self) -> f64 {
        *self.pruned_log.last().unwrap()
    }

    /// log of the mass pruned up to and including fold k.
    pub fn pruned_log(&self, k: usize) -> f64 {
        self.pruned_log[k]
    }
}

/// log P(S_k > u); k = 0 treats S_0 = 0.
pub fn sk_tail(table: &ConvolutionTable, k: usize, u: f64) -> f64 {
    assert!(k <= table.depth(), "fold {k} beyond table depth {}", table.depth());
    if k == 0 {
        return if u < 0.0 { 0.0 } else { f64::NEG_INFINITY };
    }
    table.folds[k].log_tail(u)
}

/// Smallest k with P(S_k > b) > 0.
pub fn m_index(table: &ConvolutionTable, b: f64) -> Result<usize> {
    for k in 1..=table.depth() {
        if sk_tail(table, k, b) > f64::NEG_INFINITY {
            return Ok(k);
        }
    }
    Err(Error::IndexNotFound {
        b,
        k_max: table.depth(),
    })
}

/// log P(σ B(1) + S_k > u): the discrete sum smoothed by a Gaussian,
/// exact over the support (no quadrature beyond the normal-tail evaluation).
pub fn gaussian_smoothed_tail(table: &ConvolutionTable, k: usize, sigma: f64, u: f64) -> f64 {
    assert!(sigma > 0.0, "gaussian smoothing requires sigma > 0");
    if k == 0 {
        return log_norm_tail(u / sigma);
    }
    let mut acc = LogSumAcc::new();
    let fold = table.fold(k);
    for &(idx, lm) in fold.points() {
        acc.add(lm + log_norm_tail((u - fold.value(idx)) / sigma));
    }
    acc.log_value().min(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jump_laws::{factorial_law, fair_pm1, point_mass};
    use crate::normal::norm_tail;

    #[test]
    fn point_mass_folds_are_points() {
        let t = convolution_table(&point_mass(1.0).unwrap(), 5, 0.0).unwrap();
        for k in 0..=5 {
            let m = t.fold(k);
            assert_eq!(m.points(), &[(k as i128, 0.0)]);
        }
    }

    #[test]
    fn fair_pm1_fourth_fold_is_binomial() {
        let t = convolution_table(&fair_pm1(), 4, 0.0).unwrap();
        let m = t.fold(4);
        let expect = [
            (-4i128, 1.0 / 16.0),
            (-2, 4.0 / 16.0),
            (0, 6.0 / 16.0),
            (2, 4.0 / 16.0),
            (4, 1.0 / 16.0),
        ];
        for (&(i, lm), &(ei, ep)) in m.points().iter().zip(expect.iter()) {
            assert_eq!(i, ei);
            assert!((lm.exp() - ep).abs() < 1e-14);
        }
    }

    #[test]
    fn factorial_three_fold_bottom_mass() {
        // Only 1+1+1 lands on 3, so P(S_3 = 3) = (1/(e-1))^3.
        let t = convolution_table(&factorial_law(1.0).unwrap(), 3, 0.0).unwrap();
        let m = t.fold(3);
        let p3 = m.points().iter().find(|p| p.0 == 3).unwrap().1;
        let expect = 3.0 * (1.0 / (std::f64::consts::E - 1.0)).ln();
        assert!((p3 - expect).abs() < 1e-12);
    }

    #[test]
    fn fold_recurrence_spot_check() {
        // S_k = S_{k-1} * base, re-verified by a direct re-convolution.
        let t = convolution_table(&factorial_law(1.0).unwrap(), 6, 0.0).unwrap();
        let redo = t.fold(4).convolve(t.base(), 0.0, SUPPORT_CAP, 5).unwrap().0;
        assert_eq!(redo.len(), t.fold(5).len());
        for (a, b) in redo.points().iter().zip(t.fold(5).points()) {
            assert_eq!(a.0, b.0);
            assert!((a.1 - b.1).abs() < 1e-11);
        }
    }

    #[test]
    fn sk_tail_examples() {
        let pm = convolution_table(&fair_pm1(), 4, 0.0).unwrap();
        assert_eq!(sk_tail(&pm, 0, -1.0), 0.0);
        assert_eq!(sk_tail(&pm, 0, 0.0), f64::NEG_INFINITY);
        assert!((sk_tail(&pm, 2, 0.0).exp() - 0.25).abs() < 1e-14);

        let fact = convolution_table(&factorial_law(1.0).unwrap(), 2, 0.0).unwrap();
        let expect = 1.0 - 1.0 / (std::f64::consts::E - 1.0);
        assert!((sk_tail(&fact, 1, 1.5).exp() - expect).abs() < 1e-12);
    }

    #[test]
    fn m_index_examples() {
        let pm1 = convolution_table(&point_mass(1.0).unwrap(), 5, 0.0).unwrap();
        assert_eq!(m_index(&pm1, 0.5).unwrap(), 1);
        assert_eq!(m_index(&pm1, 2.5).unwrap(), 3);
        assert!(m_index(&pm1, 10.0).is_err());

        let pm = convolution_table(&fair_pm1(), 5, 0.0).unwrap();
        assert_eq!(m_index(&pm, 1.5).unwrap(), 2);
    }

    #[test]
    fn smoothed_tail_examples() {
        let pm1 = convolution_table(&point_mass(1.0).unwrap(), 3, 0.0).unwrap();
        assert!((gaussian_smoothed_tail(&pm1, 0, 1.0, 1.0).exp() - norm_tail(1.0)).abs() < 1e-12);
        assert!((gaussian_smoothed_tail(&pm1, 3, 1.0, 3.0).exp() - 0.5).abs() < 1e-12);

        let pm = convolution_table(&fair_pm1(), 2, 0.0).unwrap();
        assert!((gaussian_smoothed_tail(&pm, 1, 1.0, 0.0).exp() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pruning_budget_respected() {
        let t = convolution_table(&factorial_law(1.0).unwrap(), 12, 1e-20).unwrap();
        assert!(t.total_pruned_log() < (1e-15f64).ln());
    }
}
