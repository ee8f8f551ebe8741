//! Exact discrete mass lists on an integer-scaled support.
//!
//! Support values are `index * step` with `index: i128`, so lattice
//! arithmetic in convolutions is exact even for factorial-sized supports
//! (28! still fits an i128 with room for ~10^8-fold sums). Probabilities are
//! carried as natural logs.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::logspace::{log_sum_exp, LogSumAcc};

/// Relative slack allowed on the "masses sum to 1" invariant.
pub const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct DiscreteMasses {
    step: f64,
    /// (support index, log probability), strictly increasing in index.
    points: Vec<(i128, f64)>,
    /// suffix_log[i] = log sum of masses from point i to the end.
    suffix_log: Vec<f64>,
    /// Linear-space cumulative masses for inverse-CDF sampling.
    cum: Vec<f64>,
}

impl DiscreteMasses {
    /// Build from (index, log-mass) pairs; duplicates are merged.
    pub fn new(step: f64, mut points: Vec<(i128, f64)>) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "mass list step must be positive and finite, got {step}"
            )));
        }
        points.retain(|&(_, lm)| lm != f64::NEG_INFINITY);
        if points.is_empty() {
            return Err(Error::InvalidParameter(
                "mass list must contain at least one point".into(),
            ));
        }
        points.sort_unstable_by_key(|&(idx, _)| idx);
        let mut merged: Vec<(i128, f64)> = Vec::with_capacity(points.len());
        for (idx, lm) in points {
            match merged.last_mut() {
                Some(last) if last.0 == idx => last.1 = log_sum_exp(last.1, lm),
                _ => merged.push((idx, lm)),
            }
        }
        let mut suffix_log = vec![f64::NEG_INFINITY; merged.len() + 1];
        let mut acc = LogSumAcc::new();
        for i in (0..merged.len()).rev() {
            acc.add(merged[i].1);
            suffix_log[i] = acc.log_value();
        }
        let mut cum = Vec::with_capacity(merged.len());
        let mut running = 0.0;
        for &(_, lm) in &merged {
            running += lm.exp();
            cum.push(running);
        }
        Ok(Self {
            step,
            points: merged,
            suffix_log,
            cum,
        })
    }

    /// Point mass at `index * step`.
    pub fn point(step: f64, index: i128) -> Self {
        Self::new(step, vec![(index, 0.0)]).expect("point mass is always valid")
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[(i128, f64)] {
        &self.points
    }

    #[inline]
    pub fn value(&self, index: i128) -> f64 {
        index as f64 * self.step
    }

    pub fn min_value(&self) -> f64 {
        self.value(self.points[0].0)
    }

    pub fn max_value(&self) -> f64 {
        self.value(self.points[self.points.len() - 1].0)
    }

    /// log of the total mass (0.0 for a properly normalized law).
    pub fn total_log_mass(&self) -> f64 {
        self.suffix_log[0]
    }

    /// Errors unless the masses sum to 1 within `NORMALIZATION_TOL`.
    pub fn check_normalized(&self) -> Result<()> {
        let total = self.total_log_mass().exp();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidParameter(format!(
                "discrete masses sum to {total}, outside 1 +/- {NORMALIZATION_TOL}"
            )));
        }
        Ok(())
    }

    fn first_index_above(&self, u: f64) -> usize {
        self.points.partition_point(|&(idx, _)| self.value(idx) <= u)
    }

    /// log P(X > u), exact suffix sum.
    pub fn log_tail(&self, u: f64) -> f64 {
        self.suffix_log[self.first_index_above(u)]
    }

    /// log P(X >= u).
    pub fn log_tail_inclusive(&self, u: f64) -> f64 {
        let i = self.points.partition_point(|&(idx, _)| self.value(idx) < u);
        self.suffix_log[i]
    }

    /// P(X > u) in linear space.
    pub fn tail(&self, u: f64) -> f64 {
        self.log_tail(u).exp()
    }

    /// Inverse-CDF sample of a support value.
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let total = *self.cum.last().unwrap();
        let x: f64 = rng.random::<f64>() * total;
        let i = self.cum.partition_point(|&c| c < x).min(self.points.len() - 1);
        self.value(self.points[i].0)
    }

    /// Max over support pairs of |m(y) - m(-y)| in linear space.
    pub fn symmetry_residual(&self) -> f64 {
        let by_idx: HashMap<i128, f64> = self.points.iter().copied().collect();
        let mut worst = 0.0f64;
        for &(idx, lm) in &self.points {
            let other = by_idx.get(&(-idx)).copied().unwrap_or(f64::NEG_INFINITY);
            worst = worst.max((lm.exp() - other.exp()).abs());
        }
        worst
    }

    /// Convolution with `other` (same step), pruning the smallest masses.
    ///
    /// Masses are dropped greedily (smallest first) while their cumulative
    /// linear weight stays at or below `prune_eps`; the log of the pruned
    /// weight is returned alongside the result. `cap` bounds the support size
    /// of the result before pruning.
    pub fn convolve(
        &self,
        other: &DiscreteMasses,
        prune_eps: f64,
        cap: usize,
        fold: usize,
    ) -> Result<(DiscreteMasses, f64)> {
        assert!(
            (self.step - other.step).abs() == 0.0,
            "convolution requires identical steps"
        );
        let mut sums: HashMap<i128, f64> = HashMap::with_capacity(self.len() * 2);
        for &(i, lmi) in &self.points {
            for &(j, lmj) in &other.points {
                let entry = sums.entry(i + j).or_insert(f64::NEG_INFINITY);
                *entry = log_sum_exp(*entry, lmi + lmj);
            }
        }
        if sums.len() > cap {
            return Err(Error::SupportCapExceeded { fold, cap });
        }
        let mut pts: Vec<(i128, f64)> = sums.into_iter().collect();
        let pruned_log = if prune_eps > 0.0 {
            prune_smallest(&mut pts, prune_eps.ln())
        } else {
            f64::NEG_INFINITY
        };
        Ok((DiscreteMasses::new(self.step, pts)?, pruned_log))
    }

    /// Splits masses at the barrier `u`: returns the part at or below `u` and
    /// the log-mass strictly above `u`.
    pub fn split_at_barrier(&self, u: f64) -> (Vec<(i128, f64)>, f64) {
        let cut = self.first_index_above(u);
        (self.points[..cut].to_vec(), self.suffix_log[cut])
    }
}

/// Drops the smallest masses while their cumulative log-weight stays <= `log_budget`.
/// Returns the log of the pruned weight.
fn prune_smallest(pts: &mut Vec<(i128, f64)>, log_budget: f64) -> f64 {
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_unstable_by(|&a, &b| pts[a].1.total_cmp(&pts[b].1));
    let mut acc = LogSumAcc::new();
    let mut dropped: Vec<bool> = vec![false; pts.len()];
    let mut pruned_log = f64::NEG_INFINITY;
    for &i in &order {
        let mut trial = acc;
        trial.add(pts[i].1);
        if trial.log_value() > log_budget {
            break;
        }
        acc = trial;
        pruned_log = acc.log_value();
        dropped[i] = true;
    }
    if pruned_log != f64::NEG_INFINITY {
        let mut keep = Vec::with_capacity(pts.len());
        for (i, p) in pts.iter().enumerate() {
            if !dropped[i] {
                keep.push(*p);
            }
        }
        *pts = keep;
    }
    pruned_log
}
