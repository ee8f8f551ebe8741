//! First-passage quantities of the jump random walk: the probability that
//! S_n crosses a level u at step n without having crossed before, and the
//! series D(u) built from those terms.

use crate::error::{Error, Result};
use crate::exact::series::SeriesTruncation;
use crate::exact::table::SUPPORT_CAP;
use crate::jump_laws::{DiscreteMasses, JumpLaw, NORMALIZATION_TOL};
use crate::logspace::LogSumAcc;

/// log P(max_{1<=k<=n-1} S_k <= u, S_n > u).
///
/// Computed by iterated convolution truncated at the barrier: keep only the
/// sub-probability mass that has stayed at or below u, convolve with one more
/// jump, and read off the mass that escapes above u at step n.
pub fn barrier_tail(law: &JumpLaw, n: usize, u: f64) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidParameter("barrier step count must be >= 1".into()));
    }
    let base = law.masses()?;
    if n == 1 {
        return Ok(base.log_tail(u));
    }
    let (mut below, _) = base.split_at_barrier(u);
    for step in 2..=n {
        if below.is_empty() {
            return Ok(f64::NEG_INFINITY);
        }
        let survived = DiscreteMasses::new(base.step(), below)?;
        let (next, _) = survived.convolve(base, 0.0, SUPPORT_CAP, step)?;
        let (kept, escaped_log) = next.split_at_barrier(u);
        if step == n {
            return Ok(escaped_log);
        }
        below = kept;
    }
    unreachable!()
}

/// log D(u) = log e^{-λ}[λ P(X₁>u) + Σ_{n≥2} (λⁿ/n!) P(max_{k<n} S_k ≤ u, S_n > u)].
///
/// Requires a symmetric jump law (checked against the mass list).
pub fn d_u(lambda: f64, law: &JumpLaw, u: f64, tol: f64) -> Result<(f64, SeriesTruncation)> {
    if !(lambda > 0.0 && tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "d_u needs lambda > 0 and tol > 0, got lambda={lambda}, tol={tol}"
        )));
    }
    let residual = law.masses()?.symmetry_residual();
    if residual > NORMALIZATION_TOL {
        return Err(Error::NotSymmetric { residual });
    }
    let log_tol = tol.ln();
    let mut acc = LogSumAcc::new();
    let mut log_pmf = -lambda; // e^{-λ} λ^n / n! at n = 0
    for n in 0..=400usize {
        if n >= 1 {
            acc.add(log_pmf + barrier_tail(law, n, u)?);
        }
        let log_pmf_next = log_pmf + lambda.ln() - ((n + 1) as f64).ln();
        let q = lambda / (n + 2) as f64;
        let rem = if q >= 1.0 {
            f64::INFINITY
        } else {
            log_pmf_next - (1.0 - q).ln()
        };
        let partial = acc.log_value();
        let target = if partial > f64::NEG_INFINITY {
            log_tol + partial
        } else {
            log_tol
        };
        if rem <= target {
            return Ok((
                partial.min(0.0),
                SeriesTruncation {
                    k_used: n,
                    remainder_log_bound: rem,
                },
            ));
        }
        log_pmf = log_pmf_next;
    }
    Err(Error::InsufficientDepth {
        k_max: 400,
        remainder_log: log_pmf,
        tol,
    })
}
