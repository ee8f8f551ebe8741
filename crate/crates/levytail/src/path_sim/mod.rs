//! Exact-in-distribution Monte Carlo for X(t) = σB(t) + Z(t) - bt on [0,1].
//!
//! Paths are represented by their jump skeleton (Poisson epochs, jump sizes,
//! Brownian node values); the running supremum is completed by sampling the
//! conditional bridge maximum on each inter-jump interval, so there is no
//! time-discretization bias anywhere.
//!
//! Trials run in fixed-size blocks, each on its own counter-derived RNG
//! substream. Hit counters are integers, so merging is order-independent and
//! results are identical for any worker count, with or without the
//! `parallel` feature.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};

use crate::error::{Error, Result};
use crate::exact::{gaussian_smoothed_tail, model_tail, LevyModel};
use crate::jump_laws::JumpLaw;
use crate::normal::log_norm_tail;

/// Trials per RNG substream block.
pub const BLOCK_SIZE: u64 = 8192;

/// Numerator hit count below which a ratio row is flagged low-confidence.
pub const LOW_CONFIDENCE_HITS: u64 = 100;

/// Inverse of the conditional bridge-maximum tail
/// P(M > m | endpoints a, c over span t) = exp(-2(m-a)(m-c)/(σ²t)).
///
/// The drift over the interval cancels once the endpoints are conditioned
/// on, so this applies to σB(s) - bs segments directly.
pub fn bridge_max_inverse(a: f64, c: f64, t: f64, sigma: f64, p: f64) -> f64 {
    debug_assert!(t > 0.0 && sigma > 0.0);
    let p = p.clamp(f64::MIN_POSITIVE, 1.0);
    let q = -sigma * sigma * t * p.ln() / 2.0;
    let d = a - c;
    0.5 * ((a + c) + (d * d + 4.0 * q).sqrt())
}

/// One simulated path, reduced to the summary fields the events need.
#[derive(Debug, Clone)]
pub struct PathSample {
    /// Number of jumps in (0,1).
    pub tau: usize,
    /// X(1).
    pub endpoint: f64,
    /// sup over [0,1] of X(t), exact in distribution.
    pub supremum: f64,
    /// X(Γ_{τ-1}) with Γ₀ = 0; None when τ = 0.
    pub penultimate: Option<f64>,
    /// sup of σB(t) alone.
    pub sup_b: f64,
    /// sup of Z(t) alone (0 when no jump helps).
    pub sup_z: f64,
    /// Z(1) - b, the endpoint with the Gaussian part removed.
    pub endpoint_no_gauss: f64,
    /// σB(1).
    pub gauss_end: f64,
}

/// Draws one path of the model. The draw order is fixed: jump count, epochs,
/// jump sizes, Brownian increments, bridge maxima for X, bridge maxima for B.
pub fn sample_path(model: &LevyModel, rng: &mut ChaCha8Rng) -> PathSample {
    let law = model.jumps();
    let tau = Poisson::new(model.lambda()).expect("validated lambda").sample(rng) as usize;
    let mut epochs: Vec<f64> = (0..tau).map(|_| rng.random::<f64>()).collect();
    epochs.sort_by(f64::total_cmp);
    let jumps: Vec<f64> = (0..tau).map(|_| law.sample(rng)).collect();
    build_sample(model, &epochs, &jumps, rng)
}

/// Completes a path from a fixed jump skeleton: Brownian node values, the
/// running supremum through per-interval bridge maxima, and the summary
/// fields. Split out so tests can force specific skeletons.
pub(crate) fn build_sample(
    model: &LevyModel,
    epochs: &[f64],
    jumps: &[f64],
    rng: &mut ChaCha8Rng,
) -> PathSample {
    let sigma = model.sigma();
    let b = model.drift_b();
    let tau = epochs.len();
    debug_assert_eq!(jumps.len(), tau);

    // Node times 0 = t_0 < t_1 < ... < t_tau < t_{tau+1} = 1.
    let mut times = Vec::with_capacity(tau + 2);
    times.push(0.0);
    times.extend_from_slice(&epochs);
    times.push(1.0);

    // Brownian values at the nodes.
    let mut bvals = vec![0.0f64; tau + 2];
    if sigma > 0.0 {
        for i in 1..tau + 2 {
            let dt = (times[i] - times[i - 1]).max(0.0);
            let z: f64 = StandardNormal.sample(rng);
            bvals[i] = bvals[i - 1] + sigma * dt.sqrt() * z;
        }
    }

    // Walk the intervals: left value is the post-jump value at t_i, right
    // value is the pre-jump value at t_{i+1} (the left limit). Each interval
    // uses one uniform for both the X and the bare-B bridge maxima, which
    // couples them so that sup X <= sup B + sup Z holds pathwise when the
    // drift is nonnegative.
    let mut z_prefix = 0.0f64;
    let mut sup_z = 0.0f64;
    let mut sup_b = 0.0f64;
    let mut supremum = 0.0f64; // X(0) = 0
    let mut post_jump_values = Vec::with_capacity(tau);
    let mut left = 0.0f64;
    for i in 0..tau + 1 {
        let t_right = times[i + 1];
        let right_pre = bvals[i + 1] + z_prefix - b * t_right;
        let seg_max = if sigma > 0.0 {
            let dt = (t_right - times[i]).max(f64::MIN_POSITIVE);
            let p: f64 = rng.random();
            sup_b = sup_b.max(bridge_max_inverse(bvals[i], bvals[i + 1], dt, sigma, p));
            bridge_max_inverse(left, right_pre, dt, sigma, p)
        } else {
            left.max(right_pre)
        };
        supremum = supremum.max(seg_max);
        if i < tau {
            z_prefix += jumps[i];
            sup_z = sup_z.max(z_prefix);
            left = right_pre + jumps[i];
            supremum = supremum.max(left);
            post_jump_values.push(left);
        } else {
            left = right_pre;
        }
    }
    let endpoint = left;

    let penultimate = match tau {
        0 => None,
        1 => Some(0.0),
        _ => Some(post_jump_values[tau - 2]),
    };

    PathSample {
        tau,
        endpoint,
        supremum,
        penultimate,
        sup_b,
        sup_z,
        endpoint_no_gauss: z_prefix - b,
        gauss_end: if sigma > 0.0 { bvals[tau + 1] } else { 0.0 },
    }
}

/// Path events whose probabilities the experiments estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum EventKind {
    /// {X(1) > u}.
    Endpoint,
    /// {sup X > u}.
    Supremum,
    /// {X(1) <= u, X(Γ_{τ-1}) > u}.
    PenultimateExcess,
    /// {sup B + sup Z > u}.
    SupBPlusSupZ,
    /// {Z(1) - b + |σB(1)| > u}: the endpoint with the Gaussian part folded
    /// to its absolute value.
    SymPair,
}

impl EventKind {
    pub fn label(&self) -> &'static str {
        match self {
            EventKind::Endpoint => "endpoint",
            EventKind::Supremum => "supremum",
            EventKind::PenultimateExcess => "penultimate_excess",
            EventKind::SupBPlusSupZ => "supB_plus_supZ",
            EventKind::SymPair => "sym_pair",
        }
    }

    fn hit(&self, path: &PathSample, u: f64) -> bool {
        match self {
            EventKind::Endpoint => path.endpoint > u,
            EventKind::Supremum => path.supremum > u,
            EventKind::PenultimateExcess => {
                path.endpoint <= u && path.penultimate.is_some_and(|v| v > u)
            }
            EventKind::SupBPlusSupZ => path.sup_b + path.sup_z > u,
            EventKind::SymPair => path.endpoint_no_gauss + path.gauss_end.abs() > u,
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct MCEstimate {
    pub label: String,
    pub hits: u64,
    pub trials: u64,
    pub p_hat: f64,
    pub stderr: f64,
    pub seed: u64,
}

impl MCEstimate {
    fn from_hits(label: String, hits: u64, trials: u64, seed: u64) -> Self {
        let p_hat = hits as f64 / trials as f64;
        Self {
            label,
            hits,
            trials,
            p_hat,
            stderr: (p_hat * (1.0 - p_hat) / trials as f64).sqrt(),
            seed,
        }
    }
}

/// Runs `trials` split into fixed blocks with counter-derived substreams and
/// sums the per-block counters. `counter_fn` must be a pure function of the
/// block RNG, so the result is independent of execution order.
pub(crate) fn count_over_blocks<F>(
    trials: u64,
    seed: u64,
    n_counters: usize,
    force_sequential: bool,
    counter_fn: F,
) -> Vec<u64>
where
    F: Fn(&mut ChaCha8Rng, u64, &mut [u64]) + Sync,
{
    assert!(trials >= 1);
    let n_blocks = trials.div_ceil(BLOCK_SIZE);
    let block = |i: u64| -> Vec<u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i + 1);
        let n = if i == n_blocks - 1 {
            trials - i * BLOCK_SIZE
        } else {
            BLOCK_SIZE
        };
        let mut counts = vec![0u64; n_counters];
        counter_fn(&mut rng, n, &mut counts);
        counts
    };
    let merge = |mut a: Vec<u64>, b: Vec<u64>| {
        for (x, y) in a.iter_mut().zip(b) {
            *x += y;
        }
        a
    };

    #[cfg(feature = "parallel")]
    if !force_sequential {
        use rayon::prelude::*;
        return (0..n_blocks)
            .into_par_iter()
            .map(block)
            .reduce(|| vec![0u64; n_counters], merge);
    }
    let _ = force_sequential;
    (0..n_blocks).map(block).fold(vec![0u64; n_counters], merge)
}

/// Estimates all requested events on a common path stream.
pub fn estimate_events(
    model: &LevyModel,
    u: f64,
    events: &[EventKind],
    trials: u64,
    seed: u64,
) -> Vec<MCEstimate> {
    estimate_events_with_mode(model, u, events, trials, seed, false)
}

/// As [`estimate_events`], with an explicit switch to force the sequential
/// block schedule (used by benchmarks; the counts are identical either way).
pub fn estimate_events_with_mode(
    model: &LevyModel,
    u: f64,
    events: &[EventKind],
    trials: u64,
    seed: u64,
    force_sequential: bool,
) -> Vec<MCEstimate> {
    let counts = count_over_blocks(
        trials,
        seed,
        events.len(),
        force_sequential,
        |rng, n, counts| {
            for _ in 0..n {
                let path = sample_path(model, rng);
                for (j, ev) in events.iter().enumerate() {
                    if ev.hit(&path, u) {
                        counts[j] += 1;
                    }
                }
            }
        },
    );
    events
        .iter()
        .zip(counts)
        .map(|(ev, hits)| MCEstimate::from_hits(ev.label().to_string(), hits, trials, seed))
        .collect()
}

/// How the denominator of a tail ratio is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum DenominatorMode {
    /// Endpoint event counted on the same paths as the numerator.
    Mc,
    /// Deterministic endpoint tail from the exact engine.
    Exact,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct RatioPoint {
    pub u: f64,
    pub numerator: f64,
    pub numerator_err: f64,
    pub denominator: f64,
    pub denominator_err: f64,
    pub ratio: f64,
    pub ratio_lo: f64,
    pub ratio_hi: f64,
    pub method: String,
    pub low_confidence: bool,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct TailRatioCurve {
    pub points: Vec<RatioPoint>,
    pub trials: u64,
    pub seed: u64,
}

/// P(sup X > u)/P(X(1) > u) over a u-grid.
///
/// In `Mc` mode both events are counted on common paths; because the
/// supremum event contains the endpoint event, the ratio is estimated from
/// the nested counts X (endpoint) and Y (sup-only excess) as (X+Y)/X with
/// stderr sqrt(Y + Y²/X)/X. The reported interval is ±3 stderr.
pub fn ratio_curve(
    model: &LevyModel,
    u_grid: &[f64],
    trials: u64,
    seed: u64,
    denominator_mode: DenominatorMode,
    tol: f64,
) -> Result<TailRatioCurve> {
    let mut counters = Vec::new();
    let counts = count_over_blocks(trials, seed, 2 * u_grid.len(), false, |rng, n, counts| {
        for _ in 0..n {
            let path = sample_path(model, rng);
            for (i, &u) in u_grid.iter().enumerate() {
                if path.endpoint > u {
                    counts[2 * i] += 1;
                }
                if path.supremum > u {
                    counts[2 * i + 1] += 1;
                }
            }
        }
    });
    for (i, &u) in u_grid.iter().enumerate() {
        let end_hits = counts[2 * i];
        let sup_hits = counts[2 * i + 1];
        let n = trials as f64;
        let p_sup = sup_hits as f64 / n;
        let sup_err = (p_sup * (1.0 - p_sup) / n).sqrt();
        let point = match denominator_mode {
            DenominatorMode::Mc => {
                let x = end_hits as f64;
                let y = (sup_hits - end_hits) as f64;
                let (ratio, ratio_err) = if end_hits > 0 {
                    ((x + y) / x, (y + y * y / x).sqrt() / x)
                } else {
                    (f64::NAN, f64::NAN)
                };
                let p_end = x / n;
                RatioPoint {
                    u,
                    numerator: p_sup,
                    numerator_err: sup_err,
                    denominator: p_end,
                    denominator_err: (p_end * (1.0 - p_end) / n).sqrt(),
                    ratio,
                    ratio_lo: ratio - 3.0 * ratio_err,
                    ratio_hi: ratio + 3.0 * ratio_err,
                    method: "mc/mc-paired".into(),
                    low_confidence: sup_hits < LOW_CONFIDENCE_HITS || end_hits == 0,
                }
            }
            DenominatorMode::Exact => {
                let (tv, _) = model_tail(model, u, tol)?;
                let d_lo = tv.lower_log().exp();
                let d_hi = tv.upper_log().exp();
                let d_mid = tv.mid_log().exp();
                let ratio = p_sup / d_mid;
                RatioPoint {
                    u,
                    numerator: p_sup,
                    numerator_err: sup_err,
                    denominator: d_mid,
                    denominator_err: 0.5 * (d_hi - d_lo),
                    ratio,
                    ratio_lo: (p_sup - 3.0 * sup_err) / d_hi,
                    ratio_hi: (p_sup + 3.0 * sup_err) / d_lo.max(f64::MIN_POSITIVE),
                    method: "mc/exact".into(),
                    low_confidence: sup_hits < LOW_CONFIDENCE_HITS,
                }
            }
        };
        counters.push(point);
    }
    Ok(TailRatioCurve {
        points: counters,
        trials,
        seed,
    })
}

/// How [`sym_identity_residual`] evaluates its three probabilities.
#[derive(Debug, Clone, Copy)]
pub enum ResidualMode {
    Exact,
    Mc { trials: u64, seed: u64 },
}

/// Max over the grid of |P(X+|Y|>u) - (2P(X+Y>u) - P(X>u+|Y|))| for
/// independent X ~ law and Y ~ N(0, σ²).
pub fn sym_identity_residual(
    x_law: &JumpLaw,
    y_sigma: f64,
    u_grid: &[f64],
    mode: ResidualMode,
) -> Result<f64> {
    if !(y_sigma > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "gaussian scale must be positive, got {y_sigma}"
        )));
    }
    match mode {
        ResidualMode::Exact => {
            let masses = x_law.masses()?;
            let table = crate::exact::convolution_table(x_law, 1, 0.0)?;
            let mut worst = 0.0f64;
            for &u in u_grid {
                // P(X + Y > u) over the mass list.
                let mid = gaussian_smoothed_tail(&table, 1, y_sigma, u).exp();
                let mut lhs = 0.0;
                let mut rhs_sub = 0.0;
                for &(idx, lm) in masses.points() {
                    let y = masses.value(idx);
                    let m = lm.exp();
                    // |Y| analogue of the smoothed tail.
                    let t = (u - y) / y_sigma;
                    lhs += m * if t < 0.0 {
                        1.0
                    } else {
                        2.0 * log_norm_tail(t).exp()
                    };
                    // P(X > u + |Y|) term.
                    if y > u {
                        rhs_sub += m * (1.0 - 2.0 * log_norm_tail((y - u) / y_sigma).exp());
                    }
                }
                worst = worst.max((lhs - (2.0 * mid - rhs_sub)).abs());
            }
            Ok(worst)
        }
        ResidualMode::Mc { trials, seed } => {
            let counts = count_over_blocks(trials, seed, 3 * u_grid.len(), false, |rng, n, counts| {
                for _ in 0..n {
                    let x = x_law.sample(rng);
                    let z: f64 = StandardNormal.sample(rng);
                    let y = y_sigma * z;
                    for (i, &u) in u_grid.iter().enumerate() {
                        if x + y.abs() > u {
                            counts[3 * i] += 1;
                        }
                        if x + y > u {
                            counts[3 * i + 1] += 1;
                        }
                        if x > u + y.abs() {
                            counts[3 * i + 2] += 1;
                        }
                    }
                }
            });
            let n = trials as f64;
            let mut worst = 0.0f64;
            for i in 0..u_grid.len() {
                let lhs = counts[3 * i] as f64 / n;
                let mid = counts[3 * i + 1] as f64 / n;
                let sub = counts[3 * i + 2] as f64 / n;
                worst = worst.max((lhs - (2.0 * mid - sub)).abs());
            }
            Ok(worst)
        }
    }
}

#[cfg(test)]
mod tests;
