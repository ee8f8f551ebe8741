//! Numeric tail-class probes.
//!
//! The flags are finite-sample verdicts on limit statements: a ratio trace is
//! computed on a probe grid and "limit = 0" is rendered as "below 0.01 at the
//! last probe while non-increasing over the final probes". Each flag carries
//! its trace so callers can tighten the criterion.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::logspace::LogSumAcc;

use super::{JumpLaw, LawKind, LawRepr};

/// Threshold for calling a ratio trace "converged to 0".
const ZERO_LIMIT: f64 = 0.01;
/// Threshold for calling a ratio trace "stuck at 1" (heavy probe).
const ONE_LIMIT: f64 = 0.99;
/// Number of trailing probes that must agree on a trend.
const TREND_WINDOW: usize = 5;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProbeConfig {
    /// Largest probe point.
    pub u_max: f64,
    /// Number of grid points.
    pub grid: usize,
    /// Shift used in the fixed-shift ratio P(X > u + a)/P(X > u).
    pub a_probe: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            u_max: 10.0,
            grid: 40,
            a_probe: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TailClass {
    /// P(X > u)/P(X₁ + X₂ > u) → 0 (sum of two copies dominates).
    pub light1: bool,
    /// Bounded support with some positive-jump probability.
    pub light2: bool,
    /// P(X > u + a)/P(X > u) → 0 for the probe shift a.
    pub cond_pl: bool,
    /// P(X > u + a)/P(X > u) → 1 (shift-insensitive tail).
    pub heavy: bool,
    /// Lattice ratio P(X > (n+1)a)/P(X > na) → 0; None for non-lattice laws.
    pub lattice_cond: Option<bool>,
    pub light1_trace: Vec<(f64, f64)>,
    pub cond_pl_trace: Vec<(f64, f64)>,
    pub lattice_trace: Vec<(f64, f64)>,
    /// Set when the trailing ratio window is non-monotone.
    pub light1_inconclusive: bool,
    pub cond_pl_inconclusive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Trend {
    NonIncreasing,
    NonDecreasing,
    Mixed,
}

fn trailing_trend(trace: &[(f64, f64)]) -> Trend {
    let n = trace.len();
    if n < 2 {
        return Trend::NonIncreasing;
    }
    let window = &trace[n.saturating_sub(TREND_WINDOW)..];
    let slack = 1e-9 * window.iter().map(|p| p.1.abs()).fold(0.0f64, f64::max) + 1e-300;
    let mut down = true;
    let mut up = true;
    for w in window.windows(2) {
        if w[1].1 > w[0].1 + slack {
            down = false;
        }
        if w[1].1 < w[0].1 - slack {
            up = false;
        }
    }
    match (down, up) {
        (true, _) => Trend::NonIncreasing,
        (false, true) => Trend::NonDecreasing,
        _ => Trend::Mixed,
    }
}

/// log P(X₁ + X₂ > u) for two independent copies, where computable.
fn log_two_fold_tail(law: &JumpLaw, u: f64, conv: Option<&super::DiscreteMasses>) -> Option<f64> {
    match &law.repr {
        LawRepr::Discrete(_) => conv.map(|c| c.log_tail(u)),
        LawRepr::Continuous(c) => Some(continuous_two_fold(c, u)),
        LawRepr::Custom { .. } => None,
    }
}

/// Two-fold convolution tail of a hazard law by log-space quadrature.
///
/// Splits into atom-atom, atom-continuous and continuous-continuous parts;
/// the last is integrated on a fine fixed grid in log space so that deep
/// tails (e.g. e^{-200}) never pass through linear underflow.
fn continuous_two_fold(law: &super::ContinuousLaw, u: f64) -> f64 {
    let u0 = law.u0();
    let log_atom = law.log_atom();
    let mut acc = LogSumAcc::new();
    if log_atom > f64::NEG_INFINITY {
        if 2.0 * u0 > u {
            acc.add(2.0 * log_atom);
        }
        acc.add(std::f64::consts::LN_2 + log_atom + law.log_tail(u - u0));
    }
    // Continuous-continuous part: ∫ h(y) T(y) T_c(u - y) dy over y > u0,
    // with T_c(t) = exp(-∫₀^{max(t, u0)} h) the continuous-part tail.
    // Upper limit: where the integrand is 60 nats below the endpoint tail.
    let cutoff = law.log_tail(u.max(u0)) - 60.0;
    let mut y_hi = u.max(u0).max(1.0);
    while law.log_tail(y_hi) > cutoff && y_hi < 1e9 {
        y_hi *= 1.5;
    }
    let log_f = |y: f64| -> f64 {
        let h = law.hazard().eval(y);
        if h <= 0.0 {
            return f64::NEG_INFINITY;
        }
        h.ln() + law.log_tail(y) + law.log_tail((u - y).max(u0))
    };
    // The integrand has kinks where u - y crosses u0 and u; split there so
    // each Simpson piece sees a smooth function.
    let mut cuts = vec![u0, y_hi];
    for p in [u - u0, u] {
        if p > u0 && p < y_hi {
            cuts.push(p);
        }
    }
    cuts.sort_by(f64::total_cmp);
    for pair in cuts.windows(2) {
        if pair[1] > pair[0] {
            acc.add(log_simpson(&log_f, pair[0], pair[1], 2000));
        }
    }
    acc.log_value().min(0.0)
}

/// log of ∫ exp(log_f) over [a, b] by composite Simpson in log space.
fn log_simpson<F: Fn(f64) -> f64>(log_f: &F, a: f64, b: f64, n: usize) -> f64 {
    let h_step = (b - a) / n as f64;
    let mut quad = LogSumAcc::new();
    for i in 0..=n {
        let y = a + i as f64 * h_step;
        let w: f64 = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        quad.add(log_f(y) + w.ln());
    }
    quad.log_value() + (h_step / 3.0).ln()
}

/// Probes the tail classes of `law` on the given grid.
pub fn classify_tail(law: &JumpLaw, probe: &ProbeConfig) -> Result<TailClass> {
    if !(probe.u_max > 0.0) || probe.grid < 2 * TREND_WINDOW || !(probe.a_probe > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "probe config needs u_max > 0, grid >= {}, a_probe > 0",
            2 * TREND_WINDOW
        )));
    }
    let conv = match &law.repr {
        LawRepr::Discrete(m) => Some(m.convolve(m, 0.0, 10_000_000, 2)?.0),
        _ => None,
    };

    let mut cond_pl_trace = Vec::with_capacity(probe.grid);
    let mut light1_trace = Vec::with_capacity(probe.grid);
    for i in 0..probe.grid {
        let u = probe.u_max * (i + 1) as f64 / probe.grid as f64;
        let lt = law.log_tail(u);
        if lt > f64::NEG_INFINITY {
            let shifted = law.log_tail(u + probe.a_probe);
            cond_pl_trace.push((u, (shifted - lt).exp().min(1.0)));
            if let Some(two) = log_two_fold_tail(law, u, conv.as_ref()) {
                light1_trace.push((u, (lt - two).exp().min(1.0)));
            }
        }
    }

    let pl_trend = trailing_trend(&cond_pl_trace);
    let pl_last = cond_pl_trace.last().map(|p| p.1);
    let cond_pl_inconclusive = cond_pl_trace.is_empty() || pl_trend == Trend::Mixed;
    let cond_pl = !cond_pl_inconclusive
        && pl_trend == Trend::NonIncreasing
        && pl_last.is_some_and(|r| r < ZERO_LIMIT);
    let heavy = !cond_pl_inconclusive && pl_last.is_some_and(|r| r > ONE_LIMIT);

    let l1_trend = trailing_trend(&light1_trace);
    let light1_inconclusive = light1_trace.is_empty() || l1_trend == Trend::Mixed;
    let mut light1 = !light1_inconclusive
        && l1_trend == Trend::NonIncreasing
        && light1_trace.last().is_some_and(|p| p.1 < ZERO_LIMIT);
    if cond_pl {
        // Shift-ratio decay implies two-copy domination, so promote light1.
        light1 = true;
    }

    let light2 = law.upper_bound().is_some_and(|ub| {
        let mut alpha = ub / 2.0;
        for _ in 0..10 {
            if alpha > 0.0 && law.tail(alpha) > 0.0 {
                return true;
            }
            alpha /= 2.0;
        }
        false
    });

    let (lattice_cond, lattice_trace) = match law.kind() {
        LawKind::Lattice { step } => {
            let n_max = ((probe.u_max / step).floor() as usize).max(2);
            let rep = check_lattice_cond(law, n_max)?;
            (Some(rep.holds), rep.trace)
        }
        _ => (None, Vec::new()),
    };

    Ok(TailClass {
        light1,
        light2,
        cond_pl,
        heavy,
        lattice_cond,
        light1_trace,
        cond_pl_trace,
        lattice_trace,
        light1_inconclusive,
        cond_pl_inconclusive,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CondHReport {
    pub holds: bool,
    /// Max over evaluated points of log h(v+b) - b h(v)/8.
    pub worst_margin: f64,
    /// Grid point attaining the worst margin.
    pub at: f64,
}

/// Checks the hazard growth bound h(v + b) <= exp(b h(v)/8) on a grid.
///
/// The bound is asymptotic, so the verdict demands it only on a trailing run
/// of the grid (at least the last 3 points past the first index with
/// h(v) >= 1); early small-v violations are reported through `worst_margin`
/// but do not fail the check.
pub fn check_cond_h<F: Fn(f64) -> f64>(h: F, b: f64, v_grid: &[f64]) -> Result<CondHReport> {
    if !(b > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "drift shift b must be positive, got {b}"
        )));
    }
    let mut margins: Vec<(f64, f64)> = Vec::new();
    let mut past_one = false;
    for &v in v_grid {
        let hv = h(v);
        if !(hv > 0.0) {
            return Err(Error::NonPositiveHazard { at: v, value: hv });
        }
        if hv >= 1.0 {
            past_one = true;
        }
        if past_one {
            let hvb = h(v + b);
            if !(hvb > 0.0) {
                return Err(Error::NonPositiveHazard { at: v + b, value: hvb });
            }
            margins.push((v, hvb.ln() - b * hv / 8.0));
        }
    }
    if margins.is_empty() {
        return Ok(CondHReport {
            holds: true,
            worst_margin: f64::NEG_INFINITY,
            at: f64::NAN,
        });
    }
    let (at, worst_margin) = margins
        .iter()
        .copied()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let tail_len = margins.len().min(3);
    let holds = margins[margins.len() - tail_len..].iter().all(|m| m.1 <= 0.0);
    Ok(CondHReport { holds, worst_margin, at })
}

#[derive(Debug, Clone, Serialize)]
pub struct LatticeCondReport {
    pub holds: bool,
    /// (n, P(X > (n+1)a)/P(X > na)) for n = 1..n_max.
    pub trace: Vec<(f64, f64)>,
}

/// Checks that successive lattice tail ratios decay to (numerical) zero.
pub fn check_lattice_cond(law: &JumpLaw, n_max: usize) -> Result<LatticeCondReport> {
    let a = law.lattice_step()?;
    let mut trace = Vec::with_capacity(n_max);
    let mut holds = true;
    for n in 1..=n_max {
        let lt = law.log_tail(n as f64 * a);
        if lt == f64::NEG_INFINITY {
            holds = false;
            break;
        }
        let next = law.log_tail((n + 1) as f64 * a);
        trace.push((n as f64, (next - lt).exp()));
    }
    if holds {
        holds = trace.last().is_some_and(|p| p.1 < ZERO_LIMIT);
    }
    Ok(LatticeCondReport { holds, trace })
}
