//! Jump-distribution zoo: lattice and general discrete laws, hazard-rate
//! continuous laws, tail-only laws built from a Lévy-measure tail, plus the
//! numeric tail-class probes used as experiment preconditions.

mod classify;
mod descriptor;
mod discrete;
mod hazard;

pub use classify::{
    check_cond_h, check_lattice_cond, classify_tail, CondHReport, LatticeCondReport, ProbeConfig,
    TailClass,
};
pub use descriptor::parse_law;
pub use discrete::{DiscreteMasses, NORMALIZATION_TOL};
pub use hazard::{half_normal_density, ContinuousLaw, HazardFn};

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::logspace::{log_diff_exp, LogSumAcc};

/// Relative tail mass dropped when truncating infinite discrete supports.
pub const SUPPORT_TRUNCATION_EPS: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LawKind {
    /// Supported on a·Z (plus a fixed offset folded into the indices).
    Lattice { step: f64 },
    /// Discrete but not presented on a minimal lattice (e.g. factorial support).
    DiscreteGeneral,
    /// Law given through a tail function (hazard-rate or Lévy-measure form).
    Continuous,
}

#[derive(Clone)]
enum LawRepr {
    Discrete(DiscreteMasses),
    Continuous(ContinuousLaw),
    /// log-tail closure x ↦ log P(X > x), with a known support lower bound.
    Custom {
        log_tail: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        lower: f64,
    },
}

/// A jump distribution with a log-space tail, and exact masses when discrete.
#[derive(Clone)]
pub struct JumpLaw {
    kind: LawKind,
    repr: LawRepr,
    upper_bound: Option<f64>,
    descriptor: String,
}

impl std::fmt::Debug for JumpLaw {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("JumpLaw")
            .field("kind", &self.kind)
            .field("descriptor", &self.descriptor)
            .field("upper_bound", &self.upper_bound)
            .finish()
    }
}

impl JumpLaw {
    pub fn kind(&self) -> LawKind {
        self.kind
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    /// Essential supremum when known to be finite.
    pub fn upper_bound(&self) -> Option<f64> {
        self.upper_bound
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self.repr, LawRepr::Discrete(_))
    }

    /// Exact mass list; errors for continuous or tail-only laws.
    pub fn masses(&self) -> Result<&DiscreteMasses> {
        match &self.repr {
            LawRepr::Discrete(m) => Ok(m),
            _ => Err(Error::NotDiscrete(self.descriptor.clone())),
        }
    }

    /// Lattice step; errors unless the law is a lattice law.
    pub fn lattice_step(&self) -> Result<f64> {
        match self.kind {
            LawKind::Lattice { step } => Ok(step),
            _ => Err(Error::NotLattice(self.descriptor.clone())),
        }
    }

    pub fn continuous(&self) -> Option<&ContinuousLaw> {
        match &self.repr {
            LawRepr::Continuous(c) => Some(c),
            _ => None,
        }
    }

    /// log P(X > u).
    pub fn log_tail(&self, u: f64) -> f64 {
        match &self.repr {
            LawRepr::Discrete(m) => m.log_tail(u),
            LawRepr::Continuous(c) => c.log_tail(u),
            LawRepr::Custom { log_tail, lower } => {
                if u < *lower {
                    0.0
                } else {
                    log_tail(u).min(0.0)
                }
            }
        }
    }

    /// log P(X >= u). For tail-only laws this equals the strict tail, which
    /// is exact whenever the closure has no atom at u.
    pub fn log_tail_inclusive(&self, u: f64) -> f64 {
        match &self.repr {
            LawRepr::Discrete(m) => m.log_tail_inclusive(u),
            LawRepr::Continuous(c) => c.log_tail_inclusive(u),
            LawRepr::Custom { log_tail, lower } => {
                if u <= *lower {
                    0.0
                } else {
                    log_tail(u).min(0.0)
                }
            }
        }
    }

    pub fn tail(&self, u: f64) -> f64 {
        self.log_tail(u).exp()
    }

    /// Infimum of the support.
    pub fn min_support(&self) -> f64 {
        match &self.repr {
            LawRepr::Discrete(m) => m.min_value(),
            LawRepr::Continuous(c) => {
                if c.log_atom() > f64::NEG_INFINITY {
                    c.u0()
                } else {
                    0.0
                }
            }
            LawRepr::Custom { lower, .. } => *lower,
        }
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.repr {
            LawRepr::Discrete(m) => m.sample(rng),
            LawRepr::Continuous(c) => c.sample(rng),
            LawRepr::Custom { log_tail, lower } => {
                let u: f64 = rng.random();
                let target = (1.0 - u).max(f64::MIN_POSITIVE).ln();
                // Find x with log P(X > x) <= target by bisection.
                let mut lo = *lower;
                let mut hi = lower.abs().max(1.0);
                while log_tail(hi) > target {
                    hi *= 2.0;
                    if hi > 1e12 {
                        return hi;
                    }
                }
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if log_tail(mid) > target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }
}

/// Law with tail exp(-∫₀ᵘ h) above `u0` and tail 1 below.
pub fn hazard_law(h: HazardFn, u0: f64) -> Result<JumpLaw> {
    let descriptor = format!("hazard:{h:?} u0={u0}");
    let law = ContinuousLaw::new(h, u0)?;
    Ok(JumpLaw {
        kind: LawKind::Continuous,
        repr: LawRepr::Continuous(law),
        upper_bound: None,
        descriptor,
    })
}

/// |N(0,1)| jumps.
pub fn half_normal() -> JumpLaw {
    let mut law = hazard_law(HazardFn::HalfNormalRate, 0.0).expect("valid hazard");
    law.descriptor = "half-normal".into();
    law
}

/// Exponential(rate) jumps.
pub fn exponential(rate: f64) -> Result<JumpLaw> {
    let mut law = hazard_law(HazardFn::Constant(rate), 0.0)?;
    law.descriptor = format!("exponential rate={rate}");
    Ok(law)
}

/// Degenerate law: a single jump size.
pub fn point_mass(value: f64) -> Result<JumpLaw> {
    if !value.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "point mass location must be finite, got {value}"
        )));
    }
    let (step, index) = if value == 0.0 { (1.0, 0) } else { (value.abs(), value.signum() as i128) };
    Ok(JumpLaw {
        kind: LawKind::Lattice { step },
        repr: LawRepr::Discrete(DiscreteMasses::point(step, index)),
        upper_bound: Some(value),
        descriptor: format!("point value={value}"),
    })
}

/// Fair ±1 jumps (the symmetric lattice benchmark law).
pub fn fair_pm1() -> JumpLaw {
    let half = 0.5f64.ln();
    JumpLaw {
        kind: LawKind::Lattice { step: 1.0 },
        repr: LawRepr::Discrete(
            DiscreteMasses::new(1.0, vec![(-1, half), (1, half)]).expect("valid masses"),
        ),
        upper_bound: Some(1.0),
        descriptor: "pm1".into(),
    }
}

/// P(X₁ = n!) = C(v)/(n!)^v for n >= 1, truncated below relative mass 1e-30.
pub fn factorial_law(v: f64) -> Result<JumpLaw> {
    if !(v >= 1.0) || !v.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "factorial law exponent must satisfy v >= 1, got {v}"
        )));
    }
    // Normalizer over the full series; terms below 1e-320 are zero anyway.
    let mut log_terms: Vec<f64> = Vec::new();
    let mut log_fact = 0.0f64;
    let mut norm = LogSumAcc::new();
    for n in 1..=170u32 {
        log_fact += (n as f64).ln();
        let lt = -v * log_fact;
        if lt < -745.0 {
            break;
        }
        log_terms.push(lt);
        norm.add(lt);
    }
    let log_c = -norm.log_value();
    // Truncate support where the remaining relative mass drops below 1e-30,
    // and where n! still fits the exact i128 support representation.
    let mut points: Vec<(i128, f64)> = Vec::new();
    let mut fact: i128 = 1;
    let mut kept = LogSumAcc::new();
    for (i, &lt) in log_terms.iter().enumerate() {
        let n = (i + 1) as i128;
        fact = fact.checked_mul(n).ok_or_else(|| {
            Error::InvalidParameter("factorial support exceeds i128 range".into())
        })?;
        points.push((fact, log_c + lt));
        kept.add(lt);
        let kept_frac = (kept.log_value() + log_c).exp();
        if 1.0 - kept_frac < SUPPORT_TRUNCATION_EPS {
            break;
        }
    }
    let masses = DiscreteMasses::new(1.0, points)?;
    masses.check_normalized()?;
    Ok(JumpLaw {
        kind: LawKind::DiscreteGeneral,
        repr: LawRepr::Discrete(masses),
        upper_bound: None,
        descriptor: format!("factorial v={v}"),
    })
}

/// P(X₁ = n) = C/n! for n >= 1 on the unit lattice.
pub fn lattice_factorial() -> JumpLaw {
    let mut points: Vec<(i128, f64)> = Vec::new();
    let mut log_fact = 0.0f64;
    let mut norm = LogSumAcc::new();
    for n in 1..=120i128 {
        log_fact += (n as f64).ln();
        points.push((n, -log_fact));
        norm.add(-log_fact);
    }
    let log_c = -norm.log_value();
    for p in &mut points {
        p.1 += log_c;
    }
    let masses = DiscreteMasses::new(1.0, points).expect("valid masses");
    JumpLaw {
        kind: LawKind::Lattice { step: 1.0 },
        repr: LawRepr::Discrete(masses),
        upper_bound: None,
        descriptor: "lattice-factorial".into(),
    }
}

/// Uniform(0,1) jumps as a tail-only law (handy as a discretization probe).
pub fn uniform01() -> JumpLaw {
    JumpLaw {
        kind: LawKind::Continuous,
        repr: LawRepr::Custom {
            log_tail: Arc::new(|x: f64| {
                if x >= 1.0 {
                    f64::NEG_INFINITY
                } else {
                    (1.0 - x).ln()
                }
            }),
            lower: 0.0,
        },
        upper_bound: Some(1.0),
        descriptor: "uniform01".into(),
    }
}

/// Rounds the law down to the lattice a·Z: P(X^(a) = na) = P(na <= X < (n+1)a).
///
/// The resulting tail sandwiches the original:
/// P(X^(a) > u) <= P(X > u) <= P(X^(a) > u - a).
pub fn discretize(law: &JumpLaw, a: f64) -> Result<JumpLaw> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "discretization step must be positive, got {a}"
        )));
    }
    let points: Vec<(i128, f64)> = match &law.repr {
        LawRepr::Discrete(m) => m
            .points()
            .iter()
            .map(|&(idx, lm)| ((m.value(idx) / a).floor() as i128, lm))
            .collect(),
        _ => {
            let mut pts = Vec::new();
            let mut n = (law.min_support() / a).floor() as i128;
            // Walk cells upward until the remaining tail is negligible.
            let stop_log = SUPPORT_TRUNCATION_EPS.ln();
            let mut hi_log = law.log_tail_inclusive(n as f64 * a);
            let cap = 10_000_000i128;
            let n_start = n;
            loop {
                let lo_log = law.log_tail_inclusive((n + 1) as f64 * a);
                if hi_log > lo_log {
                    pts.push((n, log_diff_exp(hi_log, lo_log)));
                }
                if lo_log < stop_log {
                    break;
                }
                n += 1;
                if n - n_start > cap {
                    return Err(Error::SupportCapExceeded {
                        fold: 1,
                        cap: cap as usize,
                    });
                }
                hi_log = lo_log;
            }
            pts
        }
    };
    let masses = DiscreteMasses::new(a, points)?;
    masses.check_normalized()?;
    Ok(JumpLaw {
        kind: LawKind::Lattice { step: a },
        repr: LawRepr::Discrete(masses),
        upper_bound: law.upper_bound.map(|b| (b / a).floor() * a),
        descriptor: format!("discretize base=({}) step={a}", law.descriptor),
    })
}

/// Normalizes the positive part of a Lévy measure beyond `a` into a jump law.
///
/// Returns the rate λ₊ = ρ((a,∞)) together with the law whose tail is
/// ρ((min{x,a},∞))/λ₊, i.e. all mass at or below `a` is placed at `a`.
pub fn from_levy_measure(
    rho_tail: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    rho_neg_mass: f64,
    a: f64,
) -> Result<(f64, JumpLaw)> {
    if !(a > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "cutoff a must be positive, got {a}"
        )));
    }
    if !(rho_neg_mass >= 0.0) || !rho_neg_mass.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "negative-side mass must be finite and nonnegative, got {rho_neg_mass}"
        )));
    }
    let lambda_plus = rho_tail(a);
    if !(lambda_plus > 0.0) || !lambda_plus.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "levy measure beyond cutoff must be positive and finite, got {lambda_plus}"
        )));
    }
    let log_lambda = lambda_plus.ln();
    let law = JumpLaw {
        kind: LawKind::Continuous,
        repr: LawRepr::Custom {
            log_tail: Arc::new(move |x: f64| {
                let mass = rho_tail(x.max(a));
                if mass <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    (mass.ln() - log_lambda).min(0.0)
                }
            }),
            lower: a,
        },
        upper_bound: None,
        descriptor: format!("levy-measure a={a}"),
    };
    Ok((lambda_plus, law))
}
