//! Continuous jump laws defined through a hazard rate.
//!
//! The tail is `P(X > u) = exp(-∫₀ᵘ h(v) dv)` for `u >= u0` and 1 below
//! `u0`, which places an atom of mass `1 - exp(-∫₀^{u0} h)` at `u0` when
//! `u0 > 0`. Above `u0` the law has density `h(y) P(X > y)`.

use rand_distr::Distribution;

use crate::error::{Error, Result};
use crate::normal::{log_norm_tail, norm_pdf};
use crate::quad::adaptive_simpson;

#[derive(Debug, Clone, PartialEq)]
pub enum HazardFn {
    /// h(v) = rate (exponential tail).
    Constant(f64),
    /// h(v) = v.
    Linear,
    /// h(v) = v^c, c > 0.
    Power { c: f64 },
    /// h(v) = log(v + 1)^c, c > 0.
    LogPower { c: f64 },
    /// h(v) = e^{v^2}.
    ExpSquare,
    /// Hazard of |N(0,1)|: h(v) = φ(v) / Φ̄(v).
    HalfNormalRate,
}

impl HazardFn {
    pub fn eval(&self, v: f64) -> f64 {
        match *self {
            HazardFn::Constant(rate) => rate,
            HazardFn::Linear => v,
            HazardFn::Power { c } => v.powf(c),
            HazardFn::LogPower { c } => (v + 1.0).ln().powf(c),
            HazardFn::ExpSquare => (v * v).exp(),
            HazardFn::HalfNormalRate => (-0.5 * v * v - crate::normal::LN_SQRT_2PI - log_norm_tail(v)).exp(),
        }
    }

    /// ∫₀ᵘ h(v) dv, closed form where one exists.
    pub fn integral(&self, u: f64) -> f64 {
        debug_assert!(u >= 0.0);
        match *self {
            HazardFn::Constant(rate) => rate * u,
            HazardFn::Linear => 0.5 * u * u,
            HazardFn::Power { c } => u.powf(c + 1.0) / (c + 1.0),
            // |N| tail is 2 Φ̄(u), so the integrated hazard is -log of that.
            HazardFn::HalfNormalRate => -(std::f64::consts::LN_2 + log_norm_tail(u)),
            HazardFn::LogPower { .. } | HazardFn::ExpSquare => {
                adaptive_simpson(|v| self.eval(v), 0.0, u, 1e-12, 1e-300)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |at: f64, value: f64| Err(Error::NonPositiveHazard { at, value });
        match *self {
            HazardFn::Constant(rate) if !(rate > 0.0 && rate.is_finite()) => bad(0.0, rate),
            HazardFn::Power { c } | HazardFn::LogPower { c } if !(c > 0.0 && c.is_finite()) => {
                Err(Error::InvalidParameter(format!(
                    "hazard exponent must be positive and finite, got {c}"
                )))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ContinuousLaw {
    hazard: HazardFn,
    u0: f64,
    /// log mass of the atom at u0 (NEG_INFINITY when u0 = 0).
    log_atom: f64,
}

impl ContinuousLaw {
    pub fn new(hazard: HazardFn, u0: f64) -> Result<Self> {
        hazard.validate()?;
        if !(u0 >= 0.0) || !u0.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "tail onset u0 must be nonnegative and finite, got {u0}"
            )));
        }
        let h0 = hazard.eval(u0.max(1e-12));
        if !(h0 >= 0.0) {
            return Err(Error::NonPositiveHazard {
                at: u0.max(1e-12),
                value: h0,
            });
        }
        let log_atom = if u0 > 0.0 {
            crate::logspace::log1m_exp(-hazard.integral(u0))
        } else {
            f64::NEG_INFINITY
        };
        Ok(Self { hazard, u0, log_atom })
    }

    pub fn hazard(&self) -> &HazardFn {
        &self.hazard
    }

    pub fn u0(&self) -> f64 {
        self.u0
    }

    pub fn log_atom(&self) -> f64 {
        self.log_atom
    }

    /// log P(X > u).
    pub fn log_tail(&self, u: f64) -> f64 {
        if u < self.u0 {
            0.0
        } else {
            -self.hazard.integral(u)
        }
    }

    /// log P(X >= u). Differs from the strict tail only at the atom.
    pub fn log_tail_inclusive(&self, u: f64) -> f64 {
        if u <= self.u0 {
            0.0
        } else {
            -self.hazard.integral(u)
        }
    }

    /// Density of the absolutely continuous part, h(y) P(X > y) for y > u0.
    pub fn density(&self, y: f64) -> f64 {
        if y <= self.u0 {
            0.0
        } else {
            self.hazard.eval(y) * self.log_tail(y).exp()
        }
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.hazard {
            HazardFn::HalfNormalRate if self.u0 == 0.0 => {
                let n: f64 = rand_distr::StandardNormal.sample(rng);
                n.abs()
            }
            HazardFn::Constant(rate) if self.u0 == 0.0 => {
                let e: f64 = rand_distr::Exp1.sample(rng);
                e / rate
            }
            _ => {
                let u: f64 = rng.random();
                if self.u0 > 0.0 && u < self.log_atom.exp() {
                    return self.u0;
                }
                // Invert exp(-I(x)) = 1 - u by bisection on a doubling bracket.
                let target = -(1.0 - u).max(f64::MIN_POSITIVE).ln();
                let mut hi = self.u0.max(1.0);
                while self.hazard.integral(hi) < target {
                    hi *= 2.0;
                    if hi > 1e12 {
                        return hi;
                    }
                }
                let mut lo = self.u0;
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if self.hazard.integral(mid) < target {
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

/// Half-normal density 2 φ(y) on y > 0 (the density of the |N(0,1)| law).
pub fn half_normal_density(y: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else {
        2.0 * norm_pdf(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_normal_tail_is_two_phi_bar() {
        let law = ContinuousLaw::new(HazardFn::HalfNormalRate, 0.0).unwrap();
        for &u in &[0.1, 1.0, 2.5, 6.0] {
            let expect = std::f64::consts::LN_2 + log_norm_tail(u);
            assert!((law.log_tail(u) - expect).abs() < 1e-12, "u = {u}");
        }
    }

    #[test]
    fn linear_hazard_tail_and_atom() {
        // u0 = 2: atom of mass 1 - e^{-2} at 2, tail e^{-u^2/2} above.
        let law = ContinuousLaw::new(HazardFn::Linear, 2.0).unwrap();
        assert!((law.log_tail(1.0) - 0.0).abs() < 1e-15);
        assert!((law.log_tail(3.0) + 4.5).abs() < 1e-12);
        assert!((law.log_atom.exp() - (1.0 - (-2.0f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn power_hazard_closed_form() {
        let law = ContinuousLaw::new(HazardFn::Power { c: 2.0 }, 0.0).unwrap();
        assert!((law.log_tail(3.0) + 9.0).abs() < 1e-12);
    }

    #[test]
    fn log_power_integral_against_quadrature_oracle() {
        // ∫₀^5 log(v+1) dv = 6 ln 6 - 5.
        let h = HazardFn::LogPower { c: 1.0 };
        let expect = 6.0 * 6.0f64.ln() - 5.0;
        assert!((h.integral(5.0) - expect).abs() < 1e-10);
    }

    #[test]
    fn sampling_matches_tail() {
        use rand::SeedableRng;
        let law = ContinuousLaw::new(HazardFn::Linear, 0.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let n = 200_000;
        let mut hits = 0u64;
        for _ in 0..n {
            if law.sample(&mut rng) > 1.5 {
                hits += 1;
            }
        }
        let p = hits as f64 / n as f64;
        let expect = (-1.5f64 * 1.5 / 2.0).exp();
        assert!((p - expect).abs() < 0.005, "p = {p}, expect = {expect}");
    }

    #[test]
    fn atom_sampling_frequency() {
        use rand::SeedableRng;
        let law = ContinuousLaw::new(HazardFn::Constant(1.0), 1.0).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let mut at_atom = 0u64;
        for _ in 0..n {
            if law.sample(&mut rng) == 1.0 {
                at_atom += 1;
            }
        }
        let expect = 1.0 - (-1.0f64).exp();
        assert!((at_atom as f64 / n as f64 - expect).abs() < 0.006);
    }
}
