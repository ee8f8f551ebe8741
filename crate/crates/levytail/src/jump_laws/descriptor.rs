//! Textual jump-law descriptors used by config files and the CLI.
//!
//! Grammar: `name key=value ...` where a value may be a parenthesized nested
//! descriptor, e.g. `discretize base=(exponential rate=2) step=0.5`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

use super::{
    discretize, exponential, factorial_law, fair_pm1, half_normal, hazard_law, lattice_factorial,
    point_mass, HazardFn, JumpLaw,
};

/// Splits on whitespace, keeping parenthesized groups intact.
fn tokenize(text: &str) -> Result<Vec<String>> {
    let mut tokens = Vec::new();
    let mut cur = String::new();
    let mut depth = 0usize;
    for ch in text.chars() {
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch);
            }
            ')' => {
                depth = depth.checked_sub(1).ok_or_else(|| {
                    Error::InvalidParameter(format!("unbalanced ')' in law descriptor '{text}'"))
                })?;
                cur.push(ch);
            }
            c if c.is_whitespace() && depth == 0 => {
                if !cur.is_empty() {
                    tokens.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if depth != 0 {
        return Err(Error::InvalidParameter(format!(
            "unbalanced '(' in law descriptor '{text}'"
        )));
    }
    if !cur.is_empty() {
        tokens.push(cur);
    }
    Ok(tokens)
}

struct Args {
    name: String,
    kv: BTreeMap<String, String>,
    context: String,
}

impl Args {
    fn parse(text: &str) -> Result<Self> {
        let tokens = tokenize(text)?;
        let Some((name, rest)) = tokens.split_first() else {
            return Err(Error::InvalidParameter("empty law descriptor".into()));
        };
        let mut kv = BTreeMap::new();
        for tok in rest {
            let Some((k, v)) = tok.split_once('=') else {
                return Err(Error::InvalidParameter(format!(
                    "expected key=value in law descriptor, got '{tok}'"
                )));
            };
            if kv.insert(k.to_string(), v.to_string()).is_some() {
                return Err(Error::InvalidParameter(format!(
                    "duplicate key '{k}' in law descriptor '{text}'"
                )));
            }
        }
        Ok(Self {
            name: name.clone(),
            kv,
            context: text.trim().to_string(),
        })
    }

    fn real(&mut self, key: &str) -> Result<f64> {
        let raw = self.kv.remove(key).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "law '{}' requires {key}=... in '{}'",
                self.name, self.context
            ))
        })?;
        raw.parse::<f64>().map_err(|_| {
            Error::InvalidParameter(format!("{key}='{raw}' is not a number in '{}'", self.context))
        })
    }

    fn real_or(&mut self, key: &str, default: f64) -> Result<f64> {
        match self.kv.remove(key) {
            None => Ok(default),
            Some(raw) => raw.parse::<f64>().map_err(|_| {
                Error::InvalidParameter(format!(
                    "{key}='{raw}' is not a number in '{}'",
                    self.context
                ))
            }),
        }
    }

    fn nested(&mut self, key: &str) -> Result<String> {
        let raw = self.kv.remove(key).ok_or_else(|| {
            Error::InvalidParameter(format!(
                "law '{}' requires {key}=... in '{}'",
                self.name, self.context
            ))
        })?;
        Ok(raw
            .strip_prefix('(')
            .and_then(|s| s.strip_suffix(')'))
            .unwrap_or(&raw)
            .to_string())
    }

    fn finish(self) -> Result<()> {
        if let Some(k) = self.kv.keys().next() {
            return Err(Error::InvalidParameter(format!(
                "unknown key '{k}' for law '{}' in '{}'",
                self.name, self.context
            )));
        }
        Ok(())
    }
}

/// Parses a law descriptor like `hazard:power c=2 u0=1` or `factorial v=1`.
pub fn parse_law(text: &str) -> Result<JumpLaw> {
    let mut args = Args::parse(text)?;
    let law = match args.name.as_str() {
        "half-normal" => half_normal(),
        "exponential" => exponential(args.real_or("rate", 1.0)?)?,
        "point" => point_mass(args.real("value")?)?,
        "pm1" => fair_pm1(),
        "factorial" => factorial_law(args.real_or("v", 1.0)?)?,
        "lattice-factorial" => lattice_factorial(),
        "hazard:linear" => hazard_law(HazardFn::Linear, args.real_or("u0", 0.0)?)?,
        "hazard:power" => {
            let c = args.real("c")?;
            hazard_law(HazardFn::Power { c }, args.real_or("u0", 0.0)?)?
        }
        "hazard:logpow" => {
            let c = args.real("c")?;
            hazard_law(HazardFn::LogPower { c }, args.real_or("u0", 0.0)?)?
        }
        "discretize" => {
            let base = parse_law(&args.nested("base")?)?;
            discretize(&base, args.real("step")?)?
        }
        other => {
            return Err(Error::InvalidParameter(format!(
                "unknown law '{other}' (expected one of half-normal, exponential, point, pm1, \
                 factorial, lattice-factorial, hazard:linear, hazard:power, hazard:logpow, \
                 discretize)"
            )))
        }
    };
    args.finish()?;
    Ok(law)
}
