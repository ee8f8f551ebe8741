//! Flat key/value run configuration (TOML with `[model]` and `[experiment]`
//! sections). Parsing collects every problem it finds instead of stopping at
//! the first, and unknown keys are rejected.

use std::path::PathBuf;

use levytail::jump_laws::parse_law;
use levytail::JumpLaw;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum ExperimentId {
    Thm1,
    Thm2,
    Thm3,
    Thm4,
    Pl,
    Pl2,
    Main,
}

impl ExperimentId {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "thm1" => Some(Self::Thm1),
            "thm2" => Some(Self::Thm2),
            "thm3" => Some(Self::Thm3),
            "thm4" => Some(Self::Thm4),
            "pl" => Some(Self::Pl),
            "pl2" => Some(Self::Pl2),
            "main" => Some(Self::Main),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Thm1 => "thm1",
            Self::Thm2 => "thm2",
            Self::Thm3 => "thm3",
            Self::Thm4 => "thm4",
            Self::Pl => "pl",
            Self::Pl2 => "pl2",
            Self::Main => "main",
        }
    }
}

/// Validated run description; the law is kept as its descriptor text so the
/// config echoes verbatim into the manifest.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RunConfig {
    pub experiment: ExperimentId,
    pub sigma: f64,
    pub drift_b: f64,
    pub lambda: f64,
    pub law: String,
    pub bracket_step: Option<f64>,
    pub u_grid: Vec<f64>,
    pub n_range: Vec<usize>,
    pub trials: u64,
    pub seed: u64,
    pub tol: f64,
    pub eps: f64,
    pub v: f64,
    pub shift_a: f64,
    pub alpha_grid: Vec<f64>,
    pub outdir: PathBuf,
}

impl RunConfig {
    pub fn law_parsed(&self) -> Result<JumpLaw, levytail::Error> {
        parse_law(&self.law)
    }
}

struct Collector<'a> {
    errors: &'a mut Vec<String>,
}

impl Collector<'_> {
    fn f64_of(&mut self, key: &str, v: &toml::Value) -> Option<f64> {
        match v {
            toml::Value::Float(x) => Some(*x),
            toml::Value::Integer(x) => Some(*x as f64),
            _ => {
                self.errors.push(format!("{key}: expected a number, got {v}"));
                None
            }
        }
    }

    fn u64_of(&mut self, key: &str, v: &toml::Value) -> Option<u64> {
        match v {
            toml::Value::Integer(x) if *x >= 0 => Some(*x as u64),
            _ => {
                self.errors.push(format!("{key}: expected a nonnegative integer, got {v}"));
                None
            }
        }
    }

    fn f64_list_of(&mut self, key: &str, v: &toml::Value) -> Option<Vec<f64>> {
        let arr = match v {
            toml::Value::Array(a) => a,
            _ => {
                self.errors.push(format!("{key}: expected an array of numbers, got {v}"));
                return None;
            }
        };
        arr.iter().map(|x| self.f64_of(key, x)).collect()
    }

    fn usize_list_of(&mut self, key: &str, v: &toml::Value) -> Option<Vec<usize>> {
        let arr = match v {
            toml::Value::Array(a) => a,
            _ => {
                self.errors.push(format!("{key}: expected an array of integers, got {v}"));
                return None;
            }
        };
        arr.iter()
            .map(|x| self.u64_of(key, x).map(|n| n as usize))
            .collect()
    }

    fn str_of(&mut self, key: &str, v: &toml::Value) -> Option<String> {
        match v {
            toml::Value::String(s) => Some(s.clone()),
            _ => {
                self.errors.push(format!("{key}: expected a string, got {v}"));
                None
            }
        }
    }
}

/// Parses and validates the config text; on failure returns every error.
pub fn parse_config(text: &str) -> Result<RunConfig, Vec<String>> {
    let doc: toml::Value = toml::from_str(text).map_err(|e| vec![format!("not valid TOML: {e}")])?;
    let table = match doc {
        toml::Value::Table(t) => t,
        _ => return Err(vec!["top level must be a table".into()]),
    };

    let mut errors = Vec::new();
    let mut experiment = None;
    let mut sigma = 0.0f64;
    let mut drift_b = 0.0f64;
    let mut lambda = None::<f64>;
    let mut law = None::<String>;
    let mut bracket_step = None::<f64>;
    let mut u_grid = Vec::new();
    let mut n_range = Vec::new();
    let mut trials = 1_000_000u64;
    let mut seed = 0u64;
    let mut tol = 1e-10f64;
    let mut eps = 0.01f64;
    let mut v = 1.0f64;
    let mut shift_a = 1.0f64;
    let mut alpha_grid = vec![0.25, 0.5, 1.0, 2.0, 4.0];
    let mut outdir = PathBuf::from("out");

    for (section, value) in &table {
        let sec = match value {
            toml::Value::Table(t) => t,
            _ => {
                errors.push(format!("section [{section}] must be a table"));
                continue;
            }
        };
        let mut c = Collector { errors: &mut errors };
        match section.as_str() {
            "model" => {
                for (key, val) in sec {
                    match key.as_str() {
                        "sigma" => {
                            if let Some(x) = c.f64_of("model.sigma", val) {
                                sigma = x;
                            }
                        }
                        "b" => {
                            if let Some(x) = c.f64_of("model.b", val) {
                                drift_b = x;
                            }
                        }
                        "lambda" => lambda = c.f64_of("model.lambda", val),
                        "law" => law = c.str_of("model.law", val),
                        "bracket_step" => bracket_step = c.f64_of("model.bracket_step", val),
                        _ => c.errors.push(format!("unknown key model.{key}")),
                    }
                }
            }
            "experiment" => {
                for (key, val) in sec {
                    match key.as_str() {
                        "id" => {
                            if let Some(s) = c.str_of("experiment.id", val) {
                                match ExperimentId::parse(&s) {
                                    Some(id) => experiment = Some(id),
                                    None => c.errors.push(format!("unknown experiment id {s:?}")),
                                }
                            }
                        }
                        "u_grid" => {
                            if let Some(g) = c.f64_list_of("experiment.u_grid", val) {
                                u_grid = g;
                            }
                        }
                        "n_range" => {
                            if let Some(g) = c.usize_list_of("experiment.n_range", val) {
                                n_range = g;
                            }
                        }
                        "trials" => {
                            if let Some(x) = c.u64_of("experiment.trials", val) {
                                trials = x;
                            }
                        }
                        "seed" => {
                            if let Some(x) = c.u64_of("experiment.seed", val) {
                                seed = x;
                            }
                        }
                        "tol" => {
                            if let Some(x) = c.f64_of("experiment.tol", val) {
                                tol = x;
                            }
                        }
                        "eps" => {
                            if let Some(x) = c.f64_of("experiment.eps", val) {
                                eps = x;
                            }
                        }
                        "v" => {
                            if let Some(x) = c.f64_of("experiment.v", val) {
                                v = x;
                            }
                        }
                        "a" => {
                            if let Some(x) = c.f64_of("experiment.a", val) {
                                shift_a = x;
                            }
                        }
                        "alpha_grid" => {
                            if let Some(g) = c.f64_list_of("experiment.alpha_grid", val) {
                                alpha_grid = g;
                            }
                        }
                        "outdir" => {
                            if let Some(s) = c.str_of("experiment.outdir", val) {
                                outdir = PathBuf::from(s);
                            }
                        }
                        _ => c.errors.push(format!("unknown key experiment.{key}")),
                    }
                }
            }
            _ => errors.push(format!("unknown section [{section}]")),
        }
    }

    let experiment = match experiment {
        Some(id) => id,
        None => {
            errors.push("experiment.id is required".into());
            ExperimentId::Thm1
        }
    };
    let needs_model = !matches!(experiment, ExperimentId::Thm4);
    let lambda = match lambda {
        Some(l) => l,
        None if needs_model => {
            errors.push("model.lambda is required".into());
            1.0
        }
        None => 1.0,
    };
    if lambda <= 0.0 || !lambda.is_finite() {
        errors.push("lambda must be positive".into());
    }
    if !(sigma >= 0.0) || !sigma.is_finite() {
        errors.push("sigma must be finite and nonnegative".into());
    }
    if trials < 1 {
        errors.push("trials must be at least 1".into());
    }
    if !(tol > 0.0) {
        errors.push("tol must be positive".into());
    }
    if let Some(s) = bracket_step {
        if !(s > 0.0) {
            errors.push("bracket_step must be positive".into());
        }
    }
    let law = match law {
        Some(s) => s,
        None if needs_model => {
            errors.push("model.law is required".into());
            String::new()
        }
        None => String::new(),
    };
    if !law.is_empty() {
        if let Err(e) = parse_law(&law) {
            errors.push(format!("model.law: {e}"));
        }
    }
    if experiment == ExperimentId::Thm4 && v < 1.0 {
        errors.push("v >= 1 required".into());
    }
    match experiment {
        ExperimentId::Thm3 | ExperimentId::Thm4 => {
            if n_range.is_empty() {
                errors.push("experiment.n_range is required for this experiment".into());
            }
        }
        _ => {
            if u_grid.is_empty() {
                errors.push("experiment.u_grid is required for this experiment".into());
            }
        }
    }

    if errors.is_empty() {
        Ok(RunConfig {
            experiment,
            sigma,
            drift_b,
            lambda,
            law,
            bracket_step,
            u_grid,
            n_range,
            trials,
            seed,
            tol,
            eps,
            v,
            shift_a,
            alpha_grid,
            outdir,
        })
    } else {
        Err(errors)
    }
}
