//! Command-line front end: law classification, tail-ratio curves, and the
//! experiment harnesses with reproducible run manifests.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{parse_config, ExperimentId, RunConfig};
use levytail::exact::LevyModel;
use levytail::experiments::{
    run_prop_main, run_prop_pl, run_prop_pl2, run_thm1, run_thm2, run_thm3, run_thm4,
    ExperimentReport, Verdict,
};
use levytail::jump_laws::{classify_tail, parse_law, ProbeConfig};
use levytail::path_sim::{ratio_curve, DenominatorMode};

#[derive(Parser)]
#[command(name = "levytail-cli", version, about)]
struct Cli {
    /// Override the number of Monte Carlo trials.
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Override the RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long, global = true)]
    outdir: Option<PathBuf>,
    /// Override the series truncation tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Worker thread count (results do not depend on it).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the tail classification of a jump-law descriptor.
    Classify {
        /// Law descriptor, e.g. "half-normal" or "discretize base=(half-normal) step=0.25".
        law: Vec<String>,
    },
    /// Print the supremum/endpoint tail-ratio curve as CSV.
    Ratio {
        #[arg(long, default_value_t = 0.0)]
        sigma: f64,
        #[arg(long, default_value_t = 0.0)]
        b: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        law: String,
        /// Comma-separated u grid.
        #[arg(long, value_delimiter = ',', required = true)]
        u: Vec<f64>,
        /// Denominator source: "mc" or "exact".
        #[arg(long, default_value = "exact")]
        denominator: String,
        #[arg(long)]
        bracket_step: Option<f64>,
    },
    /// Run one experiment harness from a config file and emit artifacts.
    Verify {
        /// Which harness: thm1|thm2|thm3|thm4|pl|pl2|main.
        which: String,
        config: PathBuf,
    },
}

fn build_model(cfg: &RunConfig) -> Result<LevyModel, levytail::Error> {
    let law = cfg.law_parsed()?;
    let model = LevyModel::new(cfg.sigma, cfg.drift_b, cfg.lambda, law)?;
    match cfg.bracket_step {
        Some(s) => model.with_bracket_step(s),
        None => Ok(model),
    }
}

fn dispatch(cfg: &RunConfig) -> Result<ExperimentReport, levytail::Error> {
    let (trials, seed, tol) = (cfg.trials, cfg.seed, cfg.tol);
    match cfg.experiment {
        ExperimentId::Thm1 => run_thm1(&build_model(cfg)?, &cfg.u_grid, trials, seed, tol),
        ExperimentId::Thm2 => run_thm2(&build_model(cfg)?, &cfg.u_grid, trials, seed, tol),
        ExperimentId::Thm3 => {
            run_thm3(&build_model(cfg)?, &cfg.n_range, cfg.eps, trials, seed, tol)
        }
        ExperimentId::Thm4 => run_thm4(&cfg.n_range, trials, seed, cfg.v, tol),
        ExperimentId::Pl => run_prop_pl(&cfg.law_parsed()?, cfg.lambda, cfg.shift_a, &cfg.u_grid, tol),
        ExperimentId::Pl2 => {
            run_prop_pl2(&build_model(cfg)?, &cfg.u_grid, &cfg.alpha_grid, trials, seed, tol)
        }
        ExperimentId::Main => run_prop_main(&build_model(cfg)?, &cfg.u_grid, trials, seed, tol),
    }
}

fn verdict_exit(v: Verdict) -> ExitCode {
    match v {
        Verdict::Consistent => ExitCode::SUCCESS,
        Verdict::Inconsistent | Verdict::HypothesesUnverified => ExitCode::from(2),
        Verdict::LowConfidence => ExitCode::from(3),
    }
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        if w == 0 {
            return fail("--workers must be at least 1");
        }
        // Ignore the error if a pool already exists; counts never affect results.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
    }

    match cli.cmd {
        Cmd::Classify { law } => {
            let text = law.join(" ");
            let parsed = match parse_law(&text) {
                Ok(l) => l,
                Err(e) => return fail(e),
            };
            // Unbounded laws can decay only polynomially in the two-copy
            // ratio, so probe them much deeper than the default grid.
            let probe = if parsed.log_tail(100.0) > f64::NEG_INFINITY {
                ProbeConfig { u_max: 200.0, grid: 80, a_probe: 1.0 }
            } else {
                ProbeConfig::default()
            };
            match classify_tail(&parsed, &probe) {
                Ok(class) => {
                    println!("{}", serde_json::to_string_pretty(&class).expect("serializes"));
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Cmd::Ratio { sigma, b, lambda, law, u, denominator, bracket_step } => {
            let mode = match denominator.as_str() {
                "mc" => DenominatorMode::Mc,
                "exact" => DenominatorMode::Exact,
                other => return fail(format!("unknown denominator mode {other:?}")),
            };
            let parsed = match parse_law(&law) {
                Ok(l) => l,
                Err(e) => return fail(e),
            };
            let model = match LevyModel::new(sigma, b, lambda, parsed).and_then(|m| match bracket_step {
                Some(s) => m.with_bracket_step(s),
                None => Ok(m),
            }) {
                Ok(m) => m,
                Err(e) => return fail(e),
            };
            let trials = cli.trials.unwrap_or(1_000_000);
            let seed = cli.seed.unwrap_or(0);
            let tol = cli.tol.unwrap_or(1e-10);
            match ratio_curve(&model, &u, trials, seed, mode, tol) {
                Ok(curve) => {
                    print!(
                        "u,numerator,numerator_err,denominator,denominator_err,ratio,ratio_lo,ratio_hi,method\n"
                    );
                    for p in &curve.points {
                        println!(
                            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
                            p.u,
                            p.numerator,
                            p.numerator_err,
                            p.denominator,
                            p.denominator_err,
                            p.ratio,
                            p.ratio_lo,
                            p.ratio_hi,
                            p.method,
                        );
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Cmd::Verify { which, config } => {
            let Some(which_id) = ExperimentId::parse(&which) else {
                return fail(format!("unknown experiment {which:?}"));
            };
            let text = match std::fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => return fail(format!("reading {}: {e}", config.display())),
            };
            let mut cfg = match parse_config(&text) {
                Ok(c) => c,
                Err(errors) => {
                    for e in &errors {
                        eprintln!("config error: {e}");
                    }
                    return ExitCode::from(1);
                }
            };
            if cfg.experiment != which_id {
                return fail(format!(
                    "config declares experiment {:?} but {which:?} was requested",
                    cfg.experiment.name()
                ));
            }
            if let Some(t) = cli.trials {
                cfg.trials = t;
            }
            if let Some(s) = cli.seed {
                cfg.seed = s;
            }
            if let Some(t) = cli.tol {
                cfg.tol = t;
            }
            if let Some(dir) = cli.outdir {
                cfg.outdir = dir;
            }
            eprintln!(
                "running {}: {} rows requested, {} trials, seed {}",
                cfg.experiment.name(),
                cfg.u_grid.len().max(cfg.n_range.len()),
                cfg.trials,
                cfg.seed
            );
            let report = match dispatch(&cfg) {
                Ok(r) => r,
                Err(e) => return fail(e),
            };
            if let Err(e) = output::write_outputs(&cfg.outdir, &cfg, &report, cli.workers) {
                return fail(e);
            }
            eprintln!(
                "verdict {:?}; artifacts in {}",
                report.verdict,
                cfg.outdir.display()
            );
            verdict_exit(report.verdict)
        }
    }
}
