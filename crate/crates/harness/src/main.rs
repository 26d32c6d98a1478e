use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fracshift::check::{self, Violation};
use fracshift::config::CONFIG_ENV;
use fracshift::experiments::{self, example1_indicator, example1_smooth, example2};
use fracshift::{output, ExperimentConfig, ExperimentKind, FileConfig, HarnessError, Reference, Result, Scheme};
use fracshift_core::series;

#[derive(Parser)]
#[command(name = "fracshift", version, about = "θ-shifted BDF2 convolution quadrature experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print generating-function or shift weights as CSV.
    Weights {
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        /// Highest index N.
        #[arg(long, default_value_t = 20)]
        n: usize,
        /// Dump θ_n (coefficients of e^{θδ}) instead of ω_n.
        #[arg(long)]
        shift: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one scheme and print the nodal solution at the last step.
    Solve {
        #[arg(long, value_enum, default_value_t = Problem::Smooth)]
        problem: Problem,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        #[arg(long, default_value_t = 1.0 / 64.0)]
        tau: f64,
        #[arg(long, default_value_t = 32)]
        steps: usize,
        #[arg(long, default_value_t = 255)]
        m: usize,
        #[arg(long, default_value = "corrected", value_parser = parse_scheme)]
        scheme: Scheme,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Smooth-data convergence table.
    Table1(ExperimentArgs),
    /// Nonsmooth-data convergence table.
    Table2(ExperimentArgs),
    /// Error at fixed τ across α for the problem with a source term.
    Sweep(ExperimentArgs),
    /// Decay of the shift weights |θ_n|.
    Decay(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Problem {
    /// v = sin x on (0, π)
    Smooth,
    /// v = χ_(0,1/2) on (0, 1)
    Indicator,
    /// u = (E_α(−t^α) + t³) sin x on (0, π)
    Source,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, env = CONFIG_ENV)]
    config: Option<PathBuf>,
    /// Interior mesh nodes.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    threads: Option<usize>,
    /// Comma-separated step sizes, coarsest first.
    #[arg(long, value_delimiter = ',')]
    taus: Option<Vec<f64>>,
    #[arg(long, value_parser = parse_reference)]
    reference: Option<Reference>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Exit with status 3 when a threshold is violated.
    #[arg(long)]
    check: bool,
}

fn parse_scheme(s: &str) -> std::result::Result<Scheme, String> {
    s.parse().map_err(|e: HarnessError| e.to_string())
}

fn parse_reference(s: &str) -> std::result::Result<Reference, String> {
    s.parse().map_err(|e: HarnessError| e.to_string())
}

fn resolve(kind: ExperimentKind, args: &ExperimentArgs) -> Result<ExperimentConfig> {
    let file = match &args.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let mut cfg = ExperimentConfig::resolve(kind, &file)?;
    if let Some(m) = args.m {
        cfg.m = m;
    }
    if let Some(t) = args.threads {
        cfg.threads = t;
    }
    if let Some(t) = &args.taus {
        cfg.taus = t.clone();
    }
    if let Some(r) = args.reference {
        cfg.reference = r;
    }
    if let Some(o) = &args.output {
        cfg.output = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(output::create(p)?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn finish(violations: Vec<Violation>, check: bool) -> Result<()> {
    for v in &violations {
        eprintln!("threshold: {v}");
    }
    if check && !violations.is_empty() {
        return Err(HarnessError::Threshold(violations.len()));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Weights { alpha, theta, n, shift, out } => {
            let delta = series::bdf2();
            let w = if shift {
                series::shift_weights(&delta, theta, n)?
            } else {
                series::omega_weights(&delta, &delta, alpha, theta, n)?
            };
            output::write_weights(sink(out.as_deref())?, &w.values)
        }
        Command::Solve { problem, alpha, theta, tau, steps, m, scheme, out } => {
            if !(tau > 0.0 && tau.is_finite()) || steps == 0 || m == 0 {
                return Err(HarnessError::Config("solve needs τ > 0, steps ≥ 1 and m ≥ 1".into()));
            }
            if !(alpha > 0.0 && alpha < 1.0) || !(theta > -1.0 && theta < 1.0) {
                return Err(HarnessError::Config(format!("need α ∈ (0, 1) and θ ∈ (−1, 1), got {alpha}, {theta}")));
            }
            let spec = match problem {
                Problem::Smooth => example1_smooth(alpha),
                Problem::Indicator => example1_indicator(alpha),
                Problem::Source => example2(alpha),
            };
            let space = experiments::space_for(&spec, m)?;
            let run = experiments::run_scheme(&spec, &space, theta, tau, steps, scheme, 0)?;
            let t = run.trajectory.time(steps);
            let u = run.trajectory.u(steps);
            let err = match problem {
                Problem::Smooth => Some(fracshift_core::stepper::l2_error(&space.mesh, &u, experiments::example1_exact(alpha, t)?)),
                Problem::Source => Some(fracshift_core::stepper::l2_error(&space.mesh, &u, experiments::example2_exact(alpha, t)?)),
                Problem::Indicator => None,
            };
            eprintln!("t = {t}, residual = {:e}", run.residual);
            if let Some(e) = err {
                eprintln!("L2 error against the exact solution = {e:e}");
            }
            let mut w = csv::Writer::from_writer(sink(out.as_deref())?);
            w.write_record(["x", "u"])?;
            for (i, v) in u.iter().enumerate() {
                w.write_record([format!("{:.16e}", space.mesh.node(i + 1)), format!("{v:.16e}")])?;
            }
            w.flush()?;
            Ok(())
        }
        Command::Table1(args) => rates(ExperimentKind::Table1, &args),
        Command::Table2(args) => rates(ExperimentKind::Table2, &args),
        Command::Sweep(args) => {
            let cfg = resolve(ExperimentKind::AlphaSweep, &args)?;
            let r = experiments::run_alpha_sweep(&cfg)?;
            output::write_sweep(output::create(&cfg.output)?, &r.rows)?;
            for row in &r.rows {
                println!("θ={:>5} α={:<6} τ={:.3e} error={:.3e}", row.theta, row.alpha, row.tau, row.error);
            }
            finish(check::check_sweep(&r), args.check)
        }
        Command::Decay(args) => {
            let cfg = resolve(ExperimentKind::WeightDecay, &args)?;
            let s = experiments::run_weight_decay(&cfg)?;
            output::write_decay(output::create(&cfg.output)?, &s)?;
            let fit = cfg.output.with_extension("fit.csv");
            output::write_decay_fit(output::create(&fit)?, &s)?;
            for d in &s {
                println!("θ={:>5} slope={:?} |θ_last|={:.3e}", d.theta, d.slope, d.magnitudes.last().unwrap_or(&0.0));
            }
            finish(check::check_decay(&s), args.check)
        }
    }
}

fn rates(kind: ExperimentKind, args: &ExperimentArgs) -> Result<()> {
    let cfg = resolve(kind, args)?;
    let table = match kind {
        ExperimentKind::Table1 => experiments::run_table1(&cfg)?,
        _ => experiments::run_table2(&cfg)?,
    };
    output::write_rate_table(output::create(&cfg.output)?, &table)?;
    for r in &table.rows {
        println!(
            "α={} θ={:>4} {:<9} finest error={:.3e} rate={:.3}",
            r.alpha,
            r.theta,
            r.scheme.to_string(),
            r.finest_error(),
            r.rate
        );
    }
    println!("max residual {:.3e}", table.max_residual);
    finish(check::check_rates(&table), args.check)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // bad flags are configuration errors
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
