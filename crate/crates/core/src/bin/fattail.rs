use clap::{Parser, Subcommand};
use fattail::sim::tasks::{coefficient_table, fit_series, mode_table, rates_table, CoeffsConfig, EvolveModeConfig, RatesConfig, Table};
use fattail::sim::{fit_rate, plot, run_simulation, verify_suite, weighted_norm_monitor, SimConfig, VerifyConfig};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "fattail", version, about = "Kinetic equations with fat-tailed equilibria")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Io {
    /// JSON configuration
    config: PathBuf,
    /// CSV output (stdout when omitted)
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// SVG plot
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Coefficient family and K(ξ) over a |ξ| sweep
    Coeffs(Io),
    /// One Fourier mode with entropy and I-term bookkeeping
    EvolveMode(Io),
    /// Full d = 1 simulation by mode sweep
    Simulate(Io),
    /// Predicted decay rates, and optionally a fit of a simulated series
    Rates(Io),
    /// Invariant battery; exits nonzero if any check fails
    Verify {
        /// JSON configuration (defaults when omitted)
        config: Option<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

fn read<T: serde::de::DeserializeOwned>(path: &Path) -> fattail::Result<T> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

fn emit(t: &Table, out: &Option<PathBuf>) -> fattail::Result<()> {
    match out {
        Some(p) => t.write_csv(p),
        None => t.write(std::io::stdout().lock()),
    }
}

fn run(cli: Cli) -> fattail::Result<bool> {
    match cli.command {
        Command::Coeffs(io) => {
            let cfg: CoeffsConfig = read(&io.config)?;
            let t = coefficient_table(&cfg)?;
            emit(&t, &io.out)?;
            if let Some(svg) = io.svg {
                let (xi, mu2) = (t.column("xi").unwrap_or_default(), t.column("mu2").unwrap_or_default());
                plot::write_decay_svg(svg, &xi, &mu2, None, "μ₂ against |ξ|")?;
            }
        }
        Command::EvolveMode(io) => {
            let cfg: EvolveModeConfig = read(&io.config)?;
            let t = mode_table(&cfg)?;
            emit(&t, &io.out)?;
            if let Some(svg) = io.svg {
                let (ts, n) = (t.column("t").unwrap_or_default(), t.column("norm2").unwrap_or_default());
                plot::write_decay_svg(svg, &ts, &n, None, "‖f̂(t)‖² against t")?;
            }
        }
        Command::Simulate(io) => {
            let mut cfg = SimConfig::load(&io.config)?;
            if io.out.is_some() {
                cfg.output.csv = io.out.clone();
            }
            if io.svg.is_some() {
                cfg.output.svg = io.svg.clone();
            }
            let r = run_simulation(&cfg)?;
            if cfg.output.csv.is_none() {
                r.write_csv("/dev/stdout")?;
            }
            let f = fit_rate(&r.times, &r.l2_norm2, cfg.fit.model, cfg.fit.window)?;
            eprintln!(
                "tau_hat = {:.4} (stderr {:.2e}, window [{}, {}]), predicted {:?}{}",
                f.tau_hat,
                f.stderr,
                f.window.0,
                f.window.1,
                r.prediction.tau,
                if r.prediction.log_corrected { " with log correction" } else { "" }
            );
            eprintln!(
                "mass drift {:.1e}, plancherel error {:.1e}, implicit modes {}/{}",
                r.mass_drift,
                r.plancherel_error,
                r.implicit_modes,
                r.modes.len()
            );
            if !f.is_valid(cfg.fit.stderr_max) {
                eprintln!("warning: fit stderr above {}", cfg.fit.stderr_max);
            }
            if r.box_limited {
                eprintln!("warning: box-limited run ({:.0}% of the norm near xi_min)", 100.0 * r.box_fraction);
            }
            if r.k > 0.0 {
                let w = weighted_norm_monitor(&r, cfg.weighted_gate)?;
                eprintln!("weighted norm k = {}: sup ratio {:.4}, final slope {:.4}", w.k, w.ratio_max, w.final_decade_slope);
            }
        }
        Command::Rates(io) => {
            let cfg: RatesConfig = read(&io.config)?;
            emit(&rates_table(&cfg)?, &io.out)?;
            if let Some(fit) = &cfg.fit {
                let f = fit_series(fit)?;
                eprintln!("{}", serde_json::to_string(&f)?);
            }
        }
        Command::Verify { config, out } => {
            let cfg = match config {
                Some(p) => VerifyConfig::from_json(&std::fs::read_to_string(p)?)?,
                None => VerifyConfig::default(),
            };
            let report = verify_suite(&cfg)?;
            for c in &report.checks {
                println!("{} {} value={:.3e} threshold={:.3e} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.threshold, c.detail);
            }
            if let Some(p) = out {
                report.write_csv(p)?;
            }
            return Ok(report.passed());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
