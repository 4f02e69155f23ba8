use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ncqed::scenario::config::Dynamics;
use ncqed::scenario::{self, RunOverrides, ScenarioConfig};
use ncqed::Result;

/// Modulated Jaynes-Cummings and Rabi scenarios driven by a TOML (or JSON) config.
#[derive(Parser)]
#[command(name = "ncqed", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dressed levels and their corrected frequencies.
    Spectrum(Common),
    /// First- and second-order transition rates at the resolved modulation frequency.
    Rates(Common),
    /// Time series of ⟨n⟩, P_e and P_g0.
    Evolve(Common),
    /// Locate the exact resonance by scanning the modulation frequency.
    Tune(Common),
    /// One evolution per value of the `[sweep]` axis.
    Sweep(Common),
    /// Long-time state under dissipation, compared with the closed forms where they apply.
    Steady(Common),
    /// Gaussian dynamics of the collective two-mode model.
    Collective(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory (overrides `output.dir`).
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Resonance order K.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    order: Option<u8>,
    #[arg(long, conflicts_with = "lindblad")]
    unitary: bool,
    #[arg(long)]
    lindblad: bool,
    /// Run even when the validity ratios exceed their threshold.
    #[arg(long)]
    force: bool,
}

impl Common {
    fn overrides(&self) -> RunOverrides {
        RunOverrides {
            out_dir: self.out.clone(),
            order: self.order,
            dynamics: match (self.unitary, self.lindblad) {
                (true, _) => Some(Dynamics::Unitary),
                (_, true) => Some(Dynamics::Lindblad),
                _ => None,
            },
            force: self.force,
        }
    }

    fn load(&self) -> Result<ScenarioConfig> {
        let mut cfg = ScenarioConfig::load(&self.config)?;
        cfg.apply(&self.overrides())?;
        Ok(cfg)
    }
}

fn warn_all(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn report_dir(cfg: &ScenarioConfig, prefix_suffix: &str) {
    let path = Path::new(&cfg.output.dir).join(format!("{}{}", cfg.output.prefix, prefix_suffix));
    println!("wrote {}", path.display());
}

fn run(cmd: &Command) -> Result<()> {
    match cmd {
        Command::Spectrum(c) => {
            let cfg = c.load()?;
            let (report, _) = scenario::run_spectrum(&cfg, c.force)?;
            println!("{} dressed levels up to m = {}", report.rows, report.m_max);
            report_dir(&cfg, "_spectrum.csv");
        }
        Command::Rates(c) => {
            let cfg = c.load()?;
            let (report, _) = scenario::run_rates(&cfg, c.force)?;
            println!("eta = {:.10}", report.resonance.eta);
            if let Some(rate) = report.resonance.rate {
                println!(
                    "{} -> {} (K = {}): rate/g0 = {:.4e}",
                    report.resonance.source,
                    report.resonance.target,
                    report.resonance.order,
                    rate / cfg.system.g0
                );
            }
            report_dir(&cfg, "_rates.csv");
        }
        Command::Evolve(c) => {
            let cfg = c.load()?;
            let run = scenario::run_evolve(&cfg, c.force)?;
            warn_all(&run.warnings);
            let r = &run.report;
            println!(
                "eta = {:.10} ({:?}), n_max = {}",
                r.resonance.eta, r.resonance.eta_source, r.n_max
            );
            println!("max_t [1 - P_g0] = {:.6}", r.max_excitation);
            report_dir(&cfg, "_timeseries.csv");
        }
        Command::Tune(c) => {
            let cfg = c.load()?;
            let (report, _) = scenario::run_tune(&cfg, c.force)?;
            let t = &report.result;
            println!("eta* = {:.10}  predicted = {:.10}", t.eta_star, t.predicted_eta);
            println!(
                "shift = {:+.4} delta_plus (bare), {:+.4} delta_plus (corrected); peak {:.4}",
                t.bare_shift_delta_plus, t.sefs_shift_delta_plus, t.objective_star
            );
            report_dir(&cfg, "_tune.csv");
        }
        Command::Sweep(c) => {
            let cfg = c.load()?;
            let report = scenario::run_sweep(&cfg, c.force)?;
            for r in report.rows.iter().filter(|r| r.error.is_some()) {
                eprintln!("warning: value {}: {}", r.value, r.error.as_deref().unwrap_or_default());
            }
            println!("{} points, {} failed", report.rows.len(), report.failures);
            report_dir(&cfg, "_sweep.csv");
        }
        Command::Steady(c) => {
            let cfg = c.load()?;
            let report = scenario::run_steady(&cfg, c.force)?;
            let o = report.steady.observables;
            println!("<n> = {:.6}  P_e = {:.6}  P_g0 = {:.6}", o.mean_n, o.p_e, o.p_g0);
            if let Some(cf) = &report.closed_form {
                let f = &cf.closed_form;
                println!(
                    "closed form: <n> = {:.6}  P_e = {:.6}  P_g0 = {:.6}",
                    f.mean_n_inf, f.p_e_inf, f.p_g0_inf
                );
            }
            report_dir(&cfg, "_steady.json");
        }
        Command::Collective(c) => {
            let cfg = c.load()?;
            let run = scenario::run_collective(&cfg)?;
            warn_all(&run.warnings);
            let r = &run.report;
            println!(
                "{:?} K = {}: |c|max = {:.4e}, <A+A> = {:.4e}, <B+B> = {:.4e} at t = {:.4e}",
                r.regime, r.order, r.magnitude, r.final_occupation_a, r.final_occupation_b, r.horizon
            );
            report_dir(&cfg, "_collective.csv");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
