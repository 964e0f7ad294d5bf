use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use sheathsim::config::{parse_with_overrides, RunConfig};
use sheathsim::diagnostics::DiagnosticsRecord;
use sheathsim::equilibrium::{check_bohm_criterion, ion_moments, solve_equilibrium, EquilibriumSolution};
use sheathsim::io::{
    list_snapshots, read_checkpoint, read_equilibrium, read_snapshot, write_equilibrium, write_timeseries, DirectorySinks,
    EQUILIBRIUM_FILE,
};
use sheathsim::quadrature::QuadratureSpec;
use sheathsim::transport::{initial_state, Stepper};

const THREADS_ENV: &str = "SHEATHSIM_THREADS";

#[derive(Parser)]
#[command(name = "sheathsim", version, about = "Kinetic plasma sheath: equilibrium and Vlasov-Ampere evolution")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the stationary sheath and write it to the output directory.
    Equilibrium(Common),
    /// Evolve the sheath in time from an equilibrium or a checkpoint.
    Run {
        #[command(flatten)]
        common: Common,
        /// Equilibrium file to start from instead of solving afresh.
        #[arg(long)]
        equilibrium: Option<PathBuf>,
    },
    /// Recompute the time diagnostics from the snapshots in the output directory.
    Diag(Common),
}

#[derive(Args)]
struct Common {
    /// Configuration file; all keys are optional.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// Checkpoint to continue from.
    #[arg(long)]
    resume: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set numerics.d=0`.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
}

impl Common {
    fn load(&self) -> anyhow::Result<RunConfig> {
        let text = match &self.config {
            Some(p) => fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
            None => String::new(),
        };
        let mut sets = self.overrides.clone();
        if let Some(t) = self.t_final {
            sets.push(format!("numerics.t_final={t:e}"));
        }
        if let Some(dt) = self.dt {
            sets.push(format!("numerics.dt={dt:e}"));
        }
        let mut cfg = parse_with_overrides(&text, &sets).with_context(|| match &self.config {
            Some(p) => format!("in {}", p.display()),
            None => "in the default configuration".to_string(),
        })?;
        if let Some(dir) = &self.output_dir {
            cfg.io.output_dir = dir.clone();
        }
        if let Some(r) = &self.resume {
            cfg.io.resume_path = Some(r.clone());
        }
        Ok(cfg)
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    if let Err(err) = configure_threads().and_then(|_| dispatch(Cli::parse())) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let n: usize = raw.trim().parse().with_context(|| format!("{THREADS_ENV}='{raw}' is not a thread count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Equilibrium(common) => {
            let cfg = common.load()?;
            let eq = equilibrium(&cfg)?;
            let path = cfg.io.output_dir.join(EQUILIBRIUM_FILE);
            write_equilibrium(&path, &eq)?;
            println!("phi_w = {:.17}", eq.phi_w);
            println!("n0    = {:.17}", eq.n0);
            println!("written to {}", path.display());
            Ok(())
        }
        Command::Run { common, equilibrium } => run(&common.load()?, equilibrium.as_deref()),
        Command::Diag(common) => diag(&common.load()?),
    }
}

fn equilibrium(cfg: &RunConfig) -> anyhow::Result<EquilibriumSolution> {
    let started = Instant::now();
    let eq = solve_equilibrium(&cfg.physical, cfg.numerics.equilibrium_n)?;
    let quad = QuadratureSpec::default();
    let bohm = check_bohm_criterion(&ion_moments(&cfg.physical, &quad)?, eq.phi_w, &quad)?;
    log::info!(
        "equilibrium on {} cells in {:.2?}: phi_w = {:.17}, n0 = {:.17}, Bohm margin {:.6e}",
        eq.grid_n,
        started.elapsed(),
        eq.phi_w,
        eq.n0,
        bohm.margin
    );
    if !eq.monotone {
        log::warn!("equilibrium potential is not monotone");
    }
    Ok(eq)
}

fn run(cfg: &RunConfig, eq_path: Option<&Path>) -> anyhow::Result<()> {
    let dir = &cfg.io.output_dir;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let digest = cfg.digest();
    let started = Instant::now();

    let final_state = if let Some(ck_path) = &cfg.io.resume_path {
        let ck = read_checkpoint(ck_path)?;
        if ck.config_digest != digest {
            bail!(
                "{} was written with a different configuration (digest {} vs {})",
                ck_path.display(),
                ck.config_digest,
                digest
            );
        }
        log::info!("resuming from step {} (t = {})", ck.state.step, ck.state.time);
        let stepper = Stepper::new(cfg.split(), cfg.physical, ck.inflow.clone(), &ck.state)?;
        let mut sinks = DirectorySinks::new(dir, ck.inflow, digest, true)?;
        let out = stepper.resume(ck.state, &cfg.cadence(), &mut sinks)?;
        sinks.finish()?;
        out
    } else {
        let eq = match eq_path {
            Some(p) => {
                let eq = read_equilibrium(p)?;
                if eq.params != cfg.physical {
                    bail!("{} was computed for different physical parameters", p.display());
                }
                eq
            }
            None => {
                let eq = equilibrium(cfg)?;
                write_equilibrium(&dir.join(EQUILIBRIUM_FILE), &eq)?;
                eq
            }
        };
        let grid_e = cfg.grid.electrons.phase_grid()?;
        let grid_i = cfg.grid.ions.phase_grid()?;
        let (state, inflow) = initial_state(&eq, &grid_e, &grid_i, cfg.numerics.d)?;
        fs::write(dir.join("config.toml"), cfg.serialize()).with_context(|| format!("writing into {}", dir.display()))?;
        let stepper = Stepper::new(cfg.split(), cfg.physical, inflow.clone(), &state)?;
        let mut sinks = DirectorySinks::new(dir, inflow, digest, false)?;
        let out = stepper.run(state, &cfg.cadence(), &mut sinks)?;
        sinks.finish()?;
        out
    };
    log::info!("reached t = {} after {} steps in {:.2?}", final_state.time, final_state.step, started.elapsed());
    Ok(())
}

fn diag(cfg: &RunConfig) -> anyhow::Result<()> {
    let dir = &cfg.io.output_dir;
    let snapshots = list_snapshots(dir)?;
    if snapshots.is_empty() {
        bail!("no snapshots found in {}", dir.display());
    }
    let records = snapshots
        .iter()
        .map(|p| read_snapshot(p).map(|s| DiagnosticsRecord::from_state(&s)))
        .collect::<sheathsim::Result<Vec<_>>>()?;
    let out = dir.join("snapshot_diagnostics.csv");
    write_timeseries(&out, &records)?;
    println!("{} snapshots -> {}", records.len(), out.display());
    Ok(())
}
