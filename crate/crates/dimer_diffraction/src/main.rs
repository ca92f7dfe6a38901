use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dimer_diffraction::config::RunConfig;
use dimer_diffraction::engine::DiffractionEngine;
use dimer_diffraction::error::{ConfigError, EngineError, SolverError};
use dimer_diffraction::grating::pp_diffraction_amplitudes;
use dimer_diffraction::kinematics::{thermal_populations, validate_regime};
use dimer_diffraction::{output, pattern};

#[derive(Parser)]
#[command(
    name = "dimer-diffraction",
    about = "Elastic and inelastic diffraction of weakly bound dimers from transmission gratings",
    version
)]
struct Cli {
    /// Run configuration file (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory for CSV artifacts.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,

    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Scale factor applied to all quadrature point counts.
    #[arg(long, global = true, value_name = "FACTOR", default_value_t = 1.0)]
    quadrature_scale: f64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve and report the rotational bound-state spectrum.
    BoundStates,
    /// Compute channel intensities and synthesize the angular pattern.
    Pattern,
    /// Point-particle diffraction diagnostics for both constituents.
    PpDiagnostics,
}

enum CliError {
    Config(ConfigError),
    Solver(SolverError),
    Engine(EngineError),
    Io(std::io::Error),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        Self::Config(e)
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        Self::Solver(e)
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        Self::Engine(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: could not configure thread pool: {e}");
        }
    }
    if !(cli.quadrature_scale > 0.0) {
        eprintln!("error: --quadrature-scale must be positive");
        return ExitCode::from(2);
    }

    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(e)) => {
            eprintln!("config error: {e}");
            ExitCode::from(2)
        }
        Err(CliError::Solver(e)) => {
            eprintln!("solver error: {e}");
            ExitCode::from(3)
        }
        Err(CliError::Engine(e)) => {
            eprintln!("solver error: {e}");
            ExitCode::from(3)
        }
        Err(CliError::Io(e)) => {
            eprintln!("i/o error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| {
        CliError::Config(ConfigError::Invalid("--config PATH is required".into()))
    })?;
    Ok(RunConfig::load(path)?)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = load_config(cli)?;
    match cli.command {
        Command::BoundStates => bound_states(cli, &cfg),
        Command::Pattern => pattern_run(cli, &cfg),
        Command::PpDiagnostics => pp_diagnostics(cli, &cfg),
    }
}

fn print_regime(cfg: &RunConfig, species: &dimer_diffraction::DimerSpecies) {
    let report = validate_regime(
        &cfg.beam_spec(),
        species,
        &cfg.grating_geometry().expect("validated geometry"),
        (
            cfg.beam.rotational_threshold1_mev,
            cfg.beam.rotational_threshold2_mev,
        ),
    );
    for c in &report.checks {
        let status = if c.warn { "WARN" } else { "ok  " };
        println!(
            "  [{status}] {}: {:.4e} (threshold {:.4e})",
            c.name, c.value, c.threshold
        );
    }
}

fn bound_states(cli: &Cli, cfg: &RunConfig) -> Result<(), CliError> {
    let species = cfg.solve_species()?;
    let populations = thermal_populations(&species, cfg.beam.temperature_k);

    println!(
        "{}: {} bound state(s)",
        cfg.species.name,
        species.bound_states.len()
    );
    println!("  l   E [ueV]      population");
    for s in &species.bound_states {
        let p = populations
            .iter()
            .find(|(l, _)| *l == s.l)
            .map(|(_, p)| *p)
            .unwrap_or(0.0);
        println!("  {}   {:9.2}    {:.4e}", s.l, s.energy_uev(), p);
    }
    println!("regime checks:");
    print_regime(cfg, &species);

    output::write_file(&cli.out, "levels.csv", |w| {
        output::write_levels(w, &species, &populations)
    })?;
    output::write_file(&cli.out, "transitions.csv", |w| {
        output::write_transitions(w, &species)
    })?;
    println!("wrote {}", cli.out.join("levels.csv").display());
    println!("wrote {}", cli.out.join("transitions.csv").display());
    Ok(())
}

fn pattern_run(cli: &Cli, cfg: &RunConfig) -> Result<(), CliError> {
    let species = cfg.solve_species()?;
    let beam = cfg.beam_spec();
    let grating = cfg.grating_geometry()?;
    let couplings = cfg.couplings()?;
    let quad = cfg.quadrature(cli.quadrature_scale);

    println!("regime checks:");
    print_regime(cfg, &species);

    let engine = DiffractionEngine::new(&species, &beam, &grating, couplings, quad)?;
    let orders = cfg.orders();
    let sweep = engine.channel_sweep(&orders, cfg.output.population_floor)?;

    let pat = pattern::synthesize(
        &sweep,
        cfg.beam.w0_deg,
        cfg.beam.dw_deg,
        cfg.output.theta_min_deg,
        cfg.output.theta_max_deg,
        cfg.output.n_points,
        cfg.output.population_floor,
    );

    let n_warn = sweep
        .entries
        .iter()
        .filter(|e| e.flags.accuracy_warning)
        .count();
    println!(
        "{} channel/order combinations, {} peaks rendered",
        sweep.entries.len(),
        pat.peaks.len()
    );
    if n_warn > 0 {
        println!("warning: {n_warn} combination(s) failed the quadrature accuracy check");
    }

    output::write_file(&cli.out, "channels.csv", |w| {
        output::write_channels(w, &sweep)
    })?;
    output::write_file(&cli.out, "pattern.csv", |w| output::write_pattern(w, &pat))?;
    output::write_file(&cli.out, "peaks.csv", |w| output::write_peaks(w, &pat))?;
    for name in ["channels.csv", "pattern.csv", "peaks.csv"] {
        println!("wrote {}", cli.out.join(name).display());
    }
    Ok(())
}

fn pp_diagnostics(cli: &Cli, cfg: &RunConfig) -> Result<(), CliError> {
    let grating = cfg.grating_geometry()?;
    let couplings = cfg.couplings()?;
    let beam = cfg.beam_spec();
    let orders = cfg.orders();
    let quad = cfg.quadrature(cli.quadrature_scale);

    for (idx, (mass, coupling)) in [
        (cfg.species.mass1_amu, couplings.0),
        (cfg.species.mass2_amu, couplings.1),
    ]
    .into_iter()
    .enumerate()
    {
        let cbeam = dimer_diffraction::ConstituentBeam::new(mass, beam.v_mean, beam.incidence);
        let amps = pp_diffraction_amplitudes(&grating, &coupling, &cbeam, &orders, quad.edge_band);
        let total: f64 = amps.iter().map(|(_, c)| c.norm_sqr()).sum();
        println!(
            "constituent {} (mass {:.4} amu, C3 = {}): sum |c_n|^2 over requested orders = {:.6}",
            idx + 1,
            mass,
            coupling.c3,
            total
        );
        for &(n, c) in &amps {
            println!("  n = {n:>3}: |c_n|^2 = {:.6e}", c.norm_sqr());
        }
        let name = format!("pp_amplitudes_{}.csv", idx + 1);
        output::write_file(&cli.out, &name, |w| output::write_pp_amplitudes(w, &amps))?;
        println!("wrote {}", cli.out.join(&name).display());
    }
    Ok(())
}
