//! Command-line interface.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use geoscat::{ModeTable, Scatterer};
use serde::Deserialize;

use crate::config::{Axis, GeometrySection, GreensSection, OutputSection, RunConfig};
use crate::reproduce::{reproduce, FIGURES};
use crate::store::{cache_dir, CacheStatus, TableStore};
use crate::sweep::{
    current_sweep, fmt_f64, transmission_sweep, with_pool, write_current_csv,
    write_transmission_csv,
};

#[derive(Debug, Parser)]
#[command(
    name = "geoscat",
    version,
    about = "Transport through a geometric scatterer"
)]
pub struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Worker threads (default: one per core).
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// Output file (directory for `reproduce`); standard output if omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Mode-table cache directory (overrides GEOSCAT_CACHE_DIR).
    #[arg(long, global = true, value_name = "DIR")]
    pub cache: Option<PathBuf>,
    /// Log progress and cache activity to standard error.
    #[arg(long, short, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Enumerate and cache the spectrum; with --out, also list the modes.
    Modes,
    /// |t|² on a lambda grid.
    Transmission,
    /// Current (and optionally conductance) along a bath-parameter axis.
    Current,
    /// Regenerate the data behind one figure.
    Reproduce {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(FIGURES))]
        figure: String,
    },
}

/// The parts of a configuration the `modes` command needs.
#[derive(Debug, Deserialize)]
struct ModesConfig {
    geometry: GeometrySection,
    #[serde(default)]
    greens: GreensSection,
    #[serde(default)]
    output: OutputSection,
}

fn require_config(cli: &Cli) -> Result<&Path> {
    cli.config
        .as_deref()
        .context("this command needs --config PATH")
}

fn open_output(flag: Option<&Path>, configured: Option<&str>) -> Result<Box<dyn Write>> {
    let path = flag
        .map(Path::to_path_buf)
        .or_else(|| configured.map(PathBuf::from));
    Ok(match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            Box::new(BufWriter::new(
                File::create(&p).with_context(|| format!("creating {}", p.display()))?,
            ))
        }
        None => Box::new(BufWriter::new(std::io::stdout())),
    })
}

pub fn modes_summary(table: &ModeTable, status: CacheStatus, path: &Path) -> String {
    let first = table.modes().first().map_or(f64::NAN, |m| m.eigenvalue);
    let last = table.modes().last().map_or(f64::NAN, |m| m.eigenvalue);
    format!(
        "{} modes of {} below {}: lambda in [{}, {}]; Weyl deviation {:+.3}% (leading term), {:+.3}% (with boundary term); {} ({})",
        table.len(),
        table.geometry(),
        table.lambda_max(),
        fmt_f64(first),
        fmt_f64(last),
        100.0 * table.weyl_deviation(),
        100.0 * table.weyl_boundary_deviation(),
        status,
        path.display()
    )
}

fn cmd_modes(cli: &Cli) -> Result<()> {
    let path = require_config(cli)?;
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cfg: ModesConfig =
        toml::from_str(&text).with_context(|| format!("in {}", path.display()))?;
    let geometry = cfg.geometry.build()?;
    let store = TableStore::new(cache_dir(
        cli.cache.as_deref(),
        cfg.output.cache_dir.as_deref(),
    ));
    let (table, status) = store.load_or_build(&geometry, cfg.greens.lambda_max)?;
    println!(
        "{}",
        modes_summary(&table, status, &store.path_for(&geometry))
    );
    if let Some(out) = &cli.out {
        let mut w = open_output(Some(out), None)?;
        writeln!(w, "index,q1,q2,eigenvalue")?;
        for (i, m) in table.modes().iter().enumerate() {
            writeln!(
                w,
                "{},{},{},{}",
                i + 1,
                m.quantum.0,
                m.quantum.1,
                fmt_f64(m.eigenvalue)
            )?;
        }
        w.flush()?;
    }
    Ok(())
}

fn scatterer_for(cli: &Cli, cfg: &RunConfig) -> Result<(Scatterer, crate::config::Resolved)> {
    let r = cfg.resolve()?;
    let store = TableStore::new(cache_dir(
        cli.cache.as_deref(),
        cfg.output.cache_dir.as_deref(),
    ));
    let (table, status) = store.load_or_build(&r.geometry, r.greens.lambda_max)?;
    log::info!(
        "{}",
        modes_summary(&table, status, &store.path_for(&r.geometry))
    );
    Ok((
        Scatterer::new(&table, &r.junctions, r.coupling, &r.greens)?,
        r,
    ))
}

fn cmd_transmission(cli: &Cli) -> Result<()> {
    let cfg = RunConfig::load(require_config(cli)?)?;
    if cfg.sweep.variable != Axis::Lambda {
        bail!("transmission sweeps need [sweep] variable = \"lambda\"");
    }
    let (s, _) = scatterer_for(cli, &cfg)?;
    let grid = cfg.sweep.grid()?;
    let threads = cli.threads.or(cfg.output.threads);
    let rows = with_pool(threads, || transmission_sweep(&s, &grid, cfg.sweep.vg))??;
    let flagged = rows.iter().filter(|r| !r.status.is_ok()).count();
    if flagged > 0 {
        log::warn!("{flagged} of {} points flagged", rows.len());
    }
    let mut w = open_output(cli.out.as_deref(), cfg.output.path.as_deref())?;
    write_transmission_csv(&rows, &mut w)?;
    w.flush()?;
    Ok(())
}

fn cmd_current(cli: &Cli) -> Result<()> {
    let cfg = RunConfig::load(require_config(cli)?)?;
    let (s, r) = scatterer_for(cli, &cfg)?;
    let threads = cli.threads.or(cfg.output.threads);
    let rows = with_pool(threads, || current_sweep(&s, &cfg.sweep, &r.quad))??;
    let flagged = rows.iter().filter(|r| !r.status.is_ok()).count();
    if flagged > 0 {
        log::warn!("{flagged} of {} points flagged", rows.len());
    }
    let mut w = open_output(cli.out.as_deref(), cfg.output.path.as_deref())?;
    write_current_csv(
        cfg.sweep.variable,
        &rows,
        cfg.sweep.conductance_step.is_some(),
        &mut w,
    )?;
    w.flush()?;
    Ok(())
}

fn cmd_reproduce(cli: &Cli, figure: &str) -> Result<()> {
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("figures"));
    let store = TableStore::new(cache_dir(cli.cache.as_deref(), None));
    for p in reproduce(figure, &dir, &store, cli.threads)? {
        println!("{}", p.display());
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Modes => cmd_modes(cli),
        Command::Transmission => cmd_transmission(cli),
        Command::Current => cmd_current(cli),
        Command::Reproduce { figure } => cmd_reproduce(cli, figure),
    }
}
