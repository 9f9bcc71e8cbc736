//! Canned parameter sets for the reference figures `fig2` to `fig8`.
//!
//! The coupling constants behind the reference curves are not known. Every
//! preset uses the natural coupling with contact radius `ρ = 0.05` and
//! `c_G = 0`, so the curves match the reference curves in peak positions and trends,
//! not point by point.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use geoscat::Scatterer;
use serde::Serialize;

use crate::config::{
    Axis, CouplingSection, GeometrySection, GreensSection, JunctionSection, OutputSection,
    QuadratureSection, RunConfig, Scale, SweepSection,
};
use crate::store::TableStore;
use crate::sweep::{
    current_sweep, transmission_sweep, with_pool, write_current_csv, write_transmission_csv,
};

pub const FIGURES: [&str; 7] = ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8"];

pub const TRANSMISSION_POINTS: usize = 2000;
pub const CURRENT_POINTS: usize = 200;
pub const TRANSMISSION_CUTOFF: f64 = 1e5;
pub const CURRENT_CUTOFF: f64 = 1e4;
pub const PRESET_RHO: f64 = 0.05;

/// Outgoing junctions on the 2×1 rectangle; the incoming one is at (0.2, 0.1).
pub const RECTANGLE_OUTGOING: [[f64; 2]; 3] = [[1.8, 0.9], [0.2, 0.9], [1.0, 0.5]];

/// Junction pairs on the triangle: near a vertex to the centroid, between two
/// central points, and between the two most distant vertices.
pub fn triangle_junctions() -> [([f64; 2], [f64; 2]); 3] {
    [
        ([0.1, 0.2], [1.0, 5.0 / 3f64.sqrt()]),
        ([1.195408, 2.392313], [1.142144, 1.645060]),
        ([0.1, 0.2], [0.1, 6.6]),
    ]
}

/// One output file of a figure.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve {
    pub file: String,
    pub config: RunConfig,
}

fn base(
    geometry: GeometrySection,
    junctions: ([f64; 2], [f64; 2]),
    cutoff: f64,
    sweep: SweepSection,
) -> RunConfig {
    RunConfig {
        geometry,
        junctions: JunctionSection {
            x1: junctions.0,
            x2: junctions.1,
        },
        coupling: CouplingSection::Natural { rho: PRESET_RHO },
        greens: GreensSection {
            lambda_max: cutoff,
            c_g: 0.0,
            ..GreensSection::default()
        },
        quadrature: QuadratureSection::default(),
        sweep,
        output: OutputSection::default(),
    }
}

fn lambda_sweep() -> SweepSection {
    SweepSection {
        variable: Axis::Lambda,
        start: 1.0,
        stop: 200.0,
        count: TRANSMISSION_POINTS,
        scale: Scale::Linear,
        beta: 25.0,
        mu1: 0.0,
        bias: 0.0,
        vg: 0.0,
        conductance_step: None,
    }
}

fn current_axis(
    variable: Axis,
    start: f64,
    stop: f64,
    beta: f64,
    mu1: f64,
    bias: f64,
) -> SweepSection {
    SweepSection {
        variable,
        start,
        stop,
        count: CURRENT_POINTS,
        scale: Scale::Linear,
        beta,
        mu1,
        bias,
        vg: 0.0,
        conductance_step: None,
    }
}

fn label(x: f64) -> String {
    format!("{x}").replace('.', "p")
}

/// The curves making up `figure`.
pub fn preset(figure: &str) -> Result<Vec<Curve>> {
    let tri = GeometrySection::triangle;
    let case_one = triangle_junctions()[0];
    let current = |file: String, sweep: SweepSection| Curve {
        file,
        config: base(tri(), case_one, CURRENT_CUTOFF, sweep),
    };
    let curves = match figure {
        "fig2" => RECTANGLE_OUTGOING
            .iter()
            .map(|&x2| Curve {
                file: format!("fig2_x2_{}_{}.csv", label(x2[0]), label(x2[1])),
                config: base(
                    GeometrySection::rectangle(2.0, 1.0),
                    ([0.2, 0.1], x2),
                    TRANSMISSION_CUTOFF,
                    lambda_sweep(),
                ),
            })
            .collect(),
        "fig3" => triangle_junctions()
            .iter()
            .zip(["i", "ii", "iii"])
            .map(|(&j, name)| Curve {
                file: format!("fig3_case_{name}.csv"),
                config: base(tri(), j, TRANSMISSION_CUTOFF, lambda_sweep()),
            })
            .collect(),
        "fig4" => [1.0, 5.0, 10.0, 15.0]
            .iter()
            .map(|&mu1| {
                current(
                    format!("fig4_mu1_{}.csv", label(mu1)),
                    current_axis(Axis::V, 0.0, 20.0, 25.0, mu1, 0.0),
                )
            })
            .collect(),
        "fig5" => [1.0, 4.0, 10.0, 15.0]
            .iter()
            .map(|&v| {
                current(
                    format!("fig5_V_{}.csv", label(v)),
                    current_axis(Axis::Mu1, 0.0, 30.0, 25.0, 0.0, v),
                )
            })
            .collect(),
        "fig6" => [0.7, 0.5, 0.3, 0.1]
            .iter()
            .map(|&beta| {
                current(
                    format!("fig6_beta_{}.csv", label(beta)),
                    current_axis(Axis::Mu1, 0.0, 30.0, beta, 0.0, 2.0),
                )
            })
            .collect(),
        "fig7" => [5.0, 10.0, 15.0, 20.0]
            .iter()
            .map(|&mu1| {
                current(
                    format!("fig7_mu1_{}.csv", label(mu1)),
                    current_axis(Axis::Vg, 0.0, 50.0, 25.0, mu1, 1.0),
                )
            })
            .collect(),
        "fig8" => [0.0, 25.0, 40.0]
            .iter()
            .map(|&mu1| {
                current(
                    format!("fig8_mu1_{}_mu2_60.csv", label(mu1)),
                    current_axis(Axis::Vg, 0.0, 120.0, 25.0, mu1, 60.0 - mu1),
                )
            })
            .collect(),
        other => bail!(
            "unknown figure '{other}'; expected one of {}",
            FIGURES.join(", ")
        ),
    };
    Ok(curves)
}

#[derive(Serialize)]
struct Manifest<'a> {
    figure: &'a str,
    note: &'a str,
    curves: &'a [Curve],
}

/// Writes one CSV per curve plus `<figure>_manifest.toml` into `out_dir`.
pub fn reproduce(
    figure: &str,
    out_dir: &Path,
    store: &TableStore,
    threads: Option<usize>,
) -> Result<Vec<PathBuf>> {
    let mut curves = preset(figure)?;
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let mut written = Vec::new();
    for curve in &mut curves {
        curve.config.output.path = Some(curve.file.clone());
        let r = curve.config.resolve()?;
        let (table, status) = store.load_or_build(&r.geometry, r.greens.lambda_max)?;
        log::info!("{}: {} modes ({status})", curve.file, table.len());
        let scatterer = Scatterer::new(&table, &r.junctions, r.coupling, &r.greens)?;
        let path = out_dir.join(&curve.file);
        let mut w = BufWriter::new(
            File::create(&path).with_context(|| format!("creating {}", path.display()))?,
        );
        let sweep = &curve.config.sweep;
        if sweep.variable == Axis::Lambda {
            let grid = sweep.grid()?;
            let rows = with_pool(threads, || transmission_sweep(&scatterer, &grid, sweep.vg))??;
            write_transmission_csv(&rows, &mut w)?;
        } else {
            let rows = with_pool(threads, || current_sweep(&scatterer, sweep, &r.quad))??;
            write_current_csv(
                sweep.variable,
                &rows,
                sweep.conductance_step.is_some(),
                &mut w,
            )?;
        }
        w.flush()?;
        written.push(path);
    }
    let manifest = Manifest {
        figure,
        note: "natural coupling with rho = 0.05 and c_G = 0 stand in for the unknown coupling constants",
        curves: &curves,
    };
    let path = out_dir.join(format!("{figure}_manifest.toml"));
    std::fs::write(&path, toml::to_string(&manifest)?)
        .with_context(|| format!("writing {}", path.display()))?;
    written.push(path);
    Ok(written)
}
