//! Parameter sweeps and their CSV form.
//!
//! Grid points are evaluated on a rayon pool and collected in grid order.
//! Points that cannot be evaluated stay in the output as flagged rows with
//! `nan` values.

use std::io::Write;

use anyhow::{bail, Result};
use geoscat::greens::{pole_guard, GreensError};
use geoscat::scattering::ScatteringError;
use geoscat::transport::{
    conductance, current, integration_window, BathPair, ConductanceReport, QuadConfig,
    QuadratureReport, TransportError,
};
use geoscat::Scatterer;
use rayon::prelude::*;

use crate::config::{Axis, SweepSection};

/// Fraction of λ grid points allowed to fall inside a pole guard.
pub const MAX_POLE_FRACTION: f64 = 0.1;

/// Nine significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.8e}")
    }
}

fn sanitize(msg: &str) -> String {
    msg.chars()
        .map(|c| match c {
            ',' => ';',
            '\n' | '\r' | '"' => ' ',
            c => c,
        })
        .collect()
}

/// Runs `f` on a pool of `threads` workers (all cores when `None`).
pub fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n.max(1));
    }
    Ok(builder.build()?.install(f))
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowStatus {
    Ok,
    /// Inside the guard interval of an eigenvalue; not evaluated.
    PoleGuard,
    BelowThreshold,
    Failed(String),
}

impl RowStatus {
    pub fn label(&self) -> String {
        match self {
            RowStatus::Ok => "ok".into(),
            RowStatus::PoleGuard => "pole_guard".into(),
            RowStatus::BelowThreshold => "below_threshold".into(),
            RowStatus::Failed(m) => format!("error: {}", sanitize(m)),
        }
    }

    pub fn is_ok(&self) -> bool {
        matches!(self, RowStatus::Ok)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionRow {
    pub lambda: f64,
    pub t2: f64,
    pub reflection: f64,
    pub k1: f64,
    pub k2: f64,
    pub modes: usize,
    pub tail_error: f64,
    pub status: RowStatus,
}

impl TransmissionRow {
    fn flagged(lambda: f64, status: RowStatus) -> Self {
        Self {
            lambda,
            t2: f64::NAN,
            reflection: f64::NAN,
            k1: f64::NAN,
            k2: f64::NAN,
            modes: 0,
            tail_error: f64::NAN,
            status,
        }
    }

    /// `k₁(1 − |r|²) − k₂|t|²` relative to `k₁`.
    pub fn flux_residual(&self) -> f64 {
        (self.k1 * (1.0 - self.reflection) - self.k2 * self.t2) / self.k1
    }

    /// `|r|² + (k₂/k₁)²|t|² − 1`; nonzero whenever the gate is on.
    pub fn squared_ratio_residual(&self) -> f64 {
        let ratio = self.k2 / self.k1;
        self.reflection + ratio * ratio * self.t2 - 1.0
    }
}

fn in_pole_guard(eigenvalues: &[f64], lambda: f64) -> bool {
    let guard = pole_guard(lambda);
    let i = eigenvalues.partition_point(|&e| e < lambda);
    [i.wrapping_sub(1), i]
        .iter()
        .filter_map(|&j| eigenvalues.get(j))
        .any(|&e| (e - lambda).abs() < guard)
}

/// `|t|²` on a λ grid at fixed gate voltage.
pub fn transmission_sweep(s: &Scatterer, grid: &[f64], vg: f64) -> Result<Vec<TransmissionRow>> {
    let eig = s.kernel().eigenvalues();
    let guarded = grid.iter().filter(|&&l| in_pole_guard(eig, l)).count();
    if guarded as f64 > MAX_POLE_FRACTION * grid.len() as f64 {
        bail!(
            "{guarded} of {} grid points fall inside eigenvalue guard intervals; \
             shift the grid start or change the point count so it does not align with the spectrum",
            grid.len()
        );
    }
    if let Some(&top) = grid.iter().max_by(|a, b| a.total_cmp(b)) {
        if !(top < s.kernel().cutoff()) {
            bail!(
                "grid reaches lambda = {top} but the spectrum is only used up to {}; raise [greens] lambda_max",
                s.kernel().cutoff()
            );
        }
    }
    Ok(grid
        .par_iter()
        .map(|&lambda| {
            if in_pole_guard(eig, lambda) {
                return TransmissionRow::flagged(lambda, RowStatus::PoleGuard);
            }
            match s.sample(lambda, vg) {
                Ok(x) => TransmissionRow {
                    lambda,
                    t2: x.t.norm_sqr(),
                    reflection: x.r.norm_sqr(),
                    k1: x.k1,
                    k2: x.k2,
                    modes: x.modes,
                    tail_error: x.tail_error_estimate,
                    status: RowStatus::Ok,
                },
                Err(ScatteringError::BelowThreshold { .. }) => {
                    TransmissionRow::flagged(lambda, RowStatus::BelowThreshold)
                }
                Err(ScatteringError::Greens(GreensError::PoleProximity { .. })) => {
                    TransmissionRow::flagged(lambda, RowStatus::PoleGuard)
                }
                Err(e) => TransmissionRow::flagged(lambda, RowStatus::Failed(e.to_string())),
            }
        })
        .collect())
}

pub fn write_transmission_csv<W: Write>(rows: &[TransmissionRow], w: &mut W) -> Result<()> {
    writeln!(
        w,
        "lambda,t2,diag_reflection,diag_flux_residual,diag_squared_ratio_residual,\
         diag_k1,diag_k2,diag_modes,diag_tail_error,diag_status"
    )?;
    for r in rows {
        let (flux, squared) = if r.status.is_ok() {
            (r.flux_residual(), r.squared_ratio_residual())
        } else {
            (f64::NAN, f64::NAN)
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            fmt_f64(r.lambda),
            fmt_f64(r.t2),
            fmt_f64(r.reflection),
            fmt_f64(flux),
            fmt_f64(squared),
            fmt_f64(r.k1),
            fmt_f64(r.k2),
            r.modes,
            fmt_f64(r.tail_error),
            r.status.label()
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurrentRow {
    pub x: f64,
    pub baths: BathPair,
    pub report: Option<QuadratureReport>,
    pub conductance: Option<ConductanceReport>,
    pub status: RowStatus,
}

impl CurrentRow {
    pub fn current(&self) -> f64 {
        self.report.as_ref().map_or(f64::NAN, |r| r.value)
    }
}

fn evaluate_current(
    s: &Scatterer,
    x: f64,
    baths: BathPair,
    quad: &QuadConfig,
    step: Option<f64>,
) -> CurrentRow {
    let mut row = CurrentRow {
        x,
        baths,
        report: None,
        conductance: None,
        status: RowStatus::Ok,
    };
    match current(s, &baths, quad) {
        Ok(r) => row.report = Some(r),
        Err(TransportError::NotConverged(r)) => {
            row.status = RowStatus::Failed(format!(
                "quadrature did not converge (estimate {} ± {})",
                r.value, r.abs_error
            ));
            return row;
        }
        Err(e) => {
            row.status = RowStatus::Failed(e.to_string());
            return row;
        }
    }
    if let Some(h) = step {
        match conductance(s, &baths, h, quad) {
            Ok(c) => row.conductance = Some(c),
            Err(e) => row.status = RowStatus::Failed(format!("conductance: {e}")),
        }
    }
    row
}

/// Current (and optionally conductance) along a bath-parameter axis.
pub fn current_sweep(
    s: &Scatterer,
    sweep: &SweepSection,
    quad: &QuadConfig,
) -> Result<Vec<CurrentRow>> {
    if sweep.variable == Axis::Lambda {
        bail!("the current is integrated over lambda; sweep V, mu1, beta or Vg instead");
    }
    let grid = sweep.grid()?;
    let step = sweep.conductance_step;
    let mut required: f64 = 0.0;
    for &x in &grid {
        let b = sweep.baths_at(x);
        b.validate()?;
        let extra = step.map_or(0.0, |h| 2.0 * h);
        required = required.max(integration_window(&b, quad).1 + extra);
    }
    let available = s.kernel().cutoff();
    if !(required < available) {
        bail!(
            "insufficient spectrum: the Fermi window reaches lambda = {required:.6}, \
             set [greens] lambda_max above {} (currently {available})",
            required.ceil()
        );
    }
    Ok(grid
        .par_iter()
        .map(|&x| evaluate_current(s, x, sweep.baths_at(x), quad, step))
        .collect())
}

pub fn write_current_csv<W: Write>(
    axis: Axis,
    rows: &[CurrentRow],
    with_conductance: bool,
    w: &mut W,
) -> Result<()> {
    write!(w, "{axis},beta,mu1,mu2,Vg,current")?;
    if with_conductance {
        write!(w, ",conductance")?;
    }
    write!(
        w,
        ",diag_abs_error,diag_evaluations,diag_subintervals,diag_poles"
    )?;
    if with_conductance {
        write!(w, ",diag_conductance_half_step,diag_conductance_one_sided")?;
    }
    writeln!(w, ",diag_status")?;
    for r in rows {
        let b = &r.baths;
        write!(
            w,
            "{},{},{},{},{},{}",
            fmt_f64(r.x),
            fmt_f64(b.beta),
            fmt_f64(b.mu1),
            fmt_f64(b.mu2),
            fmt_f64(b.vg),
            fmt_f64(r.current())
        )?;
        if with_conductance {
            write!(
                w,
                ",{}",
                fmt_f64(r.conductance.as_ref().map_or(f64::NAN, |c| c.value))
            )?;
        }
        match &r.report {
            Some(q) => write!(
                w,
                ",{},{},{},{}",
                fmt_f64(q.abs_error),
                q.evaluations,
                q.subintervals,
                q.poles.len()
            )?,
            None => write!(w, ",nan,0,0,0")?,
        }
        if with_conductance {
            match &r.conductance {
                Some(c) => write!(w, ",{},{}", fmt_f64(c.half_step), c.one_sided)?,
                None => write!(w, ",nan,false")?,
            }
        }
        writeln!(w, ",{}", r.status.label())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format() {
        assert_eq!(fmt_f64(1.0), "1.00000000e0");
        assert_eq!(fmt_f64(-1.234567891234e-5), "-1.23456789e-5");
        assert_eq!(fmt_f64(f64::NAN), "nan");
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
    }

    #[test]
    fn status_labels_are_csv_safe() {
        let s = RowStatus::Failed("a, b\nc".into());
        assert_eq!(s.label(), "error: a; b c");
    }

    #[test]
    fn pole_guard_detection() {
        let e = [1.0, 2.0, 5.0];
        assert!(in_pole_guard(&e, 2.0));
        assert!(in_pole_guard(&e, 5.0 + 1e-9));
        assert!(!in_pole_guard(&e, 3.0));
        assert!(!in_pole_guard(&e, 100.0));
    }
}
