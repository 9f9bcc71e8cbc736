//! Truncated mode sums for the resonator Green's function.
//!
//! With eigenpairs `(λ_n, φ_n)` sorted ascending, the off-diagonal value is
//!
//! ```text
//! g(λ) = Σ_n φ_n(x₁) φ_n(x₂) / (λ_n − λ)
//! ```
//!
//! and the regularized diagonal value at a junction `x` is
//!
//! ```text
//! ξ(x, λ) = Σ_n ( φ_n(x)² / (λ_n − λ) − 1/(4πn) ) + c(G).
//! ```
//!
//! Both series are cut at the table's `λ_max`. The ξ series converges only
//! logarithmically slowly, so an analytic estimate of the neglected tail is
//! added by default: above the cutoff `Λ` the local spectral density is
//! replaced by its Weyl mean `1/(4π)` per unit λ, while the counterterm tail is
//! summed exactly. Letting both sums run to a common large cutoff gives
//!
//! ```text
//! T(λ) = ( ψ(N + 1) + ln(4π/|G|) − ln(Λ − λ) ) / (4π)
//! ```
//!
//! where `N` is the number of retained modes and `ψ` the digamma function.
//! Using the actual `N` absorbs the boundary (perimeter) term of the counting
//! function, which otherwise dominates the truncation error.

use std::f64::consts::PI;

use statrs::function::gamma::digamma;
use thiserror::Error;

use crate::spectral::{Junctions, ModeTable, Point, SpectralError};
use crate::summation::CompensatedSum;

/// Relative width of the excluded neighbourhood around each eigenvalue.
pub const POLE_GUARD_RELATIVE: f64 = 1e-9;

/// Half-width of the excluded neighbourhood of an eigenvalue near `lambda`.
pub fn pole_guard(lambda: f64) -> f64 {
    POLE_GUARD_RELATIVE * lambda.abs().max(1.0)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GreensError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("lambda = {lambda} is within the pole guard of eigenvalue {eigenvalue}")]
    PoleProximity { lambda: f64, eigenvalue: f64 },
    #[error("off-diagonal Green's function needs two distinct points, got {0} twice")]
    IdenticalPoints(Point),
    #[error("mode table reaches lambda = {available}, configuration asks for {required}")]
    TableTooShort { available: f64, required: f64 },
    #[error("lambda = {lambda} is not below the series cutoff {cutoff}")]
    AboveCutoff { lambda: f64, cutoff: f64 },
    #[error("tail error estimate {estimate:e} exceeds tolerance {tolerance:e} (value {value})")]
    TailToleranceUnreachable {
        value: f64,
        estimate: f64,
        tolerance: f64,
    },
    #[error("invalid Green's function configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TailCorrection {
    /// Plain truncated sums.
    Off,
    /// Add the Weyl-mean estimate of the neglected ξ tail.
    #[default]
    Analytic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreensConfig {
    /// Series cutoff; tables reaching further are used up to this value only.
    pub lambda_max: f64,
    /// Renormalization constant c(G) added to ξ.
    pub c_g: f64,
    /// Target absolute error for ξ.
    pub tail_tolerance: f64,
    pub tail: TailCorrection,
    /// Turn an estimated tail error above `tail_tolerance` into an error.
    pub enforce_tail_tolerance: bool,
}

impl Default for GreensConfig {
    fn default() -> Self {
        Self {
            lambda_max: 1e5,
            c_g: 0.0,
            tail_tolerance: 1e-3,
            tail: TailCorrection::Analytic,
            enforce_tail_tolerance: false,
        }
    }
}

impl GreensConfig {
    pub fn with_cutoff(lambda_max: f64) -> Self {
        Self {
            lambda_max,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), GreensError> {
        if !(self.lambda_max.is_finite() && self.lambda_max > 0.0) {
            return Err(GreensError::InvalidConfig(format!(
                "lambda_max must be positive, got {}",
                self.lambda_max
            )));
        }
        if !(self.tail_tolerance > 0.0) {
            return Err(GreensError::InvalidConfig(format!(
                "tail_tolerance must be positive, got {}",
                self.tail_tolerance
            )));
        }
        if !self.c_g.is_finite() {
            return Err(GreensError::InvalidConfig("c_g must be finite".into()));
        }
        Ok(())
    }
}

/// ξ at one point together with its truncation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XiEstimate {
    pub value: f64,
    /// Analytic tail estimate included in `value` (0 when disabled).
    pub tail_correction: f64,
    /// Change of the (corrected) value between the cutoff and a cutoff halfway
    /// down to `max(λ, 0)`; a proxy for the remaining truncation error.
    pub tail_error_estimate: f64,
    pub modes: usize,
}

/// `g`, `ξ_j`, `Z_j = D_j/(2π) + ξ_j` and `𝒟 = g² − Z₁Z₂` at one energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonatorQuantities {
    pub lambda: f64,
    pub g: f64,
    pub xi1: f64,
    pub xi2: f64,
    pub z1: f64,
    pub z2: f64,
    pub dd: f64,
    pub modes: usize,
    pub tail_error_estimate: f64,
}

impl ResonatorQuantities {
    pub fn from_parts(lambda: f64, g: f64, xi1: f64, xi2: f64, d: [f64; 2]) -> Self {
        let z1 = d[0] / (2.0 * PI) + xi1;
        let z2 = d[1] / (2.0 * PI) + xi2;
        Self {
            lambda,
            g,
            xi1,
            xi2,
            z1,
            z2,
            dd: g * g - z1 * z2,
            modes: 0,
            tail_error_estimate: 0.0,
        }
    }

    /// Recomputes `Z_j` and `𝒟` for other boundary parameters `D_j`.
    pub fn with_boundary_params(&self, d: [f64; 2]) -> Self {
        Self {
            modes: self.modes,
            tail_error_estimate: self.tail_error_estimate,
            ..Self::from_parts(self.lambda, self.g, self.xi1, self.xi2, d)
        }
    }

    /// The same quantities with the junction labels exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            xi1: self.xi2,
            xi2: self.xi1,
            z1: self.z2,
            z2: self.z1,
            ..*self
        }
    }
}

/// Σ_{n>N} tail model, see the module docs.
fn tail_correction(modes: usize, cutoff: f64, area: f64, lambda: f64) -> f64 {
    (digamma(modes as f64 + 1.0) + (4.0 * PI / area).ln() - (cutoff - lambda).ln()) / (4.0 * PI)
}

fn check_pole(eigenvalues: &[f64], lambda: f64) -> Result<(), GreensError> {
    let guard = pole_guard(lambda);
    let i = eigenvalues.partition_point(|&e| e < lambda);
    for j in [i.wrapping_sub(1), i] {
        if let Some(&e) = eigenvalues.get(j) {
            if (e - lambda).abs() < guard {
                return Err(GreensError::PoleProximity {
                    lambda,
                    eigenvalue: e,
                });
            }
        }
    }
    Ok(())
}

fn counterterm(index: usize) -> f64 {
    1.0 / (4.0 * PI * (index + 1) as f64)
}

/// Combines a raw partial sum with its checkpoint into an [`XiEstimate`].
struct XiParts {
    full: f64,
    checkpoint: f64,
    checkpoint_modes: usize,
    checkpoint_cutoff: f64,
}

struct SeriesContext {
    modes: usize,
    cutoff: f64,
    area: f64,
    c_g: f64,
    tail: TailCorrection,
    tail_tolerance: f64,
    enforce: bool,
}

impl SeriesContext {
    fn checkpoint_cutoff(&self, lambda: f64) -> f64 {
        0.5 * (self.cutoff + lambda.max(0.0))
    }

    fn finish(&self, lambda: f64, parts: XiParts) -> Result<XiEstimate, GreensError> {
        let (tail, tail_half) = match self.tail {
            TailCorrection::Off => (0.0, 0.0),
            TailCorrection::Analytic => (
                tail_correction(self.modes, self.cutoff, self.area, lambda),
                tail_correction(
                    parts.checkpoint_modes,
                    parts.checkpoint_cutoff,
                    self.area,
                    lambda,
                ),
            ),
        };
        let value = parts.full + tail + self.c_g;
        let tail_error_estimate = if parts.checkpoint_modes == 0 {
            f64::INFINITY
        } else {
            ((parts.full + tail) - (parts.checkpoint + tail_half)).abs()
        };
        if self.enforce && !(tail_error_estimate <= self.tail_tolerance) {
            return Err(GreensError::TailToleranceUnreachable {
                value,
                estimate: tail_error_estimate,
                tolerance: self.tail_tolerance,
            });
        }
        Ok(XiEstimate {
            value,
            tail_correction: tail,
            tail_error_estimate,
            modes: self.modes,
        })
    }

    fn check_lambda(&self, lambda: f64) -> Result<(), GreensError> {
        if !(lambda < self.cutoff) {
            return Err(GreensError::AboveCutoff {
                lambda,
                cutoff: self.cutoff,
            });
        }
        Ok(())
    }
}

/// Prefix of `table` selected by `config.lambda_max`.
fn effective_modes(table: &ModeTable, config: &GreensConfig) -> Result<usize, GreensError> {
    config.validate()?;
    if table.lambda_max() < config.lambda_max {
        return Err(GreensError::TableTooShort {
            available: table.lambda_max(),
            required: config.lambda_max,
        });
    }
    Ok(table.count_below(config.lambda_max))
}

fn interior_weights(table: &ModeTable, p: Point) -> Result<Vec<f64>, GreensError> {
    if !table.geometry().is_interior(p) {
        return Err(SpectralError::JunctionNotInterior(p).into());
    }
    Ok(table.eigenfunctions_at(p)?)
}

/// Off-diagonal Green's function `G(x₁, x₂; λ)` summed over the whole table.
pub fn green_offdiagonal(
    table: &ModeTable,
    x1: Point,
    x2: Point,
    lambda: f64,
) -> Result<f64, GreensError> {
    if x1 == x2 {
        return Err(GreensError::IdenticalPoints(x1));
    }
    let eigenvalues: Vec<f64> = table.eigenvalues().collect();
    check_pole(&eigenvalues, lambda)?;
    let phi1 = interior_weights(table, x1)?;
    let phi2 = interior_weights(table, x2)?;
    let mut sum = CompensatedSum::new();
    for ((&e, &a), &b) in eigenvalues.iter().zip(&phi1).zip(&phi2) {
        sum.add(a * b * (1.0 / (e - lambda)));
    }
    Ok(sum.value())
}

/// Regularized diagonal value ξ(x, λ).
pub fn xi(
    table: &ModeTable,
    x: Point,
    lambda: f64,
    config: &GreensConfig,
) -> Result<XiEstimate, GreensError> {
    let n = effective_modes(table, config)?;
    let ctx = SeriesContext {
        modes: n,
        cutoff: config.lambda_max,
        area: table.geometry().area(),
        c_g: config.c_g,
        tail: config.tail,
        tail_tolerance: config.tail_tolerance,
        enforce: config.enforce_tail_tolerance,
    };
    ctx.check_lambda(lambda)?;
    let eigenvalues: Vec<f64> = table.eigenvalues().take(n).collect();
    check_pole(&eigenvalues, lambda)?;
    let phi = interior_weights(table, x)?;

    let checkpoint_cutoff = ctx.checkpoint_cutoff(lambda);
    let h = eigenvalues.partition_point(|&e| e <= checkpoint_cutoff);
    let mut sum = CompensatedSum::new();
    let mut checkpoint = 0.0;
    for (i, (&e, &p)) in eigenvalues.iter().zip(&phi).enumerate() {
        if i == h {
            checkpoint = sum.value();
        }
        let w = p * p;
        sum.add(w * (1.0 / (e - lambda)) - counterterm(i));
    }
    if h == n {
        checkpoint = sum.value();
    }
    ctx.finish(
        lambda,
        XiParts {
            full: sum.value(),
            checkpoint,
            checkpoint_modes: h,
            checkpoint_cutoff,
        },
    )
}

/// `Σ_n φ_n(x)² (1/(λ_n − λ) − 1/(λ_n − λ'))` over the whole table.
///
/// The series converges like `Σ 1/n²` and needs no regularization, so it
/// serves as an independent check on differences of [`xi`].
pub fn xi_difference(
    table: &ModeTable,
    x: Point,
    lambda: f64,
    lambda_prime: f64,
) -> Result<f64, GreensError> {
    let eigenvalues: Vec<f64> = table.eigenvalues().collect();
    check_pole(&eigenvalues, lambda)?;
    check_pole(&eigenvalues, lambda_prime)?;
    let phi = interior_weights(table, x)?;
    let delta = lambda - lambda_prime;
    let mut sum = CompensatedSum::new();
    for (&e, &p) in eigenvalues.iter().zip(&phi) {
        sum.add(p * p * delta / ((e - lambda) * (e - lambda_prime)));
    }
    Ok(sum.value())
}

/// `g`, `ξ₁`, `ξ₂`, `Z_j` and `𝒟` from one table at one energy.
pub fn resonator_quantities(
    table: &ModeTable,
    junctions: &Junctions,
    lambda: f64,
    d: [f64; 2],
    config: &GreensConfig,
) -> Result<ResonatorQuantities, GreensError> {
    PairKernel::new(table, junctions, config)?.quantities(lambda, d)
}

/// Eigenvalues and junction weights `φ_n(x₁)²`, `φ_n(x₁)φ_n(x₂)`, `φ_n(x₂)²`,
/// precomputed for repeated evaluation at many energies.
#[derive(Debug, Clone)]
pub struct PairKernel {
    eigenvalues: Vec<f64>,
    w11: Vec<f64>,
    w12: Vec<f64>,
    w22: Vec<f64>,
    area: f64,
    config: GreensConfig,
}

impl PairKernel {
    pub fn new(
        table: &ModeTable,
        junctions: &Junctions,
        config: &GreensConfig,
    ) -> Result<Self, GreensError> {
        let n = effective_modes(table, config)?;
        if junctions.first == junctions.second {
            return Err(GreensError::IdenticalPoints(junctions.first));
        }
        let phi1 = interior_weights(table, junctions.first)?;
        let phi2 = interior_weights(table, junctions.second)?;
        Ok(Self {
            eigenvalues: table.eigenvalues().take(n).collect(),
            w11: phi1[..n].iter().map(|a| a * a).collect(),
            w12: phi1[..n].iter().zip(&phi2).map(|(a, b)| a * b).collect(),
            w22: phi2[..n].iter().map(|b| b * b).collect(),
            area: table.geometry().area(),
            config: *config,
        })
    }

    pub fn modes(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn cutoff(&self) -> f64 {
        self.config.lambda_max
    }

    pub fn config(&self) -> &GreensConfig {
        &self.config
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenvalues in the closed interval `[lo, hi]`.
    pub fn eigenvalues_in(&self, lo: f64, hi: f64) -> &[f64] {
        let a = self.eigenvalues.partition_point(|&e| e < lo);
        let b = self.eigenvalues.partition_point(|&e| e <= hi);
        &self.eigenvalues[a..b.max(a)]
    }

    pub fn check_pole(&self, lambda: f64) -> Result<(), GreensError> {
        check_pole(&self.eigenvalues, lambda)
    }

    /// Mode weights at the junctions, in table order.
    pub fn weights(&self) -> (&[f64], &[f64], &[f64]) {
        (&self.w11, &self.w12, &self.w22)
    }

    pub fn green(&self, lambda: f64) -> Result<f64, GreensError> {
        self.check_pole(lambda)?;
        let mut sum = CompensatedSum::new();
        for (&e, &w) in self.eigenvalues.iter().zip(&self.w12) {
            sum.add(w * (1.0 / (e - lambda)));
        }
        Ok(sum.value())
    }

    fn context(&self) -> SeriesContext {
        SeriesContext {
            modes: self.modes(),
            cutoff: self.config.lambda_max,
            area: self.area,
            c_g: self.config.c_g,
            tail: self.config.tail,
            tail_tolerance: self.config.tail_tolerance,
            enforce: self.config.enforce_tail_tolerance,
        }
    }

    /// All resonator quantities in a single pass over the modes.
    pub fn quantities(&self, lambda: f64, d: [f64; 2]) -> Result<ResonatorQuantities, GreensError> {
        let ctx = self.context();
        ctx.check_lambda(lambda)?;
        self.check_pole(lambda)?;

        let checkpoint_cutoff = ctx.checkpoint_cutoff(lambda);
        let n = self.modes();
        let h = self
            .eigenvalues
            .partition_point(|&e| e <= checkpoint_cutoff);
        let mut g = CompensatedSum::new();
        let mut s1 = CompensatedSum::new();
        let mut s2 = CompensatedSum::new();
        let mut half = (0.0, 0.0);
        for i in 0..n {
            if i == h {
                half = (s1.value(), s2.value());
            }
            let inv = 1.0 / (self.eigenvalues[i] - lambda);
            let c = counterterm(i);
            g.add(self.w12[i] * inv);
            s1.add(self.w11[i] * inv - c);
            s2.add(self.w22[i] * inv - c);
        }
        if h == n {
            half = (s1.value(), s2.value());
        }
        let xi1 = ctx.finish(
            lambda,
            XiParts {
                full: s1.value(),
                checkpoint: half.0,
                checkpoint_modes: h,
                checkpoint_cutoff,
            },
        )?;
        let xi2 = ctx.finish(
            lambda,
            XiParts {
                full: s2.value(),
                checkpoint: half.1,
                checkpoint_modes: h,
                checkpoint_cutoff,
            },
        )?;
        let mut q = ResonatorQuantities::from_parts(lambda, g.value(), xi1.value, xi2.value, d);
        q.modes = n;
        q.tail_error_estimate = xi1.tail_error_estimate.max(xi2.tail_error_estimate);
        Ok(q)
    }
}
