//! Landauer-Büttiker current and conductance.
//!
//! ```text
//! I = 2π ∫_{V_g/2}^∞ [f_β(λ − μ₂) − f_β(λ − μ₁)] |t(λ)|² dλ,   f_β(λ) = 1/(e^{βλ} + 1)
//! ```
//!
//! The infinite range is cut where both Fermi factors are within
//! `window_tolerance` of their saturated values. Resonator eigenvalues inside
//! the range are excised with the pole guard and act as breakpoints, as do the
//! two Fermi edges.

use std::f64::consts::PI;

use thiserror::Error;

use crate::greens::pole_guard;
use crate::quadrature::{integrate, Integral, QuadratureError, QuadratureSettings};
use crate::scattering::{amplitudes, momenta, Scatterer, ScatteringError, TransferMatrix};

/// Fermi-Dirac occupation `1/(e^{βλ} + 1)`, saturating to exact 0 or 1.
pub fn fermi(beta: f64, lambda: f64) -> f64 {
    let x = beta * lambda;
    if x > 0.0 {
        let e = (-x).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + x.exp())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransportError {
    #[error("invalid bath parameters: {0}")]
    InvalidBaths(String),
    #[error("invalid quadrature configuration: {0}")]
    InvalidConfig(String),
    #[error(
        "the spectrum is known up to {available} but the integral needs lambda_max > {required}"
    )]
    InsufficientSpectrum { required: f64, available: f64 },
    #[error(transparent)]
    Scattering(#[from] ScatteringError),
    #[error("quadrature did not converge: {} ± {}", .0.value, .0.abs_error)]
    NotConverged(QuadratureReport),
    #[error("conductance step too large: {coarse} at dV vs {fine} at dV/2")]
    StepTooLarge { coarse: f64, fine: f64 },
}

/// Inverse temperature, lead potentials and plunger-gate voltage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathPair {
    pub beta: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub vg: f64,
}

impl BathPair {
    pub fn new(beta: f64, mu1: f64, mu2: f64, vg: f64) -> Result<Self, TransportError> {
        let b = Self { beta, mu1, mu2, vg };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<(), TransportError> {
        let bad = |m: String| Err(TransportError::InvalidBaths(m));
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return bad(format!("beta must be positive, got {}", self.beta));
        }
        if !(self.mu1.is_finite() && self.mu2.is_finite()) {
            return bad("potentials must be finite".into());
        }
        if !(self.mu2 >= self.mu1) {
            return bad(format!(
                "bias mu2 - mu1 = {} is negative",
                self.mu2 - self.mu1
            ));
        }
        if !(self.vg.is_finite() && self.vg >= 0.0) {
            return bad(format!(
                "gate voltage must be non-negative, got {}",
                self.vg
            ));
        }
        Ok(())
    }

    pub fn bias(&self) -> f64 {
        self.mu2 - self.mu1
    }

    pub fn threshold(&self) -> f64 {
        self.vg / 2.0
    }

    fn with_mu2(&self, mu2: f64) -> Self {
        Self { mu2, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Fermi-window truncation level.
    pub window_tolerance: f64,
    pub max_subintervals: usize,
    pub extra_bisections: u32,
    /// Allowed relative gap between the conductance at `δV` and `δV/2`.
    pub richardson_tolerance: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-8,
            rel_tol: 1e-6,
            window_tolerance: 1e-12,
            max_subintervals: 20_000,
            extra_bisections: 0,
            richardson_tolerance: 0.05,
        }
    }
}

impl QuadConfig {
    pub fn validate(&self) -> Result<(), TransportError> {
        let bad = |m: &str| Err(TransportError::InvalidConfig(m.into()));
        if !(self.abs_tol >= 0.0 && self.rel_tol >= 0.0 && self.abs_tol + self.rel_tol > 0.0) {
            return bad("tolerances must be non-negative and not both zero");
        }
        if !(self.window_tolerance > 0.0 && self.window_tolerance < 1.0) {
            return bad("window_tolerance must lie in (0, 1)");
        }
        if self.max_subintervals == 0 {
            return bad("max_subintervals must be positive");
        }
        if !(self.richardson_tolerance > 0.0) {
            return bad("richardson_tolerance must be positive");
        }
        Ok(())
    }

    fn settings(&self) -> QuadratureSettings {
        QuadratureSettings {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            max_subintervals: self.max_subintervals,
            extra_bisections: self.extra_bisections,
        }
    }

    /// Width beyond a Fermi edge after which the occupation is saturated.
    fn window_margin(&self, beta: f64) -> f64 {
        (1.0 / self.window_tolerance).ln() / beta
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureReport {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
    pub subintervals: usize,
    /// Eigenvalues excised from the integration range.
    pub poles: Vec<f64>,
}

impl QuadratureReport {
    fn zero() -> Self {
        Self {
            value: 0.0,
            abs_error: 0.0,
            evaluations: 0,
            subintervals: 0,
            poles: Vec::new(),
        }
    }
}

/// Anything that yields `|t|²` as a function of energy and gate voltage.
pub trait TransmissionModel {
    fn transmission(&self, lambda: f64, vg: f64) -> Result<f64, ScatteringError>;

    /// Energies in `[lo, hi]` where the model cannot be evaluated.
    fn poles_in(&self, lo: f64, hi: f64) -> Vec<f64>;

    /// Largest energy the model is trusted at.
    fn spectral_cutoff(&self) -> f64;
}

impl TransmissionModel for Scatterer {
    fn transmission(&self, lambda: f64, vg: f64) -> Result<f64, ScatteringError> {
        Scatterer::transmission(self, lambda, vg)
    }

    fn poles_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.kernel().eigenvalues_in(lo, hi).to_vec()
    }

    fn spectral_cutoff(&self) -> f64 {
        self.kernel().cutoff()
    }
}

/// An energy-independent transfer matrix, for checks against closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedMatrixTransmission {
    pub matrix: TransferMatrix,
}

impl FixedMatrixTransmission {
    /// `L = 1`: a transparent junction with `|t|² = 1` at `V_g = 0`.
    pub fn transparent() -> Self {
        Self {
            matrix: TransferMatrix::identity(0.0),
        }
    }
}

impl TransmissionModel for FixedMatrixTransmission {
    fn transmission(&self, lambda: f64, vg: f64) -> Result<f64, ScatteringError> {
        let k = momenta(lambda, vg)?;
        let l = TransferMatrix::new(self.matrix.entries, lambda);
        Ok(amplitudes(&l, k.k1, k.k2)?.transmission())
    }

    fn poles_in(&self, _lo: f64, _hi: f64) -> Vec<f64> {
        Vec::new()
    }

    fn spectral_cutoff(&self) -> f64 {
        f64::INFINITY
    }
}

/// Splits `[lo, hi]` at `edges` and removes a guard interval around each pole.
fn segments(lo: f64, hi: f64, poles: &[f64], edges: &[f64]) -> Vec<(f64, f64)> {
    let mut cuts: Vec<(f64, f64)> = poles
        .iter()
        .map(|&p| {
            let h = pole_guard(p);
            (p - h, p + h)
        })
        .chain(edges.iter().filter(|&&e| e > lo && e < hi).map(|&e| (e, e)))
        .collect();
    cuts.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out = Vec::with_capacity(cuts.len() + 1);
    let mut start = lo;
    for (a, b) in cuts {
        if a > start {
            out.push((start, a.min(hi)));
        }
        start = start.max(b);
        if start >= hi {
            break;
        }
    }
    if hi > start {
        out.push((start, hi));
    }
    out
}

fn integrate_window<M, W>(
    model: &M,
    vg: f64,
    lo: f64,
    hi: f64,
    edges: &[f64],
    weight: W,
    quad: &QuadConfig,
) -> Result<QuadratureReport, TransportError>
where
    M: TransmissionModel + ?Sized,
    W: Fn(f64) -> f64,
{
    quad.validate()?;
    if !(hi > lo) {
        return Ok(QuadratureReport::zero());
    }
    let available = model.spectral_cutoff();
    if !(hi < available) {
        return Err(TransportError::InsufficientSpectrum {
            required: hi,
            available,
        });
    }
    let poles = model.poles_in(lo, hi);
    let segs = segments(lo, hi, &poles, edges);
    let integrand = |lambda: f64| -> Result<f64, ScatteringError> {
        let w = weight(lambda);
        if w == 0.0 {
            return Ok(0.0);
        }
        Ok(2.0 * PI * w * model.transmission(lambda, vg)?)
    };
    let report = |r: Integral| QuadratureReport {
        value: r.value,
        abs_error: r.abs_error,
        evaluations: r.evaluations,
        subintervals: r.subintervals,
        poles: poles.clone(),
    };
    match integrate(integrand, &segs, &quad.settings()) {
        Ok(r) => Ok(report(r)),
        Err(QuadratureError::Integrand(e)) => Err(e.into()),
        Err(QuadratureError::NotConverged(r)) => Err(TransportError::NotConverged(report(r))),
    }
}

/// Integration range `[lo, hi]` of the finite-temperature current.
pub fn integration_window(baths: &BathPair, quad: &QuadConfig) -> (f64, f64) {
    let margin = quad.window_margin(baths.beta);
    let lo = baths.threshold().max(baths.mu1.min(baths.mu2) - margin);
    let hi = baths.mu1.max(baths.mu2) + margin;
    (lo, hi)
}

/// Finite-temperature current.
pub fn current<M: TransmissionModel + ?Sized>(
    model: &M,
    baths: &BathPair,
    quad: &QuadConfig,
) -> Result<QuadratureReport, TransportError> {
    baths.validate()?;
    if baths.mu1 == baths.mu2 {
        return Ok(QuadratureReport::zero());
    }
    let (lo, hi) = integration_window(baths, quad);
    let BathPair { beta, mu1, mu2, vg } = *baths;
    integrate_window(
        model,
        vg,
        lo,
        hi,
        &[mu1, mu2],
        |l| fermi(beta, l - mu2) - fermi(beta, l - mu1),
        quad,
    )
}

/// Zero-temperature limit: `2π ∫ |t|²` over `(max(μ₁, V_g/2), μ₂)`.
pub fn zero_temperature_current<M: TransmissionModel + ?Sized>(
    model: &M,
    mu1: f64,
    mu2: f64,
    vg: f64,
    quad: &QuadConfig,
) -> Result<QuadratureReport, TransportError> {
    if !(mu1.is_finite() && mu2.is_finite() && mu2 >= mu1) {
        return Err(TransportError::InvalidBaths(format!(
            "need finite mu2 >= mu1, got mu1 = {mu1}, mu2 = {mu2}"
        )));
    }
    if !(vg.is_finite() && vg >= 0.0) {
        return Err(TransportError::InvalidBaths(format!(
            "gate voltage must be non-negative, got {vg}"
        )));
    }
    let lo = mu1.max(vg / 2.0);
    integrate_window(model, vg, lo, mu2, &[], |_| 1.0, quad)
}

/// Linear-response conductance `2π ∫ |t|² (−∂_λ f_β(λ − μ)) dλ` at `μ = μ₁`.
pub fn linear_response_conductance<M: TransmissionModel + ?Sized>(
    model: &M,
    beta: f64,
    mu: f64,
    vg: f64,
    quad: &QuadConfig,
) -> Result<QuadratureReport, TransportError> {
    let baths = BathPair::new(beta, mu, mu, vg)?;
    let (lo, hi) = integration_window(&baths, quad);
    integrate_window(
        model,
        vg,
        lo,
        hi,
        &[mu],
        |l| {
            let f = fermi(beta, l - mu);
            beta * f * (1.0 - f)
        },
        quad,
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConductanceReport {
    /// `∂I/∂V` with step `δV`.
    pub value: f64,
    /// The same difference quotient with step `δV/2`.
    pub half_step: f64,
    pub delta_v: f64,
    /// Whether the one-sided formula was used (`V < δV`).
    pub one_sided: bool,
    /// Sum of the quadrature error estimates of all current evaluations.
    pub abs_error: f64,
}

impl ConductanceReport {
    /// Richardson-extrapolated value from the two step sizes.
    pub fn extrapolated(&self) -> f64 {
        (4.0 * self.half_step - self.value) / 3.0
    }
}

fn difference_quotient<M: TransmissionModel + ?Sized>(
    model: &M,
    baths: &BathPair,
    h: f64,
    quad: &QuadConfig,
) -> Result<(f64, bool, f64), TransportError> {
    let at = |dv: f64| current(model, &baths.with_mu2(baths.mu2 + dv), quad);
    if baths.bias() >= h {
        let (p, m) = (at(h)?, at(-h)?);
        Ok((
            (p.value - m.value) / (2.0 * h),
            false,
            p.abs_error + m.abs_error,
        ))
    } else {
        let (i0, i1, i2) = (at(0.0)?, at(h)?, at(2.0 * h)?);
        let v = (-3.0 * i0.value + 4.0 * i1.value - i2.value) / (2.0 * h);
        Ok((v, true, i0.abs_error + i1.abs_error + i2.abs_error))
    }
}

/// Differential conductance `∂I/∂V` at fixed `μ₁`, varying `μ₂ = μ₁ + V`.
///
/// Central differences are used where `V ≥ δV`, otherwise a one-sided
/// second-order formula. The result is repeated with `δV/2`; a gap beyond
/// `richardson_tolerance` (relative, above the quadrature noise) is an error.
pub fn conductance<M: TransmissionModel + ?Sized>(
    model: &M,
    baths: &BathPair,
    delta_v: f64,
    quad: &QuadConfig,
) -> Result<ConductanceReport, TransportError> {
    baths.validate()?;
    if !(delta_v.is_finite() && delta_v > 0.0) {
        return Err(TransportError::InvalidConfig(format!(
            "conductance step must be positive, got {delta_v}"
        )));
    }
    let (coarse, one_sided, e1) = difference_quotient(model, baths, delta_v, quad)?;
    let (fine, _, e2) = difference_quotient(model, baths, delta_v / 2.0, quad)?;
    let noise = 4.0 * (e1 / delta_v + e2 / (0.5 * delta_v));
    if (coarse - fine).abs() > quad.richardson_tolerance * fine.abs().max(coarse.abs()) + noise {
        return Err(TransportError::StepTooLarge { coarse, fine });
    }
    Ok(ConductanceReport {
        value: coarse,
        half_step: fine,
        delta_v,
        one_sided,
        abs_error: noise,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greens::GreensConfig;
    use crate::scattering::CouplingParams;
    use crate::spectral::{enumerate_modes, Junctions, Point, ResonatorGeometry};

    fn scatterer() -> Scatterer {
        let geom = ResonatorGeometry::rectangle(1.0, 1.3).unwrap();
        let table = enumerate_modes(&geom, 2e4).unwrap();
        let j = Junctions::new(&geom, Point::new(0.21, 0.37), Point::new(0.77, 0.91)).unwrap();
        Scatterer::new(
            &table,
            &j,
            CouplingParams::natural(0.05).unwrap(),
            &GreensConfig::with_cutoff(2e4),
        )
        .unwrap()
    }

    #[test]
    fn fermi_values() {
        assert_eq!(fermi(3.0, 0.0), 0.5);
        let v = fermi(25.0, 1.0);
        assert!((v - 1.0 / (25f64.exp() + 1.0)).abs() < 1e-24);
        assert!((v - 1.39e-11).abs() < 1e-13);
        for &l in &[-3.0, -0.1, 0.0, 0.7, 12.0] {
            assert!((fermi(2.0, l) + fermi(2.0, -l) - 1.0).abs() < 1e-15);
        }
        assert_eq!(fermi(1.0, 1e6), 0.0);
        assert_eq!(fermi(1.0, -1e6), 1.0);
        assert!(fermi(1.0, 800.0) >= 0.0);
    }

    #[test]
    fn bath_validation() {
        assert!(BathPair::new(1.0, 2.0, 1.0, 0.0).is_err());
        assert!(BathPair::new(0.0, 1.0, 2.0, 0.0).is_err());
        assert!(BathPair::new(1.0, 1.0, 2.0, -1.0).is_err());
        assert!(BathPair::new(1.0, 1.0, 2.0, 0.0).is_ok());
    }

    #[test]
    fn segments_excise_poles_and_split_edges() {
        let s = segments(0.0, 10.0, &[3.0, 7.0], &[5.0, 20.0]);
        assert_eq!(s.len(), 4);
        assert_eq!(s[0].0, 0.0);
        assert!(s[0].1 < 3.0 && s[1].0 > 3.0);
        assert_eq!(s[1].1, 5.0);
        assert_eq!(s[2].0, 5.0);
        assert_eq!(s[3].1, 10.0);
        let total: f64 = s.iter().map(|(a, b)| b - a).sum();
        assert!((total - (10.0 - 2.0 * pole_guard(3.0) - 2.0 * pole_guard(7.0))).abs() < 1e-12);
    }

    #[test]
    fn equilibrium_current_is_zero() {
        let s = scatterer();
        let b = BathPair::new(25.0, 10.0, 10.0, 0.0).unwrap();
        assert_eq!(current(&s, &b, &QuadConfig::default()).unwrap().value, 0.0);
    }

    #[test]
    fn transparent_box_current() {
        // |t|² ≡ 1 at V_g = 0, so I = 2π(μ₂ − μ₁) up to exponentially small terms.
        let m = FixedMatrixTransmission::transparent();
        let b = BathPair::new(5.0, 10.0, 13.0, 0.0).unwrap();
        let r = current(&m, &b, &QuadConfig::default()).unwrap();
        assert!((r.value - 2.0 * PI * 3.0).abs() < 1e-6, "{}", r.value);
        let z = zero_temperature_current(&m, 10.0, 13.0, 0.0, &QuadConfig::default()).unwrap();
        assert!((z.value - 2.0 * PI * 3.0).abs() < 1e-9);
    }

    #[test]
    fn transparent_conductance_is_two_pi() {
        let m = FixedMatrixTransmission::transparent();
        let quad = QuadConfig::default();
        for &v in &[0.0, 1.0] {
            let b = BathPair::new(50.0, 10.0, 10.0 + v, 0.0).unwrap();
            let c = conductance(&m, &b, 1e-2, &quad).unwrap();
            assert!((c.value - 2.0 * PI).abs() < 1e-4, "{}", c.value);
            assert_eq!(c.one_sided, v == 0.0);
        }
        let lr = linear_response_conductance(&m, 50.0, 10.0, 0.0, &quad).unwrap();
        assert!((lr.value - 2.0 * PI).abs() < 1e-6);
    }

    #[test]
    fn zero_temperature_trivial_cases() {
        let s = scatterer();
        let q = QuadConfig::default();
        assert_eq!(
            zero_temperature_current(&s, 5.0, 5.0, 0.0, &q)
                .unwrap()
                .value,
            0.0
        );
        assert_eq!(
            zero_temperature_current(&s, 1.0, 5.0, 12.0, &q)
                .unwrap()
                .value,
            0.0
        );
    }

    #[test]
    fn zero_temperature_additivity() {
        let s = scatterer();
        let q = QuadConfig::default();
        let a = zero_temperature_current(&s, 5.0, 20.0, 0.0, &q).unwrap();
        let b = zero_temperature_current(&s, 20.0, 40.0, 0.0, &q).unwrap();
        let c = zero_temperature_current(&s, 5.0, 40.0, 0.0, &q).unwrap();
        let tol = a.abs_error + b.abs_error + c.abs_error + 1e-6 * c.value.abs();
        assert!((a.value + b.value - c.value).abs() <= tol);
    }

    #[test]
    fn current_is_nonnegative_and_poles_are_reported() {
        let s = scatterer();
        let b = BathPair::new(5.0, 5.0, 40.0, 0.0).unwrap();
        let r = current(&s, &b, &QuadConfig::default()).unwrap();
        assert!(r.value > 0.0);
        assert!(r.abs_error >= 0.0);
        assert!(!r.poles.is_empty());
        assert!(r.poles.iter().all(|&p| p > 0.0 && p < 50.0));
    }

    #[test]
    fn current_approaches_zero_temperature_limit() {
        let s = scatterer();
        let q = QuadConfig::default();
        let b = BathPair::new(1e4, 8.0, 30.0, 0.0).unwrap();
        let hot = current(&s, &b, &q).unwrap().value;
        let cold = zero_temperature_current(&s, 8.0, 30.0, 0.0, &q)
            .unwrap()
            .value;
        assert!((hot - cold).abs() < 1e-2 * cold, "{hot} vs {cold}");
    }

    #[test]
    fn insufficient_spectrum_is_reported() {
        let s = scatterer();
        let b = BathPair::new(1e-3, 0.0, 1.0, 0.0).unwrap();
        assert!(matches!(
            current(&s, &b, &QuadConfig::default()),
            Err(TransportError::InsufficientSpectrum { .. })
        ));
    }

    #[test]
    fn linear_response_matches_small_bias_difference() {
        let s = scatterer();
        let q = QuadConfig::default();
        let b = BathPair::new(2.0, 15.0, 15.0, 0.0).unwrap();
        let c = conductance(&s, &b, 1e-3, &q).unwrap();
        let lr = linear_response_conductance(&s, 2.0, 15.0, 0.0, &q).unwrap();
        assert!(
            (c.value - lr.value).abs() < 1e-2 * lr.value,
            "{} vs {}",
            c.value,
            lr.value
        );
    }
}
