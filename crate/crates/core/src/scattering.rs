//! Junction transfer matrix and scattering amplitudes.
//!
//! The transfer matrix maps lead boundary values `(u₁(0), u₁'(0))` on the
//! incoming lead to `(u₂(0), u₂'(0))` on the outgoing one. With the coupling
//! constants `(A_j, C_j, D_j)` and the resonator quantities `g`, `Z_j`, `𝒟`,
//!
//! ```text
//!            1    ⎡ C₁Z₂ + (A₁/C̄₁)𝒟                          −𝒟/C̄₁                  ⎤
//! L  =  ───── ⎢                                                                      ⎥
//!          gC₂  ⎣ |C₂|²(C₁ − Z₁A₁/C̄₁) − C₁A₂Z₂ − (A₁A₂/C̄₁)𝒟    (A₂/C̄₁)𝒟 + |C₂|²Z₁/C̄₁ ⎦
//! ```
//!
//! whose determinant is `C̄₂C₁/(C̄₁C₂)`, i.e. `+1` for equal or real couplings.
//! Eliminating the lead equations step by step (`(u₁,u₁') → (u₁,a₁) → (a₁,a₂)
//! → (u₂,a₂) → (u₂,u₂')`) gives the factors `−1/C̄₁`, `−C₁/g`, `g/C₂`, `C̄₂`.
//!
//! For equal real couplings the matrix reduces to
//!
//! ```text
//! L = (1/g) ⎡ Z₂ + (A/C²)𝒟                    −𝒟/C²        ⎤
//!           ⎣ C² − A(Z₁+Z₂) − (A²/C²)𝒟        (A/C²)𝒟 + Z₁ ⎦
//! ```
//!
//! Note that this entry `−𝒟/C²` carries no factor 2; that form is the only
//! one consistent with the general matrix and with flux conservation.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::greens::{GreensConfig, GreensError, PairKernel, ResonatorQuantities};
use crate::spectral::{Junctions, ModeTable};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScatteringError {
    #[error(transparent)]
    Greens(#[from] GreensError),
    #[error("invalid coupling: {0}")]
    InvalidCoupling(String),
    #[error("lambda = {lambda} is below the channel threshold V_g/2 = {threshold}")]
    BelowThreshold { lambda: f64, threshold: f64 },
    #[error("gate voltage must be non-negative and finite, got {0}")]
    InvalidGate(f64),
    #[error("g vanishes at lambda = {0}; the transfer matrix is singular")]
    SingularTransfer(f64),
    #[error("scattering denominator vanishes at lambda = {0}")]
    DegenerateScattering(f64),
}

/// Coupling constants `(A_j, C_j, D_j)` of the two junctions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingParams {
    pub a: [f64; 2],
    pub c: [Complex64; 2],
    pub d: [f64; 2],
}

impl CouplingParams {
    pub fn general(a: [f64; 2], c: [Complex64; 2], d: [f64; 2]) -> Result<Self, ScatteringError> {
        let params = Self { a, c, d };
        params.validate()?;
        Ok(params)
    }

    /// Equal, time-reversal invariant coupling at both junctions.
    pub fn symmetric(a: f64, c: f64, d: f64) -> Result<Self, ScatteringError> {
        Self::general([a, a], [Complex64::new(c, 0.0); 2], [d, d])
    }

    /// Coupling matched to a thin cylindrical contact of radius `rho`:
    /// `A = 1/(2ρ)`, `C = 1/√(2πρ)`, `D = −ln ρ`.
    pub fn natural(rho: f64) -> Result<Self, ScatteringError> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(ScatteringError::InvalidCoupling(format!(
                "contact radius must be positive, got {rho}"
            )));
        }
        Self::symmetric(1.0 / (2.0 * rho), 1.0 / (2.0 * PI * rho).sqrt(), -rho.ln())
    }

    pub fn validate(&self) -> Result<(), ScatteringError> {
        for c in self.c {
            if c.norm() == 0.0 || !c.is_finite() {
                return Err(ScatteringError::InvalidCoupling(format!(
                    "C must be non-zero and finite, got {c}"
                )));
            }
        }
        if !self.a.iter().chain(&self.d).all(|v| v.is_finite()) {
            return Err(ScatteringError::InvalidCoupling(
                "A and D must be finite".into(),
            ));
        }
        Ok(())
    }

    /// `A₁ = A₂`, `C₁ = C₂` real and `D₁ = D₂`.
    pub fn is_symmetric(&self) -> bool {
        self.a[0] == self.a[1]
            && self.d[0] == self.d[1]
            && self.c[0] == self.c[1]
            && self.c[0].im == 0.0
    }

    /// The coupling seen with junction labels exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            a: [self.a[1], self.a[0]],
            c: [self.c[1], self.c[0]],
            d: [self.d[1], self.d[0]],
        }
    }
}

/// Lead momenta for resonator energy `λ` and gate voltage `V_g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeadMomenta {
    pub k1: f64,
    pub k2: f64,
}

/// `k₁ = √(λ + V_g/2)`, `k₂ = √(λ − V_g/2)`.
pub fn momenta(lambda: f64, vg: f64) -> Result<LeadMomenta, ScatteringError> {
    if !(vg.is_finite() && vg >= 0.0) {
        return Err(ScatteringError::InvalidGate(vg));
    }
    let threshold = vg / 2.0;
    if !(lambda >= threshold) {
        return Err(ScatteringError::BelowThreshold { lambda, threshold });
    }
    Ok(LeadMomenta {
        k1: (lambda + threshold).sqrt(),
        k2: (lambda - threshold).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub entries: [[Complex64; 2]; 2],
    pub lambda: f64,
}

impl TransferMatrix {
    pub fn new(entries: [[Complex64; 2]; 2], lambda: f64) -> Self {
        Self { entries, lambda }
    }

    pub fn identity(lambda: f64) -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self::new([[one, zero], [zero, one]], lambda)
    }

    pub fn det(&self) -> Complex64 {
        let [[a, b], [c, d]] = self.entries;
        a * d - b * c
    }

    fn scaled(&self, s: Complex64) -> Self {
        let [[a, b], [c, d]] = self.entries;
        Self::new([[a * s, b * s], [c * s, d * s]], self.lambda)
    }
}

/// `g·C₂·L`, the transfer matrix without its `1/(gC₂)` prefactor. Finite even
/// where `g` vanishes.
fn scaled_general_matrix(q: &ResonatorQuantities, c: &CouplingParams) -> [[Complex64; 2]; 2] {
    let [a1, a2] = c.a;
    let [c1, c2] = c.c;
    let c1b = c1.conj();
    let c2sq = c2.norm_sqr();
    let (z1, z2, dd) = (q.z1, q.z2, q.dd);
    [
        [c1 * z2 + a1 * dd / c1b, -dd / c1b],
        [
            c2sq * (c1 - z1 * a1 / c1b) - c1 * a2 * z2 - a1 * a2 * dd / c1b,
            (a2 * dd + c2sq * z1) / c1b,
        ],
    ]
}

fn check_g(q: &ResonatorQuantities) -> Result<(), ScatteringError> {
    if q.g == 0.0 || !q.g.is_finite() {
        return Err(ScatteringError::SingularTransfer(q.lambda));
    }
    Ok(())
}

/// Transfer matrix for arbitrary couplings.
///
/// `Z_j` and `𝒟` are recomputed from `q.xi_j` and the coupling's `D_j`, so
/// the coupling is the single source of the boundary parameters.
pub fn transfer_matrix_general(
    q: &ResonatorQuantities,
    c: &CouplingParams,
) -> Result<TransferMatrix, ScatteringError> {
    c.validate()?;
    check_g(q)?;
    let q = q.with_boundary_params(c.d);
    let scaled = TransferMatrix::new(scaled_general_matrix(&q, c), q.lambda);
    Ok(scaled.scaled(1.0 / (q.g * c.c[1])))
}

/// Transfer matrix for equal real couplings `(A, C, D)` at both junctions.
pub fn transfer_matrix_symmetric(
    q: &ResonatorQuantities,
    a: f64,
    c: f64,
    d: f64,
) -> Result<TransferMatrix, ScatteringError> {
    CouplingParams::symmetric(a, c, d)?;
    check_g(q)?;
    let q = q.with_boundary_params([d, d]);
    let c2 = c * c;
    let ratio = a / c2 * q.dd;
    let entries = [
        [q.z2 + ratio, -q.dd / c2],
        [c2 - a * (q.z1 + q.z2) - a * ratio, ratio + q.z1],
    ]
    .map(|row| row.map(|v| Complex64::new(v / q.g, 0.0)));
    Ok(TransferMatrix::new(entries, q.lambda))
}

/// Reflection and transmission amplitudes at lead momenta `k₁`, `k₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitudes {
    pub r: Complex64,
    pub t: Complex64,
    pub k1: f64,
    pub k2: f64,
    pub lambda: f64,
}

impl Amplitudes {
    pub fn transmission(&self) -> f64 {
        self.t.norm_sqr()
    }

    pub fn reflection(&self) -> f64 {
        self.r.norm_sqr()
    }

    /// `k₁(1 − |r|²) − k₂|t|²`, relative to `k₁`. Zero for a flux-conserving junction.
    pub fn flux_residual(&self) -> f64 {
        (self.k1 * (1.0 - self.reflection()) - self.k2 * self.transmission()) / self.k1
    }

    /// `|r|² + (k₂/k₁)²|t|² − 1`, the quadratic-ratio variant of the unitarity
    /// relation, kept for comparison with [`Self::flux_residual`].
    pub fn squared_ratio_residual(&self) -> f64 {
        let ratio = self.k2 / self.k1;
        self.reflection() + ratio * ratio * self.transmission() - 1.0
    }
}

/// Solves the lead matching conditions for `r` and `t`:
///
/// ```text
/// r = −(L₂₁ + i(k₁L₂₂ − k₂L₁₁) + k₁k₂L₁₂) / Δ
/// t = −2ik₁ / Δ,      Δ = L₂₁ − i(k₁L₂₂ + k₂L₁₁) − k₁k₂L₁₂
/// ```
///
/// The exact solution of the linear system carries an extra factor `det L` in
/// `t`, which equals one for the time-reversal invariant couplings and is
/// unimodular in general, so `|t|` is unaffected.
pub fn amplitudes(l: &TransferMatrix, k1: f64, k2: f64) -> Result<Amplitudes, ScatteringError> {
    let [[l11, l12], [l21, l22]] = l.entries;
    let k1c = Complex64::new(k1, 0.0);
    let denom = l21 - I * (k1 * l22 + k2 * l11) - k1 * k2 * l12;
    let scale = l21.norm() + k1 * l22.norm() + k2 * l11.norm() + k1 * k2 * l12.norm();
    if !(denom.norm() > 1e-14 * scale) {
        return Err(ScatteringError::DegenerateScattering(l.lambda));
    }
    let r = -(l21 + I * (k1 * l22 - k2 * l11) + k1 * k2 * l12) / denom;
    let t = -2.0 * I * k1c / denom;
    Ok(Amplitudes {
        r,
        t,
        k1,
        k2,
        lambda: l.lambda,
    })
}

/// Transmission amplitude for equal real couplings written out in closed
/// form, without forming the transfer matrix:
///
/// ```text
/// t = −2ik₁g / ( C² − A(Z₁+Z₂) − (A²/C²)𝒟 − ik₁((A/C²)𝒟 + Z₁)
///                − ik₂(Z₂ + (A/C²)𝒟) + k₁k₂𝒟/C² )
/// ```
pub fn transmission_amplitude_direct(
    q: &ResonatorQuantities,
    a: f64,
    c: f64,
    d: f64,
    k1: f64,
    k2: f64,
) -> Complex64 {
    let q = q.with_boundary_params([d, d]);
    let c2 = c * c;
    let ad = a / c2 * q.dd;
    let real = c2 - a * (q.z1 + q.z2) - a * ad + k1 * k2 * q.dd / c2;
    let imag = -k1 * (ad + q.z1) - k2 * (q.z2 + ad);
    -2.0 * I * k1 * q.g / Complex64::new(real, imag)
}

/// `|t|²` at resonator energy `λ` and gate voltage `V_g`, via momenta,
/// resonator quantities, transfer matrix and amplitudes.
pub fn transmission_probability(
    table: &ModeTable,
    junctions: &Junctions,
    coupling: &CouplingParams,
    lambda: f64,
    vg: f64,
    config: &GreensConfig,
) -> Result<f64, ScatteringError> {
    let k = momenta(lambda, vg)?;
    let q = crate::greens::resonator_quantities(table, junctions, lambda, coupling.d, config)?;
    let l = if coupling.is_symmetric() {
        transfer_matrix_symmetric(&q, coupling.a[0], coupling.c[0].re, coupling.d[0])?
    } else {
        transfer_matrix_general(&q, coupling)?
    };
    Ok(amplitudes(&l, k.k1, k.k2)?.transmission())
}

/// One transmission evaluation with its diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionSample {
    pub lambda: f64,
    pub k1: f64,
    pub k2: f64,
    pub r: Complex64,
    pub t: Complex64,
    pub modes: usize,
    pub tail_error_estimate: f64,
}

impl TransmissionSample {
    pub fn transmission(&self) -> f64 {
        self.t.norm_sqr()
    }
}

/// A resonator with leads attached: precomputed junction weights plus coupling.
#[derive(Debug, Clone)]
pub struct Scatterer {
    kernel: PairKernel,
    coupling: CouplingParams,
}

impl Scatterer {
    pub fn new(
        table: &ModeTable,
        junctions: &Junctions,
        coupling: CouplingParams,
        config: &GreensConfig,
    ) -> Result<Self, ScatteringError> {
        coupling.validate()?;
        Ok(Self {
            kernel: PairKernel::new(table, junctions, config)?,
            coupling,
        })
    }

    pub fn kernel(&self) -> &PairKernel {
        &self.kernel
    }

    pub fn coupling(&self) -> &CouplingParams {
        &self.coupling
    }

    pub fn quantities(&self, lambda: f64) -> Result<ResonatorQuantities, ScatteringError> {
        Ok(self.kernel.quantities(lambda, self.coupling.d)?)
    }

    pub fn transfer_matrix(&self, lambda: f64) -> Result<TransferMatrix, ScatteringError> {
        transfer_matrix_general(&self.quantities(lambda)?, &self.coupling)
    }

    /// Amplitudes from the prefactor-free matrix `gC₂L`; no division by `g`,
    /// so energies where `g` changes sign are handled smoothly.
    pub fn sample(&self, lambda: f64, vg: f64) -> Result<TransmissionSample, ScatteringError> {
        let k = momenta(lambda, vg)?;
        let q = self.quantities(lambda)?;
        let [[l11, l12], [l21, l22]] = scaled_general_matrix(&q, &self.coupling);
        let (k1, k2) = (k.k1, k.k2);
        let denom = l21 - I * (k1 * l22 + k2 * l11) - k1 * k2 * l12;
        let scale = l21.norm() + k1 * l22.norm() + k2 * l11.norm() + k1 * k2 * l12.norm();
        if !(denom.norm() > 1e-14 * scale) {
            return Err(ScatteringError::DegenerateScattering(lambda));
        }
        let r = -(l21 + I * (k1 * l22 - k2 * l11) + k1 * k2 * l12) / denom;
        let t = -2.0 * I * k1 * q.g * self.coupling.c[1] / denom;
        Ok(TransmissionSample {
            lambda,
            k1,
            k2,
            r,
            t,
            modes: q.modes,
            tail_error_estimate: q.tail_error_estimate,
        })
    }

    pub fn transmission(&self, lambda: f64, vg: f64) -> Result<f64, ScatteringError> {
        Ok(self.sample(lambda, vg)?.transmission())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{enumerate_modes, Point, ResonatorGeometry};

    fn quantities(g: f64, xi1: f64, xi2: f64) -> ResonatorQuantities {
        ResonatorQuantities::from_parts(3.0, g, xi1, xi2, [0.0, 0.0])
    }

    #[test]
    fn momenta_examples() {
        let k = momenta(4.0, 0.0).unwrap();
        assert_eq!((k.k1, k.k2), (2.0, 2.0));
        let k = momenta(2.0, 2.0).unwrap();
        assert!((k.k1 - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(k.k2, 1.0);
        let k = momenta(1.0, 2.0).unwrap();
        assert_eq!(k.k2, 0.0);
        assert!(matches!(
            momenta(0.999, 2.0),
            Err(ScatteringError::BelowThreshold { .. })
        ));
        assert!(matches!(
            momenta(1.0, -1.0),
            Err(ScatteringError::InvalidGate(_))
        ));
    }

    #[test]
    fn natural_coupling_preset() {
        let c = CouplingParams::natural(0.05).unwrap();
        assert!((c.a[0] - 10.0).abs() < 1e-12);
        assert!((c.c[0].re - 1.78412).abs() < 1e-5);
        assert!((c.d[0] - 2.99573).abs() < 1e-5);
        assert!(c.is_symmetric());
    }

    #[test]
    fn zero_coupling_rejected() {
        assert!(CouplingParams::symmetric(1.0, 0.0, 1.0).is_err());
        assert!(CouplingParams::natural(0.0).is_err());
    }

    #[test]
    fn symmetric_matches_general() {
        let q = quantities(0.37, -0.21, 0.44);
        for (a, c, d) in [(0.0, 1.0, 0.0), (10.0, 1.784, 2.996), (-2.5, 0.3, -1.0)] {
            let s = transfer_matrix_symmetric(&q, a, c, d).unwrap();
            let g =
                transfer_matrix_general(&q, &CouplingParams::symmetric(a, c, d).unwrap()).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    let diff = (s.entries[i][j] - g.entries[i][j]).norm();
                    assert!(
                        diff <= 1e-12 * (1.0 + s.entries[i][j].norm()),
                        "{a} {c} {d}"
                    );
                }
            }
        }
    }

    #[test]
    fn zero_a_symmetric_entries() {
        let q = quantities(0.5, -0.2, 0.3);
        let c = 0.7;
        let l = transfer_matrix_symmetric(&q, 0.0, c, 0.0).unwrap();
        let dd = q.g * q.g - q.z1 * q.z2;
        let expect = [[q.z2, -dd / (c * c)], [c * c, q.z1]];
        for (row, want) in l.entries.iter().zip(expect) {
            for (x, w) in row.iter().zip(want) {
                assert!((x.re - w / q.g).abs() < 1e-14);
            }
        }
        // (Z₁Z₂ + 𝒟)/g² = 1.
        assert!((l.det() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn determinant_of_general_matrix() {
        let q = quantities(-0.8, 0.15, -0.6);
        let c1 = Complex64::new(0.7, -1.2);
        let c2 = Complex64::new(-0.4, 0.9);
        let cp = CouplingParams::general([1.5, -0.5], [c1, c2], [0.3, 2.0]).unwrap();
        let l = transfer_matrix_general(&q, &cp).unwrap();
        let expected = c2.conj() * c1 / (c1.conj() * c2);
        assert!((l.det() - expected).norm() < 1e-10);
        // Equal complex couplings give a unit determinant.
        let cp = CouplingParams::general([1.5, 1.5], [c1, c1], [0.3, 0.3]).unwrap();
        let l = transfer_matrix_general(&q, &cp).unwrap();
        assert!((l.det() - 1.0).norm() < 1e-10);
    }

    #[test]
    fn singular_when_g_vanishes() {
        let q = quantities(0.0, 0.1, 0.2);
        assert!(matches!(
            transfer_matrix_symmetric(&q, 1.0, 1.0, 1.0),
            Err(ScatteringError::SingularTransfer(_))
        ));
    }

    #[test]
    fn transparent_junction() {
        let a = amplitudes(&TransferMatrix::identity(4.0), 2.0, 2.0).unwrap();
        assert!((a.t - 1.0).norm() < 1e-15);
        assert!(a.r.norm() < 1e-15);
    }

    #[test]
    fn threshold_reflects_fully() {
        let q = quantities(0.4, -0.3, 0.2);
        let l = transfer_matrix_symmetric(&q, 2.0, 0.9, 1.0).unwrap();
        // 1 − |r|² = (k₂/k₁)|t|² vanishes linearly as k₂ → 0.
        for k2 in [1e-3, 1e-6] {
            let amp = amplitudes(&l, 1.3, k2).unwrap();
            let expected = k2 / 1.3 * amp.transmission();
            assert!((1.0 - amp.reflection() - expected).abs() < 1e-12);
        }
        let amp = amplitudes(&l, 1.3, 0.0).unwrap();
        assert!((amp.reflection() - 1.0).abs() < 1e-14);
        assert!(amp.transmission().is_finite());
    }

    #[test]
    fn weak_coupling_suppresses_transmission_like_c4() {
        let table =
            enumerate_modes(&ResonatorGeometry::rectangle(2.0, 1.0).unwrap(), 5000.0).unwrap();
        let j =
            Junctions::new(table.geometry(), Point::new(0.2, 0.1), Point::new(1.8, 0.9)).unwrap();
        let cfg = GreensConfig::with_cutoff(5000.0);
        let t = |c| {
            let cp = CouplingParams::symmetric(0.0, c, 0.0).unwrap();
            transmission_probability(&table, &j, &cp, 25.0, 0.0, &cfg).unwrap()
        };
        let (t3, t4) = (t(1e-3), t(1e-4));
        assert!(t3 < 1e-8);
        let ratio = t3 / t4;
        assert!((ratio / 1e4 - 1.0).abs() < 1e-3, "{ratio}");
    }
}
