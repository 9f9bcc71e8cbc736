//! Stationary fermion transport through a compact two-dimensional resonator
//! ("geometric scatterer") with two one-dimensional leads attached at interior
//! points.
//!
//! The crate is organised bottom-up:
//!
//! * [`spectral`] enumerates Dirichlet eigenpairs of the supported resonators
//!   and caches them as [`ModeTable`]s.
//! * [`greens`] evaluates the off-diagonal Green's function and the
//!   regularized diagonal value by truncated mode sums.
//! * [`scattering`] builds the junction transfer matrix and the reflection and
//!   transmission amplitudes.
//! * [`transport`] integrates the Landauer-Büttiker current with a
//!   resonance-aware adaptive quadrature.

// Negated comparisons deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod greens;
pub mod quadrature;
pub mod scattering;
pub mod spectral;
pub mod summation;
pub mod transport;

pub use greens::{GreensConfig, PairKernel, ResonatorQuantities, TailCorrection, XiEstimate};
pub use scattering::{
    Amplitudes, CouplingParams, LeadMomenta, Scatterer, TransferMatrix, TransmissionSample,
};
pub use spectral::{Junctions, Mode, ModeTable, Point, ResonatorGeometry};
pub use transport::{
    BathPair, ConductanceReport, FixedMatrixTransmission, QuadConfig, QuadratureReport,
    TransmissionModel,
};

pub use num_complex::Complex64;
