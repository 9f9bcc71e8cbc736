//! TOML run configuration.
//!
//! ```toml
//! [geometry]
//! kind = "rectangle"      # or "triangle"
//! c1 = 2.0
//! c2 = 1.0
//! # shift = 0.0           # optional constant potential inside the resonator
//!
//! [junctions]
//! x1 = [0.2, 0.1]
//! x2 = [1.8, 0.9]
//!
//! [coupling]
//! kind = "natural"        # natural { rho } | symmetric { a, c, d } | general { a, c_re, c_im, d }
//! rho = 0.05
//!
//! [greens]
//! lambda_max = 1e4
//! c_g = 0.0
//! tail = "analytic"       # or "off"
//!
//! [quadrature]
//! abs_tol = 1e-8
//! rel_tol = 1e-6
//!
//! [sweep]
//! variable = "V"          # lambda | V | mu1 | beta | Vg
//! start = 0.0
//! stop = 20.0
//! count = 200
//! beta = 25.0
//! mu1 = 5.0
//! bias = 1.0
//! vg = 0.0
//!
//! [output]
//! path = "current.csv"
//! ```

use std::fmt;
use std::path::Path;

use anyhow::{bail, Context, Result};
use geoscat::greens::{GreensConfig, TailCorrection};
use geoscat::scattering::CouplingParams;
use geoscat::spectral::{Junctions, Point, ResonatorGeometry};
use geoscat::transport::{BathPair, QuadConfig};
use geoscat::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: GeometrySection,
    pub junctions: JunctionSection,
    #[serde(default)]
    pub coupling: CouplingSection,
    #[serde(default)]
    pub greens: GreensSection,
    #[serde(default)]
    pub quadrature: QuadratureSection,
    pub sweep: SweepSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometryKind {
    Rectangle,
    Triangle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub kind: GeometryKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<f64>,
}

impl GeometrySection {
    pub fn rectangle(c1: f64, c2: f64) -> Self {
        Self {
            kind: GeometryKind::Rectangle,
            c1: Some(c1),
            c2: Some(c2),
            shift: None,
        }
    }

    pub fn triangle() -> Self {
        Self {
            kind: GeometryKind::Triangle,
            c1: None,
            c2: None,
            shift: None,
        }
    }

    pub fn build(&self) -> Result<ResonatorGeometry> {
        let base = match self.kind {
            GeometryKind::Rectangle => {
                let (Some(c1), Some(c2)) = (self.c1, self.c2) else {
                    bail!("[geometry] rectangle needs c1 and c2");
                };
                ResonatorGeometry::rectangle(c1, c2)?
            }
            GeometryKind::Triangle => {
                if self.c1.is_some() || self.c2.is_some() {
                    bail!("[geometry] the triangle takes no side lengths");
                }
                ResonatorGeometry::triangle()
            }
        };
        Ok(match self.shift {
            Some(s) => ResonatorGeometry::shifted(base, s)?,
            None => base,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JunctionSection {
    pub x1: [f64; 2],
    pub x2: [f64; 2],
}

impl JunctionSection {
    pub fn build(&self, geometry: &ResonatorGeometry) -> Result<Junctions> {
        Ok(Junctions::new(
            geometry,
            Point::new(self.x1[0], self.x1[1]),
            Point::new(self.x2[0], self.x2[1]),
        )?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum CouplingSection {
    /// Contact-radius coupling `A = 1/(2ρ)`, `C = 1/√(2πρ)`, `D = −ln ρ`.
    Natural {
        rho: f64,
    },
    Symmetric {
        a: f64,
        c: f64,
        d: f64,
    },
    General {
        a: [f64; 2],
        c_re: [f64; 2],
        c_im: [f64; 2],
        d: [f64; 2],
    },
}

impl Default for CouplingSection {
    fn default() -> Self {
        CouplingSection::Natural { rho: 0.05 }
    }
}

impl CouplingSection {
    pub fn build(&self) -> Result<CouplingParams> {
        Ok(match *self {
            CouplingSection::Natural { rho } => CouplingParams::natural(rho)?,
            CouplingSection::Symmetric { a, c, d } => CouplingParams::symmetric(a, c, d)?,
            CouplingSection::General { a, c_re, c_im, d } => CouplingParams::general(
                a,
                [
                    Complex64::new(c_re[0], c_im[0]),
                    Complex64::new(c_re[1], c_im[1]),
                ],
                d,
            )?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailMode {
    Analytic,
    Off,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GreensSection {
    pub lambda_max: f64,
    pub c_g: f64,
    pub tail: TailMode,
    pub tail_tolerance: f64,
    pub enforce_tail_tolerance: bool,
}

impl Default for GreensSection {
    fn default() -> Self {
        let g = GreensConfig::default();
        Self {
            lambda_max: g.lambda_max,
            c_g: g.c_g,
            tail: TailMode::Analytic,
            tail_tolerance: g.tail_tolerance,
            enforce_tail_tolerance: g.enforce_tail_tolerance,
        }
    }
}

impl GreensSection {
    pub fn build(&self) -> Result<GreensConfig> {
        let cfg = GreensConfig {
            lambda_max: self.lambda_max,
            c_g: self.c_g,
            tail_tolerance: self.tail_tolerance,
            tail: match self.tail {
                TailMode::Analytic => TailCorrection::Analytic,
                TailMode::Off => TailCorrection::Off,
            },
            enforce_tail_tolerance: self.enforce_tail_tolerance,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSection {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub window_tolerance: f64,
    pub max_subintervals: usize,
    pub extra_bisections: u32,
    pub richardson_tolerance: f64,
}

impl Default for QuadratureSection {
    fn default() -> Self {
        let q = QuadConfig::default();
        Self {
            abs_tol: q.abs_tol,
            rel_tol: q.rel_tol,
            window_tolerance: q.window_tolerance,
            max_subintervals: q.max_subintervals,
            extra_bisections: q.extra_bisections,
            richardson_tolerance: q.richardson_tolerance,
        }
    }
}

impl QuadratureSection {
    pub fn build(&self) -> Result<QuadConfig> {
        let q = QuadConfig {
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            window_tolerance: self.window_tolerance,
            max_subintervals: self.max_subintervals,
            extra_bisections: self.extra_bisections,
            richardson_tolerance: self.richardson_tolerance,
        };
        q.validate()?;
        Ok(q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    #[serde(rename = "lambda")]
    Lambda,
    V,
    #[serde(rename = "mu1")]
    Mu1,
    #[serde(rename = "beta")]
    Beta,
    Vg,
}

impl Axis {
    pub fn name(&self) -> &'static str {
        match self {
            Axis::Lambda => "lambda",
            Axis::V => "V",
            Axis::Mu1 => "mu1",
            Axis::Beta => "beta",
            Axis::Vg => "Vg",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub variable: Axis,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default)]
    pub scale: Scale,
    /// Values of the bath parameters not swept.
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default)]
    pub mu1: f64,
    /// `V = μ₂ − μ₁`.
    #[serde(default)]
    pub bias: f64,
    #[serde(default)]
    pub vg: f64,
    /// Also emit `∂I/∂V` with this step.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conductance_step: Option<f64>,
}

fn default_beta() -> f64 {
    25.0
}

impl SweepSection {
    pub fn grid(&self) -> Result<Vec<f64>> {
        if self.count == 0 {
            bail!("[sweep] count must be positive");
        }
        if !(self.start.is_finite() && self.stop.is_finite()) {
            bail!("[sweep] start and stop must be finite");
        }
        if self.count == 1 {
            return Ok(vec![self.start]);
        }
        let last = (self.count - 1) as f64;
        Ok(match self.scale {
            Scale::Linear => (0..self.count)
                .map(|i| self.start + (self.stop - self.start) * i as f64 / last)
                .collect(),
            Scale::Log => {
                if !(self.start > 0.0 && self.stop > 0.0) {
                    bail!("[sweep] a log axis needs positive start and stop");
                }
                let (a, b) = (self.start.ln(), self.stop.ln());
                (0..self.count)
                    .map(|i| (a + (b - a) * i as f64 / last).exp())
                    .collect()
            }
        })
    }

    /// Bath parameters at grid value `x` (not meaningful for the λ axis).
    pub fn baths_at(&self, x: f64) -> BathPair {
        let (mut beta, mut mu1, mut bias, mut vg) = (self.beta, self.mu1, self.bias, self.vg);
        match self.variable {
            Axis::Lambda => {}
            Axis::V => bias = x,
            Axis::Mu1 => mu1 = x,
            Axis::Beta => beta = x,
            Axis::Vg => vg = x,
        }
        BathPair {
            beta,
            mu1,
            mu2: mu1 + bias,
            vg,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    /// Worker threads; unset means one per core.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<String>,
}

/// Everything a sweep needs, validated and converted to library types.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub geometry: ResonatorGeometry,
    pub junctions: Junctions,
    pub coupling: CouplingParams,
    pub greens: GreensConfig,
    pub quad: QuadConfig,
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(s).context("parsing configuration")?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml_str(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn resolve(&self) -> Result<Resolved> {
        let geometry = self.geometry.build()?;
        let junctions = self.junctions.build(&geometry)?;
        Ok(Resolved {
            junctions,
            geometry,
            coupling: self.coupling.build()?,
            greens: self.greens.build()?,
            quad: self.quadrature.build()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
[geometry]
kind = "rectangle"
c1 = 2.0
c2 = 1.0

[junctions]
x1 = [0.2, 0.1]
x2 = [1.8, 0.9]

[coupling]
kind = "general"
a = [1.0, 2.0]
c_re = [0.5, 0.25]
c_im = [0.0, -0.125]
d = [0.1, 0.2]

[greens]
lambda_max = 5000.0
tail = "off"

[sweep]
variable = "lambda"
start = 1.0
stop = 100.0
count = 7
scale = "log"
conductance_step = 0.001

[output]
threads = 3
"#;

    #[test]
    fn parses_and_round_trips() {
        let cfg = RunConfig::from_toml_str(SAMPLE).unwrap();
        assert_eq!(cfg.greens.tail, TailMode::Off);
        assert_eq!(cfg.greens.c_g, 0.0);
        assert_eq!(cfg.sweep.scale, Scale::Log);
        assert_eq!(cfg.output.threads, Some(3));
        let again = RunConfig::from_toml_str(&cfg.to_toml_string().unwrap()).unwrap();
        assert_eq!(cfg, again);
        cfg.resolve().unwrap();
    }

    #[test]
    fn rejects_unknown_keys_and_axes() {
        let bad = SAMPLE.replace("count = 7", "count = 7\ncolour = 1");
        assert!(RunConfig::from_toml_str(&bad).is_err());
        let bad = SAMPLE.replace("\"lambda\"", "\"mu2\"");
        assert!(RunConfig::from_toml_str(&bad).is_err());
    }

    #[test]
    fn grids() {
        let mut cfg = RunConfig::from_toml_str(SAMPLE).unwrap();
        let g = cfg.sweep.grid().unwrap();
        assert_eq!(g.len(), 7);
        assert!((g[0] - 1.0).abs() < 1e-12 && (g[6] - 100.0).abs() < 1e-12);
        assert!((g[3] - 10.0).abs() < 1e-12);
        cfg.sweep.scale = Scale::Linear;
        let g = cfg.sweep.grid().unwrap();
        assert_eq!(g[1], 1.0 + 99.0 / 6.0);
    }

    #[test]
    fn axis_selects_bath_parameter() {
        let mut s = RunConfig::from_toml_str(SAMPLE).unwrap().sweep;
        s.beta = 10.0;
        s.mu1 = 2.0;
        s.bias = 1.0;
        s.variable = Axis::V;
        assert_eq!(s.baths_at(3.0).mu2, 5.0);
        s.variable = Axis::Mu1;
        assert_eq!(s.baths_at(3.0).mu2, 4.0);
        s.variable = Axis::Beta;
        assert_eq!(s.baths_at(3.0).beta, 3.0);
        s.variable = Axis::Vg;
        assert_eq!(s.baths_at(3.0).vg, 3.0);
    }

    #[test]
    fn triangle_rejects_side_lengths() {
        let g = GeometrySection {
            c1: Some(1.0),
            ..GeometrySection::triangle()
        };
        assert!(g.build().is_err());
        assert!(GeometrySection::triangle().build().is_ok());
    }
}
