//! Resonator shapes with closed-form Dirichlet spectra.

use std::f64::consts::PI;
use std::fmt;

use super::SpectralError;

/// Edge tolerance for the barycentric membership test.
pub const EDGE_TOLERANCE: f64 = 1e-12;

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// Vertices of the fixed triangle: (0,0), (0,4√3), (3,√3).
pub const TRIANGLE_VERTICES: [Point; 3] = [
    Point { x: 0.0, y: 0.0 },
    Point {
        x: 0.0,
        y: 4.0 * SQRT3,
    },
    Point { x: 3.0, y: SQRT3 },
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// A compact planar resonator with Dirichlet boundary.
///
/// `Shifted` models a gate potential applied directly to the resonator: every
/// eigenvalue of `inner` is raised by `shift` while eigenfunctions stay the
/// same. Shifts do not nest; use [`ResonatorGeometry::shifted`] to build one.
#[derive(Debug, Clone, PartialEq)]
pub enum ResonatorGeometry {
    /// The rectangle `[0, c1] × [0, c2]`.
    Rectangle { c1: f64, c2: f64 },
    /// The triangle with vertices (0,0), (0,4√3), (3,√3).
    Triangle,
    Shifted {
        inner: Box<ResonatorGeometry>,
        shift: f64,
    },
}

impl ResonatorGeometry {
    pub fn rectangle(c1: f64, c2: f64) -> Result<Self, SpectralError> {
        let geometry = ResonatorGeometry::Rectangle { c1, c2 };
        geometry.validate()?;
        Ok(geometry)
    }

    pub fn triangle() -> Self {
        ResonatorGeometry::Triangle
    }

    pub fn shifted(inner: ResonatorGeometry, shift: f64) -> Result<Self, SpectralError> {
        let geometry = ResonatorGeometry::Shifted {
            inner: Box::new(inner),
            shift,
        };
        geometry.validate()?;
        Ok(geometry)
    }

    pub fn validate(&self) -> Result<(), SpectralError> {
        match self {
            ResonatorGeometry::Rectangle { c1, c2 } => {
                if !(c1.is_finite() && c2.is_finite() && *c1 > 0.0 && *c2 > 0.0) {
                    return Err(SpectralError::InvalidGeometry(format!(
                        "rectangle sides must be positive and finite, got {c1} x {c2}"
                    )));
                }
                Ok(())
            }
            ResonatorGeometry::Triangle => Ok(()),
            ResonatorGeometry::Shifted { inner, shift } => {
                if matches!(**inner, ResonatorGeometry::Shifted { .. }) {
                    return Err(SpectralError::InvalidGeometry(
                        "spectral shifts cannot be nested".into(),
                    ));
                }
                if !shift.is_finite() {
                    return Err(SpectralError::InvalidGeometry(format!(
                        "spectral shift must be finite, got {shift}"
                    )));
                }
                inner.validate()
            }
        }
    }

    /// The unshifted shape.
    pub fn base(&self) -> &ResonatorGeometry {
        match self {
            ResonatorGeometry::Shifted { inner, .. } => inner,
            other => other,
        }
    }

    /// Amount added to every eigenvalue of the base shape.
    pub fn spectral_shift(&self) -> f64 {
        match self {
            ResonatorGeometry::Shifted { shift, .. } => *shift,
            _ => 0.0,
        }
    }

    /// Area |G|.
    pub fn area(&self) -> f64 {
        match self {
            ResonatorGeometry::Rectangle { c1, c2 } => c1 * c2,
            ResonatorGeometry::Triangle => 6.0 * SQRT3,
            ResonatorGeometry::Shifted { inner, .. } => inner.area(),
        }
    }

    pub fn perimeter(&self) -> f64 {
        match self {
            ResonatorGeometry::Rectangle { c1, c2 } => 2.0 * (c1 + c2),
            ResonatorGeometry::Triangle => 6.0 + 6.0 * SQRT3,
            ResonatorGeometry::Shifted { inner, .. } => inner.perimeter(),
        }
    }

    /// Slope 4π/|G| of the leading Weyl law λ_n ≈ 4πn/|G|.
    pub fn weyl_counterterm_rate(&self) -> f64 {
        4.0 * PI / self.area()
    }

    /// Leading Weyl estimate |G|(λ - shift)/(4π) of the number of modes below `lambda`.
    pub fn weyl_count(&self, lambda: f64) -> f64 {
        (self.area() * (lambda - self.spectral_shift()) / (4.0 * PI)).max(0.0)
    }

    /// Two-term Weyl estimate with the Dirichlet boundary correction
    /// `−|∂G|√λ/(4π)`.
    pub fn weyl_count_with_boundary(&self, lambda: f64) -> f64 {
        let l = (lambda - self.spectral_shift()).max(0.0);
        (self.area() * l / (4.0 * PI) - self.perimeter() * l.sqrt() / (4.0 * PI)).max(0.0)
    }

    /// Whether `quantum` labels an eigenpair of this shape.
    pub fn is_admissible(&self, quantum: (u32, u32)) -> bool {
        let (a, b) = quantum;
        match self.base() {
            ResonatorGeometry::Rectangle { .. } => a >= 1 && b >= 1,
            ResonatorGeometry::Triangle => a >= 1 && b > a && (a % 2 == b % 2),
            ResonatorGeometry::Shifted { .. } => unreachable!("shifts do not nest"),
        }
    }

    /// Eigenvalue for the quantum numbers `(n_x, n_y)` (rectangle) or `(k, n)` (triangle).
    ///
    /// The quantum numbers are not checked for admissibility.
    pub fn eigenvalue(&self, quantum: (u32, u32)) -> f64 {
        match self {
            ResonatorGeometry::Rectangle { c1, c2 } => rectangle_eigenvalue(*c1, *c2, quantum),
            ResonatorGeometry::Triangle => triangle_eigenvalue(quantum),
            ResonatorGeometry::Shifted { inner, shift } => inner.eigenvalue(quantum) + shift,
        }
    }

    /// Closed-set membership, with the triangle edges widened by [`EDGE_TOLERANCE`].
    pub fn contains(&self, p: Point) -> bool {
        match self.base() {
            ResonatorGeometry::Rectangle { c1, c2 } => {
                p.x >= -EDGE_TOLERANCE
                    && p.x <= c1 + EDGE_TOLERANCE
                    && p.y >= -EDGE_TOLERANCE
                    && p.y <= c2 + EDGE_TOLERANCE
            }
            ResonatorGeometry::Triangle => triangle_barycentric(p)
                .iter()
                .all(|&l| l >= -EDGE_TOLERANCE),
            ResonatorGeometry::Shifted { .. } => unreachable!("shifts do not nest"),
        }
    }

    /// Strict interior membership; points within [`EDGE_TOLERANCE`] of the
    /// boundary are rejected.
    pub fn is_interior(&self, p: Point) -> bool {
        match self.base() {
            ResonatorGeometry::Rectangle { c1, c2 } => {
                p.x > EDGE_TOLERANCE
                    && p.x < c1 - EDGE_TOLERANCE
                    && p.y > EDGE_TOLERANCE
                    && p.y < c2 - EDGE_TOLERANCE
            }
            ResonatorGeometry::Triangle => {
                triangle_barycentric(p).iter().all(|&l| l > EDGE_TOLERANCE)
            }
            ResonatorGeometry::Shifted { .. } => unreachable!("shifts do not nest"),
        }
    }

    /// L²-normalized eigenfunction at `p`.
    pub fn eigenfunction(&self, quantum: (u32, u32), p: Point) -> Result<f64, SpectralError> {
        if !self.is_admissible(quantum) {
            return Err(SpectralError::InadmissibleMode(quantum));
        }
        if !self.contains(p) {
            return Err(SpectralError::OutsideDomain(p));
        }
        Ok(self.eigenfunction_unchecked(quantum, p))
    }

    /// Eigenfunction without admissibility or membership checks.
    #[inline]
    pub fn eigenfunction_unchecked(&self, quantum: (u32, u32), p: Point) -> f64 {
        match self.base() {
            ResonatorGeometry::Rectangle { c1, c2 } => {
                let (nx, ny) = quantum;
                2.0 / (c1 * c2).sqrt()
                    * (nx as f64 * PI * p.x / c1).sin()
                    * (ny as f64 * PI * p.y / c2).sin()
            }
            ResonatorGeometry::Triangle => triangle_eigenfunction(quantum, p),
            ResonatorGeometry::Shifted { .. } => unreachable!("shifts do not nest"),
        }
    }

    /// Short human-readable descriptor, also used in cache file names.
    pub fn descriptor(&self) -> String {
        match self {
            ResonatorGeometry::Rectangle { c1, c2 } => format!("rect-{c1}x{c2}"),
            ResonatorGeometry::Triangle => "triangle".to_string(),
            ResonatorGeometry::Shifted { inner, shift } => {
                format!("{}-shift{shift}", inner.descriptor())
            }
        }
    }
}

impl fmt::Display for ResonatorGeometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResonatorGeometry::Rectangle { c1, c2 } => write!(f, "Rectangle({c1}, {c2})"),
            ResonatorGeometry::Triangle => write!(f, "Triangle"),
            ResonatorGeometry::Shifted { inner, shift } => write!(f, "Shifted({inner}, {shift})"),
        }
    }
}

#[inline]
pub(crate) fn rectangle_eigenvalue(c1: f64, c2: f64, (nx, ny): (u32, u32)) -> f64 {
    let a = nx as f64 * PI / c1;
    let b = ny as f64 * PI / c2;
    a * a + b * b
}

#[inline]
pub(crate) fn triangle_eigenvalue((k, n): (u32, u32)) -> f64 {
    let k = k as f64;
    let n = n as f64;
    PI * PI / 108.0 * (k * k + 3.0 * n * n)
}

fn triangle_barycentric(p: Point) -> [f64; 3] {
    let [a, b, c] = TRIANGLE_VERTICES;
    let det = (b.y - c.y) * (a.x - c.x) + (c.x - b.x) * (a.y - c.y);
    let l0 = ((b.y - c.y) * (p.x - c.x) + (c.x - b.x) * (p.y - c.y)) / det;
    let l1 = ((c.y - a.y) * (p.x - c.x) + (a.x - c.x) * (p.y - c.y)) / det;
    [l0, l1, 1.0 - l0 - l1]
}

fn triangle_eigenfunction((k, n): (u32, u32), p: Point) -> f64 {
    let k = k as f64;
    let n = n as f64;
    let (x, y) = (p.x, p.y);
    let norm = 2f64.sqrt() / (3.0 * 3f64.powf(0.25));
    let s = 12.0 * SQRT3;
    let t1 = (PI * n * x / 6.0).sin() * (PI * k * (y + 2.0 * SQRT3) / (6.0 * SQRT3)).sin();
    let t2 = (PI * n * (SQRT3 * x - 3.0 * y) / s).sin()
        * (PI * k * (SQRT3 * x + y - 4.0 * SQRT3) / s).sin();
    let t3 = (PI * (SQRT3 * n * x + 3.0 * n * y - 6.0 * SQRT3) / s).cos()
        * (PI * k * (SQRT3 * x - y + 4.0 * SQRT3) / s).sin();
    norm * (t1 + t2 - t3)
}
