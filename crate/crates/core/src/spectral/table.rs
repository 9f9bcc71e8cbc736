use std::cmp::Ordering;
use std::f64::consts::PI;

use super::geometry::{rectangle_eigenvalue, triangle_eigenvalue, Point, ResonatorGeometry};
use super::SpectralError;

/// Default limit on the number of enumerated modes.
pub const DEFAULT_MAX_MODES: usize = 20_000_000;

/// One Dirichlet eigenpair, identified by its quantum numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    /// `(n_x, n_y)` for rectangles, `(k, n)` for the triangle.
    pub quantum: (u32, u32),
    pub eigenvalue: f64,
}

impl Mode {
    fn ordering(&self, other: &Mode) -> Ordering {
        self.eigenvalue
            .total_cmp(&other.eigenvalue)
            .then(self.quantum.cmp(&other.quantum))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EnumerationOptions {
    pub max_modes: usize,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        Self {
            max_modes: DEFAULT_MAX_MODES,
        }
    }
}

/// Every eigenpair of a geometry with eigenvalue at most `lambda_max`, in
/// ascending order (ties broken by quantum numbers).
///
/// The position of a mode in [`ModeTable::modes`] plus one is the index `n`
/// used by the Weyl counterterm of the regularized Green's function.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeTable {
    geometry: ResonatorGeometry,
    lambda_max: f64,
    modes: Vec<Mode>,
}

impl ModeTable {
    pub(crate) fn from_sorted_parts(
        geometry: ResonatorGeometry,
        lambda_max: f64,
        modes: Vec<Mode>,
    ) -> Self {
        Self {
            geometry,
            lambda_max,
            modes,
        }
    }

    pub fn geometry(&self) -> &ResonatorGeometry {
        &self.geometry
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn eigenvalues(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        self.modes.iter().map(|m| m.eigenvalue)
    }

    /// Number of modes with eigenvalue at most `lambda`.
    pub fn count_below(&self, lambda: f64) -> usize {
        self.modes.partition_point(|m| m.eigenvalue <= lambda)
    }

    /// The prefix of this table with eigenvalues at most `lambda_max`.
    pub fn truncated(&self, lambda_max: f64) -> ModeTable {
        let cut = lambda_max.min(self.lambda_max);
        let n = self.count_below(cut);
        ModeTable {
            geometry: self.geometry.clone(),
            lambda_max: cut,
            modes: self.modes[..n].to_vec(),
        }
    }

    /// Relative deviation of the mode count from the leading Weyl estimate.
    /// Relative deviation of the mode count from the leading Weyl term.
    pub fn weyl_deviation(&self) -> f64 {
        let weyl = self.geometry.weyl_count(self.lambda_max);
        (self.len() as f64 - weyl) / weyl
    }

    /// Relative deviation from the two-term Weyl law.
    pub fn weyl_boundary_deviation(&self) -> f64 {
        let weyl = self.geometry.weyl_count_with_boundary(self.lambda_max);
        (self.len() as f64 - weyl) / weyl
    }

    /// Evaluates every eigenfunction of the table at `p`, in table order.
    pub fn eigenfunctions_at(&self, p: Point) -> Result<Vec<f64>, SpectralError> {
        if !self.geometry.contains(p) {
            return Err(SpectralError::OutsideDomain(p));
        }
        Ok(self
            .modes
            .iter()
            .map(|m| self.geometry.eigenfunction_unchecked(m.quantum, p))
            .collect())
    }
}

/// Enumerates all modes with eigenvalue at most `lambda_max`.
pub fn enumerate_modes(
    geometry: &ResonatorGeometry,
    lambda_max: f64,
) -> Result<ModeTable, SpectralError> {
    enumerate_modes_with(geometry, lambda_max, EnumerationOptions::default())
}

pub fn enumerate_modes_with(
    geometry: &ResonatorGeometry,
    lambda_max: f64,
    options: EnumerationOptions,
) -> Result<ModeTable, SpectralError> {
    geometry.validate()?;
    if !(lambda_max.is_finite() && lambda_max > 0.0) {
        return Err(SpectralError::InvalidCutoff(lambda_max));
    }
    let inner_cutoff = lambda_max - geometry.spectral_shift();

    let quanta = match geometry.base() {
        ResonatorGeometry::Rectangle { c1, c2 } => {
            rectangle_quanta(*c1, *c2, inner_cutoff, options.max_modes)?
        }
        ResonatorGeometry::Triangle => triangle_quanta(inner_cutoff, options.max_modes)?,
        ResonatorGeometry::Shifted { .. } => unreachable!("validated: shifts do not nest"),
    };
    if quanta.is_empty() {
        return Err(SpectralError::NoModes {
            lambda_max,
            geometry: geometry.to_string(),
        });
    }

    let mut modes: Vec<Mode> = quanta
        .into_iter()
        .map(|quantum| Mode {
            quantum,
            eigenvalue: geometry.eigenvalue(quantum),
        })
        .filter(|m| m.eigenvalue <= lambda_max)
        .collect();
    modes.sort_unstable_by(Mode::ordering);
    Ok(ModeTable::from_sorted_parts(
        geometry.clone(),
        lambda_max,
        modes,
    ))
}

fn check_cap(count: usize, max_modes: usize) -> Result<(), SpectralError> {
    if count > max_modes {
        Err(SpectralError::TooManyModes {
            count,
            cap: max_modes,
        })
    } else {
        Ok(())
    }
}

/// Largest `ny` with `eigenvalue(nx, ny) <= cutoff`, starting from a float estimate.
fn rectangle_row_len(c1: f64, c2: f64, nx: u32, cutoff: f64) -> u32 {
    let a = nx as f64 * PI / c1;
    let rest = cutoff - a * a;
    if rest <= 0.0 {
        return 0;
    }
    let mut ny = (c2 * rest.sqrt() / PI).floor() as u32;
    while rectangle_eigenvalue(c1, c2, (nx, ny + 1)) <= cutoff {
        ny += 1;
    }
    while ny > 0 && rectangle_eigenvalue(c1, c2, (nx, ny)) > cutoff {
        ny -= 1;
    }
    ny
}

fn rectangle_quanta(
    c1: f64,
    c2: f64,
    cutoff: f64,
    max_modes: usize,
) -> Result<Vec<(u32, u32)>, SpectralError> {
    if cutoff <= 0.0 {
        return Ok(Vec::new());
    }
    let nx_max = (c1 * cutoff.sqrt() / PI).floor() as u32 + 1;
    let rows: Vec<u32> = (1..=nx_max)
        .map(|nx| rectangle_row_len(c1, c2, nx, cutoff))
        .collect();
    let count: usize = rows.iter().map(|&r| r as usize).sum();
    check_cap(count, max_modes)?;

    let mut quanta = Vec::with_capacity(count);
    for (nx, &len) in (1..).zip(rows.iter()) {
        quanta.extend((1..=len).map(|ny| (nx, ny)));
    }
    Ok(quanta)
}

fn triangle_quanta(cutoff: f64, max_modes: usize) -> Result<Vec<(u32, u32)>, SpectralError> {
    let mut rows = Vec::new();
    let mut n: u32 = 2;
    // Smallest eigenvalue reachable with this n is at k = 1 (or k = 2 for even n).
    while triangle_eigenvalue((1, n)) <= cutoff {
        let k_min = if n % 2 == 0 { 2 } else { 1 };
        let ks: Vec<u32> = (k_min..n)
            .step_by(2)
            .take_while(|&k| triangle_eigenvalue((k, n)) <= cutoff)
            .collect();
        rows.push((n, ks));
        n += 1;
    }
    let count: usize = rows.iter().map(|(_, ks)| ks.len()).sum();
    check_cap(count, max_modes)?;
    Ok(rows
        .into_iter()
        .flat_map(|(n, ks)| ks.into_iter().map(move |k| (k, n)))
        .collect())
}

/// The two lead attachment points, validated against a geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Junctions {
    pub first: Point,
    pub second: Point,
}

impl Junctions {
    pub fn new(
        geometry: &ResonatorGeometry,
        first: Point,
        second: Point,
    ) -> Result<Self, SpectralError> {
        for p in [first, second] {
            if !geometry.is_interior(p) {
                return Err(SpectralError::JunctionNotInterior(p));
            }
        }
        if first == second {
            return Err(SpectralError::CoincidentJunctions(first));
        }
        Ok(Self { first, second })
    }

    pub fn swapped(&self) -> Self {
        Self {
            first: self.second,
            second: self.first,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rect() -> ResonatorGeometry {
        ResonatorGeometry::rectangle(2.0, 1.0).unwrap()
    }

    #[test]
    fn rectangle_ground_state_only() {
        let table = enumerate_modes(&rect(), 13.0).unwrap();
        assert_eq!(table.len(), 1);
        assert_eq!(table.modes()[0].quantum, (1, 1));
        assert!((table.modes()[0].eigenvalue - 5.0 * PI * PI / 4.0).abs() < 1e-12);
        assert!((table.modes()[0].eigenvalue - 12.3370).abs() < 1e-4);
    }

    #[test]
    fn triangle_ground_state_only() {
        let table = enumerate_modes(&ResonatorGeometry::triangle(), 3.0).unwrap();
        assert_eq!(table.len(), 1);
        assert_eq!(table.modes()[0].quantum, (1, 3));
        assert!((table.modes()[0].eigenvalue - 28.0 * PI * PI / 108.0).abs() < 1e-12);
        assert!((table.modes()[0].eigenvalue - 2.5587).abs() < 1e-4);
    }

    #[test]
    fn rejects_nonpositive_cutoff() {
        assert!(matches!(
            enumerate_modes(&rect(), 0.0),
            Err(SpectralError::InvalidCutoff(_))
        ));
        assert!(matches!(
            enumerate_modes(&rect(), -3.0),
            Err(SpectralError::InvalidCutoff(_))
        ));
    }

    #[test]
    fn cutoff_below_ground_state_has_no_modes() {
        assert!(matches!(
            enumerate_modes(&rect(), 12.0),
            Err(SpectralError::NoModes { .. })
        ));
    }

    #[test]
    fn enforces_mode_cap() {
        let opts = EnumerationOptions { max_modes: 100 };
        assert!(matches!(
            enumerate_modes_with(&rect(), 1e4, opts),
            Err(SpectralError::TooManyModes { .. })
        ));
        assert!(matches!(
            enumerate_modes_with(&ResonatorGeometry::triangle(), 1e4, opts),
            Err(SpectralError::TooManyModes { .. })
        ));
    }

    #[test]
    fn brute_force_agreement() {
        // Exhaustive double loop over a generous box.
        let cutoff = 3000.0;
        let table = enumerate_modes(&rect(), cutoff).unwrap();
        let mut expected = Vec::new();
        for nx in 1..200u32 {
            for ny in 1..200u32 {
                if rectangle_eigenvalue(2.0, 1.0, (nx, ny)) <= cutoff {
                    expected.push((nx, ny));
                }
            }
        }
        let mut got: Vec<_> = table.modes().iter().map(|m| m.quantum).collect();
        got.sort();
        expected.sort();
        assert_eq!(got, expected);

        let table = enumerate_modes(&ResonatorGeometry::triangle(), cutoff).unwrap();
        let mut expected = Vec::new();
        for k in 1..400u32 {
            for n in 1..400u32 {
                if n > k && k % 2 == n % 2 && triangle_eigenvalue((k, n)) <= cutoff {
                    expected.push((k, n));
                }
            }
        }
        let mut got: Vec<_> = table.modes().iter().map(|m| m.quantum).collect();
        got.sort();
        expected.sort();
        assert_eq!(got, expected);
    }

    #[test]
    fn degenerate_levels_break_ties_by_quantum_numbers() {
        // Square: (1,2) and (2,1) are degenerate.
        let sq = ResonatorGeometry::rectangle(1.0, 1.0).unwrap();
        let table = enumerate_modes(&sq, 60.0).unwrap();
        let q: Vec<_> = table.modes().iter().map(|m| m.quantum).collect();
        assert_eq!(&q[..3], &[(1, 1), (1, 2), (2, 1)]);
        for w in table.modes().windows(2) {
            assert_ne!(w[0].ordering(&w[1]), Ordering::Greater);
        }
    }

    #[test]
    fn shifted_table_raises_eigenvalues() {
        let shifted = ResonatorGeometry::shifted(rect(), 5.0).unwrap();
        let base = enumerate_modes(&rect(), 200.0).unwrap();
        let table = enumerate_modes(&shifted, 205.0).unwrap();
        assert_eq!(base.len(), table.len());
        for (a, b) in base.modes().iter().zip(table.modes()) {
            assert_eq!(a.quantum, b.quantum);
            assert_eq!(a.eigenvalue + 5.0, b.eigenvalue);
        }
    }

    #[test]
    fn truncation_gives_prefix() {
        let table = enumerate_modes(&rect(), 1000.0).unwrap();
        let short = table.truncated(500.0);
        assert_eq!(short.lambda_max(), 500.0);
        assert!(short.eigenvalues().all(|l| l <= 500.0));
        assert_eq!(short.modes(), &table.modes()[..short.len()]);
        assert_eq!(short, enumerate_modes(&rect(), 500.0).unwrap());
    }

    #[test]
    fn junction_validation() {
        let r = rect();
        assert!(Junctions::new(&r, Point::new(0.2, 0.1), Point::new(1.8, 0.9)).is_ok());
        assert!(matches!(
            Junctions::new(&r, Point::new(0.0, 0.1), Point::new(1.8, 0.9)),
            Err(SpectralError::JunctionNotInterior(_))
        ));
        assert!(matches!(
            Junctions::new(&r, Point::new(0.5, 0.5), Point::new(0.5, 0.5)),
            Err(SpectralError::CoincidentJunctions(_))
        ));
    }
}
