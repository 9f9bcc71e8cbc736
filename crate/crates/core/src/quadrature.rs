//! Globally adaptive Gauss-Kronrod (7/15) quadrature over a union of segments.
//!
//! The integration domain is given as a list of disjoint segments, which lets
//! callers put mandatory breakpoints (resonances, Fermi edges) between
//! segments and leave small neighbourhoods of poles out entirely. The worst
//! subinterval is bisected until the summed error estimate meets
//! `max(abs_tol, rel_tol·|I|)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::summation::CompensatedSum;

const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subintervals: usize,
    /// After convergence, bisect every subinterval this many more times.
    pub extra_bisections: u32,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            abs_tol: 1e-8,
            rel_tol: 1e-6,
            max_subintervals: 20_000,
            extra_bisections: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
    pub subintervals: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum QuadratureError<E> {
    Integrand(E),
    /// Subdivision limit reached; carries the best estimate.
    NotConverged(Integral),
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Piece {
    // Largest error first; ties resolved by position for reproducibility.
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then(other.a.total_cmp(&self.a))
    }
}

fn gauss_kronrod<F, E>(f: &mut F, a: f64, b: f64) -> Result<Piece, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kronrod = fc * KRONROD_WEIGHTS[7];
    let mut gauss = fc * GAUSS_WEIGHTS[3];
    for i in 0..7 {
        let dx = half * KRONROD_NODES[i];
        let pair = f(center - dx)? + f(center + dx)?;
        kronrod += KRONROD_WEIGHTS[i] * pair;
        if i % 2 == 1 {
            gauss += GAUSS_WEIGHTS[i / 2] * pair;
        }
    }
    Ok(Piece {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    })
}

const EVALS_PER_PIECE: usize = 15;

/// Integrates `f` over the union of `segments` (each `(a, b)` with `a < b`).
pub fn integrate<F, E>(
    mut f: F,
    segments: &[(f64, f64)],
    settings: &QuadratureSettings,
) -> Result<Integral, QuadratureError<E>>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for &(a, b) in segments.iter().filter(|(a, b)| b > a) {
        heap.push(gauss_kronrod(&mut f, a, b).map_err(QuadratureError::Integrand)?);
        evaluations += EVALS_PER_PIECE;
    }

    let totals = |heap: &BinaryHeap<Piece>| {
        let value = heap.iter().map(|p| p.value).sum::<f64>();
        let error = heap.iter().map(|p| p.error).sum::<f64>();
        (value, error)
    };
    let (mut value, mut error) = totals(&heap);
    let mut converged = true;
    // Running totals drift; they are recomputed from scratch periodically.
    let mut steps = 0usize;
    while error > settings.abs_tol.max(settings.rel_tol * value.abs()) {
        if heap.len() >= settings.max_subintervals {
            converged = false;
            break;
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) || (worst.b - worst.a) < 1e-15 * mid.abs() {
            // Cannot refine further in floating point.
            heap.push(Piece {
                error: 0.0,
                ..worst
            });
            let (v, e) = totals(&heap);
            value = v;
            error = e + worst.error;
            if heap.iter().all(|p| p.error == 0.0) {
                break;
            }
            continue;
        }
        let left = gauss_kronrod(&mut f, worst.a, mid).map_err(QuadratureError::Integrand)?;
        let right = gauss_kronrod(&mut f, mid, worst.b).map_err(QuadratureError::Integrand)?;
        evaluations += 2 * EVALS_PER_PIECE;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        steps += 1;
        if steps % 64 == 0 {
            let (v, e) = totals(&heap);
            value = v;
            error = e;
        }
    }

    let mut pieces = heap.into_vec();
    for _ in 0..settings.extra_bisections {
        let mut refined = Vec::with_capacity(2 * pieces.len());
        for p in &pieces {
            let mid = 0.5 * (p.a + p.b);
            refined.push(gauss_kronrod(&mut f, p.a, mid).map_err(QuadratureError::Integrand)?);
            refined.push(gauss_kronrod(&mut f, mid, p.b).map_err(QuadratureError::Integrand)?);
            evaluations += 2 * EVALS_PER_PIECE;
        }
        pieces = refined;
    }

    // Fixed summation order, independent of refinement history.
    pieces.sort_by(|x, y| x.a.total_cmp(&y.a));
    let result = Integral {
        value: pieces
            .iter()
            .map(|p| p.value)
            .collect::<CompensatedSum>()
            .value(),
        abs_error: pieces
            .iter()
            .map(|p| p.error)
            .collect::<CompensatedSum>()
            .value(),
        evaluations,
        subintervals: pieces.len(),
    };
    if converged {
        Ok(result)
    } else {
        Err(QuadratureError::NotConverged(result))
    }
}
