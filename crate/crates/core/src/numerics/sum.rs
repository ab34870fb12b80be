use serde::{Deserialize, Serialize};

/// Neumaier's variant of Kahan compensated summation.
///
/// Adding an exact zero leaves the state untouched, which lets the
/// enumerator skip underflowed terms without changing a single bit of the
/// result.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
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

    /// Rebuild an accumulator from a previously saved `(sum, compensation)` pair.
    pub const fn from_parts(sum: f64, compensation: f64) -> Self {
        Self { sum, compensation }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Fold another accumulator into this one.
    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.compensation);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }

    pub fn parts(&self) -> (f64, f64) {
        (self.sum, self.compensation)
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        acc.extend(iter);
        acc
    }
}

/// Compensated sum of a slice.
pub fn compensated_sum(xs: &[f64]) -> f64 {
    xs.iter().copied().collect::<CompensatedSum>().value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_small_terms_lost_by_naive_summation() {
        let mut xs = vec![1.0];
        xs.extend(std::iter::repeat(1e-16).take(10_000));
        let naive: f64 = xs.iter().sum();
        assert_eq!(naive, 1.0);
        assert!((compensated_sum(&xs) - (1.0 + 1e-12)).abs() < 1e-20);
    }

    #[test]
    fn handles_large_cancellation() {
        let xs = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(compensated_sum(&xs), 2.0);
    }

    #[test]
    fn adding_zero_is_a_no_op() {
        let mut acc = CompensatedSum::new();
        acc.extend([0.1, 0.2, 0.3]);
        let before = acc;
        acc.add(0.0);
        assert_eq!(acc, before);
    }

    #[test]
    fn merge_matches_sequential_sum_closely() {
        let xs: Vec<f64> = (1..1000).map(|i| 1.0 / i as f64).collect();
        let whole = compensated_sum(&xs);
        let mut a: CompensatedSum = xs[..500].iter().copied().collect();
        let b: CompensatedSum = xs[500..].iter().copied().collect();
        a.merge(&b);
        assert!((a.value() - whole).abs() < 1e-15);
    }
}
