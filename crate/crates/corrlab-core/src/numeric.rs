//! Compensated summation.
//!
//! Entropy and divergence sums run over up to 10^7 cells; plain
//! accumulation would lose ~1e-8 absolute accuracy in the worst case,
//! which is too coarse for the 1e-9 identity checks.  Neumaier's variant
//! of Kahan summation keeps the error near one ulp of the true sum.

/// Running compensated sum (Neumaier).
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of a slice.
pub fn neumaier_sum(xs: &[f64]) -> f64 {
    let mut acc = NeumaierSum::new();
    for &x in xs {
        acc.add(x);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancellation() {
        // 1.0 followed by many tiny values that a naive sum would drop.
        let mut acc = NeumaierSum::new();
        acc.add(1.0);
        for _ in 0..1_000_000 {
            acc.add(1e-17);
        }
        acc.add(-1.0);
        let got = acc.value();
        assert!((got - 1e-11).abs() < 1e-19, "got {got}");
    }

    #[test]
    fn matches_plain_sum_on_benign_input() {
        let xs: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(neumaier_sum(&xs), 500_500.0);
    }
}
