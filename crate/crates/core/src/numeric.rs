//! Compensated floating-point accumulation shared by the analytic series
//! and the Monte Carlo aggregators.

/// Neumaier's improved Kahan summation: accumulates a running sum together
/// with a compensation term so that adding many small terms to a large total
/// (or vice versa) loses almost no precision, while staying a strictly
/// sequential, order-deterministic fold.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    pub(crate) fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Sums a slice in index order with compensation.
pub(crate) fn compensated_sum(values: &[f64]) -> f64 {
    let mut acc = NeumaierSum::new();
    for &v in values {
        acc.add(v);
    }
    acc.total()
}
