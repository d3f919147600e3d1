//! Small numerical helpers: compensated summation and the one-sample
//! Kolmogorov–Smirnov statistic against a uniform law.

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// `sup |F_n(x) − (x − lo)/(hi − lo)|` for the empirical CDF `F_n` of
/// `samples`. Sorts `samples` in place.
pub fn ks_uniform_statistic(samples: &mut [f64], lo: f64, hi: f64) -> f64 {
    samples.sort_unstable_by(f64::total_cmp);
    let n = samples.len() as f64;
    let width = hi - lo;
    samples.iter().enumerate().fold(0.0, |acc, (i, &x)| {
        let f = ((x - lo) / width).clamp(0.0, 1.0);
        let above = (i as f64 + 1.0) / n - f;
        let below = f - i as f64 / n;
        acc.max(above).max(below)
    })
}

/// Asymptotic critical value `c(α)/√n` with `c(α) = √(−ln(α/2)/2)`.
pub fn ks_critical_value(n: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}
