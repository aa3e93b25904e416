/// Mean over trials with a 95% interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateWithCI {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
    pub ci95: (f64, f64),
    /// Whether `ci95` is a Wilson interval rather than the normal one.
    pub wilson: bool,
}

const Z95: f64 = 1.959_963_984_540_054;

impl EstimateWithCI {
    /// Sample mean with `mean ± 1.96·std_error`.
    pub fn from_values(values: &[f64]) -> Self {
        let (mean, std_error) = mean_and_se(values);
        Self {
            mean,
            std_error,
            trials: values.len() as u64,
            ci95: (mean - Z95 * std_error, mean + Z95 * std_error),
            wilson: false,
        }
    }

    /// As [`Self::from_values`] for probability estimates in `[0, 1]`; the
    /// interval switches to Wilson's when the mean lies within 5 standard
    /// errors of 0 or 1.
    pub fn probability(values: &[f64]) -> Self {
        let mut e = Self::from_values(values);
        let n = values.len() as f64;
        if n > 0.0 && (e.mean <= 5.0 * e.std_error || 1.0 - e.mean <= 5.0 * e.std_error) {
            e.ci95 = wilson(e.mean, n);
            e.wilson = true;
        }
        e
    }
}

fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n as f64 - 1.0) / n as f64).sqrt())
}

fn wilson(p: f64, n: f64) -> (f64, f64) {
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}
