//! Counters, interval estimates and the hashing-bound reference curve.

use thiserror::Error;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("hashing bound needs 0 < p_D < 3/4, got {0}")]
pub struct DomainError(pub f64);

/// `1 - h2(p) - p log2(3)`, the hashing rate of the depolarizing channel.
pub fn hashing_bound(pd: f64) -> Result<f64, DomainError> {
    if !(pd > 0.0 && pd < 0.75) {
        return Err(DomainError(pd));
    }
    let h2 = -pd * pd.log2() - (1.0 - pd) * (1.0 - pd).log2();
    Ok(1.0 - h2 - pd * 3f64.log2())
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Where a trial ended after the full pipeline.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Terminal {
    StrictSuccess,
    /// Final estimate differs from the noise by a stabilizer.
    DegenerateSuccess,
    /// Final estimate contradicts the syndrome.
    DetectedFailure,
    /// Final estimate satisfies the syndrome but is logically wrong.
    UndetectedFailure,
}

impl Terminal {
    pub fn is_failure(self) -> bool {
        matches!(self, Terminal::DetectedFailure | Terminal::UndetectedFailure)
    }
}

/// Per-type trap counters, indexed I, II, III.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct TrapCounts {
    pub seen: [u64; 3],
    pub fixed: [u64; 3],
}

/// Aggregated results of one noise level.
#[derive(Clone, Debug, PartialEq)]
pub struct PointStats {
    pub fm: f64,
    pub pd: f64,
    pub trials: u64,
    /// Plain decoder output differs from the noise (or did not converge).
    pub strict_failures: u64,
    pub strict_successes: u64,
    pub degenerate_successes: u64,
    pub detected_failures: u64,
    pub undetected_failures: u64,
    pub traps: TrapCounts,
    pub identification_failures: u64,
    pub postprocess_failures: u64,
    /// Trials aborted by a numeric error, counted as detected failures.
    pub numeric_failures: u64,
}

impl PointStats {
    pub fn new(fm: f64, pd: f64) -> Self {
        PointStats {
            fm,
            pd,
            trials: 0,
            strict_failures: 0,
            strict_successes: 0,
            degenerate_successes: 0,
            detected_failures: 0,
            undetected_failures: 0,
            traps: TrapCounts::default(),
            identification_failures: 0,
            postprocess_failures: 0,
            numeric_failures: 0,
        }
    }

    pub fn final_failures(&self) -> u64 {
        self.detected_failures + self.undetected_failures
    }

    pub fn fer_strict(&self) -> f64 {
        ratio(self.strict_failures, self.trials)
    }

    pub fn fer_final(&self) -> f64 {
        ratio(self.final_failures(), self.trials)
    }

    pub fn ci_final(&self) -> (f64, f64) {
        wilson(self.final_failures(), self.trials, Z95)
    }

    pub fn ci_strict(&self) -> (f64, f64) {
        wilson(self.strict_failures, self.trials, Z95)
    }

    /// Every trial sits in exactly one terminal category.
    pub fn is_consistent(&self) -> bool {
        self.strict_successes + self.degenerate_successes + self.detected_failures + self.undetected_failures == self.trials
            && self.final_failures() <= self.strict_failures
            && self.strict_failures <= self.trials
    }
}

fn ratio(k: u64, n: u64) -> f64 {
    if n == 0 {
        0.0
    } else {
        k as f64 / n as f64
    }
}
