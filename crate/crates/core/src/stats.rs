use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquaredTest {
    pub statistic: f64,
    pub df: f64,
    pub p_value: f64,
}

impl ChiSquaredTest {
    pub fn passes(&self, level: f64) -> bool {
        self.p_value >= level
    }
}

/// Pearson goodness-of-fit of `counts` against the uniform distribution on its cells.
pub fn chi_squared_uniform(counts: &[u64]) -> ChiSquaredTest {
    let k = counts.len();
    assert!(k >= 2, "need at least two cells");
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / k as f64;
    let statistic = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - expected;
            d * d / expected
        })
        .sum();
    let df = (k - 1) as f64;
    let p_value = ChiSquared::new(df).expect("df > 0").sf(statistic);
    ChiSquaredTest {
        statistic,
        df,
        p_value,
    }
}

/// `|observed - expected| <= k·stderr`.
pub fn within_sigmas(observed: f64, expected: f64, stderr: f64, k: f64) -> bool {
    (observed - expected).abs() <= k * stderr
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_counts_pass() {
        let t = chi_squared_uniform(&[100, 100, 100, 100]);
        assert_eq!(t.statistic, 0.0);
        assert!((t.p_value - 1.0).abs() < 1e-12);
        assert_eq!(t.df, 3.0);
    }

    #[test]
    fn skewed_counts_fail() {
        let t = chi_squared_uniform(&[1000, 10, 10, 10]);
        assert!(!t.passes(0.001));
    }

    #[test]
    fn known_quantile() {
        // chi-squared with 1 df: P[X > 3.841] = 0.05
        let t = chi_squared_uniform(&[5980, 6020]);
        assert!(t.p_value > 0.5);
        let p = ChiSquared::new(1.0).unwrap().sf(3.841458820694124);
        assert!((p - 0.05).abs() < 1e-9);
    }
}
