//! Standard normal helpers.

use statrs::distribution::{ContinuousCDF, Normal};

fn standard() -> Normal {
    Normal::standard()
}

/// `Φ(x)`.
pub fn cdf(x: f64) -> f64 {
    standard().cdf(x)
}

/// `1 − Φ(x)`, accurate in the upper tail.
pub fn upper_tail(x: f64) -> f64 {
    standard().sf(x)
}

/// Upper percentile `z_x` with `P(Z > z_x) = x`.
pub fn upper_quantile(x: f64) -> f64 {
    -standard().inverse_cdf(x)
}
