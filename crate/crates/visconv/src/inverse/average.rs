//! The exponentially weighted time average `< . >_s^t` of the recovery
//! algorithm: `<g> = 1/(t-s) int_s^t e^{-mu (t - tau)} g(tau) dtau`,
//! computed by trapezoid quadrature of the weighted integrand.

use crate::error::{Error, Result};

/// Weighted average of uniformly spaced samples `g(times[i])`.
pub fn exp_weighted_average(samples: &[f64], times: &[f64], mu: f64) -> Result<f64> {
    if samples.len() < 2 || samples.len() != times.len() {
        return Err(Error::invalid(
            "exponentially weighted average needs at least two matching samples",
        ));
    }
    let t_end = times[times.len() - 1];
    let span = t_end - times[0];
    if span <= 0.0 {
        return Err(Error::invalid("sample times must span a positive window"));
    }
    let h = span / (times.len() - 1) as f64;
    let mut sum = 0.0;
    for (i, (&g, &tau)) in samples.iter().zip(times.iter()).enumerate() {
        let weight = if i == 0 || i == samples.len() - 1 { 0.5 } else { 1.0 };
        sum += weight * (-mu * (t_end - tau)).exp() * g;
    }
    Ok(sum * h / span)
}
