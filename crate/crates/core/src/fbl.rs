//! Finite-blocklength achievable rate (normal approximation) and its
//! inverses in SNR and latency.
//!
//! The rate at SNR `ρ`, latency `L`, bandwidth `B` and block error
//! probability `ε` is
//!
//! ```text
//! R = B · [ log2(1 + ρ) − sqrt(V / (L·B)) · Q⁻¹(ε) ],   V = (1 − (1+ρ)⁻²)·(log2 e)²
//! ```
//!
//! `L·B` is the blocklength in channel uses. The SNR is treated as
//! deterministic (a hardened SINR); [`expected_fbl_rate`] averages over
//! SNR samples when the channel is not hardened.

use std::f64::consts::LOG2_E;

use crate::error::{invalid, Error, Result};
use crate::numerics::{bisect, expand_bracket, q_inverse, ROOT_TOL};

/// `(log2 e)²`, the high-SNR limit of the dispersion.
pub const DISPERSION_LIMIT: f64 = LOG2_E * LOG2_E;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FblQuery {
    snr: f64,
    latency: f64,
    bandwidth: f64,
    error_prob: f64,
}

impl FblQuery {
    pub fn new(snr: f64, latency: f64, bandwidth: f64, error_prob: f64) -> Result<Self> {
        if !(snr >= 0.0) || !snr.is_finite() {
            return Err(invalid(
                "FblQuery",
                format!("snr must be finite and >= 0, got {snr}"),
            ));
        }
        if !(latency > 0.0) {
            return Err(invalid(
                "FblQuery",
                format!("latency must be > 0, got {latency}"),
            ));
        }
        if !(bandwidth > 0.0) {
            return Err(invalid(
                "FblQuery",
                format!("bandwidth must be > 0, got {bandwidth}"),
            ));
        }
        if !(error_prob > 0.0 && error_prob < 1.0) {
            return Err(invalid(
                "FblQuery",
                format!("error_prob must be in (0,1), got {error_prob}"),
            ));
        }
        if latency * bandwidth < 1.0 {
            return Err(invalid(
                "FblQuery",
                format!(
                    "blocklength L*B = {} is below one channel use",
                    latency * bandwidth
                ),
            ));
        }
        Ok(Self {
            snr,
            latency,
            bandwidth,
            error_prob,
        })
    }

    pub fn snr(&self) -> f64 {
        self.snr
    }
    pub fn latency(&self) -> f64 {
        self.latency
    }
    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }
    pub fn error_prob(&self) -> f64 {
        self.error_prob
    }
    pub fn blocklength(&self) -> f64 {
        self.latency * self.bandwidth
    }
}

/// Channel dispersion of the complex quasi-static fading channel, in
/// squared bits per channel use.
pub fn channel_dispersion(snr: f64) -> f64 {
    let inv = 1.0 / (1.0 + snr);
    (1.0 - inv * inv) * DISPERSION_LIMIT
}

fn log2_1p(x: f64) -> f64 {
    if x < 0.5 {
        x.ln_1p() * LOG2_E
    } else {
        (1.0 + x).log2()
    }
}

/// Shannon rate `B·log2(1+ρ)` in bit/s.
pub fn shannon_rate(snr: f64, bandwidth: f64) -> f64 {
    bandwidth * log2_1p(snr)
}

// Unchecked kernel shared by the searches below; `qinv` is Q⁻¹(ε).
fn rate_kernel(snr: f64, latency: f64, bandwidth: f64, qinv: f64) -> f64 {
    let n = latency * bandwidth;
    bandwidth * (log2_1p(snr) - (channel_dispersion(snr) / n).sqrt() * qinv)
}

/// Achievable rate in bit/s. Negative values are returned unchanged.
pub fn fbl_rate(q: &FblQuery) -> f64 {
    // error_prob is validated in (0,1), so the inverse cannot fail.
    let qinv = q_inverse(q.error_prob).expect("error_prob validated");
    rate_kernel(q.snr, q.latency, q.bandwidth, qinv)
}

/// Monte-Carlo expectation of the achievable rate over SNR samples (for
/// channels that do not harden).
pub fn expected_fbl_rate<I>(
    snr_samples: I,
    latency: f64,
    bandwidth: f64,
    error_prob: f64,
) -> Result<f64>
where
    I: IntoIterator<Item = f64>,
{
    let mut sum = 0.0;
    let mut count = 0usize;
    for snr in snr_samples {
        sum += fbl_rate(&FblQuery::new(snr, latency, bandwidth, error_prob)?);
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptySamples);
    }
    Ok(sum / count as f64)
}

/// Smallest SNR at which the achievable rate reaches `rate`.
pub fn fbl_required_snr(rate: f64, latency: f64, bandwidth: f64, error_prob: f64) -> Result<f64> {
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(Error::Domain(format!(
            "required rate must be positive, got {rate}"
        )));
    }
    // validates the remaining arguments
    FblQuery::new(0.0, latency, bandwidth, error_prob)?;
    let shannon_snr = (rate / bandwidth).exp2() - 1.0;
    if error_prob == 0.5 {
        return Ok(shannon_snr);
    }
    let qinv = q_inverse(error_prob)?;
    let f = |snr: f64| rate_kernel(snr, latency, bandwidth, qinv) - rate;
    // f(0) = -rate < 0. For rate > 0 the root is unique: below the rate
    // minimum the function is non-positive, above it strictly increasing.
    let start = if shannon_snr.is_finite() {
        shannon_snr.max(1e-6)
    } else {
        f64::MAX
    };
    let (lo, hi) = expand_bracket(f, 0.0, start, f64::MAX).ok_or_else(|| {
        Error::Infeasible(format!(
            "rate {rate} bit/s unreachable at latency {latency} s, bandwidth {bandwidth} Hz"
        ))
    })?;
    Ok(bisect(f, lo, hi, ROOT_TOL))
}

/// Search interval for latency inversions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyBounds {
    /// Lower end; `None` means one channel use, `1/B`.
    pub floor_s: Option<f64>,
    pub cap_s: f64,
}

impl Default for LatencyBounds {
    fn default() -> Self {
        Self {
            floor_s: None,
            cap_s: 10.0,
        }
    }
}

impl LatencyBounds {
    pub fn floor_for(&self, bandwidth: f64) -> f64 {
        let one_use = 1.0 / bandwidth;
        self.floor_s.map_or(one_use, |f| f.max(one_use))
    }
}

/// Smallest latency (at or above the floor) whose achievable rate reaches
/// `rate` at a fixed SNR.
pub fn fbl_min_latency(
    rate: f64,
    snr: f64,
    bandwidth: f64,
    error_prob: f64,
    bounds: &LatencyBounds,
) -> Result<f64> {
    let floor = bounds.floor_for(bandwidth);
    FblQuery::new(snr, floor, bandwidth, error_prob)?;
    if !(rate > 0.0) {
        return Err(Error::Domain(format!(
            "required rate must be positive, got {rate}"
        )));
    }
    if bounds.cap_s < floor {
        return Err(invalid(
            "LatencyBounds",
            format!("cap {} below floor {floor}", bounds.cap_s),
        ));
    }
    let qinv = q_inverse(error_prob)?;
    let f = |latency: f64| rate_kernel(snr, latency, bandwidth, qinv) - rate;
    if f(floor) >= 0.0 {
        return Ok(floor);
    }
    if qinv <= 0.0 {
        // No penalty (or a bonus that shrinks with L): more latency never helps.
        return Err(Error::Infeasible(format!(
            "rate {rate} bit/s above the achievable rate at error probability {error_prob}"
        )));
    }
    if rate >= shannon_rate(snr, bandwidth) {
        return Err(Error::Infeasible(format!(
            "rate {rate} bit/s is not below the Shannon rate {} bit/s",
            shannon_rate(snr, bandwidth)
        )));
    }
    if f(bounds.cap_s) < 0.0 {
        return Err(Error::Infeasible(format!(
            "rate {rate} bit/s needs more than the latency cap of {} s",
            bounds.cap_s
        )));
    }
    Ok(bisect(f, floor, bounds.cap_s, ROOT_TOL))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dispersion_values() {
        assert_eq!(channel_dispersion(0.0), 0.0);
        assert!((channel_dispersion(1e12) - DISPERSION_LIMIT).abs() < 1e-10);
        assert!((DISPERSION_LIMIT - 2.0814).abs() < 1e-4);
        assert!((channel_dispersion(10.0) - (1.0 - 1.0 / 121.0) * DISPERSION_LIMIT).abs() < 1e-15);
        assert!((channel_dispersion(10.0) - 2.0642).abs() < 1e-4);
    }

    #[test]
    fn query_validation() {
        assert!(FblQuery::new(-1.0, 1e-3, 2e5, 1e-6).is_err());
        assert!(FblQuery::new(1.0, 0.0, 2e5, 1e-6).is_err());
        assert!(FblQuery::new(1.0, 1e-3, 0.0, 1e-6).is_err());
        assert!(FblQuery::new(1.0, 1e-3, 2e5, 1.0).is_err());
        assert!(FblQuery::new(1.0, 1e-7, 2e5, 0.1).is_err());
        assert!(FblQuery::new(0.0, 1e-3, 2e5, 0.1).is_ok());
    }

    #[test]
    fn median_error_gives_shannon() {
        let q = FblQuery::new(7.0, 1e-4, 1.8e5, 0.5).unwrap();
        assert_eq!(fbl_rate(&q), 1.8e5 * 3.0);
        assert_eq!(
            fbl_required_snr(1.8e5 * 3.0, 1e-4, 1.8e5, 0.5).unwrap(),
            7.0
        );
        let bounds = LatencyBounds::default();
        assert_eq!(
            fbl_min_latency(1e5, 7.0, 2e5, 0.5, &bounds).unwrap(),
            1.0 / 2e5
        );
        assert!(fbl_min_latency(1e7, 7.0, 2e5, 0.5, &bounds).is_err());
    }

    #[test]
    fn zero_snr_gives_zero_rate() {
        let q = FblQuery::new(0.0, 1e-3, 2e5, 1e-6).unwrap();
        assert_eq!(fbl_rate(&q), 0.0);
    }

    #[test]
    fn min_latency_diverges_near_shannon() {
        let bounds = LatencyBounds {
            floor_s: None,
            cap_s: 1.0,
        };
        let c = shannon_rate(29.0, 2e5);
        assert!(matches!(
            fbl_min_latency(c, 29.0, 2e5, 1e-6, &bounds),
            Err(Error::Infeasible(_))
        ));
        assert!(matches!(
            fbl_min_latency(c * (1.0 - 1e-6), 29.0, 2e5, 1e-6, &bounds),
            Err(Error::Infeasible(_))
        ));
        let l1 = fbl_min_latency(0.9 * c, 29.0, 2e5, 1e-6, &bounds).unwrap();
        let l2 = fbl_min_latency(0.99 * c, 29.0, 2e5, 1e-6, &bounds).unwrap();
        assert!(l2 > 50.0 * l1);
    }

    #[test]
    fn required_snr_rejects_nonpositive_rate() {
        assert!(fbl_required_snr(0.0, 1e-3, 2e5, 1e-6).is_err());
        assert!(fbl_required_snr(-5.0, 1e-3, 2e5, 1e-6).is_err());
    }

    #[test]
    fn expectation_over_point_mass_is_deterministic_rate() {
        let q = FblQuery::new(20.0, 1e-4, 2e5, 1e-5).unwrap();
        let e = expected_fbl_rate(std::iter::repeat_n(20.0, 10), 1e-4, 2e5, 1e-5).unwrap();
        assert!((e - fbl_rate(&q)).abs() < 1e-9 * fbl_rate(&q));
        assert!(expected_fbl_rate(std::iter::empty(), 1e-4, 2e5, 1e-5).is_err());
    }
}
