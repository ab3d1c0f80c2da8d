//! Special functions and scalar root-finding.
//!
//! The Gaussian tail function and the regularized lower incomplete gamma
//! function are backed by `statrs`; the tail inverse is refined here with
//! Halley steps so that `q_function(q_inverse(p))` reproduces `p` to about
//! ten significant digits deep into the tail.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

/// Absolute argument tolerance used by every bracketed search in the crate.
pub const ROOT_TOL: f64 = 1e-12;
/// Iteration cap for bisection.
pub const ROOT_MAX_ITER: usize = 200;

/// Thermal noise density at room temperature.
pub const THERMAL_NOISE_DBM_PER_HZ: f64 = -174.0;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Thermal noise power in W over `bandwidth` with the given noise figure.
pub fn thermal_noise_w(bandwidth: f64, noise_figure_db: f64) -> f64 {
    db_to_linear(THERMAL_NOISE_DBM_PER_HZ - 30.0 + noise_figure_db) * bandwidth
}

/// Gaussian tail probability `Pr{N(0,1) > x}`.
pub fn q_function(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(x * FRAC_1_SQRT_2)
}

fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Inverse of [`q_function`] on `(0, 1)`.
pub fn q_inverse(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!(
            "q_inverse needs p in (0,1), got {p}"
        )));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    if p > 0.5 {
        // 1 - p is exact here (Sterbenz).
        return q_inverse(1.0 - p).map(|x| -x);
    }
    // p < 0.5, so the root is positive.
    let mut x = -acklam_normal_quantile(p);
    for _ in 0..4 {
        let pdf = std_normal_pdf(x);
        if pdf == 0.0 {
            break;
        }
        let t = (q_function(x) - p) / pdf;
        let step = t / (1.0 - 0.5 * x * t);
        x += step;
        if step.abs() <= 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    Ok(x)
}

/// Acklam's rational approximation to the standard normal quantile, used
/// only as a starting point (relative error about 1e-9).
fn acklam_normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -acklam_normal_quantile(1.0 - p)
    }
}

/// Regularized lower incomplete gamma function `P(shape, x)`.
///
/// This is the CDF of a `Gamma(shape, 1)` variable, which is what the
/// post-combining SNR of `shape` i.i.d. Rayleigh branches follows.
pub fn gamma_lower_regularized(shape: f64, x: f64) -> Result<f64> {
    if !(shape > 0.0) || !shape.is_finite() {
        return Err(Error::Domain(format!(
            "gamma shape must be positive, got {shape}"
        )));
    }
    if !(x >= 0.0) {
        return Err(Error::Domain(format!(
            "gamma argument must be >= 0, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    statrs::function::gamma::checked_gamma_lr(shape, x)
        .map(|v| v.clamp(0.0, 1.0))
        .map_err(|e| Error::Domain(e.to_string()))
}

/// Bisection for a monotone predicate-like function.
///
/// Requires `f(lo) < 0 <= f(hi)` and returns the upper end of the final
/// bracket, i.e. the smallest argument found that satisfies `f >= 0`.
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64
where
    F: FnMut(f64) -> f64,
{
    for _ in 0..ROOT_MAX_ITER {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Grows `hi` geometrically until `f(hi) >= 0`.
///
/// Returns the bracket `(lo, hi)` with `f(lo) < 0 <= f(hi)`, or `None`
/// if `limit` is passed first.
pub fn expand_bracket<F>(mut f: F, lo: f64, start: f64, limit: f64) -> Option<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let mut lo = lo;
    let mut hi = start;
    loop {
        if f(hi) >= 0.0 {
            return Some((lo, hi));
        }
        if hi >= limit {
            return None;
        }
        lo = hi;
        hi = (hi * 2.0).min(limit);
    }
}
