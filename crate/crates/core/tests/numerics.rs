//! Special functions, finite-blocklength rate and analytic outage checked
//! against oracles that share no code with the library.

use std::f64::consts::{LN_2, PI};

use urllc_core::fbl::{channel_dispersion, fbl_rate, shannon_rate, FblQuery};
use urllc_core::numerics::{gamma_lower_regularized, q_function, q_inverse};
use urllc_core::outage::{outage_mrc_iid, snr_threshold, DiversityChannel, ResourceGridConfig};

/// Composite Simpson on `[a, b]` with `n` (even) intervals.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Gaussian tail by integrating the density over `[x, x + 14]`.
fn q_oracle(x: f64) -> f64 {
    let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * PI).sqrt();
    if x >= 0.0 {
        simpson(pdf, x, x + 14.0, 40_000)
    } else {
        1.0 - q_oracle(-x)
    }
}

fn q_inverse_oracle(p: f64) -> f64 {
    let (mut lo, mut hi) = (-10.0, 12.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if q_oracle(mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `P(a, x) = x^a e^{-x} Σ_k x^k / Γ(a + k + 1)` summed term by term.
fn gamma_p_series(a: f64, x: f64, gamma_a_plus_1: f64) -> f64 {
    let mut term = x.powf(a) * (-x).exp() / gamma_a_plus_1;
    let mut sum = term;
    for k in 1..1_000_000 {
        term *= x / (a + k as f64);
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn q_function_matches_quadrature() {
    for x in [-3.0, -1.0, -0.2, 0.0, 0.3, 1.0, 2.5, 4.0, 5.5, 7.0] {
        let got = q_function(x);
        let want = q_oracle(x);
        assert!(rel(got, want) < 1e-9, "x={x}: {got} vs {want}");
    }
}

#[test]
fn q_inverse_matches_bisection_on_quadrature() {
    for p in [0.4, 0.1, 1e-3, 1e-5, 1e-7, 1e-9, 1e-12] {
        let got = q_inverse(p).unwrap();
        let want = q_inverse_oracle(p);
        assert!((got - want).abs() < 1e-8, "p={p}: {got} vs {want}");
    }
}

#[test]
fn gamma_integer_shape_closed_form() {
    // P(n, x) = 1 − e^{−x} Σ_{k<n} x^k / k!
    for n in 1..=6u32 {
        for x in [1e-3, 0.05, 0.168, 1.0, 3.0, 10.0] {
            let mut term = 1.0;
            let mut sum = 1.0;
            for k in 1..n {
                term *= x / f64::from(k);
                sum += term;
            }
            let want = if x < 0.5 && n > 1 {
                // Avoid cancellation: the complement is tiny.
                gamma_p_series(f64::from(n), x, (1..=n).map(f64::from).product())
            } else {
                1.0 - (-x).exp() * sum
            };
            let got = gamma_lower_regularized(f64::from(n), x).unwrap();
            assert!(rel(got, want) < 1e-10, "n={n} x={x}: {got} vs {want}");
        }
    }
    let p = gamma_lower_regularized(2.0, 0.168).unwrap();
    assert!((p - 0.012_626_7).abs() < 5e-8, "{p}");
}

#[test]
fn gamma_half_integer_series() {
    // Γ(3/2) = √π / 2
    let g = PI.sqrt() / 2.0;
    for x in [0.01, 0.5, 2.0, 8.0] {
        let got = gamma_lower_regularized(0.5, x).unwrap();
        let want = gamma_p_series(0.5, x, g);
        assert!(rel(got, want) < 1e-10, "x={x}: {got} vs {want}");
    }
}

#[test]
fn fbl_rate_matches_independent_formula() {
    let log2e_sq = (1.0 / LN_2).powi(2);
    for snr_db in [0.0, 10.0, 20.0] {
        let snr = 10f64.powf(snr_db / 10.0);
        assert!(
            rel(
                channel_dispersion(snr),
                (1.0 - (1.0 + snr).powi(-2)) * log2e_sq
            ) < 1e-12
        );
        for latency in [1e-4, 1e-3, 1e-2] {
            for eps in [1e-3, 1e-6, 1e-9] {
                let b = 2e5;
                let n = b * latency;
                let v = (1.0 - (1.0 + snr).powi(-2)) * log2e_sq;
                let want = b * ((1.0 + snr).log2() - (v / n).sqrt() * q_inverse_oracle(eps));
                let got = fbl_rate(&FblQuery::new(snr, latency, b, eps).unwrap());
                assert!(
                    (got - want).abs() < 1e-6 * shannon_rate(snr, b),
                    "snr={snr_db} L={latency} eps={eps}: {got} vs {want}"
                );
            }
        }
    }
}

#[test]
fn iid_outage_matches_closed_form() {
    // 256 bits on 12 subcarriers of 15 kHz for 1 ms: 15·12 resource elements.
    let cfg = ResourceGridConfig::with_numerology(0, 1.8e5, 256.0).unwrap();
    let th = snr_threshold(&cfg, 1e-3).unwrap();
    assert!(rel(th, 2f64.powf(256.0 / 180.0) - 1.0) < 1e-12);
    for n in 1..=4u32 {
        for snr_db in [10.0, 20.0] {
            let avg = 10f64.powf(snr_db / 10.0);
            let x = th / avg;
            let want = gamma_p_series(f64::from(n), x, (1..=n).map(f64::from).product());
            let ch = DiversityChannel::iid(n, avg).unwrap();
            let got = outage_mrc_iid(&ch, th).unwrap();
            assert!(
                rel(got, want) < 1e-10,
                "n={n} snr={snr_db}: {got} vs {want}"
            );
        }
    }
}
