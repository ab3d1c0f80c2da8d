//! Brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use urllc_core::fbl::fbl_min_latency;
use urllc_core::rng::component_rng;
use urllc_core::traffic::FreewayLayout;
use urllc_core::v2i::{FreewayParams, FreewayScenario, Precoder, UserQos};

pub fn sinr(precoder: Precoder, p: &[f64], beta: &[f64], m: usize, noise: f64) -> Vec<f64> {
    let total: f64 = p.iter().sum();
    let k = p.len();
    (0..k)
        .map(|i| match precoder {
            Precoder::Zf => (m - k) as f64 * p[i] * beta[i] / noise,
            Precoder::Mf => m as f64 * p[i] * beta[i] / (noise + beta[i] * (total - p[i])),
        })
        .collect()
}

pub struct GridResult {
    /// Best max-latency over the full-budget simplex grid.
    pub best: f64,
    pub best_powers: [f64; 3],
}

/// Exhaustive search over `p = step·(n1, n2, n3)`, `Σn = budget/step`, for
/// three users with a common QoS. With a common QoS the largest latency
/// belongs to the smallest SINR, so the grid maximises the minimum SINR.
pub fn three_user_grid(
    scenario: &FreewayScenario,
    qos: UserQos,
    precoder: Precoder,
    step: f64,
) -> GridResult {
    assert_eq!(scenario.users(), 3);
    let beta = scenario.gains();
    let n = (scenario.total_power() / step).round() as usize;
    let mut best = (f64::NEG_INFINITY, [0.0; 3]);
    for a in 0..=n {
        for b in 0..=(n - a) {
            let p = [a as f64 * step, b as f64 * step, (n - a - b) as f64 * step];
            let s = sinr(
                precoder,
                &p,
                &beta,
                scenario.antennas(),
                scenario.noise_power(),
            );
            let worst = s.iter().copied().fold(f64::INFINITY, f64::min);
            if worst > best.0 {
                best = (worst, p);
            }
        }
    }
    GridResult {
        best: latency_at_sinr(scenario, qos, best.0),
        best_powers: best.1,
    }
}

pub fn latency_at_sinr(scenario: &FreewayScenario, qos: UserQos, snr: f64) -> f64 {
    fbl_min_latency(
        qos.rate(),
        snr,
        scenario.bandwidth(),
        qos.error_prob(),
        scenario.latency_bounds(),
    )
    .unwrap_or(f64::INFINITY)
}

/// Grid point of the full-budget simplex next to `p`: the first two
/// coordinates floored to the step, the remainder to the third.
pub fn simplex_neighbour(p: &[f64], budget: f64, step: f64) -> Vec<f64> {
    let n = (budget / step).round() as i64;
    let a = (p[0] / step).floor() as i64;
    let b = ((p[1] / step).floor() as i64).min(n - a);
    vec![a as f64 * step, b as f64 * step, (n - a - b) as f64 * step]
}

/// Largest per-user latency at an arbitrary allocation.
pub fn max_latency_at(
    scenario: &FreewayScenario,
    qos: UserQos,
    precoder: Precoder,
    p: &[f64],
) -> f64 {
    let s = sinr(
        precoder,
        p,
        &scenario.gains(),
        scenario.antennas(),
        scenario.noise_power(),
    );
    s.iter()
        .map(|&r| latency_at_sinr(scenario, qos, r))
        .fold(0.0, f64::max)
}

/// Random three-user freeway instance with a 1 W budget.
pub fn random_three_user(seed: u64, index: u64) -> FreewayScenario {
    let mut rng = component_rng(seed, &format!("v2i-instance-{index}"));
    let antennas = [8usize, 16, 32, 64, 300][rng.random_range(0..5)];
    let params = FreewayParams {
        antennas,
        total_power: 1.0,
        reference_snr_db: rng.random_range(10.0..22.0),
        ..Default::default()
    };
    let layout =
        FreewayLayout::new(params.road_length, params.bs_offset, 0.015, &params.model).unwrap();
    let positions = (0..3)
        .map(|_| rng.random::<f64>() * params.road_length)
        .collect();
    FreewayScenario::new(&params, layout, positions).unwrap()
}

/// Monotone fixed-point iteration for MF powers, run to convergence.
pub fn mf_fixed_point(target: &[f64], beta: &[f64], m: usize, noise: f64) -> Vec<f64> {
    let mut p = vec![0.0; target.len()];
    for _ in 0..1_000_000 {
        let total: f64 = p.iter().sum();
        let next: Vec<f64> = (0..p.len())
            .map(|k| target[k] * (noise / beta[k] + total - p[k]) / m as f64)
            .collect();
        let delta = next
            .iter()
            .zip(&p)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        p = next;
        if delta <= 1e-15 * p.iter().copied().fold(0.0, f64::max) {
            break;
        }
    }
    p
}

/// Segment–rectangle intersection by separating axes: the segment's
/// bounding box must overlap the rectangle and the rectangle's corners must
/// not all lie strictly on one side of the segment's line.
pub fn segment_hits_rect(a: (f64, f64), b: (f64, f64), r: &urllc_core::traffic::Rect) -> bool {
    if a.0.max(b.0) < r.x0 || a.0.min(b.0) > r.x1 || a.1.max(b.1) < r.y0 || a.1.min(b.1) > r.y1 {
        return false;
    }
    let side = |p: (f64, f64)| (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
    let s = [(r.x0, r.y0), (r.x1, r.y0), (r.x1, r.y1), (r.x0, r.y1)].map(side);
    !(s.iter().all(|&v| v > 0.0) || s.iter().all(|&v| v < 0.0))
}

/// All injective maps from `n` items into `m` slots.
pub fn injections(n: usize, m: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for c in 0..m {
            if !cur.contains(&c) {
                cur.push(c);
                go(n, m, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(n, m, &mut Vec::new(), &mut out);
    out
}
