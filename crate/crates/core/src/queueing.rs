//! Queueing latency at a single transmitter buffer: empirical reliability,
//! effective-bandwidth rate provisioning and a FIFO queue simulator.

use rand::Rng;
use rand_distr::Exp;

use crate::error::{invalid, Error, Result};
use crate::numerics::{bisect, expand_bracket};
use crate::rng::component_rng;

/// Largest `θ·C_p` for which `e^{θ·C_p}` is evaluated.
pub const MAX_EXPONENT: f64 = 700.0;

/// Histogram bin width for exported latency distributions, s.
pub const HISTOGRAM_BIN_S: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrivalProcess {
    rate: f64,
    packet_bits: f64,
}

impl ArrivalProcess {
    /// Poisson packet arrivals at `rate` packets/s with fixed size. A zero
    /// rate models a silent source.
    pub fn poisson(rate: f64, packet_bits: f64) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(invalid(
                "ArrivalProcess",
                format!("rate must be finite and >= 0, got {rate}"),
            ));
        }
        if !(packet_bits >= 1.0) || !packet_bits.is_finite() {
            return Err(invalid(
                "ArrivalProcess",
                format!("packet size must be >= 1 bit, got {packet_bits}"),
            ));
        }
        Ok(Self { rate, packet_bits })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
    pub fn packet_bits(&self) -> f64 {
        self.packet_bits
    }
    /// Mean offered load, bits/s.
    pub fn mean_bit_rate(&self) -> f64 {
        self.rate * self.packet_bits
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QosRequirement {
    latency_bound: f64,
    violation_prob: f64,
}

impl QosRequirement {
    pub fn new(latency_bound: f64, violation_prob: f64) -> Result<Self> {
        if !(latency_bound > 0.0) || !latency_bound.is_finite() {
            return Err(invalid(
                "QosRequirement",
                format!("latency bound must be > 0, got {latency_bound}"),
            ));
        }
        if !(violation_prob > 0.0 && violation_prob < 1.0) {
            return Err(invalid(
                "QosRequirement",
                format!("violation probability must be in (0,1), got {violation_prob}"),
            ));
        }
        Ok(Self {
            latency_bound,
            violation_prob,
        })
    }

    pub fn latency_bound(&self) -> f64 {
        self.latency_bound
    }
    pub fn violation_prob(&self) -> f64 {
        self.violation_prob
    }
}

/// Per-packet sojourn latencies, kept sorted.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LatencySampleSet {
    sorted: Vec<f64>,
}

impl LatencySampleSet {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if let Some(x) = samples.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
            return Err(invalid(
                "LatencySampleSet",
                format!("latencies must be finite and >= 0, got {x}"),
            ));
        }
        samples.sort_by(f64::total_cmp);
        Ok(Self { sorted: samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }
    pub fn len(&self) -> usize {
        self.sorted.len()
    }
    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn mean(&self) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::EmptySamples);
        }
        Ok(self.sorted.iter().sum::<f64>() / self.len() as f64)
    }

    pub fn max(&self) -> Option<f64> {
        self.sorted.last().copied()
    }
}

/// Empirical `Pr{L ≤ t}`.
pub fn latency_reliability(set: &LatencySampleSet, t: f64) -> Result<f64> {
    if set.is_empty() {
        return Err(Error::EmptySamples);
    }
    let below = set.sorted.partition_point(|&x| x <= t);
    Ok(below as f64 / set.len() as f64)
}

/// Empirical `Pr{L > t}`.
pub fn violation_probability(set: &LatencySampleSet, t: f64) -> Result<f64> {
    latency_reliability(set, t).map(|r| 1.0 - r)
}

/// `α(θ) = λ(e^{θ·C_p} − 1)/θ` in bits/s.
pub fn effective_bandwidth_poisson(theta: f64, rate: f64, packet_bits: f64) -> Result<f64> {
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(Error::Domain(format!("theta must be > 0, got {theta}")));
    }
    let x = theta * packet_bits;
    if x > MAX_EXPONENT {
        return Err(Error::Overflow(x));
    }
    Ok(rate * x.exp_m1() / theta)
}

/// Smallest constant service rate whose exponential delay-tail estimate
/// meets the QoS target.
///
/// The wait budget left after serving the packet itself is `L_th − C_p/R`,
/// so `θ*` solves `θ·(α(θ)·L_th − C_p) = ln(1/ε)` and `R = α(θ*)`.
pub fn min_rate_for_qos(arr: &ArrivalProcess, qos: &QosRequirement) -> Result<f64> {
    let c = arr.packet_bits;
    let l = qos.latency_bound;
    if arr.rate == 0.0 {
        return Ok(c / l);
    }
    let target = (1.0 / qos.violation_prob).ln();
    // θ·(α·L − C) expressed through x = θ·C to stay accurate for small θ.
    // Convex in θ and negative at 0, so the positive root is unique.
    let g = |theta: f64| arr.rate * l * (theta * c).exp_m1() - theta * c - target;
    let limit = MAX_EXPONENT / c;
    let (lo, hi) = expand_bracket(g, 0.0, 1e-3 / c, limit).ok_or(Error::Overflow(MAX_EXPONENT))?;
    let theta = bisect(g, lo, hi, 0.0);
    effective_bandwidth_poisson(theta, arr.rate, c)
}

/// Rate that delivers one packet within the bound, ignoring queueing.
pub fn static_min_rate(packet_bits: f64, latency_bound: f64) -> Result<f64> {
    if !(packet_bits > 0.0) || !(latency_bound > 0.0) {
        return Err(Error::Domain(format!(
            "packet size and latency bound must be positive, got {packet_bits} and {latency_bound}"
        )));
    }
    Ok(packet_bits / latency_bound)
}

/// FIFO queue with Poisson arrivals and deterministic service `C_p/R`,
/// simulated for `packets` packets via the Lindley recursion.
pub fn simulate_fifo_queue(
    arr: &ArrivalProcess,
    service_rate: f64,
    packets: u64,
    seed: u64,
) -> Result<LatencySampleSet> {
    if !(service_rate > 0.0) || !service_rate.is_finite() {
        return Err(Error::Domain(format!(
            "service rate must be > 0, got {service_rate}"
        )));
    }
    if packets == 0 {
        return Err(invalid(
            "simulate_fifo_queue",
            "horizon must be at least one packet",
        ));
    }
    if arr.mean_bit_rate() >= service_rate {
        log::warn!(
            "unstable queue: offered load {} bit/s >= service rate {service_rate} bit/s",
            arr.mean_bit_rate()
        );
    }
    let service = arr.packet_bits / service_rate;
    let mut samples = Vec::with_capacity(packets as usize);
    if arr.rate == 0.0 {
        samples.resize(packets as usize, service);
    } else {
        let gaps = Exp::new(arr.rate).map_err(|e| Error::Domain(e.to_string()))?;
        let mut rng = component_rng(seed, "fifo-queue");
        let mut wait = 0.0f64;
        for _ in 0..packets {
            samples.push(wait + service);
            let gap: f64 = rng.sample(gaps);
            wait = (wait + service - gap).max(0.0);
        }
    }
    LatencySampleSet::new(samples)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramBin {
    pub start: f64,
    /// Infinite for the overflow bin.
    pub end: f64,
    pub probability: f64,
}

/// Latency histogram with bins `[i·w, (i+1)·w)`. At most `max_bins` bins
/// are emitted; the last one absorbs everything beyond.
pub fn latency_histogram(
    set: &LatencySampleSet,
    bin_width: f64,
    max_bins: usize,
) -> Result<Vec<HistogramBin>> {
    if set.is_empty() {
        return Err(Error::EmptySamples);
    }
    if !(bin_width > 0.0) || max_bins == 0 {
        return Err(invalid(
            "latency_histogram",
            "bin width and bin count must be positive",
        ));
    }
    let top = set.max().unwrap_or(0.0);
    let needed = ((top / bin_width).floor() as usize).saturating_add(1);
    let bins = needed.min(max_bins);
    let mut counts = vec![0u64; bins];
    for &x in &set.sorted {
        let i = ((x / bin_width).floor() as usize).min(bins - 1);
        counts[i] += 1;
    }
    let n = set.len() as f64;
    Ok(counts
        .iter()
        .enumerate()
        .map(|(i, &c)| HistogramBin {
            start: i as f64 * bin_width,
            end: if i + 1 == bins && needed > bins {
                f64::INFINITY
            } else {
                (i + 1) as f64 * bin_width
            },
            probability: c as f64 / n,
        })
        .collect())
}
