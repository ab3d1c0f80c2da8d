//! Outage–latency tradeoff for large packets over an OFDM resource grid.
//!
//! A packet of `C` bits sent over `⌊L/T_s⌋·⌊B/f_s⌋` resource elements is in
//! outage when `n·log2(1+ρ) < C`, i.e. when the post-combining SNR falls
//! below `ρ_th = 2^{C/n} − 1`. With maximum ratio combining over `N_R`
//! i.i.d. Rayleigh branches the combined SNR is `Gamma(N_R, ρ_avg)`; for
//! correlated branches the outage is estimated by Monte Carlo.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::numerics::gamma_lower_regularized;
use crate::rng::chunk_rng;

/// Base subcarrier spacing, 15 kHz; numerology `n` scales it by `2^n`.
pub const BASE_SUBCARRIER_SPACING_HZ: f64 = 15e3;

const MC_CHUNK: u64 = 4096;
pub const MIN_MC_TRIALS: u64 = 10_000;

/// Floors of grid ratios are taken with this slack so that e.g. 1 ms at
/// 15 kHz counts as exactly 15 symbols.
const FLOOR_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResourceGridConfig {
    symbol_duration: f64,
    subcarrier_spacing: f64,
    bandwidth: f64,
    packet_bits: f64,
}

impl ResourceGridConfig {
    pub fn new(
        symbol_duration: f64,
        subcarrier_spacing: f64,
        bandwidth: f64,
        packet_bits: f64,
    ) -> Result<Self> {
        if !(symbol_duration > 0.0 && subcarrier_spacing > 0.0) {
            return Err(invalid(
                "ResourceGridConfig",
                "symbol duration and spacing must be positive",
            ));
        }
        if (symbol_duration * subcarrier_spacing - 1.0).abs() > 1e-9 {
            return Err(invalid(
                "ResourceGridConfig",
                format!(
                    "T_s * f_s must equal 1, got {}",
                    symbol_duration * subcarrier_spacing
                ),
            ));
        }
        if !(bandwidth >= subcarrier_spacing) {
            return Err(invalid(
                "ResourceGridConfig",
                format!("bandwidth {bandwidth} Hz narrower than one subcarrier ({subcarrier_spacing} Hz)"),
            ));
        }
        if !(packet_bits >= 1.0) {
            return Err(invalid(
                "ResourceGridConfig",
                format!("packet must carry >= 1 bit, got {packet_bits}"),
            ));
        }
        Ok(Self {
            symbol_duration,
            subcarrier_spacing,
            bandwidth,
            packet_bits,
        })
    }

    /// Grid with subcarrier spacing `15·2^n` kHz and `T_s = 1/f_s`.
    pub fn with_numerology(numerology: u8, bandwidth: f64, packet_bits: f64) -> Result<Self> {
        if numerology > 6 {
            return Err(invalid(
                "ResourceGridConfig",
                format!("numerology {numerology} out of range 0..=6"),
            ));
        }
        let fs = BASE_SUBCARRIER_SPACING_HZ * f64::from(1u32 << numerology);
        Self::new(1.0 / fs, fs, bandwidth, packet_bits)
    }

    pub fn symbol_duration(&self) -> f64 {
        self.symbol_duration
    }
    pub fn subcarrier_spacing(&self) -> f64 {
        self.subcarrier_spacing
    }
    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }
    pub fn packet_bits(&self) -> f64 {
        self.packet_bits
    }

    /// `(⌊L/T_s⌋, ⌊B/f_s⌋)`.
    pub fn grid_dims(&self, latency: f64) -> (u64, u64) {
        let symbols = (latency / self.symbol_duration + FLOOR_SLACK)
            .floor()
            .max(0.0) as u64;
        let subcarriers = (self.bandwidth / self.subcarrier_spacing + FLOOR_SLACK).floor() as u64;
        (symbols, subcarriers)
    }

    pub fn resource_elements(&self, latency: f64) -> u64 {
        let (t, f) = self.grid_dims(latency);
        t * f
    }
}

/// Outage SNR threshold `ρ_th = 2^q − 1`, `q = C / (⌊L/T_s⌋⌊B/f_s⌋)`.
pub fn snr_threshold(cfg: &ResourceGridConfig, latency: f64) -> Result<f64> {
    let (symbols, subcarriers) = cfg.grid_dims(latency);
    if symbols == 0 || subcarriers == 0 {
        return Err(Error::DegenerateGrid(format!(
            "latency {latency} s holds {symbols} symbols of {} s",
            cfg.symbol_duration
        )));
    }
    let q = cfg.packet_bits / (symbols * subcarriers) as f64;
    Ok((q * std::f64::consts::LN_2).exp_m1())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiversityChannel {
    num_rx: u32,
    avg_snr: f64,
    correlation: f64,
}

impl DiversityChannel {
    pub fn new(num_rx: u32, avg_snr: f64, correlation: f64) -> Result<Self> {
        if num_rx < 1 {
            return Err(invalid(
                "DiversityChannel",
                "need at least one receive antenna",
            ));
        }
        if !(avg_snr > 0.0) || !avg_snr.is_finite() {
            return Err(invalid(
                "DiversityChannel",
                format!("average SNR must be positive, got {avg_snr}"),
            ));
        }
        if !(0.0..1.0).contains(&correlation) {
            return Err(invalid(
                "DiversityChannel",
                format!("correlation must be in [0,1), got {correlation}"),
            ));
        }
        Ok(Self {
            num_rx,
            avg_snr,
            correlation,
        })
    }

    pub fn iid(num_rx: u32, avg_snr: f64) -> Result<Self> {
        Self::new(num_rx, avg_snr, 0.0)
    }

    pub fn num_rx(&self) -> u32 {
        self.num_rx
    }
    pub fn avg_snr(&self) -> f64 {
        self.avg_snr
    }
    pub fn correlation(&self) -> f64 {
        self.correlation
    }
}

/// Analytic MRC outage over i.i.d. Rayleigh branches.
pub fn outage_mrc_iid(ch: &DiversityChannel, rho_th: f64) -> Result<f64> {
    if ch.correlation != 0.0 {
        return Err(invalid(
            "DiversityChannel",
            format!(
                "analytic outage needs uncorrelated branches, got correlation {}",
                ch.correlation
            ),
        ));
    }
    gamma_lower_regularized(f64::from(ch.num_rx), rho_th / ch.avg_snr)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub trials: u64,
}

/// Monte-Carlo MRC outage with exponentially correlated branches
/// (`R_ij = c^|i−j|`).
///
/// Branch gains are generated as an AR(1) sequence
/// `h_i = c·h_{i−1} + sqrt(1−c²)·z_i`, which realises that correlation
/// matrix exactly. The random stream depends only on `(seed, chunk)`, so
/// two calls that differ only in correlation or threshold see the same
/// underlying Gaussian draws.
pub fn outage_mrc_correlated_mc(
    ch: &DiversityChannel,
    rho_th: f64,
    trials: u64,
    seed: u64,
) -> Result<McEstimate> {
    if trials < MIN_MC_TRIALS {
        return Err(invalid(
            "Monte-Carlo settings",
            format!("need at least {MIN_MC_TRIALS} trials, got {trials}"),
        ));
    }
    let n_rx = ch.num_rx as usize;
    let c = ch.correlation;
    let innovation = (1.0 - c * c).sqrt();
    // Compare the branch-power sum against ρ_th/ρ_avg instead of scaling
    // every sample.
    let threshold = rho_th / ch.avg_snr;
    let chunks = trials.div_ceil(MC_CHUNK);
    let outages: u64 = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = chunk_rng(seed, "outage-mc", chunk);
            let count = MC_CHUNK.min(trials - chunk * MC_CHUNK);
            let mut hits = 0u64;
            for _ in 0..count {
                let (mut re, mut im) = (0.0f64, 0.0f64);
                let mut power = 0.0;
                for i in 0..n_rx {
                    let zr: f64 = rng.sample(StandardNormal);
                    let zi: f64 = rng.sample(StandardNormal);
                    let (zr, zi) = (
                        zr * std::f64::consts::FRAC_1_SQRT_2,
                        zi * std::f64::consts::FRAC_1_SQRT_2,
                    );
                    if i == 0 {
                        re = zr;
                        im = zi;
                    } else {
                        re = c * re + innovation * zr;
                        im = c * im + innovation * zi;
                    }
                    power += re * re + im * im;
                }
                if power < threshold {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    let p = outages as f64 / trials as f64;
    Ok(McEstimate {
        estimate: p,
        std_error: (p * (1.0 - p) / trials as f64).sqrt(),
        trials,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffCurve {
    points: Vec<(f64, f64)>,
    lrtd: Option<f64>,
}

impl TradeoffCurve {
    /// Builds a curve from `(latency s, outage)` points; the LRTD is filled
    /// in when the tail supports a fit.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(invalid(
                "TradeoffCurve",
                "latencies must be strictly increasing",
            ));
        }
        if points.iter().any(|&(_, p)| !(0.0..=1.0).contains(&p)) {
            return Err(invalid("TradeoffCurve", "outage values must lie in [0,1]"));
        }
        let mut curve = Self { points, lrtd: None };
        curve.lrtd = lrtd_estimate(&curve).ok();
        Ok(curve)
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn lrtd(&self) -> Option<f64> {
        self.lrtd
    }
}

/// Upper outage bound for points used in the LRTD fit.
pub const LRTD_TAIL_OUTAGE: f64 = 0.1;

/// Latency–reliability tradeoff degree: least-squares slope of `−log P_out`
/// against `log L` over the tail points (`0 < P_out < 0.1`).
pub fn lrtd_estimate(curve: &TradeoffCurve) -> Result<f64> {
    let tail: Vec<(f64, f64)> = curve
        .points
        .iter()
        .filter(|&&(l, p)| l > 0.0 && p > 0.0 && p < LRTD_TAIL_OUTAGE)
        .map(|&(l, p)| (l.ln(), -p.ln()))
        .collect();
    if tail.len() < 5 {
        return Err(Error::InsufficientSpan(format!(
            "{} tail points",
            tail.len()
        )));
    }
    let (min_x, max_x) = tail
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(x, _)| {
            (lo.min(x), hi.max(x))
        });
    if max_x - min_x < std::f64::consts::LN_10 * (1.0 - 1e-9) {
        return Err(Error::InsufficientSpan(format!(
            "tail spans {:.3} decades",
            (max_x - min_x) / std::f64::consts::LN_10
        )));
    }
    let n = tail.len() as f64;
    let mean_x = tail.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = tail.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = tail.iter().map(|&(x, y)| (x - mean_x) * (y - mean_y)).sum();
    let sxx: f64 = tail.iter().map(|&(x, _)| (x - mean_x).powi(2)).sum();
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSettings {
    pub trials: u64,
    pub seed: u64,
}

impl Default for McSettings {
    fn default() -> Self {
        Self {
            trials: 1_000_000,
            seed: 1,
        }
    }
}

/// Outage at each latency: analytic for uncorrelated branches, Monte
/// Carlo otherwise. Every Monte-Carlo point reuses the same seed, so the
/// estimated curve is monotone in latency by construction.
pub fn tradeoff_sweep(
    cfg: &ResourceGridConfig,
    ch: &DiversityChannel,
    latencies: &[f64],
    mc: &McSettings,
) -> Result<TradeoffCurve> {
    let points = latencies
        .iter()
        .map(|&latency| {
            let rho_th = snr_threshold(cfg, latency)?;
            let outage = if ch.correlation == 0.0 {
                outage_mrc_iid(ch, rho_th)?
            } else {
                outage_mrc_correlated_mc(ch, rho_th, mc.trials, mc.seed)?.estimate
            };
            Ok((latency, outage))
        })
        .collect::<Result<Vec<_>>>()?;
    TradeoffCurve::new(points)
}

/// `count` log-spaced latencies from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => return Vec::new(),
        1 => return vec![lo],
        _ => {}
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut v: Vec<f64> = (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect();
    v[0] = lo;
    v[count - 1] = hi;
    v
}
