//! Freeway massive-MIMO downlink: hardened SINR under matched-filter and
//! zero-forcing precoding, the equal-power baseline and the min-max
//! transmission-latency power allocator.
//!
//! A base station with `M` antennas sits `d_B` metres off the road midpoint
//! and serves the `K = round(κ·d_R)` vehicles on the segment. Large-scale
//! gains follow a log-distance law `β₀·d^{−α}`.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::fbl::{fbl_min_latency, fbl_required_snr, LatencyBounds};
use crate::numerics::{bisect, db_to_linear, thermal_noise_w, ROOT_TOL};
use crate::traffic::{place_freeway_vehicles, FreewayLayout, Placement, UnderwoodModel};

/// Relative slack on the power budget.
pub const BUDGET_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLoss {
    pub exponent: f64,
    /// Gain at 1 m.
    pub ref_gain: f64,
}

impl PathLoss {
    pub fn new(exponent: f64, ref_gain: f64) -> Result<Self> {
        if !(exponent >= 2.0) || !exponent.is_finite() {
            return Err(invalid(
                "PathLoss",
                format!("exponent must be >= 2, got {exponent}"),
            ));
        }
        if !(ref_gain > 0.0) || !ref_gain.is_finite() {
            return Err(invalid(
                "PathLoss",
                format!("reference gain must be > 0, got {ref_gain}"),
            ));
        }
        Ok(Self { exponent, ref_gain })
    }
}

/// `β = β₀·d^{−α}` with `d` the distance from the base station, which sits
/// `bs_offset` metres off the road midpoint.
pub fn large_scale_gain(position: f64, layout: &FreewayLayout, pathloss: &PathLoss) -> f64 {
    debug_assert!((0.0..=layout.road_length()).contains(&position));
    let dx = position - layout.bs_position();
    let d2 = layout.bs_offset() * layout.bs_offset() + dx * dx;
    pathloss.ref_gain * d2.powf(-0.5 * pathloss.exponent)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Precoder {
    Mf,
    Zf,
}

impl Precoder {
    pub const ALL: [Precoder; 2] = [Precoder::Mf, Precoder::Zf];

    pub fn name(self) -> &'static str {
        match self {
            Precoder::Mf => "mf",
            Precoder::Zf => "zf",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    powers: Vec<f64>,
}

impl PowerAllocation {
    pub fn new(powers: Vec<f64>, budget: f64) -> Result<Self> {
        if let Some(p) = powers.iter().find(|p| !(**p >= 0.0) || !p.is_finite()) {
            return Err(invalid(
                "PowerAllocation",
                format!("powers must be finite and >= 0, got {p}"),
            ));
        }
        let total: f64 = powers.iter().sum();
        if total > budget * (1.0 + BUDGET_RTOL) {
            return Err(invalid(
                "PowerAllocation",
                format!("total {total} W exceeds budget {budget} W"),
            ));
        }
        Ok(Self { powers })
    }

    pub fn equal(users: usize, budget: f64) -> Self {
        Self {
            powers: vec![budget / users as f64; users],
        }
    }

    pub fn powers(&self) -> &[f64] {
        &self.powers
    }

    pub fn total(&self) -> f64 {
        self.powers.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserQos {
    rate: f64,
    error_prob: f64,
}

impl UserQos {
    pub fn new(rate: f64, error_prob: f64) -> Result<Self> {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(invalid("UserQos", format!("rate must be > 0, got {rate}")));
        }
        if !(error_prob > 0.0 && error_prob < 0.5) {
            return Err(invalid(
                "UserQos",
                format!("error_prob must be in (0, 0.5), got {error_prob}"),
            ));
        }
        Ok(Self { rate, error_prob })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
    pub fn error_prob(&self) -> f64 {
        self.error_prob
    }
}

/// Deterministic-equivalent SINR of every user under channel hardening.
pub fn hardened_sinr(
    precoder: Precoder,
    alloc: &PowerAllocation,
    gains: &[f64],
    antennas: usize,
    noise_power: f64,
) -> Result<Vec<f64>> {
    let p = alloc.powers();
    if p.len() != gains.len() {
        return Err(Error::DimensionMismatch {
            expected: gains.len(),
            got: p.len(),
        });
    }
    let m = antennas as f64;
    Ok(match precoder {
        Precoder::Zf => {
            if antennas <= p.len() {
                return Err(invalid(
                    "hardened_sinr",
                    format!("ZF needs M > K, got M = {antennas}, K = {}", p.len()),
                ));
            }
            let dof = (antennas - p.len()) as f64;
            p.iter()
                .zip(gains)
                .map(|(p, b)| dof * p * b / noise_power)
                .collect()
        }
        Precoder::Mf => {
            let total: f64 = p.iter().sum();
            p.iter()
                .zip(gains)
                .map(|(p, b)| m * p * b / (noise_power + b * (total - p)))
                .collect()
        }
    })
}

/// Inputs for building freeway scenarios at varying density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreewayParams {
    pub road_length: f64,
    pub bs_offset: f64,
    pub model: UnderwoodModel,
    pub antennas: usize,
    pub bandwidth: f64,
    pub total_power: f64,
    /// Overrides the thermal-noise default when set.
    pub noise_power: Option<f64>,
    pub noise_figure_db: f64,
    pub pathloss_exponent: f64,
    /// Overrides the SNR calibration when set.
    pub ref_gain: Option<f64>,
    /// Mean per-user SNR, after array gain, of a user abeam of the base
    /// station under equal power at the reference density.
    pub reference_snr_db: f64,
    pub reference_density: f64,
    pub placement: Placement,
    pub latency_bounds: LatencyBounds,
}

impl Default for FreewayParams {
    fn default() -> Self {
        Self {
            road_length: 200.0,
            bs_offset: 20.0,
            model: UnderwoodModel::default(),
            antennas: 300,
            bandwidth: 200e3,
            total_power: 10.0,
            noise_power: None,
            noise_figure_db: 9.0,
            pathloss_exponent: 2.5,
            ref_gain: None,
            reference_snr_db: 30.0,
            reference_density: 0.05,
            placement: Placement::Equispaced,
            latency_bounds: LatencyBounds::default(),
        }
    }
}

impl FreewayParams {
    pub fn noise_power(&self) -> f64 {
        self.noise_power
            .unwrap_or_else(|| thermal_noise_w(self.bandwidth, self.noise_figure_db))
    }

    /// Reference users at the reference density, rounded, at least one.
    fn reference_users(&self) -> f64 {
        (self.reference_density * self.road_length).round().max(1.0)
    }

    pub fn pathloss(&self) -> Result<PathLoss> {
        let ref_gain = match self.ref_gain {
            Some(g) => g,
            None => {
                let per_user = self.total_power / self.reference_users();
                db_to_linear(self.reference_snr_db)
                    * self.noise_power()
                    * self.bs_offset.powf(self.pathloss_exponent)
                    / (self.antennas as f64 * per_user)
            }
        };
        PathLoss::new(self.pathloss_exponent, ref_gain)
    }

    pub fn scenario(&self, density: f64) -> Result<FreewayScenario> {
        let layout = FreewayLayout::new(self.road_length, self.bs_offset, density, &self.model)?;
        let positions = place_freeway_vehicles(&layout, self.placement)?;
        FreewayScenario::new(self, layout, positions)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreewayScenario {
    layout: FreewayLayout,
    model: UnderwoodModel,
    antennas: usize,
    bandwidth: f64,
    total_power: f64,
    noise_power: f64,
    pathloss: PathLoss,
    positions: Vec<f64>,
    latency_bounds: LatencyBounds,
}

impl FreewayScenario {
    /// Scenario with explicit user positions (metres along the road).
    pub fn new(params: &FreewayParams, layout: FreewayLayout, positions: Vec<f64>) -> Result<Self> {
        if positions.is_empty() {
            return Err(invalid("FreewayScenario", "no users"));
        }
        if params.antennas <= positions.len() {
            return Err(invalid(
                "FreewayScenario",
                format!(
                    "need M > K, got M = {}, K = {}",
                    params.antennas,
                    positions.len()
                ),
            ));
        }
        if !(params.total_power > 0.0) {
            return Err(invalid(
                "FreewayScenario",
                format!("total power must be > 0, got {}", params.total_power),
            ));
        }
        if !(params.bandwidth > 0.0) {
            return Err(invalid(
                "FreewayScenario",
                format!("bandwidth must be > 0, got {}", params.bandwidth),
            ));
        }
        let noise_power = params.noise_power();
        if !(noise_power > 0.0) {
            return Err(invalid(
                "FreewayScenario",
                format!("noise power must be > 0, got {noise_power}"),
            ));
        }
        if let Some(x) = positions
            .iter()
            .find(|x| !(0.0..=layout.road_length()).contains(*x))
        {
            return Err(invalid(
                "FreewayScenario",
                format!("position {x} outside the road"),
            ));
        }
        Ok(Self {
            layout,
            model: params.model,
            antennas: params.antennas,
            bandwidth: params.bandwidth,
            total_power: params.total_power,
            noise_power,
            pathloss: params.pathloss()?,
            positions,
            latency_bounds: params.latency_bounds,
        })
    }

    pub fn layout(&self) -> &FreewayLayout {
        &self.layout
    }
    pub fn model(&self) -> &UnderwoodModel {
        &self.model
    }
    pub fn antennas(&self) -> usize {
        self.antennas
    }
    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }
    pub fn total_power(&self) -> f64 {
        self.total_power
    }
    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }
    pub fn pathloss(&self) -> &PathLoss {
        &self.pathloss
    }
    pub fn positions(&self) -> &[f64] {
        &self.positions
    }
    pub fn users(&self) -> usize {
        self.positions.len()
    }
    pub fn latency_bounds(&self) -> &LatencyBounds {
        &self.latency_bounds
    }

    pub fn gains(&self) -> Vec<f64> {
        self.positions
            .iter()
            .map(|&x| large_scale_gain(x, &self.layout, &self.pathloss))
            .collect()
    }

    fn check_qos(&self, qos: &[UserQos]) -> Result<()> {
        if qos.len() != self.users() {
            return Err(Error::DimensionMismatch {
                expected: self.users(),
                got: qos.len(),
            });
        }
        Ok(())
    }
}

/// Per-user minimum latency with the budget split equally.
pub fn epa_latencies(
    scenario: &FreewayScenario,
    qos: &[UserQos],
    precoder: Precoder,
) -> Result<Vec<f64>> {
    scenario.check_qos(qos)?;
    let alloc = PowerAllocation::equal(scenario.users(), scenario.total_power);
    latencies_for(scenario, qos, precoder, &alloc)
}

/// Per-user minimum latency under a given allocation.
pub fn latencies_for(
    scenario: &FreewayScenario,
    qos: &[UserQos],
    precoder: Precoder,
    alloc: &PowerAllocation,
) -> Result<Vec<f64>> {
    scenario.check_qos(qos)?;
    let sinr = hardened_sinr(
        precoder,
        alloc,
        &scenario.gains(),
        scenario.antennas,
        scenario.noise_power,
    )?;
    sinr.iter()
        .zip(qos)
        .enumerate()
        .map(|(k, (&rho, q))| {
            fbl_min_latency(
                q.rate,
                rho,
                scenario.bandwidth,
                q.error_prob,
                &scenario.latency_bounds,
            )
            .map_err(|e| Error::UserInfeasible {
                user: k,
                reason: e.to_string(),
            })
        })
        .collect()
}

/// Powers that give each user exactly its target SINR, or `None` when no
/// non-negative solution exists (MF interference limit).
pub fn required_powers(
    precoder: Precoder,
    target_sinr: &[f64],
    gains: &[f64],
    antennas: usize,
    noise_power: f64,
) -> Option<Vec<f64>> {
    let m = antennas as f64;
    match precoder {
        Precoder::Zf => {
            let dof = antennas.checked_sub(gains.len()).filter(|d| *d > 0)? as f64;
            Some(
                target_sinr
                    .iter()
                    .zip(gains)
                    .map(|(r, b)| r * noise_power / (dof * b))
                    .collect(),
            )
        }
        Precoder::Mf => {
            // p_k (M + ρ_k) = ρ_k (σ²/β_k + S) with S the total power.
            let load: f64 = target_sinr.iter().map(|r| r / (m + r)).sum();
            if load >= 1.0 {
                return None;
            }
            let base: f64 = target_sinr
                .iter()
                .zip(gains)
                .map(|(r, b)| r * noise_power / (b * (m + r)))
                .sum();
            let total = base / (1.0 - load);
            Some(
                target_sinr
                    .iter()
                    .zip(gains)
                    .map(|(r, b)| r * (noise_power / b + total) / (m + r))
                    .collect(),
            )
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxOutcome {
    pub allocation: PowerAllocation,
    /// Common latency attained by every user, s.
    pub latency: f64,
}

/// Allocation minimising the largest per-user latency.
pub fn minmax_latency_allocation(
    scenario: &FreewayScenario,
    qos: &[UserQos],
    precoder: Precoder,
) -> Result<MinMaxOutcome> {
    scenario.check_qos(qos)?;
    let gains = scenario.gains();
    let powers_at = |latency: f64| -> Result<Option<Vec<f64>>> {
        let target = qos
            .iter()
            .map(|q| fbl_required_snr(q.rate, latency, scenario.bandwidth, q.error_prob))
            .collect::<Result<Vec<_>>>()?;
        Ok(required_powers(
            precoder,
            &target,
            &gains,
            scenario.antennas,
            scenario.noise_power,
        ))
    };
    let budget = scenario.total_power * (1.0 + BUDGET_RTOL);
    let fits = |p: &Option<Vec<f64>>| p.as_ref().is_some_and(|p| p.iter().sum::<f64>() <= budget);

    let floor = scenario.latency_bounds.floor_for(scenario.bandwidth);
    let cap = scenario.latency_bounds.cap_s;
    let at_cap = powers_at(cap)?;
    if !fits(&at_cap) {
        let deficit = at_cap.map_or(f64::INFINITY, |p| {
            p.iter().sum::<f64>() - scenario.total_power
        });
        return Err(Error::PowerDeficit {
            deficit_w: deficit,
            latency_cap_s: cap,
        });
    }
    let latency = if fits(&powers_at(floor)?) {
        floor
    } else {
        // Errors cannot occur inside the bracket: the endpoints evaluated fine
        // and fbl_required_snr only fails on invalid arguments.
        let f = |l: f64| match powers_at(l) {
            Ok(p) if fits(&p) => 1.0,
            _ => -1.0,
        };
        bisect(f, floor, cap, ROOT_TOL)
    };
    let powers = powers_at(latency)?.expect("feasible at the returned latency");
    let allocation = PowerAllocation::new(powers, scenario.total_power)?;
    Ok(MinMaxOutcome {
        allocation,
        latency,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Epa,
    MinMax,
}

impl Scheme {
    pub const ALL: [Scheme; 2] = [Scheme::Epa, Scheme::MinMax];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Epa => "epa",
            Scheme::MinMax => "minmax",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub density: f64,
    pub users: usize,
    pub scheme: Scheme,
    pub precoder: Precoder,
    /// `None` when the instance is infeasible.
    pub max_latency: Option<f64>,
    pub powers: Vec<f64>,
}

/// Evaluates every scheme and precoder at each density. Rows are ordered by
/// density, then scheme, then precoder.
pub fn density_sweep(
    params: &FreewayParams,
    densities: &[f64],
    qos: UserQos,
) -> Result<Vec<SweepRow>> {
    let per_density = densities
        .par_iter()
        .map(|&density| {
            let scenario = params.scenario(density)?;
            let qos = vec![qos; scenario.users()];
            let mut rows = Vec::with_capacity(4);
            for scheme in Scheme::ALL {
                for precoder in Precoder::ALL {
                    let (max_latency, powers) = match scheme {
                        Scheme::Epa => {
                            let powers =
                                PowerAllocation::equal(scenario.users(), scenario.total_power);
                            let lat = epa_latencies(&scenario, &qos, precoder).ok();
                            (
                                lat.map(|l| l.iter().copied().fold(0.0, f64::max)),
                                powers.powers,
                            )
                        }
                        Scheme::MinMax => {
                            match minmax_latency_allocation(&scenario, &qos, precoder) {
                                Ok(out) => (Some(out.latency), out.allocation.powers),
                                Err(_) => (None, Vec::new()),
                            }
                        }
                    };
                    rows.push(SweepRow {
                        density,
                        users: scenario.users(),
                        scheme,
                        precoder,
                        max_latency,
                        powers,
                    });
                }
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(per_density.into_iter().flatten().collect())
}
