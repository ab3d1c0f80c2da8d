//! Urban uplink spectrum sharing: vehicle pairs reuse the resource blocks of
//! cellular users, with a max-min allocator for cellular SINR under per-pair
//! rate requirements derived from queueing QoS.
//!
//! Each cellular user (CUE) owns one resource block. A VUE pair placed on a
//! block interferes only with that block's CUE at the base station, and the
//! CUE interferes only with that pair's receiver.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::matching::bottleneck_assignment;
use crate::numerics::{db_to_linear, thermal_noise_w};
use crate::queueing::{
    min_rate_for_qos, simulate_fifo_queue, static_min_rate, violation_probability,
};
use crate::queueing::{ArrivalProcess, LatencySampleSet, QosRequirement};
use crate::rng::{component_rng, derive_seed};
use crate::traffic::{
    build_manhattan_grid, place_vehicles, Heading, ManhattanGrid, ManhattanGridSpec,
};

/// Relative margin added to every VUE SINR target so that the delivered
/// Shannon rate is never below the requirement after rounding.
pub const SINR_MARGIN: f64 = 1e-12;

pub type Point = (f64, f64);

fn distance(a: Point, b: Point) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UrbanPathLoss {
    pub los_exponent: f64,
    pub nlos_exponent: f64,
    pub nlos_penalty_db: f64,
    /// Gain at 1 m.
    pub ref_gain_db: f64,
    /// Distance up to which every link follows the LOS law; the NLOS
    /// exponent and penalty apply beyond it.
    pub reference_distance: f64,
}

impl Default for UrbanPathLoss {
    fn default() -> Self {
        Self {
            los_exponent: 2.2,
            nlos_exponent: 4.0,
            nlos_penalty_db: 20.0,
            ref_gain_db: -38.0,
            reference_distance: 10.0,
        }
    }
}

impl UrbanPathLoss {
    /// Distances below 1 m are clamped to 1 m.
    pub fn gain(&self, a: Point, b: Point, nlos: bool) -> f64 {
        let d = distance(a, b).max(1.0);
        let d0 = self.reference_distance;
        if !nlos || d <= d0 {
            return db_to_linear(self.ref_gain_db) * d.powf(-self.los_exponent);
        }
        db_to_linear(self.ref_gain_db - self.nlos_penalty_db)
            * d0.powf(-self.los_exponent)
            * (d / d0).powf(-self.nlos_exponent)
    }
}

/// A link is NLOS when the straight segment touches any building.
pub fn is_nlos(grid: &ManhattanGrid, a: Point, b: Point) -> bool {
    grid.buildings().iter().any(|r| r.intersects_segment(a, b))
}

pub fn link_gain(grid: &ManhattanGrid, pathloss: &UrbanPathLoss, a: Point, b: Point) -> f64 {
    pathloss.gain(a, b, is_nlos(grid, a, b))
}

#[derive(Debug, Clone, PartialEq)]
pub struct UrbanParams {
    pub grid: ManhattanGridSpec,
    pub cues: usize,
    pub vue_pairs: usize,
    pub pair_distance_cap: f64,
    pub rb_bandwidth: f64,
    pub noise_figure_db: f64,
    /// Overrides the thermal-noise default when set.
    pub noise_power: Option<f64>,
    pub cue_max_power: f64,
    pub vue_max_power: f64,
    pub pathloss: UrbanPathLoss,
    pub qos: QosRequirement,
    pub arrivals: ArrivalProcess,
}

impl Default for UrbanParams {
    fn default() -> Self {
        Self {
            grid: ManhattanGridSpec::default(),
            cues: 8,
            vue_pairs: 4,
            pair_distance_cap: 50.0,
            rb_bandwidth: 180e3,
            noise_figure_db: 9.0,
            noise_power: None,
            cue_max_power: db_to_linear(23.0 - 30.0),
            vue_max_power: db_to_linear(23.0 - 30.0),
            pathloss: UrbanPathLoss::default(),
            qos: QosRequirement::new(0.1, 0.05).expect("valid default"),
            arrivals: ArrivalProcess::poisson(1.0, 2048.0).expect("valid default"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VuePair {
    pub tx: Point,
    pub rx: Point,
    pub heading: Heading,
}

/// Large-scale gains of every link that matters for sharing.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkGains {
    pub cue_bs: Vec<f64>,
    /// VUE transmitter to its own receiver.
    pub vue: Vec<f64>,
    pub vue_bs: Vec<f64>,
    /// `cue_vue[c][v]`: CUE `c` to the receiver of pair `v`.
    pub cue_vue: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UrbanScenario {
    grid: ManhattanGrid,
    bs: Point,
    cue_positions: Vec<Point>,
    vue_pairs: Vec<VuePair>,
    gains: LinkGains,
    pair_distance_cap: f64,
    rb_bandwidth: f64,
    noise_power: f64,
    cue_max_power: f64,
    vue_max_power: f64,
    qos: Vec<QosRequirement>,
    arrivals: Vec<ArrivalProcess>,
}

fn sample_on_rings<R: Rng + ?Sized>(rings: &[Vec<Point>], rng: &mut R) -> Point {
    let seg_len = |w: &[Point]| distance(w[0], w[1]);
    let total: f64 = rings.iter().flat_map(|r| r.windows(2)).map(seg_len).sum();
    let mut s = rng.random::<f64>() * total;
    for w in rings.iter().flat_map(|r| r.windows(2)) {
        let l = seg_len(w);
        if s <= l {
            let t = s / l;
            return (
                w[0].0 + t * (w[1].0 - w[0].0),
                w[0].1 + t * (w[1].1 - w[0].1),
            );
        }
        s -= l;
    }
    *rings
        .last()
        .and_then(|r| r.last())
        .expect("non-empty rings")
}

/// Random urban snapshot: CUEs uniform on the sidewalks, VUE transmitters
/// from a mobility snapshot with receivers ahead on the same lane.
pub fn build_urban_scenario(params: &UrbanParams, seed: u64) -> Result<UrbanScenario> {
    if params.cues == 0 || params.vue_pairs == 0 {
        return Err(invalid(
            "UrbanParams",
            "need at least one CUE and one VUE pair",
        ));
    }
    if params.vue_pairs > params.cues {
        return Err(invalid(
            "UrbanParams",
            format!(
                "{} VUE pairs cannot share {} resource blocks",
                params.vue_pairs, params.cues
            ),
        ));
    }
    for (name, v) in [
        ("rb_bandwidth", params.rb_bandwidth),
        ("cue_max_power", params.cue_max_power),
        ("vue_max_power", params.vue_max_power),
        ("pair_distance_cap", params.pair_distance_cap),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(invalid(
                "UrbanParams",
                format!("{name} must be positive, got {v}"),
            ));
        }
    }
    let grid = build_manhattan_grid(&params.grid)?;
    let (width, height) = grid.extent();
    let half_road = 0.5 * grid.road_width();
    if params.pair_distance_cap >= width.min(height) {
        return Err(Error::Geometry(format!(
            "pair distance cap {} m does not fit on a {width} x {height} m grid",
            params.pair_distance_cap
        )));
    }
    let (nx, ny) = grid.blocks();
    let bs = (
        (nx / 2) as f64 * params.grid.block_width,
        (ny / 2) as f64 * params.grid.block_height,
    );

    let mut rng = component_rng(seed, "urban-scenario");
    let rings = grid.sidewalks();
    let cue_positions: Vec<Point> = (0..params.cues)
        .map(|_| sample_on_rings(&rings, &mut rng))
        .collect();
    let snapshot = place_vehicles(&grid, params.vue_pairs, &mut rng);
    let vue_pairs: Vec<VuePair> = snapshot
        .vehicles
        .iter()
        .map(|v| {
            let d = params.pair_distance_cap * rng.random_range(0.1..=1.0);
            let (ux, uy) = v.heading_unit();
            let tx = v.position();
            let ahead = (tx.0 + d * ux, tx.1 + d * uy);
            let on_grid = |p: Point| {
                p.0 >= -half_road
                    && p.0 <= width + half_road
                    && p.1 >= -half_road
                    && p.1 <= height + half_road
            };
            let rx = if on_grid(ahead) {
                ahead
            } else {
                (tx.0 - d * ux, tx.1 - d * uy)
            };
            VuePair {
                tx,
                rx,
                heading: v.heading(),
            }
        })
        .collect();

    let pl = &params.pathloss;
    let gains = LinkGains {
        cue_bs: cue_positions
            .iter()
            .map(|&c| link_gain(&grid, pl, c, bs))
            .collect(),
        vue: vue_pairs
            .iter()
            .map(|p| link_gain(&grid, pl, p.tx, p.rx))
            .collect(),
        vue_bs: vue_pairs
            .iter()
            .map(|p| link_gain(&grid, pl, p.tx, bs))
            .collect(),
        cue_vue: cue_positions
            .iter()
            .map(|&c| {
                vue_pairs
                    .iter()
                    .map(|p| link_gain(&grid, pl, c, p.rx))
                    .collect()
            })
            .collect(),
    };
    let noise_power = params
        .noise_power
        .unwrap_or_else(|| thermal_noise_w(params.rb_bandwidth, params.noise_figure_db));
    Ok(UrbanScenario {
        grid,
        bs,
        cue_positions,
        gains,
        pair_distance_cap: params.pair_distance_cap,
        rb_bandwidth: params.rb_bandwidth,
        noise_power,
        cue_max_power: params.cue_max_power,
        vue_max_power: params.vue_max_power,
        qos: vec![params.qos; vue_pairs.len()],
        arrivals: vec![params.arrivals; vue_pairs.len()],
        vue_pairs,
    })
}

impl UrbanScenario {
    pub fn grid(&self) -> &ManhattanGrid {
        &self.grid
    }
    pub fn bs(&self) -> Point {
        self.bs
    }
    pub fn cue_positions(&self) -> &[Point] {
        &self.cue_positions
    }
    pub fn vue_pairs(&self) -> &[VuePair] {
        &self.vue_pairs
    }
    pub fn gains(&self) -> &LinkGains {
        &self.gains
    }
    pub fn pair_distance_cap(&self) -> f64 {
        self.pair_distance_cap
    }
    pub fn num_rbs(&self) -> usize {
        self.cue_positions.len()
    }
    pub fn num_vues(&self) -> usize {
        self.vue_pairs.len()
    }
    pub fn rb_bandwidth(&self) -> f64 {
        self.rb_bandwidth
    }
    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }
    pub fn cue_max_power(&self) -> f64 {
        self.cue_max_power
    }
    pub fn vue_max_power(&self) -> f64 {
        self.vue_max_power
    }
    pub fn qos(&self) -> &[QosRequirement] {
        &self.qos
    }
    pub fn arrivals(&self) -> &[ArrivalProcess] {
        &self.arrivals
    }

    /// Replaces the per-VUE arrival processes.
    pub fn with_arrivals(mut self, arrivals: Vec<ArrivalProcess>) -> Result<Self> {
        if arrivals.len() != self.num_vues() {
            return Err(Error::DimensionMismatch {
                expected: self.num_vues(),
                got: arrivals.len(),
            });
        }
        self.arrivals = arrivals;
        Ok(self)
    }

    /// The same scenario without VUE pair `vue`.
    pub fn without_vue(&self, vue: usize) -> Result<Self> {
        if vue >= self.num_vues() {
            return Err(invalid("UrbanScenario", format!("no VUE pair {vue}")));
        }
        let mut s = self.clone();
        s.vue_pairs.remove(vue);
        s.qos.remove(vue);
        s.arrivals.remove(vue);
        s.gains.vue.remove(vue);
        s.gains.vue_bs.remove(vue);
        for row in &mut s.gains.cue_vue {
            row.remove(vue);
        }
        Ok(s)
    }

    /// SINR of CUE `c` when it has its block to itself at full power.
    pub fn unshared_cue_sinr(&self, c: usize) -> f64 {
        self.cue_max_power * self.gains.cue_bs[c] / self.noise_power
    }

    pub fn pair_link(&self, vue: usize, rb: usize) -> PairLink {
        PairLink {
            cue_gain: self.gains.cue_bs[rb],
            vue_gain: self.gains.vue[vue],
            vue_to_bs: self.gains.vue_bs[vue],
            cue_to_vue: self.gains.cue_vue[rb][vue],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RequirementMode {
    EffectiveBandwidth,
    Static,
}

impl RequirementMode {
    pub const ALL: [RequirementMode; 2] =
        [RequirementMode::EffectiveBandwidth, RequirementMode::Static];

    pub fn name(self) -> &'static str {
        match self {
            RequirementMode::EffectiveBandwidth => "effective-bandwidth",
            RequirementMode::Static => "static",
        }
    }
}

/// Service rate VUE `vue` needs for its QoS.
pub fn vue_rate_requirement(
    scenario: &UrbanScenario,
    vue: usize,
    mode: RequirementMode,
) -> Result<f64> {
    let (qos, arr) = scenario
        .qos
        .get(vue)
        .zip(scenario.arrivals.get(vue))
        .ok_or_else(|| invalid("vue_rate_requirement", format!("no VUE pair {vue}")))?;
    match mode {
        RequirementMode::EffectiveBandwidth => min_rate_for_qos(arr, qos),
        RequirementMode::Static => static_min_rate(arr.packet_bits(), qos.latency_bound()),
    }
}

/// Gains coupling one VUE pair with the CUE of the block it reuses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairLink {
    /// CUE to base station.
    pub cue_gain: f64,
    /// VUE transmitter to VUE receiver.
    pub vue_gain: f64,
    /// VUE transmitter to base station.
    pub vue_to_bs: f64,
    /// CUE to VUE receiver.
    pub cue_to_vue: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairPowers {
    pub cue_power: f64,
    pub vue_power: f64,
    pub cue_sinr: f64,
    pub vue_sinr: f64,
}

/// Powers maximising the CUE SINR subject to the VUE SINR target and both
/// power caps, or `None` if the target is out of reach.
///
/// The CUE SINR falls with VUE power, so the VUE constraint is tight; along
/// that boundary the CUE SINR rises with CUE power until a cap binds.
pub fn pair_power_solution(
    link: &PairLink,
    vue_sinr_target: f64,
    cue_cap: f64,
    vue_cap: f64,
    noise: f64,
) -> Option<PairPowers> {
    let reach = vue_cap * link.vue_gain / vue_sinr_target;
    if reach <= noise {
        return None;
    }
    let cue_power = cue_cap.min((reach - noise) / link.cue_to_vue);
    let vue_power =
        (vue_sinr_target * (noise + cue_power * link.cue_to_vue) / link.vue_gain).min(vue_cap);
    Some(PairPowers {
        cue_power,
        vue_power,
        cue_sinr: cue_power * link.cue_gain / (noise + vue_power * link.vue_to_bs),
        vue_sinr: vue_power * link.vue_gain / (noise + cue_power * link.cue_to_vue),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SharingAssignment {
    pub mode: RequirementMode,
    /// Resource block reused by each VUE pair (injective).
    pub rb_of_vue: Vec<usize>,
    pub vue_power: Vec<f64>,
    pub vue_sinr: Vec<f64>,
    pub required_rate: Vec<f64>,
    /// Per CUE, indexed by resource block.
    pub cue_power: Vec<f64>,
    pub cue_sinr: Vec<f64>,
}

impl SharingAssignment {
    pub fn min_cue_sinr(&self) -> f64 {
        self.cue_sinr.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Shannon rate each VUE pair gets on its block.
    pub fn vue_rates(&self, bandwidth: f64) -> Vec<f64> {
        self.vue_sinr
            .iter()
            .map(|s| bandwidth * s.ln_1p() / std::f64::consts::LN_2)
            .collect()
    }
}

/// SINR target that delivers `rate` on `bandwidth` via the Shannon formula.
pub fn sinr_target(rate: f64, bandwidth: f64) -> f64 {
    (rate / bandwidth * std::f64::consts::LN_2).exp_m1() * (1.0 + SINR_MARGIN)
}

/// Max-min CUE SINR sharing with every VUE meeting its rate requirement.
pub fn allocate_sharing(
    scenario: &UrbanScenario,
    mode: RequirementMode,
) -> Result<SharingAssignment> {
    let nv = scenario.num_vues();
    let nr = scenario.num_rbs();
    if nv > nr {
        return Err(invalid(
            "allocate_sharing",
            format!("{nv} VUE pairs but only {nr} resource blocks"),
        ));
    }
    let required: Vec<f64> = (0..nv)
        .map(|v| vue_rate_requirement(scenario, v, mode))
        .collect::<Result<_>>()?;
    let solutions: Vec<Vec<Option<PairPowers>>> = (0..nv)
        .map(|v| {
            let target = sinr_target(required[v], scenario.rb_bandwidth);
            (0..nr)
                .map(|c| {
                    pair_power_solution(
                        &scenario.pair_link(v, c),
                        target,
                        scenario.cue_max_power,
                        scenario.vue_max_power,
                        scenario.noise_power,
                    )
                })
                .collect()
        })
        .collect();
    let utility: Vec<Vec<Option<f64>>> = solutions
        .iter()
        .map(|row| row.iter().map(|s| s.map(|s| s.cue_sinr)).collect())
        .collect();
    let (rb_of_vue, _) = bottleneck_assignment(&utility, nr).ok_or_else(|| {
        Error::Infeasible(format!(
            "no assignment meets the rate requirement of all {nv} VUE pairs"
        ))
    })?;

    let mut cue_power = vec![scenario.cue_max_power; nr];
    let mut cue_sinr: Vec<f64> = (0..nr).map(|c| scenario.unshared_cue_sinr(c)).collect();
    let mut vue_power = Vec::with_capacity(nv);
    let mut vue_sinr = Vec::with_capacity(nv);
    for (v, &c) in rb_of_vue.iter().enumerate() {
        let s = solutions[v][c].expect("matched pairs are feasible");
        cue_power[c] = s.cue_power;
        cue_sinr[c] = s.cue_sinr;
        vue_power.push(s.vue_power);
        vue_sinr.push(s.vue_sinr);
    }
    Ok(SharingAssignment {
        mode,
        rb_of_vue,
        vue_power,
        vue_sinr,
        required_rate: required,
        cue_power,
        cue_sinr,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VueOutcome {
    pub vue: usize,
    pub rb: usize,
    pub power: f64,
    pub service_rate: f64,
    pub latencies: LatencySampleSet,
    /// `Pr{latency > L_th}`.
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeReport {
    pub vues: Vec<VueOutcome>,
    pub min_cue_sinr: f64,
}

/// Simulates every VUE queue at the Shannon rate of its assigned link.
/// VUE `v` draws from its own stream, so schemes run with the same seed
/// see the same arrivals.
pub fn run_episode(
    scenario: &UrbanScenario,
    assignment: &SharingAssignment,
    packets: u64,
    seed: u64,
) -> Result<EpisodeReport> {
    if assignment.rb_of_vue.len() != scenario.num_vues() {
        return Err(Error::DimensionMismatch {
            expected: scenario.num_vues(),
            got: assignment.rb_of_vue.len(),
        });
    }
    let rates = assignment.vue_rates(scenario.rb_bandwidth);
    let vues = (0..scenario.num_vues())
        .into_par_iter()
        .map(|v| {
            let latencies = simulate_fifo_queue(
                &scenario.arrivals[v],
                rates[v],
                packets,
                derive_seed(seed, &format!("vue-{v}")),
            )?;
            let violation = violation_probability(&latencies, scenario.qos[v].latency_bound())?;
            Ok(VueOutcome {
                vue: v,
                rb: assignment.rb_of_vue[v],
                power: assignment.vue_power[v],
                service_rate: rates[v],
                latencies,
                violation,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EpisodeReport {
        vues,
        min_cue_sinr: assignment.min_cue_sinr(),
    })
}
