//! The four batch experiments and their CSV outputs.
//!
//! | experiment     | files                                                   |
//! |----------------|---------------------------------------------------------|
//! | `outage-sweep` | `outage.csv`, `outage_correlated.csv`, `lrtd.csv`       |
//! | `fbl-surface`  | `fbl_surface.csv`                                       |
//! | `v2i-latency`  | `v2i_latency.csv`, `v2i_powers.csv`                     |
//! | `v2v-episode`  | `v2v_histogram.csv`, `v2v_summary.csv`                  |
//!
//! `outage_correlated.csv` is only written when `correlation > 0`.
//! Infeasible points are written as `inf`, missing fits as `nan`.

use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use urllc_core::fbl::{fbl_rate, shannon_rate, FblQuery, LatencyBounds};
use urllc_core::numerics::{db_to_linear, linear_to_db};
use urllc_core::outage::{
    log_spaced, snr_threshold, tradeoff_sweep, DiversityChannel, McSettings, ResourceGridConfig,
    MIN_MC_TRIALS,
};
use urllc_core::queueing::{
    latency_histogram, ArrivalProcess, LatencySampleSet, QosRequirement, HISTOGRAM_BIN_S,
};
use urllc_core::rng::derive_seed;
use urllc_core::traffic::{ManhattanGridSpec, Placement, TurnProbabilities, UnderwoodModel};
use urllc_core::v2i::{density_sweep, FreewayParams, UserQos};
use urllc_core::v2v::{
    allocate_sharing, build_urban_scenario, run_episode, RequirementMode, UrbanParams,
    UrbanPathLoss,
};

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{Error, Result};

/// Files written by one run, in write order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
}

struct Table {
    name: &'static str,
    header: &'static [&'static str],
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &'static str, header: &'static [&'static str]) -> Self {
        Self {
            name,
            header,
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Shortest round-trip decimal form; `inf`/`nan` for non-finite values.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:?}")
    }
}

fn write_table(dir: &Path, table: &Table) -> Result<PathBuf> {
    let path = dir.join(table.name);
    let csv_err = |source| Error::Csv {
        path: path.clone(),
        source,
    };
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(&path)
        .map_err(csv_err)?;
    w.write_record(table.header).map_err(csv_err)?;
    for row in &table.rows {
        w.write_record(row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    info!("wrote {} ({} rows)", path.display(), table.rows.len());
    Ok(path)
}

/// Attributes a model error to the config key that caused it.
fn at<T>(cfg: &ExperimentConfig, key: &'static str, r: urllc_core::Result<T>) -> Result<T> {
    r.map_err(|e| cfg.invalid(key, e.to_string()))
}

fn latency_grid(cfg: &ExperimentConfig) -> Result<Vec<f64>> {
    let (lo, hi) = (cfg.float("latency_min_ms"), cfg.float("latency_max_ms"));
    let points = cfg.uint("latency_points") as usize;
    if !(lo > 0.0) {
        return Err(cfg.invalid("latency_min_ms", format!("must be > 0, got {lo}")));
    }
    if points == 0 {
        return Err(cfg.invalid("latency_points", "must be at least 1"));
    }
    if points > 1 && !(hi > lo) {
        return Err(cfg.invalid(
            "latency_max_ms",
            format!("must exceed latency_min_ms = {lo}, got {hi}"),
        ));
    }
    Ok(log_spaced(lo * 1e-3, hi * 1e-3, points))
}

struct OutagePlan {
    grid: ResourceGridConfig,
    latencies: Vec<f64>,
    /// `(n_rx, avg_snr_db)` in output order.
    curves: Vec<(u32, f64)>,
    correlation: f64,
    mc: McSettings,
}

fn outage_plan(cfg: &ExperimentConfig) -> Result<OutagePlan> {
    let numerology = u8::try_from(cfg.uint("numerology"))
        .map_err(|_| cfg.invalid("numerology", "out of range 0..=6"))?;
    let grid = at(
        cfg,
        "numerology",
        ResourceGridConfig::with_numerology(
            numerology,
            cfg.float("bandwidth_hz"),
            cfg.float("packet_bits"),
        ),
    )?;
    let latencies = latency_grid(cfg)?;
    at(cfg, "latency_min_ms", snr_threshold(&grid, latencies[0]))?;
    let correlation = cfg.float("correlation");
    let mut curves = Vec::new();
    for &n in cfg.uints("n_rx") {
        let n_rx = u32::try_from(n).map_err(|_| cfg.invalid("n_rx", "too many antennas"))?;
        for &snr_db in cfg.floats("avg_snr_db") {
            at(
                cfg,
                "n_rx",
                DiversityChannel::iid(n_rx, db_to_linear(snr_db)),
            )?;
            at(
                cfg,
                "correlation",
                DiversityChannel::new(n_rx, db_to_linear(snr_db), correlation),
            )?;
            curves.push((n_rx, snr_db));
        }
    }
    let trials = cfg.uint("mc_trials");
    if correlation > 0.0 && trials < MIN_MC_TRIALS {
        return Err(cfg.invalid(
            "mc_trials",
            format!("need at least {MIN_MC_TRIALS} trials, got {trials}"),
        ));
    }
    Ok(OutagePlan {
        grid,
        latencies,
        curves,
        correlation,
        mc: McSettings {
            trials,
            seed: cfg.seed(),
        },
    })
}

fn run_outage(plan: &OutagePlan) -> Result<Vec<Table>> {
    let header = &["latency_ms", "n_rx", "avg_snr_db", "outage"];
    let mut iid = Table::new("outage.csv", header);
    let mut correlated = Table::new("outage_correlated.csv", header);
    let mut lrtd = Table::new("lrtd.csv", &["n_rx", "avg_snr_db", "correlation", "lrtd"]);
    for &(n_rx, snr_db) in &plan.curves {
        let mut variants = vec![(0.0, &mut iid)];
        if plan.correlation > 0.0 {
            variants.push((plan.correlation, &mut correlated));
        }
        for (c, table) in variants {
            let ch = DiversityChannel::new(n_rx, db_to_linear(snr_db), c)?;
            let curve = tradeoff_sweep(&plan.grid, &ch, &plan.latencies, &plan.mc)?;
            for &(latency, outage) in curve.points() {
                table.push(vec![
                    format_float(latency * 1e3),
                    n_rx.to_string(),
                    format_float(snr_db),
                    format_float(outage),
                ]);
            }
            lrtd.push(vec![
                n_rx.to_string(),
                format_float(snr_db),
                format_float(c),
                format_float(curve.lrtd().unwrap_or(f64::NAN)),
            ]);
        }
    }
    let mut tables = vec![iid];
    if plan.correlation > 0.0 {
        tables.push(correlated);
    }
    tables.push(lrtd);
    Ok(tables)
}

struct FblPlan {
    bandwidth: f64,
    snr_db: Vec<f64>,
    error_probs: Vec<f64>,
    latencies: Vec<f64>,
}

fn fbl_plan(cfg: &ExperimentConfig) -> Result<FblPlan> {
    let bandwidth = cfg.float("bandwidth_hz");
    let latencies = latency_grid(cfg)?;
    for &snr_db in cfg.floats("snr_db") {
        at(
            cfg,
            "snr_db",
            FblQuery::new(db_to_linear(snr_db), latencies[0], bandwidth, 0.1),
        )?;
    }
    for &eps in cfg.floats("error_prob") {
        at(
            cfg,
            "error_prob",
            FblQuery::new(1.0, latencies[0], bandwidth, eps),
        )?;
    }
    Ok(FblPlan {
        bandwidth,
        snr_db: cfg.floats("snr_db").to_vec(),
        error_probs: cfg.floats("error_prob").to_vec(),
        latencies,
    })
}

fn run_fbl(plan: &FblPlan) -> Result<Vec<Table>> {
    let mut t = Table::new(
        "fbl_surface.csv",
        &[
            "latency_ms",
            "error_prob",
            "snr_db",
            "fbl_rate_kbps",
            "shannon_rate_kbps",
        ],
    );
    for &snr_db in &plan.snr_db {
        let snr = db_to_linear(snr_db);
        let shannon = shannon_rate(snr, plan.bandwidth);
        for &eps in &plan.error_probs {
            for &latency in &plan.latencies {
                let q = FblQuery::new(snr, latency, plan.bandwidth, eps)?;
                t.push(vec![
                    format_float(latency * 1e3),
                    format_float(eps),
                    format_float(snr_db),
                    format_float(fbl_rate(&q) / 1e3),
                    format_float(shannon / 1e3),
                ]);
            }
        }
    }
    Ok(vec![t])
}

struct V2iPlan {
    params: FreewayParams,
    kappas: Vec<f64>,
    qos: UserQos,
}

fn v2i_plan(cfg: &ExperimentConfig) -> Result<V2iPlan> {
    let model = at(
        cfg,
        "max_density",
        UnderwoodModel::new(cfg.float("free_flow_kmh"), cfg.float("max_density")),
    )?;
    let kappas = cfg.floats("kappa").to_vec();
    if let Some(&k) = kappas
        .iter()
        .find(|&&k| !(k > 0.0 && k <= model.max_density()))
    {
        return Err(cfg.invalid(
            "kappa",
            format!(
                "kappa = {k} violates 0 < kappa <= max_density = {}",
                model.max_density()
            ),
        ));
    }
    let placement = match cfg.text("placement") {
        "equispaced" => Placement::Equispaced,
        "random" => Placement::UniformRandom {
            seed: derive_seed(cfg.seed(), "v2i-placement"),
        },
        other => {
            return Err(cfg.invalid(
                "placement",
                format!("expected `equispaced` or `random`, got `{other}`"),
            ))
        }
    };
    let cap_ms = cfg.float("latency_cap_ms");
    if !(cap_ms > 0.0) {
        return Err(cfg.invalid("latency_cap_ms", format!("must be > 0, got {cap_ms}")));
    }
    let params = FreewayParams {
        road_length: cfg.float("road_length_m"),
        bs_offset: cfg.float("bs_offset_m"),
        model,
        antennas: cfg.uint("antennas") as usize,
        bandwidth: cfg.float("bandwidth_hz"),
        total_power: db_to_linear(cfg.float("total_power_dbw")),
        noise_power: cfg.float_or_auto("noise_power_w"),
        noise_figure_db: cfg.float("noise_figure_db"),
        pathloss_exponent: cfg.float("pathloss_exponent"),
        ref_gain: cfg.float_or_auto("ref_gain"),
        reference_snr_db: cfg.float("reference_snr_db"),
        reference_density: cfg.float("reference_density"),
        placement,
        latency_bounds: LatencyBounds {
            floor_s: None,
            cap_s: cap_ms * 1e-3,
        },
    };
    if !(params.bandwidth > 0.0) {
        return Err(cfg.invalid("bandwidth_hz", "must be > 0"));
    }
    if params.noise_power.is_some_and(|n| !(n > 0.0)) {
        return Err(cfg.invalid("noise_power_w", "must be > 0"));
    }
    at(cfg, "pathloss_exponent", params.pathloss())?;
    for &k in &kappas {
        at(cfg, "kappa", params.scenario(k))?;
    }
    let qos = at(
        cfg,
        "error_prob",
        UserQos::new(cfg.float("rate_kbps") * 1e3, cfg.float("error_prob")),
    )?;
    Ok(V2iPlan {
        params,
        kappas,
        qos,
    })
}

fn run_v2i(plan: &V2iPlan) -> Result<Vec<Table>> {
    let rows = density_sweep(&plan.params, &plan.kappas, plan.qos)?;
    let mut latency = Table::new(
        "v2i_latency.csv",
        &["kappa", "scheme", "precoder", "max_latency_ms"],
    );
    let mut powers = Table::new(
        "v2i_powers.csv",
        &["kappa", "scheme", "precoder", "user", "power_w"],
    );
    for row in &rows {
        let key = [
            format_float(row.density),
            row.scheme.name().to_string(),
            row.precoder.name().to_string(),
        ];
        let mut line = key.to_vec();
        line.push(format_float(
            row.max_latency.map_or(f64::INFINITY, |l| l * 1e3),
        ));
        latency.push(line);
        for (user, &p) in row.powers.iter().enumerate() {
            let mut line = key.to_vec();
            line.extend([user.to_string(), format_float(p)]);
            powers.push(line);
        }
    }
    Ok(vec![latency, powers])
}

struct V2vPlan {
    params: UrbanParams,
    packets: u64,
    histogram_bins: usize,
    seed: u64,
}

fn v2v_plan(cfg: &ExperimentConfig) -> Result<V2vPlan> {
    let grid = ManhattanGridSpec {
        blocks_x: cfg.uint("blocks_x") as usize,
        blocks_y: cfg.uint("blocks_y") as usize,
        block_width: cfg.float("block_width_m"),
        block_height: cfg.float("block_height_m"),
        building: None,
        sidewalk_width: cfg.float("sidewalk_width_m"),
        lanes_per_direction: cfg.uint("lanes_per_direction") as usize,
        lane_width: cfg.float("lane_width_m"),
        vehicle_speed_kmh: cfg.float("vehicle_speed_kmh"),
        turns: TurnProbabilities {
            left: cfg.float("turn_left"),
            straight: cfg.float("turn_straight"),
            right: cfg.float("turn_right"),
        },
    };
    let qos = at(
        cfg,
        "violation_prob",
        QosRequirement::new(
            cfg.float("latency_threshold_ms") * 1e-3,
            cfg.float("violation_prob"),
        ),
    )?;
    let arrivals = at(
        cfg,
        "arrival_rate",
        ArrivalProcess::poisson(cfg.float("arrival_rate"), cfg.float("packet_bits")),
    )?;
    let noise_power = cfg.float_or_auto("noise_power_w");
    if noise_power.is_some_and(|n| !(n > 0.0)) {
        return Err(cfg.invalid("noise_power_w", "must be > 0"));
    }
    let params = UrbanParams {
        grid,
        cues: cfg.uint("cues") as usize,
        vue_pairs: cfg.uint("vue_pairs") as usize,
        pair_distance_cap: cfg.float("pair_distance_cap_m"),
        rb_bandwidth: cfg.float("rb_bandwidth_hz"),
        noise_figure_db: cfg.float("noise_figure_db"),
        noise_power,
        cue_max_power: db_to_linear(cfg.float("cue_max_power_dbm") - 30.0),
        vue_max_power: db_to_linear(cfg.float("vue_max_power_dbm") - 30.0),
        pathloss: UrbanPathLoss {
            los_exponent: cfg.float("los_exponent"),
            nlos_exponent: cfg.float("nlos_exponent"),
            nlos_penalty_db: cfg.float("nlos_penalty_db"),
            ref_gain_db: cfg.float("ref_gain_db"),
            reference_distance: cfg.float("reference_distance_m"),
        },
        qos,
        arrivals,
    };
    if params.vue_pairs > params.cues {
        return Err(cfg.invalid(
            "vue_pairs",
            format!(
                "{} VUE pairs need at most one RB each but only {} CUEs (RBs) exist",
                params.vue_pairs, params.cues
            ),
        ));
    }
    at(cfg, "cues", build_urban_scenario(&params, cfg.seed()))?;
    let packets = cfg.uint("packets");
    if packets == 0 {
        return Err(cfg.invalid("packets", "must be at least 1"));
    }
    let max_ms = cfg.float("histogram_max_ms");
    let bin_ms = HISTOGRAM_BIN_S * 1e3;
    if !(max_ms >= bin_ms) {
        return Err(cfg.invalid(
            "histogram_max_ms",
            format!("must cover at least one {bin_ms} ms bin, got {max_ms}"),
        ));
    }
    Ok(V2vPlan {
        params,
        packets,
        histogram_bins: (max_ms / bin_ms).ceil() as usize,
        seed: cfg.seed(),
    })
}

fn run_v2v(plan: &V2vPlan) -> Result<Vec<Table>> {
    let scenario = build_urban_scenario(&plan.params, plan.seed)?;
    let mut histogram = Table::new(
        "v2v_histogram.csv",
        &["bin_start_ms", "bin_end_ms", "probability", "scheme"],
    );
    let mut summary = Table::new(
        "v2v_summary.csv",
        &[
            "scheme",
            "vue_id",
            "violation_prob",
            "rb",
            "power_w",
            "min_cue_sinr_db",
        ],
    );
    for mode in RequirementMode::ALL {
        let assignment = allocate_sharing(&scenario, mode)?;
        let report = run_episode(&scenario, &assignment, plan.packets, plan.seed)?;
        let sinr_db = format_float(linear_to_db(report.min_cue_sinr));
        for vue in &report.vues {
            summary.push(vec![
                mode.name().to_string(),
                vue.vue.to_string(),
                format_float(vue.violation),
                vue.rb.to_string(),
                format_float(vue.power),
                sinr_db.clone(),
            ]);
        }
        let pooled = LatencySampleSet::new(
            report
                .vues
                .iter()
                .flat_map(|v| v.latencies.samples().iter().copied())
                .collect(),
        )?;
        for bin in latency_histogram(&pooled, HISTOGRAM_BIN_S, plan.histogram_bins)? {
            histogram.push(vec![
                format_float(bin.start * 1e3),
                format_float(bin.end * 1e3),
                format_float(bin.probability),
                mode.name().to_string(),
            ]);
        }
    }
    Ok(vec![histogram, summary])
}

/// Checks every parameter against the target model's preconditions
/// without running anything expensive.
pub fn validate(cfg: &ExperimentConfig) -> Result<()> {
    match cfg.experiment() {
        Experiment::OutageSweep => outage_plan(cfg).map(drop),
        Experiment::FblSurface => fbl_plan(cfg).map(drop),
        Experiment::V2iLatency => v2i_plan(cfg).map(drop),
        Experiment::V2vEpisode => v2v_plan(cfg).map(drop),
    }
}

/// Validates, runs and writes the CSVs into `cfg.output_dir()`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunSummary> {
    let tables = match cfg.experiment() {
        Experiment::OutageSweep => run_outage(&outage_plan(cfg)?)?,
        Experiment::FblSurface => run_fbl(&fbl_plan(cfg)?)?,
        Experiment::V2iLatency => run_v2i(&v2i_plan(cfg)?)?,
        Experiment::V2vEpisode => run_v2v(&v2v_plan(cfg)?)?,
    };
    let dir = Path::new(cfg.output_dir());
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let files = tables
        .iter()
        .map(|t| write_table(dir, t))
        .collect::<Result<_>>()?;
    Ok(RunSummary { files })
}
