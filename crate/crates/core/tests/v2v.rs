mod common;

use rand::Rng;
use urllc_core::queueing::{min_rate_for_qos, static_min_rate, ArrivalProcess, QosRequirement};
use urllc_core::rng::component_rng;
use urllc_core::v2v::*;
use urllc_core::Error;

fn params(cues: usize, vues: usize) -> UrbanParams {
    UrbanParams {
        cues,
        vue_pairs: vues,
        ..Default::default()
    }
}

#[test]
fn scenario_deterministic_and_well_placed() {
    let p = params(8, 4);
    let a = build_urban_scenario(&p, 3).unwrap();
    assert_eq!(a, build_urban_scenario(&p, 3).unwrap());
    assert_ne!(a, build_urban_scenario(&p, 4).unwrap());
    assert_eq!(a.num_rbs(), 8);
    for &c in a.cue_positions() {
        assert!(a.grid().distance_to_sidewalks(c) < 1e-9, "{c:?}");
    }
    for v in a.vue_pairs() {
        let d = (v.tx.0 - v.rx.0).hypot(v.tx.1 - v.rx.1);
        assert!(d <= a.pair_distance_cap() + 1e-9);
        assert!(a.grid().distance_to_lanes(v.tx) < 1e-6);
        assert!(a.grid().distance_to_lanes(v.rx) < 1e-6);
    }
    let g = a.gains();
    assert!(g
        .cue_bs
        .iter()
        .chain(&g.vue)
        .chain(&g.vue_bs)
        .all(|&x| x > 0.0));
    assert!(g.cue_vue.iter().flatten().all(|&x| x > 0.0));
}

#[test]
fn scenario_rejects_bad_counts() {
    assert!(build_urban_scenario(&params(2, 3), 1).is_err());
    assert!(build_urban_scenario(&params(0, 0), 1).is_err());
    let p = UrbanParams {
        pair_distance_cap: 5000.0,
        ..Default::default()
    };
    assert!(matches!(
        build_urban_scenario(&p, 1),
        Err(Error::Geometry(_))
    ));
}

#[test]
fn nlos_matches_separating_axis_oracle() {
    let s = build_urban_scenario(&params(8, 4), 9).unwrap();
    let grid = s.grid();
    let mut rng = component_rng(10, "nlos");
    let mut nlos = 0;
    for _ in 0..20_000 {
        // Start on a sidewalk corner so both LOS and NLOS links are common.
        let rings = grid.sidewalks();
        let ring = &rings[rng.random_range(0..rings.len())];
        let corner = ring[rng.random_range(0..4)];
        let a = (
            corner.0 + rng.random_range(-5.0..5.0),
            corner.1 + rng.random_range(-5.0..5.0),
        );
        let len = rng.random::<f64>() * 150.0;
        let ang = rng.random::<f64>() * std::f64::consts::TAU;
        let b = (a.0 + len * ang.cos(), a.1 + len * ang.sin());
        let want = grid
            .buildings()
            .iter()
            .any(|r| common::segment_hits_rect(a, b, r));
        assert_eq!(is_nlos(grid, a, b), want, "{a:?} {b:?}");
        nlos += want as usize;
    }
    assert!(nlos > 2000 && nlos < 18_000, "{nlos}");
    // Along a lane line nothing blocks.
    let v = s.vue_pairs()[0];
    assert!(!is_nlos(grid, v.tx, v.rx));
}

#[test]
fn pair_powers_match_grid_search() {
    let mut rng = component_rng(7, "pair-grid");
    let (cap, noise, steps) = (0.2, 1e-13, 1000usize);
    let dp = cap / steps as f64;
    for _ in 0..20 {
        let link = PairLink {
            cue_gain: 10f64.powf(rng.random_range(-13.0..-9.0)),
            vue_gain: 10f64.powf(rng.random_range(-10.0..-7.0)),
            vue_to_bs: 10f64.powf(rng.random_range(-13.0..-9.0)),
            cue_to_vue: 10f64.powf(rng.random_range(-13.0..-9.0)),
        };
        let target = rng.random_range(0.5..20.0);
        let closed = pair_power_solution(&link, target, cap, cap, noise);
        let mut best = f64::NEG_INFINITY;
        for i in 0..=steps {
            let pc = i as f64 * dp;
            // Smallest VUE power on the grid meeting the target.
            let need = target * (noise + pc * link.cue_to_vue) / link.vue_gain;
            let j = (need / dp).ceil();
            if j > steps as f64 {
                continue;
            }
            let pv = j * dp;
            best = best.max(pc * link.cue_gain / (noise + pv * link.vue_to_bs));
        }
        match closed {
            None => assert!(best <= 0.0 || best == f64::NEG_INFINITY, "{best}"),
            Some(s) => {
                assert!(s.cue_power <= cap && s.vue_power <= cap);
                assert!(s.vue_sinr >= target * (1.0 - 1e-12));
                assert!(
                    s.cue_sinr >= best * (1.0 - 1e-12),
                    "{} < {best}",
                    s.cue_sinr
                );
                // Grid neighbour of the optimum.
                let pc = (s.cue_power / dp).floor() * dp;
                let pv =
                    ((target * (noise + pc * link.cue_to_vue) / link.vue_gain) / dp).ceil() * dp;
                if pv <= cap {
                    let near = pc * link.cue_gain / (noise + pv * link.vue_to_bs);
                    assert!(best >= near * (1.0 - 1e-12));
                }
            }
        }
    }
}

#[test]
fn single_pair_uses_closed_form() {
    let s = build_urban_scenario(&params(1, 1), 2).unwrap();
    let a = allocate_sharing(&s, RequirementMode::EffectiveBandwidth).unwrap();
    assert_eq!(a.rb_of_vue, vec![0]);
    let target = sinr_target(a.required_rate[0], s.rb_bandwidth());
    let want = pair_power_solution(
        &s.pair_link(0, 0),
        target,
        s.cue_max_power(),
        s.vue_max_power(),
        s.noise_power(),
    )
    .unwrap();
    assert_eq!(a.cue_power[0], want.cue_power);
    assert_eq!(a.vue_power[0], want.vue_power);
}

fn enumerate_best(s: &UrbanScenario, mode: RequirementMode) -> Option<f64> {
    let target: Vec<f64> = (0..s.num_vues())
        .map(|v| sinr_target(vue_rate_requirement(s, v, mode).unwrap(), s.rb_bandwidth()))
        .collect();
    let mut best: Option<f64> = None;
    'outer: for m in common::injections(s.num_vues(), s.num_rbs()) {
        let mut sinr: Vec<f64> = (0..s.num_rbs()).map(|c| s.unshared_cue_sinr(c)).collect();
        for (v, &c) in m.iter().enumerate() {
            let link = s.pair_link(v, c);
            match pair_power_solution(
                &link,
                target[v],
                s.cue_max_power(),
                s.vue_max_power(),
                s.noise_power(),
            ) {
                Some(p) => sinr[c] = p.cue_sinr,
                None => continue 'outer,
            }
        }
        let obj = sinr.iter().copied().fold(f64::INFINITY, f64::min);
        best = Some(best.map_or(obj, |b: f64| b.max(obj)));
    }
    best
}

#[test]
fn bottleneck_equals_enumeration_small() {
    let mut rng = component_rng(31, "v2v-enum");
    for i in 0..30 {
        let cues = rng.random_range(1..=5);
        let vues = rng.random_range(1..=cues);
        let s = build_urban_scenario(&params(cues, vues), 1000 + i).unwrap();
        for mode in RequirementMode::ALL {
            let brute = enumerate_best(&s, mode);
            match allocate_sharing(&s, mode) {
                Ok(a) => assert_eq!(Some(a.min_cue_sinr()), brute),
                Err(Error::Infeasible(_)) => assert_eq!(brute, None),
                Err(e) => panic!("{e}"),
            }
        }
    }
}

#[test]
fn assignment_injective_and_within_caps() {
    for seed in 0..10 {
        let s = build_urban_scenario(&params(8, 6), seed).unwrap();
        for mode in RequirementMode::ALL {
            let Ok(a) = allocate_sharing(&s, mode) else {
                continue;
            };
            let mut rbs = a.rb_of_vue.clone();
            rbs.sort();
            rbs.dedup();
            assert_eq!(rbs.len(), s.num_vues());
            assert!(a.vue_power.iter().all(|&p| p <= s.vue_max_power()));
            assert!(a.cue_power.iter().all(|&p| p <= s.cue_max_power()));
            for (r, req) in a.vue_rates(s.rb_bandwidth()).iter().zip(&a.required_rate) {
                assert!(r >= req, "{r} < {req}");
            }
        }
    }
}

#[test]
fn removing_a_vue_never_hurts_cues() {
    for seed in 0..10 {
        let s = build_urban_scenario(&params(6, 4), seed).unwrap();
        let Ok(full) = allocate_sharing(&s, RequirementMode::EffectiveBandwidth) else {
            continue;
        };
        for v in 0..s.num_vues() {
            let fewer = s.without_vue(v).unwrap();
            let a = allocate_sharing(&fewer, RequirementMode::EffectiveBandwidth).unwrap();
            assert!(a.min_cue_sinr() >= full.min_cue_sinr());
        }
    }
}

#[test]
fn effective_bandwidth_rate_dominates_static() {
    for lambda in [0.5, 1.0, 10.0, 50.0, 200.0] {
        for bits in [256.0, 2048.0, 8192.0] {
            for l in [0.01, 0.1, 1.0] {
                for eps in [1e-5, 0.05, 0.5] {
                    if lambda * bits < bits / l {
                        continue;
                    }
                    let arr = ArrivalProcess::poisson(lambda, bits).unwrap();
                    let qos = QosRequirement::new(l, eps).unwrap();
                    assert!(
                        min_rate_for_qos(&arr, &qos).unwrap() >= static_min_rate(bits, l).unwrap()
                    );
                }
            }
        }
    }
}

fn episode(lambda: f64, mode: RequirementMode, seed: u64) -> Vec<f64> {
    let s = build_urban_scenario(&params(6, 3), 5).unwrap();
    let n = s.num_vues();
    let s = s
        .with_arrivals(vec![ArrivalProcess::poisson(lambda, 2048.0).unwrap(); n])
        .unwrap();
    let a = allocate_sharing(&s, mode).unwrap();
    run_episode(&s, &a, 200_000, seed)
        .unwrap()
        .vues
        .iter()
        .map(|v| v.violation)
        .collect()
}

#[test]
fn episode_violation_by_mode() {
    let eb = episode(1.0, RequirementMode::EffectiveBandwidth, 8);
    assert!(eb.iter().all(|&v| v <= 0.05), "{eb:?}");
    let st = episode(5.0, RequirementMode::Static, 8);
    assert!(st.iter().any(|&v| v > 0.05), "{st:?}");
}

#[test]
fn effective_bandwidth_dominates_static_paired() {
    for lambda in [0.5, 1.0, 2.0, 5.0] {
        let eb = episode(lambda, RequirementMode::EffectiveBandwidth, 21);
        let st = episode(lambda, RequirementMode::Static, 21);
        for (e, s) in eb.iter().zip(&st) {
            assert!(e <= s, "lambda={lambda}: {e} > {s}");
        }
    }
}

#[test]
fn silent_vue_never_violates() {
    for mode in RequirementMode::ALL {
        let v = episode(0.0, mode, 1);
        assert!(v.iter().all(|&x| x == 0.0), "{mode:?} {v:?}");
    }
}

#[test]
fn episode_is_reproducible() {
    let s = build_urban_scenario(&params(6, 3), 5).unwrap();
    let a = allocate_sharing(&s, RequirementMode::Static).unwrap();
    assert_eq!(
        run_episode(&s, &a, 10_000, 4).unwrap(),
        run_episode(&s, &a, 10_000, 4).unwrap()
    );
}
