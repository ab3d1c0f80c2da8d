use urllc_lab::{parse_config, validate, Error, Experiment, ExperimentConfig, Value};

#[test]
fn minimal_outage_config_gets_defaults() {
    let cfg = parse_config("experiment = outage-sweep\n").unwrap();
    assert_eq!(cfg.experiment(), Experiment::OutageSweep);
    assert_eq!(cfg.seed(), 1);
    assert_eq!(cfg.float("packet_bits"), 256.0);
    assert_eq!(cfg.float("bandwidth_hz"), 180e3);
    assert_eq!(cfg.uints("n_rx"), &[1, 2, 3, 4]);
    assert_eq!(cfg.floats("avg_snr_db"), &[10.0, 20.0]);
    assert_eq!(cfg.float("correlation"), 0.5);
    for spec in cfg.keys() {
        assert!(cfg.value(spec.name).is_some(), "{}", spec.name);
    }
    validate(&cfg).unwrap();
}

#[test]
fn every_default_config_validates() {
    for e in Experiment::ALL {
        validate(&ExperimentConfig::defaults(e)).unwrap_or_else(|err| panic!("{e}: {err}"));
    }
}

#[test]
fn kappa_above_jam_density_names_the_constraint() {
    let text = "experiment = v2i-latency\n# sweep\nkappa = 0.05, 0.2\n";
    let cfg = parse_config(text).unwrap();
    let err = validate(&cfg).unwrap_err();
    match &err {
        Error::Validation { line, key, reason } => {
            assert_eq!(*line, Some(3));
            assert_eq!(*key, "kappa");
            assert!(reason.contains("max_density"), "{reason}");
        }
        other => panic!("unexpected {other:?}"),
    }
    assert!(err.to_string().starts_with("line 3: kappa"), "{err}");
}

#[test]
fn raised_jam_density_admits_kappa() {
    let cfg =
        parse_config("experiment = v2i-latency\nkappa = 0.2\nmax_density = 0.25\nantennas = 300")
            .unwrap();
    validate(&cfg).unwrap();
}

fn parse_err(text: &str) -> (usize, String) {
    match parse_config(text).unwrap_err() {
        Error::Parse { line, reason } => (line, reason),
        other => panic!("expected a parse error, got {other:?}"),
    }
}

#[test]
fn errors_carry_line_numbers() {
    let (line, reason) = parse_err("experiment = fbl-surface\n\nbandwith_hz = 1\n");
    assert_eq!(line, 3);
    assert!(reason.contains("unknown key"), "{reason}");

    let (line, reason) = parse_err("# c\nexperiment = fbl-surface\nlatency_points = 2.5\n");
    assert_eq!(line, 3);
    assert!(reason.contains("non-negative integer"), "{reason}");

    let (line, _) = parse_err("experiment = outage-sweep\nn_rx = 1, two\n");
    assert_eq!(line, 2);

    let (line, reason) = parse_err("experiment = outage-sweep\nseed = 1\nseed = 2\n");
    assert_eq!(line, 3);
    assert!(reason.contains("duplicate"), "{reason}");

    let (line, _) = parse_err("experiment = outage-sweep\njust words\n");
    assert_eq!(line, 2);

    let (line, reason) = parse_err("seed = 3\nexperiment = bogus\n");
    assert_eq!(line, 2);
    assert!(reason.contains("outage-sweep"), "{reason}");

    // Keys of another experiment are unknown here.
    let (line, _) = parse_err("experiment = outage-sweep\nkappa = 0.1\n");
    assert_eq!(line, 2);
}

#[test]
fn missing_experiment_is_reported() {
    assert!(matches!(
        parse_config("seed = 4\n").unwrap_err(),
        Error::MissingKey("experiment")
    ));
    assert!(matches!(
        parse_config("").unwrap_err(),
        Error::MissingKey("experiment")
    ));
}

#[test]
fn non_finite_numbers_are_type_errors() {
    let (line, _) = parse_err("experiment = fbl-surface\nbandwidth_hz = inf\n");
    assert_eq!(line, 2);
}

#[test]
fn canonical_form_is_a_fixed_point() {
    let texts = [
        "experiment = outage-sweep",
        "  experiment=v2i-latency  # trailing\nkappa=0.01,0.1 ,0.15\nnoise_power_w = 1e-13\nseed=99",
        "experiment = v2v-episode\nviolation_prob = 0.05\narrival_rate = 0.3333333333333333\n",
        "experiment = fbl-surface\nerror_prob = 1e-9\nsnr_db = -3.5\noutput_dir = some dir/x",
    ];
    for text in texts {
        let once = parse_config(text).unwrap().to_canonical_string();
        let cfg = parse_config(&once).unwrap();
        assert_eq!(cfg.to_canonical_string(), once);
        let original = parse_config(text).unwrap();
        for spec in cfg.keys() {
            assert_eq!(
                cfg.value(spec.name),
                original.value(spec.name),
                "{}",
                spec.name
            );
        }
    }
}

#[test]
fn canonical_values_survive_reparse() {
    let text = "experiment = v2i-latency\nkappa = 0.1, 0.15\nref_gain = 3.3e-7\n";
    let a = parse_config(text).unwrap();
    let b = parse_config(&a.to_canonical_string()).unwrap();
    for spec in a.keys() {
        assert_eq!(a.value(spec.name), b.value(spec.name), "{}", spec.name);
    }
    assert_eq!(b.float_or_auto("ref_gain"), Some(3.3e-7));
    assert_eq!(b.float_or_auto("noise_power_w"), None);
}

#[test]
fn overrides_are_type_checked() {
    let mut cfg = ExperimentConfig::defaults(Experiment::FblSurface);
    cfg.set("seed", Value::UInt(17)).unwrap();
    assert_eq!(cfg.seed(), 17);
    assert_eq!(cfg.line_of("seed"), None);
    assert!(cfg.set("seed", Value::Float(1.0)).is_err());
    assert!(cfg.set("kappa", Value::FloatList(vec![0.1])).is_err());
}

#[test]
fn model_preconditions_surface_at_their_key() {
    let cases = [
        (
            "experiment = outage-sweep\nlatency_min_ms = 0.01\n",
            "latency_min_ms",
        ),
        (
            "experiment = outage-sweep\ncorrelation = 1.5\n",
            "correlation",
        ),
        ("experiment = outage-sweep\nmc_trials = 10\n", "mc_trials"),
        ("experiment = fbl-surface\nerror_prob = 1.5\n", "error_prob"),
        (
            "experiment = fbl-surface\nlatency_max_ms = 0.001\n",
            "latency_max_ms",
        ),
        (
            "experiment = v2i-latency\nplacement = zigzag\n",
            "placement",
        ),
        ("experiment = v2i-latency\nantennas = 10\n", "kappa"),
        ("experiment = v2v-episode\nvue_pairs = 9\n", "vue_pairs"),
        (
            "experiment = v2v-episode\nviolation_prob = 1\n",
            "violation_prob",
        ),
        ("experiment = v2v-episode\npackets = 0\n", "packets"),
    ];
    for (text, expected) in cases {
        match validate(&parse_config(text).unwrap()) {
            Err(Error::Validation { key, line, .. }) => {
                assert_eq!(key, expected, "{text}");
                if key != "kappa" {
                    assert_eq!(line, Some(2), "{text}");
                }
            }
            other => panic!("{text}: {other:?}"),
        }
    }
}
