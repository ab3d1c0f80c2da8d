//! Latency, reliability and data-rate requirement classes of the typical
//! vehicular use cases.
//!
//! "Medium" latency and reliability carry no numeric bound and are
//! represented as unbounded.

use urllc_core::queueing::QosRequirement;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pattern {
    V2vV2p,
    V2iV2n,
}

impl Pattern {
    pub fn name(self) -> &'static str {
        match self {
            Pattern::V2vV2p => "V2V and V2P",
            Pattern::V2iV2n => "V2I and V2N",
        }
    }
}

/// Closed interval `[lower, upper]`; `lower = 0` when only an upper bound
/// is stated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatencyClass {
    UltraLow,
    Low,
    Medium,
}

impl LatencyClass {
    pub fn name(self) -> &'static str {
        match self {
            LatencyClass::UltraLow => "ultra-low",
            LatencyClass::Low => "low",
            LatencyClass::Medium => "medium",
        }
    }

    /// Seconds.
    pub fn bound(self) -> Option<Bound> {
        match self {
            LatencyClass::UltraLow => Some(Bound {
                lower: 0.0,
                upper: 1e-3,
            }),
            LatencyClass::Low => Some(Bound {
                lower: 1e-3,
                upper: 5e-3,
            }),
            LatencyClass::Medium => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReliabilityClass {
    UltraHigh,
    High,
    Medium,
}

impl ReliabilityClass {
    pub fn name(self) -> &'static str {
        match self {
            ReliabilityClass::UltraHigh => "ultra-high",
            ReliabilityClass::High => "high",
            ReliabilityClass::Medium => "medium",
        }
    }

    /// Error (violation) probability.
    pub fn bound(self) -> Option<Bound> {
        match self {
            ReliabilityClass::UltraHigh => Some(Bound {
                lower: 0.0,
                upper: 1e-5,
            }),
            ReliabilityClass::High => Some(Bound {
                lower: 1e-5,
                upper: 1e-3,
            }),
            ReliabilityClass::Medium => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateClass {
    Low,
    Medium,
    High,
    UltraHigh,
}

impl RateClass {
    pub fn name(self) -> &'static str {
        match self {
            RateClass::Low => "low",
            RateClass::Medium => "medium",
            RateClass::High => "high",
            RateClass::UltraHigh => "ultra-high",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RequirementPreset {
    pub name: &'static str,
    pub pattern: Pattern,
    pub latency: LatencyClass,
    pub reliability: ReliabilityClass,
    pub data_rate: RateClass,
}

impl RequirementPreset {
    /// The loosest requirement inside both classes, if both are bounded.
    pub fn qos(&self) -> Option<QosRequirement> {
        let latency = self.latency.bound()?.upper;
        let eps = self.reliability.bound()?.upper;
        QosRequirement::new(latency, eps).ok()
    }
}

const fn preset(
    name: &'static str,
    pattern: Pattern,
    latency: LatencyClass,
    reliability: ReliabilityClass,
    data_rate: RateClass,
) -> RequirementPreset {
    RequirementPreset {
        name,
        pattern,
        latency,
        reliability,
        data_rate,
    }
}

const PRESETS: [RequirementPreset; 6] = [
    preset(
        "driving-and-road-safety",
        Pattern::V2vV2p,
        LatencyClass::UltraLow,
        ReliabilityClass::UltraHigh,
        RateClass::Low,
    ),
    preset(
        "cooperative-awareness-and-control",
        Pattern::V2vV2p,
        LatencyClass::UltraLow,
        ReliabilityClass::UltraHigh,
        RateClass::Medium,
    ),
    preset(
        "mobility-as-a-service",
        Pattern::V2vV2p,
        LatencyClass::Medium,
        ReliabilityClass::Medium,
        RateClass::High,
    ),
    preset(
        "traffic-efficiency",
        Pattern::V2iV2n,
        LatencyClass::Low,
        ReliabilityClass::High,
        RateClass::Low,
    ),
    preset(
        "periodic-report",
        Pattern::V2iV2n,
        LatencyClass::Low,
        ReliabilityClass::High,
        RateClass::Medium,
    ),
    preset(
        "social-entertainment-on-the-road",
        Pattern::V2iV2n,
        LatencyClass::Medium,
        ReliabilityClass::Medium,
        RateClass::UltraHigh,
    ),
];

pub fn list_presets() -> &'static [RequirementPreset] {
    &PRESETS
}

pub fn find_preset(name: &str) -> Option<&'static RequirementPreset> {
    PRESETS.iter().find(|p| p.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_positive_and_ordered() {
        for p in list_presets() {
            for b in [p.latency.bound(), p.reliability.bound()]
                .into_iter()
                .flatten()
            {
                assert!(
                    b.upper > 0.0 && b.lower >= 0.0 && b.lower < b.upper,
                    "{}",
                    p.name
                );
            }
        }
    }

    #[test]
    fn qos_only_for_bounded_classes() {
        let q = find_preset("periodic-report").unwrap().qos().unwrap();
        assert_eq!((q.latency_bound(), q.violation_prob()), (5e-3, 1e-3));
        assert!(find_preset("mobility-as-a-service")
            .unwrap()
            .qos()
            .is_none());
    }
}
