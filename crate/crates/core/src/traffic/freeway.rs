//! Macroscopic freeway traffic: Underwood speed–density law and vehicle
//! placement along a straight road segment.

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::rng::component_rng;

/// Average vehicle length behind the default jam density of 0.15 veh/m.
pub const VEHICLE_LENGTH_M: f64 = 6.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnderwoodModel {
    free_flow_kmh: f64,
    max_density: f64,
}

impl UnderwoodModel {
    pub fn new(free_flow_kmh: f64, max_density: f64) -> Result<Self> {
        if !(free_flow_kmh > 0.0) {
            return Err(invalid(
                "UnderwoodModel",
                format!("free-flow speed must be > 0, got {free_flow_kmh}"),
            ));
        }
        if !(max_density > 0.0) {
            return Err(invalid(
                "UnderwoodModel",
                format!("max density must be > 0, got {max_density}"),
            ));
        }
        Ok(Self {
            free_flow_kmh,
            max_density,
        })
    }

    pub fn free_flow_kmh(&self) -> f64 {
        self.free_flow_kmh
    }
    pub fn max_density(&self) -> f64 {
        self.max_density
    }
}

impl Default for UnderwoodModel {
    fn default() -> Self {
        Self {
            free_flow_kmh: 80.0,
            max_density: 0.15,
        }
    }
}

/// `v(κ) = v_F · exp(−κ/κ_M)` in km/h.
pub fn underwood_speed(model: &UnderwoodModel, density: f64) -> f64 {
    debug_assert!(density >= 0.0);
    model.free_flow_kmh * (-density / model.max_density).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreewayLayout {
    road_length: f64,
    bs_offset: f64,
    density: f64,
}

impl FreewayLayout {
    pub fn new(
        road_length: f64,
        bs_offset: f64,
        density: f64,
        model: &UnderwoodModel,
    ) -> Result<Self> {
        if !(road_length > 0.0) {
            return Err(invalid(
                "FreewayLayout",
                format!("road length must be > 0, got {road_length}"),
            ));
        }
        if !(bs_offset > 0.0) {
            return Err(invalid(
                "FreewayLayout",
                format!("BS offset must be > 0, got {bs_offset}"),
            ));
        }
        if !(density > 0.0 && density <= model.max_density) {
            return Err(invalid(
                "FreewayLayout",
                format!(
                    "density kappa = {density} must lie in (0, max_density = {}]",
                    model.max_density
                ),
            ));
        }
        Ok(Self {
            road_length,
            bs_offset,
            density,
        })
    }

    pub fn road_length(&self) -> f64 {
        self.road_length
    }
    pub fn bs_offset(&self) -> f64 {
        self.bs_offset
    }
    pub fn density(&self) -> f64 {
        self.density
    }
    /// Along-road coordinate of the base station foot point (road midpoint).
    pub fn bs_position(&self) -> f64 {
        0.5 * self.road_length
    }
}

/// `K = round(κ·d_R)`.
pub fn vehicle_count(layout: &FreewayLayout) -> Result<usize> {
    let k = (layout.density * layout.road_length).round();
    if k < 1.0 {
        return Err(Error::Infeasible(format!(
            "density {} on {} m of road yields no vehicles",
            layout.density, layout.road_length
        )));
    }
    Ok(k as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    /// Midpoints of `K` equal cells.
    Equispaced,
    UniformRandom {
        seed: u64,
    },
}

/// Positions (m along the road), sorted ascending.
pub fn place_freeway_vehicles(layout: &FreewayLayout, mode: Placement) -> Result<Vec<f64>> {
    let k = vehicle_count(layout)?;
    let cell = layout.road_length / k as f64;
    let mut positions: Vec<f64> = match mode {
        Placement::Equispaced => (0..k).map(|i| (i as f64 + 0.5) * cell).collect(),
        Placement::UniformRandom { seed } => {
            let mut rng = component_rng(seed, "freeway-placement");
            (0..k)
                .map(|_| rng.random::<f64>() * layout.road_length)
                .collect()
        }
    };
    positions.sort_by(f64::total_cmp);
    Ok(positions)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn underwood_landmarks() {
        let m = UnderwoodModel::default();
        assert_eq!(underwood_speed(&m, 0.0), 80.0);
        assert!((underwood_speed(&m, 0.15) - 80.0 / std::f64::consts::E).abs() < 1e-12);
        assert!((underwood_speed(&m, 0.05) - 80.0 * (-1.0f64 / 3.0).exp()).abs() < 1e-12);
        assert!((underwood_speed(&m, 0.05) - 57.3).abs() < 0.05);
    }

    #[test]
    fn counts() {
        let m = UnderwoodModel::default();
        let k =
            |kappa, len| vehicle_count(&FreewayLayout::new(len, 20.0, kappa, &m).unwrap()).unwrap();
        assert_eq!(k(0.05, 200.0), 10);
        assert_eq!(k(0.15, 200.0), 30);
        assert_eq!(k(0.15, VEHICLE_LENGTH_M), 1);
        let tiny = FreewayLayout::new(1.0, 20.0, 0.01, &m).unwrap();
        assert!(vehicle_count(&tiny).is_err());
    }

    #[test]
    fn layout_rejects_overdense() {
        let m = UnderwoodModel::default();
        let err = FreewayLayout::new(200.0, 20.0, 0.2, &m).unwrap_err();
        assert!(err.to_string().contains("max_density"));
        assert!(FreewayLayout::new(200.0, 20.0, 0.0, &m).is_err());
    }

    #[test]
    fn equispaced_two() {
        let m = UnderwoodModel::default();
        let layout = FreewayLayout::new(200.0, 20.0, 0.01, &m).unwrap();
        assert_eq!(
            place_freeway_vehicles(&layout, Placement::Equispaced).unwrap(),
            vec![50.0, 150.0]
        );
    }

    #[test]
    fn random_placement_deterministic_and_in_range() {
        let m = UnderwoodModel::default();
        let layout = FreewayLayout::new(200.0, 20.0, 0.15, &m).unwrap();
        let a = place_freeway_vehicles(&layout, Placement::UniformRandom { seed: 5 }).unwrap();
        let b = place_freeway_vehicles(&layout, Placement::UniformRandom { seed: 5 }).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|&x| (0.0..=200.0).contains(&x)));
    }

    #[test]
    fn random_placement_mean() {
        let m = UnderwoodModel::new(80.0, 1e6).unwrap();
        let layout = FreewayLayout::new(200.0, 20.0, 500.0, &m).unwrap();
        let xs = place_freeway_vehicles(&layout, Placement::UniformRandom { seed: 11 }).unwrap();
        assert_eq!(xs.len(), 100_000);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((mean / 100.0 - 1.0).abs() < 0.01, "{mean}");
    }
}
