use urllc_core::rng::component_rng;
use urllc_core::traffic::manhattan::{build_manhattan_grid, ManhattanGridSpec};
use urllc_core::traffic::{place_vehicles, step_mobility};

#[test]
fn turn_decisions_follow_configured_fractions() {
    let grid = build_manhattan_grid(&ManhattanGridSpec::default()).unwrap();
    let mut rng = component_rng(31, "turn-fractions");
    let mut state = place_vehicles(&grid, 200, &mut rng);
    while state.turn_counts.iter().sum::<u64>() < 100_000 {
        step_mobility(&mut state, &grid, 1.0, &mut rng).unwrap();
    }
    let total = state.turn_counts.iter().sum::<u64>() as f64;
    let expected = [0.25, 0.5, 0.25];
    for (count, want) in state.turn_counts.iter().zip(expected) {
        let got = *count as f64 / total;
        assert!((got - want).abs() < 0.01, "{:?}", state.turn_counts);
    }
}
