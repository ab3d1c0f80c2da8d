//! Road-traffic generators: the macroscopic freeway model and the
//! microscopic Manhattan-grid model.

pub mod freeway;
pub mod manhattan;
pub mod mobility;

pub use freeway::{
    place_freeway_vehicles, underwood_speed, vehicle_count, FreewayLayout, Placement,
    UnderwoodModel,
};
pub use manhattan::{
    build_manhattan_grid, Heading, ManhattanGrid, ManhattanGridSpec, Rect, TurnProbabilities,
};
pub use mobility::{place_vehicles, step_mobility, MobilityState, Turn, Vehicle};
