//! Occupancy grids, A* search and compilation of sub-goals into discrete
//! action plans.

mod astar;
mod compile;
mod grid;
mod plan;
mod subgoal;

use thiserror::Error;

use crate::world::WorldError;

pub use astar::shortest_path;
pub use compile::{compile_path, path_to_actions, turn_towards};
pub use grid::{rasterize, Cell, OccupancyGrid};
pub use plan::{assemble_mission, measure, ActionPlan, PlanStep, PLAN_SCHEMA};
pub use subgoal::{nearest_free_cell, plan_subgoal, select_detection, PlannerConfig, SubPlan};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("cell {0:?} is occupied or outside the grid")]
    BlockedCell(Cell),
    #[error("no collision-free path to the target")]
    Unreachable,
    #[error("segment order violated at step {0}")]
    SegmentOrder(usize),
    #[error("step {step} fails validation: {reason}")]
    ValidationFailure { step: usize, reason: WorldError },
}
