use serde::{Deserialize, Serialize};

use super::astar::shortest_path;
use super::compile::{compile_path, turn_towards};
use super::grid::{Cell, OccupancyGrid};
use super::plan::ActionPlan;
use super::PlanError;
use crate::language::{SubGoal, DEFAULT_TAKEOFF_ALT};
use crate::perception::Detection;
use crate::world::{direction_to_point, Action, Pose, Vec3, DEFAULT_CLEARANCE};

const LATTICE_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerConfig {
    pub resolution: f64,
    pub clearance: f64,
    /// Height added above a detected object for FLY_OVER targets.
    pub fly_over_offset: f64,
    /// Seconds represented by one HOVER step.
    pub hover_step_seconds: f64,
    /// Lowest grid level a navigation target may occupy; level 0 is the
    /// ground. Targets are also never below the detected point.
    pub min_flight_level: usize,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            resolution: 0.5,
            clearance: DEFAULT_CLEARANCE,
            fly_over_offset: 1.5,
            hover_step_seconds: 1.0,
            min_flight_level: 1,
        }
    }
}

/// Outcome of planning one sub-goal.
#[derive(Debug, Clone, PartialEq)]
pub enum SubPlan {
    /// Actions realizing the sub-goal; empty when it is already satisfied.
    Segment(ActionPlan),
    /// The sub-goal's object is not currently detected.
    NeedsSearch,
}

/// Detection the planner commits to: highest confidence, then nearest, then
/// lowest object id.
pub fn select_detection(detections: &[Detection]) -> Option<&Detection> {
    detections.iter().min_by(|a, b| {
        b.confidence
            .total_cmp(&a.confidence)
            .then(a.range.total_cmp(&b.range))
            .then_with(|| a.object_id.cmp(&b.object_id))
    })
}

/// Free cell at or above `min_level` whose center is nearest `point`
/// (ties by lower z, then x, then y).
pub fn nearest_free_cell(grid: &OccupancyGrid, point: &Vec3, min_level: usize) -> Option<Cell> {
    let base = grid.nearest_cell(point);
    let offset = grid.center(&base).distance(point);
    let (nx, ny, nz) = grid.dims;
    let max_r = nx.max(ny).max(nz) as i64;
    let mut best: Option<(f64, Cell)> = None;
    for r in 0..=max_r {
        if let Some((d, _)) = best {
            if r as f64 * grid.resolution - offset > d {
                break;
            }
        }
        for dz in -r..=r {
            for dy in -r..=r {
                for dx in -r..=r {
                    if dx.abs().max(dy.abs()).max(dz.abs()) != r {
                        continue;
                    }
                    let (x, y, z) = (base.x as i64 + dx, base.y as i64 + dy, base.z as i64 + dz);
                    if x < 0 || y < 0 || z < min_level as i64 {
                        continue;
                    }
                    let c = Cell::new(x as usize, y as usize, z as usize);
                    if !grid.is_free(&c) {
                        continue;
                    }
                    let d = grid.center(&c).distance(point);
                    let better = match best {
                        None => true,
                        Some((bd, bc)) => {
                            d < bd || (d == bd && (c.z, c.x, c.y) < (bc.z, bc.x, bc.y))
                        }
                    };
                    if better {
                        best = Some((d, c));
                    }
                }
            }
        }
    }
    best.map(|(_, c)| c)
}

/// Actions that bring an off-lattice pose onto its nearest cell center.
fn align_to_lattice(pose: &Pose, grid: &OccupancyGrid, actions: &mut Vec<Action>) -> (Cell, f64) {
    let cell = grid.nearest_cell(&pose.position);
    let center = grid.center(&cell);
    let p = pose.position;
    let mut yaw = pose.yaw;
    let dz = center.z - p.z;
    if dz > LATTICE_EPS {
        actions.push(Action::Ascend { d: dz });
    } else if dz < -LATTICE_EPS {
        actions.push(Action::Descend { d: -dz });
    }
    for (delta, positive, negative) in [
        (center.x - p.x, 0.0, std::f64::consts::PI),
        (
            center.y - p.y,
            std::f64::consts::FRAC_PI_2,
            3.0 * std::f64::consts::FRAC_PI_2,
        ),
    ] {
        if delta.abs() > LATTICE_EPS {
            let heading = if delta > 0.0 { positive } else { negative };
            actions.extend(turn_towards(yaw, heading));
            yaw = heading;
            actions.push(Action::MoveForward { d: delta.abs() });
        }
    }
    (cell, yaw)
}

fn is_landed(pose: &Pose, ground: f64) -> bool {
    pose.position.z <= ground + 1e-9
}

fn navigate(
    pose: &Pose,
    point: &Vec3,
    grid: &OccupancyGrid,
    config: &PlannerConfig,
) -> Result<Vec<Action>, PlanError> {
    let mut actions = Vec::new();
    let mut start = *pose;
    if is_landed(pose, grid.floor()) {
        let takeoff = Action::Takeoff {
            alt: DEFAULT_TAKEOFF_ALT,
        };
        start = crate::world::integrate(pose, &takeoff, grid.floor());
        actions.push(takeoff);
    }
    // the camera looks forward and down, so arrive level with or above the target
    let level = ((point.z - grid.floor()) / grid.resolution - 1e-9)
        .ceil()
        .max(0.0) as usize;
    let min_level = level
        .min(grid.dims.2.saturating_sub(1))
        .max(config.min_flight_level);
    let goal = nearest_free_cell(grid, point, min_level).ok_or(PlanError::Unreachable)?;
    let (from, yaw) = align_to_lattice(&start, grid, &mut actions);
    let path = shortest_path(grid, from, goal)?;
    let (moves, _) = compile_path(&path, yaw, grid.resolution);
    actions.extend(moves);
    Ok(actions)
}

fn altitude_change(pose: &Pose, ground: f64, alt: f64) -> Vec<Action> {
    if is_landed(pose, ground) {
        return vec![Action::Takeoff { alt }];
    }
    let diff = ground + alt - pose.position.z;
    if diff > LATTICE_EPS {
        vec![Action::Ascend { d: diff }]
    } else if diff < -LATTICE_EPS {
        vec![Action::Descend { d: -diff }]
    } else {
        Vec::new()
    }
}

/// Compiles one sub-goal from the current pose. Object sub-goals are grounded
/// on the best matching detection; with none available the caller is told to
/// search.
pub fn plan_subgoal(
    subgoal: &SubGoal,
    index: usize,
    pose: &Pose,
    detections: &[Detection],
    grid: &OccupancyGrid,
    config: &PlannerConfig,
) -> Result<SubPlan, PlanError> {
    let ground = grid.floor();
    let actions = match subgoal {
        SubGoal::Takeoff { alt } => {
            if !is_landed(pose, ground) && (pose.position.z - ground - alt).abs() < LATTICE_EPS {
                Vec::new()
            } else {
                vec![Action::Takeoff { alt: *alt }]
            }
        }
        SubGoal::AscendTo { alt } | SubGoal::DescendTo { alt } => {
            altitude_change(pose, ground, *alt)
        }
        SubGoal::Hover { seconds } => {
            let steps = (seconds / config.hover_step_seconds).ceil().max(1.0) as u32;
            vec![Action::Hover { steps }]
        }
        SubGoal::Land => {
            if is_landed(pose, ground) {
                Vec::new()
            } else {
                vec![Action::Land]
            }
        }
        SubGoal::Search(_) => {
            if detections.is_empty() {
                return Ok(SubPlan::NeedsSearch);
            }
            Vec::new()
        }
        SubGoal::NavigateTo(_) | SubGoal::FlyOver(_) | SubGoal::LandAt(_) => {
            let Some(d) = select_detection(detections) else {
                return Ok(SubPlan::NeedsSearch);
            };
            let mut point = direction_to_point(pose, d.bearing, d.elevation, d.range);
            if matches!(subgoal, SubGoal::FlyOver(_)) {
                point.z += config.fly_over_offset;
            }
            let mut actions = navigate(pose, &point, grid, config)?;
            if matches!(subgoal, SubGoal::LandAt(_)) {
                actions.push(Action::Land);
            }
            actions
        }
    };
    Ok(SubPlan::Segment(ActionPlan::measured(
        actions, index, pose, ground,
    )))
}
