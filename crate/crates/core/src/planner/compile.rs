use std::f64::consts::{FRAC_PI_2, PI};

use super::grid::Cell;
use super::plan::{ActionPlan, PlanStep};
use crate::world::{normalize_angle, wrap_signed, Action};

const ANGLE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Step {
    Horizontal(i8, i8),
    Up,
    Down,
}

fn step_between(a: &Cell, b: &Cell) -> Step {
    let d = |p: usize, q: usize| (q as i64 - p as i64) as i8;
    match (d(a.x, b.x), d(a.y, b.y), d(a.z, b.z)) {
        (0, 0, 1) => Step::Up,
        (0, 0, -1) => Step::Down,
        (dx, dy, 0) if (dx.abs() + dy.abs()) == 1 => Step::Horizontal(dx, dy),
        other => panic!("cells {a:?} -> {b:?} are not face neighbors ({other:?})"),
    }
}

fn heading_of(dx: i8, dy: i8) -> f64 {
    match (dx, dy) {
        (1, 0) => 0.0,
        (0, 1) => FRAC_PI_2,
        (-1, 0) => PI,
        _ => 3.0 * FRAC_PI_2,
    }
}

/// Smallest rotation from `yaw` to `target`, or `None` when already aligned.
pub fn turn_towards(yaw: f64, target: f64) -> Option<Action> {
    let delta = wrap_signed(target - yaw);
    if delta.abs() < ANGLE_EPS {
        None
    } else if delta > 0.0 {
        Some(Action::TurnLeft { theta: delta })
    } else {
        Some(Action::TurnRight { theta: -delta })
    }
}

/// Compiles a 6-connected cell path into actions: a minimal turn plus a
/// forward move per horizontal step, a climb or descent per vertical step,
/// with consecutive collinear steps merged. Returns the actions and the
/// heading after the last one.
pub fn compile_path(cells: &[Cell], initial_yaw: f64, resolution: f64) -> (Vec<Action>, f64) {
    let mut actions = Vec::new();
    let mut yaw = normalize_angle(initial_yaw);
    let steps: Vec<Step> = cells
        .windows(2)
        .map(|w| step_between(&w[0], &w[1]))
        .collect();
    let mut i = 0;
    while i < steps.len() {
        let run = steps[i..].iter().take_while(|s| **s == steps[i]).count();
        let d = run as f64 * resolution;
        match steps[i] {
            Step::Horizontal(dx, dy) => {
                let target = heading_of(dx, dy);
                if let Some(turn) = turn_towards(yaw, target) {
                    actions.push(turn);
                }
                yaw = target;
                actions.push(Action::MoveForward { d });
            }
            Step::Up => actions.push(Action::Ascend { d }),
            Step::Down => actions.push(Action::Descend { d }),
        }
        i += run;
    }
    (actions, yaw)
}

/// Plan segment for a cell path. Steps are tagged with sub-goal 0; use
/// [`ActionPlan::for_subgoal`] to re-tag.
pub fn path_to_actions(cells: &[Cell], initial_yaw: f64, resolution: f64) -> ActionPlan {
    let (actions, _) = compile_path(cells, initial_yaw, resolution);
    let length = cells.len().saturating_sub(1) as f64 * resolution;
    ActionPlan {
        steps: actions
            .into_iter()
            .map(|action| PlanStep { action, subgoal: 0 })
            .collect(),
        estimated_length: length,
    }
}
