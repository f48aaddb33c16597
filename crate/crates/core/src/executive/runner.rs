use std::collections::VecDeque;
use std::f64::consts::FRAC_PI_4;

use super::log::{
    EpisodeLog, FailureReason, LogHeader, MatchedGoal, Outcome, OutcomeRecord, StepMode, StepRecord,
};
use super::spec::{EpisodeSpec, ParserVariant, PipelineConfig};
use super::termination::{check_termination, nearest_goal, PlanProgress, TerminationReport};
use crate::language::{
    corrupt_plan, parse_instruction, remote_decompose, ObjectRef, SubGoal, SubGoalKind,
    SubGoalPlan, DEFAULT_TAKEOFF_ALT,
};
use crate::perception::{detect, matches_ref, Detection, DetectionQuery};
use crate::planner::{
    plan_subgoal, rasterize, select_detection, turn_towards, OccupancyGrid, SubPlan,
};
use crate::rng::derive_seed;
use crate::world::{
    apply_action, direction_to_point, is_landed, Action, ActionKind, Pose, WorldError,
};

/// Rotations per scan, each a quarter of a right angle.
pub const SCAN_TURNS: usize = 8;
/// Climb between scans, meters.
pub const SEARCH_ASCENT: f64 = 1.0;
pub const MAX_SEARCH_ASCENTS: usize = 3;
/// Times a failed termination check sends the drone back to the last
/// navigation sub-goal.
pub const MAX_REAPPROACHES: usize = 3;

/// Horizontal offset below which the drone is over its landing target.
const APPROACH_EPS: f64 = 0.05;

const STREAM_STEP: u64 = 0;
const STREAM_PLAN: u64 = 1;
const STREAM_TERMINATION: u64 = 2;
const STREAM_CORRUPTION: u64 = u64::MAX;

#[derive(Debug, Clone)]
enum Phase {
    Plan,
    Execute {
        queue: VecDeque<Action>,
        refine_left: usize,
    },
    Search {
        queue: VecDeque<Action>,
        ascents: usize,
    },
    Verify,
    Landing,
}

enum Next {
    Act(Action, StepMode),
    Continue,
    Finish(Outcome),
}

/// Decomposes an instruction with the configured parser variant.
pub fn decompose(spec: &EpisodeSpec, config: &PipelineConfig) -> Result<SubGoalPlan, String> {
    let vocabulary = spec.scene.vocabulary();
    match &config.parser {
        ParserVariant::Reference => {
            parse_instruction(&spec.instruction, &ActionKind::ALL).map_err(|e| e.to_string())
        }
        ParserVariant::Corrupted { rate } => {
            let plan = parse_instruction(&spec.instruction, &ActionKind::ALL)
                .map_err(|e| e.to_string())?;
            Ok(corrupt_plan(
                &plan,
                *rate,
                derive_seed(spec.seed, STREAM_CORRUPTION),
                &vocabulary,
            ))
        }
        ParserVariant::Remote { endpoint } => {
            remote_decompose(&spec.instruction, &ActionKind::ALL, &vocabulary, endpoint)
                .map_err(|e| e.to_string())
        }
    }
}

/// Number of sub-goals executed before the termination check. A final LAND
/// is the landing routine that follows a successful check, not a sub-goal to
/// run beforehand.
fn routine_len(plan: &SubGoalPlan) -> usize {
    match plan.subgoals.last() {
        Some(SubGoal::Land) => plan.subgoals.len() - 1,
        _ => plan.subgoals.len(),
    }
}

fn scan(landed: bool) -> VecDeque<Action> {
    let mut q = VecDeque::with_capacity(SCAN_TURNS + 1);
    if landed {
        q.push_back(Action::Takeoff {
            alt: DEFAULT_TAKEOFF_ALT,
        });
    }
    q.extend(std::iter::repeat_n(
        Action::TurnLeft { theta: FRAC_PI_4 },
        SCAN_TURNS,
    ));
    q
}

/// Step-wise episode driver. Each call to [`EpisodeRunner::step`] executes at
/// most one action, so callers can interleave other work between steps.
#[derive(Debug, Clone)]
pub struct EpisodeRunner {
    spec: EpisodeSpec,
    config: PipelineConfig,
    grid: OccupancyGrid,
    header: LogHeader,
    plan: Option<SubGoalPlan>,
    routine: usize,
    active: usize,
    phase: Phase,
    pose: Pose,
    records: Vec<StepRecord>,
    path_length: f64,
    report: TerminationReport,
    termination_pose: Option<Pose>,
    outcome: Option<Outcome>,
    /// Detections that ended a search, reused by the next planning pass.
    sighted: Option<Vec<Detection>>,
    /// Fresh detections of the navigation target, used to re-plan the rest
    /// of the segment before the next action.
    replan_with: Option<Vec<Detection>>,
    reapproaches_left: usize,
    /// Consecutive verification turns without seeing the goal.
    blind_turns: usize,
}

impl EpisodeRunner {
    /// Decomposes the instruction and prepares the episode. A decomposition
    /// failure yields a runner that is already finished.
    pub fn new(spec: EpisodeSpec, config: PipelineConfig) -> Self {
        let plan = decompose(&spec, &config);
        Self::with_decomposition(spec, config, plan)
    }

    /// Prepares the episode around an existing decomposition.
    pub fn from_plan(spec: EpisodeSpec, config: PipelineConfig, plan: SubGoalPlan) -> Self {
        Self::with_decomposition(spec, config, Ok(plan))
    }

    fn with_decomposition(
        spec: EpisodeSpec,
        config: PipelineConfig,
        plan: Result<SubGoalPlan, String>,
    ) -> Self {
        let grid = rasterize(
            &spec.scene,
            config.planner.resolution,
            config.planner.clearance,
        );
        let (plan, error) = match plan {
            Ok(p) => (Some(p), None),
            Err(e) => (None, Some(e)),
        };
        let header = LogHeader {
            spec_digest: spec.digest(),
            scene: spec.scene.name.clone(),
            instruction: spec.instruction.as_str().to_owned(),
            seed: spec.seed,
            max_steps: spec.max_steps,
            profile: config.profile.name.clone(),
            parser: config.parser.label(),
            plan: plan.clone(),
            decompose_error: error,
        };
        let outcome = plan
            .is_none()
            .then_some(Outcome::Failure(FailureReason::DecomposeError));
        Self {
            pose: spec.scene.start_pose,
            routine: plan.as_ref().map_or(0, routine_len),
            spec,
            config,
            grid,
            header,
            plan,
            active: 0,
            phase: Phase::Plan,
            records: Vec::new(),
            path_length: 0.0,
            report: TerminationReport::default(),
            termination_pose: None,
            outcome,
            sighted: None,
            replan_with: None,
            reapproaches_left: MAX_REAPPROACHES,
            blind_turns: 0,
        }
    }

    pub fn spec(&self) -> &EpisodeSpec {
        &self.spec
    }

    pub fn plan(&self) -> Option<&SubGoalPlan> {
        self.plan.as_ref()
    }

    pub fn pose(&self) -> Pose {
        self.pose
    }

    pub fn records(&self) -> &[StepRecord] {
        &self.records
    }

    pub fn path_length(&self) -> f64 {
        self.path_length
    }

    pub fn outcome(&self) -> Option<Outcome> {
        self.outcome
    }

    pub fn is_finished(&self) -> bool {
        self.outcome.is_some()
    }

    /// Index of the sub-goal being worked on, if any remains.
    pub fn active_subgoal(&self) -> Option<usize> {
        (self.plan.is_some() && self.active < self.routine).then_some(self.active)
    }

    pub fn progress(&self) -> PlanProgress {
        PlanProgress {
            completed: self.active.min(self.routine),
            total: self.routine,
        }
    }

    pub fn latest_detections(&self) -> &[Detection] {
        self.records.last().map_or(&[], |r| r.detections.as_slice())
    }

    /// Ends the episode early.
    pub fn abort(&mut self) {
        if self.outcome.is_none() {
            self.outcome = Some(Outcome::Failure(FailureReason::Aborted));
        }
    }

    /// Executes the next action. Returns the new step record, or `None` once
    /// the episode has finished.
    pub fn step(&mut self) -> Option<&StepRecord> {
        while self.outcome.is_none() {
            match self.next() {
                Next::Continue => {}
                Next::Finish(outcome) => self.outcome = Some(outcome),
                Next::Act(action, mode) => {
                    if self.records.len() >= self.spec.max_steps {
                        self.outcome = Some(Outcome::Failure(FailureReason::StepBudget));
                        break;
                    }
                    return match self.execute(action, mode) {
                        Ok(()) => self.records.last(),
                        Err(reason) => {
                            self.outcome = Some(Outcome::Failure(reason));
                            None
                        }
                    };
                }
            }
        }
        None
    }

    /// Runs to completion.
    pub fn run(mut self) -> EpisodeLog {
        while self.step().is_some() {}
        self.log()
    }

    /// Log of everything so far. The outcome line is provisional until the
    /// episode finishes.
    pub fn log(&self) -> EpisodeLog {
        let matched = nearest_goal(&self.pose, &self.spec).map(|(o, _)| MatchedGoal {
            object_id: o.id.clone(),
            center: o.center(),
        });
        EpisodeLog {
            header: self.header.clone(),
            steps: self.records.clone(),
            outcome: OutcomeRecord {
                outcome: self
                    .outcome
                    .unwrap_or(Outcome::Failure(FailureReason::StepBudget)),
                steps: self.records.len(),
                path_length: self.path_length,
                termination: self.report,
                termination_pose: self.termination_pose,
                final_pose: self.pose,
                matched_goal: matched,
            },
        }
    }

    fn subgoal(&self, i: usize) -> &SubGoal {
        &self
            .plan
            .as_ref()
            .expect("plan present while running")
            .subgoals[i]
    }

    fn target(&self) -> ObjectRef {
        if self.active < self.routine {
            if let Some(t) = self.subgoal(self.active).target() {
                return t.clone();
            }
        }
        self.spec.goal.clone()
    }

    fn query(&self, target: &ObjectRef, stream: u64) -> Vec<Detection> {
        let seed = derive_seed(
            derive_seed(self.spec.seed, self.records.len() as u64),
            stream,
        );
        detect(
            &self.pose,
            &self.config.camera,
            &self.spec.scene,
            &[DetectionQuery::new(target.clone())],
            &self.config.profile,
            seed,
        )
    }

    /// Plans the active sub-goal; a final LAND_AT leaves its LAND to the
    /// landing routine.
    fn plan_active(&self, detections: &[Detection]) -> Result<SubPlan, FailureReason> {
        let sg = self.subgoal(self.active);
        let planned = plan_subgoal(
            sg,
            self.active,
            &self.pose,
            detections,
            &self.grid,
            &self.config.planner,
        )
        .map_err(|_| FailureReason::Unreachable)?;
        Ok(match planned {
            SubPlan::Segment(mut seg) if sg.kind() == SubGoalKind::LandAt => {
                if seg.steps.last().is_some_and(|s| s.action == Action::Land) {
                    seg.steps.pop();
                }
                SubPlan::Segment(seg)
            }
            other => other,
        })
    }

    fn can_apply(&self, action: &Action) -> bool {
        apply_action(
            &self.pose,
            action,
            &self.spec.scene,
            self.config.planner.clearance,
        )
        .is_ok()
    }

    fn lands_within_radius(&self) -> bool {
        apply_action(
            &self.pose,
            &Action::Land,
            &self.spec.scene,
            self.config.planner.clearance,
        )
        .ok()
        .and_then(|landed| nearest_goal(&landed, &self.spec))
        .is_some_and(|(_, d)| d <= self.spec.success_radius)
    }

    /// One turn or short horizontal move toward the best goal detection.
    fn approach_step(&self, detections: &[Detection]) -> Option<Action> {
        let goal: Vec<Detection> = detections
            .iter()
            .filter(|d| {
                self.spec
                    .scene
                    .object(&d.object_id)
                    .is_some_and(|o| matches_ref(o, &self.spec.goal, &self.spec.scene, &self.pose))
            })
            .cloned()
            .collect();
        let best = select_detection(&goal)?;
        let point = direction_to_point(&self.pose, best.bearing, best.elevation, best.range);
        let offset = point - self.pose.position;
        let horizontal = offset.horizontal_norm();
        if horizontal < APPROACH_EPS {
            return None;
        }
        let action =
            turn_towards(self.pose.yaw, offset.y.atan2(offset.x)).unwrap_or(Action::MoveForward {
                d: horizontal.min(self.config.planner.resolution),
            });
        self.can_apply(&action).then_some(action)
    }

    fn last_navigation(&self) -> Option<usize> {
        (0..self.routine)
            .rev()
            .find(|&i| self.subgoal(i).target().is_some())
    }

    fn advance(&mut self) {
        self.active += 1;
        self.phase = Phase::Plan;
    }

    fn next(&mut self) -> Next {
        if let Some(detections) = self.replan_with.take() {
            if matches!(self.phase, Phase::Execute { .. }) {
                if let Ok(SubPlan::Segment(seg)) = self.plan_active(&detections) {
                    if let Phase::Execute { queue, .. } = &mut self.phase {
                        *queue = seg.actions().copied().collect();
                    }
                }
            }
        }
        match &mut self.phase {
            Phase::Plan => {
                if self.active >= self.routine {
                    self.phase = Phase::Verify;
                    return Next::Continue;
                }
                let target = self.subgoal(self.active).target().cloned();
                let detections = match (self.sighted.take(), target) {
                    (Some(seen), _) => seen,
                    (None, Some(t)) => self.query(&t, STREAM_PLAN),
                    (None, None) => Vec::new(),
                };
                match self.plan_active(&detections) {
                    Err(reason) => Next::Finish(Outcome::Failure(reason)),
                    Ok(SubPlan::NeedsSearch) => {
                        self.phase = Phase::Search {
                            queue: scan(is_landed(&self.pose, &self.spec.scene)),
                            ascents: 0,
                        };
                        Next::Continue
                    }
                    Ok(SubPlan::Segment(seg)) => {
                        let navigates = self.subgoal(self.active).target().is_some();
                        self.phase = Phase::Execute {
                            queue: seg.actions().copied().collect(),
                            refine_left: if navigates {
                                self.config.refine_passes
                            } else {
                                0
                            },
                        };
                        Next::Continue
                    }
                }
            }
            Phase::Execute { queue, refine_left } => {
                if let Some(a) = queue.pop_front() {
                    return Next::Act(a, StepMode::Execute);
                }
                if *refine_left == 0 {
                    self.advance();
                    return Next::Continue;
                }
                *refine_left -= 1;
                let left = *refine_left;
                let target = self
                    .subgoal(self.active)
                    .target()
                    .cloned()
                    .expect("refined sub-goals have targets");
                let detections = self.query(&target, STREAM_PLAN);
                match self.plan_active(&detections) {
                    Ok(SubPlan::Segment(seg)) if !seg.is_empty() => {
                        self.phase = Phase::Execute {
                            queue: seg.actions().copied().collect(),
                            refine_left: left,
                        };
                    }
                    _ => self.advance(),
                }
                Next::Continue
            }
            Phase::Search { queue, ascents } => {
                if let Some(a) = queue.pop_front() {
                    return Next::Act(a, StepMode::Search);
                }
                if *ascents >= MAX_SEARCH_ASCENTS {
                    return Next::Finish(Outcome::Failure(FailureReason::SearchExhausted));
                }
                *ascents += 1;
                queue.push_back(Action::Ascend { d: SEARCH_ASCENT });
                queue.extend(scan(false));
                Next::Continue
            }
            Phase::Verify => {
                let detections = self.query(&self.spec.goal, STREAM_TERMINATION);
                self.report =
                    check_termination(&self.pose, &detections, self.progress(), &self.spec);
                self.termination_pose = Some(self.pose);
                let landed = is_landed(&self.pose, &self.spec.scene);
                if !self.report.within_threshold && self.reapproaches_left > 0 {
                    if let Some(i) = self.last_navigation() {
                        self.reapproaches_left -= 1;
                        self.active = i;
                        self.phase = Phase::Plan;
                        return Next::Continue;
                    }
                }
                if !self.report.satisfied() {
                    // look around for a goal that is out of frame at arrival,
                    // climbing after each full turn since the camera cannot look up
                    let action = if self.report.goal_detected || landed {
                        self.blind_turns = 0;
                        Action::Hover { steps: 1 }
                    } else if self.blind_turns >= SCAN_TURNS
                        && self.can_apply(&Action::Ascend { d: SEARCH_ASCENT })
                    {
                        self.blind_turns = 0;
                        Action::Ascend { d: SEARCH_ASCENT }
                    } else {
                        self.blind_turns += 1;
                        Action::TurnLeft { theta: FRAC_PI_4 }
                    };
                    return Next::Act(action, StepMode::Verify);
                }
                if landed {
                    return Next::Finish(Outcome::Success);
                }
                if !self.lands_within_radius() {
                    // touching down here would leave the goal radius
                    let action = self
                        .approach_step(&detections)
                        .unwrap_or(Action::Hover { steps: 1 });
                    return Next::Act(action, StepMode::Verify);
                }
                self.phase = Phase::Landing;
                Next::Act(Action::Land, StepMode::Land)
            }
            Phase::Landing => Next::Finish(Outcome::Success),
        }
    }

    fn execute(&mut self, action: Action, mode: StepMode) -> Result<(), FailureReason> {
        let next = apply_action(
            &self.pose,
            &action,
            &self.spec.scene,
            self.config.planner.clearance,
        )
        .map_err(|e| match (mode, e) {
            (StepMode::Search, WorldError::OutOfBounds) => FailureReason::SearchExhausted,
            _ => FailureReason::Unreachable,
        })?;
        self.path_length += next.position.distance(&self.pose.position);
        self.pose = next;
        let step = self.records.len();
        let target = self.target();
        let subgoal = self.active_subgoal();
        self.records.push(StepRecord {
            step,
            subgoal,
            mode,
            action,
            pose: next,
            detections: Vec::new(),
        });
        // Detections are drawn after the step is counted so each one gets its own seed.
        let detections = self.query(&target, STREAM_STEP);
        if !detections.is_empty() {
            match mode {
                StepMode::Search => {
                    self.sighted = Some(detections.clone());
                    self.phase = Phase::Plan;
                }
                StepMode::Execute
                    if subgoal.is_some_and(|i| self.subgoal(i).target().is_some()) =>
                {
                    self.replan_with = Some(detections.clone());
                }
                _ => {}
            }
        }
        self.records.last_mut().expect("just pushed").detections = detections;
        Ok(())
    }
}

/// Runs one episode to completion.
pub fn run_episode(spec: &EpisodeSpec, config: &PipelineConfig) -> EpisodeLog {
    EpisodeRunner::new(spec.clone(), config.clone()).run()
}
