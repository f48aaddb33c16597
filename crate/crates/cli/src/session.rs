//! One live episode per session, owned by a task that applies queued commands
//! between simulation steps.

use std::sync::Arc;
use std::time::Duration;

use aerovln_core::eval::{ad_hoc_episode, instruction_goal};
use aerovln_core::executive::{EpisodeRunner, Outcome, PipelineConfig, PlanProgress};
use aerovln_core::language::{parse_instruction, Instruction, ParseError, SubGoalPlan};
use aerovln_core::perception::Detection;
use aerovln_core::world::{ActionKind, Pose, Scene, Vec3};
use serde::Serialize;
use tokio::sync::{mpsc, oneshot, watch};
use tokio::time::{sleep_until, Instant};

pub const STATE_SCHEMA: &str = "state/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Idle,
    AwaitingInstruction,
    Running,
    Paused,
    Finished,
}

/// Snapshot pushed to stream subscribers after every change.
#[derive(Debug, Clone, Serialize)]
pub struct SessionState {
    pub schema: &'static str,
    pub session_id: String,
    pub scene: String,
    pub scene_digest: String,
    pub status: Status,
    /// Set once the status is `finished`.
    pub outcome: Option<Outcome>,
    pub instruction: Option<String>,
    pub plan: Option<SubGoalPlan>,
    pub active_subgoal: Option<usize>,
    pub progress: PlanProgress,
    pub step: usize,
    pub max_steps: usize,
    pub pose: Pose,
    pub detections: Vec<Detection>,
    pub path_length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SessionError {
    Conflict(String),
    Parse {
        message: String,
        clause: Option<String>,
    },
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Pause,
    Resume,
    Step,
    Abort,
    Reset,
}

impl Control {
    pub const ALL: [Control; 5] = [
        Control::Pause,
        Control::Resume,
        Control::Step,
        Control::Abort,
        Control::Reset,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Control::Pause => "pause",
            Control::Resume => "resume",
            Control::Step => "step",
            Control::Abort => "abort",
            Control::Reset => "reset",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }
}

pub enum Command {
    Instruct {
        text: String,
        reply: oneshot::Sender<Result<SubGoalPlan, SessionError>>,
    },
    Control {
        op: Control,
        reply: oneshot::Sender<Result<(), SessionError>>,
    },
    Log {
        reply: oneshot::Sender<Result<String, SessionError>>,
    },
}

/// Episode settings fixed at session creation.
#[derive(Debug, Clone)]
pub struct SessionConfig {
    pub scene: Scene,
    pub pipeline: PipelineConfig,
    pub seed: u64,
    pub max_steps: usize,
    pub success_radius: f64,
    /// Wall-clock time between simulation steps while running.
    pub pace: Duration,
}

struct Session {
    id: String,
    config: SessionConfig,
    scene_digest: String,
    status: Status,
    instruction: Option<String>,
    runner: Option<EpisodeRunner>,
    state: watch::Sender<SessionState>,
}

impl Session {
    fn snapshot(&self) -> SessionState {
        let r = self.runner.as_ref();
        SessionState {
            schema: STATE_SCHEMA,
            session_id: self.id.clone(),
            scene: self.config.scene.name.clone(),
            scene_digest: self.scene_digest.clone(),
            status: self.status,
            outcome: r
                .and_then(EpisodeRunner::outcome)
                .filter(|_| self.status == Status::Finished),
            instruction: self.instruction.clone(),
            plan: r.and_then(|r| r.plan().cloned()),
            active_subgoal: r.and_then(EpisodeRunner::active_subgoal),
            progress: r.map_or(
                PlanProgress {
                    completed: 0,
                    total: 0,
                },
                EpisodeRunner::progress,
            ),
            step: r.map_or(0, |r| r.records().len()),
            max_steps: self.config.max_steps,
            pose: r.map_or(self.config.scene.start_pose, EpisodeRunner::pose),
            detections: r.map_or_else(Vec::new, |r| r.latest_detections().to_vec()),
            path_length: r.map_or(0.0, EpisodeRunner::path_length),
        }
    }

    fn publish(&self) {
        self.state.send_replace(self.snapshot());
    }

    fn advance(&mut self) {
        if let Some(runner) = &mut self.runner {
            runner.step();
            if runner.is_finished() {
                self.status = Status::Finished;
            }
        }
        self.publish();
    }

    fn instruct(&mut self, text: String) -> Result<SubGoalPlan, SessionError> {
        if !matches!(self.status, Status::AwaitingInstruction | Status::Finished) {
            return Err(SessionError::Conflict(format!(
                "cannot accept an instruction while {}",
                status_name(self.status)
            )));
        }
        let result = self.start_episode(text);
        if result.is_err() {
            self.runner = None;
            self.status = Status::AwaitingInstruction;
        }
        self.publish();
        result
    }

    fn start_episode(&mut self, text: String) -> Result<SubGoalPlan, SessionError> {
        self.instruction = Some(text.clone());
        let instruction = Instruction::new(text).ok_or_else(|| SessionError::Parse {
            message: ParseError::Empty.to_string(),
            clause: None,
        })?;
        let plan =
            parse_instruction(&instruction, &ActionKind::ALL).map_err(|e| SessionError::Parse {
                clause: match &e {
                    ParseError::UnparsableClause(c) => Some(c.clone()),
                    _ => None,
                },
                message: e.to_string(),
            })?;
        let goal = instruction_goal(&plan)
            .ok_or_else(|| SessionError::Invalid("instruction names no goal object".into()))?;
        let spec = ad_hoc_episode(
            self.config.scene.clone(),
            instruction,
            goal,
            self.config.seed,
            self.config.max_steps,
            self.config.success_radius,
            &self.config.pipeline.planner,
        )
        .map_err(|e| SessionError::Invalid(e.to_string()))?;
        let runner = EpisodeRunner::new(spec, self.config.pipeline.clone());
        let echoed = runner.plan().cloned().unwrap_or(plan);
        self.status = if runner.is_finished() {
            Status::Finished
        } else {
            Status::Running
        };
        self.runner = Some(runner);
        Ok(echoed)
    }

    fn control(&mut self, op: Control) -> Result<(), SessionError> {
        match (op, self.status) {
            (Control::Pause, Status::Running) => self.status = Status::Paused,
            (Control::Resume, Status::Paused) => self.status = Status::Running,
            (Control::Step, Status::Paused) => {
                self.advance();
                if self.status != Status::Finished {
                    self.status = Status::Paused;
                }
            }
            (Control::Abort, Status::Running | Status::Paused) => {
                if let Some(r) = &mut self.runner {
                    r.abort();
                }
                self.status = Status::Finished;
            }
            (Control::Reset, _) => {
                self.runner = None;
                self.instruction = None;
                self.status = Status::AwaitingInstruction;
            }
            (_, s) => {
                return Err(SessionError::Conflict(format!(
                    "cannot {} while {}",
                    op.name(),
                    status_name(s)
                )))
            }
        }
        self.publish();
        Ok(())
    }

    fn log(&self) -> Result<String, SessionError> {
        match (&self.runner, self.status) {
            (Some(r), Status::Finished) => Ok(r.log().to_jsonl()),
            (_, s) => Err(SessionError::Conflict(format!(
                "no finished episode to log while {}",
                status_name(s)
            ))),
        }
    }
}

pub fn status_name(s: Status) -> &'static str {
    match s {
        Status::Idle => "idle",
        Status::AwaitingInstruction => "awaiting_instruction",
        Status::Running => "running",
        Status::Paused => "paused",
        Status::Finished => "finished",
    }
}

/// Handle held by the service; dropping every sender stops the task.
#[derive(Clone)]
pub struct SessionHandle {
    pub commands: mpsc::Sender<Command>,
    pub state: watch::Receiver<SessionState>,
    pub scene: Arc<Scene>,
}

/// Starts a session task. It begins idle, loads the scene, and then waits
/// for an instruction.
pub fn spawn(id: String, config: SessionConfig) -> SessionHandle {
    let scene = Arc::new(config.scene.clone());
    let (state_tx, state) = watch::channel(placeholder());
    let mut session = Session {
        id,
        scene_digest: config.scene.digest(),
        config,
        status: Status::Idle,
        instruction: None,
        runner: None,
        state: state_tx,
    };
    session.publish();
    session.status = Status::AwaitingInstruction;
    session.publish();
    let (tx, rx) = mpsc::channel(32);
    tokio::spawn(drive(session, rx));
    SessionHandle {
        commands: tx,
        state,
        scene,
    }
}

fn placeholder() -> SessionState {
    SessionState {
        schema: STATE_SCHEMA,
        session_id: String::new(),
        scene: String::new(),
        scene_digest: String::new(),
        status: Status::Idle,
        outcome: None,
        instruction: None,
        plan: None,
        active_subgoal: None,
        progress: PlanProgress {
            completed: 0,
            total: 0,
        },
        step: 0,
        max_steps: 0,
        pose: Pose::new(Vec3::ZERO, 0.0),
        detections: Vec::new(),
        path_length: 0.0,
    }
}

async fn drive(mut session: Session, mut commands: mpsc::Receiver<Command>) {
    let pace = session.config.pace;
    let mut next_step = Instant::now();
    loop {
        let running = session.status == Status::Running;
        tokio::select! {
            cmd = commands.recv() => {
                let Some(cmd) = cmd else { break };
                let was_running = session.status == Status::Running;
                match cmd {
                    Command::Instruct { text, reply } => {
                        let _ = reply.send(session.instruct(text));
                    }
                    Command::Control { op, reply } => {
                        let _ = reply.send(session.control(op));
                    }
                    Command::Log { reply } => {
                        let _ = reply.send(session.log());
                    }
                }
                if !was_running && session.status == Status::Running {
                    next_step = Instant::now() + pace;
                }
            }
            _ = sleep_until(next_step), if running => {
                session.advance();
                next_step = Instant::now() + pace;
            }
        }
    }
}
