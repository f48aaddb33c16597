//! Episode execution: decompose, ground, plan, act, search when the target
//! is out of sight, and stop when the termination criteria hold.

mod log;
mod runner;
mod spec;
mod termination;

pub use log::{
    EpisodeLog, FailureReason, LogHeader, MatchedGoal, Outcome, OutcomeRecord, StepMode,
    StepRecord, LOG_SCHEMA,
};
pub use runner::{
    decompose, run_episode, EpisodeRunner, MAX_REAPPROACHES, MAX_SEARCH_ASCENTS, SCAN_TURNS,
    SEARCH_ASCENT,
};
pub(crate) use spec::profile_by_name_or_value;
pub use spec::{
    EpisodeSpec, ParserVariant, PipelineConfig, DEFAULT_MAX_STEPS, DEFAULT_REFINE_PASSES,
    DEFAULT_SUCCESS_RADIUS,
};
pub use termination::{check_termination, nearest_goal, PlanProgress, TerminationReport};
