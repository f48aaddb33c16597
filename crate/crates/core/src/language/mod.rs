//! Instruction decomposition into typed sub-goals.

mod corrupt;
mod grammar;
mod remote;
mod types;

pub use corrupt::{corrupt_plan, corrupt_plan_traced, Corruption};
pub use grammar::{parse_instruction, parse_object_ref, ParseError, COMPOUND_LABELS};
pub use remote::{
    decode_response, remote_decompose, DecomposeError, DecomposeRequest, DecomposeResponse,
    DECOMPOSE_SCHEMA,
};
pub use types::{
    Instruction, ObjectRef, PlanSource, Relation, RelationKind, SubGoal, SubGoalKind, SubGoalPlan,
    DEFAULT_HOVER_SECONDS, DEFAULT_TAKEOFF_ALT,
};

const CORPUS: &str = include_str!("../../data/instructions.tsv");

/// The shipped instruction corpus as `(instruction, golden)` pairs. Goldens
/// use the compact notation described in the file header.
pub fn instruction_corpus() -> Vec<(&'static str, &'static str)> {
    CORPUS
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .filter_map(|l| l.split_once('\t'))
        .collect()
}
