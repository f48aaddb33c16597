//! Success metrics, procedural scenes, episode suites and ablations.

mod ablation;
mod metrics;
mod scenes;
mod suite;

pub use ablation::{ablation_matrix, AblationConfig, AblationEntry, AblationRow, AblationTable};
pub use metrics::{scores, spl, success_rate, EpisodeScore, MetricError};
pub use scenes::{archetype_title, archetype_vocabulary, generate_scene, COLORS, LANDMARK_COUNT};
pub use suite::{
    ad_hoc_episode, describe, generate_episodes, instruction_goal, optimal_length, render_table,
    run_episodes, run_suite, run_suite_detailed, Aggregate, EpisodeRun, SceneResult, SuiteConfig,
    SuiteResult, SuiteRun, DEFAULT_EPISODES_PER_SCENE,
};
