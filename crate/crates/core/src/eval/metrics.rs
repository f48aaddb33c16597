use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::executive::{EpisodeLog, EpisodeSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("no episodes to score")]
    EmptyInput,
    #[error("{logs} logs paired with {specs} specs")]
    LengthMismatch { logs: usize, specs: usize },
}

/// The per-episode quantities both metrics need.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeScore {
    pub success: bool,
    /// Length actually flown, meters.
    pub path_length: f64,
    /// Shortest possible length, meters.
    pub optimal_length: f64,
}

impl EpisodeScore {
    pub fn new(success: bool, path_length: f64, optimal_length: f64) -> Self {
        Self {
            success,
            path_length,
            optimal_length,
        }
    }

    pub fn from_log(log: &EpisodeLog, spec: &EpisodeSpec) -> Self {
        Self::new(log.is_success(), log.path_length(), spec.optimal_length)
    }

    /// Success weighted by optimal over actual path length.
    pub fn spl_term(&self) -> f64 {
        if !self.success {
            return 0.0;
        }
        let denom = self.path_length.max(self.optimal_length);
        if denom > 0.0 {
            self.optimal_length / denom
        } else {
            1.0
        }
    }
}

/// Fraction of successful episodes.
pub fn success_rate(scores: &[EpisodeScore]) -> Result<f64, MetricError> {
    if scores.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    Ok(scores.iter().filter(|s| s.success).count() as f64 / scores.len() as f64)
}

/// Mean success-weighted path-length ratio.
pub fn spl(scores: &[EpisodeScore]) -> Result<f64, MetricError> {
    if scores.is_empty() {
        return Err(MetricError::EmptyInput);
    }
    Ok(scores.iter().map(EpisodeScore::spl_term).sum::<f64>() / scores.len() as f64)
}

pub fn scores(
    logs: &[EpisodeLog],
    specs: &[EpisodeSpec],
) -> Result<Vec<EpisodeScore>, MetricError> {
    if logs.len() != specs.len() {
        return Err(MetricError::LengthMismatch {
            logs: logs.len(),
            specs: specs.len(),
        });
    }
    Ok(logs
        .iter()
        .zip(specs)
        .map(|(l, s)| EpisodeScore::from_log(l, s))
        .collect())
}
