use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::scenes::archetype_title;
use super::suite::{render_table, run_episodes, SuiteConfig, SuiteResult};
use crate::executive::{ParserVariant, PipelineConfig};
use crate::perception::FidelityProfile;
use crate::world::Archetype;
use crate::Error;

/// One design choice: a decomposition variant paired with a detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AblationRow {
    #[serde(default)]
    pub name: Option<String>,
    pub parser: ParserVariant,
    #[serde(deserialize_with = "crate::executive::profile_by_name_or_value")]
    pub profile: FidelityProfile,
}

impl AblationRow {
    pub fn new(parser: ParserVariant, profile: FidelityProfile) -> Self {
        Self {
            name: None,
            parser,
            profile,
        }
    }

    pub fn label(&self) -> String {
        self.name
            .clone()
            .unwrap_or_else(|| format!("{}+{}", self.parser.label(), self.profile.name))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AblationConfig {
    pub base: SuiteConfig,
    pub rows: Vec<AblationRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationEntry {
    pub label: String,
    pub result: SuiteResult,
}

/// Success rate per scene for each design choice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationTable {
    pub scenes: Vec<Archetype>,
    pub rows: Vec<AblationEntry>,
}

impl AblationTable {
    pub fn sr(&self, row: usize, archetype: Archetype) -> Option<f64> {
        self.rows.get(row)?.result.scene(archetype).map(|s| s.sr)
    }

    /// One line per design choice, SR in percent per scene.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("design_choice");
        for a in &self.scenes {
            let _ = write!(out, ",{}", archetype_title(*a));
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&csv_field(&row.label));
            for a in &self.scenes {
                let sr = row.result.scene(*a).map_or(0.0, |s| s.sr);
                let _ = write!(out, ",{:.2}", sr * 100.0);
            }
            out.push('\n');
        }
        out
    }

    pub fn to_text(&self) -> String {
        let rows: Vec<(String, &SuiteResult)> = self
            .rows
            .iter()
            .map(|r| (r.label.clone(), &r.result))
            .collect();
        render_table(&rows)
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Runs the base suite once per row. Every row sees the same episode specs
/// and seeds; only the parser variant and detector change.
pub fn ablation_matrix(base: &SuiteConfig, rows: &[AblationRow]) -> Result<AblationTable, Error> {
    if rows.is_empty() {
        return Err(Error::Config("ablation needs at least one row".into()));
    }
    let episodes = base.episodes()?;
    let mut entries = Vec::with_capacity(rows.len());
    for row in rows {
        row.profile.check().map_err(Error::Config)?;
        let pipeline = PipelineConfig {
            parser: row.parser.clone(),
            profile: row.profile.clone(),
            ..base.pipeline.clone()
        };
        let config = SuiteConfig {
            pipeline: pipeline.clone(),
            ..base.clone()
        };
        let run = run_episodes(&episodes, &pipeline, config.digest());
        entries.push(AblationEntry {
            label: row.label(),
            result: run.result,
        });
    }
    Ok(AblationTable {
        scenes: base.archetypes.clone(),
        rows: entries,
    })
}
