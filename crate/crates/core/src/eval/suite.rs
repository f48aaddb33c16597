use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::metrics::{spl, success_rate, EpisodeScore};
use super::scenes::{archetype_title, generate_scene};
use crate::executive::{
    run_episode, EpisodeLog, EpisodeSpec, PipelineConfig, DEFAULT_MAX_STEPS, DEFAULT_SUCCESS_RADIUS,
};
use crate::language::{Instruction, ObjectRef, RelationKind, SubGoalPlan, DEFAULT_TAKEOFF_ALT};
use crate::perception::{matches_ref, NEAR_THRESHOLD};
use crate::planner::{rasterize, Cell, OccupancyGrid, PlannerConfig};
use crate::rng::{derive_seed, seeded};
use crate::world::{
    validate_scene, visible_objects, Archetype, CameraModel, Pose, Scene, SceneObject, Vec3,
};
use crate::Error;

pub const DEFAULT_EPISODES_PER_SCENE: usize = 15;

/// Altitudes above ground at which the executive's scan can look.
const SCAN_ALTITUDES: [f64; 4] = [2.0, 3.0, 4.0, 5.0];

const TEMPLATES: [&str; 5] = [
    "take off, fly to the {}, then land",
    "launch, then navigate to the {} and then touch down",
    "take off, search for the {}, fly to the {}, then land",
    "lift off, head to the {}, then land",
    "take off, go to the {}, hover, then land",
];

/// Which scenes to build, how many episodes each, and the pipeline to run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(default = "all_archetypes")]
    pub archetypes: Vec<Archetype>,
    #[serde(default = "default_episodes")]
    pub episodes_per_scene: usize,
    #[serde(default)]
    pub scene_seed: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default = "default_radius")]
    pub success_radius: f64,
    pub pipeline: PipelineConfig,
}

fn all_archetypes() -> Vec<Archetype> {
    Archetype::ALL.to_vec()
}

fn default_episodes() -> usize {
    DEFAULT_EPISODES_PER_SCENE
}

fn default_max_steps() -> usize {
    DEFAULT_MAX_STEPS
}

fn default_radius() -> f64 {
    DEFAULT_SUCCESS_RADIUS
}

impl SuiteConfig {
    pub fn new(pipeline: PipelineConfig) -> Self {
        Self {
            archetypes: all_archetypes(),
            episodes_per_scene: DEFAULT_EPISODES_PER_SCENE,
            scene_seed: 0,
            seed: 0,
            max_steps: DEFAULT_MAX_STEPS,
            success_radius: DEFAULT_SUCCESS_RADIUS,
            pipeline,
        }
    }

    pub fn check(&self) -> Result<(), Error> {
        if self.archetypes.is_empty() {
            return Err(Error::Config("suite has no scenes".into()));
        }
        if self.episodes_per_scene == 0 {
            return Err(Error::Config("episodes_per_scene must be positive".into()));
        }
        if !(self.success_radius > 0.0) {
            return Err(Error::Config("success_radius must be positive".into()));
        }
        if self.max_steps == 0 {
            return Err(Error::Config("max_steps must be positive".into()));
        }
        self.pipeline.profile.check().map_err(Error::Config)?;
        if !(self.pipeline.planner.resolution > 0.0) {
            return Err(Error::Config("planner resolution must be positive".into()));
        }
        Ok(())
    }

    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(
            serde_json::to_vec(self).expect("config serializes"),
        ))
    }

    /// Episode specs per scene, in archetype order. They depend only on the
    /// scene seed, episode seed, radius, step budget and planner grid, never
    /// on the detector or parser, so ablation rows share them.
    pub fn episodes(&self) -> Result<Vec<(Archetype, Vec<EpisodeSpec>)>, Error> {
        self.check()?;
        self.archetypes
            .iter()
            .map(|&a| {
                let scene = generate_scene(a, self.scene_seed);
                let specs = generate_episodes(
                    &scene,
                    self.episodes_per_scene,
                    derive_seed(self.seed, a as u64),
                    self.success_radius,
                    self.max_steps,
                    &self.pipeline.planner,
                    &self.pipeline.camera,
                )?;
                Ok((a, specs))
            })
            .collect()
    }
}

/// Spoken form of an object reference.
pub fn describe(target: &ObjectRef) -> String {
    let mut words: Vec<&str> = target.attributes.iter().map(String::as_str).collect();
    words.push(&target.label);
    let mut text = words.join(" ");
    if let Some(rel) = &target.relation {
        let _ = write!(
            text,
            " {} the {}",
            relation_phrase(rel.kind),
            describe(&rel.anchor)
        );
    }
    text
}

fn relation_phrase(kind: RelationKind) -> &'static str {
    match kind {
        RelationKind::Near => "near",
        RelationKind::LeftOf => "left of",
        RelationKind::RightOf => "right of",
        RelationKind::InFrontOf => "in front of",
        RelationKind::Behind => "behind",
    }
}

fn multi_source_bfs(grid: &OccupancyGrid, from: Cell, goal: &BTreeSet<Cell>) -> Option<usize> {
    if !grid.is_free(&from) {
        return None;
    }
    let mut seen = BTreeSet::from([from]);
    let mut queue = VecDeque::from([(from, 0usize)]);
    while let Some((c, d)) = queue.pop_front() {
        if goal.contains(&c) {
            return Some(d);
        }
        for n in grid.neighbors(&c) {
            if seen.insert(n) {
                queue.push_back((n, d + 1));
            }
        }
    }
    None
}

/// Shortest flight to the goal region: the takeoff climb plus the grid
/// distance to any free cell within `radius` of a goal object center.
pub fn optimal_length(
    scene: &Scene,
    goals: &[&SceneObject],
    grid: &OccupancyGrid,
    radius: f64,
) -> Option<f64> {
    let start = scene.start_pose.position + Vec3::new(0.0, 0.0, DEFAULT_TAKEOFF_ALT);
    let from = grid.nearest_cell(&start);
    let region: BTreeSet<Cell> = goals
        .iter()
        .flat_map(|g| {
            let c = g.center();
            let reach = (radius / grid.resolution).ceil() as i64 + 1;
            let base = grid.nearest_cell(&c);
            let mut cells = Vec::new();
            for dz in -reach..=reach {
                for dy in -reach..=reach {
                    for dx in -reach..=reach {
                        let (x, y, z) =
                            (base.x as i64 + dx, base.y as i64 + dy, base.z as i64 + dz);
                        if x < 0 || y < 0 || z < 0 {
                            continue;
                        }
                        let cell = Cell::new(x as usize, y as usize, z as usize);
                        if grid.is_free(&cell) && grid.center(&cell).distance(&c) <= radius {
                            cells.push(cell);
                        }
                    }
                }
            }
            cells
        })
        .collect();
    let d = multi_source_bfs(grid, from, &region)?;
    Some(DEFAULT_TAKEOFF_ALT + d as f64 * grid.resolution)
}

/// Whether the in-place scan at some altitude would bring a goal into view.
fn discoverable(scene: &Scene, goals: &[&SceneObject], camera: &CameraModel) -> bool {
    let start = scene.start_pose;
    SCAN_ALTITUDES.iter().any(|&alt| {
        let p = start.position + Vec3::new(0.0, 0.0, alt);
        if p.z > scene.bounds.max.z {
            return false;
        }
        (0..8).any(|k| {
            let pose = Pose::new(p, start.yaw + k as f64 * std::f64::consts::FRAC_PI_4);
            visible_objects(&pose, camera, scene)
                .iter()
                .any(|s| goals.iter().any(|g| g.id == s.object.id))
        })
    })
}

/// Whether touching down near some goal can end within `radius` of its
/// center, leaving at least one grid step of horizontal slack.
fn landable(scene: &Scene, goals: &[&SceneObject], radius: f64, resolution: f64) -> bool {
    let height = (radius * radius - resolution * resolution).max(0.0).sqrt();
    goals
        .iter()
        .any(|g| g.center().z - scene.ground() <= height)
}

/// Builds `count` feasible episodes over the scene's landmarks: each goal is
/// reachable on the planner grid, visible from some scan pose, and low
/// enough that landing beside it stays within the success radius.
pub fn generate_episodes(
    scene: &Scene,
    count: usize,
    seed: u64,
    success_radius: f64,
    max_steps: usize,
    planner: &PlannerConfig,
    camera: &CameraModel,
) -> Result<Vec<EpisodeSpec>, Error> {
    let grid = rasterize(scene, planner.resolution, planner.clearance);
    let mut rng = seeded(seed);
    let mut landmarks: Vec<&SceneObject> =
        scene.objects.iter().filter(|o| !o.is_obstacle).collect();
    landmarks.shuffle(&mut rng);

    let pose = scene.start_pose;
    let mut candidates = Vec::new();
    for (k, obj) in landmarks.iter().enumerate() {
        let plain =
            ObjectRef::new(obj.label.clone()).with_attributes(obj.attributes.iter().cloned());
        let anchor = scene
            .objects
            .iter()
            .filter(|o| !o.is_obstacle && o.id != obj.id && o.label != obj.label)
            .find(|o| o.center().distance(&obj.center()) <= NEAR_THRESHOLD);
        let goal = match anchor {
            Some(a) if k % 3 == 2 => {
                plain.related(RelationKind::Near, ObjectRef::new(a.label.clone()))
            }
            _ => plain,
        };
        let goals: Vec<&SceneObject> = scene
            .objects
            .iter()
            .filter(|o| matches_ref(o, &goal, scene, &pose))
            .collect();
        if !discoverable(scene, &goals, camera)
            || !landable(scene, &goals, success_radius, planner.resolution)
        {
            continue;
        }
        if let Some(len) = optimal_length(scene, &goals, &grid, success_radius) {
            candidates.push((goal, len));
        }
    }
    if candidates.is_empty() {
        return Err(Error::Config(format!(
            "scene {} has no feasible goals",
            scene.name
        )));
    }
    Ok((0..count)
        .map(|i| {
            let (goal, len) = &candidates[i % candidates.len()];
            let phrase = describe(goal);
            let text = TEMPLATES[i % TEMPLATES.len()].replace("{}", &phrase);
            EpisodeSpec {
                scene: scene.clone(),
                instruction: Instruction::new(text).expect("template is non-empty"),
                goal: goal.clone(),
                success_radius,
                optimal_length: *len,
                seed: derive_seed(seed, i as u64),
                max_steps,
            }
        })
        .collect())
}

/// The object an instruction is ultimately about: the target of its last
/// object-directed sub-goal.
pub fn instruction_goal(plan: &SubGoalPlan) -> Option<ObjectRef> {
    plan.subgoals.iter().rev().find_map(|s| s.target().cloned())
}

/// Episode for an ad hoc instruction in a given scene. The optimal length is
/// the grid shortest path when one exists; otherwise the straight-line lower
/// bound, so unreachable goals still yield a runnable episode.
pub fn ad_hoc_episode(
    scene: Scene,
    instruction: Instruction,
    goal: ObjectRef,
    seed: u64,
    max_steps: usize,
    success_radius: f64,
    planner: &PlannerConfig,
) -> Result<EpisodeSpec, Error> {
    let violations = validate_scene(&scene);
    if !violations.is_empty() {
        return Err(Error::Config(format!(
            "invalid scene {}: {violations:?}",
            scene.name
        )));
    }
    if max_steps == 0 {
        return Err(Error::Config("max_steps must be positive".into()));
    }
    let pose = scene.start_pose;
    let goals: Vec<&SceneObject> = scene
        .objects
        .iter()
        .filter(|o| matches_ref(o, &goal, &scene, &pose))
        .collect();
    if goals.is_empty() {
        return Err(Error::Config(format!(
            "goal {goal} matches no object in {}",
            scene.name
        )));
    }
    let grid = rasterize(&scene, planner.resolution, planner.clearance);
    let takeoff = pose.position + Vec3::new(0.0, 0.0, DEFAULT_TAKEOFF_ALT);
    let optimal = optimal_length(&scene, &goals, &grid, success_radius).unwrap_or_else(|| {
        let gap = goals
            .iter()
            .map(|g| g.center().distance(&takeoff) - success_radius)
            .fold(f64::INFINITY, f64::min);
        DEFAULT_TAKEOFF_ALT + gap.max(0.0)
    });
    let spec = EpisodeSpec {
        scene,
        instruction,
        goal,
        success_radius,
        optimal_length: optimal,
        seed,
        max_steps,
    };
    spec.check()?;
    Ok(spec)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneResult {
    pub archetype: Archetype,
    pub scene: String,
    pub episodes: usize,
    pub successes: usize,
    pub sr: f64,
    pub spl: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub episodes: usize,
    pub successes: usize,
    pub sr: f64,
    pub spl: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub config_digest: String,
    pub profile: String,
    pub parser: String,
    pub scenes: Vec<SceneResult>,
    pub overall: Aggregate,
}

impl SuiteResult {
    pub fn scene(&self, archetype: Archetype) -> Option<&SceneResult> {
        self.scenes.iter().find(|s| s.archetype == archetype)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }
}

/// One executed episode of a suite.
#[derive(Debug, Clone)]
pub struct EpisodeRun {
    pub archetype: Archetype,
    pub spec: EpisodeSpec,
    pub log: EpisodeLog,
}

#[derive(Debug, Clone)]
pub struct SuiteRun {
    pub result: SuiteResult,
    pub episodes: Vec<EpisodeRun>,
}

fn aggregate(scores: &[EpisodeScore]) -> Aggregate {
    Aggregate {
        episodes: scores.len(),
        successes: scores.iter().filter(|s| s.success).count(),
        sr: success_rate(scores).unwrap_or(0.0),
        spl: spl(scores).unwrap_or(0.0),
    }
}

/// Runs prepared episodes with `pipeline`. Episodes run in parallel; results
/// are folded in input order.
pub fn run_episodes(
    episodes: &[(Archetype, Vec<EpisodeSpec>)],
    pipeline: &PipelineConfig,
    config_digest: String,
) -> SuiteRun {
    let flat: Vec<(Archetype, &EpisodeSpec)> = episodes
        .iter()
        .flat_map(|(a, specs)| specs.iter().map(move |s| (*a, s)))
        .collect();
    let runs: Vec<EpisodeRun> = flat
        .par_iter()
        .map(|(a, spec)| EpisodeRun {
            archetype: *a,
            spec: (*spec).clone(),
            log: run_episode(spec, pipeline),
        })
        .collect();
    let mut scenes = Vec::new();
    for (a, specs) in episodes {
        let scores: Vec<EpisodeScore> = runs
            .iter()
            .filter(|r| r.archetype == *a)
            .map(|r| EpisodeScore::from_log(&r.log, &r.spec))
            .collect();
        let agg = aggregate(&scores);
        scenes.push(SceneResult {
            archetype: *a,
            scene: specs
                .first()
                .map(|s| s.scene.name.clone())
                .unwrap_or_default(),
            episodes: agg.episodes,
            successes: agg.successes,
            sr: agg.sr,
            spl: agg.spl,
        });
    }
    let all: Vec<EpisodeScore> = runs
        .iter()
        .map(|r| EpisodeScore::from_log(&r.log, &r.spec))
        .collect();
    SuiteRun {
        result: SuiteResult {
            config_digest,
            profile: pipeline.profile.name.clone(),
            parser: pipeline.parser.label(),
            scenes,
            overall: aggregate(&all),
        },
        episodes: runs,
    }
}

/// Generates the suite's episodes and runs them, keeping every log.
pub fn run_suite_detailed(config: &SuiteConfig) -> Result<SuiteRun, Error> {
    let episodes = config.episodes()?;
    Ok(run_episodes(&episodes, &config.pipeline, config.digest()))
}

pub fn run_suite(config: &SuiteConfig) -> Result<SuiteResult, Error> {
    run_suite_detailed(config).map(|r| r.result)
}

/// Aligned text table with an SR and SPL column pair per scene.
pub fn render_table(rows: &[(String, &SuiteResult)]) -> String {
    let scenes: Vec<Archetype> = rows
        .first()
        .map(|(_, r)| r.scenes.iter().map(|s| s.archetype).collect())
        .unwrap_or_default();
    let name_w = rows.iter().map(|(n, _)| n.len()).max().unwrap_or(0).max(6);
    let col_w = scenes
        .iter()
        .map(|a| archetype_title(*a).len())
        .max()
        .unwrap_or(0)
        .max(17);
    let mut out = String::new();
    let _ = write!(out, "{:name_w$}", "");
    for a in &scenes {
        let _ = write!(out, " | {:^col_w$}", archetype_title(*a));
    }
    out.push('\n');
    let _ = write!(out, "{:name_w$}", "");
    let half = (col_w - 1) / 2;
    let rest = col_w - 1 - half;
    for _ in &scenes {
        let _ = write!(out, " | {:>half$} {:>rest$}", "SR", "SPL");
    }
    out.push('\n');
    for (name, result) in rows {
        let _ = write!(out, "{name:name_w$}");
        for a in &scenes {
            match result.scene(*a) {
                Some(s) => {
                    let sr = format!("{:.2}%", s.sr * 100.0);
                    let _ = write!(out, " | {sr:>half$} {:>rest$.4}", s.spl);
                }
                None => {
                    let _ = write!(out, " | {:>half$} {:>rest$}", "-", "-");
                }
            }
        }
        out.push('\n');
    }
    out
}
