use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aerovln_core::eval::{
    ablation_matrix, ad_hoc_episode, generate_scene, instruction_goal, render_table,
    run_suite_detailed, AblationConfig, SuiteConfig,
};
use aerovln_core::executive::{
    run_episode, ParserVariant, PipelineConfig, DEFAULT_MAX_STEPS, DEFAULT_SUCCESS_RADIUS,
};
use aerovln_core::language::{parse_instruction, parse_object_ref, Instruction};
use aerovln_core::perception::FidelityProfile;
use aerovln_core::planner::PlannerConfig;
use aerovln_core::world::{ActionKind, Archetype, Scene};
use anyhow::{anyhow, bail, Context, Result};
use clap::{ArgGroup, Args};

/// Exit status when an episode ends in failure.
const FAILURE_OUTCOME: u8 = 2;

#[derive(Args)]
#[command(group(ArgGroup::new("source").required(true).args(["scene", "archetype"])))]
pub struct RunArgs {
    /// Scene document (`scene/1` JSON).
    #[arg(long)]
    scene: Option<PathBuf>,
    /// Generate a scene of this archetype instead of loading one.
    #[arg(long)]
    archetype: Option<String>,
    #[arg(long, default_value_t = 0)]
    scene_seed: u64,
    #[arg(long)]
    instruction: String,
    /// Goal object phrase; defaults to the instruction's last target.
    #[arg(long)]
    goal: Option<String>,
    /// Shipped profile name or a JSON profile file.
    #[arg(long, default_value = "ORACLE")]
    profile: String,
    /// Inject decomposition errors at this rate.
    #[arg(long)]
    corrupt: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    max_steps: usize,
    #[arg(long, default_value_t = DEFAULT_SUCCESS_RADIUS)]
    radius: f64,
    /// Where to write the JSONL log.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
pub struct SuiteArgs {
    /// Suite config (JSON).
    config: PathBuf,
    /// Output directory for `suite.json` and `suite.txt`.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Also write every episode log into this directory.
    #[arg(long)]
    logs: Option<PathBuf>,
}

#[derive(Args)]
pub struct AblateArgs {
    /// Ablation config (JSON): a base suite and the rows to compare.
    config: PathBuf,
    /// Output directory for `ablation.json`, `ablation.txt` and `ablation.csv`.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

pub(crate) fn load_profile(name: &str) -> Result<FidelityProfile> {
    if let Ok(p) = name.parse::<FidelityProfile>() {
        return Ok(p);
    }
    let path = Path::new(name);
    if !path.is_file() {
        bail!("unknown profile {name:?}");
    }
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let profile: FidelityProfile =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    profile.check().map_err(|e| anyhow!(e))?;
    Ok(profile)
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn run(args: RunArgs) -> Result<ExitCode> {
    let scene = match (&args.scene, &args.archetype) {
        (Some(path), _) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Scene::from_json(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        (None, Some(name)) => generate_scene(name.parse::<Archetype>()?, args.scene_seed),
        (None, None) => unreachable!("clap requires a scene source"),
    };
    let instruction = Instruction::new(args.instruction.clone())
        .ok_or_else(|| anyhow!("instruction is empty"))?;
    let goal = match &args.goal {
        Some(text) => {
            parse_object_ref(text).ok_or_else(|| anyhow!("cannot parse goal {text:?}"))?
        }
        None => {
            let plan = parse_instruction(&instruction, &ActionKind::ALL)
                .map_err(|e| anyhow!("cannot infer the goal: {e}; pass --goal"))?;
            instruction_goal(&plan)
                .ok_or_else(|| anyhow!("instruction names no goal object; pass --goal"))?
        }
    };
    let profile = load_profile(&args.profile)?;
    let parser = match args.corrupt {
        None => ParserVariant::Reference,
        Some(rate) if (0.0..=1.0).contains(&rate) => ParserVariant::Corrupted { rate },
        Some(rate) => bail!("corruption rate {rate} is outside [0, 1]"),
    };
    let config = PipelineConfig::new(parser, profile);
    let spec = ad_hoc_episode(
        scene,
        instruction,
        goal,
        args.seed,
        args.max_steps,
        args.radius,
        &PlannerConfig::default(),
    )?;

    let log = run_episode(&spec, &config);
    write(&args.out, &log.to_jsonl())?;
    println!(
        "{} steps={} path_length={:.3} log={}",
        log.outcome.outcome,
        log.steps.len(),
        log.path_length(),
        args.out.display()
    );
    Ok(if log.is_success() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(FAILURE_OUTCOME)
    })
}

pub fn suite(args: SuiteArgs) -> Result<ExitCode> {
    let config: SuiteConfig = read_json(&args.config)?;
    let run = run_suite_detailed(&config)?;
    let label = format!("{}+{}", run.result.parser, run.result.profile);
    let table = render_table(&[(label, &run.result)]);
    write(&args.out.join("suite.json"), &(run.result.to_json() + "\n"))?;
    write(&args.out.join("suite.txt"), &table)?;
    if let Some(dir) = &args.logs {
        let mut counters = std::collections::BTreeMap::new();
        for episode in &run.episodes {
            let n = counters.entry(episode.archetype).or_insert(0usize);
            let name = format!("{}-{:02}.jsonl", episode.spec.scene.name, n);
            *n += 1;
            write(&dir.join(name), &episode.log.to_jsonl())?;
        }
    }
    print!("{table}");
    Ok(ExitCode::SUCCESS)
}

pub fn ablate(args: AblateArgs) -> Result<ExitCode> {
    let config: AblationConfig = read_json(&args.config)?;
    let table = ablation_matrix(&config.base, &config.rows)?;
    let json = serde_json::to_string_pretty(&table)? + "\n";
    write(&args.out.join("ablation.json"), &json)?;
    write(&args.out.join("ablation.txt"), &table.to_text())?;
    write(&args.out.join("ablation.csv"), &table.to_csv())?;
    print!("{}", table.to_text());
    Ok(ExitCode::SUCCESS)
}
