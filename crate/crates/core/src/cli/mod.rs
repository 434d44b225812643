//! File formats and the commands behind the `cgplus` binary.

mod bench;
mod planfile;
mod scene;

pub use bench::{cmd_bench_stack, BenchReport, BenchRow, PhaseTimes};
pub use planfile::{ActionDto, GoalDto, PlanFile, StepDto};
pub use scene::{
    canonical, AboveDto, EntityDto, KindDto, PlanarDto, PoseDto, PrimRefDto, PrimitiveDto, SceneFile, ShapeDto,
    StatusDto, SupportDto, SurfaceDto, SCHEMA_VERSION,
};

use std::path::Path;
use std::time::Instant;

use log::info;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cgraph::{validate, ContactGraph};
use crate::goalsynth::{evolve, synthesize_poses_from, GAConfig, PoseOptConfig, SynthError};
use crate::planner::{self, validate_plan, PlanError, PlannerConfig, ValidationReport, PLACEMENT_TOL};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("no plan found: {0}")]
    NoPlan(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Validation(_) => 1,
            Self::Input(_) | Self::Io(_) => 2,
            Self::Infeasible(_) => 3,
            Self::NoPlan(_) => 4,
        }
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        match e {
            SynthError::InvalidConfig(m) => Self::Input(m),
            SynthError::Graph(g) => Self::Input(g.to_string()),
            other => Self::Infeasible(other.to_string()),
        }
    }
}

impl From<PlanError> for CliError {
    fn from(e: PlanError) -> Self {
        match e {
            PlanError::NodeSetMismatch(m) => Self::Input(m),
            PlanError::InconsistentGoal(_) => Self::Infeasible(e.to_string()),
            PlanError::PlanNotFound { reason, trace } => {
                Self::NoPlan(format!("{reason} (deepest partial plan: [{}])", trace.join(", ")))
            }
            PlanError::Synth(s) => s.into(),
            PlanError::Graph(g) => Self::Input(g.to_string()),
        }
    }
}

/// Every tunable of the pipeline. Config files may list any subset.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub ga: GAConfig,
    pub pose: PoseOptConfig,
    pub planner: PlannerConfig,
}

impl Config {
    /// Defaults of the stacking benchmark: a larger generation budget.
    pub fn bench_default() -> Self {
        let mut c = Self::default();
        c.ga.max_generations = 1000;
        c
    }

    /// `base` overridden by the JSON file at `path`, if any.
    pub fn load(path: Option<&Path>, base: Self) -> Result<Self, CliError> {
        let Some(path) = path else { return Ok(base) };
        let text = std::fs::read_to_string(path)?;
        let file: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let mut merged = serde_json::to_value(&base).expect("config serializes");
        merge(&mut merged, file);
        let cfg: Self =
            serde_json::from_value(merged).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        cfg.ga.validate()?;
        cfg.pose.validate()?;
        cfg.planner.swap_pose.validate()?;
        Ok(cfg)
    }

    /// Seeds every random stream from `seed`.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.ga.rng_seed = seed;
        self.pose.rng_seed = seed;
        self.planner.swap_pose.rng_seed = seed;
        self
    }
}

fn merge(base: &mut serde_json::Value, over: serde_json::Value) {
    match (base, over) {
        (serde_json::Value::Object(b), serde_json::Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

pub fn read_scene_file(path: &Path) -> Result<SceneFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    SceneFile::parse(&text).map_err(|e| match e {
        CliError::Input(m) => CliError::Input(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Parses and fully validates a scene.
pub fn load_scene(path: &Path) -> Result<ContactGraph, CliError> {
    let cg = read_scene_file(path)?.to_graph()?;
    check_physics(&cg)?;
    Ok(cg)
}

fn check_physics(cg: &ContactGraph) -> Result<(), CliError> {
    let violations = validate(cg).map_err(|e| CliError::Input(e.to_string()))?;
    if violations.is_empty() {
        return Ok(());
    }
    let list: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
    Err(CliError::Input(format!("scene violates {} constraint(s): {}", list.len(), list.join("; "))))
}

/// Initial graph and rough goal graph from a scene and a goal file.
pub fn load_problem(scene: &Path, goal: &Path) -> Result<(SceneFile, ContactGraph, ContactGraph), CliError> {
    let scene_file = read_scene_file(scene)?;
    let cg0 = scene_file.to_graph()?;
    check_physics(&cg0)?;
    let rough = read_scene_file(goal)?.merged_onto(&scene_file).to_graph()?;
    Ok((scene_file, cg0, rough))
}

/// Goal graph and the time spent on structure and pose synthesis.
pub fn synthesize_goal(rough: &ContactGraph, cfg: &Config) -> Result<(ContactGraph, f64, f64), CliError> {
    let t = Instant::now();
    let evolved = evolve(rough, &cfg.ga, &cfg.pose)?;
    let structure_s = t.elapsed().as_secs_f64();
    info!("structure found after {} generations (score {})", evolved.generations, evolved.score);
    let t = Instant::now();
    let goal = match synthesize_poses_from(&evolved.structure, &evolved.fresh, &cfg.pose) {
        Ok(g) => g,
        Err(SynthError::LayerInfeasible { .. } | SynthError::Unsatisfied(_)) => evolved.posed,
        Err(e) => return Err(e.into()),
    };
    let pose_s = t.elapsed().as_secs_f64();
    Ok((goal, structure_s, pose_s))
}

pub fn cmd_synth_goal(scene: &Path, goal: &Path, cfg: &Config) -> Result<SceneFile, CliError> {
    let (_, cg0, rough) = load_problem(scene, goal)?;
    if rough.structurally_equal(&cg0, PLACEMENT_TOL) {
        return Ok(SceneFile::from_graph(&cg0));
    }
    let (goal, structure_s, pose_s) = synthesize_goal(&rough, cfg)?;
    info!("timings: structure {structure_s:.3} s, poses {pose_s:.3} s");
    Ok(SceneFile::from_graph(&goal))
}

pub fn cmd_plan(scene: &Path, goal: &Path, cfg: &Config, seed: u64) -> Result<PlanFile, CliError> {
    let (_, cg0, rough) = load_problem(scene, goal)?;
    let goal = if rough.structurally_equal(&cg0, PLACEMENT_TOL) {
        cg0.clone()
    } else {
        let (g, structure_s, pose_s) = synthesize_goal(&rough, cfg)?;
        info!("timings: structure {structure_s:.3} s, poses {pose_s:.3} s");
        g
    };
    let t = Instant::now();
    let plan = planner::plan(&cg0, &goal, &cfg.planner)?;
    info!("timings: planning {:.3} s, {} actions", t.elapsed().as_secs_f64(), plan.len());
    Ok(PlanFile::new(&plan, &goal, seed, cfg))
}

pub fn cmd_validate(scene: &Path, plan: &Path) -> Result<ValidationReport, CliError> {
    let scene_file = read_scene_file(scene)?;
    let cg0 = scene_file.to_graph()?;
    let text = std::fs::read_to_string(plan).map_err(|e| CliError::Input(format!("{}: {e}", plan.display())))?;
    let file = PlanFile::parse(&text)?;
    let goal = file.goal_graph(&scene_file)?;
    let plan = file.plan(&cg0)?;
    validate_plan(&plan, &cg0, &goal).map_err(|e| CliError::Input(e.to_string()))
}
