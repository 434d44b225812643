//! JSON plan files.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::scene::{canonical, PlanarDto, SceneFile, StatusDto, SupportDto, SCHEMA_VERSION};
use super::{CliError, Config};
use crate::cgraph::{Action, ContactGraph, NodeId, Placement, PlanarPose, Status};
use crate::planner::{Plan, PlanStep};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case", deny_unknown_fields)]
pub enum ActionDto {
    Pick {
        parent: String,
        child: String,
    },
    Place {
        parent: String,
        child: String,
        surface: usize,
        pose: PlanarDto,
        dof: u8,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        child_face: Option<usize>,
    },
    Open {
        node: String,
    },
    Close {
        node: String,
    },
}

impl ActionDto {
    pub fn from_action(a: &Action) -> Self {
        match a {
            Action::Pick { parent, child } => Self::Pick { parent: parent.to_string(), child: child.to_string() },
            Action::Place { parent, child, placement } => Self::Place {
                parent: parent.to_string(),
                child: child.to_string(),
                surface: placement.surface,
                pose: PlanarDto { x: placement.pose.x, y: placement.pose.y, yaw: placement.pose.yaw },
                dof: placement.dof,
                child_face: placement.child_face,
            },
            Action::Open { node } => Self::Open { node: node.to_string() },
            Action::Close { node } => Self::Close { node: node.to_string() },
        }
    }

    /// The action, with every referenced node checked against `cg`.
    pub fn to_action(&self, cg: &ContactGraph) -> Result<Action, CliError> {
        let id = |s: &str| {
            let n = NodeId::new(s);
            if cg.contains(&n) {
                Ok(n)
            } else {
                Err(CliError::Input(format!("plan references unknown node {s}")))
            }
        };
        Ok(match self {
            Self::Pick { parent, child } => Action::Pick { parent: id(parent)?, child: id(child)? },
            Self::Place { parent, child, surface, pose, dof, child_face } => Action::Place {
                parent: id(parent)?,
                child: id(child)?,
                placement: Placement {
                    surface: *surface,
                    pose: PlanarPose::new(pose.x, pose.y, pose.yaw),
                    dof: *dof,
                    child_face: *child_face,
                },
            },
            Self::Open { node } => Action::Open { node: id(node)? },
            Self::Close { node } => Action::Close { node: id(node)? },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepDto {
    #[serde(flatten)]
    pub action: ActionDto,
    /// Digest of the state after this step.
    pub digest: String,
}

/// Relations and statuses of the goal the plan leads to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoalDto {
    pub supports: Vec<SupportDto>,
    #[serde(default)]
    pub statuses: BTreeMap<String, StatusDto>,
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanFile {
    pub schema_version: u32,
    pub seed: u64,
    pub config: Config,
    pub initial_digest: String,
    pub goal: GoalDto,
    pub length: usize,
    pub steps: Vec<StepDto>,
}

impl PlanFile {
    pub fn new(plan: &Plan, goal: &ContactGraph, seed: u64, config: &Config) -> Self {
        let file = SceneFile::from_graph(goal);
        let statuses = goal
            .statuses()
            .map(|(n, s)| {
                let s = match s {
                    Status::Closed => StatusDto::Closed,
                    Status::Opened => StatusDto::Opened,
                };
                (n.to_string(), s)
            })
            .collect();
        Self {
            schema_version: SCHEMA_VERSION,
            seed,
            config: config.clone(),
            initial_digest: plan.initial_digest.clone(),
            goal: GoalDto { supports: file.supports, statuses, digest: goal.digest() },
            length: plan.len(),
            steps: plan
                .steps
                .iter()
                .map(|s| StepDto { action: ActionDto::from_action(&s.action), digest: s.digest.clone() })
                .collect(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let file: Self =
            serde_json::from_str(text).map_err(|e| CliError::Input(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        if file.schema_version != SCHEMA_VERSION {
            return Err(CliError::Input(format!("unsupported schema_version {}", file.schema_version)));
        }
        if file.length != file.steps.len() {
            return Err(CliError::Input(format!("length {} does not match {} steps", file.length, file.steps.len())));
        }
        Ok(file)
    }

    pub fn to_canonical(&self) -> String {
        canonical(self)
    }

    pub fn plan(&self, scene: &ContactGraph) -> Result<Plan, CliError> {
        let steps = self
            .steps
            .iter()
            .map(|s| Ok(PlanStep { action: s.action.to_action(scene)?, digest: s.digest.clone() }))
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(Plan { initial_digest: self.initial_digest.clone(), steps })
    }

    /// The goal graph over the node set of `scene`.
    pub fn goal_graph(&self, scene: &SceneFile) -> Result<ContactGraph, CliError> {
        let mut file = scene.clone();
        file.supports = self.goal.supports.clone();
        let mut cg = file.to_graph()?;
        for (n, s) in &self.goal.statuses {
            let status = match s {
                StatusDto::Closed => Status::Closed,
                StatusDto::Opened => Status::Opened,
            };
            cg.set_status(&NodeId::new(n), status).map_err(|e| CliError::Input(e.to_string()))?;
        }
        if cg.digest() != self.goal.digest {
            return Err(CliError::Input("goal relations do not match the recorded goal digest".into()));
        }
        Ok(cg)
    }
}
