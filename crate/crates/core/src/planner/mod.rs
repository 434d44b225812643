//! Task planning: the edit script between an initial and a goal contact
//! graph, temporal constraints over its actions, and a depth-first search for
//! an executable order with swap-node detours for blocked placements.

mod constraints;
mod ged;
mod replay;
mod search;

pub use constraints::derive_constraints;
pub use ged::{ged_edit_script, PLACEMENT_TOL};
pub use replay::{validate_plan, ValidationReport};
pub use search::{plan, resolve_infeasible, topo_plan, PlannerConfig};

use std::fmt;

use thiserror::Error;

use crate::cgraph::{Action, GraphError};
use crate::goalsynth::SynthError;

/// Why an action is in the script.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Origin {
    /// Edge or status difference between the two graphs.
    Edit,
    /// Temporary relocation of a child while its parent is re-oriented.
    Spatial,
    /// Opening or closing a container so that enclosed edits are possible.
    Access,
    /// Detour through the swap node for a blocked placement.
    Detour,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannedAction {
    pub id: usize,
    pub action: Action,
    pub origin: Origin,
    /// The placement is computed when the action is executed (swap poses).
    pub deferred: bool,
}

/// Ordered edit script; the cost is the number of actions.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EditScript {
    pub actions: Vec<PlannedAction>,
}

impl EditScript {
    pub fn cost(&self) -> usize {
        self.actions.len()
    }

    pub(crate) fn push(&mut self, action: Action, origin: Origin, deferred: bool) -> usize {
        let id = self.actions.len();
        self.actions.push(PlannedAction { id, action, origin, deferred });
        id
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConstraintReason {
    Precedence,
    Spatial,
    Accessibility,
}

/// `before` must execute before `after` (indices into the script).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TemporalConstraint {
    pub before: usize,
    pub after: usize,
    pub reason: ConstraintReason,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanStep {
    pub action: Action,
    /// Digest of the state after the action.
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plan {
    pub initial_digest: String,
    pub steps: Vec<PlanStep>,
}

impl Plan {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn actions(&self) -> impl Iterator<Item = &Action> {
        self.steps.iter().map(|s| &s.action)
    }
}

impl fmt::Display for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.steps.iter().enumerate() {
            writeln!(f, "{:>3}. {}", i + 1, s.action)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Error)]
pub enum PlanError {
    #[error("initial and goal graphs differ in their node sets: {0}")]
    NodeSetMismatch(String),
    #[error("goal is inconsistent: temporal constraints form a cycle through {0}")]
    InconsistentGoal(String),
    #[error("no plan found: {reason}")]
    PlanNotFound { reason: String, trace: Vec<String> },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Synth(#[from] SynthError),
}
