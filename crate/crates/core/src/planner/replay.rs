use super::{Plan, PLACEMENT_TOL};
use crate::cgraph::{apply_action, validate, ContactGraph, GraphError};

/// Outcome of replaying a plan.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub ok: bool,
    /// Steps replayed successfully.
    pub steps: usize,
    /// First failing step (0-based; `steps.len()` for the final comparison)
    /// and why it failed.
    pub failure: Option<(usize, String)>,
}

impl ValidationReport {
    fn fail(steps: usize, at: usize, why: impl Into<String>) -> Self {
        Self { ok: false, steps, failure: Some((at, why.into())) }
    }
}

/// Replays `plan` from `cg0`: every action's preconditions must hold, every
/// intermediate state must pass full validation and match the recorded
/// digest, and the final state must equal `cgg`.
pub fn validate_plan(plan: &Plan, cg0: &ContactGraph, cgg: &ContactGraph) -> Result<ValidationReport, GraphError> {
    if !validate(cg0)?.is_empty() {
        return Ok(ValidationReport::fail(0, 0, "initial state is invalid"));
    }
    if plan.initial_digest != cg0.digest() {
        return Ok(ValidationReport::fail(0, 0, "plan was made for a different initial state"));
    }
    let mut state = cg0.clone();
    for (i, step) in plan.steps.iter().enumerate() {
        state = match apply_action(&state, &step.action) {
            Ok(s) => s,
            Err(e) => return Ok(ValidationReport::fail(i, i, e.to_string())),
        };
        if let Some(v) = validate(&state)?.first() {
            return Ok(ValidationReport::fail(i, i, format!("{}: {v}", step.action)));
        }
        if state.digest() != step.digest {
            return Ok(ValidationReport::fail(i, i, format!("{}: state digest mismatch", step.action)));
        }
    }
    let n = plan.steps.len();
    if !state.structurally_equal(cgg, PLACEMENT_TOL) {
        return Ok(ValidationReport::fail(n, n, "final state differs from the goal"));
    }
    Ok(ValidationReport { ok: true, steps: n, failure: None })
}
