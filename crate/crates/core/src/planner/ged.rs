use std::collections::BTreeSet;

use super::{EditScript, Origin, PlanError};
use crate::cgraph::{Action, ContactGraph, NodeId, Status};

/// Placements closer than this (m, rad) count as unchanged.
pub const PLACEMENT_TOL: f64 = 1e-6;

/// Minimal edit script between two graphs over the same node set. Nodes are
/// matched by id, so every relation whose parent or placement differs costs
/// one deletion (pick) and one insertion (place), and every differing status
/// one substitution.
pub fn ged_edit_script(cg0: &ContactGraph, cgg: &ContactGraph) -> Result<EditScript, PlanError> {
    let ids = |cg: &ContactGraph| cg.nodes().map(|n| n.id.clone()).collect::<BTreeSet<NodeId>>();
    let (a, b) = (ids(cg0), ids(cgg));
    if a != b {
        let only: Vec<String> = a.symmetric_difference(&b).map(|n| n.to_string()).collect();
        return Err(PlanError::NodeSetMismatch(only.join(", ")));
    }
    if let Some(h) = cgg.held() {
        return Err(PlanError::InconsistentGoal(format!("the goal holds {h}")));
    }

    let mut script = EditScript::default();
    for (child, goal) in cgg.edges() {
        if ContactGraph::is_gripper(child) {
            continue;
        }
        let now = cg0
            .edge(child)
            .ok_or_else(|| PlanError::NodeSetMismatch(format!("{child} has no relation initially")))?;
        if now.parent == goal.parent && now.placement.same_as(&goal.placement, PLACEMENT_TOL) {
            continue;
        }
        if !cg0.in_hand(child) {
            script.push(Action::Pick { parent: now.parent.clone(), child: child.clone() }, Origin::Edit, false);
        } else if !ContactGraph::is_gripper(&now.parent) {
            // carried along by the held object; nothing can free it
            return Err(PlanError::InconsistentGoal(format!("{child} rides on the held object")));
        }
        let place = Action::Place { parent: goal.parent.clone(), child: child.clone(), placement: goal.placement };
        script.push(place, Origin::Edit, false);
    }

    let nodes: BTreeSet<NodeId> = cg0.statuses().chain(cgg.statuses()).map(|(n, _)| n.clone()).collect();
    for n in nodes {
        match (cg0.status(&n), cgg.status(&n)) {
            (Some(s0), Some(sg)) if s0 == sg => {}
            (Some(Status::Closed), Some(Status::Opened)) => {
                script.push(Action::Open { node: n }, Origin::Edit, false);
            }
            (Some(Status::Opened), Some(Status::Closed)) => {
                script.push(Action::Close { node: n }, Origin::Edit, false);
            }
            _ => return Err(PlanError::NodeSetMismatch(format!("{n} has a status in only one graph"))),
        }
    }
    Ok(script)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn identical_graphs_need_no_edits() {
        let (cg, _) = fixtures::two_boxes_on_table();
        assert_eq!(ged_edit_script(&cg, &cg).unwrap().cost(), 0);
    }

    #[test]
    fn cabinet_goal_moves_both_objects_and_nothing_else() {
        let (cg0, goal) = fixtures::cabinet_scene();
        let script = ged_edit_script(&cg0, &goal).unwrap();
        let kinds: Vec<String> = script.actions.iter().map(|a| a.action.kind().to_string()).collect();
        assert_eq!(kinds, ["pick", "place", "pick", "place"]);
    }
}
