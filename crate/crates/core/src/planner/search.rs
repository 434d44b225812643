use std::collections::{BTreeSet, HashSet};

use log::debug;
use serde::{Deserialize, Serialize};

use super::{
    derive_constraints, ged_edit_script, ConstraintReason, EditScript, Origin, Plan, PlanError, PlanStep,
    TemporalConstraint,
};
use crate::cgraph::{
    apply_action, check_relation, collision_pairs, pair_distance, Action, ContactGraph, NodeId, Placement, SurfaceKind,
};
use crate::goalsynth::{solve_layer, PoseOptConfig, SynthError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlannerConfig {
    /// Search nodes expanded per pass before giving up.
    pub max_expansions: usize,
    /// Optimizer settings for temporary poses on the swap node.
    pub swap_pose: PoseOptConfig,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self { max_expansions: 20_000, swap_pose: PoseOptConfig { max_iters: 500, ..PoseOptConfig::default() } }
    }
}

/// Edit script, constraints and ordered plan from `cg0` to `cgg`.
pub fn plan(cg0: &ContactGraph, cgg: &ContactGraph, cfg: &PlannerConfig) -> Result<Plan, PlanError> {
    let script = ged_edit_script(cg0, cgg)?;
    let (script, constraints) = derive_constraints(&script, cg0, cgg)?;
    topo_plan(&script, &constraints, cg0, cg0.swap(), cfg)
}

#[derive(Clone)]
struct Node {
    script: EditScript,
    constraints: Vec<TemporalConstraint>,
    done: Vec<bool>,
    state: ContactGraph,
    steps: Vec<PlanStep>,
    detours: usize,
}

enum Failure {
    /// The placement collides with these nodes.
    Blocked(Vec<NodeId>, String),
    Rejected(String),
}

struct Search<'a> {
    cfg: &'a PlannerConfig,
    swap: Option<&'a NodeId>,
    detours: bool,
    max_detours: usize,
    expansions: usize,
    visited: HashSet<(String, Vec<bool>)>,
    deepest: (Vec<String>, String),
}

/// Depth-first search for an order of the script's actions that respects
/// the constraints, holds at most one object, and passes the local geometric
/// checks after every placement. A first pass uses the script as is; a second
/// pass may route blocked placements through the swap node.
pub fn topo_plan(
    script: &EditScript,
    constraints: &[TemporalConstraint],
    cg0: &ContactGraph,
    swap: Option<&NodeId>,
    cfg: &PlannerConfig,
) -> Result<Plan, PlanError> {
    cfg.swap_pose.validate()?;
    let root = Node {
        script: script.clone(),
        constraints: constraints.to_vec(),
        done: vec![false; script.actions.len()],
        state: cg0.clone(),
        steps: Vec::new(),
        detours: 0,
    };
    let mut search = Search {
        cfg,
        swap,
        detours: false,
        max_detours: script.actions.iter().filter(|a| matches!(a.action, Action::Pick { .. })).count(),
        expansions: 0,
        visited: HashSet::new(),
        deepest: (Vec::new(), "no action is executable".into()),
    };
    for detours in [false, true] {
        if detours && swap.is_none() {
            break;
        }
        search.detours = detours;
        search.expansions = 0;
        search.visited.clear();
        if let Some(steps) = search.dfs(root.clone())? {
            return Ok(Plan { initial_digest: cg0.digest(), steps });
        }
        debug!("pass with detours={detours} failed after {} expansions", search.expansions);
    }
    let (trace, reason) = search.deepest;
    Err(PlanError::PlanNotFound { reason, trace })
}

impl Search<'_> {
    fn dfs(&mut self, node: Node) -> Result<Option<Vec<PlanStep>>, PlanError> {
        if node.done.iter().all(|d| *d) {
            return Ok(Some(node.steps));
        }
        if self.expansions >= self.cfg.max_expansions {
            self.note(&node, format!("search budget of {} expansions exhausted", self.cfg.max_expansions));
            return Ok(None);
        }
        self.expansions += 1;
        if !self.visited.insert((node.state.digest(), node.done.clone())) {
            return Ok(None);
        }
        let candidates = ready(&node);
        for &i in &candidates {
            let next = match attempt(&node, i, self.cfg) {
                Ok(next) => next,
                Err(Failure::Rejected(why)) => {
                    self.note(&node, why);
                    continue;
                }
                Err(Failure::Blocked(blockers, why)) => {
                    self.note(&node, why);
                    let Some(swap) = self.detour_swap(&node) else { continue };
                    let (script, constraints) =
                        match resolve_infeasible(&node.script, &node.constraints, &node.done, i, &blockers, swap) {
                            Ok(x) => x,
                            Err(_) => continue,
                        };
                    let mut done = node.done.clone();
                    done.resize(script.actions.len(), false);
                    let amended = Node { script, constraints, done, detours: node.detours + 1, ..node.clone() };
                    match attempt(&amended, i, self.cfg) {
                        Ok(next) => next,
                        Err(Failure::Rejected(why) | Failure::Blocked(_, why)) => {
                            self.note(&amended, why);
                            continue;
                        }
                    }
                }
            };
            if let Some(steps) = self.dfs(next)? {
                return Ok(Some(steps));
            }
        }
        // the held object cannot be placed yet: set it down on the swap node
        if let (Some(swap), Some(h)) = (self.detour_swap(&node), node.state.held()) {
            let pending = node.script.actions.iter().position(|a| {
                !node.done[a.id] && a.origin != Origin::Detour && matches!(&a.action, Action::Place { child, .. } if *child == h)
            });
            if let Some(i) = pending.filter(|i| !candidates.contains(i)) {
                if let Ok((script, constraints)) =
                    resolve_infeasible(&node.script, &node.constraints, &node.done, i, &[], swap)
                {
                    let mut done = node.done.clone();
                    done.resize(script.actions.len(), false);
                    let amended = Node { script, constraints, done, detours: node.detours + 1, ..node.clone() };
                    match attempt(&amended, i, self.cfg) {
                        Ok(next) => return self.dfs(next),
                        Err(Failure::Rejected(why) | Failure::Blocked(_, why)) => self.note(&amended, why),
                    }
                }
            }
        }
        Ok(None)
    }

    /// The swap node, while detours are enabled and the budget of one per
    /// object moved by the original script lasts.
    fn detour_swap(&self, node: &Node) -> Option<&NodeId> {
        (self.detours && node.detours < self.max_detours).then_some(self.swap).flatten()
    }

    fn note(&mut self, node: &Node, reason: String) {
        if node.steps.len() >= self.deepest.0.len() {
            self.deepest = (node.steps.iter().map(|s| s.action.to_string()).collect(), reason);
        }
    }
}

/// Executable actions of `node` in tie-break order: fewest unmet successors,
/// shallowest target, lowest id. While an object is held only its placement
/// and container operations are eligible.
fn ready(node: &Node) -> Vec<usize> {
    let n = node.script.actions.len();
    let mut blocked = vec![false; n];
    let mut unmet = vec![0usize; n];
    for c in &node.constraints {
        if !node.done[c.before] {
            blocked[c.after] = true;
        }
        if !node.done[c.after] {
            unmet[c.before] += 1;
        }
    }
    let held = node.state.held();
    let mut out: Vec<usize> = (0..n)
        .filter(|&i| !node.done[i] && !blocked[i])
        .filter(|&i| match (&held, &node.script.actions[i].action) {
            (None, _) => true,
            (Some(h), Action::Place { child, .. }) => child == h,
            (Some(_), Action::Pick { .. }) => false,
            (Some(_), _) => true,
        })
        .collect();
    out.sort_by_key(|&i| (unmet[i], node.state.depth(node.script.actions[i].action.target()), i));
    out
}

fn attempt(node: &Node, i: usize, cfg: &PlannerConfig) -> Result<Node, Failure> {
    let planned = &node.script.actions[i];
    let action = if planned.deferred {
        let Action::Place { parent, child, .. } = &planned.action else {
            return Err(Failure::Rejected(format!("{} cannot be deferred", planned.action)));
        };
        let placement = park(&node.state, child, parent, &cfg.swap_pose, node.steps.len() as u64)
            .map_err(|e| Failure::Rejected(format!("no free spot for {child} on {parent}: {e}")))?;
        Action::Place { parent: parent.clone(), child: child.clone(), placement }
    } else {
        planned.action.clone()
    };
    let state = apply_action(&node.state, &action).map_err(|e| Failure::Rejected(e.to_string()))?;
    if let Action::Place { child, .. } = &action {
        check_local(&state, child).map_err(|(blockers, why)| Failure::Blocked(blockers, format!("{action}: {why}")))?;
    }
    let mut next = node.clone();
    next.script.actions[i].action = action.clone();
    next.script.actions[i].deferred = false;
    next.done[i] = true;
    next.steps.push(PlanStep { action, digest: state.digest() });
    next.state = state;
    Ok(next)
}

/// Geometric check of a fresh placement: level support, stability or
/// containment, and no penetration between the placed subtree and others.
fn check_local(cg: &ContactGraph, child: &NodeId) -> Result<(), (Vec<NodeId>, String)> {
    let err = |e: crate::cgraph::GraphError| (Vec::new(), e.to_string());
    let poses = cg.world_poses().map_err(err)?;
    let edge = cg.edge(child).expect("placed child has a relation");
    let surface = cg.world_surface(&edge.parent, edge.placement.surface, &poses).map_err(err)?;
    if !surface.faces_up() {
        return Err((Vec::new(), format!("surface {} of {} is not level", edge.placement.surface, edge.parent)));
    }
    if !check_relation(cg, child, &poses).map_err(err)? {
        return Err((Vec::new(), format!("{child} is not supported by {}", edge.parent)));
    }
    let sub: BTreeSet<NodeId> = cg.subtree(child).into_iter().collect();
    for d in sub.iter().filter(|d| *d != child) {
        let e = cg.edge(d).expect("descendant has a relation");
        let level = cg.world_surface(&e.parent, e.placement.surface, &poses).map_err(err)?.faces_up();
        if !level || !check_relation(cg, d, &poses).map_err(err)? {
            return Err((Vec::new(), format!("{d} is no longer supported by {}", e.parent)));
        }
    }
    let mut blockers = BTreeSet::new();
    for (a, b) in collision_pairs(cg) {
        let other = match (sub.contains(&a.node), sub.contains(&b.node)) {
            (true, false) => &b.node,
            (false, true) => &a.node,
            _ => continue,
        };
        if pair_distance(cg, &a, &b, &poses, 1e-3).map_err(err)? <= 0.0 {
            blockers.insert(other.clone());
        }
    }
    if blockers.is_empty() {
        Ok(())
    } else {
        let names: Vec<String> = blockers.iter().map(|b| b.to_string()).collect();
        Err((blockers.into_iter().collect(), format!("collides with {}", names.join(", "))))
    }
}

/// A collision-free placement for the held `child` on `parent`, leaving
/// everything else in place.
fn park(
    cg: &ContactGraph,
    child: &NodeId,
    parent: &NodeId,
    cfg: &PoseOptConfig,
    tag: u64,
) -> Result<Placement, SynthError> {
    let surface = cg
        .node(parent)?
        .surfaces
        .iter()
        .position(|s| s.kind == SurfaceKind::Support)
        .ok_or_else(|| SynthError::LayerInfeasible {
            parent: parent.clone(),
            residual: vec![("no support surface".into(), 1.0)],
        })?;
    let mut g = cg.clone();
    g.attach(child, parent, Placement::on(surface, Default::default()))?;
    let fresh: BTreeSet<NodeId> = [child.clone()].into_iter().collect();
    let poses = solve_layer(&g, parent, &fresh, cfg, tag, false)?;
    Ok(Placement::on(surface, poses[child]))
}

/// Routes the blocked placement `index` through `swap`: the object is parked
/// there now, and picked again and placed at its target once every blocker
/// has been picked. Successors of the original placement now wait for the
/// final one.
pub fn resolve_infeasible(
    script: &EditScript,
    constraints: &[TemporalConstraint],
    done: &[bool],
    index: usize,
    blockers: &[NodeId],
    swap: &NodeId,
) -> Result<(EditScript, Vec<TemporalConstraint>), PlanError> {
    let not_found = |reason: String| PlanError::PlanNotFound { reason, trace: Vec::new() };
    let planned = script.actions.get(index).ok_or_else(|| not_found(format!("no action {index}")))?;
    let Action::Place { parent, child, placement } = &planned.action else {
        return Err(not_found(format!("{} is not a placement", planned.action)));
    };
    if planned.origin == Origin::Detour && parent == swap {
        return Err(not_found(format!("{child} is blocked on the swap node itself")));
    }
    let mut picks = Vec::new();
    for b in blockers {
        let pick = script.actions.iter().position(|a| {
            !done.get(a.id).copied().unwrap_or(false) && matches!(&a.action, Action::Pick { child, .. } if child == b)
        });
        match pick {
            Some(p) => picks.push(p),
            None => return Err(not_found(format!("{child} is blocked by {b}, which stays in place"))),
        }
    }

    let mut out = script.clone();
    let target = Action::Place { parent: parent.clone(), child: child.clone(), placement: *placement };
    out.actions[index].action =
        Action::Place { parent: swap.clone(), child: child.clone(), placement: Placement::on(0, Default::default()) };
    out.actions[index].origin = Origin::Detour;
    out.actions[index].deferred = true;
    let back = out.push(Action::Pick { parent: swap.clone(), child: child.clone() }, Origin::Detour, false);
    let last = out.push(target, Origin::Detour, false);

    let mut cons: BTreeSet<TemporalConstraint> = BTreeSet::new();
    for c in constraints {
        if c.before == index {
            cons.insert(TemporalConstraint { before: last, ..*c });
        } else {
            cons.insert(*c);
            if c.after == index {
                cons.insert(TemporalConstraint { after: last, ..*c });
            }
        }
    }
    let mut add = |before, after, reason| {
        cons.insert(TemporalConstraint { before, after, reason });
    };
    add(index, back, ConstraintReason::Precedence);
    add(back, last, ConstraintReason::Precedence);
    for p in picks {
        add(p, back, ConstraintReason::Spatial);
    }
    Ok((out, cons.into_iter().collect()))
}
