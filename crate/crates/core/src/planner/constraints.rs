use std::collections::{BTreeMap, BTreeSet};

use super::{ConstraintReason, EditScript, Origin, PlanError, TemporalConstraint};
use crate::cgraph::{Action, ContactGraph, NodeId, Placement, PlanarPose, Status, SurfaceKind};

#[derive(Default)]
struct Index {
    pick: BTreeMap<NodeId, usize>,
    place: BTreeMap<NodeId, usize>,
    open: BTreeMap<NodeId, usize>,
    close: BTreeMap<NodeId, usize>,
}

impl Index {
    fn of(script: &EditScript) -> Self {
        let mut ix = Self::default();
        for a in &script.actions {
            ix.note(a.id, &a.action);
        }
        ix
    }

    fn note(&mut self, id: usize, action: &Action) {
        let map = match action {
            Action::Pick { .. } => &mut self.pick,
            Action::Place { .. } => &mut self.place,
            Action::Open { .. } => &mut self.open,
            Action::Close { .. } => &mut self.close,
        };
        map.entry(action.target().clone()).or_insert(id);
    }
}

struct Builder {
    script: EditScript,
    ix: Index,
    out: BTreeSet<TemporalConstraint>,
}

impl Builder {
    fn push(&mut self, action: Action, origin: Origin, deferred: bool) -> usize {
        let id = self.script.push(action, origin, deferred);
        self.ix.note(id, &self.script.actions[id].action);
        id
    }

    fn order(&mut self, before: usize, after: usize, reason: ConstraintReason) {
        if before != after {
            self.out.insert(TemporalConstraint { before, after, reason });
        }
    }
}

/// Temporal constraints over `script`, which is extended with the actions the
/// constraints require: temporary relocations of children whose parent is
/// re-oriented, and Open/Close pairs around edits inside closed containers.
/// Fails if the constraints are cyclic.
pub fn derive_constraints(
    script: &EditScript,
    cg0: &ContactGraph,
    cgg: &ContactGraph,
) -> Result<(EditScript, Vec<TemporalConstraint>), PlanError> {
    let mut b = Builder { script: script.clone(), ix: Index::of(script), out: BTreeSet::new() };
    spatial(&mut b, cg0)?;
    precedence(&mut b, cg0, cgg);
    accessibility(&mut b, cg0, cgg);
    let constraints: Vec<TemporalConstraint> = b.out.into_iter().collect();
    check_acyclic(&b.script, &constraints)?;
    Ok((b.script, constraints))
}

/// A re-oriented node must first shed the children that stay on it; they
/// wait on the swap node and return once the node is placed.
fn spatial(b: &mut Builder, cg0: &ContactGraph) -> Result<(), PlanError> {
    let flips: Vec<(NodeId, usize, usize)> = b
        .ix
        .place
        .iter()
        .filter_map(|(v, &place)| {
            let Action::Place { placement, .. } = &b.script.actions[place].action else { return None };
            let before = cg0.edge(v)?;
            let pick = *b.ix.pick.get(v)?;
            (before.placement.child_face != placement.child_face).then(|| (v.clone(), pick, place))
        })
        .collect();
    for (v, pick_v, place_v) in flips {
        let staying: Vec<NodeId> = cg0.children(&v).into_iter().filter(|d| !b.ix.pick.contains_key(d)).collect();
        if staying.is_empty() {
            continue;
        }
        let swap = cg0
            .swap()
            .cloned()
            .ok_or_else(|| PlanError::InconsistentGoal(format!("re-orienting {v} needs a swap node")))?;
        for d in staying {
            let edge = cg0.edge(&d).expect("child has a relation").clone();
            let q1 = b.push(Action::Pick { parent: v.clone(), child: d.clone() }, Origin::Spatial, false);
            let parked = Placement::on(0, PlanarPose::default());
            let q2 = b.push(Action::Place { parent: swap.clone(), child: d.clone(), placement: parked }, Origin::Spatial, true);
            let q3 = b.push(Action::Pick { parent: swap.clone(), child: d.clone() }, Origin::Spatial, false);
            let back = Action::Place { parent: v.clone(), child: d.clone(), placement: edge.placement };
            let q4 = b.push(back, Origin::Spatial, false);
            for (x, y) in [(q1, q2), (q2, q3), (q3, q4), (q1, pick_v), (place_v, q4)] {
                b.order(x, y, ConstraintReason::Spatial);
            }
        }
    }
    Ok(())
}

fn precedence(b: &mut Builder, cg0: &ContactGraph, cgg: &ContactGraph) {
    let mut pairs = Vec::new();
    for a in &b.script.actions {
        match &a.action {
            Action::Pick { parent, child } if cg0.parent(child) == Some(parent) => {
                if let Some((m, ride)) = first_moving_ancestor(b, cg0, cgg, child) {
                    if ride {
                        // carried along with m, then re-placed
                        pairs.push((b.ix.place[&m], a.id));
                    } else {
                        pairs.push((a.id, b.ix.pick[&m]));
                    }
                }
                if let Some(&place) = b.ix.place.get(child) {
                    pairs.push((a.id, place));
                }
            }
            Action::Place { parent, .. } => {
                if let Some(&pp) = b.ix.place.get(parent) {
                    pairs.push((pp, a.id));
                }
            }
            _ => {}
        }
    }
    for (x, y) in pairs {
        b.order(x, y, ConstraintReason::Precedence);
    }
}

/// Nearest initial ancestor of `child` that is picked, and whether `child`
/// can ride along with it: the chain between them keeps its parents in the
/// goal and the ancestor keeps its resting face.
fn first_moving_ancestor(b: &Builder, cg0: &ContactGraph, cgg: &ContactGraph, child: &NodeId) -> Option<(NodeId, bool)> {
    let mut rigid = cgg.parent(child) == cg0.parent(child);
    let mut cur = cg0.parent(child)?;
    loop {
        if b.ix.pick.contains_key(cur) {
            let same_face = cg0.edge(cur).map(|e| e.placement.child_face) == cgg.edge(cur).map(|e| e.placement.child_face);
            return Some((cur.clone(), rigid && same_face && b.ix.place.contains_key(cur)));
        }
        rigid &= cgg.parent(cur) == cg0.parent(cur);
        cur = cg0.parent(cur)?;
    }
}

/// Containers whose interior holds the relation `parent`/`surface`, in `cg`.
fn enclosing(cg: &ContactGraph, parent: &NodeId, surface: usize) -> Vec<NodeId> {
    let mut out = Vec::new();
    let contains = cg
        .node(parent)
        .ok()
        .and_then(|p| p.surfaces.get(surface))
        .is_some_and(|s| s.kind == SurfaceKind::Contain);
    if contains && cg.status(parent).is_some() {
        out.push(parent.clone());
    }
    out.extend(cg.enclosing_containers(parent));
    out
}

fn accessibility(b: &mut Builder, cg0: &ContactGraph, cgg: &ContactGraph) {
    let mut i = 0;
    while i < b.script.actions.len() {
        let a = b.script.actions[i].clone();
        let containers = match &a.action {
            Action::Pick { parent, child } => match cg0.edge(child) {
                Some(e) if &e.parent == parent => enclosing(cg0, parent, e.placement.surface),
                _ => cg0.enclosing_containers(parent),
            },
            Action::Place { parent, placement, .. } => {
                let cg = if a.origin == Origin::Edit { cgg } else { cg0 };
                enclosing(cg, parent, placement.surface)
            }
            Action::Open { node } | Action::Close { node } => cg0.enclosing_containers(node),
        };
        for c in containers {
            if cg0.status(&c) == Some(Status::Closed) && !b.ix.open.contains_key(&c) {
                b.push(Action::Open { node: c.clone() }, Origin::Access, false);
            }
            if let Some(&open) = b.ix.open.get(&c) {
                b.order(open, a.id, ConstraintReason::Accessibility);
                if cgg.status(&c) == Some(Status::Closed) && !b.ix.close.contains_key(&c) {
                    b.push(Action::Close { node: c.clone() }, Origin::Access, false);
                }
            }
            if let Some(&close) = b.ix.close.get(&c) {
                b.order(a.id, close, ConstraintReason::Accessibility);
            }
        }
        i += 1;
    }
    let pairs: Vec<(usize, usize)> =
        b.ix.open.iter().filter_map(|(c, &o)| b.ix.close.get(c).map(|&cl| (o, cl))).collect();
    for (o, cl) in pairs {
        b.order(o, cl, ConstraintReason::Accessibility);
    }
}

fn check_acyclic(script: &EditScript, constraints: &[TemporalConstraint]) -> Result<(), PlanError> {
    let n = script.actions.len();
    let mut indeg = vec![0usize; n];
    let mut succ = vec![Vec::new(); n];
    for c in constraints {
        indeg[c.after] += 1;
        succ[c.before].push(c.after);
    }
    let mut ready: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut seen = 0;
    while let Some(i) = ready.pop() {
        seen += 1;
        for &j in &succ[i] {
            indeg[j] -= 1;
            if indeg[j] == 0 {
                ready.push(j);
            }
        }
    }
    if seen == n {
        return Ok(());
    }
    let stuck: Vec<String> = (0..n).filter(|&i| indeg[i] > 0).map(|i| script.actions[i].action.to_string()).collect();
    Err(PlanError::InconsistentGoal(stuck.join(", ")))
}
