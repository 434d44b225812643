use std::collections::{BTreeMap, BTreeSet};

use rand::Rng as _;

use super::SynthError;
use crate::cgraph::{ContactGraph, NodeId, Placement, PlanarPose, SupportEdge, SurfaceKind, GRIPPER_MOUNT};
use crate::geom::GeomError;
use crate::rng::Rng;

/// Where a movable node rests: parent, parent surface, and its own face.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Slot {
    pub parent: NodeId,
    pub surface: usize,
    pub face: Option<usize>,
}

/// Parent assignment for every movable node.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureIndividual {
    pub slots: BTreeMap<NodeId, Slot>,
    pub fitness: Option<f64>,
}

/// One relation's contribution: occupancy ratio above `theta`.
pub fn occupancy_term(child_area: f64, parent_area: f64, theta: f64) -> Result<f64, GeomError> {
    if !(parent_area > 0.0) {
        return Err(GeomError::InvalidGeometry(format!("parent surface area {parent_area}")));
    }
    let ratio = child_area.min(parent_area) / parent_area;
    Ok(ratio.max(theta) - theta)
}

fn face_area(cg: &ContactGraph, node: &NodeId, face: Option<usize>) -> Result<f64, SynthError> {
    Ok(cg.node(node)?.base_footprint(face).map_or(0.0, |r| r.area()))
}

/// Area-occupation penalty of a graph, with each child's contact area
/// estimated by its base footprint.
pub fn fitness(cg: &ContactGraph, theta: f64) -> Result<f64, SynthError> {
    let mut f = 0.0;
    for (child, e) in cg.edges() {
        if e.placement.surface == GRIPPER_MOUNT || ContactGraph::is_gripper(&e.parent) {
            continue;
        }
        let parent_area = cg.node(&e.parent)?.surfaces[e.placement.surface].region.area();
        f += occupancy_term(face_area(cg, child, e.placement.child_face)?, parent_area, theta)?;
    }
    Ok(f)
}

/// Search space derived from a rough goal: which nodes move, which nodes may
/// carry them, and cached areas for fitness.
#[derive(Debug, Clone)]
pub struct StructureSpace {
    goal: ContactGraph,
    movable: Vec<NodeId>,
    parents: Vec<NodeId>,
    fixed_parent: BTreeMap<NodeId, NodeId>,
    face_area: BTreeMap<(NodeId, Option<usize>), f64>,
    fixed_fitness: f64,
    theta: f64,
    /// Movable nodes the rough goal puts into a container, with that
    /// container; they never leave its subtree.
    anchors: Vec<(NodeId, NodeId)>,
}

impl StructureSpace {
    pub fn new(goal: &ContactGraph, theta: f64) -> Result<Self, SynthError> {
        goal.check_integrity()?;
        let movable: Vec<NodeId> = goal
            .objects()
            .filter(|n| !n.fixed && !goal.in_hand(&n.id))
            .map(|n| n.id.clone())
            .collect();
        let mut parents: BTreeSet<NodeId> = movable.iter().cloned().collect();
        for m in &movable {
            if let Some(p) = goal.parent(m) {
                if !ContactGraph::is_gripper(p) {
                    parents.insert(p.clone());
                }
            }
        }
        let mut fixed_parent = BTreeMap::new();
        let mut fixed_fitness = 0.0;
        for (c, e) in goal.edges() {
            if movable.contains(c) || e.placement.surface == GRIPPER_MOUNT {
                continue;
            }
            fixed_parent.insert(c.clone(), e.parent.clone());
            let parent_area = goal.node(&e.parent)?.surfaces[e.placement.surface].region.area();
            fixed_fitness += occupancy_term(face_area(goal, c, e.placement.child_face)?, parent_area, theta)?;
        }
        let mut anchors = Vec::new();
        for m in &movable {
            let e = goal.edge(m).expect("integrity checked");
            let kind = goal.node(&e.parent)?.surfaces.get(e.placement.surface).map(|s| s.kind);
            if kind == Some(SurfaceKind::Contain) {
                anchors.push((m.clone(), e.parent.clone()));
            }
        }
        let mut areas = BTreeMap::new();
        for m in &movable {
            let n = goal.node(m)?;
            for face in std::iter::once(None).chain(n.rest_faces.iter().map(|f| Some(*f))) {
                areas.insert((m.clone(), face), face_area(goal, m, face)?);
            }
        }
        Ok(Self {
            goal: goal.clone(),
            movable,
            parents: parents.into_iter().collect(),
            fixed_parent,
            face_area: areas,
            fixed_fitness,
            theta,
            anchors,
        })
    }

    pub fn goal(&self) -> &ContactGraph {
        &self.goal
    }

    pub fn movable(&self) -> &[NodeId] {
        &self.movable
    }

    /// Nodes allowed to carry movable nodes.
    pub fn eligible_parents(&self) -> &[NodeId] {
        &self.parents
    }

    /// The individual encoded by the rough goal itself.
    pub fn initial(&self) -> StructureIndividual {
        let slots = self
            .movable
            .iter()
            .map(|m| {
                let e = self.goal.edge(m).expect("integrity checked");
                let slot = Slot { parent: e.parent.clone(), surface: e.placement.surface, face: e.placement.child_face };
                (m.clone(), slot)
            })
            .collect();
        StructureIndividual { slots, fitness: None }
    }

    fn parent_of<'a>(&'a self, ind: &'a StructureIndividual, node: &NodeId) -> Option<&'a NodeId> {
        ind.slots.get(node).map(|s| &s.parent).or_else(|| self.fixed_parent.get(node))
    }

    /// Whether `node` lies in the subtree of `ancestor` (inclusive).
    pub fn in_subtree(&self, ind: &StructureIndividual, node: &NodeId, ancestor: &NodeId) -> bool {
        let mut cur = node;
        for _ in 0..=self.goal.nodes().count() {
            if cur == ancestor {
                return true;
            }
            match self.parent_of(ind, cur) {
                Some(p) => cur = p,
                None => return false,
            }
        }
        false
    }

    fn surface_free(&self, ind: &StructureIndividual, parent: &NodeId, surface: usize) -> bool {
        let kind = self.goal.node(parent).ok().and_then(|p| p.surfaces.get(surface)).map(|s| s.kind);
        let down = ind.slots.get(parent).and_then(|s| s.face) == Some(surface);
        matches!(kind, Some(SurfaceKind::Support | SurfaceKind::Contain)) && !down
    }

    /// Tree property, surface types, and faces not carrying children.
    pub fn is_valid(&self, ind: &StructureIndividual) -> bool {
        if ind.slots.len() != self.movable.len() {
            return false;
        }
        ind.slots.iter().all(|(c, s)| {
            self.parents.contains(&s.parent)
                && &s.parent != c
                && !self.in_subtree(ind, &s.parent, c)
                && self.surface_free(ind, &s.parent, s.surface)
                && s.face.is_none_or(|f| self.goal.node(c).is_ok_and(|n| n.rest_faces.contains(&f)))
        }) && self.in_subtree_of_root(ind)
            && self.anchored(ind)
    }

    fn anchored(&self, ind: &StructureIndividual) -> bool {
        self.anchors.iter().all(|(n, c)| self.in_subtree(ind, n, c))
    }

    fn in_subtree_of_root(&self, ind: &StructureIndividual) -> bool {
        let root = self.goal.root().clone();
        self.movable.iter().all(|m| self.in_subtree(ind, m, &root))
    }

    /// Reattachment targets for `child`: eligible parent surfaces outside its
    /// subtree that keep every node inside its container, excluding its
    /// current slot.
    pub fn targets(&self, ind: &StructureIndividual, child: &NodeId) -> Vec<(NodeId, usize)> {
        let current = &ind.slots[child];
        let mut out = Vec::new();
        for p in &self.parents {
            if self.in_subtree(ind, p, child) {
                continue;
            }
            let n = self.goal.node(p).expect("eligible parents exist");
            for s in 0..n.surfaces.len() {
                if !self.surface_free(ind, p, s) || (p == &current.parent && s == current.surface) {
                    continue;
                }
                let mut trial = ind.clone();
                let slot = trial.slots.get_mut(child).expect("movable");
                slot.parent = p.clone();
                slot.surface = s;
                if self.anchored(&trial) {
                    out.push((p.clone(), s));
                }
            }
        }
        out
    }

    /// Area-occupation penalty of an individual.
    pub fn fitness(&self, ind: &StructureIndividual) -> Result<f64, SynthError> {
        let mut f = self.fixed_fitness;
        for (c, s) in &ind.slots {
            let parent_area = self.goal.node(&s.parent)?.surfaces[s.surface].region.area();
            let a = self.face_area.get(&(c.clone(), s.face)).copied().unwrap_or(0.0);
            f += occupancy_term(a, parent_area, self.theta)?;
        }
        Ok(f)
    }

    /// Ordering predicates of the rough goal the individual violates.
    pub fn predicate_violations(&self, ind: &StructureIndividual) -> usize {
        self.goal
            .predicates()
            .iter()
            .filter(|a| a.upper == a.lower || !self.in_subtree(ind, &a.upper, &a.lower))
            .count()
    }

    /// Graph realizing `ind`. Nodes whose slot matches the rough goal keep
    /// their pose; the others are returned as needing initialization.
    pub fn to_graph(&self, ind: &StructureIndividual) -> (ContactGraph, BTreeSet<NodeId>) {
        let mut cg = self.goal.clone();
        let mut fresh = BTreeSet::new();
        for (c, s) in &ind.slots {
            let e = self.goal.edge(c).expect("movable nodes have relations");
            let same = e.parent == s.parent && e.placement.surface == s.surface && e.placement.child_face == s.face;
            if !same {
                let placement = Placement { surface: s.surface, pose: PlanarPose::default(), dof: 3, child_face: s.face };
                cg.set_edge(c.clone(), SupportEdge { parent: s.parent.clone(), placement });
                fresh.insert(c.clone());
            }
        }
        (cg, fresh)
    }
}

/// Breaks one supporting relation and reattaches the child, with its
/// subtree, under a uniformly chosen new parent surface. Returns the input
/// unchanged when no child has a valid target.
pub fn crossover(space: &StructureSpace, ind: &StructureIndividual, rng: &mut Rng) -> StructureIndividual {
    let movable = space.movable();
    if movable.is_empty() {
        return ind.clone();
    }
    let start = rng.random_range(0..movable.len());
    for k in 0..movable.len() {
        let child = &movable[(start + k) % movable.len()];
        let targets = space.targets(ind, child);
        if targets.is_empty() {
            continue;
        }
        let (parent, surface) = targets[rng.random_range(0..targets.len())].clone();
        let mut out = ind.clone();
        let slot = out.slots.get_mut(child).expect("movable");
        slot.parent = parent;
        slot.surface = surface;
        out.fitness = None;
        return out;
    }
    ind.clone()
}

/// Re-picks the parent surface or the resting face of one random node among
/// the alternatives its parent and itself declare.
pub fn mutate(space: &StructureSpace, ind: &StructureIndividual, rng: &mut Rng) -> StructureIndividual {
    let goal = space.goal();
    let mut options: Vec<(NodeId, Slot)> = Vec::new();
    for (c, s) in &ind.slots {
        let parent = goal.node(&s.parent).expect("valid individual");
        for k in 0..parent.surfaces.len() {
            let slot = Slot { surface: k, ..s.clone() };
            if k != s.surface && space.surface_free(ind, &s.parent, k) {
                options.push((c.clone(), slot));
            }
        }
        let node = goal.node(c).expect("movable");
        for face in std::iter::once(None).chain(node.rest_faces.iter().map(|f| Some(*f))) {
            let occupied = face.is_some_and(|f| ind.slots.values().any(|o| &o.parent == c && o.surface == f));
            if face != s.face && !occupied {
                options.push((c.clone(), Slot { face, ..s.clone() }));
            }
        }
    }
    let mut outs: Vec<StructureIndividual> = options
        .into_iter()
        .map(|(c, slot)| {
            let mut out = ind.clone();
            out.slots.insert(c, slot);
            out
        })
        .collect();
    let movable: Vec<&NodeId> = ind.slots.keys().collect();
    for (i, a) in movable.iter().enumerate() {
        for b in &movable[i + 1..] {
            let out = swapped(ind, a, b);
            if space.is_valid(&out) {
                outs.push(out);
            }
        }
    }
    if outs.is_empty() {
        return ind.clone();
    }
    let mut out = outs.swap_remove(rng.random_range(0..outs.len()));
    out.fitness = None;
    out
}

/// `ind` with `a` and `b` trading places in the tree; each keeps its face.
fn swapped(ind: &StructureIndividual, a: &NodeId, b: &NodeId) -> StructureIndividual {
    let pi = |n: &NodeId| if n == a { b.clone() } else if n == b { a.clone() } else { n.clone() };
    let slots = ind
        .slots
        .iter()
        .map(|(c, s)| {
            let me = pi(c);
            let face = ind.slots[&me].face;
            (me, Slot { parent: pi(&s.parent), surface: s.surface, face })
        })
        .collect();
    StructureIndividual { slots, fitness: None }
}
