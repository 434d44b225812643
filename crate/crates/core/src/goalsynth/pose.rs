use std::collections::{BTreeMap, BTreeSet};

use rand::Rng as _;
use rand_distr::StandardNormal;

use super::{PoseOptConfig, SynthError};
use crate::cgraph::{
    check_relation, collision_pairs, pair_distance, validate, ContactGraph, NodeId, PlanarPose, PrimRef, SupportEdge,
};
use crate::geom::{Pose, Region2D, Vec2, Vec3};
use crate::{par, rng};

/// Penalty on a signed distance below the safety margin: 0 at `d_safe`,
/// 1 at contact, growing linearly with penetration.
pub fn hinge_loss(sd: f64, d_safe: f64) -> f64 {
    (1.0 - sd / d_safe).max(0.0)
}

struct Layer<'a> {
    cg: &'a ContactGraph,
    parent: NodeId,
    parent_pose: Pose,
    children: Vec<NodeId>,
    start: Vec<PlanarPose>,
    fresh: Vec<bool>,
    surfaces: Vec<Region2D>,
    /// Subtree of each child with poses relative to the child.
    subtrees: Vec<Vec<(NodeId, Pose)>>,
    /// Layer child index owning a node of some subtree.
    owner: BTreeMap<NodeId, usize>,
    pairs: Vec<(PrimRef, PrimRef)>,
    base: BTreeMap<NodeId, Pose>,
    /// Whether non-fresh children may move in later restarts.
    release: bool,
}

struct Eval {
    losses: Vec<f64>,
    ok: Vec<bool>,
    poses: BTreeMap<NodeId, Pose>,
}

impl Eval {
    fn accepted(&self) -> bool {
        self.losses.iter().all(|l| *l == 0.0) && self.ok.iter().all(|o| *o)
    }
}

impl<'a> Layer<'a> {
    fn new(cg: &'a ContactGraph, parent: &NodeId, fresh: &BTreeSet<NodeId>) -> Result<Self, SynthError> {
        let base = cg.world_poses()?;
        let children: Vec<NodeId> = cg
            .children(parent)
            .into_iter()
            .filter(|c| !ContactGraph::is_gripper(c) && !cg.node(c).is_ok_and(|n| n.fixed))
            .collect();
        let mut start = Vec::new();
        let mut surfaces = Vec::new();
        let mut subtrees = Vec::new();
        let mut owner = BTreeMap::new();
        for (i, c) in children.iter().enumerate() {
            let e = cg.edge(c).expect("child has a relation");
            start.push(e.placement.pose);
            surfaces.push(cg.world_surface(parent, e.placement.surface, &base)?);
            let inv = base[c].inverse();
            let sub: Vec<(NodeId, Pose)> = cg.subtree(c).into_iter().map(|n| (n.clone(), inv * base[&n])).collect();
            for (n, _) in &sub {
                owner.insert(n.clone(), i);
            }
            subtrees.push(sub);
        }
        let pairs = collision_pairs(cg)
            .into_iter()
            .filter(|(a, b)| owner.contains_key(&a.node) || owner.contains_key(&b.node))
            .collect();
        Ok(Self {
            cg,
            parent: parent.clone(),
            parent_pose: base[parent],
            fresh: children.iter().map(|c| fresh.contains(c)).collect(),
            children,
            start,
            surfaces,
            subtrees,
            owner,
            pairs,
            base,
            release: true,
        })
    }

    fn evaluate(&self, x: &[PlanarPose], d_safe: f64) -> Result<Eval, SynthError> {
        let mut poses = self.base.clone();
        for (i, c) in self.children.iter().enumerate() {
            let e = self.cg.edge(c).expect("child has a relation");
            let mut placement = e.placement;
            placement.pose = x[i];
            let edge = SupportEdge { parent: self.parent.clone(), placement };
            let world = self.parent_pose * self.cg.edge_transform(self.cg.node(c)?, &edge)?;
            for (n, rel) in &self.subtrees[i] {
                poses.insert(n.clone(), world * rel);
            }
        }
        let mut losses = Vec::with_capacity(self.pairs.len());
        for (a, b) in &self.pairs {
            losses.push(hinge_loss(pair_distance(self.cg, a, b, &poses, d_safe)?, d_safe));
        }
        let mut ok = Vec::with_capacity(self.children.len());
        for c in &self.children {
            ok.push(check_relation(self.cg, c, &poses)?);
        }
        Ok(Eval { losses, ok, poses })
    }

    fn prim_center(&self, r: &PrimRef, poses: &BTreeMap<NodeId, Pose>) -> Vec3 {
        let g = &self.cg.node(&r.node).expect("pair nodes exist").geometry[r.index];
        (poses[&r.node] * g.local_pose).translation.vector
    }

    /// Per-child update direction in surface coordinates: loss-weighted
    /// repulsion, plus a pull to the surface centroid while unsupported.
    fn direction(&self, ev: &Eval, x: &[PlanarPose], r: &mut rng::Rng) -> Vec<Vec2> {
        let total: f64 = ev.losses.iter().sum();
        let mut mu = vec![Vec3::zeros(); self.children.len()];
        if total > 0.0 {
            for ((a, b), l) in self.pairs.iter().zip(&ev.losses) {
                if *l == 0.0 {
                    continue;
                }
                let d = self.prim_center(a, &ev.poses) - self.prim_center(b, &ev.poses);
                let n = d.norm();
                let u = if n > 1e-12 {
                    d / n
                } else {
                    let t: f64 = r.random_range(0.0..std::f64::consts::TAU);
                    Vec3::new(t.cos(), t.sin(), 0.0)
                };
                if let Some(i) = self.owner.get(&a.node) {
                    mu[*i] += u * (l / total);
                }
                if let Some(j) = self.owner.get(&b.node) {
                    mu[*j] -= u * (l / total);
                }
            }
        }
        (0..self.children.len())
            .map(|i| {
                let local = self.surfaces[i].frame.rotation.inverse_transform_vector(&mu[i]);
                let mut m = Vec2::new(local.x, local.y);
                if !ev.ok[i] {
                    let to = self.surfaces[i].centroid() - Vec2::new(x[i].x, x[i].y);
                    if to.norm() > 1e-12 {
                        m += to / to.norm();
                    }
                }
                m
            })
            .collect()
    }

    fn residual(&self, ev: &Eval) -> Vec<(String, f64)> {
        let mut out: Vec<(String, f64)> = self
            .pairs
            .iter()
            .zip(&ev.losses)
            .filter(|(_, l)| **l > 0.0)
            .map(|((a, b), l)| (format!("{}[{}]~{}[{}]", a.node, a.index, b.node, b.index), *l))
            .collect();
        for (c, ok) in self.children.iter().zip(&ev.ok) {
            if !ok {
                out.push((format!("support of {c}"), 1.0));
            }
        }
        out
    }

    fn attempt(&self, cfg: &PoseOptConfig, tag: u64, restart: usize) -> Result<Option<Vec<PlanarPose>>, SynthError> {
        let mut r = rng::stream(cfg.rng_seed, tag, restart as u64);
        let release = self.release && restart >= cfg.restarts.div_ceil(2);
        let turn = (restart % 4) as f64 * std::f64::consts::FRAC_PI_2;
        let free: Vec<bool> = self.fresh.iter().map(|f| *f || release).collect();
        let mut x = self.start.clone();
        for i in 0..x.len() {
            if self.fresh[i] {
                let c = self.surfaces[i].centroid();
                let (lo, hi) = self.surfaces[i].extent();
                let jx = 0.1 * (hi.x - lo.x) * r.random_range(-1.0..=1.0);
                let jy = 0.1 * (hi.y - lo.y) * r.random_range(-1.0..=1.0);
                x[i] = PlanarPose::new(c.x + jx, c.y + jy, turn);
            } else if free[i] {
                x[i].yaw += turn;
            }
        }
        for k in 0..=cfg.max_iters {
            let ev = self.evaluate(&x, cfg.d_safe)?;
            if ev.accepted() {
                return Ok(Some(x));
            }
            if k == cfg.max_iters || !free.iter().any(|f| *f) {
                break;
            }
            let sigma = cfg.sigma_at(k);
            let mu = self.direction(&ev, &x, &mut r);
            for i in 0..x.len() {
                if !free[i] {
                    continue;
                }
                let nx: f64 = r.sample(StandardNormal);
                let ny: f64 = r.sample(StandardNormal);
                let nt: f64 = r.sample(StandardNormal);
                x[i].x += cfg.step * (mu[i].x + sigma * nx);
                x[i].y += cfg.step * (mu[i].y + sigma * ny);
                x[i].yaw += cfg.step * sigma * nt;
            }
        }
        Ok(None)
    }
}

/// Poses for the movable children of `parent` with the structure fixed and
/// the layers above already posed. Current poses are used as the start.
pub fn optimize_layer(
    cg: &ContactGraph,
    parent: &NodeId,
    cfg: &PoseOptConfig,
) -> Result<BTreeMap<NodeId, PlanarPose>, SynthError> {
    solve_layer(cg, parent, &BTreeSet::new(), cfg, 0, true)
}

pub(crate) fn solve_layer(
    cg: &ContactGraph,
    parent: &NodeId,
    fresh: &BTreeSet<NodeId>,
    cfg: &PoseOptConfig,
    tag: u64,
    release: bool,
) -> Result<BTreeMap<NodeId, PlanarPose>, SynthError> {
    cfg.validate()?;
    let mut layer = Layer::new(cg, parent, fresh)?;
    layer.release = release;
    if layer.children.is_empty() {
        return Ok(BTreeMap::new());
    }
    if layer.surfaces.iter().any(|s| !s.faces_up()) {
        return Err(SynthError::LayerInfeasible {
            parent: parent.clone(),
            residual: vec![("surface not level".into(), 1.0)],
        });
    }
    let found = par::first_some(cfg.restarts, |restart| layer.attempt(cfg, tag, restart).transpose());
    match found {
        Some((_, Ok(x))) => Ok(layer.children.iter().cloned().zip(x).collect()),
        Some((_, Err(e))) => Err(e),
        None => {
            let ev = layer.evaluate(&layer.start, cfg.d_safe)?;
            Err(SynthError::LayerInfeasible { parent: parent.clone(), residual: layer.residual(&ev) })
        }
    }
}

/// Poses every relation layer by layer from the root down, starting each
/// child from its current pose.
pub fn synthesize_poses(cg: &ContactGraph, cfg: &PoseOptConfig) -> Result<ContactGraph, SynthError> {
    synthesize_poses_from(cg, &BTreeSet::new(), cfg)
}

/// As [`synthesize_poses`], with the `fresh` nodes started near the centroid
/// of their supporting surface instead of their current pose. Nodes not in
/// `fresh` stay put for the first half of the restarts.
pub fn synthesize_poses_from(
    cg: &ContactGraph,
    fresh: &BTreeSet<NodeId>,
    cfg: &PoseOptConfig,
) -> Result<ContactGraph, SynthError> {
    cfg.validate()?;
    cg.check_integrity()?;
    let mut parents: Vec<(usize, NodeId)> = cg
        .nodes()
        .filter(|n| !ContactGraph::is_gripper(&n.id) && !cg.in_hand(&n.id))
        .filter(|n| cg.children(&n.id).iter().any(|c| !ContactGraph::is_gripper(c)))
        .map(|n| (cg.depth(&n.id), n.id.clone()))
        .collect();
    parents.sort();
    let mut out = cg.clone();
    for (tag, (_, p)) in parents.iter().enumerate() {
        let poses = solve_layer(&out, p, fresh, cfg, tag as u64, true)?;
        for (c, pose) in poses {
            let mut e = out.edge(&c).expect("child has a relation").clone();
            e.placement.pose = pose;
            out.set_edge(c, e);
        }
    }
    let violations = validate(&out)?;
    if !violations.is_empty() {
        return Err(SynthError::Unsatisfied(violations));
    }
    Ok(out)
}
