//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

pub mod oracles;

use std::collections::{HashSet, VecDeque};

use cgplus::cgraph::{apply_action, validate, Action, ContactGraph, NodeId, Placement, PlanarPose, Status};
use cgplus::planner::PLACEMENT_TOL;

/// Outcome of a breadth-first search over symbolic states.
#[derive(Debug)]
pub enum Bfs {
    Found(Vec<Action>),
    Exhausted { states: usize },
    Capped,
}

impl Bfs {
    pub fn length(&self) -> Option<usize> {
        match self {
            Bfs::Found(a) => Some(a.len()),
            _ => None,
        }
    }
}

/// Candidate placements of `child`: where it starts, where it ends, and a
/// grid over the swap node's first surface.
fn placements(cg0: &ContactGraph, goal: &ContactGraph, child: &NodeId, grid: usize) -> Vec<(NodeId, Placement)> {
    let mut out = Vec::new();
    for g in [cg0, goal] {
        if let Some(e) = g.edge(child) {
            if !ContactGraph::is_gripper(&e.parent) {
                out.push((e.parent.clone(), e.placement));
            }
        }
    }
    if let Some(swap) = cg0.swap() {
        let node = cg0.node(swap).expect("swap node exists");
        if let Some(s) = node.surfaces.first() {
            let (lo, hi) = s.region.extent();
            for i in 0..grid {
                for j in 0..grid {
                    let fx = (i as f64 + 0.5) / grid as f64;
                    let fy = (j as f64 + 0.5) / grid as f64;
                    let x = lo.x + fx * (hi.x - lo.x);
                    let y = lo.y + fy * (hi.y - lo.y);
                    out.push((swap.clone(), Placement::on(0, PlanarPose::new(x, y, 0.0))));
                }
            }
        }
    }
    out
}

fn successors(cg: &ContactGraph, cg0: &ContactGraph, goal: &ContactGraph, grid: usize) -> Vec<Action> {
    let mut acts = Vec::new();
    match cg.held() {
        Some(h) => {
            for (parent, placement) in placements(cg0, goal, &h, grid) {
                if parent != h && !cg.is_descendant(&parent, &h) {
                    acts.push(Action::Place { parent, child: h.clone(), placement });
                }
            }
        }
        None => {
            for n in cg.objects() {
                if n.fixed {
                    continue;
                }
                if let Some(p) = cg.parent(&n.id) {
                    acts.push(Action::Pick { parent: p.clone(), child: n.id.clone() });
                }
            }
        }
    }
    let statuses: Vec<(NodeId, Status)> = cg.statuses().map(|(n, s)| (n.clone(), s)).collect();
    for (n, s) in statuses {
        acts.push(match s {
            Status::Closed => Action::Open { node: n },
            Status::Opened => Action::Close { node: n },
        });
    }
    acts
}

/// Shortest action sequence from `cg0` to a state structurally equal to
/// `goal`, with full physical validation after every action.
pub fn bfs_plan(cg0: &ContactGraph, goal: &ContactGraph, grid: usize, cap: usize) -> Bfs {
    let mut seen: HashSet<String> = HashSet::new();
    let mut queue: VecDeque<(ContactGraph, Vec<Action>)> = VecDeque::new();
    seen.insert(cg0.digest());
    queue.push_back((cg0.clone(), Vec::new()));
    while let Some((cg, path)) = queue.pop_front() {
        if cg.structurally_equal(goal, PLACEMENT_TOL) {
            return Bfs::Found(path);
        }
        for a in successors(&cg, cg0, goal, grid) {
            let Ok(next) = apply_action(&cg, &a) else { continue };
            if !validate(&next).map(|v| v.is_empty()).unwrap_or(false) {
                continue;
            }
            if !seen.insert(next.digest()) {
                continue;
            }
            if seen.len() > cap {
                return Bfs::Capped;
            }
            let mut p = path.clone();
            p.push(a);
            queue.push_back((next, p));
        }
    }
    Bfs::Exhausted { states: seen.len() }
}

/// Replays `actions`, checking every intermediate state.
pub fn replay_ok(cg0: &ContactGraph, goal: &ContactGraph, actions: &[Action]) -> bool {
    let mut cg = cg0.clone();
    for a in actions {
        match apply_action(&cg, a) {
            Ok(next) if validate(&next).map(|v| v.is_empty()).unwrap_or(false) => cg = next,
            _ => return false,
        }
    }
    cg.structurally_equal(goal, PLACEMENT_TOL)
}
