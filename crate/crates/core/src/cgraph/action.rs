use std::fmt;

use super::{ContactGraph, GraphError, NodeId, Placement, PlanarPose, Status, SupportEdge, SurfaceKind, GRIPPER_MOUNT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ActionKind {
    Pick,
    Place,
    Open,
    Close,
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Pick => "pick",
            Self::Place => "place",
            Self::Open => "open",
            Self::Close => "close",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Pick { parent: NodeId, child: NodeId },
    Place { parent: NodeId, child: NodeId, placement: Placement },
    Open { node: NodeId },
    Close { node: NodeId },
}

impl Action {
    pub fn kind(&self) -> ActionKind {
        match self {
            Self::Pick { .. } => ActionKind::Pick,
            Self::Place { .. } => ActionKind::Place,
            Self::Open { .. } => ActionKind::Open,
            Self::Close { .. } => ActionKind::Close,
        }
    }

    /// The node being moved or toggled.
    pub fn target(&self) -> &NodeId {
        match self {
            Self::Pick { child, .. } | Self::Place { child, .. } => child,
            Self::Open { node } | Self::Close { node } => node,
        }
    }

    /// Action that undoes `self` when applied to the state it produced.
    /// `before` is the state `self` was applied to.
    pub fn inverse(&self, before: &ContactGraph) -> Option<Action> {
        Some(match self {
            Self::Pick { parent, child } => Self::Place {
                parent: parent.clone(),
                child: child.clone(),
                placement: before.edge(child)?.placement,
            },
            Self::Place { parent, child, .. } => Self::Pick { parent: parent.clone(), child: child.clone() },
            Self::Open { node } => Self::Close { node: node.clone() },
            Self::Close { node } => Self::Open { node: node.clone() },
        })
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Pick { parent, child } => write!(f, "pick({child} from {parent})"),
            Self::Place { parent, child, placement } => write!(
                f,
                "place({child} on {parent}[{}] at {:.4},{:.4},{:.4})",
                placement.surface, placement.pose.x, placement.pose.y, placement.pose.yaw
            ),
            Self::Open { node } => write!(f, "open({node})"),
            Self::Close { node } => write!(f, "close({node})"),
        }
    }
}

fn fail(action: &Action, clause: impl Into<String>) -> GraphError {
    GraphError::Precondition { action: action.to_string(), clause: clause.into() }
}

/// Applies `action` to a copy of `cg`. The held object is a child of the
/// gripper node. Preconditions are checked symbolically; geometric validity of
/// the result is left to the caller.
pub fn apply_action(cg: &ContactGraph, action: &Action) -> Result<ContactGraph, GraphError> {
    let mut out = cg.clone();
    match action {
        Action::Pick { parent, child } => {
            cg.node(parent)?;
            let node = cg.node(child)?;
            if child == cg.root() || ContactGraph::is_gripper(child) {
                return Err(fail(action, "target is not a movable object"));
            }
            if node.fixed {
                return Err(fail(action, "target is fixed"));
            }
            if cg.parent(child) != Some(parent) {
                return Err(fail(action, format!("relation ({parent}, {child}) does not exist")));
            }
            if let Some(h) = cg.held() {
                return Err(fail(action, format!("gripper already holds {h}")));
            }
            if !cg.is_accessible(child) {
                return Err(fail(action, format!("{child} is not accessible")));
            }
            out.set_edge(
                child.clone(),
                SupportEdge {
                    parent: cg.gripper(),
                    placement: Placement { surface: 0, pose: PlanarPose::default(), dof: 0, child_face: None },
                },
            );
        }
        Action::Place { parent, child, placement } => {
            let p = cg.node(parent)?;
            cg.node(child)?;
            if !cg.parent(child).is_some_and(ContactGraph::is_gripper) {
                return Err(fail(action, format!("{child} is not held")));
            }
            if ContactGraph::is_gripper(parent) || cg.is_descendant(parent, child) {
                return Err(fail(action, format!("{parent} cannot support {child}")));
            }
            let ok_surface = placement.surface != GRIPPER_MOUNT
                && p.surfaces.get(placement.surface).is_some_and(|s| s.kind != SurfaceKind::None);
            if !ok_surface {
                return Err(fail(action, format!("{parent} has no usable surface {}", placement.surface)));
            }
            let pose_ok = [placement.pose.x, placement.pose.y, placement.pose.yaw].iter().all(|v| v.is_finite());
            if !pose_ok {
                return Err(fail(action, "target pose is not finite"));
            }
            if !cg.is_accessible(parent) {
                return Err(fail(action, format!("{parent} is not accessible")));
            }
            if cg.status(parent) == Some(Status::Closed)
                && p.surfaces[placement.surface].kind == SurfaceKind::Contain
            {
                return Err(fail(action, format!("{parent} is closed")));
            }
            out.set_edge(child.clone(), SupportEdge { parent: parent.clone(), placement: *placement });
        }
        Action::Open { node } | Action::Close { node } => {
            cg.node(node)?;
            let (want, next) = match action {
                Action::Open { .. } => (Status::Closed, Status::Opened),
                _ => (Status::Opened, Status::Closed),
            };
            match cg.status(node) {
                None => return Err(fail(action, format!("{node} has no status"))),
                Some(s) if s != want => return Err(fail(action, format!("{node} is already {s:?}").to_lowercase())),
                _ => {}
            }
            if !cg.is_accessible(node) {
                return Err(fail(action, format!("{node} is not accessible")));
            }
            out.set_status_unchecked(node.clone(), next);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cgraph::{SceneNode, Surface};
    use crate::geom::{pose_from_xyz_rpy, GeometryPrimitive, Region2D};

    fn scene() -> ContactGraph {
        let mut cg = ContactGraph::new(SceneNode::new("world", "world"));
        let shell = GeometryPrimitive::cuboid([0.5, 0.5, 0.6], pose_from_xyz_rpy([0.0, 0.0, 0.3], [0.0; 3]), 10.0)
            .unwrap();
        let floor = Region2D::rectangle(pose_from_xyz_rpy([0.0, 0.0, 0.05], [0.0; 3]), 0.4, 0.4).unwrap();
        let cabinet = SceneNode::new("cabinet", "cabinet")
            .with_geometry(vec![shell])
            .with_surface(Surface::new(floor, SurfaceKind::Contain))
            .fixed();
        let root = cg.root().clone();
        cg.add_node(cabinet, &root, Placement::on(0, PlanarPose::new(1.0, 0.0, 0.0))).unwrap();
        cg.set_status(&NodeId::new("cabinet"), Status::Closed).unwrap();
        let cube = GeometryPrimitive::cuboid([0.1; 3], pose_from_xyz_rpy([0.0, 0.0, 0.05], [0.0; 3]), 1.0).unwrap();
        cg.add_node(
            SceneNode::new("box", "box").with_geometry(vec![cube.clone()]),
            &root,
            Placement::on(0, PlanarPose::new(0.0, 0.5, 0.3)),
        )
        .unwrap();
        cg.add_node(
            SceneNode::new("inner", "box").with_geometry(vec![cube]),
            &NodeId::new("cabinet"),
            Placement::on(0, PlanarPose::default()),
        )
        .unwrap();
        cg
    }

    fn id(s: &str) -> NodeId {
        NodeId::new(s)
    }

    #[test]
    fn pick_then_place_restores_graph() {
        let cg = scene();
        let pick = Action::Pick { parent: cg.root().clone(), child: id("box") };
        let held = apply_action(&cg, &pick).unwrap();
        assert_eq!(held.held(), Some(id("box")));
        let back = apply_action(&held, &pick.inverse(&cg).unwrap()).unwrap();
        assert!(back.structurally_equal(&cg, 1e-12));
        assert_eq!(back.digest(), cg.digest());
        // input untouched
        assert_eq!(cg.held(), None);
    }

    #[test]
    fn open_makes_contents_accessible() {
        let cg = scene();
        assert!(!cg.is_accessible(&id("inner")));
        let opened = apply_action(&cg, &Action::Open { node: id("cabinet") }).unwrap();
        assert_eq!(opened.status(&id("cabinet")), Some(Status::Opened));
        assert!(opened.is_accessible(&id("inner")));
        let err = apply_action(&opened, &Action::Open { node: id("cabinet") }).unwrap_err();
        assert!(err.to_string().contains("already opened"), "{err}");
    }

    #[test]
    fn place_into_closed_cabinet_fails() {
        let cg = scene();
        let held = apply_action(&cg, &Action::Pick { parent: cg.root().clone(), child: id("box") }).unwrap();
        let place = Action::Place {
            parent: id("cabinet"),
            child: id("box"),
            placement: Placement::on(0, PlanarPose::new(0.1, 0.1, 0.0)),
        };
        let err = apply_action(&held, &place).unwrap_err();
        assert!(matches!(err, GraphError::Precondition { .. }));
        assert!(err.to_string().contains("cabinet is closed"), "{err}");
    }

    #[test]
    fn picks_check_every_clause() {
        let cg = scene();
        let root = cg.root().clone();
        let e = apply_action(&cg, &Action::Pick { parent: root.clone(), child: id("inner") }).unwrap_err();
        assert!(e.to_string().contains("relation"), "{e}");
        let e = apply_action(&cg, &Action::Pick { parent: id("cabinet"), child: id("inner") }).unwrap_err();
        assert!(e.to_string().contains("not accessible"), "{e}");
        let e = apply_action(&cg, &Action::Pick { parent: root.clone(), child: id("cabinet") }).unwrap_err();
        assert!(e.to_string().contains("fixed"), "{e}");
        let held = apply_action(&cg, &Action::Pick { parent: root.clone(), child: id("box") }).unwrap();
        let opened = apply_action(&held, &Action::Open { node: id("cabinet") }).unwrap();
        let e = apply_action(&opened, &Action::Pick { parent: id("cabinet"), child: id("inner") }).unwrap_err();
        assert!(e.to_string().contains("already holds"), "{e}");
    }
}
