//! Sequential manipulation planning on augmented contact graphs.
//!
//! A scene is a rooted tree of supporting relations plus proximal edges and
//! per-node attributes ([`cgraph::ContactGraph`]). Goal configurations are
//! synthesized by a genetic search over supporting structure followed by
//! layer-wise stochastic pose optimization ([`goalsynth`]); a plan is then
//! produced from the graph edit script between the initial and goal graphs,
//! ordered by temporal constraints ([`planner`]).

pub mod cgraph;
pub mod cli;
pub mod fixtures;
pub mod geom;
pub mod goalsynth;
pub mod par;
pub mod planner;
pub mod rng;


