//! Goal configuration synthesis: a genetic search over supporting structure
//! followed by layer-wise stochastic pose optimization.

mod evolve;
mod pose;
mod structure;

pub use evolve::{evolve, Evolved};
pub(crate) use pose::solve_layer;
pub use pose::{hinge_loss, optimize_layer, synthesize_poses, synthesize_poses_from};
pub use structure::{crossover, fitness, mutate, occupancy_term, Slot, StructureIndividual, StructureSpace};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cgraph::{ContactGraph, GraphError, NodeId, Violation};
use crate::geom::GeomError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GAConfig {
    pub population_size: usize,
    pub max_generations: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    /// Area-occupation threshold.
    pub theta: f64,
    pub elite_count: usize,
    /// Candidates per generation sent to pose synthesis.
    pub probes_per_generation: usize,
    pub rng_seed: u64,
}

impl Default for GAConfig {
    fn default() -> Self {
        Self {
            population_size: 64,
            max_generations: 200,
            crossover_prob: 0.7,
            mutation_prob: 0.2,
            theta: 0.8,
            elite_count: 2,
            probes_per_generation: 2,
            rng_seed: 0,
        }
    }
}

impl GAConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if !prob(self.crossover_prob) || !prob(self.mutation_prob) {
            return Err(SynthError::InvalidConfig("probabilities must lie in [0, 1]".into()));
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(SynthError::InvalidConfig(format!("theta must lie in (0, 1], got {}", self.theta)));
        }
        if self.population_size < 2 {
            return Err(SynthError::InvalidConfig("population_size must be at least 2".into()));
        }
        if self.elite_count > self.population_size {
            return Err(SynthError::InvalidConfig("elite_count exceeds population_size".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoseOptConfig {
    /// Step length (m) per unit of update direction.
    pub step: f64,
    /// Initial noise scale.
    pub sigma0: f64,
    /// Per-iteration noise decay.
    pub gamma: f64,
    /// Safety margin (m) of the hinge loss.
    pub d_safe: f64,
    pub max_iters: usize,
    pub restarts: usize,
    pub rng_seed: u64,
}

impl Default for PoseOptConfig {
    fn default() -> Self {
        Self { step: 0.01, sigma0: 0.5, gamma: 0.95, d_safe: 0.005, max_iters: 2000, restarts: 10, rng_seed: 0 }
    }
}

impl PoseOptConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(SynthError::InvalidConfig(format!("gamma must lie in (0, 1), got {}", self.gamma)));
        }
        if !(self.d_safe > 0.0) || !(self.step > 0.0) {
            return Err(SynthError::InvalidConfig("d_safe and step must be positive".into()));
        }
        if self.restarts == 0 {
            return Err(SynthError::InvalidConfig("restarts must be at least 1".into()));
        }
        Ok(())
    }

    /// Noise scale after `k` iterations.
    pub fn sigma_at(&self, k: usize) -> f64 {
        self.sigma0 * self.gamma.powi(k as i32)
    }
}

#[derive(Debug, Clone, Error)]
pub enum SynthError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Geometry(#[from] GeomError),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("no feasible poses for the children of {parent}; residual losses: {residual:?}")]
    LayerInfeasible { parent: NodeId, residual: Vec<(String, f64)> },
    #[error("posed goal still violates {} constraint(s): {}", .0.len(), .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Unsatisfied(Vec<Violation>),
    #[error("goal infeasible: {reason}")]
    GoalInfeasible { best: Box<ContactGraph>, reason: String },
}
