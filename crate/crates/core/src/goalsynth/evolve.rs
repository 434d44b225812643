use std::collections::{BTreeMap, BTreeSet};

use log::debug;
use rand::Rng as _;

use super::pose::synthesize_poses_from;
use super::structure::{crossover, mutate, Slot, StructureIndividual, StructureSpace};
use super::{GAConfig, PoseOptConfig, SynthError};
use crate::cgraph::{ContactGraph, NodeId};
use crate::{par, rng};

/// Score added to structures pose synthesis could not realize.
const INFEASIBLE: f64 = 1e3;
/// Generations without improvement before the population is reseeded.
const STALE_GENERATIONS: usize = 25;

type Key = BTreeMap<NodeId, Slot>;

/// Outcome of the structure search.
#[derive(Debug, Clone)]
pub struct Evolved {
    pub individual: StructureIndividual,
    /// Structure graph; nodes in `fresh` still need initial poses.
    pub structure: ContactGraph,
    pub fresh: BTreeSet<NodeId>,
    /// Poses found while certifying the structure.
    pub posed: ContactGraph,
    /// Area penalty plus violated ordering predicates.
    pub score: f64,
    pub generations: usize,
}

struct Probe {
    posed: Option<ContactGraph>,
}

/// Genetic search for a supporting structure starting from the rough goal.
/// Promising candidates are certified by a cheap pose synthesis each
/// generation; the search stops early once a zero-score structure is
/// certified.
pub fn evolve(rough_goal: &ContactGraph, cfg: &GAConfig, pose: &PoseOptConfig) -> Result<Evolved, SynthError> {
    cfg.validate()?;
    pose.validate()?;
    let space = StructureSpace::new(rough_goal, cfg.theta)?;
    let probe_cfg = PoseOptConfig {
        max_iters: pose.max_iters.min(300),
        restarts: pose.restarts.min(4),
        ..pose.clone()
    };
    let mut r = rng::stream(cfg.rng_seed, u64::MAX, 0);

    let seed = space.initial();
    let immigrant = |r: &mut rng::Rng| {
        let mut ind = seed.clone();
        for _ in 0..r.random_range(1..=space.movable().len().max(1)) {
            ind = if r.random_bool(0.5) { crossover(&space, &ind, r) } else { mutate(&space, &ind, r) };
        }
        ind
    };
    let mut population = vec![seed.clone()];
    while population.len() < cfg.population_size {
        population.push(immigrant(&mut r));
    }

    let mut cache: BTreeMap<Key, Probe> = BTreeMap::new();
    let mut best: Option<(f64, Key)> = None;
    let mut best_seen = f64::INFINITY;
    let mut stale = 0;

    for generation in 0..cfg.max_generations.max(1) {
        let scores: Vec<Result<f64, SynthError>> = par::map_slice(&population, |ind| {
            Ok(space.fitness(ind)? + space.predicate_violations(ind) as f64)
        });
        for (ind, s) in population.iter_mut().zip(scores) {
            ind.fitness = Some(s?);
        }
        // random tie-breaking lets equally scored structures drift
        let ties: Vec<u64> = population.iter().map(|_| r.random()).collect();
        let rank = |cache: &BTreeMap<Key, Probe>, pop: &[StructureIndividual]| {
            let mut scored: Vec<(f64, usize)> = pop
                .iter()
                .enumerate()
                .map(|(i, ind)| {
                    let f = ind.fitness.unwrap_or(f64::INFINITY);
                    match cache.get(&ind.slots) {
                        Some(Probe { posed: None }) => (f + INFEASIBLE, i),
                        _ => (f, i),
                    }
                })
                .collect();
            scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(ties[a.1].cmp(&ties[b.1])));
            scored
        };
        let mut scored = rank(&cache, &population);

        // certify only candidates that would improve on the best certified
        let bar = best.as_ref().map_or(f64::INFINITY, |b| b.0);
        let mut to_probe: Vec<Key> = Vec::new();
        for (s, i) in &scored {
            if *s >= bar || to_probe.len() >= cfg.probes_per_generation.max(1) {
                break;
            }
            let key = &population[*i].slots;
            if !cache.contains_key(key) && !to_probe.contains(key) {
                to_probe.push(key.clone());
            }
        }
        let probes = par::map_slice(&to_probe, |key| {
            let ind = StructureIndividual { slots: key.clone(), fitness: None };
            let (graph, fresh) = space.to_graph(&ind);
            match synthesize_poses_from(&graph, &fresh, &probe_cfg) {
                Ok(p) => Ok(Some(p)),
                Err(SynthError::LayerInfeasible { .. } | SynthError::Unsatisfied(_)) => Ok(None),
                Err(e) => Err(e),
            }
        });
        if !to_probe.is_empty() {
            for (key, p) in to_probe.into_iter().zip(probes) {
                cache.insert(key, Probe { posed: p? });
            }
            scored = rank(&cache, &population);
        }

        for (s, i) in &scored {
            let key = &population[*i].slots;
            if matches!(cache.get(key), Some(Probe { posed: Some(_) })) {
                if best.as_ref().is_none_or(|(bs, bk)| (*s, key) < (*bs, bk)) {
                    best = Some((*s, key.clone()));
                }
                break;
            }
        }
        debug!("generation {generation}: best {:.4}, certified {:?}", scored[0].0, best.as_ref().map(|b| b.0));
        if let Some((s, key)) = &best {
            if *s == 0.0 {
                return Ok(finish(&space, key.clone(), *s, &mut cache, generation));
            }
        }
        if generation + 1 == cfg.max_generations {
            break;
        }
        if scored[0].0 < best_seen {
            best_seen = scored[0].0;
            stale = 0;
        } else {
            stale += 1;
        }

        let mut next: Vec<StructureIndividual> =
            scored.iter().take(cfg.elite_count).map(|(_, i)| population[*i].clone()).collect();
        if stale >= STALE_GENERATIONS {
            stale = 0;
            while next.len() < cfg.population_size {
                next.push(immigrant(&mut r));
            }
        }
        let mut rank_of = vec![0; population.len()];
        for (k, (_, i)) in scored.iter().enumerate() {
            rank_of[*i] = k;
        }
        while next.len() < cfg.population_size {
            let pick = (0..3)
                .map(|_| r.random_range(0..population.len()))
                .min_by_key(|i| rank_of[*i])
                .expect("tournament is non-empty");
            let mut child = population[pick].clone();
            if r.random_bool(cfg.crossover_prob) {
                child = crossover(&space, &child, &mut r);
            }
            if r.random_bool(cfg.mutation_prob) {
                child = mutate(&space, &child, &mut r);
            }
            next.push(child);
        }
        population = next;
    }

    match best {
        Some((s, key)) => {
            let out = finish(&space, key, s, &mut cache, cfg.max_generations);
            let broken: Vec<String> = rough_goal
                .predicates()
                .iter()
                .filter(|a| a.upper == a.lower || !space.in_subtree(&out.individual, &a.upper, &a.lower))
                .map(|a| format!("{} above {}", a.upper, a.lower))
                .collect();
            if broken.is_empty() {
                Ok(out)
            } else {
                Err(SynthError::GoalInfeasible {
                    best: Box::new(out.posed),
                    reason: format!("best structure violates: {}", broken.join(", ")),
                })
            }
        }
        None => {
            let (graph, _) = space.to_graph(&seed);
            Err(SynthError::GoalInfeasible {
                best: Box::new(graph),
                reason: format!(
                    "no structure among {} candidates admitted feasible poses after {} generations",
                    cache.len(),
                    cfg.max_generations
                ),
            })
        }
    }
}

fn finish(
    space: &StructureSpace,
    key: Key,
    score: f64,
    cache: &mut BTreeMap<Key, Probe>,
    generations: usize,
) -> Evolved {
    let posed = cache.remove(&key).and_then(|p| p.posed).expect("certified structure");
    let individual = StructureIndividual { slots: key, fitness: Some(score) };
    let (structure, fresh) = space.to_graph(&individual);
    Evolved { individual, structure, fresh, posed, score, generations }
}
