//! Plate stacking benchmark.

use std::fmt::Write as _;
use std::time::Instant;

use log::info;

use super::{synthesize_goal, CliError, Config};
use crate::fixtures;
use crate::planner::{self, validate_plan};

/// Deterministic outcome of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub n: usize,
    pub repeat: usize,
    pub seed: u64,
    /// Plates not yet resting on their goal parent at the goal pose.
    pub misplaced: usize,
    pub plan_length: usize,
    /// Replays to the goal and has two actions per misplaced plate.
    pub valid: bool,
    pub status: String,
}

/// Wall time (s) of the three phases of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTimes {
    pub n: usize,
    pub repeat: usize,
    pub structure_s: f64,
    pub pose_s: f64,
    pub planning_s: f64,
}

#[derive(Debug, Clone, Default)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub times: Vec<PhaseTimes>,
}

fn median(mut v: Vec<f64>) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,repeat,seed,misplaced,expected_length,plan_length,valid,status\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                r.n,
                r.repeat,
                r.seed,
                r.misplaced,
                2 * r.misplaced,
                r.plan_length,
                r.valid,
                r.status
            );
        }
        s
    }

    pub fn timings_csv(&self) -> String {
        let mut s = String::from("n,repeat,structure_s,pose_s,planning_s\n");
        for t in &self.times {
            let _ = writeln!(s, "{},{},{:.6},{:.6},{:.6}", t.n, t.repeat, t.structure_s, t.pose_s, t.planning_s);
        }
        s
    }

    /// Median structure, pose and planning times for `n` plates.
    pub fn medians(&self, n: usize) -> (f64, f64, f64) {
        let of = |f: fn(&PhaseTimes) -> f64| median(self.times.iter().filter(|t| t.n == n).map(f).collect());
        (of(|t| t.structure_s), of(|t| t.pose_s), of(|t| t.planning_s))
    }
}

/// Seed of run `repeat` with `n` plates.
pub fn run_seed(seed: u64, n: usize, repeat: usize) -> u64 {
    seed.wrapping_add(((n as u64) << 32) | repeat as u64)
}

/// Stacks `n` plates of decreasing radius for every `n` in `ns`, `repeats`
/// times each, timing structure synthesis, pose synthesis and planning.
pub fn cmd_bench_stack(ns: &[usize], repeats: usize, seed: u64, cfg: &Config) -> Result<BenchReport, CliError> {
    if let Some(n) = ns.iter().find(|n| **n < 2) {
        return Err(CliError::Input(format!("the stacking benchmark needs at least 2 plates, got {n}")));
    }
    let mut report = BenchReport::default();
    for &n in ns {
        for repeat in 0..repeats {
            let s = run_seed(seed, n, repeat);
            let cfg = cfg.clone().with_seed(s);
            let (cg0, rough) = fixtures::plates(n, s);
            let misplaced = fixtures::misplaced_plates(&cg0, n);
            let mut row = BenchRow { n, repeat, seed: s, misplaced, plan_length: 0, valid: false, status: String::new() };
            let mut times = PhaseTimes { n, repeat, structure_s: 0.0, pose_s: 0.0, planning_s: 0.0 };
            match synthesize_goal(&rough, &cfg) {
                Err(e) => {
                    log::warn!("n={n} repeat={repeat}: {e}");
                    row.status = format!("goal_infeasible ({})", e.exit_code());
                }
                Ok((goal, structure_s, pose_s)) => {
                    times.structure_s = structure_s;
                    times.pose_s = pose_s;
                    let t = Instant::now();
                    let result = planner::plan(&cg0, &goal, &cfg.planner);
                    times.planning_s = t.elapsed().as_secs_f64();
                    match result {
                        Err(e) => row.status = format!("no_plan: {}", CliError::from(e).exit_code()),
                        Ok(plan) => {
                            let report = validate_plan(&plan, &cg0, &goal).map_err(|e| CliError::Input(e.to_string()))?;
                            row.plan_length = plan.len();
                            let stacked = fixtures::misplaced_plates(&goal, n) == 0;
                            row.valid = report.ok && stacked && plan.len() == 2 * misplaced;
                            row.status = match report.failure {
                                None => "ok".into(),
                                Some((step, _)) => format!("replay_failed_at_{step}"),
                            };
                        }
                    }
                }
            }
            info!(
                "n={n} repeat={repeat}: {} actions, valid={}, structure {:.3} s, poses {:.3} s, planning {:.3} s",
                row.plan_length, row.valid, times.structure_s, times.pose_s, times.planning_s
            );
            report.rows.push(row);
            report.times.push(times);
        }
    }
    Ok(report)
}
