//! Benchmark harness: timed solver runs over generated instances, summary
//! statistics, and performance profiles.
//!
//! A bench run solves every generated instance once per applicable method
//! and records one [`BenchRecord`] per (instance, method) pair. Records
//! round-trip through CSV with the fixed column set
//! `problem_id,method,wall_seconds,iterations,status,objective`, so runs can
//! be archived and profiled later without rerunning.
//!
//! [`performance_profile`] implements the standard ratio-based comparison:
//! for each problem, each method's time is divided by the best time any
//! method achieved on that problem; `ρ_m(τ)` is then the fraction of
//! problems method `m` solved within factor `τ` of the best. Failed solves
//! count as never solved (infinite ratio).

use std::collections::{BTreeMap, BTreeSet};
use std::io;
use std::path::Path;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dual::{solve, MultiplierRule, SolverConfig};
use crate::generator::{generate, Family, GeneratorError, GeneratorSpec};
use crate::instance::{ConstraintKind, SolveStatus};

/// Solver identities compared by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Safeguarded-secant dual solver for inequality instances.
    Algorithm1,
    /// Safeguarded-secant dual solver for equality instances.
    Algorithm2,
    /// The same bracketing loop driven by plain θ-midpoints, as a baseline.
    DualBisectionBaseline,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Algorithm1 => "algorithm1",
            Method::Algorithm2 => "algorithm2",
            Method::DualBisectionBaseline => "dual_bisection_baseline",
        }
    }

    /// The two methods that apply to a constraint shape: the matching secant
    /// solver and the bisection baseline.
    pub fn for_constraint(kind: ConstraintKind) -> [Method; 2] {
        match kind {
            ConstraintKind::Inequality => [Method::Algorithm1, Method::DualBisectionBaseline],
            ConstraintKind::LinearEquality => [Method::Algorithm2, Method::DualBisectionBaseline],
        }
    }
}

/// One timed solve. `objective` is `φ(x_star)` — for infeasible outcomes
/// that is the value at the certificate point, recorded for completeness but
/// ignored by the profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub problem_id: String,
    pub method: String,
    pub wall_seconds: f64,
    pub iterations: u32,
    pub status: SolveStatus,
    pub objective: f64,
}

/// One abscissa of a performance profile: the fraction of problems each
/// method solved within factor `tau` of the per-problem best time, keyed by
/// method name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub tau: f64,
    pub rho: BTreeMap<String, f64>,
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error("reading records: {0}")]
    Csv(#[from] csv::Error),
    #[error("writing records: {0}")]
    Io(#[from] io::Error),
}

/// Times every applicable method on `reps` seeded instances per
/// (family, size) cell. Rep `r` uses seed `seed0 + r`, so the instance set
/// is reproducible and distinct across reps. A timeout becomes the solver
/// deadline; a run cut short reports [`SolveStatus::MaxIterFallback`] with
/// its wall time capped at the timeout.
pub fn run_bench(
    families: &[Family],
    sizes: &[usize],
    reps: u32,
    seed0: u64,
    b_fraction: f64,
    timeout: Option<Duration>,
) -> Result<Vec<BenchRecord>, BenchError> {
    let mut records = Vec::new();
    for &family in families {
        for &n in sizes {
            for rep in 0..reps {
                let seed = seed0 + u64::from(rep);
                let instance = generate(&GeneratorSpec {
                    family,
                    n,
                    seed,
                    b_fraction,
                })?;
                let problem_id = format!("{family}-n{n}-s{seed}");
                for method in Method::for_constraint(instance.constraint()) {
                    let config = SolverConfig {
                        rule: match method {
                            Method::DualBisectionBaseline => MultiplierRule::Bisection,
                            _ => MultiplierRule::Secant,
                        },
                        deadline: timeout.map(|t| Instant::now() + t),
                        ..SolverConfig::default()
                    };
                    let report = solve(&instance, &config)
                        .expect("bench configs are valid and methods match the constraint kind");
                    debug_assert!(
                        report.status != SolveStatus::Optimal
                            || report.kkt.as_ref().is_some_and(|k| k.pass),
                        "optimal solve of {problem_id} must carry a passing certificate"
                    );
                    let mut wall_seconds = report.wall_seconds;
                    if let Some(t) = timeout {
                        wall_seconds = wall_seconds.min(t.as_secs_f64());
                    }
                    let objective = instance
                        .eval_phi(&report.x_star)
                        .expect("solver returns points inside the box");
                    records.push(BenchRecord {
                        problem_id: problem_id.clone(),
                        method: method.as_str().to_string(),
                        wall_seconds,
                        iterations: report.iterations,
                        status: report.status,
                        objective,
                    });
                }
            }
        }
    }
    Ok(records)
}

/// Geometric mean with the customary clamp at 1e-12, which keeps
/// zero-duration timings (below clock resolution) from collapsing the
/// product.
///
/// # Panics
///
/// If `values` is empty or contains a negative number.
pub fn geometric_mean(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "geometric mean of nothing");
    let log_sum: f64 = values
        .iter()
        .map(|&v| {
            assert!(v >= 0.0, "geometric mean of a negative value ({v})");
            v.max(1e-12).ln()
        })
        .sum();
    (log_sum / values.len() as f64).exp()
}

/// Whether a record counts as a solved problem for profiling purposes.
fn solved(status: SolveStatus) -> bool {
    matches!(
        status,
        SolveStatus::Optimal | SolveStatus::BoundaryDegenerate
    )
}

/// Builds the performance profile of a record set.
///
/// Problems with no successful method are dropped (there is no best time to
/// normalize by); within a problem, duplicate (method, problem) records keep
/// their fastest run. The result has one point per distinct finite ratio,
/// starting at `τ = 1`, with every method's `ρ` at each point; `ρ` is
/// nondecreasing in `τ` and reaches the method's overall solve fraction at
/// the largest ratio.
pub fn performance_profile(records: &[BenchRecord]) -> Vec<ProfilePoint> {
    // problem → method → best (wall, solved) pair observed.
    let mut by_problem: BTreeMap<&str, BTreeMap<&str, (f64, bool)>> = BTreeMap::new();
    let mut methods: BTreeSet<&str> = BTreeSet::new();
    for r in records {
        methods.insert(&r.method);
        let cell = by_problem
            .entry(&r.problem_id)
            .or_default()
            .entry(&r.method)
            .or_insert((f64::INFINITY, false));
        let ok = solved(r.status);
        // A successful run always beats a failed one; ties break by time.
        if (ok, -r.wall_seconds) > (cell.1, -cell.0) {
            *cell = (r.wall_seconds, ok);
        }
    }

    // Per-problem ratios against the best successful time.
    let mut ratios: BTreeMap<&str, Vec<f64>> = methods.iter().map(|&m| (m, Vec::new())).collect();
    let mut problem_count = 0usize;
    for cells in by_problem.values() {
        let best = cells
            .values()
            .filter(|(_, ok)| *ok)
            .map(|(t, _)| t.max(1e-12))
            .fold(f64::INFINITY, f64::min);
        if !best.is_finite() {
            continue;
        }
        problem_count += 1;
        for &method in &methods {
            let ratio = match cells.get(method) {
                Some((t, true)) => t.max(1e-12) / best,
                _ => f64::INFINITY,
            };
            ratios.get_mut(method).unwrap().push(ratio);
        }
    }
    if problem_count == 0 {
        return Vec::new();
    }

    // Step abscissas: every finite ratio, always including τ = 1.
    let mut taus: Vec<f64> = ratios
        .values()
        .flatten()
        .copied()
        .filter(|r| r.is_finite())
        .chain(std::iter::once(1.0))
        .collect();
    taus.sort_by(|a, b| a.partial_cmp(b).unwrap());
    taus.dedup();

    taus.into_iter()
        .map(|tau| {
            let rho = ratios
                .iter()
                .map(|(&m, rs)| {
                    let within = rs.iter().filter(|&&r| r <= tau).count();
                    (m.to_string(), within as f64 / problem_count as f64)
                })
                .collect();
            ProfilePoint { tau, rho }
        })
        .collect()
}

/// Writes records as CSV with the fixed header
/// `problem_id,method,wall_seconds,iterations,status,objective`. Floats use
/// the shortest representation that parses back to the identical bits.
pub fn write_records_csv<W: io::Write>(
    writer: W,
    records: &[BenchRecord],
) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(writer);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads records written by [`write_records_csv`].
pub fn read_records_csv(path: &Path) -> Result<Vec<BenchRecord>, BenchError> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut records = Vec::new();
    for row in reader.deserialize() {
        records.push(row?);
    }
    Ok(records)
}
