//! Solvers for separable convex resource allocation over a box, with one
//! coupling constraint: either a separable convex budget inequality
//! `g(x) ≤ b` or a linear budget equality `Σ aᵢxᵢ = b`.
//!
//! The production algorithms work in the Lagrangian dual: a bracket of
//! multipliers whose coordinatewise minimizers straddle the resource level
//! is shrunk by safeguarded secant steps in `θ = arctan λ`, terminating in a
//! bounded number of iterations either on an exactly feasible trial or via
//! an interpolated feasibility crossing. See [`dual`] for the solvers,
//! [`term`] for the objective/constraint term catalog, [`kkt`] for
//! certification and the independent test oracles, and [`pg`] for the
//! projected-gradient fallback that covers degenerate constraint geometry.
//!
//! # Quick start
//!
//! ```
//! use resalloc::{
//!     solve, ConstraintKind, ProblemInstance, ScalarTerm, SolveStatus, SolverConfig,
//! };
//!
//! // min ½x₁² + ½x₂²  subject to  x₁ + x₂ ≤ −2,  −5 ≤ xᵢ ≤ 5.
//! let instance = ProblemInstance::new(
//!     ConstraintKind::Inequality,
//!     -2.0,
//!     vec![-5.0, -5.0],
//!     vec![5.0, 5.0],
//!     vec![ScalarTerm::QuadLin { d: 1.0, c: 0.0 }; 2],
//!     vec![ScalarTerm::LinConstraint { a: 1.0 }; 2],
//! )?;
//! let report = solve(&instance, &SolverConfig::default())?;
//! assert_eq!(report.status, SolveStatus::Optimal);
//! assert!((report.x_star[0] + 1.0).abs() < 1e-6);
//! assert!((report.lambda_star - 1.0).abs() < 1e-6);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```
//!
//! Instances round-trip through a JSON file format (see
//! [`instance::load_instance`]); the `resalloc` binary wraps generation,
//! solving, verification, and benchmarking of that format.

pub mod bench;
pub mod cli;
pub mod dual;
pub mod generator;
pub mod guide;
pub mod instance;
pub mod kkt;
mod numeric;
pub mod pg;
pub mod scalar;
pub mod term;

pub use bench::{
    geometric_mean, performance_profile, read_records_csv, run_bench, write_records_csv,
    BenchError, BenchRecord, Method, ProfilePoint,
};
pub use cli::cli_main;
pub use dual::{
    alpha_step, solve, solve_equality, solve_inequality, update_multiplier, DualBracket,
    IterationTrace, MultiplierRule, SolveBranch, SolveError, SolveReport, SolverConfig,
};
pub use generator::{generate, Family, GeneratorError, GeneratorSpec};
pub use instance::{
    load_instance, save_instance, ConstraintKind, EvalError, FileError, InstanceError,
    ProblemInstance, SolveStatus,
};
pub use kkt::{kkt_check, oracle_dual_search, oracle_grid, KktReport};
pub use pg::{
    omega_g_intervals, project_onto_omega_g, projected_gradient, projected_gradient_over, OmegaG,
    PgConfig, PgResult,
};
pub use scalar::{argmin_g_box, argmin_phi_box, minimize_scalar, AtBound, ScalarSolveResult};
pub use term::{ScalarTerm, TermIssue, TermRole};
