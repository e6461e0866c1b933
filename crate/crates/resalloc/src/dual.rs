//! Finite-terminating dual solvers for the two constraint shapes.
//!
//! Both solvers work the same way: maintain a bracket of multipliers, in the
//! transformed variable `θ = arctan λ`, whose Lagrangian minimizers straddle
//! the resource level — `g(x₊) > b` on the low-θ end, `g(x₋) < b` on the
//! high-θ end (the dual is concave, so `g(x(λ))` is nonincreasing in λ).
//! Each iteration proposes a secant multiplier from the cached objective and
//! constraint values of the two endpoints, safeguards it toward the bracket
//! midpoint when it strays (keeping a guaranteed geometric shrink of the
//! θ-interval), minimizes the Lagrangian coordinatewise, and replaces the
//! endpoint on the matching side. Termination is finite: either some trial
//! lands inside the feasibility band (`ExactHit`) or the θ-interval shrinks
//! below `eps` and the exact-feasibility point on the segment between the
//! final endpoints is returned (`AlphaStep`).
//!
//! [`solve_inequality`] handles `g(x) ≤ b` with convex separable `g`;
//! [`solve_equality`] handles `Σ aᵢxᵢ = b` (multiplier free in sign, so the
//! bracket starts on the half-line matching the constraint violation at the
//! unconstrained minimizer). Degenerate geometry — the constraint minimizer
//! landing exactly on the resource level — bypasses the loop: with a nonzero
//! constraint gradient the minimizer itself is the answer; with a vanishing
//! gradient the projected-gradient fallback minimizes `φ` over the
//! constraint's minimizer set.

use std::f64::consts::FRAC_PI_2;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{ConstraintKind, ProblemInstance, SolveStatus};
use crate::kkt::{kkt_check, KktReport};
use crate::numeric::{bisect_root, pairwise_sum_by};
use crate::pg::{projected_gradient, PgConfig};
use crate::scalar::{argmin_g_box, argmin_phi_box, minimize_scalar};
use crate::term::ScalarTerm;

/// Largest |θ| that is still mapped through `tan`; beyond it the multiplier
/// saturates at `tan(π/2 − 1e-12) ≈ 1e12`, which exceeds any multiplier the
/// cataloged term families can produce on a validated box.
const THETA_CLAMP: f64 = FRAC_PI_2 - 1e-12;

/// Tolerance used for the KKT report attached to every successful solve.
const KKT_REPORT_TOL: f64 = 1e-6;

/// Relative α-resolution of the bisection in [`alpha_step`] for nonlinear
/// constraints (linear constraints are interpolated exactly).
const ALPHA_TOL: f64 = 1e-14;

/// Hard cap on dual iterations. The geometric interval shrink bounds the
/// count near 106 for default settings; this limit only catches arithmetic
/// gone non-finite, turning it into an honest fallback instead of a hang.
const MAX_DUAL_ITERS: u32 = 1_000;

/// How the next trial multiplier is chosen from the bracket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiplierRule {
    /// Safeguarded secant: interpolate the endpoint values, fall back to the
    /// θ-midpoint when the proposal leaves the central part of the bracket.
    Secant,
    /// Plain θ-midpoint every iteration. Kept as a benchmark baseline.
    Bisection,
}

/// Solver settings. [`Default`] gives the production values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Safeguard strength γ ∈ (0, ½): a secant proposal farther than
    /// `(½−γ)·width` from the bracket midpoint is replaced by the midpoint.
    /// Larger γ forces more bisection-like steps.
    pub gamma: f64,
    /// θ-interval width at which the loop stops and takes the α-step.
    pub eps: f64,
    /// Relative feasibility band: a trial with `|g(x)−b| ≤ feas_tol·(1+|b|)`
    /// ends the solve.
    pub feas_tol: f64,
    /// Relative band for declaring the dual flat: when the two bracket
    /// endpoints have Lagrangian values this close at the current multiplier,
    /// further interpolation cannot separate them and the α-step finishes.
    pub dual_flat_tol: f64,
    /// Multiplier update rule.
    pub rule: MultiplierRule,
    /// Optional wall-clock cutoff, checked once per dual iteration. Past the
    /// deadline the solver exits through the α-step with
    /// [`SolveStatus::MaxIterFallback`].
    pub deadline: Option<Instant>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            gamma: 0.2,
            eps: 1e-10,
            feas_tol: 1e-9,
            dual_flat_tol: 1e-11,
            rule: MultiplierRule::Secant,
            deadline: None,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<(), SolveError> {
        if !(self.gamma > 0.0 && self.gamma < 0.5) {
            return Err(SolveError::BadConfig(format!(
                "gamma must lie strictly between 0 and 0.5 (got {})",
                self.gamma
            )));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(SolveError::BadConfig(format!(
                "eps must be positive and finite (got {})",
                self.eps
            )));
        }
        if !(self.feas_tol >= 0.0 && self.feas_tol.is_finite()) {
            return Err(SolveError::BadConfig(format!(
                "feas_tol must be nonnegative and finite (got {})",
                self.feas_tol
            )));
        }
        if !(self.dual_flat_tol >= 0.0 && self.dual_flat_tol.is_finite()) {
            return Err(SolveError::BadConfig(format!(
                "dual_flat_tol must be nonnegative and finite (got {})",
                self.dual_flat_tol
            )));
        }
        Ok(())
    }
}

/// Why a solve request could not start.
#[derive(Debug, Error)]
pub enum SolveError {
    #[error("invalid solver configuration: {0}")]
    BadConfig(String),
    #[error("this solver handles {expected} instances, got {got}")]
    WrongConstraint {
        expected: &'static str,
        got: &'static str,
    },
}

/// Multiplier bracket with cached endpoint evaluations.
///
/// Orientation: `x_plus` (with `g(x_plus) > b`) belongs to the **low** end
/// `theta_lo`, `x_minus` (with `g(x_minus) < b`) to the **high** end —
/// `g(x(λ))` is nonincreasing in λ, so raising the multiplier moves the
/// minimizer toward feasibility.
#[derive(Debug, Clone, PartialEq)]
pub struct DualBracket {
    pub theta_lo: f64,
    pub theta_hi: f64,
    /// Lagrangian minimizer on the infeasible side: `g(x_plus) > b`.
    pub x_plus: Vec<f64>,
    /// Lagrangian minimizer on the strictly feasible side: `g(x_minus) < b`.
    pub x_minus: Vec<f64>,
    pub phi_plus: f64,
    pub g_plus: f64,
    pub phi_minus: f64,
    pub g_minus: f64,
}

impl DualBracket {
    pub fn width(&self) -> f64 {
        self.theta_hi - self.theta_lo
    }
}

/// One completed dual iteration, as recorded in [`SolveReport::trace`].
/// `k` counts iterations from 1; the bracket fields show the state **after**
/// this iteration's endpoint replacement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub k: u32,
    pub lambda: f64,
    pub theta: f64,
    /// Constraint value of this iteration's trial minimizer.
    pub g_trial: f64,
    pub theta_lo: f64,
    pub theta_hi: f64,
    pub g_plus: f64,
    pub g_minus: f64,
}

/// Which structural path produced the answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveBranch {
    /// The unconstrained box minimizer of φ already satisfied the constraint.
    FeasibleShortcut,
    /// A dual trial landed inside the feasibility band.
    ExactHit,
    /// The θ-interval converged (or the solve was cut short) and the answer
    /// is the feasibility crossing between the final bracket endpoints.
    AlphaStep,
    /// The constraint minimizer sat exactly on the resource level, or an
    /// equality resource level coincided with a box corner.
    Degenerate,
    /// No feasible point exists; `x_star` is the certifying constraint
    /// minimizer (or box corner).
    Infeasible,
}

/// Everything a solve produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub x_star: Vec<f64>,
    pub lambda_star: f64,
    pub status: SolveStatus,
    pub branch: SolveBranch,
    /// Dual iterations performed (0 for shortcut and degenerate branches).
    pub iterations: u32,
    /// First-order optimality report at tolerance 1e-6. `None` for
    /// infeasible instances. Informational on the degenerate branches, where
    /// a multiplier certificate need not exist even at the true optimum.
    pub kkt: Option<KktReport>,
    /// Wall-clock time of the solve itself, excluding the KKT report.
    pub wall_seconds: f64,
    /// One entry per completed dual iteration; empty off the main loop.
    pub trace: Vec<IterationTrace>,
}

fn tan_clamped(theta: f64) -> f64 {
    theta.clamp(-THETA_CLAMP, THETA_CLAMP).tan()
}

/// Proposes the next multiplier from a bracket: the secant interpolation of
/// the endpoint values, replaced by the θ-midpoint whenever it falls outside
/// the central `(1−2γ)` fraction of the bracket. Returns `(λ, θ)`.
///
/// The safeguard is what makes termination finite: accepted proposals land
/// in `[θ_lo + γ·w, θ_hi − γ·w]`, so every iteration shrinks the bracket by
/// at least the factor `1 − γ`.
pub fn update_multiplier(bracket: &DualBracket, gamma: f64) -> (f64, f64) {
    debug_assert!(
        bracket.g_plus > bracket.g_minus,
        "bracket endpoints do not straddle the resource level"
    );
    let width = bracket.width();
    let mid = 0.5 * (bracket.theta_lo + bracket.theta_hi);
    let lambda_secant = (bracket.phi_minus - bracket.phi_plus) / (bracket.g_plus - bracket.g_minus);
    let theta_secant = lambda_secant.atan();
    if (theta_secant - mid).abs() > (0.5 - gamma) * width {
        (tan_clamped(mid), mid)
    } else {
        (lambda_secant, theta_secant)
    }
}

/// Minimizes the Lagrangian coordinatewise at the given multiplier, writing
/// the minimizer into `out`; returns `(φ(x), g(x))`.
fn solve_coordinates(instance: &ProblemInstance, lambda: f64, out: &mut Vec<f64>) -> (f64, f64) {
    let n = instance.n();
    let (l, u) = (instance.l(), instance.u());
    let (phi, g) = (instance.phi_terms(), instance.g_terms());
    out.clear();
    out.extend((0..n).map(|i| minimize_scalar(&phi[i], &g[i], lambda, l[i], u[i]).x_star));
    let phi_sum = pairwise_sum_by(n, |i| phi[i].value(out[i]));
    let g_sum = pairwise_sum_by(n, |i| g[i].value(out[i]));
    (phi_sum, g_sum)
}

/// Exact-feasibility point on the segment between straddling minimizers:
/// returns `(α, x)` with `x = α·x₊ + (1−α)·x₋` and `g(x) = b` (to machine
/// interpolation accuracy for linear `g`, to a 1e-14 α-resolution bisection
/// otherwise). Convexity of each `gᵢ` makes `g` convex along the segment, so
/// the crossing exists and is unique.
///
/// # Panics
///
/// If the points do not straddle: requires `g(x_minus) < b < g(x_plus)`.
pub fn alpha_step(instance: &ProblemInstance, x_plus: &[f64], x_minus: &[f64]) -> (f64, Vec<f64>) {
    let n = instance.n();
    assert_eq!(x_plus.len(), n, "x_plus has wrong dimension");
    assert_eq!(x_minus.len(), n, "x_minus has wrong dimension");
    let b = instance.b();
    let g_plus = instance.g_unchecked(x_plus);
    let g_minus = instance.g_unchecked(x_minus);
    assert!(
        g_minus < b && b < g_plus,
        "alpha_step requires g(x_minus) < b < g(x_plus) (got {g_minus}, {b}, {g_plus})"
    );

    let alpha = if instance.g_is_linear() {
        (b - g_minus) / (g_plus - g_minus)
    } else {
        let g_terms = instance.g_terms();
        let along = |t: f64| {
            pairwise_sum_by(n, |i| {
                g_terms[i].value(t * x_plus[i] + (1.0 - t) * x_minus[i])
            }) - b
        };
        bisect_root(along, 0.0, 1.0, ALPHA_TOL, 200)
    };
    let x = (0..n)
        .map(|i| alpha * x_plus[i] + (1.0 - alpha) * x_minus[i])
        .collect();
    (alpha, x)
}

/// Why the dual loop stopped.
enum LoopExit {
    /// Trial inside the feasibility band; carries the trial point.
    ExactHit { x: Vec<f64>, lambda: f64 },
    /// θ-interval width fell below `eps`.
    WidthConverged,
    /// Trial and both endpoints reached the same Lagrangian value: the dual
    /// is flat at this multiplier and the α-step point is optimal there.
    FlatDual { lambda: f64 },
    /// Wall-clock deadline passed.
    DeadlineExceeded,
    /// Safety cap hit (non-finite arithmetic); never expected.
    Stalled,
}

struct LoopOutcome {
    exit: LoopExit,
    iterations: u32,
    trace: Vec<IterationTrace>,
    bracket: DualBracket,
}

/// The shared bracket-shrinking loop. The caller supplies a valid bracket;
/// invariants (`g_plus > b > g_minus`, shrinking width) are re-checked per
/// iteration under `debug_assertions`.
fn run_dual_loop(
    instance: &ProblemInstance,
    config: &SolverConfig,
    mut bracket: DualBracket,
) -> LoopOutcome {
    let b = instance.b();
    let feas_band = config.feas_tol * (1.0 + b.abs());
    let mut trace = Vec::new();
    let mut iterations = 0u32;
    let mut trial: Vec<f64> = Vec::with_capacity(instance.n());

    let exit = loop {
        if bracket.width() <= config.eps {
            break LoopExit::WidthConverged;
        }
        if config.deadline.is_some_and(|d| Instant::now() >= d) {
            break LoopExit::DeadlineExceeded;
        }
        if iterations >= MAX_DUAL_ITERS {
            break LoopExit::Stalled;
        }
        iterations += 1;

        let (lambda, theta) = match config.rule {
            MultiplierRule::Secant => update_multiplier(&bracket, config.gamma),
            MultiplierRule::Bisection => {
                let mid = 0.5 * (bracket.theta_lo + bracket.theta_hi);
                (tan_clamped(mid), mid)
            }
        };
        let (phi_trial, g_trial) = solve_coordinates(instance, lambda, &mut trial);

        if (g_trial - b).abs() <= feas_band {
            break LoopExit::ExactHit { x: trial, lambda };
        }
        // Flat-dual test before the endpoint replacement. A flat dual shows
        // two signatures at once: the trial exactly repeats the value pair of
        // the endpoint it is about to replace (the minimizer is identical
        // across a λ-plateau, so no new endpoint information arrived), and
        // the trial's Lagrangian value coincides with both endpoint
        // Lagrangians at this multiplier — the certificate that the
        // feasibility crossing between the endpoints is primal-optimal and
        // this λ dual-optimal. Each half alone misfires: regular instances
        // satisfy the value-coincidence band late in the run (differences
        // vanish quadratically in the bracket gap, while λ still carries
        // ~√band error), and a plateau repeat alone can occur midway with the
        // optimum beyond it.
        let repeats_side = if g_trial > b {
            phi_trial == bracket.phi_plus && g_trial == bracket.g_plus
        } else {
            phi_trial == bracket.phi_minus && g_trial == bracket.g_minus
        };
        let lag_trial = phi_trial + lambda * (g_trial - b);
        let lag_plus = bracket.phi_plus + lambda * (bracket.g_plus - b);
        let lag_minus = bracket.phi_minus + lambda * (bracket.g_minus - b);
        let flat_band = config.dual_flat_tol * (1.0 + lag_trial.abs());
        let dual_is_flat = repeats_side
            && (lag_trial - lag_plus).abs() <= flat_band
            && (lag_trial - lag_minus).abs() <= flat_band;
        if g_trial > b {
            std::mem::swap(&mut bracket.x_plus, &mut trial);
            bracket.phi_plus = phi_trial;
            bracket.g_plus = g_trial;
            bracket.theta_lo = theta;
        } else {
            std::mem::swap(&mut bracket.x_minus, &mut trial);
            bracket.phi_minus = phi_trial;
            bracket.g_minus = g_trial;
            bracket.theta_hi = theta;
        }
        debug_assert!(
            bracket.g_plus > b && bracket.g_minus < b,
            "bracket no longer straddles the resource level"
        );
        debug_assert!(
            bracket.theta_lo < bracket.theta_hi,
            "bracket interval inverted"
        );
        trace.push(IterationTrace {
            k: iterations,
            lambda,
            theta,
            g_trial,
            theta_lo: bracket.theta_lo,
            theta_hi: bracket.theta_hi,
            g_plus: bracket.g_plus,
            g_minus: bracket.g_minus,
        });
        if dual_is_flat {
            break LoopExit::FlatDual { lambda };
        }
    };

    LoopOutcome {
        exit,
        iterations,
        trace,
        bracket,
    }
}

/// Assembles the report for a loop exit, taking the α-step where needed.
fn finish_loop(instance: &ProblemInstance, outcome: LoopOutcome, started: Instant) -> SolveReport {
    let (x, lambda, status) = match outcome.exit {
        LoopExit::ExactHit { x, lambda } => {
            return report(
                instance,
                x,
                lambda,
                SolveStatus::Optimal,
                SolveBranch::ExactHit,
                outcome.iterations,
                outcome.trace,
                started,
            );
        }
        LoopExit::WidthConverged => {
            let (_, x) = alpha_step(instance, &outcome.bracket.x_plus, &outcome.bracket.x_minus);
            let mid = 0.5 * (outcome.bracket.theta_lo + outcome.bracket.theta_hi);
            (x, tan_clamped(mid), SolveStatus::Optimal)
        }
        LoopExit::FlatDual { lambda } => {
            let (_, x) = alpha_step(instance, &outcome.bracket.x_plus, &outcome.bracket.x_minus);
            (x, lambda, SolveStatus::Optimal)
        }
        LoopExit::DeadlineExceeded | LoopExit::Stalled => {
            let (_, x) = alpha_step(instance, &outcome.bracket.x_plus, &outcome.bracket.x_minus);
            let mid = 0.5 * (outcome.bracket.theta_lo + outcome.bracket.theta_hi);
            (x, tan_clamped(mid), SolveStatus::MaxIterFallback)
        }
    };
    report(
        instance,
        x,
        lambda,
        status,
        SolveBranch::AlphaStep,
        outcome.iterations,
        outcome.trace,
        started,
    )
}

#[allow(clippy::too_many_arguments)]
fn report(
    instance: &ProblemInstance,
    x: Vec<f64>,
    lambda: f64,
    status: SolveStatus,
    branch: SolveBranch,
    iterations: u32,
    trace: Vec<IterationTrace>,
    started: Instant,
) -> SolveReport {
    let wall_seconds = started.elapsed().as_secs_f64();
    let kkt = match status {
        SolveStatus::Infeasible => None,
        _ => Some(kkt_check(instance, &x, lambda, KKT_REPORT_TOL)),
    };
    SolveReport {
        x_star: x,
        lambda_star: lambda,
        status,
        branch,
        iterations,
        kkt,
        wall_seconds,
        trace,
    }
}

/// Solves `min φ(x)` subject to `g(x) ≤ b`, `l ≤ x ≤ u`.
///
/// Returns an error only for invalid configuration or an equality instance;
/// infeasibility is a regular outcome ([`SolveStatus::Infeasible`], with the
/// constraint minimizer as certificate).
pub fn solve_inequality(
    instance: &ProblemInstance,
    config: &SolverConfig,
) -> Result<SolveReport, SolveError> {
    config.validate()?;
    if instance.constraint() != ConstraintKind::Inequality {
        return Err(SolveError::WrongConstraint {
            expected: "inequality",
            got: "equality",
        });
    }
    let started = Instant::now();
    let b = instance.b();

    let x_phi = argmin_phi_box(instance);
    let g_phi = instance.g_unchecked(&x_phi);
    if g_phi <= b {
        // Constraint slack at the box minimizer of φ: done, multiplier zero.
        return Ok(report(
            instance,
            x_phi,
            0.0,
            SolveStatus::Optimal,
            SolveBranch::FeasibleShortcut,
            0,
            Vec::new(),
            started,
        ));
    }

    let (x_g, g_grad_norm) = argmin_g_box(instance);
    let g_min = instance.g_unchecked(&x_g);
    if g_min > b {
        // Even the constraint's box minimum exceeds the resource level.
        return Ok(report(
            instance,
            x_g,
            0.0,
            SolveStatus::Infeasible,
            SolveBranch::Infeasible,
            0,
            Vec::new(),
            started,
        ));
    }
    if g_min == b {
        // The feasible set touches the resource level only at minimizers of
        // g. With a nonzero gradient the minimizer is unique and is the
        // answer; with a zero gradient minimize φ over the minimizer set.
        if g_grad_norm != 0.0 {
            return Ok(report(
                instance,
                x_g,
                0.0,
                SolveStatus::Optimal,
                SolveBranch::Degenerate,
                0,
                Vec::new(),
                started,
            ));
        }
        let pg = projected_gradient(instance, &PgConfig::default());
        let status = if pg.converged {
            SolveStatus::BoundaryDegenerate
        } else {
            SolveStatus::MaxIterFallback
        };
        return Ok(report(
            instance,
            pg.x,
            0.0,
            status,
            SolveBranch::Degenerate,
            0,
            Vec::new(),
            started,
        ));
    }

    let phi_plus = instance.phi_unchecked(&x_phi);
    let phi_minus = instance.phi_unchecked(&x_g);
    let bracket = DualBracket {
        theta_lo: 0.0,
        theta_hi: FRAC_PI_2,
        x_plus: x_phi,
        x_minus: x_g,
        phi_plus,
        g_plus: g_phi,
        phi_minus,
        g_minus: g_min,
    };
    Ok(finish_loop(
        instance,
        run_dual_loop(instance, config, bracket),
        started,
    ))
}

/// Multiplier certifying a box corner for an equality instance: at the lower
/// corner every stationarity slack `φᵢ′(lᵢ) + λaᵢ` must be nonnegative, so
/// the smallest valid λ is the largest of `−φᵢ′(lᵢ)/aᵢ`; the upper corner is
/// symmetric with a min.
fn equality_corner_multiplier(instance: &ProblemInstance, x: &[f64], lower: bool) -> f64 {
    let ratios = instance
        .phi_terms()
        .iter()
        .zip(instance.g_terms())
        .zip(x)
        .map(|((phi, g), &xi)| {
            let a = match *g {
                ScalarTerm::LinConstraint { a } => a,
                _ => unreachable!("equality constraints are linear"),
            };
            -phi.deriv(xi) / a
        });
    if lower {
        ratios.fold(f64::NEG_INFINITY, f64::max)
    } else {
        ratios.fold(f64::INFINITY, f64::min)
    }
}

/// Solves `min φ(x)` subject to `Σ aᵢxᵢ = b`, `l ≤ x ≤ u` (coefficients
/// normalized positive at construction).
///
/// The multiplier is unrestricted in sign; which half-line it lives on is
/// read off the constraint violation at the box minimizer of φ.
pub fn solve_equality(
    instance: &ProblemInstance,
    config: &SolverConfig,
) -> Result<SolveReport, SolveError> {
    config.validate()?;
    if instance.constraint() != ConstraintKind::LinearEquality {
        return Err(SolveError::WrongConstraint {
            expected: "equality",
            got: "inequality",
        });
    }
    let started = Instant::now();
    let b = instance.b();
    let feas_band = config.feas_tol * (1.0 + b.abs());

    // With positive coefficients g is minimal at l and maximal at u; the
    // resource level must fall between them.
    let g_lo = instance.g_unchecked(instance.l());
    let g_hi = instance.g_unchecked(instance.u());
    if (g_lo - b).abs() <= feas_band {
        // The lower corner is the only point meeting the budget.
        let x = instance.l().to_vec();
        let lambda = equality_corner_multiplier(instance, &x, true);
        return Ok(report(
            instance,
            x,
            lambda,
            SolveStatus::Optimal,
            SolveBranch::Degenerate,
            0,
            Vec::new(),
            started,
        ));
    }
    if (g_hi - b).abs() <= feas_band {
        let x = instance.u().to_vec();
        let lambda = equality_corner_multiplier(instance, &x, false);
        return Ok(report(
            instance,
            x,
            lambda,
            SolveStatus::Optimal,
            SolveBranch::Degenerate,
            0,
            Vec::new(),
            started,
        ));
    }
    if g_lo > b || g_hi < b {
        let x = if g_lo > b {
            instance.l().to_vec()
        } else {
            instance.u().to_vec()
        };
        return Ok(report(
            instance,
            x,
            0.0,
            SolveStatus::Infeasible,
            SolveBranch::Infeasible,
            0,
            Vec::new(),
            started,
        ));
    }

    let x_phi = argmin_phi_box(instance);
    let g_phi = instance.g_unchecked(&x_phi);
    if (g_phi - b).abs() <= feas_band {
        return Ok(report(
            instance,
            x_phi,
            0.0,
            SolveStatus::Optimal,
            SolveBranch::FeasibleShortcut,
            0,
            Vec::new(),
            started,
        ));
    }

    let phi_at_phi = instance.phi_unchecked(&x_phi);
    let bracket = if g_phi < b {
        // Budget exceeds the unconstrained pick: the multiplier is negative
        // (paying to use more). The upper corner caps the infeasible side.
        let x_plus = instance.u().to_vec();
        let phi_plus = instance.phi_unchecked(&x_plus);
        DualBracket {
            theta_lo: -FRAC_PI_2,
            theta_hi: 0.0,
            x_plus,
            x_minus: x_phi,
            phi_plus,
            g_plus: g_hi,
            phi_minus: phi_at_phi,
            g_minus: g_phi,
        }
    } else {
        // Budget is scarce: positive multiplier, lower corner on the
        // feasible side.
        let x_minus = instance.l().to_vec();
        let phi_minus = instance.phi_unchecked(&x_minus);
        DualBracket {
            theta_lo: 0.0,
            theta_hi: FRAC_PI_2,
            x_plus: x_phi,
            x_minus,
            phi_plus: phi_at_phi,
            g_plus: g_phi,
            phi_minus,
            g_minus: g_lo,
        }
    };
    Ok(finish_loop(
        instance,
        run_dual_loop(instance, config, bracket),
        started,
    ))
}

/// Dispatches on the instance's constraint kind.
pub fn solve(instance: &ProblemInstance, config: &SolverConfig) -> Result<SolveReport, SolveError> {
    match instance.constraint() {
        ConstraintKind::Inequality => solve_inequality(instance, config),
        ConstraintKind::LinearEquality => solve_equality(instance, config),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn quad_ineq(b: f64, l: f64, u: f64) -> ProblemInstance {
        ProblemInstance::new(
            ConstraintKind::Inequality,
            b,
            vec![l, l],
            vec![u, u],
            vec![ScalarTerm::QuadLin { d: 1.0, c: 0.0 }; 2],
            vec![ScalarTerm::LinConstraint { a: 1.0 }; 2],
        )
        .unwrap()
    }

    // --- multiplier update -------------------------------------------------

    #[test]
    fn secant_proposal_is_kept_inside_the_central_band() {
        // Endpoint values (φ, g): plus (1, 10), minus (5, 2) → secant
        // λ = (5−1)/(10−2) = 0.5; atan(0.5) ≈ 0.4636 sits within 0.3·(π/2) of
        // the midpoint π/4, so it is kept bit-exactly.
        let bracket = DualBracket {
            theta_lo: 0.0,
            theta_hi: FRAC_PI_2,
            x_plus: vec![],
            x_minus: vec![],
            phi_plus: 1.0,
            g_plus: 10.0,
            phi_minus: 5.0,
            g_minus: 2.0,
        };
        let (lambda, theta) = update_multiplier(&bracket, 0.2);
        assert_eq!(lambda, 0.5);
        assert_eq!(theta, 0.5f64.atan());
    }

    #[test]
    fn wandering_proposal_is_replaced_by_the_midpoint() {
        // Same endpoint values on the narrower interval [0.45, π/2]: the
        // secant θ ≈ 0.4636 is now far below the midpoint, beyond the
        // 0.3·width band, so the midpoint (and its tangent) comes back.
        let bracket = DualBracket {
            theta_lo: 0.45,
            theta_hi: FRAC_PI_2,
            x_plus: vec![],
            x_minus: vec![],
            phi_plus: 1.0,
            g_plus: 10.0,
            phi_minus: 5.0,
            g_minus: 2.0,
        };
        let mid = 0.5 * (0.45 + FRAC_PI_2);
        let (lambda, theta) = update_multiplier(&bracket, 0.2);
        assert_eq!(theta, mid);
        assert!((lambda - mid.tan()).abs() < 1e-15);
    }

    #[test]
    fn strong_safeguard_forces_near_bisection() {
        // γ close to ½ shrinks the acceptance band to almost nothing.
        let bracket = DualBracket {
            theta_lo: 0.0,
            theta_hi: FRAC_PI_2,
            x_plus: vec![],
            x_minus: vec![],
            phi_plus: 1.0,
            g_plus: 10.0,
            phi_minus: 5.0,
            g_minus: 2.0,
        };
        let (lambda, theta) = update_multiplier(&bracket, 0.49);
        assert_eq!(theta, FRAC_PI_2 / 2.0);
        assert!((lambda - 1.0).abs() < 1e-15); // tan(π/4)
    }

    #[test]
    fn multiplier_stays_finite_next_to_the_right_angle() {
        // A bracket hugging π/2 would have tan(mid) overflow without the
        // clamp; the clamp caps it near 1e12.
        let bracket = DualBracket {
            theta_lo: FRAC_PI_2 - 3e-13,
            theta_hi: FRAC_PI_2,
            x_plus: vec![],
            x_minus: vec![],
            phi_plus: 0.0,
            g_plus: 1.0,
            phi_minus: 1e20,
            g_minus: 0.0,
        };
        let (lambda, _) = update_multiplier(&bracket, 0.2);
        assert!(lambda.is_finite());
        assert!(lambda > 1e11);
    }

    // --- inequality branches ----------------------------------------------

    #[test]
    fn slack_budget_takes_the_feasible_shortcut() {
        let inst = quad_ineq(1.0, -5.0, 5.0);
        let report = solve_inequality(&inst, &SolverConfig::default()).unwrap();
        assert_eq!(report.branch, SolveBranch::FeasibleShortcut);
        assert_eq!(report.status, SolveStatus::Optimal);
        assert_eq!(report.x_star, vec![0.0, 0.0]);
        assert_eq!(report.lambda_star, 0.0);
        assert_eq!(report.iterations, 0);
        assert!(report.kkt.unwrap().pass);
    }

    #[test]
    fn impossible_budget_reports_infeasible_with_certificate() {
        let inst = quad_ineq(1.0, 2.0, 5.0); // min of g is 4 > 1
        let report = solve_inequality(&inst, &SolverConfig::default()).unwrap();
        assert_eq!(report.status, SolveStatus::Infeasible);
        assert_eq!(report.branch, SolveBranch::Infeasible);
        assert_eq!(report.x_star, vec![2.0, 2.0]);
        assert!(report.kkt.is_none());
    }

    #[test]
    fn budget_touching_the_constraint_minimum_is_degenerate() {
        // φ pulls to the upper corner (minimizer at x = 10, clipped to 5), so
        // the feasible shortcut misses; the box minimum of g = x₁+x₂ is
        // exactly b = 4 at (2,2) with nonzero slope.
        let inst = ProblemInstance::new(
            ConstraintKind::Inequality,
            4.0,
            vec![2.0, 2.0],
            vec![5.0, 5.0],
            vec![ScalarTerm::QuadLin { d: 1.0, c: 10.0 }; 2],
            vec![ScalarTerm::LinConstraint { a: 1.0 }; 2],
        )
        .unwrap();
        let report = solve_inequality(&inst, &SolverConfig::default()).unwrap();
        assert_eq!(report.status, SolveStatus::Optimal);
        assert_eq!(report.branch, SolveBranch::Degenerate);
        assert_eq!(report.x_star, vec![2.0, 2.0]);
    }

    #[test]
    fn flat_constraint_minimum_runs_the_projected_fallback() {
        // g = ½x² − 2x has its box minimum at x = 2 with zero slope and value
        // −2; setting b = −2 exactly forces the fallback.
        let inst = ProblemInstance::new(
            ConstraintKind::Inequality,
            -2.0,
            vec![0.0],
            vec![5.0],
            vec![ScalarTerm::QuadLin { d: 1.0, c: 1.0 }],
            vec![ScalarTerm::QuadConstraint { a: 1.0, z: 2.0 }],
        )
        .unwrap();
        let report = solve_inequality(&inst, &SolverConfig::default()).unwrap();
        assert_eq!(report.status, SolveStatus::BoundaryDegenerate);
        assert_eq!(report.branch, SolveBranch::Degenerate);
        assert_eq!(report.x_star, vec![2.0]);
    }

    #[test]
    fn main_loop_recovers_the_analytic_quadratic_optimum() {
        // min ½x₁²+½x₂² s.t. x₁+x₂ ≤ −2: optimum (−1,−1) with λ* = 1.
        let inst = quad_ineq(-2.0, -5.0, 5.0);
        let report = solve_inequality(&inst, &SolverConfig::default()).unwrap();
        assert_eq!(report.status, SolveStatus::Optimal);
        assert!(matches!(
            report.branch,
            SolveBranch::ExactHit | SolveBranch::AlphaStep
        ));
        assert!((report.x_star[0] + 1.0).abs() < 1e-6, "{:?}", report.x_star);
        assert!((report.x_star[1] + 1.0).abs() < 1e-6);
        assert!((report.lambda_star - 1.0).abs() < 1e-6);
        assert!(report.kkt.unwrap().pass);
        assert!(report.iterations >= 1);
    }

    // --- equality branches --------------------------------------------------

    fn diag_quad_eq(d: Vec<f64>, b: f64, l: f64, u: f64) -> ProblemInstance {
        let n = d.len();
        ProblemInstance::new(
            ConstraintKind::LinearEquality,
            b,
            vec![l; n],
            vec![u; n],
            d.into_iter()
                .map(|d| ScalarTerm::QuadLin { d, c: 1.0 })
                .collect(),
            vec![ScalarTerm::LinConstraint { a: 1.0 }; n],
        )
        .unwrap()
    }

    #[test]
    fn equality_matches_the_hand_solved_three_variable_instance() {
        // d = (1,2,4), Σx = 1 on [0,1]³ → λ* = 3/7, x = (4/7, 2/7, 1/7).
        let inst = diag_quad_eq(vec![1.0, 2.0, 4.0], 1.0, 0.0, 1.0);
        let report = solve_equality(&inst, &SolverConfig::default()).unwrap();
        assert_eq!(report.status, SolveStatus::Optimal);
        let expect = [4.0 / 7.0, 2.0 / 7.0, 1.0 / 7.0];
        for (xi, ei) in report.x_star.iter().zip(expect) {
            assert!((xi - ei).abs() < 1e-8, "{:?}", report.x_star);
        }
        assert!((report.lambda_star - 3.0 / 7.0).abs() < 1e-8);
        assert!(report.kkt.unwrap().pass);
    }

    #[test]
    fn equality_shortcut_fires_when_the_free_minimizer_meets_the_budget() {
        let inst = diag_quad_eq(vec![1.0, 1.0], 2.0, 0.0, 3.0); // x_φ = (1,1), g = 2
        let report = solve_equality(&inst, &SolverConfig::default()).unwrap();
        assert_eq!(report.branch, SolveBranch::FeasibleShortcut);
        assert_eq!(report.x_star, vec![1.0, 1.0]);
        assert_eq!(report.lambda_star, 0.0);
    }

    #[test]
    fn generous_budget_yields_a_negative_multiplier() {
        // Σx = 4 forces past the free minimizer (1,1): optimum (2,2), λ* = −1.
        let inst = diag_quad_eq(vec![1.0, 1.0], 4.0, 0.0, 3.0);
        let report = solve_equality(&inst, &SolverConfig::default()).unwrap();
        assert_eq!(report.status, SolveStatus::Optimal);
        assert!((report.x_star[0] - 2.0).abs() < 1e-6);
        assert!((report.x_star[1] - 2.0).abs() < 1e-6);
        assert!((report.lambda_star + 1.0).abs() < 1e-6);
        assert!(report.kkt.unwrap().pass);
    }

    #[test]
    fn budget_beyond_the_upper_corner_is_infeasible() {
        let inst = diag_quad_eq(vec![1.0, 1.0], 7.0, 0.0, 3.0); // g(u) = 6 < 7
        let report = solve_equality(&inst, &SolverConfig::default()).unwrap();
        assert_eq!(report.status, SolveStatus::Infeasible);
        assert_eq!(report.x_star, vec![3.0, 3.0]);
        assert!(report.kkt.is_none());
    }

    #[test]
    fn budget_at_the_lower_corner_returns_it_with_a_certifying_multiplier() {
        // b = g(l) = 0: the corner is the only feasible point. λ must push
        // every stationarity slack nonnegative: λ = max(−φᵢ′(0)) = 1.
        let inst = diag_quad_eq(vec![1.0, 1.0], 0.0, 0.0, 3.0);
        let report = solve_equality(&inst, &SolverConfig::default()).unwrap();
        assert_eq!(report.branch, SolveBranch::Degenerate);
        assert_eq!(report.x_star, vec![0.0, 0.0]);
        assert!((report.lambda_star - 1.0).abs() < 1e-12);
        assert!(report.kkt.unwrap().pass);
    }

    // --- α-step ---------------------------------------------------------------

    #[test]
    fn linear_constraint_interpolates_exactly() {
        let inst = ProblemInstance::new(
            ConstraintKind::Inequality,
            6.0,
            vec![0.0],
            vec![20.0],
            vec![ScalarTerm::QuadLin { d: 1.0, c: 0.0 }],
            vec![ScalarTerm::LinConstraint { a: 1.0 }],
        )
        .unwrap();
        let (alpha, x) = alpha_step(&inst, &[10.0], &[2.0]);
        assert_eq!(alpha, 0.5);
        assert_eq!(x, vec![6.0]);
    }

    #[test]
    fn resource_level_hugging_one_endpoint_drives_alpha_to_zero() {
        let inst = ProblemInstance::new(
            ConstraintKind::Inequality,
            2.0 + 8e-15,
            vec![0.0],
            vec![20.0],
            vec![ScalarTerm::QuadLin { d: 1.0, c: 0.0 }],
            vec![ScalarTerm::LinConstraint { a: 1.0 }],
        )
        .unwrap();
        let (alpha, x) = alpha_step(&inst, &[10.0], &[2.0]);
        assert!(alpha > 0.0 && alpha < 1e-14);
        assert!((x[0] - 2.0).abs() < 1e-13);
    }

    #[test]
    fn quadratic_constraint_is_bisected_to_the_crossing() {
        // g = ½x², endpoints x₋ = 1, x₊ = 3, level b = 2: the segment point
        // x = 1 + 2α crosses at (1+2α)² = 4, i.e. α = ½, x = 2.
        let inst = ProblemInstance::new(
            ConstraintKind::Inequality,
            2.0,
            vec![0.0],
            vec![5.0],
            vec![ScalarTerm::QuadLin { d: 1.0, c: 0.0 }],
            vec![ScalarTerm::QuadConstraint { a: 1.0, z: 0.0 }],
        )
        .unwrap();
        let (alpha, x) = alpha_step(&inst, &[3.0], &[1.0]);
        assert!((alpha - 0.5).abs() < 1e-9);
        assert!((x[0] - 2.0).abs() < 1e-8);
    }

    // --- loop behaviour ----------------------------------------------------

    #[test]
    fn expired_deadline_exits_through_the_alpha_step() {
        let inst = diag_quad_eq(vec![1.0, 2.0, 4.0], 1.0, 0.0, 1.0);
        let config = SolverConfig {
            deadline: Some(Instant::now()),
            ..SolverConfig::default()
        };
        let report = solve_equality(&inst, &config).unwrap();
        assert_eq!(report.status, SolveStatus::MaxIterFallback);
        assert_eq!(report.branch, SolveBranch::AlphaStep);
        assert_eq!(report.iterations, 0);
        // The α-step still delivers an exactly-on-budget point.
        let g: f64 = report.x_star.iter().sum();
        assert!((g - 1.0).abs() <= 1e-9 * 2.0);
    }

    #[test]
    fn bisection_baseline_agrees_with_the_secant_rule() {
        let inst = quad_ineq(-2.0, -5.0, 5.0);
        let secant = solve_inequality(&inst, &SolverConfig::default()).unwrap();
        let bisect = solve_inequality(
            &inst,
            &SolverConfig {
                rule: MultiplierRule::Bisection,
                ..SolverConfig::default()
            },
        )
        .unwrap();
        assert_eq!(bisect.status, SolveStatus::Optimal);
        let phi_s = inst.eval_phi(&secant.x_star).unwrap();
        let phi_b = inst.eval_phi(&bisect.x_star).unwrap();
        assert!((phi_s - phi_b).abs() < 1e-6, "{phi_s} vs {phi_b}");
    }

    #[test]
    fn trace_keeps_the_bracket_straddling_and_shrinking() {
        // A lightly heterogeneous equality instance that needs several
        // iterations.
        let d: Vec<f64> = (0..20).map(|i| 1.0 + (i % 5) as f64).collect();
        let inst = diag_quad_eq(d, 13.0, 0.0, 2.0);
        let report = solve_equality(&inst, &SolverConfig::default()).unwrap();
        assert_eq!(report.status, SolveStatus::Optimal);
        let gamma = SolverConfig::default().gamma;
        for row in &report.trace {
            assert!(row.g_plus > inst.b(), "row {}: g_plus on wrong side", row.k);
            assert!(
                row.g_minus < inst.b(),
                "row {}: g_minus on wrong side",
                row.k
            );
            let width = row.theta_hi - row.theta_lo;
            let bound = FRAC_PI_2 * (1.0 - gamma).powi(row.k as i32);
            assert!(
                width <= bound * (1.0 + 1e-12),
                "row {}: width {width} exceeds {bound}",
                row.k
            );
            assert!(row.lambda.is_finite());
        }
    }

    #[test]
    fn solved_multiplier_maximizes_the_dual_among_samples() {
        let inst = quad_ineq(-2.0, -5.0, 5.0);
        let report = solve_inequality(&inst, &SolverConfig::default()).unwrap();
        let dual_at = |lambda: f64| {
            let mut x = Vec::new();
            let (phi, g) = solve_coordinates(&inst, lambda, &mut x);
            phi + lambda * (g - inst.b())
        };
        let best = dual_at(report.lambda_star);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for i in 0..50 {
            // Half the samples probe near the solution, half sweep the tail
            // of the clamped multiplier range on a log scale.
            let lambda = if i % 2 == 0 {
                rng.gen_range(0.0..(2.0 * report.lambda_star + 1.0))
            } else {
                10f64.powf(rng.gen_range(-2.0..12.0))
            };
            let value = dual_at(lambda);
            assert!(
                best >= value - 1e-8 * (1.0 + best.abs()),
                "dual at sampled λ = {lambda} beats the solution: {value} > {best}"
            );
        }
    }

    // --- configuration errors ------------------------------------------------

    #[test]
    fn out_of_range_gamma_is_rejected() {
        let inst = quad_ineq(1.0, -5.0, 5.0);
        let config = SolverConfig {
            gamma: 0.5,
            ..SolverConfig::default()
        };
        assert!(matches!(
            solve_inequality(&inst, &config),
            Err(SolveError::BadConfig(_))
        ));
    }

    #[test]
    fn zero_eps_is_rejected() {
        let inst = quad_ineq(1.0, -5.0, 5.0);
        let config = SolverConfig {
            eps: 0.0,
            ..SolverConfig::default()
        };
        assert!(matches!(
            solve_inequality(&inst, &config),
            Err(SolveError::BadConfig(_))
        ));
    }

    #[test]
    fn constraint_kind_mismatch_is_rejected() {
        let ineq = quad_ineq(1.0, -5.0, 5.0);
        assert!(matches!(
            solve_equality(&ineq, &SolverConfig::default()),
            Err(SolveError::WrongConstraint { .. })
        ));
        let eq = diag_quad_eq(vec![1.0], 1.0, 0.0, 3.0);
        assert!(matches!(
            solve_inequality(&eq, &SolverConfig::default()),
            Err(SolveError::WrongConstraint { .. })
        ));
        // The dispatcher picks the right solver for both.
        assert!(solve(&ineq, &SolverConfig::default()).is_ok());
        assert!(solve(&eq, &SolverConfig::default()).is_ok());
    }
}
