//! Projected-gradient fallback for degenerate constraint geometry.
//!
//! The dual solvers need every dual evaluation to move the constraint value;
//! that breaks down when the box minimizer of `g` lands exactly on the
//! resource level with a vanishing gradient. In that corner the optimum lies
//! inside `Ω_g = argmin_{l ≤ x ≤ u} g(x)`, which for separable `g` is a box
//! in its own right: per coordinate, the minimizers of a convex `gᵢ` over
//! `[lᵢ, uᵢ]` form a closed interval. Minimizing `φ` over `Ω_g` is therefore
//! an ordinary box-constrained problem, handled here by projected gradient
//! descent with Armijo backtracking.

use crate::instance::ProblemInstance;
use crate::numeric::pairwise_sum_by;
use crate::term::ScalarTerm;

/// Tuning knobs for [`projected_gradient`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgConfig {
    /// Gradient step length used before backtracking.
    pub beta: f64,
    /// Armijo sufficient-decrease fraction.
    pub sigma: f64,
    /// Relative stop tolerance on the projected step `‖P(x−β∇φ) − x‖∞`.
    pub eps: f64,
    /// Iteration cap; hitting it returns `converged == false`.
    pub max_iter: u32,
}

impl Default for PgConfig {
    fn default() -> Self {
        Self {
            beta: 1.0,
            sigma: 1e-4,
            eps: 1e-10,
            max_iter: 100_000,
        }
    }
}

/// The minimizer set of `g` over the box: one closed interval per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaG {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl OmegaG {
    /// Builds the set from explicit interval endpoints.
    ///
    /// # Panics
    ///
    /// If the vectors differ in length or any interval is empty.
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len(), "interval endpoint lengths differ");
        assert!(
            lo.iter().zip(&hi).all(|(a, b)| a <= b),
            "empty coordinate interval"
        );
        Self { lo, hi }
    }

    pub fn n(&self) -> usize {
        self.lo.len()
    }
}

/// Per-coordinate minimizer intervals of the constraint terms over the box.
///
/// Every cataloged constraint term is strictly convex or strictly monotone,
/// so each interval collapses to a point: the linear term picks the bound its
/// slope points away from, the quadratic term its clipped vertex. The
/// interval representation is kept because [`projected_gradient_over`] is
/// also used with wider, externally supplied sets.
pub fn omega_g_intervals(instance: &ProblemInstance) -> OmegaG {
    let (l, u) = (instance.l(), instance.u());
    let n = instance.n();
    let mut lo = Vec::with_capacity(n);
    let mut hi = Vec::with_capacity(n);
    for (i, g) in instance.g_terms().iter().enumerate() {
        let point = match *g {
            ScalarTerm::LinConstraint { a } => {
                if a > 0.0 {
                    l[i]
                } else {
                    u[i]
                }
            }
            ScalarTerm::QuadConstraint { a, z } => (z / a).clamp(l[i], u[i]),
            // Objective-only terms cannot appear on the constraint side; the
            // instance constructor rejects them.
            _ => unreachable!("constraint term validated at construction"),
        };
        lo.push(point);
        hi.push(point);
    }
    OmegaG { lo, hi }
}

/// Euclidean projection onto the coordinate intervals: a per-coordinate clamp.
pub fn project_onto_omega_g(omega: &OmegaG, x: &[f64]) -> Vec<f64> {
    assert_eq!(x.len(), omega.n(), "point has wrong dimension");
    x.iter()
        .zip(omega.lo.iter().zip(&omega.hi))
        .map(|(&xi, (&lo, &hi))| xi.clamp(lo, hi))
        .collect()
}

/// Outcome of a projected-gradient run.
#[derive(Debug, Clone, PartialEq)]
pub struct PgResult {
    pub x: Vec<f64>,
    pub iterations: u32,
    /// Whether the projected step shrank below tolerance before `max_iter`.
    pub converged: bool,
}

/// Minimizes the instance objective over `Ω_g`, starting from the projection
/// of the box minimizer of `φ` (for the cataloged point sets that projection
/// already is the answer, confirmed in one iteration).
pub fn projected_gradient(instance: &ProblemInstance, config: &PgConfig) -> PgResult {
    let omega = omega_g_intervals(instance);
    let x0 = project_onto_omega_g(&omega, &crate::scalar::argmin_phi_box(instance));
    projected_gradient_over(instance.phi_terms(), &omega, &x0, config)
}

/// Minimizes `Σ φᵢ(xᵢ)` over an explicit interval product.
///
/// Each iteration takes the projected gradient step `x_p = P(x − β∇φ(x))`,
/// moves along `d = x_p − x`, and backtracks `γ = 2⁻ʲ` until the Armijo
/// condition `φ(x+γd) ≤ φ(x) + σγ·∇φ(x)ᵀd` holds. Stops converged when
/// `‖d‖∞ ≤ eps·(1+‖x‖∞)`, or when the objective has reached its floating
/// point noise floor — no step achieves a decrease distinguishable from
/// rounding and the directional derivative is numerically zero.
///
/// # Panics
///
/// If `x0` has the wrong dimension or lies outside every φᵢ's domain after
/// projection (cataloged objectives are finite on their validated boxes, so
/// this only concerns hand-built interval sets).
pub fn projected_gradient_over(
    phi: &[ScalarTerm],
    omega: &OmegaG,
    x0: &[f64],
    config: &PgConfig,
) -> PgResult {
    let n = omega.n();
    assert_eq!(phi.len(), n, "objective term count differs from dimension");
    let mut x = project_onto_omega_g(omega, x0);
    let mut grad = vec![0.0; n];
    let mut trial = vec![0.0; n];

    for k in 0..config.max_iter {
        for i in 0..n {
            grad[i] = phi[i].deriv(x[i]);
        }
        // d = P(x − β∇φ) − x, stored via the projected point in `trial`.
        let mut step_inf = 0.0f64;
        let mut x_inf = 0.0f64;
        for i in 0..n {
            trial[i] = (x[i] - config.beta * grad[i]).clamp(omega.lo[i], omega.hi[i]);
            step_inf = step_inf.max((trial[i] - x[i]).abs());
            x_inf = x_inf.max(x[i].abs());
        }
        if step_inf <= config.eps * (1.0 + x_inf) {
            return PgResult {
                x,
                iterations: k,
                converged: true,
            };
        }

        let slope = pairwise_sum_by(n, |i| grad[i] * (trial[i] - x[i]));
        debug_assert!(
            slope <= 0.0,
            "projected gradient step is not a descent direction (slope {slope})"
        );
        let phi_x = pairwise_sum_by(n, |i| phi[i].value(x[i]));

        // Backtrack γ = 1, ½, ¼, … for sufficient decrease. A step must also
        // beat the float noise floor of the objective: accepting one-ulp
        // "decreases" lets the iterate jitter at the numerical optimum for
        // the whole iteration budget without ever meeting the step tolerance.
        // Real steps away from the optimum clear the floor easily (their full
        // step decreases by about |slope|, many orders above it).
        let decrease_floor = 1e-14 * (1.0 + phi_x.abs());
        let mut gamma = 1.0f64;
        let mut accepted = false;
        for _ in 0..=60 {
            let phi_trial = pairwise_sum_by(n, |i| phi[i].value(x[i] + gamma * (trial[i] - x[i])));
            if phi_trial <= phi_x + config.sigma * gamma * slope
                && phi_x - phi_trial >= decrease_floor
            {
                accepted = true;
                break;
            }
            gamma *= 0.5;
        }
        if !accepted {
            return PgResult {
                x,
                iterations: k,
                converged: slope.abs() <= 1e-12 * (1.0 + phi_x.abs()),
            };
        }
        if gamma == 1.0 {
            std::mem::swap(&mut x, &mut trial);
        } else {
            for i in 0..n {
                x[i] += gamma * (trial[i] - x[i]);
            }
        }
    }

    PgResult {
        x,
        iterations: config.max_iter,
        converged: false,
    }
}
