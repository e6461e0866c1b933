//! The one-dimensional subproblem: `min φᵢ(x) + λ·gᵢ(x)` over `[l, u]`.
//!
//! Minimizing the Lagrangian of a separable problem decomposes into `n`
//! independent scalar minimizations of this form. For λ ≥ 0 (or any λ with a
//! linear gᵢ) the integrand is convex, so the minimizer is characterized by
//! the sign of the nondecreasing derivative `h(x) = φᵢ′(x) + λ·gᵢ′(x)`:
//!
//! * `h(l) ≥ 0` → the minimum sits at the lower bound,
//! * `h(u) ≤ 0` → at the upper bound,
//! * otherwise → at the interior root of `h`.
//!
//! Every catalog pairing with a linear or quadratic constraint term has a
//! closed-form root; the one exception (`NegEntropy`, whose derivative mixes
//! a logarithm with a rational term) and any non-catalog pairing fall back to
//! bracketed Newton iteration on `h`.

use crate::instance::ProblemInstance;
use crate::numeric::{newton_bracketed, pairwise_sum_by};
use crate::term::ScalarTerm;

/// Where the scalar minimizer landed relative to the box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtBound {
    Lower,
    Upper,
    Interior,
}

/// Result of a scalar minimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarSolveResult {
    /// The minimizer, always inside `[l, u]`.
    pub x_star: f64,
    /// Boundary classification: `Lower`/`Upper` when the derivative does not
    /// vanish inside the box, `Interior` otherwise.
    pub at_bound: AtBound,
    /// Populated when the minimizer set is a nondegenerate interval (the
    /// leftmost minimizer is then returned in `x_star`). Every catalog term
    /// is strictly convex on its validated box, so catalog problems always
    /// report `None`; the field exists so callers can handle ties without
    /// re-deriving them.
    pub flat_interval: Option<(f64, f64)>,
}

impl ScalarSolveResult {
    fn lower(l: f64) -> Self {
        ScalarSolveResult {
            x_star: l,
            at_bound: AtBound::Lower,
            flat_interval: None,
        }
    }

    fn upper(u: f64) -> Self {
        ScalarSolveResult {
            x_star: u,
            at_bound: AtBound::Upper,
            flat_interval: None,
        }
    }

    fn from_candidate(x: f64, l: f64, u: f64) -> Self {
        if x <= l {
            Self::lower(l)
        } else if x >= u {
            Self::upper(u)
        } else {
            ScalarSolveResult {
                x_star: x,
                at_bound: AtBound::Interior,
                flat_interval: None,
            }
        }
    }
}

/// Root tolerance used for interior derivative roots: absolute accuracy in x,
/// scaled to the box so wide boxes do not demand sub-ulp bisection.
pub(crate) fn root_tol(l: f64, u: f64) -> f64 {
    1e-12 * 1.0f64.max(l.abs()).max(u.abs())
}

const ROOT_MAX_ITER: u32 = 200;

/// Minimizes `φ(x) + λ·g(x)` over `[l, u]` for one coordinate.
///
/// Closed forms cover the catalog pairings:
///
/// * `QuadLin` + linear: `x = (c − λa)/d`
/// * `QuadLin` + quadratic: `x = (c + λz)/(d + λa)`
/// * `Holding` + linear: `x = √(k/(c + λa))` when `c + λa > 0`, else `u`
/// * `Recip` + linear: `x = √(c/(λa))` when `λa > 0`, else `u`
/// * `ExpSearch` + linear: `x = ln(mc/(λa))/c` when `λa > 0`, else `u`
///
/// all clipped to the box. `NegEntropy` and non-catalog pairings solve
/// `h(x) = 0` numerically (bracketed Newton, tolerance
/// `1e−12·max(1, |l|, |u|)`, at most 200 evaluations).
///
/// # Panics
///
/// If `λ < 0` and `g` is nonlinear — the subproblem would be non-convex, and
/// no caller may request it — or if `l > u`.
pub fn minimize_scalar(
    phi: &ScalarTerm,
    g: &ScalarTerm,
    lambda: f64,
    l: f64,
    u: f64,
) -> ScalarSolveResult {
    assert!(l <= u, "empty box: l={l} > u={u}");
    assert!(
        lambda >= 0.0 || g.is_linear(),
        "negative multiplier with a nonlinear constraint term makes the subproblem non-convex"
    );
    match (*phi, *g) {
        (ScalarTerm::QuadLin { d, c }, ScalarTerm::LinConstraint { a }) => {
            ScalarSolveResult::from_candidate((c - lambda * a) / d, l, u)
        }
        (ScalarTerm::QuadLin { d, c }, ScalarTerm::QuadConstraint { a, z }) => {
            ScalarSolveResult::from_candidate((c + lambda * z) / (d + lambda * a), l, u)
        }
        (ScalarTerm::Holding { c, k }, ScalarTerm::LinConstraint { a }) => {
            let s = c + lambda * a;
            if s > 0.0 {
                ScalarSolveResult::from_candidate((k / s).sqrt(), l, u)
            } else {
                // h(x) = s − k/x² < 0 everywhere: the sum keeps decreasing.
                ScalarSolveResult::upper(u)
            }
        }
        (ScalarTerm::Recip { c }, ScalarTerm::LinConstraint { a }) => {
            let p = lambda * a;
            if p > 0.0 {
                ScalarSolveResult::from_candidate((c / p).sqrt(), l, u)
            } else {
                ScalarSolveResult::upper(u)
            }
        }
        (ScalarTerm::ExpSearch { m, c }, ScalarTerm::LinConstraint { a }) => {
            let p = lambda * a;
            if p > 0.0 {
                ScalarSolveResult::from_candidate((m * c / p).ln() / c, l, u)
            } else {
                ScalarSolveResult::upper(u)
            }
        }
        _ => minimize_by_root(phi, g, lambda, l, u),
    }
}

/// Generic path: sign checks at the box ends, then bracketed Newton on `h`.
fn minimize_by_root(
    phi: &ScalarTerm,
    g: &ScalarTerm,
    lambda: f64,
    l: f64,
    u: f64,
) -> ScalarSolveResult {
    let h = |x: f64| phi.deriv(x) + lambda * g.deriv(x);
    if h(l) >= 0.0 {
        return ScalarSolveResult::lower(l);
    }
    if h(u) <= 0.0 {
        return ScalarSolveResult::upper(u);
    }
    let x = newton_bracketed(
        |x| {
            (
                phi.deriv(x) + lambda * g.deriv(x),
                phi.deriv2(x) + lambda * g.deriv2(x),
            )
        },
        l,
        u,
        root_tol(l, u),
        ROOT_MAX_ITER,
    );
    ScalarSolveResult {
        x_star: x,
        at_bound: AtBound::Interior,
        flat_interval: None,
    }
}

/// Coordinatewise box-constrained minimizer of φ: solves every scalar
/// subproblem at λ = 0.
pub fn argmin_phi_box(instance: &ProblemInstance) -> Vec<f64> {
    let (l, u) = (instance.l(), instance.u());
    instance
        .phi_terms()
        .iter()
        .zip(instance.g_terms())
        .enumerate()
        .map(|(i, (phi, g))| minimize_scalar(phi, g, 0.0, l[i], u[i]).x_star)
        .collect()
}

/// Coordinatewise box-constrained minimizer of g, plus `‖∇g‖₂` at that point.
///
/// Linear terms are minimized at `l` (positive coefficient) or `u` (negative);
/// quadratic terms at their stationary point `z/a` clipped to the box. The
/// gradient norm distinguishes the degenerate case where the constraint
/// surface is flat at its minimum.
pub fn argmin_g_box(instance: &ProblemInstance) -> (Vec<f64>, f64) {
    let (l, u) = (instance.l(), instance.u());
    let x: Vec<f64> = instance
        .g_terms()
        .iter()
        .enumerate()
        .map(|(i, g)| match *g {
            ScalarTerm::LinConstraint { a } => {
                if a > 0.0 {
                    l[i]
                } else {
                    u[i]
                }
            }
            ScalarTerm::QuadConstraint { a, z } => (z / a).clamp(l[i], u[i]),
            // Non-catalog constraint terms are rejected at construction.
            _ => unreachable!("constraint term validated at construction"),
        })
        .collect();
    let sq_norm = pairwise_sum_by(instance.n(), |i| {
        let d = instance.g_terms()[i].deriv(x[i]);
        d * d
    });
    (x, sq_norm.sqrt())
}
