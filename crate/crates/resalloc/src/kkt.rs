//! Optimality certification and independent solution oracles.
//!
//! [`kkt_check`] scores a candidate `(x, λ)` against the first-order
//! optimality system for box-constrained separable problems:
//!
//! * stationarity: `φᵢ′(xᵢ) + λ·gᵢ′(xᵢ) − vᵢ + wᵢ = 0` with recovered bound
//!   multipliers `vᵢ, wᵢ ≥ 0`,
//! * primal feasibility: `g(x) ≤ b` (or `= b`) and `l ≤ x ≤ u`,
//! * complementary slackness: `λ·(g(x) − b) = 0` and `vᵢ(xᵢ−lᵢ) = wᵢ(uᵢ−xᵢ) = 0`,
//! * multiplier sign: `λ ≥ 0` for inequality problems.
//!
//! The bound multipliers are recovered rather than supplied: at an active
//! bound the stationarity equation has a sign-constrained solution, so the
//! residual is only the part that the sign constraint cannot absorb.
//!
//! The two oracles solve instances by means that share nothing with the
//! production solvers' multiplier updates, for use as ground truth in tests:
//! [`oracle_dual_search`] climbs the concave dual function with golden-section
//! search, and [`oracle_grid`] enumerates feasible points of tiny instances.

use serde::{Deserialize, Serialize};

use crate::instance::{ConstraintKind, ProblemInstance};
use crate::numeric::{bisect_root, pairwise_sum_by};
use crate::scalar::{argmin_g_box, argmin_phi_box, minimize_scalar};
use crate::term::ScalarTerm;

/// Relative half-width of the band in which a coordinate counts as sitting
/// on a box bound for multiplier recovery.
const BOUND_BAND: f64 = 1e-9;

/// Residuals of the first-order optimality system, all nonnegative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktReport {
    /// `max_i` of the stationarity residual after recovering vᵢ, wᵢ.
    pub stationarity: f64,
    /// Constraint violation: `max(0, g(x)−b)` for inequality, `|g(x)−b|` for
    /// equality.
    pub primal: f64,
    /// `|λ·(g(x)−b)|`.
    pub comp_slack: f64,
    /// Largest box-bound violation `max(lᵢ−xᵢ, xᵢ−uᵢ, 0)`.
    #[serde(rename = "box")]
    pub box_violation: f64,
    /// `max(0, −λ)` for inequality problems (0 for equality, where λ is
    /// unrestricted in sign).
    pub mult_sign: f64,
    /// Largest recovered lower-bound multiplier.
    pub v_max: f64,
    /// Largest recovered upper-bound multiplier.
    pub w_max: f64,
    /// Residual scale `max(1, |b|, ‖∇φ(x)‖∞)`; the pass threshold is
    /// `tol·(1+scale)`.
    pub scale: f64,
    /// Whether every residual fell within `tol·(1+scale)`.
    pub pass: bool,
}

/// Scores `(x, λ)` against the optimality system at tolerance `tol`.
///
/// Pure report: never fails, never mutates. A point far from optimal simply
/// comes back with large residuals and `pass == false`.
///
/// # Panics
///
/// If `x.len()` differs from the instance dimension.
pub fn kkt_check(instance: &ProblemInstance, x: &[f64], lambda: f64, tol: f64) -> KktReport {
    let n = instance.n();
    assert_eq!(x.len(), n, "point has wrong dimension");
    let b = instance.b();
    let (l, u) = (instance.l(), instance.u());
    let (phi, g) = (instance.phi_terms(), instance.g_terms());

    let mut stationarity = 0.0f64;
    let mut box_violation = 0.0f64;
    let mut v_max = 0.0f64;
    let mut w_max = 0.0f64;
    let mut grad_phi_inf = 0.0f64;
    for i in 0..n {
        let dphi = phi[i].deriv(x[i]);
        grad_phi_inf = grad_phi_inf.max(dphi.abs());
        let s = dphi + lambda * g[i].deriv(x[i]);
        let at_l = (x[i] - l[i]).abs() <= BOUND_BAND * (1.0 + l[i].abs());
        let at_u = (x[i] - u[i]).abs() <= BOUND_BAND * (1.0 + u[i].abs());
        let resid = match (at_l, at_u) {
            // Degenerate box (l = u): either multiplier may absorb s.
            (true, true) => {
                v_max = v_max.max(s.max(0.0));
                w_max = w_max.max((-s).max(0.0));
                0.0
            }
            // At the lower bound v = max(0, s) absorbs nonnegative s; what
            // remains is the part with the forbidden sign.
            (true, false) => {
                v_max = v_max.max(s.max(0.0));
                (-s).max(0.0)
            }
            (false, true) => {
                w_max = w_max.max((-s).max(0.0));
                s.max(0.0)
            }
            (false, false) => s.abs(),
        };
        stationarity = stationarity.max(resid);
        box_violation = box_violation.max(l[i] - x[i]).max(x[i] - u[i]);
    }
    box_violation = box_violation.max(0.0);

    let g_val = instance.g_unchecked(x);
    let primal = match instance.constraint() {
        ConstraintKind::Inequality => (g_val - b).max(0.0),
        ConstraintKind::LinearEquality => (g_val - b).abs(),
    };
    let comp_slack = (lambda * (g_val - b)).abs();
    let mult_sign = match instance.constraint() {
        ConstraintKind::Inequality => (-lambda).max(0.0),
        ConstraintKind::LinearEquality => 0.0,
    };

    let scale = 1.0f64.max(b.abs()).max(grad_phi_inf);
    let threshold = tol * (1.0 + scale);
    let pass = stationarity <= threshold
        && primal <= threshold
        && comp_slack <= threshold
        && box_violation <= threshold
        && mult_sign <= threshold;

    KktReport {
        stationarity,
        primal,
        comp_slack,
        box_violation,
        mult_sign,
        v_max,
        w_max,
        scale,
        pass,
    }
}

/// Solves an instance by maximizing the concave dual function
/// `L(λ) = min_x [φ(x) + λ(g(x) − b)]` with golden-section search over a
/// sign-change bracket, then recovering a feasible primal point from the
/// straddling minimizers. Structurally independent of the production
/// solvers' secant/bisection multiplier updates.
///
/// Returns `(x, λ)`. `tol` is the λ-bracket width at which the search stops.
///
/// # Panics
///
/// If the instance is infeasible (the oracle has no infeasibility protocol;
/// callers check feasibility first).
pub fn oracle_dual_search(instance: &ProblemInstance, tol: f64) -> (Vec<f64>, f64) {
    let b = instance.b();
    let mut track = DualTracker {
        instance,
        plus: None,
        minus: None,
        closest: None,
    };

    let (mut lo, mut hi) = match instance.constraint() {
        ConstraintKind::Inequality => {
            let x_phi = argmin_phi_box(instance);
            let g_phi = instance.g_unchecked(&x_phi);
            if g_phi <= b {
                // The unconstrained box minimizer is feasible: λ* = 0.
                return (x_phi, 0.0);
            }
            let (x_g, _) = argmin_g_box(instance);
            assert!(
                instance.g_unchecked(&x_g) <= b,
                "oracle_dual_search requires a feasible instance"
            );
            track.observe(0.0, x_phi, g_phi);
            // Expand until the minimizer crosses to the feasible side
            // (g(x(λ)) is nonincreasing in λ because the dual is concave).
            let mut hi = 1.0;
            while track.eval(hi).1 > b && hi < 1e15 {
                hi *= 2.0;
            }
            (0.0, hi)
        }
        ConstraintKind::LinearEquality => {
            let g_l = instance.g_unchecked(instance.l());
            let g_u = instance.g_unchecked(instance.u());
            assert!(
                g_l <= b && b <= g_u,
                "oracle_dual_search requires a feasible instance"
            );
            let mut lo = -1.0;
            while track.eval(lo).1 < b && lo > -1e15 {
                lo *= 2.0;
            }
            let mut hi = 1.0;
            while track.eval(hi).1 > b && hi < 1e15 {
                hi *= 2.0;
            }
            (lo, hi)
        }
    };

    // Stage 1: golden-section maximization of the concave dual on [lo, hi],
    // run only to a coarse width. Values near the (locally quadratic) top
    // differ by less than float noise once the bracket is ~√ε wide, so a
    // value-based search cannot localize the maximizer further than that.
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let scale = |lo: f64, hi: f64| 1.0f64.max(lo.abs()).max(hi.abs());
    let coarse = tol.max(1e-5);
    let mut a = hi - INV_PHI * (hi - lo);
    let mut c = lo + INV_PHI * (hi - lo);
    let mut fa = track.eval(a).0;
    let mut fc = track.eval(c).0;
    while hi - lo > coarse * scale(lo, hi) {
        if fa >= fc {
            hi = c;
            c = a;
            fc = fa;
            a = hi - INV_PHI * (hi - lo);
            fa = track.eval(a).0;
        } else {
            lo = a;
            a = c;
            fa = fc;
            c = lo + INV_PHI * (hi - lo);
            fc = track.eval(c).0;
        }
    }

    // Stage 2: polish with sign bisection on the dual derivative
    // L′(λ) = g(x(λ)) − b, which is nonincreasing; its sign change is the
    // maximizer (golden keeps it inside its bracket) and bisection localizes
    // it to any width first-order information allows.
    for _ in 0..200 {
        if hi - lo <= tol * scale(lo, hi) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let (_, g_mid) = track.eval(mid);
        if g_mid > b {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    track.finish(b, 0.5 * (lo + hi))
}

/// Evaluation bookkeeping for the dual search: remembers the tightest
/// minimizers on either side of the resource level and the best dual value.
struct DualTracker<'a> {
    instance: &'a ProblemInstance,
    /// (λ, x, g(x)) with g(x) > b, largest λ seen.
    plus: Option<(f64, Vec<f64>, f64)>,
    /// (λ, x, g(x)) with g(x) < b, smallest λ seen.
    minus: Option<(f64, Vec<f64>, f64)>,
    /// (|g−b|, x, λ) closest to exact feasibility.
    closest: Option<(f64, Vec<f64>, f64)>,
}

impl DualTracker<'_> {
    /// Minimizes the Lagrangian at λ; returns (L(λ), g(x(λ))).
    fn eval(&mut self, lambda: f64) -> (f64, f64) {
        let inst = self.instance;
        let (l, u) = (inst.l(), inst.u());
        let x: Vec<f64> = inst
            .phi_terms()
            .iter()
            .zip(inst.g_terms())
            .enumerate()
            .map(|(i, (p, g))| minimize_scalar(p, g, lambda, l[i], u[i]).x_star)
            .collect();
        let g_val = inst.g_unchecked(&x);
        let dual = inst.phi_unchecked(&x) + lambda * (g_val - inst.b());
        self.observe(lambda, x, g_val);
        (dual, g_val)
    }

    fn observe(&mut self, lambda: f64, x: Vec<f64>, g_val: f64) {
        let b = self.instance.b();
        let gap = (g_val - b).abs();
        if self.closest.as_ref().is_none_or(|(d, _, _)| gap < *d) {
            self.closest = Some((gap, x.clone(), lambda));
        }
        if g_val > b {
            if self.plus.as_ref().is_none_or(|(lam, _, _)| lambda > *lam) {
                self.plus = Some((lambda, x, g_val));
            }
        } else if g_val < b && self.minus.as_ref().is_none_or(|(lam, _, _)| lambda < *lam) {
            self.minus = Some((lambda, x, g_val));
        }
    }

    /// Recovers the primal point: the resource-level crossing of the segment
    /// between the tightest infeasible/feasible minimizers, or the single
    /// closest point when only one side was ever observed.
    fn finish(self, b: f64, lambda: f64) -> (Vec<f64>, f64) {
        match (&self.plus, &self.minus) {
            (Some((_, xp, _)), Some((_, xm, _))) => {
                let inst = self.instance;
                let n = inst.n();
                let g_at = |t: f64| {
                    pairwise_sum_by(n, |i| {
                        inst.g_terms()[i].value(t * xp[i] + (1.0 - t) * xm[i])
                    }) - b
                };
                let t = bisect_root(g_at, 0.0, 1.0, 1e-15, 200);
                let x = (0..n).map(|i| t * xp[i] + (1.0 - t) * xm[i]).collect();
                (x, lambda)
            }
            _ => {
                let (_, x, _) = self
                    .closest
                    .expect("dual search evaluated at least one multiplier");
                (x, lambda)
            }
        }
    }
}

/// Enumerates feasible points of an instance with `n ≤ 3` and returns the
/// objective minimizer, or `None` when the feasible set is empty.
///
/// The first `n−1` coordinates run over the grid `{lᵢ + k·step} ∪ {uᵢ}`;
/// the last coordinate is resolved exactly from the constraint — for
/// equality by solving the linear equation, for inequality by minimizing
/// φ over the interval the remaining budget allows. Resolving one
/// coordinate exactly keeps the enumeration tractable at fine steps and
/// loses no accuracy (it is exact where the plain full grid would be off
/// by one step).
///
/// Equality instances get extra *feasibility-edge* candidates beyond the
/// uniform grid: the head values that pin some trailing coordinate exactly
/// at a box bound. An optimum with a pinned coordinate sits between grid
/// points, and without the edge candidates the oracle's error there would
/// be linear in `step` rather than quadratic.
///
/// # Panics
///
/// If `n > 3` or `step ≤ 0`.
pub fn oracle_grid(instance: &ProblemInstance, step: f64) -> Option<Vec<f64>> {
    let n = instance.n();
    assert!(n <= 3, "grid oracle is for n <= 3 (got n = {n})");
    assert!(step > 0.0, "step must be positive");
    let (l, u) = (instance.l(), instance.u());
    let b = instance.b();
    let equality = instance.constraint() == ConstraintKind::LinearEquality;

    let grid = |i: usize| -> Vec<f64> {
        let k = ((u[i] - l[i]) / step).floor() as usize;
        let mut points: Vec<f64> = (0..=k).map(|j| l[i] + j as f64 * step).collect();
        if *points.last().unwrap() < u[i] {
            points.push(u[i]);
        }
        points
    };
    // Linear coefficient of an equality constraint's i-th term.
    let lin_a = |i: usize| -> f64 {
        match instance.g_terms()[i] {
            ScalarTerm::LinConstraint { a } => a,
            _ => unreachable!("equality constraints are linear"),
        }
    };
    // Admits a candidate value into coordinate i's box, tolerating the
    // rounding of the back-solved edge values.
    let admit = |v: f64, i: usize| -> Option<f64> {
        let slack = 1e-12 * (1.0 + l[i].abs().max(u[i].abs()));
        (v >= l[i] - slack && v <= u[i] + slack).then(|| v.clamp(l[i], u[i]))
    };

    let last = n - 1;
    let mut best: Option<(f64, Vec<f64>)> = None;
    // Resolves the last coordinate for a fixed head and records the point.
    let mut resolve = |head: &[f64]| {
        let partial_g: f64 = head
            .iter()
            .enumerate()
            .map(|(i, &xi)| instance.g_terms()[i].value(xi))
            .sum();
        let budget = b - partial_g;
        let x_last = if equality {
            match admit(budget / lin_a(last), last) {
                Some(v) => v,
                None => return,
            }
        } else {
            // The sublevel set {x : g_last(x) ≤ budget} ∩ [l, u] is an
            // interval; minimize φ_last over it in closed form.
            match sublevel_interval(&instance.g_terms()[last], budget, l[last], u[last]) {
                Some((lo, hi)) => {
                    minimize_scalar(
                        &instance.phi_terms()[last],
                        &instance.g_terms()[last],
                        0.0,
                        lo,
                        hi,
                    )
                    .x_star
                }
                None => return,
            }
        };
        let mut x = head.to_vec();
        x.push(x_last);
        let value = instance.phi_unchecked(&x);
        if best.as_ref().is_none_or(|(v, _)| value < *v) {
            best = Some((value, x));
        }
    };

    match n {
        1 => resolve(&[]),
        2 => {
            let mut c0 = grid(0);
            if equality {
                // Heads that pin x₁ exactly at a bound.
                for q in [l[1], u[1]] {
                    if let Some(v) = admit((b - lin_a(1) * q) / lin_a(0), 0) {
                        c0.push(v);
                    }
                }
            }
            for &x0 in &c0 {
                resolve(&[x0]);
            }
        }
        3 => {
            let mut c0 = grid(0);
            if equality {
                // Heads that pin both x₁ and x₂ at bounds (feasible vertices).
                for p in [l[1], u[1]] {
                    for q in [l[2], u[2]] {
                        if let Some(v) = admit((b - lin_a(1) * p - lin_a(2) * q) / lin_a(0), 0) {
                            c0.push(v);
                        }
                    }
                }
            }
            let c1 = grid(1);
            for &x0 in &c0 {
                for &x1 in &c1 {
                    resolve(&[x0, x1]);
                }
                if equality {
                    // Given x₀, the x₁ values that pin x₂ exactly at a bound.
                    for q in [l[2], u[2]] {
                        if let Some(v) = admit((b - lin_a(0) * x0 - lin_a(2) * q) / lin_a(1), 1) {
                            resolve(&[x0, v]);
                        }
                    }
                }
            }
        }
        _ => unreachable!("asserted n <= 3"),
    }
    best.map(|(_, x)| x)
}

/// Intersection of `{x : g(x) ≤ budget}` with `[l, u]` for a catalog
/// constraint term, or `None` when empty.
fn sublevel_interval(g: &ScalarTerm, budget: f64, l: f64, u: f64) -> Option<(f64, f64)> {
    let (lo, hi) = match *g {
        ScalarTerm::LinConstraint { a } => {
            let bound = budget / a;
            if a > 0.0 {
                (f64::NEG_INFINITY, bound)
            } else {
                (bound, f64::INFINITY)
            }
        }
        ScalarTerm::QuadConstraint { a, z } => {
            // ½ax² − zx ≤ budget ⇔ x ∈ [(z − √D)/a, (z + √D)/a], D = z² + 2a·budget.
            let disc = z * z + 2.0 * a * budget;
            if disc < 0.0 {
                return None;
            }
            let root = disc.sqrt();
            ((z - root) / a, (z + root) / a)
        }
        _ => unreachable!("constraint term validated at construction"),
    };
    let lo = lo.max(l);
    let hi = hi.min(u);
    if lo <= hi {
        Some((lo, hi))
    } else {
        None
    }
}
