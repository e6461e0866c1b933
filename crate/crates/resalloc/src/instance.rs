//! Problem instances: separable objective + one resource constraint + box.
//!
//! A [`ProblemInstance`] bundles `n` objective terms φᵢ, `n` constraint terms
//! gᵢ, box bounds `l ≤ x ≤ u`, and a right-hand side `b`, representing either
//!
//! ```text
//! min Σ φᵢ(xᵢ)   s.t.  Σ gᵢ(xᵢ) ≤ b,  l ≤ x ≤ u        (inequality)
//! min Σ φᵢ(xᵢ)   s.t.  Σ aᵢxᵢ   = b,  l ≤ x ≤ u        (linear equality)
//! ```
//!
//! Instances are validated once at construction and immutable afterwards, so
//! they are safe to share across threads. Equality instances are canonicalized
//! at construction: if every linear coefficient aᵢ is negative, the constraint
//! is multiplied by −1 (negating the aᵢ and b) so that aᵢ > 0 always holds
//! internally — the feasible set is unchanged.
//!
//! # File format
//!
//! [`load_instance`]/[`save_instance`] read and write a JSON object
//!
//! ```json
//! {
//!   "n": 2,
//!   "constraint": "inequality",
//!   "b": 5.0,
//!   "l": [0.0, 0.0],
//!   "u": [4.0, 4.0],
//!   "phi": [{"kind": "QuadLin", "d": 1.0, "c": 2.0}, ...],
//!   "g":   [{"kind": "LinConstraint", "a": 1.0}, ...]
//! }
//! ```
//!
//! `constraint` is `"inequality"` or `"equality"`; term parameter keys are the
//! field names listed in [`crate::term`].

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::pairwise_sum_by;
use crate::term::{ScalarTerm, TermIssue, TermRole};

/// Which kind of resource constraint the instance carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConstraintKind {
    #[serde(rename = "inequality")]
    Inequality,
    #[serde(rename = "equality")]
    LinearEquality,
}

/// How a solve ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// Solved with a certified multiplier.
    Optimal,
    /// The constraint cannot be met inside the box: `min g > b` for
    /// inequality problems, `b` outside `[g(l), g(u)]` for equality problems.
    Infeasible,
    /// The degenerate boundary case `min g = b` with a flat constraint
    /// gradient, solved by projected gradient descent over the minimizer set
    /// of g (no meaningful constraint multiplier exists).
    BoundaryDegenerate,
    /// An iteration cap or deadline was hit; the returned point is feasible
    /// but not certified optimal.
    MaxIterFallback,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::BoundaryDegenerate => "boundary_degenerate",
            SolveStatus::MaxIterFallback => "max_iter_fallback",
        })
    }
}

/// Why an instance failed validation.
#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("instance must have at least one coordinate")]
    Empty,
    #[error("{field} has length {got}, expected {expected}")]
    LengthMismatch {
        field: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("declared n={declared} does not match vector length {actual}")]
    DeclaredN { declared: usize, actual: usize },
    #[error("coordinate {coord}: lower bound {l} exceeds upper bound {u}")]
    BadBounds { coord: usize, l: f64, u: f64 },
    #[error("coordinate {coord}: bound is not finite (l={l}, u={u})")]
    NonFiniteBounds { coord: usize, l: f64, u: f64 },
    #[error("right-hand side b={b} is not finite")]
    NonFiniteRhs { b: f64 },
    #[error("coordinate {coord} ({role:?} term): {issue}")]
    Term {
        coord: usize,
        role: TermRole,
        issue: TermIssue,
    },
    #[error("coordinate {coord}: equality constraints must be linear, got {family}")]
    EqualityNeedsLinear { coord: usize, family: &'static str },
    #[error("equality constraint coefficients must all share one sign")]
    MixedConstraintSigns,
}

/// Evaluation failed because a coordinate fell outside a term's domain.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("coordinate {coord}: x={x} is outside the domain of {family} (requires x > {min})")]
pub struct EvalError {
    pub coord: usize,
    pub x: f64,
    pub family: &'static str,
    pub min: f64,
}

/// A validated, immutable separable problem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemInstance {
    n: usize,
    constraint: ConstraintKind,
    b: f64,
    l: Vec<f64>,
    u: Vec<f64>,
    phi: Vec<ScalarTerm>,
    g: Vec<ScalarTerm>,
}

impl ProblemInstance {
    /// Validates and canonicalizes a problem.
    ///
    /// Checks, per coordinate: `l ≤ u`, finite bounds, objective/constraint
    /// role, parameter signs, and that the term is convex and defined on
    /// `[lᵢ, uᵢ]`. Equality instances additionally require every gᵢ to be
    /// `LinConstraint` with one shared coefficient sign; an all-negative
    /// constraint is normalized to positive coefficients by negating the
    /// aᵢ and b together.
    pub fn new(
        constraint: ConstraintKind,
        b: f64,
        l: Vec<f64>,
        u: Vec<f64>,
        phi: Vec<ScalarTerm>,
        mut g: Vec<ScalarTerm>,
    ) -> Result<Self, InstanceError> {
        let n = phi.len();
        if n == 0 {
            return Err(InstanceError::Empty);
        }
        for (field, len) in [("g", g.len()), ("l", l.len()), ("u", u.len())] {
            if len != n {
                return Err(InstanceError::LengthMismatch {
                    field,
                    expected: n,
                    got: len,
                });
            }
        }
        if !b.is_finite() {
            return Err(InstanceError::NonFiniteRhs { b });
        }
        for i in 0..n {
            if !l[i].is_finite() || !u[i].is_finite() {
                return Err(InstanceError::NonFiniteBounds {
                    coord: i,
                    l: l[i],
                    u: u[i],
                });
            }
            if l[i] > u[i] {
                return Err(InstanceError::BadBounds {
                    coord: i,
                    l: l[i],
                    u: u[i],
                });
            }
            phi[i]
                .validate(TermRole::Objective, l[i], u[i])
                .map_err(|issue| InstanceError::Term {
                    coord: i,
                    role: TermRole::Objective,
                    issue,
                })?;
            g[i].validate(TermRole::Constraint, l[i], u[i])
                .map_err(|issue| InstanceError::Term {
                    coord: i,
                    role: TermRole::Constraint,
                    issue,
                })?;
        }

        let mut b = b;
        if constraint == ConstraintKind::LinearEquality {
            let mut coeffs = Vec::with_capacity(n);
            for (i, term) in g.iter().enumerate() {
                match term {
                    ScalarTerm::LinConstraint { a } => coeffs.push(*a),
                    other => {
                        return Err(InstanceError::EqualityNeedsLinear {
                            coord: i,
                            family: other.family(),
                        })
                    }
                }
            }
            let all_pos = coeffs.iter().all(|&a| a > 0.0);
            let all_neg = coeffs.iter().all(|&a| a < 0.0);
            if !all_pos && !all_neg {
                return Err(InstanceError::MixedConstraintSigns);
            }
            if all_neg {
                // Multiply the constraint by −1: same feasible set, aᵢ > 0.
                for term in &mut g {
                    if let ScalarTerm::LinConstraint { a } = term {
                        *a = -*a;
                    }
                }
                b = -b;
            }
        }

        Ok(ProblemInstance {
            n,
            constraint,
            b,
            l,
            u,
            phi,
            g,
        })
    }

    /// Number of coordinates.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Right-hand side of the resource constraint.
    pub fn b(&self) -> f64 {
        self.b
    }

    /// Constraint kind.
    pub fn constraint(&self) -> ConstraintKind {
        self.constraint
    }

    /// Lower box bounds.
    pub fn l(&self) -> &[f64] {
        &self.l
    }

    /// Upper box bounds.
    pub fn u(&self) -> &[f64] {
        &self.u
    }

    /// Objective terms φᵢ.
    pub fn phi_terms(&self) -> &[ScalarTerm] {
        &self.phi
    }

    /// Constraint terms gᵢ.
    pub fn g_terms(&self) -> &[ScalarTerm] {
        &self.g
    }

    /// True when every constraint term is linear (always true for equality
    /// instances).
    pub fn g_is_linear(&self) -> bool {
        self.g.iter().all(ScalarTerm::is_linear)
    }

    /// Σ φᵢ(xᵢ), checking term domains. `x` may violate the box bounds — the
    /// evaluation is a pointwise sum — but must stay inside each term's
    /// domain.
    ///
    /// # Panics
    ///
    /// If `x.len() != n`.
    pub fn eval_phi(&self, x: &[f64]) -> Result<f64, EvalError> {
        self.check_domain(&self.phi, x)?;
        Ok(self.phi_unchecked(x))
    }

    /// Σ gᵢ(xᵢ), with the same contract as [`ProblemInstance::eval_phi`].
    pub fn eval_g(&self, x: &[f64]) -> Result<f64, EvalError> {
        self.check_domain(&self.g, x)?;
        Ok(self.g_unchecked(x))
    }

    fn check_domain(&self, terms: &[ScalarTerm], x: &[f64]) -> Result<(), EvalError> {
        assert_eq!(x.len(), self.n, "point has wrong dimension");
        for (i, (term, &xi)) in terms.iter().zip(x).enumerate() {
            if let Some(min) = term.domain_min() {
                if xi <= min {
                    return Err(EvalError {
                        coord: i,
                        x: xi,
                        family: term.family(),
                        min,
                    });
                }
            }
        }
        Ok(())
    }

    /// Σ φᵢ(xᵢ) without domain checks (callers guarantee validity, e.g. x in
    /// the box). Uses pairwise summation.
    pub(crate) fn phi_unchecked(&self, x: &[f64]) -> f64 {
        pairwise_sum_by(self.n, |i| self.phi[i].value(x[i]))
    }

    /// Σ gᵢ(xᵢ) without domain checks.
    pub(crate) fn g_unchecked(&self, x: &[f64]) -> f64 {
        pairwise_sum_by(self.n, |i| self.g[i].value(x[i]))
    }
}

/// Mirror of the JSON schema, validated into [`ProblemInstance`] on load.
#[derive(Deserialize)]
struct RawInstance {
    n: usize,
    constraint: ConstraintKind,
    b: f64,
    l: Vec<f64>,
    u: Vec<f64>,
    phi: Vec<ScalarTerm>,
    g: Vec<ScalarTerm>,
}

impl TryFrom<RawInstance> for ProblemInstance {
    type Error = InstanceError;

    fn try_from(raw: RawInstance) -> Result<Self, InstanceError> {
        if raw.n != raw.phi.len() {
            return Err(InstanceError::DeclaredN {
                declared: raw.n,
                actual: raw.phi.len(),
            });
        }
        ProblemInstance::new(raw.constraint, raw.b, raw.l, raw.u, raw.phi, raw.g)
    }
}

impl<'de> Deserialize<'de> for ProblemInstance {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = RawInstance::deserialize(deserializer)?;
        ProblemInstance::try_from(raw).map_err(serde::de::Error::custom)
    }
}

/// Errors from reading or writing instance files.
#[derive(Debug, Error)]
pub enum FileError {
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Reads an instance from a JSON file, validating and canonicalizing it.
pub fn load_instance(path: impl AsRef<Path>) -> Result<ProblemInstance, FileError> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Writes an instance as pretty-printed JSON. Loading the file back yields
/// an identical instance (the canonical form round-trips exactly: floats are
/// emitted with shortest-round-trip formatting).
pub fn save_instance(instance: &ProblemInstance, path: impl AsRef<Path>) -> Result<(), FileError> {
    let mut text = serde_json::to_string_pretty(instance)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
