//! The per-coordinate term catalog.
//!
//! Every problem handled by this crate is separable: the objective is
//! `φ(x) = Σ φᵢ(xᵢ)` and the resource constraint is `g(x) = Σ gᵢ(xᵢ)`, where
//! each φᵢ and gᵢ comes from a small catalog of convex, continuously
//! differentiable scalar functions. [`ScalarTerm`] enumerates that catalog:
//!
//! | variant          | f(x)              | role       | domain       |
//! |------------------|-------------------|------------|--------------|
//! | `QuadLin`        | ½dx² − cx (d>0)   | objective  | ℝ            |
//! | `Holding`        | cx + k/x (c,k>0)  | objective  | x > 0        |
//! | `Recip`          | c/x (c>0)         | objective  | x > 0        |
//! | `ExpSearch`      | m(e^(−cx) − 1)    | objective  | ℝ            |
//! | `NegEntropy`     | x·ln(x/a − 1)     | objective  | x > a        |
//! | `QuadConstraint` | ½ax² − zx (a>0)   | constraint | ℝ            |
//! | `LinConstraint`  | ax (a≠0)          | constraint | ℝ            |
//!
//! `NegEntropy` is only convex for `x ≥ 2a` (its second derivative is
//! `(x−2a)/(x−a)²`), so instances must keep the lower box bound at or above
//! `2a`; [`ScalarTerm::validate`] enforces this together with the parameter
//! sign rules above.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One coordinate's objective or constraint term.
///
/// Serializes with a `kind` tag, e.g. `{"kind": "QuadLin", "d": 2.0, "c": 4.0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ScalarTerm {
    /// ½dx² − cx with d > 0.
    QuadLin { d: f64, c: f64 },
    /// cx + k/x with c, k > 0; defined for x > 0.
    Holding { c: f64, k: f64 },
    /// c/x with c > 0; defined for x > 0.
    Recip { c: f64 },
    /// m(e^(−cx) − 1) with m, c > 0.
    ExpSearch { m: f64, c: f64 },
    /// x·ln(x/a − 1) with a > 0; defined for x > a, convex for x ≥ 2a.
    NegEntropy { a: f64 },
    /// ½ax² − zx with a > 0 (constraint-side quadratic).
    QuadConstraint { a: f64, z: f64 },
    /// ax with a ≠ 0 (constraint-side linear).
    LinConstraint { a: f64 },
}

/// Whether a term plays the objective (φᵢ) or constraint (gᵢ) role.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TermRole {
    Objective,
    Constraint,
}

/// Why a term was rejected at construction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TermIssue {
    #[error("parameter {name}={value} violates {name} {requirement}")]
    BadParam {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },
    #[error("{family} is an {expected:?} term and cannot be used as {actual:?}")]
    WrongRole {
        family: &'static str,
        expected: TermRole,
        actual: TermRole,
    },
    #[error("lower bound {l} is outside the domain of {family} (requires l {requirement})")]
    DomainBound {
        family: &'static str,
        l: f64,
        requirement: String,
    },
}

impl ScalarTerm {
    /// The catalog family name (used in error messages and the `kind` tag).
    pub fn family(&self) -> &'static str {
        match self {
            ScalarTerm::QuadLin { .. } => "QuadLin",
            ScalarTerm::Holding { .. } => "Holding",
            ScalarTerm::Recip { .. } => "Recip",
            ScalarTerm::ExpSearch { .. } => "ExpSearch",
            ScalarTerm::NegEntropy { .. } => "NegEntropy",
            ScalarTerm::QuadConstraint { .. } => "QuadConstraint",
            ScalarTerm::LinConstraint { .. } => "LinConstraint",
        }
    }

    /// f(x). Out-of-domain inputs produce NaN/∞ (use [`ScalarTerm::domain_min`]
    /// to guard when the input is not already known to be valid).
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            ScalarTerm::QuadLin { d, c } => 0.5 * d * x * x - c * x,
            ScalarTerm::Holding { c, k } => c * x + k / x,
            ScalarTerm::Recip { c } => c / x,
            ScalarTerm::ExpSearch { m, c } => m * ((-c * x).exp() - 1.0),
            ScalarTerm::NegEntropy { a } => x * (x / a - 1.0).ln(),
            ScalarTerm::QuadConstraint { a, z } => 0.5 * a * x * x - z * x,
            ScalarTerm::LinConstraint { a } => a * x,
        }
    }

    /// f′(x).
    pub fn deriv(&self, x: f64) -> f64 {
        match *self {
            ScalarTerm::QuadLin { d, c } => d * x - c,
            ScalarTerm::Holding { c, k } => c - k / (x * x),
            ScalarTerm::Recip { c } => -c / (x * x),
            ScalarTerm::ExpSearch { m, c } => -m * c * (-c * x).exp(),
            ScalarTerm::NegEntropy { a } => (x / a - 1.0).ln() + x / (x - a),
            ScalarTerm::QuadConstraint { a, z } => a * x - z,
            ScalarTerm::LinConstraint { a } => a,
        }
    }

    /// f″(x). Nonnegative on the validated domain for every catalog family.
    pub fn deriv2(&self, x: f64) -> f64 {
        match *self {
            ScalarTerm::QuadLin { d, .. } => d,
            ScalarTerm::Holding { k, .. } => 2.0 * k / (x * x * x),
            ScalarTerm::Recip { c } => 2.0 * c / (x * x * x),
            ScalarTerm::ExpSearch { m, c } => m * c * c * (-c * x).exp(),
            ScalarTerm::NegEntropy { a } => {
                let t = x - a;
                (x - 2.0 * a) / (t * t)
            }
            ScalarTerm::QuadConstraint { a, .. } => a,
            ScalarTerm::LinConstraint { .. } => 0.0,
        }
    }

    /// Open lower limit of the term's domain, if it has one: evaluation is
    /// defined only for `x >` this value.
    pub fn domain_min(&self) -> Option<f64> {
        match *self {
            ScalarTerm::Holding { .. } | ScalarTerm::Recip { .. } => Some(0.0),
            ScalarTerm::NegEntropy { a } => Some(a),
            _ => None,
        }
    }

    /// The role this family is allowed to play.
    pub fn role(&self) -> TermRole {
        match self {
            ScalarTerm::QuadConstraint { .. } | ScalarTerm::LinConstraint { .. } => {
                TermRole::Constraint
            }
            _ => TermRole::Objective,
        }
    }

    /// True for `LinConstraint` (the only affine catalog member).
    pub fn is_linear(&self) -> bool {
        matches!(self, ScalarTerm::LinConstraint { .. })
    }

    /// Checks parameter signs, role, and that the term is convex and defined
    /// on the whole box `[l, u]`. The rules are family-exact (no sampling):
    /// each family's second derivative has a known sign pattern, so convexity
    /// reduces to a parameter/domain condition.
    pub fn validate(&self, role: TermRole, l: f64, _u: f64) -> Result<(), TermIssue> {
        if self.role() != role {
            return Err(TermIssue::WrongRole {
                family: self.family(),
                expected: self.role(),
                actual: role,
            });
        }
        let positive = |name: &'static str, value: f64| {
            if value.is_finite() && value > 0.0 {
                Ok(())
            } else {
                Err(TermIssue::BadParam {
                    name,
                    value,
                    requirement: "> 0 and finite",
                })
            }
        };
        let finite = |name: &'static str, value: f64| {
            if value.is_finite() {
                Ok(())
            } else {
                Err(TermIssue::BadParam {
                    name,
                    value,
                    requirement: "finite",
                })
            }
        };
        match *self {
            ScalarTerm::QuadLin { d, c } => {
                positive("d", d)?;
                finite("c", c)?;
            }
            ScalarTerm::Holding { c, k } => {
                positive("c", c)?;
                positive("k", k)?;
                if l <= 0.0 {
                    return Err(TermIssue::DomainBound {
                        family: self.family(),
                        l,
                        requirement: "> 0".to_string(),
                    });
                }
            }
            ScalarTerm::Recip { c } => {
                positive("c", c)?;
                if l <= 0.0 {
                    return Err(TermIssue::DomainBound {
                        family: self.family(),
                        l,
                        requirement: "> 0".to_string(),
                    });
                }
            }
            ScalarTerm::ExpSearch { m, c } => {
                positive("m", m)?;
                positive("c", c)?;
            }
            ScalarTerm::NegEntropy { a } => {
                positive("a", a)?;
                // Convexity needs x ≥ 2a on the whole box, which also keeps
                // x strictly inside the domain (x > a).
                if l < 2.0 * a {
                    return Err(TermIssue::DomainBound {
                        family: self.family(),
                        l,
                        requirement: format!(">= 2a = {}", 2.0 * a),
                    });
                }
            }
            ScalarTerm::QuadConstraint { a, z } => {
                positive("a", a)?;
                finite("z", z)?;
            }
            ScalarTerm::LinConstraint { a } => {
                finite("a", a)?;
                if a == 0.0 {
                    return Err(TermIssue::BadParam {
                        name: "a",
                        value: a,
                        requirement: "!= 0",
                    });
                }
            }
        }
        Ok(())
    }
}
