//! Seeded random instance families.
//!
//! Six families cover both constraint shapes and every term pairing the
//! solvers accept, with parameter ranges chosen so instances are feasible by
//! construction: the resource level is placed inside the attainable range of
//! `g` via `b = g_lo + b_fraction·(g_hi − g_lo)`.
//!
//! | family          | constraint | objective term            | constraint term |
//! |-----------------|------------|---------------------------|-----------------|
//! | `commodity`     | inequality | `Holding` (order+holding) | `LinConstraint` |
//! | `quad-quad`     | inequality | `QuadLin`                 | `QuadConstraint`|
//! | `portfolio`     | equality   | `QuadLin`                 | `LinConstraint` |
//! | `sampling`      | equality   | `Recip`                   | `LinConstraint` |
//! | `target-search` | equality   | `ExpSearch`               | `LinConstraint` |
//! | `neg-entropy`   | equality   | `NegEntropy`              | `LinConstraint` |
//!
//! Determinism contract: coordinate `i` draws from its own ChaCha8 stream
//! (stream index `i`, seeded by `seed`), so the first `n` coordinates of any
//! instance coincide with those of a larger instance generated from the same
//! seed — growing `n` extends an instance instead of reshuffling it. Within
//! a coordinate the draw order is: term parameters, then `lᵢ`, then `uᵢ`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{ConstraintKind, ProblemInstance};
use crate::numeric::pairwise_sum_by;
use crate::term::ScalarTerm;

/// The instance families, named for the allocation story each models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Order-plus-holding costs under a linear capacity budget.
    Commodity,
    /// Quadratic costs under a quadratic congestion budget.
    QuadQuad,
    /// Quadratic utilities with a fixed total investment.
    Portfolio,
    /// Reciprocal variance terms with a fixed sample budget.
    Sampling,
    /// Saturating detection payoffs with a fixed search effort.
    TargetSearch,
    /// Entropy-like congestion delays with a fixed throughput.
    NegEntropy,
}

impl Family {
    pub const ALL: [Family; 6] = [
        Family::Commodity,
        Family::QuadQuad,
        Family::Portfolio,
        Family::Sampling,
        Family::TargetSearch,
        Family::NegEntropy,
    ];

    pub fn constraint(self) -> ConstraintKind {
        match self {
            Family::Commodity | Family::QuadQuad => ConstraintKind::Inequality,
            _ => ConstraintKind::LinearEquality,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Commodity => "commodity",
            Family::QuadQuad => "quad-quad",
            Family::Portfolio => "portfolio",
            Family::Sampling => "sampling",
            Family::TargetSearch => "target-search",
            Family::NegEntropy => "neg-entropy",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = GeneratorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| GeneratorError::UnknownFamily(s.to_string()))
    }
}

/// Everything that determines a generated instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub family: Family,
    pub n: usize,
    pub seed: u64,
    /// Placement of the resource level inside the attainable range of `g`:
    /// 0 pins `b` to the box minimum of `g` (the degenerate edge), 1 to its
    /// maximum, values between interpolate linearly.
    pub b_fraction: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum GeneratorError {
    #[error("unknown family `{0}` (expected one of: commodity, quad-quad, portfolio, sampling, target-search, neg-entropy)")]
    UnknownFamily(String),
    #[error("instance dimension must be at least 1")]
    ZeroDimension,
    #[error("b_fraction must lie in [0, 1] (got {0})")]
    BadFraction(f64),
}

/// Uniform draw from the half-open interval `(lo, hi]`: rejects the lower
/// endpoint, which some term domains exclude (e.g. `l > 0` for holding and
/// reciprocal objectives).
fn open_low<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    loop {
        let v = hi - rng.gen_range(0.0..(hi - lo));
        if v > lo {
            return v;
        }
    }
}

/// One coordinate's draws: `(φᵢ, gᵢ, lᵢ, uᵢ)` in the family's documented
/// ranges and order.
fn draw_coordinate<R: Rng>(family: Family, rng: &mut R) -> (ScalarTerm, ScalarTerm, f64, f64) {
    match family {
        Family::Commodity => {
            let c = rng.gen_range(10.0..=30.0);
            let k = rng.gen_range(5.0..=30.0);
            let a = rng.gen_range(1.0..=4.0);
            let l = open_low(rng, 0.0, 3.0);
            let u = open_low(rng, 3.0, 6.0);
            (
                ScalarTerm::Holding { c, k },
                ScalarTerm::LinConstraint { a },
                l,
                u,
            )
        }
        Family::QuadQuad => {
            let d = rng.gen_range(1.0..=20.0);
            let c = rng.gen_range(1.0..=25.0);
            let a = rng.gen_range(1.0..=30.0);
            let z = rng.gen_range(1.0..=35.0);
            let l = rng.gen_range(0.0..=3.0);
            let u = open_low(rng, 3.0, 11.0);
            (
                ScalarTerm::QuadLin { d, c },
                ScalarTerm::QuadConstraint { a, z },
                l,
                u,
            )
        }
        Family::Portfolio => {
            let d = rng.gen_range(1.0..=20.0);
            let c = rng.gen_range(1.0..=25.0);
            let a = rng.gen_range(1.0..=30.0);
            let l = rng.gen_range(0.0..=3.0);
            let u = open_low(rng, 3.0, 11.0);
            (
                ScalarTerm::QuadLin { d, c },
                ScalarTerm::LinConstraint { a },
                l,
                u,
            )
        }
        Family::Sampling => {
            let c = rng.gen_range(5.0..=30.0);
            let a = rng.gen_range(1.0..=4.0);
            let l = open_low(rng, 0.0, 3.0);
            let u = open_low(rng, 3.0, 6.0);
            (
                ScalarTerm::Recip { c },
                ScalarTerm::LinConstraint { a },
                l,
                u,
            )
        }
        Family::TargetSearch => {
            let m = rng.gen_range(0.5..=8.0);
            let c = rng.gen_range(0.1..=3.0);
            let a = rng.gen_range(1.0..=3.0);
            let l = rng.gen_range(0.0..=0.1);
            let u = open_low(rng, 0.1, 5.0);
            (
                ScalarTerm::ExpSearch { m, c },
                ScalarTerm::LinConstraint { a },
                l,
                u,
            )
        }
        Family::NegEntropy => {
            // The same coefficient drives the delay curve and the throughput
            // row; the box must keep x ≥ 2a for coordinatewise convexity.
            let a = rng.gen_range(1.0..=3.0);
            let l = rng.gen_range((2.0f64).max(2.0 * a + 0.1)..=10.0);
            let u = open_low(rng, l + 1.0, l + 11.0);
            (
                ScalarTerm::NegEntropy { a },
                ScalarTerm::LinConstraint { a },
                l,
                u,
            )
        }
    }
}

/// Attainable range of `g` over the box, computed with the same per-term
/// minimizer expressions and pairwise summation the solvers use. Matching
/// them operation-for-operation keeps `b_fraction = 0` exactly solvable: the
/// solver's own evaluation of `g` at its box minimizer reproduces `g_lo`
/// bit-for-bit, landing in the degenerate branch instead of infeasibility.
fn g_range(g: &[ScalarTerm], l: &[f64], u: &[f64]) -> (f64, f64) {
    let n = g.len();
    let g_lo = pairwise_sum_by(n, |i| match g[i] {
        ScalarTerm::LinConstraint { a } => {
            if a > 0.0 {
                g[i].value(l[i])
            } else {
                g[i].value(u[i])
            }
        }
        ScalarTerm::QuadConstraint { a, z } => g[i].value((z / a).clamp(l[i], u[i])),
        _ => unreachable!("constraint side holds constraint terms only"),
    });
    let g_hi = pairwise_sum_by(n, |i| g[i].value(l[i]).max(g[i].value(u[i])));
    (g_lo, g_hi)
}

/// Generates the instance a spec describes. Feasible by construction for
/// every `b_fraction` in `[0, 1]`.
pub fn generate(spec: &GeneratorSpec) -> Result<ProblemInstance, GeneratorError> {
    if spec.n == 0 {
        return Err(GeneratorError::ZeroDimension);
    }
    if !(0.0..=1.0).contains(&spec.b_fraction) {
        return Err(GeneratorError::BadFraction(spec.b_fraction));
    }

    let n = spec.n;
    let mut phi = Vec::with_capacity(n);
    let mut g = Vec::with_capacity(n);
    let mut l = Vec::with_capacity(n);
    let mut u = Vec::with_capacity(n);
    for i in 0..n {
        // A fresh rng per coordinate, on its own stream: coordinate i's draws
        // are a pure function of (seed, i), independent of n and of every
        // other coordinate.
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(i as u64);
        let (p, c, lo, hi) = draw_coordinate(spec.family, &mut rng);
        phi.push(p);
        g.push(c);
        l.push(lo);
        u.push(hi);
    }

    let (g_lo, g_hi) = g_range(&g, &l, &u);
    let b = g_lo + spec.b_fraction * (g_hi - g_lo);
    let instance = ProblemInstance::new(spec.family.constraint(), b, l, u, phi, g)
        .expect("generated parameters satisfy the term catalog's validation rules");
    Ok(instance)
}
