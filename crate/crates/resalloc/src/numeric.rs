//! Small numeric utilities shared across the crate: accuracy-preserving
//! summation and bracketed scalar root finding.

/// Sums `f(0) + f(1) + ... + f(n-1)` by pairwise (cascade) summation.
///
/// Plain left-to-right accumulation loses up to `n·ε` relative accuracy; the
/// pairwise tree keeps the error at `O(log n · ε)`, which matters when a
/// constraint value of magnitude ~1e7 (n in the millions) is compared against
/// a feasibility band of ~1e-2.
pub(crate) fn pairwise_sum_by<F: FnMut(usize) -> f64>(n: usize, mut f: F) -> f64 {
    fn go<F: FnMut(usize) -> f64>(lo: usize, hi: usize, f: &mut F) -> f64 {
        if hi - lo <= 32 {
            let mut s = 0.0;
            for i in lo..hi {
                s += f(i);
            }
            s
        } else {
            let mid = lo + (hi - lo) / 2;
            go(lo, mid, f) + go(mid, hi, f)
        }
    }
    go(0, n, &mut f)
}

/// Finds the root of a nondecreasing function on `[lo, hi]` by Newton steps
/// safeguarded with a sign-change bracket.
///
/// `f` returns `(value, derivative)`. Requires `f(lo) ≤ 0 ≤ f(hi)`. Whenever
/// a Newton step would leave the current bracket, or the derivative is not
/// positive and finite, the step falls back to bisection, so convergence is
/// never worse than bisection while smooth convex cases converge in a
/// handful of evaluations. Stops when the bracket width drops below `tol`
/// or after `max_iter` evaluations.
pub(crate) fn newton_bracketed<F: FnMut(f64) -> (f64, f64)>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_iter: u32,
) -> f64 {
    debug_assert!(lo <= hi);
    let mut x = 0.5 * (lo + hi);
    for _ in 0..max_iter {
        if hi - lo <= tol {
            break;
        }
        let (v, dv) = f(x);
        if v == 0.0 {
            return x;
        }
        if v > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let newton = x - v / dv;
        x = if dv > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    x
}

/// Plain bisection for a sign change: requires `f(lo) ≤ 0 ≤ f(hi)` (`f` need
/// not be monotone as long as it crosses zero once on the bracket). Stops at
/// bracket width `tol` or after `max_iter` halvings.
pub(crate) fn bisect_root<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_iter: u32,
) -> f64 {
    debug_assert!(lo <= hi);
    for _ in 0..max_iter {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let v = f(mid);
        if v == 0.0 {
            return mid;
        }
        if v > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_small_inputs() {
        assert_eq!(pairwise_sum_by(100, |i| (i + 1) as f64), 5050.0);
    }

    #[test]
    fn pairwise_is_more_accurate_than_sequential() {
        // Alternating large/small values make naive accumulation drift.
        let n = 1 << 20;
        let f = |i: usize| {
            if i.is_multiple_of(2) {
                1.0 + 1e-12
            } else {
                1e-8
            }
        };
        let exact = (n as f64 / 2.0) * (1.0 + 1e-12) + (n as f64 / 2.0) * 1e-8;
        let naive: f64 = (0..n).map(f).sum();
        let pairwise = pairwise_sum_by(n, f);
        assert!((pairwise - exact).abs() <= (naive - exact).abs());
        assert!((pairwise - exact).abs() / exact < 1e-12);
    }

    #[test]
    fn newton_finds_smooth_roots_fast() {
        let mut evals = 0;
        let root = newton_bracketed(
            |x| {
                evals += 1;
                (x * x * x - 2.0, 3.0 * x * x)
            },
            0.0,
            2.0,
            1e-14,
            200,
        );
        assert!((root - 2f64.powf(1.0 / 3.0)).abs() < 1e-12);
        assert!(evals < 20, "expected fast convergence, used {evals} evals");
    }

    #[test]
    fn newton_survives_bad_derivatives() {
        // Derivative reported as zero everywhere: must degrade to bisection.
        let root = newton_bracketed(|x| (x - 0.3, 0.0), 0.0, 1.0, 1e-12, 200);
        assert!((root - 0.3).abs() < 1e-10);
    }

    #[test]
    fn bisection_converges_on_convex_crossings() {
        // Convex, dips below zero, single crossing inside the bracket.
        let root = bisect_root(|x| x * x - 0.25, 0.4, 3.0, 1e-13, 200);
        assert!((root - 0.5).abs() < 1e-11);
    }
}
