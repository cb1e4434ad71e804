//! One-dimensional quadrature: adaptive Gauss-Legendre and composite Simpson.
//!
//! The Gauss-Legendre nodes are computed once by Newton iteration on the
//! Legendre polynomial rather than transcribed from tables.

use crate::error::{Error, Result};
use std::sync::OnceLock;

const GL_ORDER: usize = 15;

fn gl_rule() -> &'static ([f64; GL_ORDER], [f64; GL_ORDER]) {
    static RULE: OnceLock<([f64; GL_ORDER], [f64; GL_ORDER])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_ORDER;
        let mut nodes = [0.0; GL_ORDER];
        let mut weights = [0.0; GL_ORDER];
        for i in 0..n {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 1..n {
        let k = k as f64;
        let p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn gl_panel<const M: usize>(f: &impl Fn(f64) -> [f64; M], a: f64, b: f64) -> [f64; M] {
    let (nodes, weights) = gl_rule();
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = [0.0; M];
    for (&x, &w) in nodes.iter().zip(weights.iter()) {
        let v = f(mid + half * x);
        for j in 0..M {
            acc[j] += w * v[j];
        }
    }
    for a in acc.iter_mut() {
        *a *= half;
    }
    acc
}

/// Adaptive Gauss-Legendre integration of a vector integrand over `[a, b]`.
///
/// Bisects until the panel-vs-halves discrepancy of every component fits in
/// an error budget proportional to the subinterval length, with the budget
/// set by `rel_tol` against the whole-interval estimate (floored by
/// `abs_tol`). Exceeding the depth cap reports the achieved tolerance.
pub fn integrate_adaptive_vec<const M: usize>(
    f: &impl Fn(f64) -> [f64; M],
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<[f64; M]> {
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(Error::domain(format!(
            "quadrature interval [{a}, {b}] must be finite with a < b"
        )));
    }
    const MAX_DEPTH: usize = 48;
    let whole = gl_panel(f, a, b);
    // Components are judged against the dominant one: a structurally zero
    // component (symmetric off-diagonal, say) must not force refinement.
    let wmax = whole.iter().fold(0.0f64, |m, w| m.max(w.abs()));
    let budget = [(rel_tol * wmax).max(abs_tol); M];
    let len_total = b - a;

    let mut acc = [0.0; M];
    let mut worst_ratio = 0.0f64;
    // (a, b, estimate, depth)
    let mut stack: Vec<(f64, f64, [f64; M], usize)> = vec![(a, b, whole, 0)];
    while let Some((lo, hi, est, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = gl_panel(f, lo, mid);
        let right = gl_panel(f, mid, hi);
        let frac = (hi - lo) / len_total;
        let mut ok = true;
        for j in 0..M {
            let err = (left[j] + right[j] - est[j]).abs();
            if !err.is_finite() {
                return Err(Error::numerical(format!(
                    "non-finite quadrature panel on [{lo}, {hi}]"
                )));
            }
            let allowed = budget[j] * frac;
            if err > allowed {
                ok = false;
                worst_ratio = worst_ratio.max(err / budget[j].max(f64::MIN_POSITIVE));
            }
        }
        if ok || depth >= MAX_DEPTH {
            if !ok {
                return Err(Error::numerical(format!(
                    "quadrature did not converge: achieved ~{:.3e} of requested tolerance {rel_tol:.3e}",
                    worst_ratio * rel_tol
                )));
            }
            for j in 0..M {
                acc[j] += left[j] + right[j];
            }
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    Ok(acc)
}

/// Scalar adaptive Gauss-Legendre over `[a, b]`.
pub fn integrate_adaptive(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    let wrapped = |x: f64| [f(x)];
    integrate_adaptive_vec(&wrapped, a, b, rel_tol, abs_tol).map(|v| v[0])
}

/// Same as [`integrate_adaptive`] with interior split points (integration is
/// carried out independently on each sub-interval; used where the integrand
/// has a known kink, e.g. the triangular score at its mode).
pub fn integrate_adaptive_split(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    splits: &[f64],
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    let mut cuts = vec![a];
    cuts.extend(splits.iter().copied().filter(|s| *s > a && *s < b));
    cuts.push(b);
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += integrate_adaptive(&f, w[0], w[1], rel_tol, abs_tol)?;
    }
    Ok(total)
}

/// Composite Simpson's rule on `n_points` equally spaced points (odd, ≥ 3).
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n_points: usize) -> f64 {
    assert!(n_points >= 3 && n_points % 2 == 1, "Simpson needs an odd point count >= 3");
    let n = n_points - 1;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let x = a + h * i as f64;
        acc += f(x) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}
