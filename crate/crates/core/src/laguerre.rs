//! Generalized Laguerre polynomials `L_n^(α)` and their positive zeros.
//!
//! The sideband couplings are diagonal in the Fock basis with entries
//! proportional to `L_n^(s)(η²)`, so a Lamb-Dicke parameter placed at a zero
//! of `L_q` or `L_p^(1)` is what truncates the dark-state support. Everything
//! here works in the squared parameter `x = η²`; the square root is taken
//! only at the API boundary ([`ldp_for_zero`]).

use crate::error::Error;

/// Relative threshold below which a Laguerre value counts as "effectively
/// zero" when it shows up as a divisor in dark-state coefficient products.
pub const EFFECTIVE_ZERO: f64 = 1e-8;

/// Relative threshold below which a divisor is still usable but flagged as a
/// near-zero (the coefficient products develop large spikes there).
pub const NEAR_ZERO_WARN: f64 = 1e-6;

/// Evaluate `L_n^(α)(x)` by the upward three-term recurrence
/// `(k+1) L_{k+1} = (2k+1+α-x) L_k - (k+α) L_{k-1}`.
///
/// Exact for `n ∈ {0, 1}`. Panics on a negative argument.
pub fn eval(n: u32, alpha: u32, x: f64) -> f64 {
    eval_with_scale(n, alpha, x).0
}

/// Evaluate `L_n^(α)(x)` together with the running scale
/// `max_{k ≤ n} |L_k^(α)(x)|`, which calibrates the effective-zero test.
pub fn eval_with_scale(n: u32, alpha: u32, x: f64) -> (f64, f64) {
    assert!(x >= 0.0 && x.is_finite(), "Laguerre argument must be a finite non-negative real");
    let a = f64::from(alpha);
    let mut prev = 1.0_f64;
    if n == 0 {
        return (1.0, 1.0);
    }
    let mut cur = 1.0 + a - x;
    let mut scale = prev.abs().max(cur.abs());
    for k in 1..n {
        let kf = f64::from(k);
        let next = ((2.0 * kf + 1.0 + a - x) * cur - (kf + a) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
        scale = scale.max(cur.abs());
    }
    (cur, scale)
}

/// Evaluate `L_k^(α)(x)` for every `k = 0..=n` in one upward sweep.
pub fn eval_all(n: u32, alpha: u32, x: f64) -> Vec<f64> {
    assert!(x >= 0.0 && x.is_finite(), "Laguerre argument must be a finite non-negative real");
    let a = f64::from(alpha);
    let mut out = Vec::with_capacity(n as usize + 1);
    out.push(1.0);
    if n == 0 {
        return out;
    }
    out.push(1.0 + a - x);
    for k in 1..n {
        let kf = f64::from(k);
        let next = ((2.0 * kf + 1.0 + a - x) * out[k as usize] - (kf + a) * out[k as usize - 1])
            / (kf + 1.0);
        out.push(next);
    }
    out
}

/// `d/dx L_n^(α)(x) = -L_{n-1}^(α+1)(x)`.
fn derivative(n: u32, alpha: u32, x: f64) -> f64 {
    if n == 0 { 0.0 } else { -eval(n - 1, alpha + 1, x) }
}

/// All `n` zeros of `L_n^(α)`, ascending, each to about `1e-12` relative
/// accuracy.
///
/// Roots are bracketed degree by degree using the strict interlacing of
/// consecutive-degree zeros, narrowed by bisection, and polished with a few
/// Newton steps. This needs no initial-guess heuristics and cannot skip or
/// duplicate roots.
pub fn zeros(n: u32, alpha: u32) -> Result<Vec<f64>, Error> {
    if n == 0 {
        return Err(Error::NoZeros { alpha });
    }
    // L_1^(α)(x) = 1 + α - x.
    let mut roots = vec![1.0 + f64::from(alpha)];
    for degree in 2..=n {
        roots = next_degree_zeros(degree, alpha, &roots);
    }
    Ok(roots)
}

/// Zeros of degree `k`, given the zeros of degree `k - 1`.
fn next_degree_zeros(k: u32, alpha: u32, lower: &[f64]) -> Vec<f64> {
    // All zeros lie in (0, 4k + 2α + 2); pad the upper bracket slightly.
    let hi = 4.0 * f64::from(k) + 2.0 * f64::from(alpha) + 3.0;
    let mut brackets = Vec::with_capacity(k as usize);
    brackets.push((0.0, lower[0]));
    for w in lower.windows(2) {
        brackets.push((w[0], w[1]));
    }
    brackets.push((lower[lower.len() - 1], hi));

    brackets
        .into_iter()
        .enumerate()
        .map(|(i, (mut lo, mut hi))| {
            // L_k^(α)(0) > 0 and exactly one simple root per bracket, so the
            // sign at the i-th left endpoint is (-1)^i.
            let sign_lo = if i % 2 == 0 { 1.0 } else { -1.0 };
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if eval(k, alpha, mid) * sign_lo > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-14 * hi.max(1.0) {
                    break;
                }
            }
            let mut x = 0.5 * (lo + hi);
            for _ in 0..4 {
                let f = eval(k, alpha, x);
                let df = derivative(k, alpha, x);
                if df == 0.0 {
                    break;
                }
                let step = f / df;
                let next = x - step;
                if next > lo && next < hi {
                    x = next;
                } else {
                    break;
                }
            }
            x
        })
        .collect()
}

/// Lamb-Dicke parameter `η = √x` sitting on the `root_index`-th zero of
/// `L_n^(α)`, the knob that imposes a filter condition.
pub fn ldp_for_zero(n: u32, alpha: u32, root_index: usize) -> Result<f64, Error> {
    let roots = zeros(n, alpha)?;
    roots
        .get(root_index)
        .map(|x| x.sqrt())
        .ok_or(Error::RootIndexOutOfRange { degree: n, alpha, index: root_index })
}
