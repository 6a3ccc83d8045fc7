//! Independent reference computations. Nothing here calls the library's
//! transforms or solvers.
#![allow(dead_code)]

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

/// Solves `F(u) = A u - f(u) = 0` for a symmetric tridiagonal `A` given by
/// constant `diag`/`off` entries, using damped Newton with backtracking.
/// `f` returns `(f(u), f'(u))`.
pub fn damped_newton_tridiagonal(
    n: usize,
    diag: f64,
    off: f64,
    f: impl Fn(f64) -> (f64, f64),
    tol: f64,
) -> Vec<f64> {
    let mut u = vec![0.0; n];
    let residual = |u: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| {
                let left = if i > 0 { u[i - 1] } else { 0.0 };
                let right = if i + 1 < n { u[i + 1] } else { 0.0 };
                diag * u[i] + off * (left + right) - f(u[i]).0
            })
            .collect()
    };
    let norm = |r: &[f64]| r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut r = residual(&u);
    for _ in 0..100 {
        if norm(&r) < tol {
            break;
        }
        let d: Vec<f64> = u.iter().map(|&v| diag - f(v).1).collect();
        let sub = vec![off; n];
        let step = thomas(&sub, &d, &sub, &r);
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(&step).map(|(a, s)| a - t * s).collect();
            let rt = residual(&trial);
            if norm(&rt) < (1.0 - 0.5 * t) * norm(&r) || t < 1e-6 {
                u = trial;
                r = rt;
                break;
            }
            t *= 0.5;
        }
    }
    u
}

pub fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let den = diag[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / den;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / den;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Finite-difference solution of `-u'' = (1+u)^{-1/2}` on `(0, π)` with
/// `intervals` cells; returns interior values at `x_i = i h`.
pub fn fd_classical(intervals: usize) -> Vec<f64> {
    let h = PI / intervals as f64;
    damped_newton_tridiagonal(
        intervals - 1,
        2.0 / (h * h),
        -1.0 / (h * h),
        |u| ((1.0 + u).powf(-0.5), -0.5 * (1.0 + u).powf(-1.5)),
        1e-12,
    )
}

/// `(4/π) Σ_{k odd} (-1)^{(k-1)/2} / k²` summed over `terms` odd `k`.
pub fn midpoint_half_laplacian_of_one(terms: usize) -> f64 {
    // pair consecutive terms to keep the alternating tail small
    let mut sum = 0.0;
    for j in (0..terms).rev() {
        let k = (2 * j + 1) as f64;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign / (k * k);
    }
    4.0 / PI * sum
}

/// Modified Bessel `I_ν(z)` by its power series.
pub fn bessel_i_series(nu: f64, z: f64) -> f64 {
    let half = 0.5 * z;
    let mut term = half.powf(nu) / gamma(nu + 1.0);
    let mut sum = term;
    for k in 1..400 {
        let k = k as f64;
        term *= half * half / (k * (k + nu));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Modified Bessel `K_ν(z)` for non-integer `ν`: reflection formula through
/// `I_{±ν}` for `z ≤ 8`, asymptotic expansion above.
pub fn bessel_k(nu: f64, z: f64) -> f64 {
    if z <= 8.0 {
        PI / 2.0 * (bessel_i_series(-nu, z) - bessel_i_series(nu, z)) / (nu * PI).sin()
    } else {
        let mu = 4.0 * nu * nu;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..30 {
            let kf = k as f64;
            let next = term * (mu - (2.0 * kf - 1.0).powi(2)) / (kf * 8.0 * z);
            if next.abs() > term.abs() {
                break;
            }
            term = next;
            sum += term;
        }
        (PI / (2.0 * z)).sqrt() * (-z).exp() * sum
    }
}

/// Decaying extension profile `(2^{1-s}/Γ(s)) z^s K_s(z)`, `z = √λ y`.
pub fn bessel_profile(s: f64, z: f64) -> f64 {
    if z == 0.0 {
        return 1.0;
    }
    2f64.powf(1.0 - s) / gamma(s) * z.powf(s) * bessel_k(s, z)
}

/// Extension constant from the small-`z` expansion of the profile:
/// `θ ≈ 1 − c z^{2s}` with `2 s c = 2^{1-2s} Γ(1-s) / Γ(s)`.
pub fn extension_constant(s: f64) -> f64 {
    2f64.powf(1.0 - 2.0 * s) * gamma(1.0 - s) / gamma(s)
}

/// Plain Picard iteration of the diagonal map
/// `c ← λ^{-s} ⟨(ε + Σ c_k φ_k)^{-p}, φ_j⟩` on `(0, π)` with `n` sine modes
/// and the trapezoid rule on `nodes` uniform nodes.
pub fn brute_force_fixed_point(n: usize, nodes: usize, s: f64, p: f64, eps: f64) -> Vec<f64> {
    let h = PI / (nodes - 1) as f64;
    let norm = (2.0 / PI).sqrt();
    let table: Vec<Vec<f64>> = (1..=n)
        .map(|k| {
            (0..nodes)
                .map(|i| norm * (k as f64 * i as f64 * h).sin())
                .collect()
        })
        .collect();
    let mut c = vec![0.0; n];
    for _ in 0..10_000 {
        let u: Vec<f64> = (0..nodes)
            .map(|i| c.iter().zip(&table).map(|(ck, row)| ck * row[i]).sum())
            .collect();
        let g: Vec<f64> = u.iter().map(|&v| (eps + v.max(0.0)).powf(-p)).collect();
        let next: Vec<f64> = table
            .iter()
            .enumerate()
            .map(|(j, row)| {
                let lam = ((j + 1) as f64).powi(2);
                let proj: f64 = (1..nodes - 1).map(|i| h * g[i] * row[i]).sum();
                proj / lam.powf(s)
            })
            .collect();
        let change = next
            .iter()
            .zip(&c)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        c = next;
        if change < 1e-15 {
            break;
        }
    }
    c
}

pub fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}
