//! Special functions shared by the Fock-space and phase-space routes.

use std::f64::consts::PI;

/// `ln(k!)` for `k = 0..=n`, accumulated as a running sum of logarithms.
pub fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

/// Generalized Laguerre polynomial `L_n^{(a)}(x)` by the forward three-term
/// recurrence in the degree.
pub fn laguerre(n: usize, a: f64, x: f64) -> f64 {
    let mut prev = 1.0;
    if n == 0 {
        return prev;
    }
    let mut cur = 1.0 + a - x;
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 + a - x) * cur - (k + a) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Harmonic-oscillator eigenfunctions `psi_0(x) .. psi_{count-1}(x)` (hbar = m = omega = 1).
///
/// Uses the normalized upward recurrence
/// `psi_{n+1} = sqrt(2/(n+1)) x psi_n - sqrt(n/(n+1)) psi_{n-1}`,
/// which never forms a bare Hermite polynomial and so stays finite for large `n`.
pub fn hermite_functions(count: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    if count == 0 {
        return out;
    }
    let psi0 = PI.powf(-0.25) * (-0.5 * x * x).exp();
    out.push(psi0);
    if count == 1 {
        return out;
    }
    out.push(std::f64::consts::SQRT_2 * x * psi0);
    for n in 1..count - 1 {
        let nf = n as f64;
        let next = (2.0 / (nf + 1.0)).sqrt() * x * out[n] - (nf / (nf + 1.0)).sqrt() * out[n - 1];
        out.push(next);
    }
    out
}

/// Trapezoid weights for `count` equally spaced nodes with spacing `step`.
pub fn trapezoid_weights(count: usize, step: f64) -> Vec<f64> {
    let mut w = vec![step; count];
    if count > 0 {
        w[0] *= 0.5;
        w[count - 1] *= 0.5;
    }
    if count == 1 {
        w[0] = 0.0;
    }
    w
}
