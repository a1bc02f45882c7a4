use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

/// Basis families realized by [`super::build_space`].
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Basis {
    /// `sin(kπ(x−a)/L)`, `k = 1..=count`.
    Sine { a: f64, len: f64, count: usize },
    /// Clamped beam modes on `(a, a+L)`, one per root of `cos μ cosh μ = 1`.
    Beam { a: f64, len: f64, roots: Vec<f64> },
    /// `1, cos(ωx'), sin(ωx'), cos(2ωx'), …` with `ω = 2π/L`, `count` functions.
    Fourier { a: f64, len: f64, count: usize },
    /// Legendre polynomials `P_0..P_{count−1}` mapped to `(a, a+L)`.
    Legendre { a: f64, len: f64, count: usize },
    /// Products `sin(jπ(x−a₀)/L₀) sin(kπ(y−a₁)/L₁)`, index `(j−1)·per_axis + (k−1)`.
    Sine2 {
        a: [f64; 2],
        len: [f64; 2],
        per_axis: usize,
    },
}

/// The `k`-th positive root of `cos μ cosh μ = 1`.
pub fn beam_root(k: usize) -> f64 {
    let mut mu = (k as f64 + 0.5) * PI;
    for _ in 0..100 {
        let f = mu.cos() - 1.0 / mu.cosh();
        let df = -mu.sin() + mu.tanh() / mu.cosh();
        let step = f / df;
        mu -= step;
        if step.abs() < 1e-15 * mu {
            break;
        }
    }
    mu
}

/// `(1−σ)` and `σ` for the clamped mode with root `μ`, computed without cancellation.
fn beam_sigma(mu: f64) -> (f64, f64, f64) {
    let em = (-mu).exp();
    let denom = 1.0 - em * em - 2.0 * mu.sin() * em;
    let num = mu.cos() - mu.sin() - em;
    let one_minus = num * 2.0 * em / denom;
    // (1−σ)e^{μ} without overflow.
    let scaled = num * 2.0 / denom;
    (1.0 - one_minus, one_minus, scaled)
}

/// `d`-th derivative of the clamped mode on `(0, 1)` at `s`.
fn beam_mode(mu: f64, s: f64, d: usize) -> f64 {
    let (sigma, _, scaled) = beam_sigma(mu);
    let t = mu * s;
    let grow = scaled * (mu * (s - 1.0)).exp();
    let decay = (1.0 + sigma) * (-t).exp();
    let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
    let shift = d as f64 * FRAC_PI_2;
    let core = 0.5 * (grow + sign * decay) - (t + shift).cos() + sigma * (t + shift).sin();
    mu.powi(d as i32) * core
}

fn trig_derivative(omega: f64, arg: f64, d: usize, sine: bool) -> f64 {
    let shift = d as f64 * FRAC_PI_2;
    let base = if sine {
        (arg + shift).sin()
    } else {
        (arg + shift).cos()
    };
    omega.powi(d as i32) * base
}

/// Values `P_k^{(d)}(ξ)` for `k < count`, `d ≤ order`; returned as `out[d][k]`.
fn legendre_table(xi: f64, count: usize, order: usize) -> Vec<Vec<f64>> {
    let mut t = vec![vec![0.0; count]; order + 1];
    for k in 0..count {
        t[0][k] = match k {
            0 => 1.0,
            1 => xi,
            _ => ((2 * k - 1) as f64 * xi * t[0][k - 1] - (k - 1) as f64 * t[0][k - 2]) / k as f64,
        };
    }
    for d in 1..=order {
        for k in 0..count {
            t[d][k] = match k {
                0 => 0.0,
                1 => t[d - 1][0],
                // P^{(d)}_{k} = P^{(d)}_{k−2} + (2k−1) P^{(d−1)}_{k−1}
                _ => t[d][k - 2] + (2 * k - 1) as f64 * t[d - 1][k - 1],
            };
        }
    }
    t
}

impl Basis {
    /// Number of basis functions per component.
    pub fn count(&self) -> usize {
        match self {
            Basis::Sine { count, .. }
            | Basis::Fourier { count, .. }
            | Basis::Legendre { count, .. } => *count,
            Basis::Beam { roots, .. } => roots.len(),
            Basis::Sine2 { per_axis, .. } => per_axis * per_axis,
        }
    }

    /// Writes `D^α e_k(x)` into `out[a·count + k]` for every multi-index `orders[a]`.
    pub fn eval(&self, x: &[f64], orders: &[Vec<usize>], out: &mut [f64]) {
        let count = self.count();
        for (a, alpha) in orders.iter().enumerate() {
            let row = &mut out[a * count..(a + 1) * count];
            match self {
                Basis::Sine { a: lo, len, .. } => {
                    let d = alpha[0];
                    for (k, r) in row.iter_mut().enumerate() {
                        let omega = (k + 1) as f64 * PI / len;
                        *r = trig_derivative(omega, omega * (x[0] - lo), d, true);
                    }
                }
                Basis::Beam { a: lo, len, roots } => {
                    let d = alpha[0];
                    let s = (x[0] - lo) / len;
                    for (r, mu) in row.iter_mut().zip(roots) {
                        *r = beam_mode(*mu, s, d) / len.powi(d as i32);
                    }
                }
                Basis::Fourier { a: lo, len, .. } => {
                    let d = alpha[0];
                    let omega = 2.0 * PI / len;
                    for (k, r) in row.iter_mut().enumerate() {
                        *r = if k == 0 {
                            if d == 0 {
                                1.0
                            } else {
                                0.0
                            }
                        } else {
                            let freq = k.div_ceil(2) as f64 * omega;
                            trig_derivative(freq, freq * (x[0] - lo), d, k % 2 == 0)
                        };
                    }
                }
                Basis::Legendre { a: lo, len, count } => {
                    let d = alpha[0];
                    let xi = 2.0 * (x[0] - lo) / len - 1.0;
                    let t = legendre_table(xi, *count, d);
                    let scale = (2.0 / len).powi(d as i32);
                    for (r, v) in row.iter_mut().zip(&t[d]) {
                        *r = v * scale;
                    }
                }
                Basis::Sine2 {
                    a: lo,
                    len,
                    per_axis,
                } => {
                    let axis = |dir: usize| -> Vec<f64> {
                        (1..=*per_axis)
                            .map(|k| {
                                let omega = k as f64 * PI / len[dir];
                                trig_derivative(omega, omega * (x[dir] - lo[dir]), alpha[dir], true)
                            })
                            .collect()
                    };
                    let ux = axis(0);
                    let uy = axis(1);
                    for (j, vx) in ux.iter().enumerate() {
                        for (k, vy) in uy.iter().enumerate() {
                            row[j * per_axis + k] = vx * vy;
                        }
                    }
                }
            }
        }
    }

    /// Highest trigonometric frequency or polynomial degree present.
    pub fn degree(&self) -> usize {
        match self {
            Basis::Sine { count, .. }
            | Basis::Sine2 {
                per_axis: count, ..
            } => *count,
            Basis::Beam { roots, .. } => roots.len() + 1,
            Basis::Fourier { count, .. } => count / 2,
            Basis::Legendre { count, .. } => count - 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beam_roots_match_known_values() {
        assert!((beam_root(1) - 4.730_040_744_862_704).abs() < 1e-12);
        assert!((beam_root(2) - 7.853_204_624_095_838).abs() < 1e-12);
        assert!((beam_root(3) - 10.995_607_838_001_67).abs() < 1e-11);
    }

    #[test]
    fn beam_modes_are_clamped_and_stable_at_high_order() {
        for k in 1..=40 {
            let mu = beam_root(k);
            for s in [0.0, 1.0] {
                assert!(beam_mode(mu, s, 0).abs() < 1e-10, "k={k} s={s}");
                assert!(beam_mode(mu, s, 1).abs() / mu < 1e-10, "k={k} s={s}");
            }
            assert!(beam_mode(mu, 0.37, 0).abs() < 2.5);
        }
    }

    #[test]
    fn beam_mode_solves_fourth_order_equation() {
        let mu = beam_root(2);
        let s = 0.3;
        let h = 1e-3;
        let f = |s: f64| beam_mode(mu, s, 2);
        let fourth = (f(s + h) - 2.0 * f(s) + f(s - h)) / (h * h);
        assert!((fourth - mu.powi(4) * beam_mode(mu, s, 0)).abs() < 1e-3 * mu.powi(4));
    }

    #[test]
    fn legendre_derivatives_match_closed_forms() {
        let t = legendre_table(0.3, 4, 2);
        // P2 = (3x² − 1)/2, P3 = (5x³ − 3x)/2
        assert!((t[0][2] - 0.5 * (3.0 * 0.09 - 1.0)).abs() < 1e-15);
        assert!((t[1][3] - 0.5 * (15.0 * 0.09 - 3.0)).abs() < 1e-14);
        assert!((t[2][3] - 15.0 * 0.3).abs() < 1e-14);
        assert!((t[2][2] - 3.0).abs() < 1e-14);
    }
}
