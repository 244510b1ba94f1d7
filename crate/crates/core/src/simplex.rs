//! Euclidean projections onto the probability simplex and the ordered
//! simplex, and a projected-gradient minimizer built on them.

use crate::error::{Error, Result};

/// Projects `v` onto `{x : x_i ≥ 0, Σ x_i = 1}` (sort-and-threshold).
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumsum += uj;
        let candidate = (cumsum - 1.0) / (j + 1) as f64;
        if uj - candidate > 0.0 {
            theta = candidate;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Least-squares fit of a non-increasing sequence (pool adjacent violators).
pub fn isotonic_decreasing(v: &[f64]) -> Vec<f64> {
    // (sum, count) per pooled block
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(v.len());
    for &x in v {
        blocks.push((x, 1));
        while blocks.len() > 1 {
            let (s1, c1) = blocks[blocks.len() - 1];
            let (s0, c0) = blocks[blocks.len() - 2];
            if s0 / c0 as f64 >= s1 / c1 as f64 {
                break;
            }
            blocks.pop();
            let last = blocks.len() - 1;
            blocks[last] = (s0 + s1, c0 + c1);
        }
    }
    blocks
        .into_iter()
        .flat_map(|(s, c)| std::iter::repeat_n(s / c as f64, c))
        .collect()
}

/// Projects `v` onto `{x : x_1 ≥ x_2 ≥ … ≥ x_n, Σ x_i = 1}`.
///
/// Isotonic regression preserves the sum and commutes with adding a
/// constant, so the projection is the isotonic fit shifted onto the
/// hyperplane.
pub fn project_ordered_simplex(v: &[f64]) -> Vec<f64> {
    let fit = isotonic_decreasing(v);
    let shift = (fit.iter().sum::<f64>() - 1.0) / fit.len() as f64;
    fit.into_iter().map(|x| x - shift).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentOptions {
    pub max_iter: usize,
    /// Stop once the gradient-mapping norm `‖x − P(x − ∇f(x))‖` falls below this.
    pub tol: f64,
    /// Fail with [`Error::ConvergenceFailure`] if the final norm exceeds this.
    pub accept_tol: f64,
}

impl Default for DescentOptions {
    fn default() -> Self {
        Self {
            max_iter: 100_000,
            tol: 1e-10,
            accept_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentOutcome {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub residual: f64,
}

const MEMORY: usize = 10;

/// Projected gradient descent with Barzilai–Borwein steps and a
/// non-monotone Armijo safeguard. `objective` may return infinity outside
/// its domain; such trial points are rejected by backtracking.
pub fn projected_descent<F, G, P>(
    objective: F,
    gradient: G,
    project: P,
    start: &[f64],
    opts: &DescentOptions,
) -> Result<DescentOutcome>
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
    P: Fn(&[f64]) -> Vec<f64>,
{
    let mut x = project(start);
    let mut fx = objective(&x);
    if !fx.is_finite() {
        return Err(Error::InvalidArgument(
            "descent start lies outside the objective's domain".into(),
        ));
    }
    let mut g = gradient(&x);
    let mut history = vec![fx];
    let gnorm = norm(&g);
    let mut step = if gnorm > 0.0 { 1.0 / gnorm } else { 1.0 };
    let mut residual = mapping_norm(&x, &g, &project);
    let mut iterations = 0;

    while residual > opts.tol && iterations < opts.max_iter {
        iterations += 1;
        let f_ref = history.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let slack = 4.0 * f64::EPSILON * f_ref.abs();
        let mut trial_step = step;
        let (x_new, f_new) = loop {
            let moved: Vec<f64> = x
                .iter()
                .zip(&g)
                .map(|(xi, gi)| xi - trial_step * gi)
                .collect();
            let candidate = project(&moved);
            let decrease: f64 = g
                .iter()
                .zip(candidate.iter().zip(&x))
                .map(|(gi, (c, xi))| gi * (c - xi))
                .sum();
            let f_cand = objective(&candidate);
            if f_cand.is_finite() && f_cand <= f_ref + 1e-4 * decrease + slack {
                break (candidate, f_cand);
            }
            trial_step *= 0.5;
            if trial_step < 1e-30 {
                break (x.clone(), fx);
            }
        };
        if x_new == x {
            break;
        }
        let g_new = gradient(&x_new);
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        step = if sy > 0.0 {
            (dot(&s, &s) / sy).clamp(1e-12, 1e12)
        } else {
            trial_step * 2.0
        };
        x = x_new;
        fx = f_new;
        g = g_new;
        history.push(fx);
        if history.len() > MEMORY {
            history.remove(0);
        }
        residual = mapping_norm(&x, &g, &project);
    }

    if residual > opts.accept_tol {
        return Err(Error::ConvergenceFailure {
            residual,
            iterations,
        });
    }
    Ok(DescentOutcome {
        point: x,
        value: fx,
        iterations,
        residual,
    })
}

fn mapping_norm<P: Fn(&[f64]) -> Vec<f64>>(x: &[f64], g: &[f64], project: &P) -> f64 {
    let moved: Vec<f64> = x.iter().zip(g).map(|(a, b)| a - b).collect();
    let p = project(&moved);
    x.iter()
        .zip(&p)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `Σ w_i / x_i`, infinite off the open positive orthant.
pub fn weighted_inverse_sum(weights: &[f64], x: &[f64]) -> f64 {
    if x.iter().any(|&v| !(v > 0.0)) {
        return f64::INFINITY;
    }
    weights.iter().zip(x).map(|(w, v)| w / v).sum()
}

pub fn weighted_inverse_gradient(weights: &[f64], x: &[f64]) -> Vec<f64> {
    weights.iter().zip(x).map(|(w, v)| -w / (v * v)).collect()
}
