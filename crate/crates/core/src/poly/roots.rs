//! Simultaneous root finding by Aberth–Ehrlich iteration.

use std::f64::consts::PI;

use thiserror::Error;

use super::{czero, Complex, UnivariatePoly, EPS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RootsError {
    #[error("cannot take roots of a constant polynomial")]
    Constant,
    #[error("root iteration did not converge after {iterations} iterations (max residual {max_residual:e})")]
    NoConvergence {
        iterations: usize,
        roots: Vec<Complex>,
        residuals: Vec<f64>,
        max_residual: f64,
    },
}

#[derive(Clone, Copy, Debug)]
pub struct RootOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 200,
        }
    }
}

/// Angle offset of the initial guesses, chosen to avoid symmetric starts.
const ANGLE_OFFSET: f64 = 0.4;

/// All roots of `p` with multiplicity, using [`RootOptions`] defaults apart
/// from `tol`.
pub fn roots(p: &UnivariatePoly, tol: f64) -> Result<Vec<Complex>, RootsError> {
    roots_with(
        p,
        &RootOptions {
            tol,
            ..RootOptions::default()
        },
    )
}

fn fujiwara_bound(c: &[Complex]) -> f64 {
    let n = c.len() - 1;
    let lead = c[n].norm();
    (1..=n)
        .map(|k| {
            let mut r = c[n - k].norm() / lead;
            if k == n {
                r /= 2.0;
            }
            r.powf(1.0 / k as f64)
        })
        .fold(0.0, f64::max)
        * 2.0
}

/// Whether `z` is a root to working precision: either the residual is at
/// the rounding floor of the evaluation, or the last correction was below
/// `tol` relative to `|z|`.
fn converged(p: &UnivariatePoly, z: Complex, step: f64, tol: f64) -> bool {
    let n = p.degree() as f64;
    let floor = 4.0 * (n + 1.0) * EPS * p.abs_eval(z.norm());
    p.eval(z).norm() <= floor || step <= tol * z.norm().max(1.0)
}

pub fn roots_with(p: &UnivariatePoly, opts: &RootOptions) -> Result<Vec<Complex>, RootsError> {
    if p.degree() == 0 {
        return Err(RootsError::Constant);
    }
    // exact zero roots from vanishing low-order coefficients
    let zeros = p.coeffs().iter().take_while(|c| c.norm() == 0.0).count();
    let mut out = vec![czero(); zeros];
    let q = UnivariatePoly::new(p.coeffs()[zeros..].to_vec());
    let n = q.degree();
    if n == 0 {
        return Ok(out);
    }
    let c = q.coeffs();
    if n == 1 {
        out.push(-c[0] / c[1]);
        return Ok(out);
    }

    let radius = fujiwara_bound(c).max(f64::MIN_POSITIVE.sqrt());
    let mut z: Vec<Complex> = (0..n)
        .map(|k| Complex::from_polar(radius, 2.0 * PI * k as f64 / n as f64 + ANGLE_OFFSET))
        .collect();
    let mut done = vec![false; n];
    let mut iterations = 0;
    while iterations < opts.max_iter && done.iter().any(|d| !d) {
        iterations += 1;
        for k in 0..n {
            if done[k] {
                continue;
            }
            let (v, dv) = q.eval_d(z[k]);
            if v.norm() == 0.0 {
                done[k] = true;
                continue;
            }
            let mut sum = czero();
            for j in 0..n {
                if j != k {
                    let d = z[k] - z[j];
                    if d.norm() > 0.0 {
                        sum += d.inv();
                    }
                }
            }
            let newton = if dv.norm() > 0.0 {
                v / dv
            } else {
                // stationary point: nudge off it
                Complex::new(radius * 1e-3, radius * 1e-3)
            };
            let denom = Complex::new(1.0, 0.0) - newton * sum;
            let w = if denom.norm() > 0.0 { newton / denom } else { newton };
            z[k] -= w;
            if converged(&q, z[k], w.norm(), opts.tol) {
                done[k] = true;
            }
        }
    }
    if done.iter().any(|d| !d) {
        let residuals: Vec<f64> = z.iter().map(|&x| q.eval(x).norm()).collect();
        let max_residual = residuals.iter().copied().fold(0.0, f64::max);
        return Err(RootsError::NoConvergence {
            iterations,
            roots: z,
            residuals,
            max_residual,
        });
    }
    out.extend(z);
    Ok(out)
}
