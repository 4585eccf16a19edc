//! Quasi-Newton minimization with finite-difference gradients.

use std::time::Duration;

use crate::error::{Error, Result};

/// Wall-clock budget. On targets without a monotonic clock the budget is
/// never exceeded.
#[derive(Debug, Clone, Copy)]
pub struct Deadline {
    #[cfg(not(target_arch = "wasm32"))]
    end: Option<(std::time::Instant, Duration)>,
}

impl Deadline {
    pub fn after(budget: Option<Duration>) -> Self {
        #[cfg(not(target_arch = "wasm32"))]
        {
            Self {
                end: budget.map(|b| (std::time::Instant::now() + b, b)),
            }
        }
        #[cfg(target_arch = "wasm32")]
        {
            let _ = budget;
            Self {}
        }
    }

    pub fn check(&self) -> Result<()> {
        #[cfg(not(target_arch = "wasm32"))]
        if let Some((end, budget)) = self.end {
            if std::time::Instant::now() > end {
                return Err(Error::TrainingTimeout(budget));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BfgsOptions {
    pub max_iterations: usize,
    /// Convergence when the gradient's infinity norm drops below
    /// `gradient_tolerance * max(1, |f|)`.
    pub gradient_tolerance: f64,
    /// Convergence when an iteration improves `f` by less than this
    /// fraction of `max(1, |f|)`.
    pub relative_tolerance: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            max_iterations: 400,
            gradient_tolerance: 1e-7,
            relative_tolerance: 1e-11,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn gradient<F>(f: &mut F, x: &[f64]) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let mut probe = x.to_vec();
    let mut grad = vec![0.0; x.len()];
    for i in 0..x.len() {
        let h = 1e-6 * x[i].abs().max(1.0);
        probe[i] = x[i] + h;
        let up = f(&probe)?;
        probe[i] = x[i] - h;
        let down = f(&probe)?;
        probe[i] = x[i];
        grad[i] = (up - down) / (2.0 * h);
    }
    Ok(grad)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// BFGS with an Armijo backtracking line search. Errors from `f` (such as a
/// timeout) abort the search.
pub fn minimize_bfgs<F>(mut f: F, x0: &[f64], options: &BfgsOptions) -> Result<Minimum>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x)?;
    if !fx.is_finite() {
        return Err(Error::UnstableModel(
            "objective is not finite at the start point".into(),
        ));
    }
    if n == 0 {
        return Ok(Minimum {
            x,
            value: fx,
            iterations: 0,
            converged: true,
        });
    }
    let mut h_inv = identity(n);
    let mut g = gradient(&mut f, &x)?;
    for iteration in 0..options.max_iterations {
        let scale = fx.abs().max(1.0);
        if g.iter().fold(0.0_f64, |m, v| m.max(v.abs())) < options.gradient_tolerance * scale {
            return Ok(Minimum {
                x,
                value: fx,
                iterations: iteration,
                converged: true,
            });
        }
        let mut dir: Vec<f64> = (0..n).map(|i| -dot(&h_inv[i], &g)).collect();
        let mut slope = dot(&g, &dir);
        if slope >= 0.0 {
            h_inv = identity(n);
            dir = g.iter().map(|v| -v).collect();
            slope = dot(&g, &dir);
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..50 {
            let candidate: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + step * b).collect();
            let fc = f(&candidate)?;
            if fc.is_finite() && fc <= fx + 1e-4 * step * slope {
                accepted = Some((candidate, fc));
                break;
            }
            step *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            // no descent along the quasi-Newton direction: numerically at a minimum
            return Ok(Minimum {
                x,
                value: fx,
                iterations: iteration,
                converged: true,
            });
        };
        let g_new = gradient(&mut f, &x_new)?;
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let improvement = fx - f_new;
        x = x_new;
        fx = f_new;
        g = g_new;
        if improvement.abs() < options.relative_tolerance * scale {
            return Ok(Minimum {
                x,
                value: fx,
                iterations: iteration + 1,
                converged: true,
            });
        }
        let sy = dot(&s, &y);
        if sy > 1e-14 {
            update_inverse_hessian(&mut h_inv, &s, &y, sy);
        }
    }
    Ok(Minimum {
        x,
        value: fx,
        iterations: options.max_iterations,
        converged: false,
    })
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn update_inverse_hessian(h: &mut [Vec<f64>], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..n).map(|i| dot(&h[i], y)).collect();
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i][j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| Ok((1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2));
        let m = minimize_bfgs(f, &[-1.2, 1.0], &BfgsOptions::default()).unwrap();
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4, "{:?}", m.x);
    }

    #[test]
    fn quadratic_bowl() {
        let f = |x: &[f64]| {
            Ok(x.iter()
                .enumerate()
                .map(|(i, v)| (i as f64 + 1.0) * (v - 2.0).powi(2))
                .sum())
        };
        let m = minimize_bfgs(f, &[0.0; 4], &BfgsOptions::default()).unwrap();
        for v in &m.x {
            assert!((v - 2.0).abs() < 1e-5);
        }
    }

    #[test]
    fn objective_errors_abort() {
        let f = |_: &[f64]| -> Result<f64> { Err(Error::TrainingTimeout(Duration::from_secs(1))) };
        assert!(matches!(
            minimize_bfgs(f, &[0.0], &BfgsOptions::default()),
            Err(Error::TrainingTimeout(_))
        ));
    }
}
