//! Small dense Levenberg-Marquardt solver.
//!
//! Minimizes `½‖r(p)‖²` with Marquardt's diagonal scaling, so the damped
//! normal equations are `(JᵀJ + λ·diag(JᵀJ))·δ = −Jᵀr`.

#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub initial_damping: f64,
    pub damping_up: f64,
    pub damping_down: f64,
    pub max_iterations: usize,
    /// Relative parameter change at which an accepted step ends the search.
    pub step_tolerance: f64,
    /// Infinity norm of `Jᵀr` below which the point is accepted as optimal.
    pub gradient_tolerance: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            initial_damping: 1e-3,
            damping_up: 10.0,
            damping_down: 10.0,
            max_iterations: 200,
            step_tolerance: 1e-10,
            gradient_tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub params: Vec<f64>,
    pub residuals: Vec<f64>,
    /// `JᵀJ` at the final point.
    pub normal_matrix: Vec<Vec<f64>>,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl LmOutcome {
    pub fn residual_norm(&self) -> f64 {
        self.residuals.iter().map(|r| r * r).sum::<f64>().sqrt()
    }
}

fn sum_sq(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum()
}

fn normal_equations(jac: &[Vec<f64>], r: &[f64], n: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut a = vec![vec![0.0; n]; n];
    let mut g = vec![0.0; n];
    for (row, &ri) in jac.iter().zip(r) {
        for i in 0..n {
            g[i] += row[i] * ri;
            for j in 0..n {
                a[i][j] += row[i] * row[j];
            }
        }
    }
    (a, g)
}

/// Solves `a·x = b` by Gaussian elimination with partial pivoting.
pub(crate) fn solve_linear(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        for row in (col + 1)..n {
            let f = m[row][col] / m[col][col];
            if f == 0.0 {
                continue;
            }
            let (upper, lower) = m.split_at_mut(row);
            for (dst, src) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *dst -= f * src;
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|k| m[i][k] * x[k]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Inverse of a small symmetric positive-definite matrix.
pub(crate) fn invert(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut inv = vec![vec![0.0; n]; n];
    for k in 0..n {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        let col = solve_linear(a, &e)?;
        for i in 0..n {
            inv[i][k] = col[i];
        }
    }
    Some(inv)
}

pub fn minimize<R, J>(residuals: R, jacobian: J, start: &[f64], opts: &LmOptions) -> LmOutcome
where
    R: Fn(&[f64]) -> Vec<f64>,
    J: Fn(&[f64]) -> Vec<Vec<f64>>,
{
    let n = start.len();
    let mut x = start.to_vec();
    let mut r = residuals(&x);
    let mut cost = sum_sq(&r);
    let mut lambda = opts.initial_damping;
    let mut iterations = 0;

    let (mut a, mut g) = normal_equations(&jacobian(&x), &r, n);
    while iterations < opts.max_iterations {
        let gnorm = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if gnorm < opts.gradient_tolerance {
            break;
        }
        iterations += 1;

        let mut accepted = false;
        let mut small_step = false;
        while lambda < 1e20 {
            let mut damped = a.clone();
            for i in 0..n {
                let d = a[i][i].max(1e-30);
                damped[i][i] = a[i][i] + lambda * d;
            }
            let neg_g: Vec<f64> = g.iter().map(|v| -v).collect();
            let Some(step) = solve_linear(&damped, &neg_g) else {
                lambda *= opts.damping_up;
                continue;
            };
            let candidate: Vec<f64> = x.iter().zip(&step).map(|(xi, si)| xi + si).collect();
            let r_new = residuals(&candidate);
            let cost_new = sum_sq(&r_new);
            if cost_new.is_finite() && cost_new <= cost {
                let step_norm = step.iter().map(|s| s * s).sum::<f64>().sqrt();
                let x_norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                small_step = step_norm <= opts.step_tolerance * (x_norm + opts.step_tolerance);
                x = candidate;
                r = r_new;
                cost = cost_new;
                lambda = (lambda / opts.damping_down).max(1e-15);
                accepted = true;
                break;
            }
            lambda *= opts.damping_up;
        }
        (a, g) = normal_equations(&jacobian(&x), &r, n);
        if !accepted || small_step {
            break;
        }
    }

    let gradient_norm = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    LmOutcome {
        params: x,
        residuals: r,
        normal_matrix: a,
        gradient_norm,
        iterations,
        converged: gradient_norm < opts.gradient_tolerance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_linear_system() {
        let a = vec![vec![4.0, 1.0], vec![1.0, 3.0]];
        let x = solve_linear(&a, &[1.0, 2.0]).unwrap();
        assert!((x[0] - 1.0 / 11.0).abs() < 1e-15);
        assert!((x[1] - 7.0 / 11.0).abs() < 1e-15);
        assert!(solve_linear(&[vec![0.0, 0.0], vec![0.0, 0.0]], &[1.0, 1.0]).is_none());
    }

    #[test]
    fn fits_exponential_decay() {
        let xs: Vec<f64> = (0..30).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * (-1.3 * x).exp()).collect();
        let res = |p: &[f64]| -> Vec<f64> { xs.iter().zip(&ys).map(|(x, y)| p[0] * (-p[1] * x).exp() - y).collect() };
        let jac = |p: &[f64]| -> Vec<Vec<f64>> {
            xs.iter()
                .map(|x| {
                    let e = (-p[1] * x).exp();
                    vec![e, -p[0] * x * e]
                })
                .collect()
        };
        let out = minimize(res, jac, &[1.0, 0.5], &LmOptions::default());
        assert!(out.converged);
        assert!((out.params[0] - 2.0).abs() < 1e-9);
        assert!((out.params[1] - 1.3).abs() < 1e-9);
    }
}
