//! Gaussian death fits and the one-parameter revival fit.
//!
//! Death: `y = A·exp(−B·x²) + C`.
//! Revival: `y = A·exp(−B[L² + (x−L)² − 2M·L·(x−L)]) + C` with A, B, C and the
//! turning thickness L frozen, fitting only the memory parameter M.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::lm::{self, LmOptions};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub params: BTreeMap<String, f64>,
    pub stderr: BTreeMap<String, f64>,
    pub residual_norm: f64,
    /// Infinity norm of the least-squares gradient at the reported optimum,
    /// in the solver's internal parameterization.
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.params.get(name).copied()
    }

    fn require(&self, name: &str) -> Result<f64> {
        self.get(name)
            .ok_or_else(|| Error::InvalidParameter(format!("fit has no parameter {name}")))
    }
}

/// `A·exp(−B·x²) + C`
pub fn gaussian_death(a: f64, b: f64, c: f64, x: f64) -> f64 {
    a * (-b * x * x).exp() + c
}

/// Revival model with turning point `l_max`.
pub fn gaussian_revival(a: f64, b: f64, c: f64, l_max: f64, m: f64, x: f64) -> f64 {
    let d = x - l_max;
    a * (-b * (l_max * l_max + d * d - 2.0 * m * l_max * d)).exp() + c
}

fn check_series(xs: &[f64], ys: &[f64], min_points: usize) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch(xs.len(), ys.len()));
    }
    if xs.len() < min_points {
        return Err(Error::DegenerateData(format!(
            "need at least {min_points} points, got {}",
            xs.len()
        )));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::DegenerateData("non-finite value".into()));
    }
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::DegenerateData("repeated abscissa".into()));
    }
    Ok(())
}

/// Best `(A, C, SSR)` for a fixed decay rate: the model is linear in A and C.
fn linear_amplitudes(us: &[f64], ys: &[f64], b: f64) -> (f64, f64, f64) {
    let n = us.len() as f64;
    let e: Vec<f64> = us.iter().map(|u| (-b * u * u).exp()).collect();
    let se: f64 = e.iter().sum();
    let see: f64 = e.iter().map(|v| v * v).sum();
    let sy: f64 = ys.iter().sum();
    let sey: f64 = e.iter().zip(ys).map(|(e, y)| e * y).sum();
    let det = n * see - se * se;
    let (a, c) = if det.abs() < 1e-300 {
        (0.0, sy / n)
    } else {
        ((n * sey - se * sy) / det, (see * sy - se * sey) / det)
    };
    let ssr = e.iter().zip(ys).map(|(e, y)| (a * e + c - y).powi(2)).sum();
    (a, c, ssr)
}

/// Fits `A·exp(−B·x²) + C` by Levenberg-Marquardt from a grid-seeded start.
pub fn fit_gaussian_death(xs: &[f64], ys: &[f64]) -> Result<FitResult> {
    check_series(xs, ys, 4)?;
    let (ymin, ymax) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &y| {
        (lo.min(y), hi.max(y))
    });
    let range = ymax - ymin;
    if range <= 1e-12 * ymax.abs().max(ymin.abs()).max(1.0) {
        return Err(Error::DegenerateData("constant ordinates".into()));
    }

    // Work on u = x / x_scale so the decay rate is O(1).
    let x_scale = xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let us: Vec<f64> = xs.iter().map(|x| x / x_scale).collect();

    // Seed: half-decay point of the curve's dominant direction.
    let mut order: Vec<usize> = (0..us.len()).collect();
    order.sort_by(|&i, &j| us[i].abs().total_cmp(&us[j].abs()));
    let decreasing = ys[order[0]] >= ys[*order.last().unwrap()];
    let half = if decreasing {
        ymin + 0.5 * range
    } else {
        ymax - 0.5 * range
    };
    let u_half = order
        .iter()
        .find(|&&i| if decreasing { ys[i] <= half } else { ys[i] >= half })
        .map(|&i| us[i].abs())
        .filter(|&u| u > 0.0)
        .unwrap_or(1.0);
    let b_seed = std::f64::consts::LN_2 / (u_half * u_half);

    let mut best = (f64::INFINITY, 0.0, 0.0, b_seed);
    for k in -8..=8 {
        let b = b_seed * 2f64.powf(k as f64 / 2.0);
        let (a, c, ssr) = linear_amplitudes(&us, ys, b);
        if ssr < best.0 {
            best = (ssr, a, c, b);
        }
    }
    let start = [best.1, best.3, best.2];

    let residuals = |p: &[f64]| -> Vec<f64> {
        us.iter()
            .zip(ys)
            .map(|(&u, &y)| gaussian_death(p[0], p[1], p[2], u) - y)
            .collect()
    };
    let jacobian = |p: &[f64]| -> Vec<Vec<f64>> {
        us.iter()
            .map(|&u| {
                let e = (-p[1] * u * u).exp();
                vec![e, -p[0] * u * u * e, 1.0]
            })
            .collect()
    };
    let out = lm::minimize(residuals, jacobian, &start, &LmOptions::default());
    if !out.converged {
        return Err(Error::NotConverged(out.iterations));
    }

    let stderr_scaled = standard_errors(&out.normal_matrix, out.residual_norm(), us.len());
    let s2 = x_scale * x_scale;
    let params = BTreeMap::from([
        ("A".to_string(), out.params[0]),
        ("B".to_string(), out.params[1] / s2),
        ("C".to_string(), out.params[2]),
    ]);
    let stderr = BTreeMap::from([
        ("A".to_string(), stderr_scaled[0]),
        ("B".to_string(), stderr_scaled[1] / s2),
        ("C".to_string(), stderr_scaled[2]),
    ]);
    Ok(FitResult {
        params,
        stderr,
        residual_norm: out.residual_norm(),
        gradient_norm: out.gradient_norm,
        iterations: out.iterations,
        converged: true,
    })
}

fn standard_errors(normal: &[Vec<f64>], residual_norm: f64, points: usize) -> Vec<f64> {
    let p = normal.len();
    let dof = points.saturating_sub(p).max(1) as f64;
    let s2 = residual_norm * residual_norm / dof;
    match lm::invert(normal) {
        Some(inv) => (0..p).map(|i| (s2 * inv[i][i]).max(0.0).sqrt()).collect(),
        None => vec![f64::INFINITY; p],
    }
}

/// Fits M in the revival model with A, B, C (from `death`) and `l_max` frozen.
/// The estimate is clamped to `[0, 1]`.
pub fn fit_revival(xs: &[f64], ys: &[f64], death: &FitResult, l_max: f64) -> Result<FitResult> {
    if !death.converged {
        return Err(Error::InvalidParameter("death fit did not converge".into()));
    }
    check_series(xs, ys, 1)?;
    let (a, b, c) = (death.require("A")?, death.require("B")?, death.require("C")?);

    let model = |m: f64, x: f64| gaussian_revival(a, b, c, l_max, m, x);
    let sensitivity = |m: f64, x: f64| {
        let d = x - l_max;
        a * (-b * (l_max * l_max + d * d - 2.0 * m * l_max * d)).exp() * 2.0 * b * l_max * d
    };

    // Change of the model over the whole admissible M range.
    let spread = xs
        .iter()
        .map(|&x| (model(1.0, x) - model(0.0, x)).abs())
        .fold(0.0f64, f64::max);
    let scale = a.abs().max(c.abs()).max(f64::MIN_POSITIVE);
    if !(spread > 1e-9 * scale) {
        return Err(Error::IllConditioned(
            "revival data are insensitive to the memory parameter".into(),
        ));
    }

    let ssr = |m: f64| -> f64 { xs.iter().zip(ys).map(|(&x, &y)| (model(m, x) - y).powi(2)).sum() };
    let seed = [0.0, 0.25, 0.5, 0.75, 1.0]
        .into_iter()
        .min_by(|&p, &q| ssr(p).total_cmp(&ssr(q)))
        .unwrap();

    let residuals = |p: &[f64]| -> Vec<f64> { xs.iter().zip(ys).map(|(&x, &y)| model(p[0], x) - y).collect() };
    let jacobian = |p: &[f64]| -> Vec<Vec<f64>> { xs.iter().map(|&x| vec![sensitivity(p[0], x)]).collect() };
    let out = lm::minimize(residuals, jacobian, &[seed], &LmOptions::default());
    if !out.converged {
        return Err(Error::NotConverged(out.iterations));
    }
    let m_hat = out.params[0].clamp(0.0, 1.0);
    let m_err = standard_errors(&out.normal_matrix, out.residual_norm(), xs.len())[0];

    let mut params = death.params.clone();
    params.insert("M".into(), m_hat);
    let mut stderr = death.stderr.clone();
    stderr.insert("M".into(), m_err);
    Ok(FitResult {
        params,
        stderr,
        residual_norm: ssr(m_hat).sqrt(),
        gradient_norm: out.gradient_norm,
        iterations: out.iterations,
        converged: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn grid(max: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| max * i as f64 / (n - 1) as f64).collect()
    }

    fn death_data(a: f64, b: f64, c: f64) -> (Vec<f64>, Vec<f64>) {
        let xs = grid(1500.0, 200);
        let ys = xs.iter().map(|&x| gaussian_death(a, b, c, x)).collect();
        (xs, ys)
    }

    #[test]
    fn recovers_entanglement_fit_parameters() {
        let (xs, ys) = death_data(0.507139, 1.29992e-6, 0.266244);
        let fit = fit_gaussian_death(&xs, &ys).unwrap();
        assert_relative_eq!(fit.get("A").unwrap(), 0.507139, max_relative = 1e-3);
        assert_relative_eq!(fit.get("B").unwrap(), 1.29992e-6, max_relative = 1e-3);
        assert_relative_eq!(fit.get("C").unwrap(), 0.266244, max_relative = 1e-3);
        assert!(fit.converged && fit.gradient_norm < 1e-8);
    }

    #[test]
    fn recovers_steering_fit_parameters() {
        for (a, b, c) in [(1.3911, 1.2999e-6, 0.77026), (1.07412, 1.29996e-6, 0.664544)] {
            let (xs, ys) = death_data(a, b, c);
            let fit = fit_gaussian_death(&xs, &ys).unwrap();
            assert_relative_eq!(fit.get("A").unwrap(), a, max_relative = 1e-3);
            assert_relative_eq!(fit.get("B").unwrap(), b, max_relative = 1e-3);
            assert_relative_eq!(fit.get("C").unwrap(), c, max_relative = 1e-3);
        }
    }

    #[test]
    fn recovers_rising_curve() {
        // Entanglement witness of a dephasing GHZ state rises as 1/4 − κ/2.
        let (xs, ys) = death_data(-0.5, 1.29992e-6, 0.25);
        let fit = fit_gaussian_death(&xs, &ys).unwrap();
        assert_relative_eq!(fit.get("A").unwrap(), -0.5, max_relative = 1e-6);
        assert_relative_eq!(fit.get("B").unwrap(), 1.29992e-6, max_relative = 1e-6);
        assert_relative_eq!(fit.get("C").unwrap(), 0.25, max_relative = 1e-6);
    }

    #[test]
    fn degenerate_inputs() {
        let xs = grid(10.0, 10);
        let flat = vec![0.3; 10];
        assert!(matches!(fit_gaussian_death(&xs, &flat), Err(Error::DegenerateData(_))));
        assert!(matches!(
            fit_gaussian_death(&xs[..3], &flat[..3]),
            Err(Error::DegenerateData(_))
        ));
        let dup = vec![0.0, 1.0, 1.0, 2.0];
        assert!(fit_gaussian_death(&dup, &[1.0, 0.5, 0.4, 0.1]).is_err());
    }

    fn revival_data(m: f64, noise: f64, seed: u64) -> (FitResult, Vec<f64>, Vec<f64>) {
        let (a, b, c, l) = (0.507139, 1.29992e-6, 0.266244, 1500.0);
        let (xs, ys) = death_data(a, b, c);
        let death = fit_gaussian_death(&xs, &ys).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, noise * a).unwrap();
        let rx: Vec<f64> = (1..200).map(|i| l + l * i as f64 / 199.0).collect();
        let ry = rx
            .iter()
            .map(|&x| gaussian_revival(a, b, c, l, m, x) + if noise > 0.0 { normal.sample(&mut rng) } else { 0.0 })
            .collect();
        (death, rx, ry)
    }

    #[test]
    fn revival_round_trip() {
        for m in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let (death, rx, ry) = revival_data(m, 0.0, 1);
            let fit = fit_revival(&rx, &ry, &death, 1500.0).unwrap();
            assert!((fit.get("M").unwrap() - m).abs() < 1e-3, "m = {m}");
            let (death, rx, ry) = revival_data(m, 0.01, 7);
            let fit = fit_revival(&rx, &ry, &death, 1500.0).unwrap();
            assert!((fit.get("M").unwrap() - m).abs() < 0.05, "noisy m = {m}");
        }
    }

    #[test]
    fn revival_rejects_flat_surface() {
        let (death, rx, ry) = revival_data(0.5, 0.0, 1);
        // With a zero turning point M drops out of the model.
        assert!(matches!(
            fit_revival(&rx, &ry, &death, 0.0),
            Err(Error::IllConditioned(_))
        ));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (xs, mut ys) = death_data(1.3911, 1.2999e-6, 0.77026);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let normal = Normal::new(0.0, 0.01).unwrap();
        for y in ys.iter_mut() {
            *y += normal.sample(&mut rng);
        }
        let fit = fit_gaussian_death(&xs, &ys).unwrap();
        let scale = 1500.0f64 * 1500.0;
        let p = [
            fit.get("A").unwrap(),
            fit.get("B").unwrap() * scale,
            fit.get("C").unwrap(),
        ];
        let cost = |q: [f64; 3]| -> f64 {
            xs.iter()
                .zip(&ys)
                .map(|(&x, &y)| (gaussian_death(q[0], q[1], q[2], x / 1500.0) - y).powi(2))
                .sum::<f64>()
                * 0.5
        };
        for i in 0..3 {
            let h = 1e-6;
            let (mut up, mut dn) = (p, p);
            up[i] += h;
            dn[i] -= h;
            let g = (cost(up) - cost(dn)) / (2.0 * h);
            assert!(g.abs() < 1e-8, "component {i}: {g}");
        }
    }
}
