//! Environment spectra, the decoherence function κ and the dephasing channel on
//! Alice's qubit.
//!
//! The environment is a bivariate Gaussian over the two frequencies (Alice's
//! ω₁ and the shared Bob/Charlie ω₂). κ is its characteristic function
//! evaluated at the accumulated dephasing times:
//!
//! ```text
//! κ(t₁, t₂) = ∫ dω₁ dω₂ F(ω₁, ω₂) exp[−i(ω₁t₁ + ω₂t₂)]
//!           = exp[−i(μ₁t₁ + μ₂t₂)] · exp[−½(σ₁²t₁² + σ₂²t₂² + 2ρσ₁σ₂t₁t₂)]
//! ```
//!
//! With σ₁ = σ₂ and ρ = −M the modulus reproduces the revival exponent
//! `t₁² + t₂² − 2M·t₁t₂`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, DensityMatrix};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Quartz birefringence used by default.
pub const DEFAULT_DELTA_N: f64 = 0.009;
/// Default photon wavelength, metres.
pub const DEFAULT_WAVELENGTH: f64 = 810e-9;
/// Gaussian decay rate per squared wavelength of effective thickness,
/// taken from the entanglement-witness death fit.
pub const DEFAULT_DECAY_RATE: f64 = 1.29992e-6;

const KAPPA_TOL: f64 = 1e-12;

/// Bivariate Gaussian joint frequency distribution F(ω₁, ω₂).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentModel {
    /// Centre frequencies, rad/s.
    pub mu1: f64,
    pub mu2: f64,
    /// Spectral widths, rad/s.
    pub sigma1: f64,
    pub sigma2: f64,
    /// Correlation coefficient between ω₁ and ω₂.
    pub corr: f64,
}

impl EnvironmentModel {
    pub fn new(mu1: f64, mu2: f64, sigma1: f64, sigma2: f64, corr: f64) -> Result<Self> {
        let env = Self {
            mu1,
            mu2,
            sigma1,
            sigma2,
            corr,
        };
        env.validate()?;
        Ok(env)
    }

    /// Zero-mean environment with equal widths.
    pub fn symmetric(sigma: f64, corr: f64) -> Result<Self> {
        Self::new(0.0, 0.0, sigma, sigma, corr)
    }

    /// Zero-mean equal-width environment whose |κ₁| decays as
    /// `exp(−rate·L²)` on the given schedule's thickness axis.
    pub fn from_decay_rate(rate: f64, schedule: &EvolutionSchedule, corr: f64) -> Result<Self> {
        if !(rate > 0.0) {
            return Err(Error::InvalidParameter(format!("decay rate {rate}")));
        }
        let sigma = (2.0 * rate).sqrt() / schedule.time_per_thickness();
        Self::symmetric(sigma, corr)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.mu1, self.mu2, self.sigma1, self.sigma2, self.corr]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("non-finite environment value".into()));
        }
        if self.sigma1 <= 0.0 || self.sigma2 <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "spectral widths must be positive (got {}, {})",
                self.sigma1, self.sigma2
            )));
        }
        if self.corr.abs() > 1.0 {
            return Err(Error::InvalidParameter(format!(
                "correlation {} outside [-1, 1]",
                self.corr
            )));
        }
        Ok(())
    }

    /// `exp(−rate·L²)` decay rate of |κ₁| in thickness units of `schedule`.
    pub fn decay_rate(&self, schedule: &EvolutionSchedule) -> f64 {
        let s = self.sigma1 * schedule.time_per_thickness();
        0.5 * s * s
    }
}

/// Thickness grids for the two quartz-plate stages plus unit conversion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionSchedule {
    /// Effective thicknesses of the 0° stage, in wavelengths.
    pub l1_grid: Vec<f64>,
    /// Effective thicknesses of the 90° stage, in wavelengths.
    pub l2_grid: Vec<f64>,
    pub delta_n: f64,
    /// Wavelength in metres.
    pub wavelength: f64,
}

impl EvolutionSchedule {
    pub fn new(l1_grid: Vec<f64>, l2_grid: Vec<f64>, delta_n: f64, wavelength: f64) -> Result<Self> {
        let s = Self {
            l1_grid,
            l2_grid,
            delta_n,
            wavelength,
        };
        s.validate()?;
        Ok(s)
    }

    /// Equal-length stages: `points` thicknesses on `[0, l_max]` for the 0°
    /// stage, then `points − 1` on `(0, l_max]` for the 90° stage (its zero
    /// point coincides with the end of the first stage).
    pub fn symmetric(l_max: f64, points: usize, delta_n: f64, wavelength: f64) -> Result<Self> {
        Self::staged(l_max, l_max, points, delta_n, wavelength)
    }

    pub fn staged(l1_max: f64, l2_max: f64, points: usize, delta_n: f64, wavelength: f64) -> Result<Self> {
        if points == 0 {
            return Err(Error::EmptyGrid);
        }
        let l1 = linspace(l1_max, points);
        let l2 = linspace(l2_max, points).into_iter().skip(1).collect();
        Self::new(l1, l2, delta_n, wavelength)
    }

    pub fn validate(&self) -> Result<()> {
        if self.l1_grid.is_empty() {
            return Err(Error::EmptyGrid);
        }
        for grid in [&self.l1_grid, &self.l2_grid] {
            if grid.iter().any(|&l| !(l >= 0.0) || !l.is_finite()) {
                return Err(Error::InvalidParameter("negative or non-finite thickness".into()));
            }
            if grid.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::InvalidParameter("thickness grid must be nondecreasing".into()));
            }
        }
        if !(self.delta_n > 0.0) {
            return Err(Error::InvalidParameter(format!("delta_n = {}", self.delta_n)));
        }
        if !(self.wavelength > 0.0) {
            return Err(Error::InvalidParameter(format!("wavelength = {}", self.wavelength)));
        }
        Ok(())
    }

    /// Seconds of dephasing per wavelength of effective thickness.
    pub fn time_per_thickness(&self) -> f64 {
        self.delta_n * self.wavelength / SPEED_OF_LIGHT
    }

    /// Final thickness of the 0° stage.
    pub fn l1_final(&self) -> f64 {
        self.l1_grid.last().copied().unwrap_or(0.0)
    }

    pub fn l2_final(&self) -> f64 {
        self.l2_grid.last().copied().unwrap_or(0.0)
    }
}

fn linspace(max: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![0.0];
    }
    let n = (points - 1) as f64;
    (0..points).map(|i| max * i as f64 / n).collect()
}

/// `t = Δn·(l_eff·λ)/c`
pub fn thickness_to_time(l_eff: f64, schedule: &EvolutionSchedule) -> f64 {
    schedule.delta_n * (l_eff * schedule.wavelength) / SPEED_OF_LIGHT
}

fn check_times(t1: f64, t2: f64) -> Result<()> {
    if !(t1 >= 0.0) || !(t2 >= 0.0) {
        return Err(Error::InvalidParameter(format!("negative time ({t1}, {t2})")));
    }
    Ok(())
}

/// Closed-form characteristic function of the Gaussian environment.
pub fn kappa(env: &EnvironmentModel, t1: f64, t2: f64) -> Result<Complex64> {
    env.validate()?;
    check_times(t1, t2)?;
    let a = env.sigma1 * t1;
    let b = env.sigma2 * t2;
    let exponent = -0.5 * (a * a + b * b + 2.0 * env.corr * a * b);
    let phase = -(env.mu1 * t1 + env.mu2 * t2);
    Ok(Complex64::from_polar(exponent.exp(), phase))
}

/// Gauss-Hermite nodes and weights for the weight function `exp(−x²)`.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let nf = n as f64;
    let mut z: f64 = 0.0;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// κ by tensor-product Gauss-Hermite quadrature of the defining integral.
///
/// Independent of [`kappa`]: the Gaussian is sampled through its Cholesky
/// factor and the oscillatory integrand is summed directly. Perfectly
/// correlated environments collapse to a one-dimensional rule.
pub fn kappa_quadrature_oracle(env: &EnvironmentModel, t1: f64, t2: f64, nodes: usize) -> Result<Complex64> {
    env.validate()?;
    check_times(t1, t2)?;
    if nodes < 16 {
        return Err(Error::InvalidParameter(format!("need at least 16 nodes, got {nodes}")));
    }
    let (x, w) = gauss_hermite(nodes);
    let sqrt2 = std::f64::consts::SQRT_2;
    let norm = std::f64::consts::PI.sqrt();
    let residual = (1.0 - env.corr * env.corr).max(0.0).sqrt();

    let integrand = |z1: f64, z2: f64| -> Complex64 {
        let w1 = env.mu1 + env.sigma1 * z1;
        let w2 = env.mu2 + env.sigma2 * (env.corr * z1 + residual * z2);
        Complex64::from_polar(1.0, -(w1 * t1 + w2 * t2))
    };

    let mut sum = Complex64::new(0.0, 0.0);
    if residual == 0.0 {
        for (xi, wi) in x.iter().zip(&w) {
            sum += integrand(sqrt2 * xi, 0.0) * wi;
        }
        Ok(sum / norm)
    } else {
        for (xi, wi) in x.iter().zip(&w) {
            for (xj, wj) in x.iter().zip(&w) {
                sum += integrand(sqrt2 * xi, sqrt2 * xj) * (wi * wj);
            }
        }
        Ok(sum / (norm * norm))
    }
}

/// Scales every coherence between the `qubit = 0` and `qubit = 1` blocks by
/// `k` (and by `k̄` for the adjoint block). Populations are untouched.
pub fn dephase_qubit(rho: &DensityMatrix, qubit: usize, k: Complex64) -> Result<DensityMatrix> {
    let n = rho.qubits();
    if qubit >= n {
        return Err(Error::InvalidSubsystem {
            index: qubit,
            qubits: n,
        });
    }
    if !(k.norm() <= 1.0 + KAPPA_TOL) {
        return Err(Error::InvalidParameter(format!("|k| = {} exceeds 1", k.norm())));
    }
    let mask = 1usize << (n - 1 - qubit);
    let dim = rho.dim();
    let src = rho.matrix();
    let mut out = ComplexMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            let v = src[(i, j)];
            out[(i, j)] = match (i & mask != 0, j & mask != 0) {
                (false, true) => v * k,
                (true, false) => v * k.conj(),
                _ => v,
            };
        }
    }
    Ok(DensityMatrix::from_trusted(out))
}

/// Dephasing on Alice's qubit of a tripartite state.
pub fn dephase_a(rho: &DensityMatrix, k: Complex64) -> Result<DensityMatrix> {
    if rho.dim() != 8 {
        return Err(Error::DimensionMismatch(rho.dim(), 8));
    }
    dephase_qubit(rho, 0, k)
}
