//! Non-Markovianity measures: BLP information backflow from trace-distance
//! trajectories and the operational memory degree M from witness fits.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decoherence::{EnvironmentModel, EvolutionSchedule};
use crate::dynamics::pair_trajectory;
use crate::error::{Error, Result};
use crate::estimation::fit::{fit_revival, FitResult};
use crate::linalg::DensityMatrix;

/// Antipodal pure probe pair on Alice's Bloch sphere, given by the polar and
/// azimuthal angles of the first state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbePair {
    pub polar: f64,
    pub azimuth: f64,
}

impl ProbePair {
    /// The `|+⟩/|−⟩` pair.
    pub const EQUATORIAL: ProbePair = ProbePair {
        polar: FRAC_PI_2,
        azimuth: 0.0,
    };
    /// The `|0⟩/|1⟩` pair.
    pub const POLAR: ProbePair = ProbePair {
        polar: 0.0,
        azimuth: 0.0,
    };

    pub fn bloch_vector(&self) -> [f64; 3] {
        let (s, c) = self.polar.sin_cos();
        [s * self.azimuth.cos(), s * self.azimuth.sin(), c]
    }

    pub fn states(&self) -> (DensityMatrix, DensityMatrix) {
        let half = 0.5 * self.polar;
        let phase = Complex64::from_polar(1.0, self.azimuth);
        let a = [Complex64::new(half.cos(), 0.0), phase * half.sin()];
        let b = [Complex64::new(half.sin(), 0.0), -phase * half.cos()];
        (
            DensityMatrix::pure(&a).expect("unit vector"),
            DensityMatrix::pure(&b).expect("unit vector"),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlpResult {
    pub n_value: f64,
    /// Maximal runs `(l_start, l_end)` over which D strictly increases.
    pub revival_intervals: Vec<(f64, f64)>,
    pub probe_pair: Option<ProbePair>,
}

/// Sums the positive increments of a sampled D trajectory.
pub fn blp_measure(trajectory: &[(f64, f64)]) -> Result<BlpResult> {
    if trajectory.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "trajectory needs at least 2 points, got {}",
            trajectory.len()
        )));
    }
    if trajectory.iter().any(|(l, d)| !l.is_finite() || !d.is_finite()) {
        return Err(Error::NonFinite);
    }
    if trajectory.windows(2).any(|w| w[1].0 < w[0].0) {
        return Err(Error::InvalidParameter("trajectory is not sorted by thickness".into()));
    }
    let mut n_value = 0.0;
    let mut intervals = Vec::new();
    let mut open: Option<f64> = None;
    for w in trajectory.windows(2) {
        let inc = w[1].1 - w[0].1;
        if inc > 0.0 {
            n_value += inc;
            open.get_or_insert(w[0].0);
        } else if let Some(start) = open.take() {
            intervals.push((start, w[0].0));
        }
    }
    if let Some(start) = open {
        intervals.push((start, trajectory[trajectory.len() - 1].0));
    }
    Ok(BlpResult {
        n_value,
        revival_intervals: intervals,
        probe_pair: None,
    })
}

/// BLP value for one probe pair evolved along the schedule.
pub fn blp_for_pair(env: &EnvironmentModel, sched: &EvolutionSchedule, pair: ProbePair) -> Result<BlpResult> {
    let (r1, r2) = pair.states();
    let mut res = blp_measure(&pair_trajectory(env, sched, &r1, &r2)?)?;
    res.probe_pair = Some(pair);
    Ok(res)
}

fn sampled_pair(seed: u64, index: usize) -> ProbePair {
    if index == 0 {
        return ProbePair::EQUATORIAL;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let z: f64 = rng.random_range(-1.0..=1.0);
    let azimuth = rng.random_range(0.0..2.0 * PI);
    ProbePair {
        polar: z.clamp(-1.0, 1.0).acos(),
        azimuth,
    }
}

/// Maximizes the BLP value over `samples` antipodal pure pairs. Sample 0 is
/// always the `|+⟩/|−⟩` pair; the rest are uniform on the sphere, each from
/// its own RNG stream. Ties go to the lowest sample index.
pub fn blp_optimize_pair(
    env: &EnvironmentModel,
    sched: &EvolutionSchedule,
    samples: usize,
    seed: u64,
) -> Result<BlpResult> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be at least 1".into()));
    }
    let results = (0..samples)
        .into_par_iter()
        .map(|i| blp_for_pair(env, sched, sampled_pair(seed, i)))
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, r) in results.iter().enumerate() {
        if r.n_value > results[best].n_value {
            best = i;
        }
    }
    Ok(results.into_iter().nth(best).expect("nonempty"))
}

/// Memory degree from a revival segment, with the death-fit parameters frozen.
pub fn operational_m(death_fit: &FitResult, revival_points: &[(f64, f64)], l_max: f64) -> Result<f64> {
    if revival_points.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = revival_points.iter().copied().unzip();
    let fit = fit_revival(&xs, &ys, death_fit, l_max)?;
    fit.get("M")
        .ok_or_else(|| Error::InvalidParameter("fit did not report M".into()))
}
