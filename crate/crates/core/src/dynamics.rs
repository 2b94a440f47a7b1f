//! Death-and-revival scans over the two quartz-plate stages.
//!
//! During the 0° stage only t₁ grows. During the 90° stage t₁ stays frozen at
//! the first stage's final value and t₂ grows, so the decoherence function
//! along a scan is `κ(t₁(L₁), 0)` followed by `κ(t₁(L_max), t₂(L₂))`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decoherence::{dephase_a, dephase_qubit, kappa, thickness_to_time, EnvironmentModel, EvolutionSchedule};
use crate::error::{Error, Result};
use crate::linalg::{trace_distance, DensityMatrix};
use crate::state::{ghz_mixed, GhzMixedParams};
use crate::witnesses::{evaluate_witnesses, MeasurementAssignment, Party, WitnessReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Stage {
    U1,
    U2,
}

impl Stage {
    pub fn label(self) -> &'static str {
        match self {
            Stage::U1 => "u1",
            Stage::U2 => "u2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "u1" => Some(Stage::U1),
            "u2" => Some(Stage::U2),
            _ => None,
        }
    }
}

/// One grid point of a scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    /// Total effective thickness so far, in wavelengths.
    pub l_total: f64,
    pub stage: Stage,
    pub kappa: Complex64,
    pub report: WitnessReport,
}

/// Grid position along the two-stage schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
struct GridPoint {
    stage: Stage,
    l_stage: f64,
}

fn grid_points(sched: &EvolutionSchedule) -> Vec<GridPoint> {
    sched
        .l1_grid
        .iter()
        .map(|&l| GridPoint {
            stage: Stage::U1,
            l_stage: l,
        })
        .chain(sched.l2_grid.iter().map(|&l| GridPoint {
            stage: Stage::U2,
            l_stage: l,
        }))
        .collect()
}

fn kappa_on_schedule(env: &EnvironmentModel, sched: &EvolutionSchedule, g: GridPoint) -> Result<(f64, Complex64)> {
    match g.stage {
        Stage::U1 => Ok((g.l_stage, kappa(env, thickness_to_time(g.l_stage, sched), 0.0)?)),
        Stage::U2 => {
            let l1 = sched.l1_final();
            let k = kappa(env, thickness_to_time(l1, sched), thickness_to_time(g.l_stage, sched))?;
            Ok((l1 + g.l_stage, k))
        }
    }
}

/// κ along the schedule as `(l_total, stage, κ)` in grid order.
pub fn kappa_trajectory(env: &EnvironmentModel, sched: &EvolutionSchedule) -> Result<Vec<(f64, Stage, Complex64)>> {
    env.validate()?;
    sched.validate()?;
    grid_points(sched)
        .into_iter()
        .map(|g| kappa_on_schedule(env, sched, g).map(|(l, k)| (l, g.stage, k)))
        .collect()
}

/// A quantity tracked for sign changes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Series {
    Entanglement,
    OneSided(Party),
    TwoSided(Party),
}

impl Series {
    pub fn value(self, report: &WitnessReport) -> f64 {
        match self {
            Series::Entanglement => report.ew,
            Series::OneSided(p) => report.part(p).s1sdi,
            Series::TwoSided(p) => report.part(p).s2sdi,
        }
    }

    pub fn all() -> Vec<Series> {
        let mut v = vec![Series::Entanglement];
        for p in Party::ALL {
            v.push(Series::OneSided(p));
            v.push(Series::TwoSided(p));
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Crossing {
    /// Witness goes from detecting (< 0) to not detecting.
    Death,
    /// Witness goes from not detecting to detecting.
    Revival,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub series: Series,
    pub kind: Crossing,
    pub l_total: f64,
}

/// All sign changes found in a scan, in order of increasing thickness per series.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TransitionSet {
    pub transitions: Vec<Transition>,
}

impl TransitionSet {
    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn for_series(&self, series: Series) -> Vec<Transition> {
        self.transitions
            .iter()
            .filter(|t| t.series == series)
            .copied()
            .collect()
    }

    pub fn first(&self, series: Series, kind: Crossing) -> Option<f64> {
        self.transitions
            .iter()
            .find(|t| t.series == series && t.kind == kind)
            .map(|t| t.l_total)
    }
}

/// A fully specified scan: initial state, environment, schedule and the
/// observables used by the steering witnesses.
#[derive(Debug, Clone)]
pub struct Scanner {
    pub params: GhzMixedParams,
    pub env: EnvironmentModel,
    pub schedule: EvolutionSchedule,
    pub assignment: MeasurementAssignment,
    initial: DensityMatrix,
}

impl Scanner {
    pub fn new(
        params: GhzMixedParams,
        env: EnvironmentModel,
        schedule: EvolutionSchedule,
        assignment: MeasurementAssignment,
    ) -> Result<Self> {
        env.validate()?;
        schedule.validate()?;
        let initial = ghz_mixed(params)?;
        Ok(Self {
            params,
            env,
            schedule,
            assignment,
            initial,
        })
    }

    pub fn initial_state(&self) -> &DensityMatrix {
        &self.initial
    }

    fn point(&self, g: GridPoint) -> Result<CurvePoint> {
        let (l_total, k) = kappa_on_schedule(&self.env, &self.schedule, g)?;
        let rho = dephase_a(&self.initial, k)?;
        Ok(CurvePoint {
            l_total,
            stage: g.stage,
            kappa: k,
            report: evaluate_witnesses(&rho, &self.assignment)?,
        })
    }

    /// Evaluates every grid point; results are in grid order regardless of
    /// how rayon schedules the work.
    pub fn scan(&self) -> Result<Vec<CurvePoint>> {
        grid_points(&self.schedule)
            .into_par_iter()
            .map(|g| self.point(g))
            .collect()
    }

    /// Witnesses at an arbitrary total thickness along the two-stage path.
    pub fn evaluate_at(&self, l_total: f64) -> Result<CurvePoint> {
        let l1 = self.schedule.l1_final();
        let g = if l_total <= l1 || self.schedule.l2_grid.is_empty() {
            GridPoint {
                stage: Stage::U1,
                l_stage: l_total.max(0.0),
            }
        } else {
            GridPoint {
                stage: Stage::U2,
                l_stage: l_total - l1,
            }
        };
        self.point(g)
    }

    /// Locates every sign change of every series between adjacent grid points
    /// and refines it by bisection on the continuous model.
    pub fn find_transitions(&self, curve: &[CurvePoint]) -> Result<TransitionSet> {
        let span = curve.last().map(|p| p.l_total).unwrap_or(0.0).max(1.0);
        let tol = 1e-9 * span;
        let mut transitions = Vec::new();
        for series in Series::all() {
            for pair in curve.windows(2) {
                let (lo, hi) = (&pair[0], &pair[1]);
                let before = series.value(&lo.report) < 0.0;
                let after = series.value(&hi.report) < 0.0;
                if before == after {
                    continue;
                }
                let (mut a, mut b) = (lo.l_total, hi.l_total);
                while b - a > tol {
                    let mid = 0.5 * (a + b);
                    let detecting = series.value(&self.evaluate_at(mid)?.report) < 0.0;
                    if detecting == before {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                transitions.push(Transition {
                    series,
                    kind: if before { Crossing::Death } else { Crossing::Revival },
                    l_total: 0.5 * (a + b),
                });
            }
        }
        Ok(TransitionSet { transitions })
    }
}

/// Trace distance between two probe states on Alice's qubit, both evolved by
/// the schedule's dephasing.
pub fn pair_trajectory(
    env: &EnvironmentModel,
    sched: &EvolutionSchedule,
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
) -> Result<Vec<(f64, f64)>> {
    if rho1.dim() != 2 || rho2.dim() != 2 {
        return Err(Error::DimensionMismatch(rho1.dim().max(rho2.dim()), 2));
    }
    kappa_trajectory(env, sched)?
        .into_iter()
        .map(|(l, _, k)| {
            let a = dephase_qubit(rho1, 0, k)?;
            let b = dephase_qubit(rho2, 0, k)?;
            Ok((l, trace_distance(&a, &b)?))
        })
        .collect()
}

/// `|+⟩` and `|−⟩` on one qubit.
pub fn equatorial_probes() -> (DensityMatrix, DensityMatrix) {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let plus = DensityMatrix::pure(&[Complex64::new(h, 0.0), Complex64::new(h, 0.0)]).expect("normalized");
    let minus = DensityMatrix::pure(&[Complex64::new(h, 0.0), Complex64::new(-h, 0.0)]).expect("normalized");
    (plus, minus)
}

/// D along the schedule for the `|+⟩/|−⟩` probe pair.
pub fn trace_distance_trajectory(env: &EnvironmentModel, sched: &EvolutionSchedule) -> Result<Vec<(f64, f64)>> {
    let (plus, minus) = equatorial_probes();
    pair_trajectory(env, sched, &plus, &minus)
}

/// Convenience accessor for witness columns, used by fits and reports.
pub fn column(curve: &[CurvePoint], series: Series, stage: Option<Stage>) -> (Vec<f64>, Vec<f64>) {
    curve
        .iter()
        .filter(|p| stage.is_none_or(|s| p.stage == s))
        .map(|p| (p.l_total, series.value(&p.report)))
        .unzip()
}
