//! Run configuration: defaults, presets, JSON config file and flag overrides.

use std::f64::consts::FRAC_PI_4;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::decoherence::{
    EnvironmentModel, EvolutionSchedule, DEFAULT_DECAY_RATE, DEFAULT_DELTA_N, DEFAULT_WAVELENGTH,
};
use crate::dynamics::Scanner;
use crate::error::{Error, Result};
use crate::state::{GhzMixedParams, PauliLabel};
use crate::witnesses::MeasurementAssignment;

/// Built-in scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Preset {
    /// Pure GHZ with a perfectly anticorrelated environment.
    Fig3,
    /// GHZ-type mixed state with η = 0.66.
    Fig4,
}

/// Flat config document. Every key is optional; absent keys keep defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub theta: Option<f64>,
    pub eta: Option<f64>,
    pub mu1: Option<f64>,
    pub mu2: Option<f64>,
    pub sigma1: Option<f64>,
    pub sigma2: Option<f64>,
    pub corr: Option<f64>,
    /// Used when no sigma is given: |κ₁| = exp(−rate·L²).
    pub decay_rate: Option<f64>,
    pub l_max: Option<f64>,
    pub points: Option<usize>,
    pub delta_n: Option<f64>,
    pub wavelength: Option<f64>,
    pub assignment_a: Option<[PauliLabel; 3]>,
    pub assignment_b: Option<[PauliLabel; 3]>,
    pub assignment_c: Option<[PauliLabel; 3]>,
    pub seed: Option<u64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> std::result::Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
    }
}

/// Fully resolved run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: GhzMixedParams,
    pub env: EnvironmentModel,
    pub schedule: EvolutionSchedule,
    pub assignment: MeasurementAssignment,
    pub seed: u64,
}

/// Values still to be merged; `None` means "not set at this layer".
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub theta: Option<f64>,
    pub eta: Option<f64>,
    pub corr: Option<f64>,
    pub l_max: Option<f64>,
    pub points: Option<usize>,
    pub seed: Option<u64>,
}

macro_rules! merge {
    ($dst:expr, $src:expr, $($field:ident),+) => {
        $( if let Some(v) = $src.$field { $dst.$field = Some(v); } )+
    };
}

fn preset_layer(p: Preset) -> ConfigFile {
    let mut c = ConfigFile {
        theta: Some(FRAC_PI_4),
        corr: Some(-1.0),
        ..Default::default()
    };
    c.eta = Some(match p {
        Preset::Fig3 => 1.0,
        Preset::Fig4 => 0.66,
    });
    c
}

impl RunConfig {
    /// Layers, lowest priority first: defaults, config file, preset, flags.
    pub fn resolve(file: Option<&ConfigFile>, preset: Option<Preset>, flags: &Overrides) -> Result<Self> {
        let mut c = ConfigFile::default();
        if let Some(f) = file {
            merge!(
                c,
                f.clone(),
                theta,
                eta,
                mu1,
                mu2,
                sigma1,
                sigma2,
                corr,
                decay_rate,
                l_max,
                points,
                delta_n,
                wavelength,
                assignment_a,
                assignment_b,
                assignment_c,
                seed
            );
        }
        if let Some(p) = preset {
            merge!(c, preset_layer(p), theta, eta, corr);
        }
        merge!(c, flags.clone(), theta, eta, corr, l_max, points, seed);

        let params = GhzMixedParams::new(c.theta.unwrap_or(FRAC_PI_4), c.eta.unwrap_or(1.0))?;
        let points = c.points.unwrap_or(200);
        if points == 0 {
            return Err(Error::InvalidParameter("points must be at least 1".into()));
        }
        let schedule = EvolutionSchedule::symmetric(
            c.l_max.unwrap_or(1500.0),
            points,
            c.delta_n.unwrap_or(DEFAULT_DELTA_N),
            c.wavelength.unwrap_or(DEFAULT_WAVELENGTH),
        )?;
        let corr = c.corr.unwrap_or(-1.0);
        let env = match (c.sigma1, c.sigma2) {
            (None, None) => {
                let base =
                    EnvironmentModel::from_decay_rate(c.decay_rate.unwrap_or(DEFAULT_DECAY_RATE), &schedule, corr)?;
                EnvironmentModel::new(
                    c.mu1.unwrap_or(0.0),
                    c.mu2.unwrap_or(0.0),
                    base.sigma1,
                    base.sigma2,
                    corr,
                )?
            }
            (s1, s2) => {
                if c.decay_rate.is_some() {
                    return Err(Error::InvalidParameter(
                        "give either decay_rate or sigma1/sigma2, not both".into(),
                    ));
                }
                let s1 = s1.or(s2).expect("one width present");
                let s2 = s2.unwrap_or(s1);
                EnvironmentModel::new(c.mu1.unwrap_or(0.0), c.mu2.unwrap_or(0.0), s1, s2, corr)?
            }
        };
        let d = MeasurementAssignment::default();
        let assignment = MeasurementAssignment {
            a: c.assignment_a.unwrap_or(d.a),
            b: c.assignment_b.unwrap_or(d.b),
            c: c.assignment_c.unwrap_or(d.c),
        };
        Ok(Self {
            params,
            env,
            schedule,
            assignment,
            seed: c.seed.unwrap_or(0),
        })
    }

    pub fn scanner(&self) -> Result<Scanner> {
        Scanner::new(self.params, self.env, self.schedule.clone(), self.assignment)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve() {
        let c = RunConfig::resolve(None, None, &Overrides::default()).unwrap();
        assert_eq!(c.params.eta, 1.0);
        assert_eq!(c.schedule.l1_grid.len(), 200);
        assert!((c.env.decay_rate(&c.schedule) - DEFAULT_DECAY_RATE).abs() < 1e-18);
    }

    #[test]
    fn layers_override_in_order() {
        let file = ConfigFile {
            eta: Some(0.2),
            points: Some(10),
            corr: Some(-0.3),
            ..Default::default()
        };
        let c = RunConfig::resolve(Some(&file), Some(Preset::Fig4), &Overrides::default()).unwrap();
        assert_eq!(c.params.eta, 0.66);
        assert_eq!(c.schedule.l1_grid.len(), 10);
        let flags = Overrides {
            eta: Some(0.5),
            ..Default::default()
        };
        let c = RunConfig::resolve(Some(&file), Some(Preset::Fig4), &flags).unwrap();
        assert_eq!(c.params.eta, 0.5);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<ConfigFile>(r#"{"eta": 0.5, "etaa": 1}"#).is_err());
        let c: ConfigFile = serde_json::from_str(r#"{"assignment_a": ["+X", "-Y", "+Z"]}"#).unwrap();
        assert_eq!(
            c.assignment_a.unwrap()[1],
            PauliLabel::minus(crate::state::PauliAxis::Y)
        );
    }

    #[test]
    fn invalid_values_rejected() {
        let bad = ConfigFile {
            eta: Some(1.5),
            ..Default::default()
        };
        assert!(RunConfig::resolve(Some(&bad), None, &Overrides::default()).is_err());
        let both = ConfigFile {
            sigma1: Some(1e12),
            decay_rate: Some(1e-6),
            ..Default::default()
        };
        assert!(RunConfig::resolve(Some(&both), None, &Overrides::default()).is_err());
    }
}
