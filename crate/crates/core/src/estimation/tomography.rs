//! Simulated three-qubit Pauli tomography, linear-inversion reconstruction and
//! Monte Carlo error bars.
//!
//! The 27 settings are all Pauli triples from {X, Y, Z}³ in lexicographic
//! order. Outcome index bit `2 − k` is set when qubit `k` reads −1, so
//! outcome 0 is `+++` and outcome 7 is `−−−`.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, tensor, ComplexMatrix, DensityMatrix};
use crate::state::{PauliAxis, PauliLabel};
use crate::witnesses::entanglement_witness;

pub const QUBITS: usize = 3;
pub const OUTCOMES: usize = 8;
pub const SETTINGS: usize = 27;

const FORMAT_HEADER: &str = "# tristeer-counts format_version=1";

/// Stream offset separating resampling streams from acquisition streams.
const RESAMPLE_STREAM_BASE: u64 = 1 << 32;

pub type Setting = [PauliAxis; QUBITS];

pub fn settings() -> Vec<Setting> {
    let axes = PauliAxis::MEASURABLE;
    let mut out = Vec::with_capacity(SETTINGS);
    for &a in &axes {
        for &b in &axes {
            for &c in &axes {
                out.push([a, b, c]);
            }
        }
    }
    out
}

pub fn setting_label(s: &Setting) -> String {
    s.iter().map(|a| a.symbol()).collect()
}

fn parse_setting(s: &str) -> Result<Setting> {
    let axes: Vec<PauliAxis> = s
        .chars()
        .map(|c| match PauliAxis::from_symbol(c) {
            Some(PauliAxis::I) | None => Err(Error::InvalidParameter(format!("bad setting {s:?}"))),
            Some(a) => Ok(a),
        })
        .collect::<Result<_>>()?;
    axes.try_into()
        .map_err(|_| Error::InvalidParameter(format!("bad setting {s:?}")))
}

pub fn outcome_label(o: usize) -> String {
    (0..QUBITS)
        .map(|k| if o & (1 << (QUBITS - 1 - k)) != 0 { '-' } else { '+' })
        .collect()
}

fn parse_outcome(s: &str) -> Result<usize> {
    if s.len() != QUBITS {
        return Err(Error::InvalidParameter(format!("bad outcome {s:?}")));
    }
    s.chars().try_fold(0usize, |acc, c| match c {
        '+' => Ok(acc << 1),
        '-' => Ok((acc << 1) | 1),
        _ => Err(Error::InvalidParameter(format!("bad outcome {s:?}"))),
    })
}

fn eigenprojector(axis: PauliAxis, negative: bool) -> ComplexMatrix {
    let sign = if negative { -1.0 } else { 1.0 };
    let p = &ComplexMatrix::identity(2) + &axis.matrix().scale_real(sign);
    p.scale_real(0.5)
}

/// Born-rule probabilities of the eight outcomes of one setting.
pub fn born_probabilities(rho: &DensityMatrix, setting: &Setting) -> Result<[f64; OUTCOMES]> {
    if rho.dim() != OUTCOMES {
        return Err(Error::DimensionMismatch(rho.dim(), OUTCOMES));
    }
    let mut probs = [0.0; OUTCOMES];
    for (o, p) in probs.iter_mut().enumerate() {
        let proj = (0..QUBITS)
            .map(|k| eigenprojector(setting[k], o & (1 << (QUBITS - 1 - k)) != 0))
            .reduce(|acc, m| tensor(&acc, &m))
            .expect("three qubits");
        let r = rho.matrix();
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..OUTCOMES {
            for j in 0..OUTCOMES {
                s += r[(i, j)] * proj[(j, i)];
            }
        }
        *p = s.re.max(0.0);
    }
    let total: f64 = probs.iter().sum();
    for p in probs.iter_mut() {
        *p /= total;
    }
    Ok(probs)
}

/// Per-setting outcome frequencies; rows sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct TomographyFrequencies {
    pub settings: Vec<Setting>,
    pub freqs: Vec<[f64; OUTCOMES]>,
}

/// Infinite-shot limit: Born probabilities as frequencies.
pub fn exact_frequencies(rho: &DensityMatrix) -> Result<TomographyFrequencies> {
    let settings = settings();
    let freqs = settings
        .iter()
        .map(|s| born_probabilities(rho, s))
        .collect::<Result<_>>()?;
    Ok(TomographyFrequencies { settings, freqs })
}

/// Measured tallies per setting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TomographyCounts {
    pub settings: Vec<Setting>,
    pub counts: Vec<[u64; OUTCOMES]>,
    pub shots_per_setting: u64,
}

impl TomographyCounts {
    pub fn new(settings: Vec<Setting>, counts: Vec<[u64; OUTCOMES]>) -> Result<Self> {
        if settings.len() != counts.len() || settings.is_empty() {
            return Err(Error::DimensionMismatch(settings.len(), counts.len()));
        }
        let shots = counts[0].iter().sum::<u64>();
        if shots == 0 {
            return Err(Error::InvalidParameter("setting with zero shots".into()));
        }
        if counts.iter().any(|row| row.iter().sum::<u64>() != shots) {
            return Err(Error::InvalidParameter("settings have unequal shot totals".into()));
        }
        Ok(Self {
            settings,
            counts,
            shots_per_setting: shots,
        })
    }

    pub fn frequencies(&self) -> TomographyFrequencies {
        frequencies_of(&self.settings, &self.counts)
    }

    /// One row per (setting, outcome, tally), preceded by a version line and
    /// a header.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{FORMAT_HEADER}").unwrap();
        writeln!(out, "setting,outcome,tally").unwrap();
        for (s, row) in self.settings.iter().zip(&self.counts) {
            for (o, &n) in row.iter().enumerate() {
                writeln!(out, "{},{},{}", setting_label(s), outcome_label(o), n).unwrap();
            }
        }
        out
    }

    pub fn from_table(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(l) if l.trim() == FORMAT_HEADER => {}
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unsupported counts file version line {other:?}"
                )))
            }
        }
        if lines.next().map(str::trim) != Some("setting,outcome,tally") {
            return Err(Error::InvalidParameter("missing counts header".into()));
        }
        let mut settings: Vec<Setting> = Vec::new();
        let mut counts: Vec<[u64; OUTCOMES]> = Vec::new();
        for line in lines {
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let [setting, outcome, tally] = fields[..] else {
                return Err(Error::InvalidParameter(format!("bad counts row {line:?}")));
            };
            let setting = parse_setting(setting)?;
            let outcome = parse_outcome(outcome)?;
            let tally: u64 = tally
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad tally {tally:?}")))?;
            let idx = match settings.iter().position(|s| *s == setting) {
                Some(i) => i,
                None => {
                    settings.push(setting);
                    counts.push([0; OUTCOMES]);
                    settings.len() - 1
                }
            };
            counts[idx][outcome] += tally;
        }
        Self::new(settings, counts)
    }
}

fn frequencies_of(settings: &[Setting], counts: &[[u64; OUTCOMES]]) -> TomographyFrequencies {
    let freqs = counts
        .iter()
        .map(|row| {
            let total = row.iter().sum::<u64>() as f64;
            let mut f = [0.0; OUTCOMES];
            if total > 0.0 {
                for (fi, &n) in f.iter_mut().zip(row) {
                    *fi = n as f64 / total;
                }
            }
            f
        })
        .collect();
    TomographyFrequencies {
        settings: settings.to_vec(),
        freqs,
    }
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn multinomial<R: Rng>(rng: &mut R, shots: u64, probs: &[f64; OUTCOMES]) -> [u64; OUTCOMES] {
    let mut out = [0u64; OUTCOMES];
    let mut remaining = shots;
    let mut mass = 1.0;
    for o in 0..OUTCOMES - 1 {
        if remaining == 0 {
            break;
        }
        let p = if mass > 0.0 {
            (probs[o] / mass).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let n = Binomial::new(remaining, p).expect("probability in [0, 1]").sample(rng);
        out[o] = n;
        remaining -= n;
        mass -= probs[o];
    }
    out[OUTCOMES - 1] = remaining;
    out
}

/// Draws `shots` outcomes per setting. Each setting uses its own RNG stream,
/// so results do not depend on scheduling.
pub fn simulate_tomography(rho: &DensityMatrix, shots: u64, seed: u64) -> Result<TomographyCounts> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    let settings = settings();
    let counts = settings
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let probs = born_probabilities(rho, s)?;
            Ok(multinomial(&mut stream_rng(seed, i as u64), shots, &probs))
        })
        .collect::<Result<Vec<_>>>()?;
    TomographyCounts::new(settings, counts)
}

/// Pauli-basis estimate `ρ = (1/8) Σ ⟨P⟩ P`, before any positivity fix-up.
/// Correlators containing identities are averaged over every compatible
/// setting.
pub fn linear_inversion(data: &TomographyFrequencies) -> Result<ComplexMatrix> {
    let axes = [PauliAxis::I, PauliAxis::X, PauliAxis::Y, PauliAxis::Z];
    let dim = OUTCOMES;
    let mut rho = ComplexMatrix::zeros(dim, dim);
    for &a in &axes {
        for &b in &axes {
            for &c in &axes {
                let pauli = [a, b, c];
                let mut sum = 0.0;
                let mut hits = 0usize;
                for (setting, f) in data.settings.iter().zip(&data.freqs) {
                    let compatible = (0..QUBITS).all(|k| pauli[k] == PauliAxis::I || pauli[k] == setting[k]);
                    if !compatible {
                        continue;
                    }
                    hits += 1;
                    sum += f
                        .iter()
                        .enumerate()
                        .map(|(o, &p)| {
                            let parity = (0..QUBITS)
                                .filter(|&k| pauli[k] != PauliAxis::I && o & (1 << (QUBITS - 1 - k)) != 0)
                                .count();
                            if parity % 2 == 0 {
                                p
                            } else {
                                -p
                            }
                        })
                        .sum::<f64>();
                }
                if hits == 0 {
                    return Err(Error::InvalidParameter(format!(
                        "no setting measures {}",
                        setting_label(&pauli)
                    )));
                }
                let expectation = sum / hits as f64;
                let op = crate::state::pauli_observable(&pauli.map(PauliLabel::plus))?;
                rho = &rho + &op.matrix().scale_real(expectation / dim as f64);
            }
        }
    }
    Ok(rho.hermitian_part())
}

/// Clips negative eigenvalues to zero and rescales the remainder to unit trace.
pub fn project_psd(m: &ComplexMatrix) -> Result<DensityMatrix> {
    let eig = hermitian_eig(&m.hermitian_part())?;
    let total: f64 = eig.values.iter().map(|v| v.max(0.0)).sum();
    if !(total > 0.0) {
        return Err(Error::NotPositive(eig.values.last().copied().unwrap_or(0.0)));
    }
    let projected = eig.map_spectrum(|v| v.max(0.0) / total).hermitian_part();
    DensityMatrix::new(projected)
}

pub fn reconstruct_frequencies(data: &TomographyFrequencies) -> Result<DensityMatrix> {
    project_psd(&linear_inversion(data)?)
}

/// Linear inversion followed by PSD projection.
pub fn reconstruct(counts: &TomographyCounts) -> Result<DensityMatrix> {
    reconstruct_frequencies(&counts.frequencies())
}

/// Statistic evaluated on each Monte Carlo resample.
#[derive(Debug, Clone)]
pub enum Statistic {
    /// Entanglement witness of the reconstruction.
    EntanglementWitness,
    /// Uhlmann fidelity of the reconstruction with a target state.
    Fidelity(DensityMatrix),
}

impl Statistic {
    pub fn evaluate(&self, data: &TomographyFrequencies) -> Result<f64> {
        let rho = reconstruct_frequencies(data)?;
        match self {
            Statistic::EntanglementWitness => entanglement_witness(&rho),
            Statistic::Fidelity(target) => crate::linalg::fidelity(target, &rho),
        }
    }
}

pub fn monte_carlo_errors(
    counts: &TomographyCounts,
    resamples: usize,
    statistic: &Statistic,
    seed: u64,
) -> Result<f64> {
    monte_carlo_errors_with(counts, resamples, seed, |f| statistic.evaluate(f))
}

/// Sample standard deviation of `estimator` over Poisson resamples of every
/// tally. Resample `r` draws from its own RNG stream; values are combined in
/// resample order.
pub fn monte_carlo_errors_with<F>(counts: &TomographyCounts, resamples: usize, seed: u64, estimator: F) -> Result<f64>
where
    F: Fn(&TomographyFrequencies) -> Result<f64> + Sync,
{
    if resamples < 2 {
        return Err(Error::InvalidParameter("need at least 2 resamples".into()));
    }
    let values = (0..resamples)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, RESAMPLE_STREAM_BASE + r as u64);
            let resampled: Vec<[u64; OUTCOMES]> = counts
                .counts
                .iter()
                .map(|row| {
                    let mut new_row = [0u64; OUTCOMES];
                    for (dst, &n) in new_row.iter_mut().zip(row) {
                        *dst = if n == 0 {
                            0
                        } else {
                            Poisson::new(n as f64).expect("positive rate").sample(&mut rng) as u64
                        };
                    }
                    if new_row.iter().all(|&n| n == 0) {
                        *row
                    } else {
                        new_row
                    }
                })
                .collect();
            estimator(&frequencies_of(&counts.settings, &resampled))
        })
        .collect::<Result<Vec<f64>>>()?;
    let n = values.len() as f64;
    // Shifted by the first value to keep constant estimators exactly zero.
    let shift = values[0];
    let mean = values.iter().map(|v| v - shift).sum::<f64>() / n;
    let var = values.iter().map(|v| (v - shift - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(var.sqrt())
}
