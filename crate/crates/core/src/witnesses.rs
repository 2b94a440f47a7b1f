//! Entanglement and steering witnesses for the three bipartitions.
//!
//! Sign convention, used everywhere: a witness certifies its resource iff its
//! value is strictly negative.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{permute_qubits, ComplexMatrix, DensityMatrix};
use crate::state::{pauli_expectation, PauliLabel};

/// Weight of the trusted ⟨Z Z⟩ term in the one-sided witness.
pub const S1_ZZ_WEIGHT: f64 = 0.1547;
/// Weight of the population correlators in the two-sided witness.
pub const S2_POPULATION_WEIGHT: f64 = 0.1831;
/// Weight of the coherence correlators in the two-sided witness.
pub const S2_COHERENCE_WEIGHT: f64 = 0.2582;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Party {
    A,
    B,
    C,
}

impl Party {
    pub const ALL: [Party; 3] = [Party::A, Party::B, Party::C];

    pub fn index(self) -> usize {
        match self {
            Party::A => 0,
            Party::B => 1,
            Party::C => 2,
        }
    }

    /// Qubit order placing `self` first, the remaining two in A, B, C order.
    pub fn head_order(self) -> [usize; 3] {
        match self {
            Party::A => [0, 1, 2],
            Party::B => [1, 0, 2],
            Party::C => [2, 0, 1],
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }
}

/// The split `head | rest`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bipartition {
    pub head: Party,
}

impl Bipartition {
    pub const ALL: [Bipartition; 3] = [
        Bipartition { head: Party::A },
        Bipartition { head: Party::B },
        Bipartition { head: Party::C },
    ];

    /// Column suffix used in curve files: `abc`, `bac`, `cab`.
    pub fn tag(self) -> &'static str {
        match self.head {
            Party::A => "abc",
            Party::B => "bac",
            Party::C => "cab",
        }
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.head {
            Party::A => "A|BC",
            Party::B => "B|AC",
            Party::C => "C|AB",
        };
        f.write_str(s)
    }
}

/// Observables `(O₀, O₁, O₂)` each party uses when it is untrusted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementAssignment {
    pub a: [PauliLabel; 3],
    pub b: [PauliLabel; 3],
    pub c: [PauliLabel; 3],
}

impl Default for MeasurementAssignment {
    fn default() -> Self {
        let xyz = [PauliLabel::X, PauliLabel::Y, PauliLabel::Z];
        Self { a: xyz, b: xyz, c: xyz }
    }
}

impl MeasurementAssignment {
    pub fn for_party(&self, p: Party) -> [PauliLabel; 3] {
        match p {
            Party::A => self.a,
            Party::B => self.b,
            Party::C => self.c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    SteerableBoth,
    Steerable2SdiOnly,
    Steerable1SdiOnly,
    Unsteerable,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::SteerableBoth => "both",
            Regime::Steerable2SdiOnly => "2sdi_only",
            Regime::Steerable1SdiOnly => "1sdi_only",
            Regime::Unsteerable => "unsteerable",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "both" => Ok(Regime::SteerableBoth),
            "2sdi_only" => Ok(Regime::Steerable2SdiOnly),
            "1sdi_only" => Ok(Regime::Steerable1SdiOnly),
            "unsteerable" => Ok(Regime::Unsteerable),
            other => Err(Error::InvalidParameter(format!("unknown regime {other:?}"))),
        }
    }
}

/// Sign-based regime label: a scenario is steerable iff its witness is < 0.
pub fn classify_regime(s1: f64, s2: f64) -> Regime {
    match (s1 < 0.0, s2 < 0.0) {
        (true, true) => Regime::SteerableBoth,
        (false, true) => Regime::Steerable2SdiOnly,
        (true, false) => Regime::Steerable1SdiOnly,
        (false, false) => Regime::Unsteerable,
    }
}

/// `Tr[ρW]` with `W = ¾𝟙 − |GHZ⟩⟨GHZ|`.
pub fn entanglement_witness(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 8 {
        return Err(Error::DimensionMismatch(rho.dim(), 8));
    }
    let overlap = 0.5 * (rho.element(0, 0) + rho.element(7, 7) + rho.element(0, 7) + rho.element(7, 0));
    Ok(0.75 - overlap.re)
}

/// Reorders qubits so `head` occupies the first slot.
pub fn permute_to_head(rho: &DensityMatrix, head: Party) -> Result<DensityMatrix> {
    if rho.dim() != 8 {
        return Err(Error::DimensionMismatch(rho.dim(), 8));
    }
    if head == Party::A {
        return Ok(rho.clone());
    }
    let m: ComplexMatrix = permute_qubits(rho.matrix(), &head.head_order())?;
    Ok(DensityMatrix::from_trusted(m))
}

fn rest_parties(head: Party) -> [Party; 2] {
    let order = head.head_order();
    [
        Party::from_index(order[1]).expect("party"),
        Party::from_index(order[2]).expect("party"),
    ]
}

/// One-sided device-independent witness: the head party is untrusted and
/// measures its assigned observables; the other two apply fixed Paulis.
pub fn steering_1sdi(rho: &DensityMatrix, part: Bipartition, m: &MeasurementAssignment) -> Result<f64> {
    use PauliLabel as P;
    let r = permute_to_head(rho, part.head)?;
    let [o0, o1, o2] = m.for_party(part.head);
    let e = |labels: [PauliLabel; 3]| pauli_expectation(&r, &labels);
    let correlations = e([o2, P::Z, P::I])? + e([o2, P::I, P::Z])? + e([o0, P::X, P::X])?
        - e([o0, P::Y, P::Y])?
        - e([o1, P::X, P::Y])?
        - e([o1, P::Y, P::X])?;
    Ok(1.0 + S1_ZZ_WEIGHT * e([P::I, P::Z, P::Z])? - correlations / 3.0)
}

/// Two-sided device-independent witness: the two non-head parties are
/// untrusted, the head applies fixed Paulis.
pub fn steering_2sdi(rho: &DensityMatrix, part: Bipartition, m: &MeasurementAssignment) -> Result<f64> {
    use PauliLabel as P;
    let r = permute_to_head(rho, part.head)?;
    let [first, second] = rest_parties(part.head);
    let b = m.for_party(first);
    let c = m.for_party(second);
    let e = |labels: [PauliLabel; 3]| pauli_expectation(&r, &labels);
    let populations = e([P::I, b[2], c[2]])? + e([P::Z, b[2], P::I])? + e([P::Z, P::I, c[2]])?;
    let coherences = -e([P::X, b[0], c[0]])? + e([P::Y, b[0], c[1]])? + e([P::Y, b[1], c[0]])? + e([P::X, b[1], c[1]])?;
    Ok(1.0 - S2_POPULATION_WEIGHT * populations + S2_COHERENCE_WEIGHT * coherences)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BipartitionWitness {
    pub part: Bipartition,
    pub s1sdi: f64,
    pub s2sdi: f64,
    pub regime: Regime,
}

/// EW plus both steering witnesses for every bipartition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub ew: f64,
    pub parts: [BipartitionWitness; 3],
}

impl WitnessReport {
    pub fn part(&self, head: Party) -> &BipartitionWitness {
        &self.parts[head.index()]
    }
}

pub fn evaluate_witnesses(rho: &DensityMatrix, m: &MeasurementAssignment) -> Result<WitnessReport> {
    let ew = entanglement_witness(rho)?;
    let mut parts = Vec::with_capacity(3);
    for part in Bipartition::ALL {
        let s1sdi = steering_1sdi(rho, part, m)?;
        let s2sdi = steering_2sdi(rho, part, m)?;
        parts.push(BipartitionWitness {
            part,
            s1sdi,
            s2sdi,
            regime: classify_regime(s1sdi, s2sdi),
        });
    }
    Ok(WitnessReport {
        ew,
        parts: parts.try_into().expect("three bipartitions"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoherence::dephase_a;
    use crate::state::{ghz_mixed, ghz_pure, GhzMixedParams, PauliAxis};
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;
    use std::f64::consts::FRAC_PI_4;

    const A_HEAD: Bipartition = Bipartition { head: Party::A };

    fn dephased(eta: f64, k: f64) -> DensityMatrix {
        let rho = ghz_mixed(GhzMixedParams::new(FRAC_PI_4, eta).unwrap()).unwrap();
        dephase_a(&rho, Complex64::new(k, 0.0)).unwrap()
    }

    #[test]
    fn entanglement_witness_examples() {
        assert_abs_diff_eq!(
            entanglement_witness(&ghz_pure(FRAC_PI_4).unwrap()).unwrap(),
            -0.25,
            epsilon = 1e-15
        );
        for &eta in &[0.0, 0.25, 0.5, 2.0 / 3.0, 1.0] {
            let rho = ghz_mixed(GhzMixedParams::new(FRAC_PI_4, eta).unwrap()).unwrap();
            assert_abs_diff_eq!(entanglement_witness(&rho).unwrap(), 0.5 - 0.75 * eta, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(
            entanglement_witness(&dephased(1.0, 0.0)).unwrap(),
            0.25,
            epsilon = 1e-15
        );
    }

    #[test]
    fn steering_values_on_ghz() {
        let m = MeasurementAssignment::default();
        let ideal = dephased(1.0, 1.0);
        assert_abs_diff_eq!(steering_1sdi(&ideal, A_HEAD, &m).unwrap(), -0.8453, epsilon = 1e-12);
        assert_abs_diff_eq!(steering_2sdi(&ideal, A_HEAD, &m).unwrap(), -0.5821, epsilon = 1e-12);
        let dead = dephased(1.0, 0.0);
        assert_abs_diff_eq!(
            steering_1sdi(&dead, A_HEAD, &m).unwrap(),
            1.1547 - 2.0 / 3.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(steering_2sdi(&dead, A_HEAD, &m).unwrap(), 0.4507, epsilon = 1e-12);
    }

    #[test]
    fn steering_closed_forms_on_dephased_family() {
        let m = MeasurementAssignment::default();
        for &eta in &[0.2, 0.66, 1.0] {
            for &k in &[0.0, 0.3, 0.7, 1.0] {
                let rho = dephased(eta, k);
                let s1 = 1.0 + S1_ZZ_WEIGHT - (2.0 * eta + 4.0 * k * eta) / 3.0;
                let s2 = 1.0 - S2_POPULATION_WEIGHT * (1.0 + 2.0 * eta) - 4.0 * S2_COHERENCE_WEIGHT * k * eta;
                assert_abs_diff_eq!(steering_1sdi(&rho, A_HEAD, &m).unwrap(), s1, epsilon = 1e-12);
                assert_abs_diff_eq!(steering_2sdi(&rho, A_HEAD, &m).unwrap(), s2, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn threshold_bisection_matches_closed_form() {
        let m = MeasurementAssignment::default();
        let bisect = |f: &dyn Fn(f64) -> f64| {
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if f(mid) >= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        let k1 = bisect(&|k| steering_1sdi(&dephased(1.0, k), A_HEAD, &m).unwrap());
        let k2 = bisect(&|k| steering_2sdi(&dephased(1.0, k), A_HEAD, &m).unwrap());
        assert_abs_diff_eq!(k1, (3.0 * 1.1547 - 2.0) / 4.0, epsilon = 1e-12);
        assert_abs_diff_eq!(k1, 0.366025, epsilon = 1e-6);
        assert_abs_diff_eq!(k2, 0.4507 / 1.0328, epsilon = 1e-12);
        assert_abs_diff_eq!(k2, 0.436386, epsilon = 1e-6);
    }

    #[test]
    fn permute_examples() {
        let rho = ghz_mixed(GhzMixedParams::new(0.4, 0.7).unwrap()).unwrap();
        assert_eq!(permute_to_head(&rho, Party::A).unwrap(), rho);

        let mut m = ComplexMatrix::zeros(8, 8);
        m[(0b011, 0b011)] = Complex64::new(1.0, 0.0);
        let basis = DensityMatrix::new(m).unwrap();
        let p = permute_to_head(&basis, Party::B).unwrap();
        assert_eq!(p.element(0b101, 0b101), Complex64::new(1.0, 0.0));
        assert_eq!(permute_to_head(&p, Party::B).unwrap(), basis);

        // B and C heads see the same reduced picture of the exchange-symmetric family.
        let b = permute_to_head(&rho, Party::B).unwrap();
        let c = permute_to_head(&rho, Party::C).unwrap();
        assert!(b.matrix().max_abs_diff(c.matrix()) < 1e-15);
    }

    #[test]
    fn regime_classification() {
        assert_eq!(classify_regime(-0.8, -0.5), Regime::SteerableBoth);
        assert_eq!(classify_regime(0.2, -0.1), Regime::Steerable2SdiOnly);
        assert_eq!(classify_regime(-0.2, 0.1), Regime::Steerable1SdiOnly);
        assert_eq!(classify_regime(0.2, 0.3), Regime::Unsteerable);
        assert_eq!(classify_regime(0.0, 0.0), Regime::Unsteerable);
        for r in [
            Regime::SteerableBoth,
            Regime::Steerable2SdiOnly,
            Regime::Steerable1SdiOnly,
            Regime::Unsteerable,
        ] {
            assert_eq!(r.label().parse::<Regime>().unwrap(), r);
        }
    }

    #[test]
    fn separable_noise_state_never_detected() {
        let m = MeasurementAssignment::default();
        let rho = dephased(0.0, 1.0);
        let report = evaluate_witnesses(&rho, &m).unwrap();
        for p in report.parts {
            assert!(p.s1sdi >= 0.0 && p.s2sdi >= 0.0, "{p:?}");
        }
    }

    fn all_signed_triples() -> Vec<[PauliLabel; 3]> {
        let mut labels = Vec::new();
        for axis in PauliAxis::MEASURABLE {
            labels.push(PauliLabel::plus(axis));
            labels.push(PauliLabel::minus(axis));
        }
        let mut out = Vec::new();
        for &x in &labels {
            for &y in &labels {
                for &z in &labels {
                    out.push([x, y, z]);
                }
            }
        }
        out
    }

    #[test]
    fn default_assignment_is_optimal_on_ghz() {
        let ghz = ghz_pure(FRAC_PI_4).unwrap();
        let default = MeasurementAssignment::default();
        let s1_default = steering_1sdi(&ghz, A_HEAD, &default).unwrap();
        let s2_default = steering_2sdi(&ghz, A_HEAD, &default).unwrap();
        let triples = all_signed_triples();
        let best1 = triples
            .iter()
            .map(|&a| steering_1sdi(&ghz, A_HEAD, &MeasurementAssignment { a, ..default }).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert_abs_diff_eq!(best1, s1_default, epsilon = 1e-12);

        // Two-sided: exhaustive over B and C triples using a correlator table
        // of the fixed state.
        let axes = [PauliAxis::I, PauliAxis::X, PauliAxis::Y, PauliAxis::Z];
        let idx = |a: PauliAxis| axes.iter().position(|&x| x == a).unwrap();
        let mut table = [[[0.0; 4]; 4]; 4];
        for (i, &x) in axes.iter().enumerate() {
            for (j, &y) in axes.iter().enumerate() {
                for (k, &z) in axes.iter().enumerate() {
                    let labels = [PauliLabel::plus(x), PauliLabel::plus(y), PauliLabel::plus(z)];
                    table[i][j][k] = crate::state::pauli_expectation(&ghz, &labels).unwrap();
                }
            }
        }
        let e =
            |h: PauliAxis, b: PauliLabel, c: PauliLabel| b.sign() * c.sign() * table[idx(h)][idx(b.axis)][idx(c.axis)];
        let pi = PauliLabel::I;
        let s2_table = |b: [PauliLabel; 3], c: [PauliLabel; 3]| {
            let pops = e(PauliAxis::I, b[2], c[2]) + e(PauliAxis::Z, b[2], pi) + e(PauliAxis::Z, pi, c[2]);
            let cohs = -e(PauliAxis::X, b[0], c[0])
                + e(PauliAxis::Y, b[0], c[1])
                + e(PauliAxis::Y, b[1], c[0])
                + e(PauliAxis::X, b[1], c[1]);
            1.0 - S2_POPULATION_WEIGHT * pops + S2_COHERENCE_WEIGHT * cohs
        };
        assert_abs_diff_eq!(s2_table(default.b, default.c), s2_default, epsilon = 1e-12);
        let mut best2 = f64::INFINITY;
        for &c in &triples {
            for &b in &triples {
                best2 = best2.min(s2_table(b, c));
            }
        }
        assert_abs_diff_eq!(best2, s2_default, epsilon = 1e-12);
    }
}
