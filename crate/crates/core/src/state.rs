//! The GHZ-type mixed state family and signed Pauli observables.
//!
//! Qubits are ordered A⊗B⊗C; basis index bit 2 is A, bit 0 is C, so
//! `|abc⟩` has index `4a + 2b + c`.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, DensityMatrix, Observable};

pub const TRIPARTITE_DIM: usize = 8;

/// Parameters of `η|Φ(θ)⟩⟨Φ(θ)| + (1−η)·𝟙_A⊗ρ_BC^θ/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GhzMixedParams {
    pub theta: f64,
    pub eta: f64,
}

impl GhzMixedParams {
    pub fn new(theta: f64, eta: f64) -> Result<Self> {
        let p = Self { theta, eta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_theta(self.theta)?;
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::InvalidParameter(format!("eta = {} outside [0, 1]", self.eta)));
        }
        Ok(())
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=FRAC_PI_2).contains(&theta) {
        return Err(Error::InvalidParameter(format!("theta = {theta} outside [0, pi/2]")));
    }
    Ok(())
}

/// `|Φ(θ)⟩⟨Φ(θ)|` with `|Φ(θ)⟩ = cosθ|000⟩ + sinθ|111⟩`.
pub fn ghz_pure(theta: f64) -> Result<DensityMatrix> {
    check_theta(theta)?;
    let mut psi = vec![Complex64::new(0.0, 0.0); TRIPARTITE_DIM];
    psi[0] = Complex64::new(theta.cos(), 0.0);
    psi[7] = Complex64::new(theta.sin(), 0.0);
    Ok(DensityMatrix::from_trusted(ComplexMatrix::outer(&psi, &psi)))
}

/// The GHZ-type mixed state; the noise term is the identity on A tensored
/// with the reduced BC state of `|Φ(θ)⟩`.
pub fn ghz_mixed(p: GhzMixedParams) -> Result<DensityMatrix> {
    p.validate()?;
    let pure = ghz_pure(p.theta)?;
    let rho_bc = linalg::partial_trace(&pure, &[1, 2])?;
    let noise = linalg::tensor(&ComplexMatrix::identity(2), rho_bc.matrix()).scale_real(0.5);
    let m = &pure.matrix().scale_real(p.eta) + &noise.scale_real(1.0 - p.eta);
    Ok(DensityMatrix::from_trusted(m))
}

/// Single-qubit Pauli axis (or identity).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PauliAxis {
    I,
    X,
    Y,
    Z,
}

impl PauliAxis {
    pub const MEASURABLE: [PauliAxis; 3] = [PauliAxis::X, PauliAxis::Y, PauliAxis::Z];

    pub fn matrix(self) -> ComplexMatrix {
        let z = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let entries = match self {
            PauliAxis::I => [one, z, z, one],
            PauliAxis::X => [z, one, one, z],
            PauliAxis::Y => [z, -i, i, z],
            PauliAxis::Z => [one, z, z, -one],
        };
        ComplexMatrix::from_vec(2, 2, entries.to_vec()).expect("2x2 Pauli")
    }

    pub fn symbol(self) -> char {
        match self {
            PauliAxis::I => 'I',
            PauliAxis::X => 'X',
            PauliAxis::Y => 'Y',
            PauliAxis::Z => 'Z',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'I' => Some(PauliAxis::I),
            'X' => Some(PauliAxis::X),
            'Y' => Some(PauliAxis::Y),
            'Z' => Some(PauliAxis::Z),
            _ => None,
        }
    }
}

/// A signed Pauli axis such as `+X` or `-Z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliLabel {
    pub axis: PauliAxis,
    pub negative: bool,
}

impl PauliLabel {
    pub const I: Self = Self::plus(PauliAxis::I);
    pub const X: Self = Self::plus(PauliAxis::X);
    pub const Y: Self = Self::plus(PauliAxis::Y);
    pub const Z: Self = Self::plus(PauliAxis::Z);

    pub const fn plus(axis: PauliAxis) -> Self {
        Self { axis, negative: false }
    }

    pub const fn minus(axis: PauliAxis) -> Self {
        Self { axis, negative: true }
    }

    pub fn sign(self) -> f64 {
        if self.negative {
            -1.0
        } else {
            1.0
        }
    }

    pub fn matrix(self) -> ComplexMatrix {
        self.axis.matrix().scale_real(self.sign())
    }
}

impl fmt::Display for PauliLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = if self.negative { '-' } else { '+' };
        write!(f, "{s}{}", self.axis.symbol())
    }
}

impl FromStr for PauliLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("bad Pauli label {s:?}"));
        let mut chars = s.trim().chars();
        let (negative, axis_char) = match (chars.next(), chars.next(), chars.next()) {
            (Some('+'), Some(a), None) => (false, a),
            (Some('-'), Some(a), None) => (true, a),
            (Some(a), None, None) => (false, a),
            _ => return Err(bad()),
        };
        let axis = PauliAxis::from_symbol(axis_char).ok_or_else(bad)?;
        Ok(Self { axis, negative })
    }
}

impl Serialize for PauliLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliLabel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Signed tensor product of per-qubit Paulis, first label on qubit 0.
pub fn pauli_observable(labels: &[PauliLabel]) -> Result<Observable> {
    let (first, rest) = labels
        .split_first()
        .ok_or_else(|| Error::InvalidParameter("empty Pauli string".into()))?;
    let m = rest
        .iter()
        .fold(first.matrix(), |acc, l| linalg::tensor(&acc, &l.matrix()));
    Observable::new(m)
}

/// `Tr[ρ·obs]`
pub fn expectation(rho: &DensityMatrix, obs: &Observable) -> Result<f64> {
    if rho.dim() != obs.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), obs.dim()));
    }
    let r = rho.matrix();
    let o = obs.matrix();
    let n = rho.dim();
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            s += r[(i, j)] * o[(j, i)];
        }
    }
    Ok(s.re)
}

/// Expectation of a Pauli string given as labels.
pub fn pauli_expectation(rho: &DensityMatrix, labels: &[PauliLabel]) -> Result<f64> {
    expectation(rho, &pauli_observable(labels)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_4;

    use PauliLabel as P;

    fn diag(rho: &DensityMatrix) -> Vec<f64> {
        rho.matrix().diagonal().iter().map(|z| z.re).collect()
    }

    #[test]
    fn ghz_pure_equal_weights() {
        let rho = ghz_pure(FRAC_PI_4).unwrap();
        for (i, j) in [(0, 0), (7, 7), (0, 7), (7, 0)] {
            assert_abs_diff_eq!(rho.element(i, j).re, 0.5, epsilon = 1e-15);
        }
        let zero = ghz_pure(0.0).unwrap();
        let mut expected = ComplexMatrix::zeros(8, 8);
        expected[(0, 0)] = Complex64::new(1.0, 0.0);
        assert!(zero.matrix().max_abs_diff(&expected) < 1e-16);
        assert!(ghz_pure(-0.1).is_err());
        assert!(ghz_pure(2.0).is_err());
    }

    #[test]
    fn ghz_mixed_examples() {
        let pure = ghz_mixed(GhzMixedParams::new(0.3, 1.0).unwrap()).unwrap();
        assert!(pure.matrix().max_abs_diff(ghz_pure(0.3).unwrap().matrix()) < 1e-15);

        let noise = ghz_mixed(GhzMixedParams::new(FRAC_PI_4, 0.0).unwrap()).unwrap();
        let d = diag(&noise);
        for (idx, &v) in d.iter().enumerate() {
            let expected = if [0b000, 0b100, 0b011, 0b111].contains(&idx) {
                0.25
            } else {
                0.0
            };
            assert_abs_diff_eq!(v, expected, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(noise.element(0, 7).norm(), 0.0);

        let fig4 = ghz_mixed(GhzMixedParams::new(FRAC_PI_4, 0.66).unwrap()).unwrap();
        assert_abs_diff_eq!(fig4.element(0, 7).re, 0.33, epsilon = 1e-15);

        assert!(GhzMixedParams::new(FRAC_PI_4, 1.5).is_err());
    }

    #[test]
    fn noise_term_populations_follow_identity_on_a() {
        // (1−η)cos²θ/2 on |100⟩, (1−η)sin²θ/2 on |011⟩
        let (theta, eta) = (0.4, 0.3);
        let rho = ghz_mixed(GhzMixedParams::new(theta, eta).unwrap()).unwrap();
        let d = diag(&rho);
        let (c2, s2) = (theta.cos().powi(2), theta.sin().powi(2));
        assert_abs_diff_eq!(d[0b000], (1.0 + eta) * c2 / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d[0b111], (1.0 + eta) * s2 / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d[0b100], (1.0 - eta) * c2 / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(d[0b011], (1.0 - eta) * s2 / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn pauli_observable_examples() {
        let zzi = pauli_observable(&[P::Z, P::Z, P::I]).unwrap();
        let d: Vec<f64> = zzi.matrix().diagonal().iter().map(|z| z.re).collect();
        assert_eq!(d, vec![1.0, 1.0, -1.0, -1.0, -1.0, -1.0, 1.0, 1.0]);
        let iii = pauli_observable(&[P::I, P::I, P::I]).unwrap();
        assert_eq!(iii.matrix(), &ComplexMatrix::identity(8));
        let ghz = ghz_pure(FRAC_PI_4).unwrap();
        assert_abs_diff_eq!(
            pauli_expectation(&ghz, &[P::X, P::X, P::X]).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        let minus = pauli_observable(&[P::minus(PauliAxis::X), P::X, P::X]).unwrap();
        assert_abs_diff_eq!(expectation(&ghz, &minus).unwrap(), -1.0, epsilon = 1e-15);
    }

    #[test]
    fn correlators_on_mixed_family() {
        for &eta in &[0.0, 0.2, 0.66, 1.0] {
            let rho = ghz_mixed(GhzMixedParams::new(FRAC_PI_4, eta).unwrap()).unwrap();
            let zbzc = pauli_expectation(&rho, &[P::I, P::Z, P::Z]).unwrap();
            let zazb = pauli_expectation(&rho, &[P::Z, P::Z, P::I]).unwrap();
            let xxx = pauli_expectation(&rho, &[P::X, P::X, P::X]).unwrap();
            assert_abs_diff_eq!(zbzc, 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(zazb, eta, epsilon = 1e-14);
            assert_abs_diff_eq!(xxx, eta, epsilon = 1e-14);
        }
    }

    #[test]
    fn expectation_dimension_mismatch() {
        let rho = DensityMatrix::maximally_mixed(2).unwrap();
        let obs = pauli_observable(&[P::Z, P::Z]).unwrap();
        assert!(matches!(expectation(&rho, &obs), Err(Error::DimensionMismatch(2, 4))));
    }

    #[test]
    fn label_parsing() {
        assert_eq!("+X".parse::<PauliLabel>().unwrap(), P::X);
        assert_eq!("-y".parse::<PauliLabel>().unwrap(), P::minus(PauliAxis::Y));
        assert_eq!("Z".parse::<PauliLabel>().unwrap(), P::Z);
        assert!("*X".parse::<PauliLabel>().is_err());
        assert!("+XX".parse::<PauliLabel>().is_err());
        assert_eq!(P::minus(PauliAxis::Z).to_string(), "-Z");
    }
}
