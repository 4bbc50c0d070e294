//! Qubit register states and gate application.
//!
//! Basis convention: qubit 0 is the least-significant bit of the basis-state
//! integer label, so an n-qubit state is a vector of 2^n amplitudes indexed
//! by that label.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gate::Gate;

/// Tolerance for the stored-state normalization invariant.
pub const NORM_TOL: f64 = 1e-10;

/// A pure state of n qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitState {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl QubitState {
    /// Build from an amplitude list of length 2^n; must be normalized.
    pub fn new(num_qubits: usize, amplitudes: Vec<Complex64>) -> Result<QubitState> {
        if amplitudes.len() != 1usize << num_qubits {
            return Err(Error::BadStateLength {
                len: amplitudes.len(),
                num_qubits,
            });
        }
        if amplitudes
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        let state = QubitState {
            num_qubits,
            amplitudes,
        };
        let defect = (state.norm() - 1.0).abs();
        if defect > NORM_TOL {
            return Err(Error::NotNormalized { defect });
        }
        Ok(state)
    }

    /// Build without the normalization check. Used by tests that construct
    /// deliberately defective traces.
    #[cfg(test)]
    pub(crate) fn from_raw_unchecked(num_qubits: usize, amplitudes: Vec<Complex64>) -> QubitState {
        QubitState {
            num_qubits,
            amplitudes,
        }
    }

    /// The computational basis state |label⟩.
    pub fn basis(num_qubits: usize, label: usize) -> QubitState {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << num_qubits];
        amplitudes[label] = Complex64::new(1.0, 0.0);
        QubitState {
            num_qubits,
            amplitudes,
        }
    }

    /// |0…0⟩.
    pub fn zero(num_qubits: usize) -> QubitState {
        QubitState::basis(num_qubits, 0)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &QubitState) -> Complex64 {
        inner(&self.amplitudes, &other.amplitudes)
    }
}

/// ⟨a|b⟩ over raw amplitude slices.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// ℓ² norm of a raw amplitude slice.
pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Apply `gate` to `state`, returning G|ψ⟩.
pub fn apply_gate(state: &QubitState, gate: &Gate) -> Result<QubitState> {
    gate.check_targets(state.num_qubits)?;
    let mut out = vec![Complex64::new(0.0, 0.0); state.amplitudes.len()];
    apply_gate_slice(&state.amplitudes, &mut out, gate, state.num_qubits);
    Ok(QubitState {
        num_qubits: state.num_qubits,
        amplitudes: out,
    })
}

/// Core kernel: dst += G · src over a 2^n block. `dst` must be zeroed (or hold
/// a partial sum being accumulated); `src` and `dst` must not alias.
///
/// The gate's local basis packs `targets[j]` as bit j, matching the matrix
/// layout in [`Gate`].
pub fn apply_gate_slice(src: &[Complex64], dst: &mut [Complex64], gate: &Gate, num_qubits: usize) {
    let targets = gate.targets();
    let matrix = gate.matrix();
    match targets {
        [t] => {
            let bit = 1usize << *t;
            for base in 0..src.len() {
                if base & bit != 0 {
                    continue;
                }
                let a0 = src[base];
                let a1 = src[base | bit];
                dst[base] += matrix[0] * a0 + matrix[1] * a1;
                dst[base | bit] += matrix[2] * a0 + matrix[3] * a1;
            }
        }
        [t0, t1] => {
            let b0 = 1usize << *t0;
            let b1 = 1usize << *t1;
            for base in 0..src.len() {
                if base & (b0 | b1) != 0 {
                    continue;
                }
                let idx = [base, base | b0, base | b1, base | b0 | b1];
                for row in 0..4 {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for col in 0..4 {
                        acc += matrix[row * 4 + col] * src[idx[col]];
                    }
                    dst[idx[row]] += acc;
                }
            }
        }
        _ => unreachable!("gates act on one or two qubits"),
    }
    debug_assert!(num_qubits == 0 || src.len() == 1 << num_qubits);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::GateKind;

    fn assert_close(a: Complex64, b: Complex64) {
        assert!((a - b).norm() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn x_flips_basis_state() {
        let g = Gate::standard(GateKind::X, vec![0]).unwrap();
        let out = apply_gate(&QubitState::zero(1), &g).unwrap();
        assert_close(out.amplitudes()[0], Complex64::new(0.0, 0.0));
        assert_close(out.amplitudes()[1], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn hadamard_makes_plus_state() {
        let g = Gate::standard(GateKind::H, vec![0]).unwrap();
        let out = apply_gate(&QubitState::zero(1), &g).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert_close(out.amplitudes()[0], Complex64::new(r, 0.0));
        assert_close(out.amplitudes()[1], Complex64::new(r, 0.0));
    }

    #[test]
    fn cnot_on_control_set() {
        // |q0=1, q1=0⟩ is basis label 1; CNOT(ctrl=0, tgt=1) maps it to label 3.
        let g = Gate::standard(GateKind::Cnot, vec![0, 1]).unwrap();
        let out = apply_gate(&QubitState::basis(2, 1), &g).unwrap();
        assert_close(out.amplitudes()[3], Complex64::new(1.0, 0.0));
        assert_eq!(out.norm(), 1.0);
    }

    #[test]
    fn cnot_on_control_clear() {
        let g = Gate::standard(GateKind::Cnot, vec![0, 1]).unwrap();
        let out = apply_gate(&QubitState::basis(2, 2), &g).unwrap();
        assert_close(out.amplitudes()[2], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn gate_on_upper_qubit() {
        let g = Gate::standard(GateKind::X, vec![2]).unwrap();
        let out = apply_gate(&QubitState::zero(3), &g).unwrap();
        assert_close(out.amplitudes()[4], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn target_out_of_range() {
        let g = Gate::standard(GateKind::X, vec![3]).unwrap();
        let err = apply_gate(&QubitState::zero(2), &g).unwrap_err();
        assert!(matches!(err, Error::TargetOutOfRange { .. }));
    }

    #[test]
    fn norm_preserved_under_gates() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let psi = QubitState::new(
            2,
            vec![
                Complex64::new(r, 0.0),
                Complex64::new(0.0, 0.5),
                Complex64::new(0.5, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        )
        .unwrap();
        let g = Gate::standard(GateKind::H, vec![1]).unwrap();
        let out = apply_gate(&psi, &g).unwrap();
        assert!((out.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unnormalized_state_rejected() {
        let err = QubitState::new(1, vec![Complex64::new(1.5, 0.0), Complex64::new(0.0, 0.0)])
            .unwrap_err();
        assert!(matches!(err, Error::NotNormalized { .. }));
    }
}
