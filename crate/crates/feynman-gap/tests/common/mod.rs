//! Shared helpers for the integration suites.

use feynman_gap::gate::{Gate, GateKind};
use feynman_gap::program::Circuit;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const ONE_QUBIT: [GateKind; 6] = [
    GateKind::X,
    GateKind::Y,
    GateKind::Z,
    GateKind::H,
    GateKind::S,
    GateKind::T,
];
const TWO_QUBIT: [GateKind; 3] = [GateKind::Cnot, GateKind::Cz, GateKind::Swap];

pub fn random_gate(rng: &mut ChaCha8Rng, num_qubits: usize) -> Gate {
    if num_qubits >= 2 && rng.gen_bool(0.4) {
        let kind = TWO_QUBIT[rng.gen_range(0..TWO_QUBIT.len())];
        let a = rng.gen_range(0..num_qubits);
        let mut b = rng.gen_range(0..num_qubits);
        while b == a {
            b = rng.gen_range(0..num_qubits);
        }
        Gate::standard(kind, vec![a, b]).expect("library gate")
    } else {
        let kind = ONE_QUBIT[rng.gen_range(0..ONE_QUBIT.len())];
        let target = rng.gen_range(0..num_qubits);
        Gate::standard(kind, vec![target]).expect("library gate")
    }
}

pub fn random_circuit(rng: &mut ChaCha8Rng, num_qubits: usize, len: usize) -> Circuit {
    let gates = (0..len).map(|_| random_gate(rng, num_qubits)).collect();
    Circuit::new(num_qubits, gates).expect("nonempty circuit")
}
