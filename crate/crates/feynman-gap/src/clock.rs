//! Clocked step unitaries.
//!
//! The step unitary U advances a computation by one gate while incrementing
//! an explicit clock register: U(|ψ⟩⊗|ℓ⟩) = (G_{ℓ+1}|ψ⟩)⊗|ℓ+1⟩. Halting
//! circuits close into a cycle of period m = 2T by mirroring the gate list
//! with adjoints and carrying a sign qubit that marks the undo leg;
//! non-halting streams are truncated to clock sites ℓ ∈ [−L, L] with the
//! negative side carrying the adjoint gates, so both propagation directions
//! perform the same computation.
//!
//! State layout: full index = (clock · sign_states + sign) · 2^n + qubit
//! label, i.e. qubits are the least-significant bits, then the sign factor
//! (cyclic schedules only), then the clock.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gate::Gate;
use crate::program::{Circuit, Program, RayTrace};
use crate::state::{apply_gate_slice, inner, QubitState};

/// Cap on the number of amplitudes a step unitary may act on.
pub const DIMENSION_CAP: usize = 1 << 22;

/// Cap on dense materialization (rows).
pub const DENSE_CAP: usize = 4096;

/// Forward/undo leg marker for cyclic schedules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignBit {
    Plus,
    Minus,
}

impl SignBit {
    pub fn name(&self) -> &'static str {
        match self {
            SignBit::Plus => "plus",
            SignBit::Minus => "minus",
        }
    }
}

/// Cyclic schedule of period m = 2T: steps 1..T play the circuit, steps
/// T+1..2T play the adjoints in reverse, and the composition of all m step
/// gates is the identity.
#[derive(Debug, Clone)]
pub struct CyclicSchedule {
    num_qubits: usize,
    halt_step: usize,
    step_gates: Vec<Gate>, // step_gates[i] is the gate of step i+1
}

impl CyclicSchedule {
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// The period m = 2T.
    pub fn period(&self) -> usize {
        self.step_gates.len()
    }

    /// The halting step T = m/2.
    pub fn halt_step(&self) -> usize {
        self.halt_step
    }

    /// The gate applied by step ℓ ∈ {1..m} (the clock transition ℓ−1 → ℓ).
    pub fn step_gate(&self, step: usize) -> &Gate {
        assert!((1..=self.period()).contains(&step), "step out of range");
        &self.step_gates[step - 1]
    }

    /// Sign label attached to clock position ℓ: plus on 0..T, minus on
    /// T+1..m−1.
    pub fn sign_of(&self, position: usize) -> SignBit {
        assert!(position < self.period());
        if position <= self.halt_step {
            SignBit::Plus
        } else {
            SignBit::Minus
        }
    }

    /// Whether the transition out of clock position `from` flips the sign.
    ///
    /// The flip happens on the step T → T+1 (halt raised) and on the
    /// wraparound m−1 → 0. For m = 2 these are the same edge and the flips
    /// cancel, matching sign_of ≡ plus.
    pub fn flips_sign(&self, from: usize) -> bool {
        let halt_edge = from == self.halt_step;
        let wrap_edge = from == self.period() - 1;
        halt_edge ^ wrap_edge
    }
}

/// Two-sided truncation with clock support {−L..L}. Forward gates g_1..g_L
/// sit on the edges ℓ → ℓ+1 for ℓ ≥ 0; the edge ℓ → ℓ+1 for ℓ < 0 carries
/// adjoint(g_{−ℓ}), so stepping backward from 0 performs the computation too.
#[derive(Debug, Clone)]
pub struct TruncatedSchedule {
    num_qubits: usize,
    half_width: usize,
    forward_gates: Vec<Gate>, // forward_gates[i] is gate index i+1
}

impl TruncatedSchedule {
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    /// Number of clock sites, 2L+1.
    pub fn num_sites(&self) -> usize {
        2 * self.half_width + 1
    }

    /// Forward gate with 1-based index (1..=L).
    pub fn forward_gate(&self, index: usize) -> &Gate {
        assert!((1..=self.half_width).contains(&index));
        &self.forward_gates[index - 1]
    }

    /// The gate applied on the clock edge `from` → `from`+1,
    /// for `from` ∈ [−L, L−1].
    pub fn edge_gate(&self, from: i64) -> Gate {
        let l = self.half_width as i64;
        assert!((-l..l).contains(&from), "edge out of range");
        if from >= 0 {
            self.forward_gates[from as usize].clone()
        } else {
            self.forward_gates[(-from - 1) as usize].adjoint()
        }
    }
}

/// Either flavor of clocked schedule.
#[derive(Debug, Clone)]
pub enum Schedule {
    Cyclic(CyclicSchedule),
    Truncated(TruncatedSchedule),
}

impl Schedule {
    pub fn num_qubits(&self) -> usize {
        match self {
            Schedule::Cyclic(s) => s.num_qubits(),
            Schedule::Truncated(s) => s.num_qubits(),
        }
    }

    pub fn clock_sites(&self) -> usize {
        match self {
            Schedule::Cyclic(s) => s.period(),
            Schedule::Truncated(s) => s.num_sites(),
        }
    }

    pub fn sign_states(&self) -> usize {
        match self {
            Schedule::Cyclic(_) => 2,
            Schedule::Truncated(_) => 1,
        }
    }
}

/// Close a halting circuit into a cyclic schedule of period m = 2T.
pub fn cyclic_closure(circuit: &Circuit) -> Result<CyclicSchedule> {
    if circuit.is_empty() {
        return Err(Error::EmptyCircuit);
    }
    let t = circuit.len();
    let mut step_gates = Vec::with_capacity(2 * t);
    step_gates.extend(circuit.gates().iter().cloned());
    step_gates.extend(circuit.gates().iter().rev().map(Gate::adjoint));
    Ok(CyclicSchedule {
        num_qubits: circuit.num_qubits(),
        halt_step: t,
        step_gates,
    })
}

/// Truncate a non-halting stream to clock sites {−L..L}.
///
/// Errors with `HaltsWithinWindow` if the stream halts before supplying the
/// L forward gates; callers should switch to [`cyclic_closure`].
pub fn truncate_two_sided(program: &Program, half_width: usize) -> Result<TruncatedSchedule> {
    assert!(half_width >= 1, "half width must be at least 1");
    let forward_gates = program.prefix(half_width)?;
    Ok(TruncatedSchedule {
        num_qubits: program.num_qubits(),
        half_width,
        forward_gates,
    })
}

/// Index bookkeeping for the (qubits ⊗ sign ⊗ clock) product space.
#[derive(Debug, Clone, Copy)]
pub struct SpaceLayout {
    pub num_qubits: usize,
    pub sign_states: usize,
    pub clock_sites: usize,
}

impl SpaceLayout {
    pub fn dimension(&self) -> usize {
        (1usize << self.num_qubits) * self.sign_states * self.clock_sites
    }

    pub fn block_len(&self) -> usize {
        1usize << self.num_qubits
    }

    /// Start of the amplitude block with the given sign and clock labels.
    pub fn block_start(&self, sign: usize, clock: usize) -> usize {
        debug_assert!(sign < self.sign_states && clock < self.clock_sites);
        (clock * self.sign_states + sign) * self.block_len()
    }
}

/// The clocked step unitary U in matrix-free form.
///
/// Cyclic schedules give a genuine unitary; truncated schedules give an
/// isometry on interior clock sites, with no outgoing transition at ℓ = +L
/// (and none out of ℓ = −L for U†).
#[derive(Debug, Clone)]
pub struct StepUnitary {
    schedule: Schedule,
    layout: SpaceLayout,
}

/// Build the step unitary for a schedule.
pub fn build_step_unitary(schedule: Schedule) -> Result<StepUnitary> {
    StepUnitary::with_cap(schedule, DIMENSION_CAP)
}

impl StepUnitary {
    pub fn with_cap(schedule: Schedule, cap: usize) -> Result<StepUnitary> {
        let layout = SpaceLayout {
            num_qubits: schedule.num_qubits(),
            sign_states: schedule.sign_states(),
            clock_sites: schedule.clock_sites(),
        };
        if layout.dimension() > cap {
            return Err(Error::DimensionCap {
                dim: layout.dimension(),
                cap,
            });
        }
        Ok(StepUnitary { schedule, layout })
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn layout(&self) -> SpaceLayout {
        self.layout
    }

    pub fn dimension(&self) -> usize {
        self.layout.dimension()
    }

    /// U v.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dimension());
        let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
        let n = self.layout.num_qubits;
        let block = self.layout.block_len();
        match &self.schedule {
            Schedule::Cyclic(s) => {
                let m = s.period();
                for from in 0..m {
                    let to = (from + 1) % m;
                    let gate = s.step_gate(from + 1).clone();
                    let flip = s.flips_sign(from);
                    for sign in 0..2 {
                        let sign_to = if flip { 1 - sign } else { sign };
                        let src = &v[self.layout.block_start(sign, from)..][..block];
                        let dst_start = self.layout.block_start(sign_to, to);
                        apply_gate_slice(src, &mut out[dst_start..dst_start + block], &gate, n);
                    }
                }
            }
            Schedule::Truncated(s) => {
                let l = s.half_width() as i64;
                for from in -l..l {
                    let gate = s.edge_gate(from);
                    let src_block = (from + l) as usize;
                    let dst_block = (from + 1 + l) as usize;
                    let src = &v[self.layout.block_start(0, src_block)..][..block];
                    let dst_start = self.layout.block_start(0, dst_block);
                    apply_gate_slice(src, &mut out[dst_start..dst_start + block], &gate, n);
                }
            }
        }
        out
    }

    /// U† v.
    pub fn apply_adjoint(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dimension());
        let mut out = vec![Complex64::new(0.0, 0.0); v.len()];
        let n = self.layout.num_qubits;
        let block = self.layout.block_len();
        match &self.schedule {
            Schedule::Cyclic(s) => {
                let m = s.period();
                for from in 0..m {
                    let to = (from + 1) % m;
                    let gate = s.step_gate(from + 1).adjoint();
                    let flip = s.flips_sign(from);
                    for sign in 0..2 {
                        let sign_to = if flip { 1 - sign } else { sign };
                        // U maps (sign, from) -> (sign_to, to); U† reverses it.
                        let src = &v[self.layout.block_start(sign_to, to)..][..block];
                        let dst_start = self.layout.block_start(sign, from);
                        apply_gate_slice(src, &mut out[dst_start..dst_start + block], &gate, n);
                    }
                }
            }
            Schedule::Truncated(s) => {
                let l = s.half_width() as i64;
                for from in -l..l {
                    let gate = s.edge_gate(from).adjoint();
                    let src_block = (from + 1 + l) as usize;
                    let dst_block = (from + l) as usize;
                    let src = &v[self.layout.block_start(0, src_block)..][..block];
                    let dst_start = self.layout.block_start(0, dst_block);
                    apply_gate_slice(src, &mut out[dst_start..dst_start + block], &gate, n);
                }
            }
        }
        out
    }

    /// Dense materialization, capped at [`DENSE_CAP`] rows.
    pub fn dense(&self) -> Result<nalgebra::DMatrix<Complex64>> {
        let dim = self.dimension();
        if dim > DENSE_CAP {
            return Err(Error::DimensionCap {
                dim,
                cap: DENSE_CAP,
            });
        }
        let mut mat = nalgebra::DMatrix::zeros(dim, dim);
        let mut basis = vec![Complex64::new(0.0, 0.0); dim];
        for col in 0..dim {
            basis[col] = Complex64::new(1.0, 0.0);
            let image = self.apply(&basis);
            for (row, z) in image.iter().enumerate() {
                mat[(row, col)] = *z;
            }
            basis[col] = Complex64::new(0.0, 0.0);
        }
        Ok(mat)
    }
}

/// The ℓ-th clocked ray state in the full space, from a forward trace.
///
/// Cyclic: position ℓ ∈ {0..m−1} carries qubit state ψ_ℓ for ℓ ≤ T and
/// ψ_{m−ℓ} on the undo leg, sign label sign_of(ℓ). Truncated: position
/// ℓ ∈ {−L..L} carries ψ_{|ℓ|} (backward propagation performs the same
/// computation).
pub fn ray_vector(schedule: &Schedule, trace: &RayTrace, position: i64) -> Result<Vec<Complex64>> {
    let layout = SpaceLayout {
        num_qubits: schedule.num_qubits(),
        sign_states: schedule.sign_states(),
        clock_sites: schedule.clock_sites(),
    };
    let (qubit_state, sign, clock): (&QubitState, usize, usize) = match schedule {
        Schedule::Cyclic(s) => {
            let m = s.period() as i64;
            assert!((0..m).contains(&position), "position out of range");
            let pos = position as usize;
            let fold = if pos <= s.halt_step() {
                pos
            } else {
                s.period() - pos
            };
            if trace.states.len() <= fold {
                return Err(Error::IncompleteTrace {
                    have: trace.states.len(),
                    need: fold + 1,
                });
            }
            let sign = match s.sign_of(pos) {
                SignBit::Plus => 0,
                SignBit::Minus => 1,
            };
            (&trace.states[fold], sign, pos)
        }
        Schedule::Truncated(s) => {
            let l = s.half_width() as i64;
            assert!((-l..=l).contains(&position), "position out of range");
            let fold = position.unsigned_abs() as usize;
            if trace.states.len() <= fold {
                return Err(Error::IncompleteTrace {
                    have: trace.states.len(),
                    need: fold + 1,
                });
            }
            ((&trace.states[fold]), 0, (position + l) as usize)
        }
    };
    let mut v = vec![Complex64::new(0.0, 0.0); layout.dimension()];
    let start = layout.block_start(sign, clock);
    v[start..start + layout.block_len()].copy_from_slice(qubit_state.amplitudes());
    Ok(v)
}

/// |⟨a|b⟩|² for full-space vectors.
pub fn fidelity(a: &[Complex64], b: &[Complex64]) -> f64 {
    inner(a, b).norm_sqr()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::GateKind;
    use crate::program::run_forward;
    use crate::state::norm;

    fn bell_circuit() -> Circuit {
        Circuit::new(
            2,
            vec![
                Gate::standard(GateKind::H, vec![0]).unwrap(),
                Gate::standard(GateKind::Cnot, vec![0, 1]).unwrap(),
            ],
        )
        .unwrap()
    }

    #[test]
    fn single_gate_mirror() {
        let circuit = Circuit::new(1, vec![Gate::standard(GateKind::X, vec![0]).unwrap()]).unwrap();
        let s = cyclic_closure(&circuit).unwrap();
        assert_eq!(s.period(), 2);
        assert_eq!(s.step_gate(1).kind(), GateKind::X);
        assert!(!s.step_gate(1).is_adjointed());
        assert!(s.step_gate(2).is_adjointed());
    }

    #[test]
    fn bell_mirror_layout() {
        let s = cyclic_closure(&bell_circuit()).unwrap();
        assert_eq!(s.period(), 4);
        let kinds: Vec<_> = (1..=4).map(|i| s.step_gate(i).kind()).collect();
        assert_eq!(
            kinds,
            vec![GateKind::H, GateKind::Cnot, GateKind::Cnot, GateKind::H]
        );
        assert!(s.step_gate(3).is_adjointed() && s.step_gate(4).is_adjointed());
    }

    #[test]
    fn mirror_property_composes_to_identity() {
        let circuit = Circuit::new(
            2,
            vec![
                Gate::standard(GateKind::H, vec![0]).unwrap(),
                Gate::standard(GateKind::T, vec![1]).unwrap(),
                Gate::standard(GateKind::Cnot, vec![1, 0]).unwrap(),
            ],
        )
        .unwrap();
        let s = cyclic_closure(&circuit).unwrap();
        let t = s.halt_step();
        for j in 1..=t {
            let prod = s
                .step_gate(t + j)
                .compose_matrix(s.step_gate(t + 1 - j))
                .expect("mirror steps share targets");
            let dim = 1 << s.step_gate(t + j).width();
            for r in 0..dim {
                for c in 0..dim {
                    let want = if r == c { 1.0 } else { 0.0 };
                    assert!((prod[r * dim + c] - want).norm() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn sign_map_and_flips() {
        let circuit = Circuit::new(
            1,
            vec![
                Gate::standard(GateKind::H, vec![0]).unwrap(),
                Gate::standard(GateKind::S, vec![0]).unwrap(),
            ],
        )
        .unwrap();
        let s = cyclic_closure(&circuit).unwrap(); // m = 4, T = 2
        assert_eq!(s.sign_of(0), SignBit::Plus);
        assert_eq!(s.sign_of(2), SignBit::Plus);
        assert_eq!(s.sign_of(3), SignBit::Minus);
        assert!(s.flips_sign(2)); // halt edge 2 -> 3
        assert!(s.flips_sign(3)); // wraparound 3 -> 0
        assert!(!s.flips_sign(0));
    }

    #[test]
    fn m2_sign_flips_cancel() {
        let circuit = Circuit::new(1, vec![Gate::standard(GateKind::X, vec![0]).unwrap()]).unwrap();
        let s = cyclic_closure(&circuit).unwrap();
        assert!(!s.flips_sign(1)); // halt edge and wraparound coincide
        assert_eq!(s.sign_of(0), SignBit::Plus);
        assert_eq!(s.sign_of(1), SignBit::Plus);
    }

    #[test]
    fn identity_m2_step_unitary_is_clock_swap() {
        let circuit = Circuit::new(1, vec![Gate::identity(0)]).unwrap();
        let s = cyclic_closure(&circuit).unwrap();
        let u = build_step_unitary(Schedule::Cyclic(s)).unwrap();
        let dense = u.dense().unwrap();
        let sq = &dense * &dense;
        for i in 0..sq.nrows() {
            for j in 0..sq.ncols() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((sq[(i, j)] - want).norm() < 1e-12, "U^2 != I at {i},{j}");
            }
        }
        // U itself swaps clock blocks: |q,s,0⟩ -> |q,s,1⟩.
        let mut v = vec![Complex64::new(0.0, 0.0); u.dimension()];
        v[0] = Complex64::new(1.0, 0.0);
        let w = u.apply(&v);
        let start = u.layout().block_start(0, 1);
        assert!((w[start] - 1.0).norm() < 1e-12);
    }

    #[test]
    fn x_circuit_single_application() {
        let circuit = Circuit::new(1, vec![Gate::standard(GateKind::X, vec![0]).unwrap()]).unwrap();
        let s = cyclic_closure(&circuit).unwrap();
        let u = build_step_unitary(Schedule::Cyclic(s)).unwrap();
        // |0⟩⊗|+⟩⊗|0⟩ -> |1⟩⊗|+⟩⊗|1⟩
        let mut v = vec![Complex64::new(0.0, 0.0); u.dimension()];
        v[0] = Complex64::new(1.0, 0.0);
        let w = u.apply(&v);
        let idx = u.layout().block_start(0, 1) + 1;
        assert!((w[idx] - 1.0).norm() < 1e-12);
        assert!((norm(&w) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bell_cycle_returns_after_m_steps() {
        let s = cyclic_closure(&bell_circuit()).unwrap();
        let m = s.period();
        let u = build_step_unitary(Schedule::Cyclic(s)).unwrap();
        let mut v = vec![Complex64::new(0.0, 0.0); u.dimension()];
        v[0] = Complex64::new(1.0, 0.0);
        let initial = v.clone();
        for _ in 0..m {
            v = u.apply(&v);
        }
        assert!(fidelity(&initial, &v) >= 1.0 - 1e-10);
    }

    #[test]
    fn cyclic_unitarity_dense() {
        let s = cyclic_closure(&bell_circuit()).unwrap();
        let u = build_step_unitary(Schedule::Cyclic(s)).unwrap();
        let dense = u.dense().unwrap();
        let gram = dense.adjoint() * &dense;
        for i in 0..gram.nrows() {
            for j in 0..gram.ncols() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - want).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn dense_matches_matrix_free_adjoint() {
        let s = cyclic_closure(&bell_circuit()).unwrap();
        let u = build_step_unitary(Schedule::Cyclic(s)).unwrap();
        let dense = u.dense().unwrap();
        let dim = u.dimension();
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        for (i, z) in v.iter_mut().enumerate() {
            *z = Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos());
        }
        let nrm = norm(&v);
        for z in v.iter_mut() {
            *z /= nrm;
        }
        let free = u.apply_adjoint(&v);
        let vec = nalgebra::DVector::from_column_slice(&v);
        let densed = dense.adjoint() * vec;
        for i in 0..dim {
            assert!((free[i] - densed[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn truncated_identity_stream() {
        let program = Program::new(1, vec![Gate::identity(0)], None, true, 64).unwrap();
        let s = truncate_two_sided(&program, 4).unwrap();
        assert_eq!(s.num_sites(), 9);
        for from in -4i64..4 {
            let g = s.edge_gate(from);
            assert_eq!(g.width(), 1);
        }
    }

    #[test]
    fn truncated_reflection_rule() {
        let x = Gate::standard(GateKind::X, vec![0]).unwrap();
        let h = Gate::standard(GateKind::H, vec![0]).unwrap();
        let program = Program::new(1, vec![x, h], None, true, 64).unwrap();
        let s = truncate_two_sided(&program, 3).unwrap();
        // Forward: edges 0->1, 1->2, 2->3 carry X, H, X.
        assert_eq!(s.edge_gate(0).kind(), GateKind::X);
        assert_eq!(s.edge_gate(1).kind(), GateKind::H);
        assert_eq!(s.edge_gate(2).kind(), GateKind::X);
        // Mirrored: edge -1->0 carries X†, edge -2->-1 carries H†.
        assert_eq!(s.edge_gate(-1).kind(), GateKind::X);
        assert!(s.edge_gate(-1).is_adjointed());
        assert_eq!(s.edge_gate(-2).kind(), GateKind::H);
        assert!(s.edge_gate(-2).is_adjointed());
        assert_eq!(s.edge_gate(-3).kind(), GateKind::X);
    }

    #[test]
    fn truncation_rejects_halting_program() {
        let program = Program::new(
            1,
            vec![Gate::standard(GateKind::X, vec![0]).unwrap()],
            None,
            false,
            64,
        )
        .unwrap();
        let err = truncate_two_sided(&program, 4).unwrap_err();
        assert!(matches!(err, Error::HaltsWithinWindow { .. }));
    }

    #[test]
    fn truncated_interior_isometry() {
        let h = Gate::standard(GateKind::H, vec![0]).unwrap();
        let program = Program::new(1, vec![h], None, true, 64).unwrap();
        let s = truncate_two_sided(&program, 3).unwrap();
        let u = build_step_unitary(Schedule::Truncated(s)).unwrap();
        let layout = u.layout();
        // Basis vectors with clock in {-L..L-1} keep unit norm under U.
        for clock in 0..layout.clock_sites - 1 {
            for q in 0..layout.block_len() {
                let mut v = vec![Complex64::new(0.0, 0.0); u.dimension()];
                v[layout.block_start(0, clock) + q] = Complex64::new(1.0, 0.0);
                let w = u.apply(&v);
                assert!((norm(&w) - 1.0).abs() <= 1e-12);
            }
        }
        // The boundary column ℓ = +L has no successor.
        let mut v = vec![Complex64::new(0.0, 0.0); u.dimension()];
        v[layout.block_start(0, layout.clock_sites - 1)] = Complex64::new(1.0, 0.0);
        assert!(norm(&u.apply(&v)) < 1e-15);
    }

    #[test]
    fn ray_reproduction_under_u() {
        let circuit = bell_circuit();
        let program = Program::from_circuit(&circuit, 16).unwrap();
        let trace = run_forward(&program, &QubitState::zero(2)).unwrap();
        let schedule = Schedule::Cyclic(cyclic_closure(&circuit).unwrap());
        let u = build_step_unitary(schedule.clone()).unwrap();
        let mut v = ray_vector(&schedule, &trace, 0).unwrap();
        for pos in 1..4i64 {
            v = u.apply(&v);
            let expect = ray_vector(&schedule, &trace, pos).unwrap();
            assert!(fidelity(&expect, &v) >= 1.0 - 1e-10, "position {pos}");
        }
    }

    #[test]
    fn schedule_composition_is_identity() {
        // Compose all m step gates in order as dense 2^n matrices via
        // repeated application to basis states of the qubit register alone.
        let circuit = Circuit::new(
            2,
            vec![
                Gate::standard(GateKind::H, vec![0]).unwrap(),
                Gate::standard(GateKind::Cnot, vec![0, 1]).unwrap(),
                Gate::standard(GateKind::T, vec![1]).unwrap(),
                Gate::standard(GateKind::Swap, vec![0, 1]).unwrap(),
            ],
        )
        .unwrap();
        let s = cyclic_closure(&circuit).unwrap();
        let n = s.num_qubits();
        for label in 0..(1usize << n) {
            let mut psi = QubitState::basis(n, label);
            for step in 1..=s.period() {
                psi = crate::state::apply_gate(&psi, s.step_gate(step)).unwrap();
            }
            let overlap = psi.inner(&QubitState::basis(n, label));
            assert!((overlap - 1.0).norm() <= 1e-10);
        }
    }

    #[test]
    fn dimension_cap_enforced() {
        let circuit = Circuit::new(1, vec![Gate::identity(0)]).unwrap();
        let s = cyclic_closure(&circuit).unwrap();
        let err = StepUnitary::with_cap(Schedule::Cyclic(s), 4).unwrap_err();
        assert!(matches!(err, Error::DimensionCap { .. }));
    }
}
