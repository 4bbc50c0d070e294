//! Circuits, gate-stream programs, and the forward computational ray.
//!
//! A `Circuit` is a finite gate list. A `Program` wraps a deterministic gate
//! stream with an explicit halt signal and a step budget, covering both
//! halting and non-halting computations under one interface.

use crate::error::{Error, Result};
use crate::gate::Gate;
use crate::state::{apply_gate, QubitState};

/// Default step budget for programs.
pub const DEFAULT_BUDGET: usize = 1024;

/// A finite, ordered gate list on `num_qubits` qubits.
#[derive(Debug, Clone)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(num_qubits: usize, gates: Vec<Gate>) -> Result<Circuit> {
        if gates.is_empty() {
            return Err(Error::EmptyCircuit);
        }
        for g in &gates {
            g.check_targets(num_qubits)?;
        }
        Ok(Circuit { num_qubits, gates })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Number of steps T.
    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }
}

/// One step of a gate stream.
#[derive(Debug, Clone)]
pub enum StepOutput {
    Gate(Gate),
    Halt,
}

/// A deterministic gate stream with halt signal and budget.
///
/// The stream is a base gate list that either plays once and halts, halts at
/// an explicit earlier step, or cycles forever (`repeat`). Purity holds by
/// construction: the gate at a step depends only on the step index.
#[derive(Debug, Clone)]
pub struct Program {
    num_qubits: usize,
    gates: Vec<Gate>,
    halt_after: Option<usize>,
    repeat: bool,
    budget: usize,
}

impl Program {
    pub fn new(
        num_qubits: usize,
        gates: Vec<Gate>,
        halt_after: Option<usize>,
        repeat: bool,
        budget: usize,
    ) -> Result<Program> {
        if budget == 0 {
            return Err(Error::ZeroBudget);
        }
        if gates.is_empty() {
            return Err(Error::EmptyCircuit);
        }
        for g in &gates {
            g.check_targets(num_qubits)?;
        }
        if let Some(t) = halt_after {
            if t == 0 || (!repeat && t > gates.len()) {
                return Err(Error::HaltsWithinWindow {
                    halted_at: t,
                    window: gates.len(),
                });
            }
        }
        Ok(Program {
            num_qubits,
            gates,
            halt_after,
            repeat,
            budget,
        })
    }

    /// A circuit run once, halting after its last gate.
    pub fn from_circuit(circuit: &Circuit, budget: usize) -> Result<Program> {
        Program::new(
            circuit.num_qubits(),
            circuit.gates().to_vec(),
            None,
            false,
            budget,
        )
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn with_budget(mut self, budget: usize) -> Result<Program> {
        if budget == 0 {
            return Err(Error::ZeroBudget);
        }
        self.budget = budget;
        Ok(self)
    }

    /// The stream output at 1-based step index.
    pub fn next_gate(&self, step: usize) -> StepOutput {
        assert!(step >= 1, "steps are 1-based");
        let halt_step = match (self.halt_after, self.repeat) {
            (Some(t), _) => Some(t),
            (None, false) => Some(self.gates.len()),
            (None, true) => None,
        };
        if let Some(t) = halt_step {
            if step > t {
                return StepOutput::Halt;
            }
        }
        let idx = if self.repeat {
            (step - 1) % self.gates.len()
        } else {
            step - 1
        };
        StepOutput::Gate(self.gates[idx].clone())
    }

    /// True when the stream provably never halts (cycles with no halt mark).
    pub fn is_declared_nonhalting(&self) -> bool {
        self.repeat && self.halt_after.is_none()
    }

    /// The halting step T if the stream halts within the budget.
    pub fn halt_step(&self) -> Option<usize> {
        let t = match (self.halt_after, self.repeat) {
            (Some(t), _) => t,
            (None, false) => self.gates.len(),
            (None, true) => return None,
        };
        (t <= self.budget).then_some(t)
    }

    /// The first `len` gates of the stream; `Err` if the stream halts earlier.
    pub fn prefix(&self, len: usize) -> Result<Vec<Gate>> {
        let mut out = Vec::with_capacity(len);
        for step in 1..=len {
            match self.next_gate(step) {
                StepOutput::Gate(g) => out.push(g),
                StepOutput::Halt => {
                    return Err(Error::HaltsWithinWindow {
                        halted_at: step - 1,
                        window: len,
                    })
                }
            }
        }
        Ok(out)
    }

    /// The full halting gate list as a circuit, if the program halts within
    /// its budget.
    pub fn halting_circuit(&self) -> Result<Circuit> {
        if self.is_declared_nonhalting() {
            return Err(Error::NonHaltingInput);
        }
        match self.halt_step() {
            Some(t) => Circuit::new(self.num_qubits, self.prefix(t)?),
            None => Err(Error::BudgetExhausted {
                budget: self.budget,
            }),
        }
    }
}

/// The orthonormal ray of states traced out by a computation: states[ℓ] is
/// the qubit state after ℓ gates. Distinct ray members are orthogonal by
/// construction once tensored with their clock labels, so only norm drift
/// is observable.
#[derive(Debug, Clone)]
pub struct RayTrace {
    pub states: Vec<QubitState>,
    pub halted_at: Option<usize>,
    pub exhausted: bool,
}

impl RayTrace {
    /// Number of stored states (= steps taken + 1).
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Run the stream forward from `initial`, recording every intermediate state.
///
/// states[ℓ] = U_ℓ…U_1|b₀⟩ for ℓ = 0..min(T, B). `halted_at = Some(T)` when
/// the halt signal arrives at step T ≤ B; otherwise `exhausted` is set.
pub fn run_forward(program: &Program, initial: &QubitState) -> Result<RayTrace> {
    if initial.num_qubits() != program.num_qubits {
        return Err(Error::BadStateLength {
            len: initial.amplitudes().len(),
            num_qubits: program.num_qubits,
        });
    }
    let mut states = vec![initial.clone()];
    for step in 1..=program.budget {
        match program.next_gate(step) {
            StepOutput::Gate(gate) => {
                let next = apply_gate(states.last().expect("nonempty"), &gate)?;
                states.push(next);
            }
            StepOutput::Halt => {
                return Ok(RayTrace {
                    states,
                    halted_at: Some(step - 1),
                    exhausted: false,
                })
            }
        }
    }
    // Budget consumed; check whether the very next step would halt.
    let halted_at = match program.next_gate(program.budget + 1) {
        StepOutput::Halt => Some(program.budget),
        StepOutput::Gate(_) => None,
    };
    Ok(RayTrace {
        states,
        halted_at,
        exhausted: halted_at.is_none(),
    })
}

/// Max over ℓ of |‖ψ_ℓ‖ − 1|. Clock-label orthogonality is structural, so
/// norm drift is the only orthonormality defect a trace can show.
pub fn ray_orthonormality_defect(trace: &RayTrace) -> f64 {
    trace
        .states
        .iter()
        .map(|s| (s.norm() - 1.0).abs())
        .fold(0.0, f64::max)
}
