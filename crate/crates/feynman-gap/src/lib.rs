//! Clocked-unitary Hamiltonians for quantum circuits.
//!
//! A quantum program advances through an orthonormal ray of states
//! ψ_ℓ = U_ℓ…U_1|b₀⟩, tracked by an explicit clock register. This crate
//! lowers circuits and gate streams into the clocked step unitary U, builds
//! the Hamiltonian H = U + U† (in matrix-free, dense, and ≤4-local
//! unary-clock forms), and exposes the spectral dichotomy between the two
//! kinds of computation:
//!
//! - **halting**: the evolution closes into a cycle of period m = 2T, U has
//!   root-of-unity eigenvalues, H has the discrete gapped spectrum
//!   2cos(2πk/m) with plane-wave eigenstates, and the clock walk bounces;
//! - **non-halting**: the clock line is truncated at ±L, the restricted
//!   spectrum fills [−2, 2] as L grows with a gap closing like L^−2, and the
//!   clock walk spreads ballistically.
//!
//! The `feynman-gap` binary drives the same pipeline from program JSON files;
//! see the crate README.

pub mod clock;
pub mod dynamics;
pub mod eig;
pub mod error;
pub mod gate;
pub mod hamiltonian;
pub mod program;
pub mod spectral;
pub mod state;
pub mod terms;

pub mod cli;
pub mod io;

pub use clock::{
    build_step_unitary, cyclic_closure, truncate_two_sided, CyclicSchedule, Schedule, SignBit,
    StepUnitary, TruncatedSchedule,
};
pub use dynamics::{bounce_metrics, evolve, expm, spread_metrics, BounceReport, WalkTrajectory};
pub use error::{Error, Result};
pub use gate::{Gate, GateKind};
pub use hamiltonian::{build_hamiltonian, restrict_to_ray, HamiltonianOp, RayMatrix, Sector};
pub use program::{ray_orthonormality_defect, run_forward, Circuit, Program, RayTrace};
pub use spectral::{
    analytic_halting_spectrum, analytic_nonhalting_value, gap_scan, numeric_spectrum, spectral_gap,
    verify_plane_waves, AnalyticEigenpair, GapScan, SpectrumReport,
};
pub use state::{apply_gate, QubitState};
pub use terms::{assemble_from_terms, emit_local_terms, LocalTerm, SiteId, UnaryClockLayout};
