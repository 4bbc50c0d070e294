//! Unary-clock local terms.
//!
//! Encoding the clock value as the position of a single 1 on a line of 0's
//! turns each clock hop into raise/lower operators on two cells, so every
//! Hamiltonian term touches at most two qubit sites plus two clock cells:
//! four sites total. Terms are emitted pairwise with their Hermitian
//! conjugates, and [`assemble_from_terms`] rebuilds the Hamiltonian on the
//! legal (single-1) subspace as an independent check.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::clock::{Schedule, SignBit};
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianOp;

/// A site a local term acts on: a qubit or a unary clock cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SiteId {
    Qubit(usize),
    ClockCell(usize),
}

impl SiteId {
    pub fn describe(&self) -> String {
        match self {
            SiteId::Qubit(i) => format!("qubit {i}"),
            SiteId::ClockCell(i) => format!("clock cell {i}"),
        }
    }
}

/// One local term: a dense operator over its listed sites (each site is a
/// two-state system; site j is bit j of the row-major tensor index).
#[derive(Debug, Clone)]
pub struct LocalTerm {
    pub sites: Vec<SiteId>,
    pub tensor: Vec<Complex64>,
}

impl LocalTerm {
    pub fn support(&self) -> usize {
        self.sites.len()
    }

    fn dim(&self) -> usize {
        1usize << self.sites.len()
    }

    /// The Hermitian conjugate on the same sites.
    pub fn hermitian_conjugate(&self) -> LocalTerm {
        let dim = self.dim();
        let mut t = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                t[j * dim + i] = self.tensor[i * dim + j].conj();
            }
        }
        LocalTerm {
            sites: self.sites.clone(),
            tensor: t,
        }
    }
}

/// The unary clock register: `num_cells` two-state cells whose legal
/// subspace ("exactly one cell is 1") has dimension `num_cells`.
#[derive(Debug, Clone, Copy)]
pub struct UnaryClockLayout {
    pub num_qubits: usize,
    pub num_cells: usize,
}

impl UnaryClockLayout {
    pub fn for_schedule(schedule: &Schedule) -> UnaryClockLayout {
        UnaryClockLayout {
            num_qubits: schedule.num_qubits(),
            num_cells: schedule.clock_sites(),
        }
    }

    /// Dimension of the legal subspace, 2^n · num_cells.
    pub fn legal_dimension(&self) -> usize {
        (1usize << self.num_qubits) * self.num_cells
    }

    fn legal_index(&self, qubits: usize, cell: usize) -> usize {
        cell * (1usize << self.num_qubits) + qubits
    }
}

fn hop_term(gate: &crate::gate::Gate, from_cell: usize, to_cell: usize) -> LocalTerm {
    let mut sites: Vec<SiteId> = gate.targets().iter().map(|&t| SiteId::Qubit(t)).collect();
    let w = sites.len();
    sites.push(SiteId::ClockCell(from_cell)); // bit w
    sites.push(SiteId::ClockCell(to_cell)); // bit w + 1
    let qdim = 1usize << w;
    let dim = qdim * 4;
    let mut tensor = vec![Complex64::new(0.0, 0.0); dim * dim];
    // Clock factor: raise `to`, lower `from` = |from=0,to=1⟩⟨from=1,to=0|.
    let c_in = 1usize << w; // from bit set
    let c_out = 1usize << (w + 1); // to bit set
    let gm = gate.matrix();
    for qr in 0..qdim {
        for qc in 0..qdim {
            tensor[(qr | c_out) * dim + (qc | c_in)] = gm[qr * qdim + qc];
        }
    }
    LocalTerm { sites, tensor }
}

/// Emit the ≤4-local unary-clock terms of H = U + U†: one hop term per step
/// (the gate tensored with raise/lower on the step's clock cells) plus its
/// Hermitian conjugate.
pub fn emit_local_terms(schedule: &Schedule, layout: &UnaryClockLayout) -> Vec<LocalTerm> {
    assert_eq!(layout.num_cells, schedule.clock_sites(), "layout mismatch");
    assert_eq!(layout.num_qubits, schedule.num_qubits(), "layout mismatch");
    let mut terms = Vec::new();
    match schedule {
        Schedule::Cyclic(s) => {
            let m = s.period();
            for from in 0..m {
                let to = (from + 1) % m;
                let term = hop_term(s.step_gate(from + 1), from, to);
                terms.push(term.hermitian_conjugate());
                terms.push(term);
            }
        }
        Schedule::Truncated(s) => {
            let l = s.half_width() as i64;
            for from in -l..l {
                let gate = s.edge_gate(from);
                let term = hop_term(&gate, (from + l) as usize, (from + 1 + l) as usize);
                terms.push(term.hermitian_conjugate());
                terms.push(term);
            }
        }
    }
    terms
}

/// Sum the terms on the legal single-1 clock subspace, as a dense matrix
/// indexed by cell · 2^n + qubit label.
pub fn assemble_from_terms(
    terms: &[LocalTerm],
    layout: &UnaryClockLayout,
) -> Result<DMatrix<Complex64>> {
    let dim = layout.legal_dimension();
    if dim > crate::clock::DENSE_CAP {
        return Err(Error::DimensionCap {
            dim,
            cap: crate::clock::DENSE_CAP,
        });
    }
    let qdim = 1usize << layout.num_qubits;
    let mut out = DMatrix::zeros(dim, dim);
    for term in terms {
        for site in &term.sites {
            match *site {
                SiteId::Qubit(i) if i >= layout.num_qubits => {
                    return Err(Error::BadTermSite(site.describe()))
                }
                SiteId::ClockCell(c) if c >= layout.num_cells => {
                    return Err(Error::BadTermSite(site.describe()))
                }
                _ => {}
            }
        }
        let k = term.sites.len();
        let local_dim = 1usize << k;
        for cell in 0..layout.num_cells {
            for qubits in 0..qdim {
                // Read this ket's bits on the term's sites.
                let mut in_local = 0usize;
                for (j, site) in term.sites.iter().enumerate() {
                    let bit = match *site {
                        SiteId::Qubit(i) => (qubits >> i) & 1,
                        SiteId::ClockCell(c) => usize::from(c == cell),
                    };
                    in_local |= bit << j;
                }
                for out_local in 0..local_dim {
                    let coeff = term.tensor[out_local * local_dim + in_local];
                    if coeff.norm_sqr() == 0.0 {
                        continue;
                    }
                    // Patch the output bits back into the configuration.
                    let mut out_qubits = qubits;
                    let mut touched_cells: Vec<(usize, usize)> = Vec::with_capacity(2);
                    for (j, site) in term.sites.iter().enumerate() {
                        let bit = (out_local >> j) & 1;
                        match *site {
                            SiteId::Qubit(i) => {
                                out_qubits = (out_qubits & !(1 << i)) | (bit << i);
                            }
                            SiteId::ClockCell(c) => touched_cells.push((c, bit)),
                        }
                    }
                    // Clock legality: exactly one cell set after patching.
                    let untouched_one = if touched_cells.iter().any(|&(c, _)| c == cell) {
                        0
                    } else {
                        1
                    };
                    let mut ones = untouched_one;
                    let mut out_cell = if untouched_one == 1 { Some(cell) } else { None };
                    for &(c, bit) in &touched_cells {
                        if bit == 1 {
                            ones += 1;
                            out_cell = Some(c);
                        }
                    }
                    if ones != 1 {
                        continue; // projected out of the legal subspace
                    }
                    let row = layout.legal_index(out_qubits, out_cell.expect("one cell set"));
                    let col = layout.legal_index(qubits, cell);
                    out[(row, col)] += coeff;
                }
            }
        }
    }
    Ok(out)
}

/// The dense Hamiltonian restricted to the legal subspace, for comparison
/// against [`assemble_from_terms`].
///
/// For cyclic schedules the sign qubit is a function of the clock position
/// (it flips at fixed edges), so the sign-consistent configurations
/// |q⟩|sign_of(ℓ)⟩|ℓ⟩ form an invariant subspace in bijection with the
/// legal unary states; this extracts that block. Truncated schedules carry
/// no sign factor and map across directly.
pub fn dense_on_legal_subspace(h: &HamiltonianOp) -> Result<DMatrix<Complex64>> {
    let dense = h.dense()?;
    let layout = h.source().layout();
    let qdim = layout.block_len();
    match h.schedule() {
        Schedule::Truncated(_) => Ok(dense),
        Schedule::Cyclic(s) => {
            let m = s.period();
            let dim = qdim * m;
            let mut indices = Vec::with_capacity(dim);
            for cell in 0..m {
                let sign = match s.sign_of(cell) {
                    SignBit::Plus => 0,
                    SignBit::Minus => 1,
                };
                for q in 0..qdim {
                    indices.push(layout.block_start(sign, cell) + q);
                }
            }
            let mut out = DMatrix::zeros(dim, dim);
            for (i, &fi) in indices.iter().enumerate() {
                for (j, &fj) in indices.iter().enumerate() {
                    out[(i, j)] = dense[(fi, fj)];
                }
            }
            Ok(out)
        }
    }
}
