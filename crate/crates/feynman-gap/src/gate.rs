//! Quantum logic gates on one or two qubits.
//!
//! Every gate carries its dense matrix so that mirrored (adjoint) steps and
//! user-supplied unitaries are handled uniformly. Matrices are row-major over
//! the local basis in which `targets[0]` is the least-significant bit.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance for the unitarity check ‖G†G − I‖_max on every gate.
pub const UNITARITY_TOL: f64 = 1e-12;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Named gate kinds. `Custom` covers any user-supplied unitary on ≤ 2 qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateKind {
    X,
    Y,
    Z,
    H,
    S,
    T,
    Cnot,
    Cz,
    Swap,
    Custom,
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::X | GateKind::Y | GateKind::Z | GateKind::H | GateKind::S | GateKind::T => 1,
            GateKind::Cnot | GateKind::Cz | GateKind::Swap => 2,
            GateKind::Custom => 0, // arity comes from the target list
        }
    }

    /// Canonical name used in JSON descriptors.
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::H => "H",
            GateKind::S => "S",
            GateKind::T => "T",
            GateKind::Cnot => "CNOT",
            GateKind::Cz => "CZ",
            GateKind::Swap => "SWAP",
            GateKind::Custom => "custom",
        }
    }

    pub fn from_name(name: &str) -> Option<GateKind> {
        Some(match name {
            "X" => GateKind::X,
            "Y" => GateKind::Y,
            "Z" => GateKind::Z,
            "H" => GateKind::H,
            "S" => GateKind::S,
            "T" => GateKind::T,
            "CNOT" => GateKind::Cnot,
            "CZ" => GateKind::Cz,
            "SWAP" => GateKind::Swap,
            "custom" => GateKind::Custom,
            _ => return None,
        })
    }
}

/// A gate instance: kind, target qubits, and the 2^w × 2^w matrix it applies.
///
/// `adjointed` records whether this gate is the Hermitian conjugate of its
/// kind's canonical matrix (mirror steps in cyclic schedules set it).
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    kind: GateKind,
    targets: Vec<usize>,
    matrix: Vec<Complex64>, // row-major, dimension 2^targets.len()
    adjointed: bool,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn standard_matrix(kind: GateKind) -> Vec<Complex64> {
    match kind {
        GateKind::X => vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)],
        GateKind::Y => vec![c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)],
        GateKind::Z => vec![c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)],
        GateKind::H => vec![
            c(FRAC_1_SQRT_2, 0.),
            c(FRAC_1_SQRT_2, 0.),
            c(FRAC_1_SQRT_2, 0.),
            c(-FRAC_1_SQRT_2, 0.),
        ],
        GateKind::S => vec![c(1., 0.), c(0., 0.), c(0., 0.), c(0., 1.)],
        GateKind::T => {
            let t = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
            vec![c(1., 0.), c(0., 0.), c(0., 0.), t]
        }
        // Local basis: targets[0] is bit 0, targets[1] is bit 1.
        // CNOT: control = targets[0], target = targets[1].
        GateKind::Cnot => {
            let mut m = vec![c(0., 0.); 16];
            m[0] = c(1., 0.); // |00⟩ -> |00⟩
            m[4 * 3 + 1] = c(1., 0.); // |01⟩ (control set) -> |11⟩
            m[4 * 2 + 2] = c(1., 0.); // |10⟩ -> |10⟩
            m[4 + 3] = c(1., 0.); // |11⟩ -> |01⟩
            m
        }
        GateKind::Cz => {
            let mut m = vec![c(0., 0.); 16];
            m[0] = c(1., 0.);
            m[4 + 1] = c(1., 0.);
            m[4 * 2 + 2] = c(1., 0.);
            m[4 * 3 + 3] = c(-1., 0.);
            m
        }
        GateKind::Swap => {
            let mut m = vec![c(0., 0.); 16];
            m[0] = c(1., 0.);
            m[4 * 2 + 1] = c(1., 0.);
            m[4 + 2] = c(1., 0.);
            m[4 * 3 + 3] = c(1., 0.);
            m
        }
        GateKind::Custom => unreachable!("custom gates carry their own matrix"),
    }
}

/// Max-entry norm of G†G − I for a row-major square matrix.
pub fn unitarity_defect(matrix: &[Complex64], dim: usize) -> f64 {
    let mut defect = 0.0f64;
    for i in 0..dim {
        for j in 0..dim {
            // (G†G)_{ij} = Σ_k conj(G_{ki}) G_{kj}
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..dim {
                acc += matrix[k * dim + i].conj() * matrix[k * dim + j];
            }
            let target = if i == j { 1.0 } else { 0.0 };
            defect = defect.max((acc - target).norm());
        }
    }
    defect
}

impl Gate {
    /// A standard library gate on the given targets.
    pub fn standard(kind: GateKind, targets: Vec<usize>) -> Result<Gate> {
        if kind == GateKind::Custom {
            return Err(Error::BadMatrixShape {
                targets: targets.len(),
                expected: 1 << targets.len(),
                rows: 0,
                cols: 0,
            });
        }
        let gate = Gate {
            matrix: standard_matrix(kind),
            kind,
            targets,
            adjointed: false,
        };
        gate.validate()?;
        Ok(gate)
    }

    /// A user-supplied unitary, row-major, on 1 or 2 targets.
    pub fn custom(targets: Vec<usize>, matrix: Vec<Complex64>) -> Result<Gate> {
        let dim = 1usize << targets.len();
        if matrix.len() != dim * dim {
            let rows = (matrix.len() as f64).sqrt() as usize;
            return Err(Error::BadMatrixShape {
                targets: targets.len(),
                expected: dim,
                rows,
                cols: rows,
            });
        }
        let gate = Gate {
            kind: GateKind::Custom,
            targets,
            matrix,
            adjointed: false,
        };
        gate.validate()?;
        Ok(gate)
    }

    /// The 1-qubit identity as a custom gate; handy for non-halting streams.
    pub fn identity(target: usize) -> Gate {
        Gate::custom(
            vec![target],
            vec![c(1., 0.), c(0., 0.), c(0., 0.), c(1., 0.)],
        )
        .expect("identity is unitary")
    }

    fn validate(&self) -> Result<()> {
        let w = self.targets.len();
        if w == 0 || w > 2 {
            return Err(Error::BadMatrixShape {
                targets: w,
                expected: 1 << w,
                rows: 0,
                cols: 0,
            });
        }
        if self.kind != GateKind::Custom && self.kind.arity() != w {
            return Err(Error::BadMatrixShape {
                targets: w,
                expected: 1 << self.kind.arity(),
                rows: 1 << w,
                cols: 1 << w,
            });
        }
        if w == 2 && self.targets[0] == self.targets[1] {
            return Err(Error::DuplicateTargets(self.targets.clone()));
        }
        if self
            .matrix
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        let dim = 1usize << w;
        let defect = unitarity_defect(&self.matrix, dim);
        if defect > UNITARITY_TOL {
            return Err(Error::NotUnitary {
                defect,
                tol: UNITARITY_TOL,
            });
        }
        Ok(())
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    /// Row-major matrix over the local target basis.
    pub fn matrix(&self) -> &[Complex64] {
        &self.matrix
    }

    pub fn is_adjointed(&self) -> bool {
        self.adjointed
    }

    /// Number of target qubits.
    pub fn width(&self) -> usize {
        self.targets.len()
    }

    /// The Hermitian conjugate, acting on the same targets.
    pub fn adjoint(&self) -> Gate {
        let dim = 1usize << self.targets.len();
        let mut adj = vec![c(0., 0.); dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                adj[j * dim + i] = self.matrix[i * dim + j].conj();
            }
        }
        Gate {
            kind: self.kind,
            targets: self.targets.clone(),
            matrix: adj,
            adjointed: !self.adjointed,
        }
    }

    /// Check target indices against a register size.
    pub fn check_targets(&self, num_qubits: usize) -> Result<()> {
        for &t in &self.targets {
            if t >= num_qubits {
                return Err(Error::TargetOutOfRange {
                    target: t,
                    num_qubits,
                });
            }
        }
        Ok(())
    }

    /// Matrix product self · other as a dense matrix, when both act on the
    /// same targets. Used by the mirror-property checks.
    pub fn compose_matrix(&self, other: &Gate) -> Option<Vec<Complex64>> {
        if self.targets != other.targets {
            return None;
        }
        let dim = 1usize << self.targets.len();
        let mut out = vec![c(0., 0.); dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..dim {
                    acc += self.matrix[i * dim + k] * other.matrix[k * dim + j];
                }
                out[i * dim + j] = acc;
            }
        }
        Some(out)
    }
}
