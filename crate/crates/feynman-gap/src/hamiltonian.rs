//! H = U + U† and its restriction to the computational ray.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::clock::{ray_vector, Schedule, StepUnitary, DENSE_CAP};
use crate::error::{Error, Result};
use crate::program::{ray_orthonormality_defect, RayTrace};
use crate::state::inner;

/// Tolerance on the ray trace handed to [`restrict_to_ray`].
pub const RAY_DEFECT_TOL: f64 = 1e-8;

/// The clocked Hamiltonian in matrix-free form. Hermitian by construction,
/// with spectrum contained in [−2, 2] since U is unitary (or an interior
/// isometry in the truncated case).
#[derive(Debug, Clone)]
pub struct HamiltonianOp {
    source: StepUnitary,
}

/// Assemble H = U + U† over a step unitary.
pub fn build_hamiltonian(source: StepUnitary) -> HamiltonianOp {
    HamiltonianOp { source }
}

impl HamiltonianOp {
    pub fn dimension(&self) -> usize {
        self.source.dimension()
    }

    pub fn source(&self) -> &StepUnitary {
        &self.source
    }

    pub fn schedule(&self) -> &Schedule {
        self.source.schedule()
    }

    /// (U + U†) v.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut forward = self.source.apply(v);
        let backward = self.source.apply_adjoint(v);
        for (f, b) in forward.iter_mut().zip(backward) {
            *f += b;
        }
        forward
    }

    /// Dense materialization, capped at [`DENSE_CAP`] rows. Matrix-free
    /// application stays available above the cap.
    pub fn dense(&self) -> Result<DMatrix<Complex64>> {
        let dim = self.dimension();
        if dim > DENSE_CAP {
            return Err(Error::DimensionCap {
                dim,
                cap: DENSE_CAP,
            });
        }
        let mut mat = DMatrix::zeros(dim, dim);
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

/// H restricted to the subspace spanned by the clocked ray states.
///
/// For cyclic schedules this is the m-cycle adjacency matrix (with the m = 2
/// double edge giving entries of 2); for truncated schedules the
/// (2L+1)-path adjacency. Entries are computed from explicit inner products
/// so structural bugs surface instead of being baked in.
#[derive(Debug, Clone)]
pub struct RayMatrix {
    entries: DMatrix<Complex64>,
    clock_labels: Vec<i64>,
    sector: Sector,
}

/// Which construction a restricted matrix came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sector {
    /// Cyclic schedule of the given period m.
    Cyclic { period: usize },
    /// Truncated schedule of the given half width L.
    Truncated { half_width: usize },
}

impl RayMatrix {
    /// Assemble a restricted matrix from parts, e.g. for walks on externally
    /// constructed cycle/path matrices. Validates shape and Hermiticity.
    pub fn from_parts(
        entries: DMatrix<Complex64>,
        clock_labels: Vec<i64>,
        sector: Sector,
    ) -> Result<RayMatrix> {
        assert_eq!(entries.nrows(), entries.ncols(), "matrix must be square");
        assert_eq!(entries.nrows(), clock_labels.len(), "label count mismatch");
        let defect = crate::eig::hermiticity_defect(&entries);
        if defect > 1e-10 {
            return Err(Error::NotHermitian { defect, tol: 1e-10 });
        }
        Ok(RayMatrix {
            entries,
            clock_labels,
            sector,
        })
    }

    pub fn dimension(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// Clock label of each basis row: 0..m−1 (cyclic) or −L..L (truncated).
    pub fn clock_labels(&self) -> &[i64] {
        &self.clock_labels
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    /// Row index of the clock origin ℓ = 0.
    pub fn origin_index(&self) -> usize {
        match self.sector {
            Sector::Cyclic { .. } => 0,
            Sector::Truncated { half_width } => half_width,
        }
    }
}

/// Project H onto the ray basis: entries[i][j] = ⟨ray_i | H | ray_j⟩.
pub fn restrict_to_ray(
    hamiltonian: &HamiltonianOp,
    trace: &RayTrace,
    schedule: &Schedule,
) -> Result<RayMatrix> {
    let defect = ray_orthonormality_defect(trace);
    if defect > RAY_DEFECT_TOL {
        return Err(Error::NonOrthonormalTrace {
            defect,
            tol: RAY_DEFECT_TOL,
        });
    }
    let (positions, sector): (Vec<i64>, Sector) = match schedule {
        Schedule::Cyclic(s) => (
            (0..s.period() as i64).collect(),
            Sector::Cyclic { period: s.period() },
        ),
        Schedule::Truncated(s) => {
            let l = s.half_width() as i64;
            (
                (-l..=l).collect(),
                Sector::Truncated {
                    half_width: s.half_width(),
                },
            )
        }
    };
    let rays: Vec<Vec<Complex64>> = positions
        .iter()
        .map(|&pos| ray_vector(schedule, trace, pos))
        .collect::<Result<_>>()?;
    let dim = rays.len();
    let mut entries = DMatrix::zeros(dim, dim);
    for j in 0..dim {
        let image = hamiltonian.apply(&rays[j]);
        for i in 0..dim {
            entries[(i, j)] = inner(&rays[i], &image);
        }
    }
    Ok(RayMatrix {
        entries,
        clock_labels: positions,
        sector,
    })
}

/// |⟨x, Hy⟩ − conj(⟨y, Hx⟩)| for a probe pair; the Hermiticity witness.
pub fn hermiticity_probe(h: &HamiltonianOp, x: &[Complex64], y: &[Complex64]) -> f64 {
    let hy = h.apply(y);
    let hx = h.apply(x);
    (inner(x, &hy) - inner(y, &hx).conj()).norm()
}
