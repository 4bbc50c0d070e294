//! Spectra of the clocked Hamiltonian: closed forms, a numeric oracle, and
//! the gap-versus-truncation scans that exhibit the gapped/gapless split.
//!
//! A computation that halts after T steps closes into a cycle of period
//! m = 2T, so U has eigenvalues e^{2πik/m} (m'th roots of unity) and H has
//! eigenvalues 2cos(2πk/m): a discrete, gapped spectrum with plane-wave
//! eigenstates. A computation that never halts fills the whole unit circle
//! e^{2πia}, a ∈ [0,1), and H fills [−2, 2]: continuous and gapless. The
//! truncated schedules approximate the latter, with the restricted gap
//! closing like L^−2.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::clock::{build_step_unitary, ray_vector, truncate_two_sided, CyclicSchedule, Schedule};
use crate::eig::{hermitian_eigen, hermiticity_defect};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_hamiltonian, restrict_to_ray};
use crate::program::{run_forward, Program};
use crate::state::{norm, QubitState};

/// Default tolerance for collapsing near-degenerate eigenvalues into levels.
/// Cycle spectra carry exact two-fold degeneracies that numeric solvers
/// split at the 1e−12 scale.
pub const DEGENERACY_TOL: f64 = 1e-7;

/// Hermiticity defect allowed on input to [`numeric_spectrum`].
pub const HERMITICITY_TOL: f64 = 1e-10;

/// Which eigenvalue family an analytic eigenpair belongs to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EigenLabel {
    /// Halting: integer k with u = e^{2πik/m}.
    RootOfUnity { k: usize, period: usize },
    /// Non-halting: real a ∈ [0, 1) with u = e^{2πia}.
    Phase { a: f64 },
}

/// An analytic eigenpair of U and H = U + U†.
#[derive(Debug, Clone)]
pub struct AnalyticEigenpair {
    pub label: EigenLabel,
    pub u_eigenvalue: Complex64,
    /// 2·Re(u_eigenvalue).
    pub h_eigenvalue: f64,
    /// Plane-wave amplitudes over the ray index (halting spectra only; the
    /// non-halting eigenstates are unnormalizable).
    pub vector: Option<Vec<Complex64>>,
}

/// The m eigenpairs of a halting (cyclic, period m) sector: u = e^{2πik/m},
/// h = 2cos(2πk/m), plane-wave vector components e^{−2πikℓ/m}/√m.
pub fn analytic_halting_spectrum(period: usize) -> Vec<AnalyticEigenpair> {
    assert!(
        period >= 2 && period.is_multiple_of(2),
        "period must be even, ≥ 2"
    );
    let m = period;
    (0..m)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
            let u = Complex64::from_polar(1.0, angle);
            let root_m = (m as f64).sqrt();
            let vector = (0..m)
                .map(|l| Complex64::from_polar(1.0 / root_m, -angle * l as f64))
                .collect();
            AnalyticEigenpair {
                label: EigenLabel::RootOfUnity { k, period: m },
                u_eigenvalue: u,
                h_eigenvalue: 2.0 * u.re,
                vector: Some(vector),
            }
        })
        .collect()
}

/// One point of the non-halting continuum: u = e^{2πia}, h = 2cos(2πa).
pub fn analytic_nonhalting_value(a: f64) -> Result<AnalyticEigenpair> {
    if !(0.0..1.0).contains(&a) {
        return Err(Error::PhaseOutOfRange { value: a });
    }
    let u = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * a);
    Ok(AnalyticEigenpair {
        label: EigenLabel::Phase { a },
        u_eigenvalue: u,
        h_eigenvalue: 2.0 * u.re,
        vector: None,
    })
}

/// Sorted eigenvalues with degeneracy-collapsed levels.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    /// All eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// Distinct level values (means of their members), ascending.
    pub levels: Vec<f64>,
    /// Eigenvalue count per level; sums to the matrix dimension.
    pub multiplicities: Vec<usize>,
    /// levels[1] − levels[0], when at least two levels exist.
    pub gap: Option<f64>,
}

/// Diagonalize a dense Hermitian matrix and report its level structure.
pub fn numeric_spectrum(matrix: &DMatrix<Complex64>) -> Result<SpectrumReport> {
    numeric_spectrum_with(matrix, DEGENERACY_TOL)
}

/// [`numeric_spectrum`] with an explicit degeneracy tolerance.
pub fn numeric_spectrum_with(
    matrix: &DMatrix<Complex64>,
    degeneracy_tol: f64,
) -> Result<SpectrumReport> {
    let dim = matrix.nrows();
    if dim > crate::clock::DENSE_CAP {
        return Err(Error::DimensionCap {
            dim,
            cap: crate::clock::DENSE_CAP,
        });
    }
    let defect = hermiticity_defect(matrix);
    if defect > HERMITICITY_TOL {
        return Err(Error::NotHermitian {
            defect,
            tol: HERMITICITY_TOL,
        });
    }
    let (eigenvalues, _) = hermitian_eigen(matrix)?;
    Ok(report_from_eigenvalues(eigenvalues, degeneracy_tol))
}

/// Collapse sorted eigenvalues into levels.
pub fn report_from_eigenvalues(eigenvalues: Vec<f64>, degeneracy_tol: f64) -> SpectrumReport {
    let mut levels = Vec::new();
    let mut multiplicities = Vec::new();
    let mut anchor = f64::NEG_INFINITY;
    let mut sum = 0.0;
    let mut count = 0usize;
    for &e in &eigenvalues {
        if count > 0 && (e - anchor) <= degeneracy_tol {
            sum += e;
            count += 1;
        } else {
            if count > 0 {
                levels.push(sum / count as f64);
                multiplicities.push(count);
            }
            anchor = e;
            sum = e;
            count = 1;
        }
    }
    if count > 0 {
        levels.push(sum / count as f64);
        multiplicities.push(count);
    }
    let gap = (levels.len() >= 2).then(|| levels[1] - levels[0]);
    SpectrumReport {
        eigenvalues,
        levels,
        multiplicities,
        gap,
    }
}

/// Energy from the ground level to the next distinct level.
pub fn spectral_gap(report: &SpectrumReport) -> Result<f64> {
    report.gap.ok_or(Error::SingleLevel)
}

/// Gap versus truncation half-width, with a log-log power-law fit.
#[derive(Debug, Clone)]
pub struct GapScan {
    pub half_widths: Vec<usize>,
    pub gaps: Vec<f64>,
    /// Slope of log(gap) against log(L).
    pub fit_exponent: f64,
    pub fit_r2: f64,
}

/// Scan the restricted-sector gap of a non-halting program over truncation
/// half-widths. The ray matrix of every truncation is the (2L+1)-site path,
/// so the gap closes like L^−2 and the spectrum fills [−2, 2].
///
/// Runs from the all-zeros initial state; the restricted matrix does not
/// depend on it. Half-widths must be ascending and within the program's
/// step budget.
pub fn gap_scan(program: &Program, half_widths: &[usize]) -> Result<GapScan> {
    if half_widths.is_empty() {
        return Err(Error::TooFewSamples { need: 1, got: 0 });
    }
    if half_widths.windows(2).any(|w| w[0] >= w[1]) || half_widths[0] == 0 {
        return Err(Error::Usage(
            "half-widths must be positive and strictly ascending".into(),
        ));
    }
    let max_l = *half_widths.last().expect("nonempty");
    if let Some(t) = program.halt_step() {
        if t <= max_l {
            return Err(Error::HaltsWithinWindow {
                halted_at: t,
                window: max_l,
            });
        }
    }
    if program.budget() < max_l {
        return Err(Error::BudgetExhausted {
            budget: program.budget(),
        });
    }

    let gaps: Vec<f64> = half_widths
        .par_iter()
        .map(|&l| -> Result<f64> {
            let schedule = Schedule::Truncated(truncate_two_sided(program, l)?);
            let bounded = program.clone().with_budget(l)?;
            let trace = run_forward(&bounded, &QubitState::zero(program.num_qubits()))?;
            let h = build_hamiltonian(build_step_unitary(schedule.clone())?);
            let ray = restrict_to_ray(&h, &trace, &schedule)?;
            let report = numeric_spectrum(ray.entries())?;
            spectral_gap(&report)
        })
        .collect::<Result<_>>()?;

    for (i, w) in gaps.windows(2).enumerate() {
        if w[0] <= 0.0 || w[1] <= 0.0 {
            return Err(Error::InvariantFailed("non-positive truncated gap".into()));
        }
        if w[1] > w[0] + 1e-12 {
            return Err(Error::InvariantFailed(format!(
                "gap increased from L={} to L={}",
                half_widths[i],
                half_widths[i + 1]
            )));
        }
    }

    let xs: Vec<f64> = half_widths.iter().map(|&l| (l as f64).ln()).collect();
    let ys: Vec<f64> = gaps.iter().map(|&g| g.ln()).collect();
    let (fit_exponent, _, fit_r2) = linear_fit(&xs, &ys);
    Ok(GapScan {
        half_widths: half_widths.to_vec(),
        gaps,
        fit_exponent,
        fit_r2,
    })
}

/// Residuals of the plane-wave eigenstates in the full space.
#[derive(Debug, Clone, Copy)]
pub struct PlaneWaveCheck {
    /// max over k of ‖H|k⟩ − 2cos(2πk/m)|k⟩‖₂
    pub max_h_residual: f64,
    /// max over k of ‖U|k⟩ − e^{2πik/m}|k⟩‖₂
    pub max_u_residual: f64,
}

impl PlaneWaveCheck {
    pub fn max(&self) -> f64 {
        self.max_h_residual.max(self.max_u_residual)
    }
}

/// Build each |k⟩ = Σ_ℓ e^{−2πikℓ/m} U^ℓ|b₀⟩|0⟩ / √m in the full space and
/// measure how far it is from an exact eigenvector of U and of H.
pub fn verify_plane_waves(
    schedule: &CyclicSchedule,
    trace: &crate::program::RayTrace,
) -> Result<PlaneWaveCheck> {
    let m = schedule.period();
    let sched = Schedule::Cyclic(schedule.clone());
    let u = build_step_unitary(sched.clone())?;
    let h = build_hamiltonian(u.clone());
    let rays: Vec<Vec<Complex64>> = (0..m as i64)
        .map(|pos| ray_vector(&sched, trace, pos))
        .collect::<Result<_>>()?;
    let dim = u.dimension();
    let root_m = (m as f64).sqrt();
    let mut check = PlaneWaveCheck {
        max_h_residual: 0.0,
        max_u_residual: 0.0,
    };
    for k in 0..m {
        let angle = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
        let mut wave = vec![Complex64::new(0.0, 0.0); dim];
        for (l, ray) in rays.iter().enumerate() {
            let phase = Complex64::from_polar(1.0 / root_m, -angle * l as f64);
            for (w, r) in wave.iter_mut().zip(ray) {
                *w += phase * r;
            }
        }
        let u_eig = Complex64::from_polar(1.0, angle);
        let h_eig = 2.0 * angle.cos();

        let u_image = u.apply(&wave);
        let u_res: Vec<Complex64> = u_image
            .iter()
            .zip(&wave)
            .map(|(a, b)| a - b * u_eig)
            .collect();
        check.max_u_residual = check.max_u_residual.max(norm(&u_res));

        let h_image = h.apply(&wave);
        let h_res: Vec<Complex64> = h_image
            .iter()
            .zip(&wave)
            .map(|(a, b)| a - b * h_eig)
            .collect();
        check.max_h_residual = check.max_h_residual.max(norm(&h_res));
    }
    Ok(check)
}

/// Ordinary least squares fit y = slope·x + intercept; returns
/// (slope, intercept, R²).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2, "need at least two points");
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
        syy += (y - mean_y) * (y - mean_y);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res = syy - slope * sxy;
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    (slope, intercept, r2)
}

/// Max over uniformly spaced probe points in [−2, 2] of the distance to the
/// nearest eigenvalue; measures how densely a truncated spectrum fills the
/// band.
pub fn max_spectrum_distance(eigenvalues: &[f64], num_probes: usize) -> f64 {
    assert!(num_probes >= 2 && !eigenvalues.is_empty());
    let mut worst = 0.0f64;
    for i in 0..num_probes {
        let probe = -2.0 + 4.0 * i as f64 / (num_probes - 1) as f64;
        let nearest = eigenvalues
            .iter()
            .map(|e| (e - probe).abs())
            .fold(f64::INFINITY, f64::min);
        worst = worst.max(nearest);
    }
    worst
}
