//! Clock walks under e^{−iHt}.
//!
//! Evolution runs on the restricted ray matrix (the ray subspace is invariant
//! under H, which the plane-wave residual checks certify), so cyclic sectors
//! walk on an m-cycle and truncated sectors on a (2L+1)-path. Halting
//! computations bounce: the return probability re-peaks periodically.
//! Non-halting computations spread ballistically until the truncation
//! boundary interferes.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::eig::hermitian_eigen;
use crate::error::{Error, Result};
use crate::hamiltonian::{RayMatrix, Sector};
use crate::spectral::linear_fit;

/// Default return-probability threshold for peak detection.
pub const PEAK_THRESHOLD: f64 = 0.5;

/// Time series of clock-position distributions and derived observables.
#[derive(Debug, Clone)]
pub struct WalkTrajectory {
    pub times: Vec<f64>,
    /// One probability vector over clock labels per time sample.
    pub clock_distributions: Vec<Vec<f64>>,
    /// |⟨ψ₀|ψ(t)⟩|² per time sample.
    pub return_probability: Vec<f64>,
    /// ⟨ℓ²⟩ per time sample, over the matrix's clock labels.
    pub mean_sq_displacement: Vec<f64>,
    pub clock_labels: Vec<i64>,
    pub sector: Sector,
}

/// Peaks of the return probability and their mean spacing.
#[derive(Debug, Clone)]
pub struct BounceReport {
    pub peak_times: Vec<f64>,
    pub peak_heights: Vec<f64>,
    pub estimated_period: f64,
}

/// Ballistic-spread fit of √⟨ℓ²⟩ against t.
#[derive(Debug, Clone, Copy)]
pub struct SpreadFit {
    pub slope: f64,
    pub r_squared: f64,
    pub samples_used: usize,
}

/// Evolve the basis state at `initial_index` under e^{−iHt} on the restricted
/// matrix, sampling the listed times.
///
/// Uses the full eigendecomposition: ψ(t) = Σ_j e^{−iE_j t} ⟨v_j|ψ₀⟩ v_j.
pub fn evolve(ray: &RayMatrix, initial_index: usize, times: &[f64]) -> Result<WalkTrajectory> {
    assert!(
        initial_index < ray.dimension(),
        "initial index out of range"
    );
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::NonFinite);
    }
    let (values, vectors) = hermitian_eigen(ray.entries())?;
    let dim = ray.dimension();
    // Overlaps with the initial basis vector: c_j = conj(V[initial, j]).
    let overlaps: Vec<Complex64> = (0..dim)
        .map(|j| vectors[(initial_index, j)].conj())
        .collect();

    let labels = ray.clock_labels().to_vec();
    let mut clock_distributions = Vec::with_capacity(times.len());
    let mut return_probability = Vec::with_capacity(times.len());
    let mut mean_sq_displacement = Vec::with_capacity(times.len());
    for &t in times {
        let phases: Vec<Complex64> = values
            .iter()
            .zip(&overlaps)
            .map(|(&e, &c)| Complex64::from_polar(1.0, -e * t) * c)
            .collect();
        let mut distribution = vec![0.0f64; dim];
        let mut msd = 0.0f64;
        let mut ret = 0.0f64;
        for i in 0..dim {
            let mut amp = Complex64::new(0.0, 0.0);
            for j in 0..dim {
                amp += vectors[(i, j)] * phases[j];
            }
            let p = amp.norm_sqr();
            distribution[i] = p;
            msd += p * (labels[i] * labels[i]) as f64;
            if i == initial_index {
                ret = p;
            }
        }
        clock_distributions.push(distribution);
        return_probability.push(ret);
        mean_sq_displacement.push(msd);
    }
    Ok(WalkTrajectory {
        times: times.to_vec(),
        clock_distributions,
        return_probability,
        mean_sq_displacement,
        clock_labels: labels,
        sector: ray.sector(),
    })
}

/// Uniform time grid with `samples` points from `start` to `end` inclusive.
pub fn uniform_times(start: f64, end: f64, samples: usize) -> Vec<f64> {
    assert!(samples >= 2, "need at least two samples");
    (0..samples)
        .map(|i| start + (end - start) * i as f64 / (samples - 1) as f64)
        .collect()
}

/// The default sampling window for a sector: [0, 4m] cyclic, [0, L]
/// truncated, 200 samples.
pub fn default_time_grid(sector: Sector) -> Vec<f64> {
    match sector {
        Sector::Cyclic { period } => uniform_times(0.0, 4.0 * period as f64, 200),
        Sector::Truncated { half_width } => uniform_times(0.0, half_width as f64, 200),
    }
}

/// Detect return-probability peaks with the default threshold.
pub fn bounce_metrics(trajectory: &WalkTrajectory) -> Result<BounceReport> {
    bounce_metrics_with(trajectory, PEAK_THRESHOLD)
}

/// Peaks are strict local maxima of the return probability above `threshold`;
/// the estimated period is the mean spacing between consecutive peaks.
pub fn bounce_metrics_with(trajectory: &WalkTrajectory, threshold: f64) -> Result<BounceReport> {
    assert!(
        matches!(trajectory.sector, Sector::Cyclic { .. }),
        "bounce metrics apply to cyclic-sector trajectories"
    );
    let rp = &trajectory.return_probability;
    if rp.len() < 3 {
        return Err(Error::TooFewSamples {
            need: 3,
            got: rp.len(),
        });
    }
    let n = rp.len();
    let mut peak_times = Vec::new();
    let mut peak_heights = Vec::new();
    for i in 0..n {
        if rp[i] <= threshold {
            continue;
        }
        let left_ok = i == 0 || rp[i] > rp[i - 1];
        let right_ok = i == n - 1 || rp[i] > rp[i + 1];
        if left_ok && right_ok {
            peak_times.push(trajectory.times[i]);
            peak_heights.push(rp[i]);
        }
    }
    if peak_times.len() < 2 {
        return Err(Error::NoPeaks {
            found: peak_times.len(),
        });
    }
    let spacings: Vec<f64> = peak_times.windows(2).map(|w| w[1] - w[0]).collect();
    let estimated_period = spacings.iter().sum::<f64>() / spacings.len() as f64;
    Ok(BounceReport {
        peak_times,
        peak_heights,
        estimated_period,
    })
}

/// Fit √⟨ℓ²⟩ against t on the pre-boundary window 0 < t < L/2. Ballistic
/// spreading gives a straight line with R² ≥ 0.99.
pub fn spread_metrics(trajectory: &WalkTrajectory) -> Result<SpreadFit> {
    let half_width = match trajectory.sector {
        Sector::Truncated { half_width } => half_width,
        Sector::Cyclic { .. } => {
            panic!("spread metrics apply to truncated-sector trajectories")
        }
    };
    let cutoff = half_width as f64 / 2.0;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &msd) in trajectory
        .times
        .iter()
        .zip(&trajectory.mean_sq_displacement)
    {
        if t > 0.0 && t < cutoff {
            xs.push(t);
            ys.push(msd.sqrt());
        }
    }
    if xs.is_empty() {
        return Err(Error::EmptyWindow);
    }
    if xs.len() < 2 {
        return Err(Error::TooFewSamples {
            need: 2,
            got: xs.len(),
        });
    }
    let (slope, _, r_squared) = linear_fit(&xs, &ys);
    Ok(SpreadFit {
        slope,
        r_squared,
        samples_used: xs.len(),
    })
}

/// Matrix exponential by scaling and squaring: halve the matrix until its
/// norm is below 1/2, sum the Taylor series to convergence, then square back
/// up. Serves as the propagator oracle, independent of the
/// eigendecomposition route in [`evolve`].
pub fn expm(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "matrix must be square");
    // One-norm: max column sum of entry magnitudes.
    let mut one_norm = 0.0f64;
    for j in 0..n {
        let col: f64 = (0..n).map(|i| a[(i, j)].norm()).sum();
        one_norm = one_norm.max(col);
    }
    let squarings = if one_norm > 0.5 {
        (one_norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a / Complex64::new(2f64.powi(squarings as i32), 0.0);

    let mut sum: DMatrix<Complex64> = DMatrix::identity(n, n);
    let mut term: DMatrix<Complex64> = DMatrix::identity(n, n);
    for k in 1..=40u32 {
        term = (&term * &scaled) / Complex64::new(k as f64, 0.0);
        sum += &term;
        let term_norm = term.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        if term_norm < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// e^{−iHt} ψ₀ by scaling and squaring, for cross-checking [`evolve`].
pub fn propagate_by_expm(
    matrix: &DMatrix<Complex64>,
    initial_index: usize,
    t: f64,
) -> Vec<Complex64> {
    let a = matrix.map(|z| z * Complex64::new(0.0, -t));
    let propagator = expm(&a);
    (0..matrix.nrows())
        .map(|i| propagator[(i, initial_index)])
        .collect()
}
