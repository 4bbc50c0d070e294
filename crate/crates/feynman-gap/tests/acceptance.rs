//! Acceptance suite: one test per criterion, each printing a pass line with
//! the measured figure (run with `--nocapture` to see them).

mod common;

use std::time::Instant;

use feynman_gap::clock::{
    build_step_unitary, cyclic_closure, ray_vector, truncate_two_sided, Schedule,
};
use feynman_gap::dynamics::{
    bounce_metrics, default_time_grid, evolve, propagate_by_expm, spread_metrics, uniform_times,
};
use feynman_gap::eig::hermitian_eigen;
use feynman_gap::gate::{Gate, GateKind};
use feynman_gap::hamiltonian::{build_hamiltonian, restrict_to_ray};
use feynman_gap::program::{run_forward, Circuit, Program, RayTrace};
use feynman_gap::spectral::{
    analytic_halting_spectrum, gap_scan, max_spectrum_distance, numeric_spectrum, spectral_gap,
    verify_plane_waves,
};
use feynman_gap::state::{inner, QubitState};
use feynman_gap::terms::{
    assemble_from_terms, dense_on_legal_subspace, emit_local_terms, UnaryClockLayout,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cyclic_fixture(circuit: &Circuit) -> (RayTrace, Schedule, feynman_gap::HamiltonianOp) {
    let program = Program::from_circuit(circuit, circuit.len() + 1).expect("program");
    let trace = run_forward(&program, &QubitState::zero(circuit.num_qubits())).expect("trace");
    let schedule = Schedule::Cyclic(cyclic_closure(circuit).expect("schedule"));
    let h = build_hamiltonian(build_step_unitary(schedule.clone()).expect("unitary"));
    (trace, schedule, h)
}

fn identity_stream(budget: usize) -> Program {
    Program::new(1, vec![Gate::identity(0)], None, true, budget).expect("program")
}

/// Criterion 1: U^m returns the computational ray for random halting
/// circuits (the closed evolution is cyclic with period m).
#[test]
fn criterion_1_cyclicity() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for case in 0..25 {
        let num_qubits = 1 + (case % 3);
        let steps = 1 + (case % 6);
        let circuit = common::random_circuit(&mut rng, num_qubits, steps);
        let (trace, schedule, h) = cyclic_fixture(&circuit);
        let u = h.source();
        let m = 2 * circuit.len();
        let v0 = ray_vector(&schedule, &trace, 0).expect("ray");
        let mut v = v0.clone();
        for _ in 0..m {
            v = u.apply(&v);
        }
        let infidelity = 1.0 - inner(&v0, &v).norm_sqr();
        worst = worst.max(infidelity);
        assert!(
            infidelity <= 1e-10,
            "case {case}: U^m infidelity {infidelity:.3e}"
        );
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!(
        "[PASS] criterion 1: cyclicity over 25 random circuits, worst 1-fidelity {worst:.3e} ({elapsed:?})"
    );
}

/// Criterion 2: restricted-H eigenvalues are {2cos(2πk/m)} elementwise.
#[test]
fn criterion_2_root_of_unity_spectrum() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let mut worst = 0.0f64;
    for m in [2usize, 4, 6, 8, 12, 16] {
        let circuit = common::random_circuit(&mut rng, 2, m / 2);
        let (trace, schedule, h) = cyclic_fixture(&circuit);
        let ray = restrict_to_ray(&h, &trace, &schedule).expect("ray matrix");
        let report = numeric_spectrum(ray.entries()).expect("spectrum");
        let mut analytic: Vec<f64> = analytic_halting_spectrum(m)
            .iter()
            .map(|p| p.h_eigenvalue)
            .collect();
        analytic.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in report.eigenvalues.iter().zip(&analytic) {
            let dev = (got - want).abs();
            worst = worst.max(dev);
            assert!(dev <= 1e-9, "m={m}: eigenvalue {got} vs {want}");
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!(
        "[PASS] criterion 2: root-of-unity spectra for m in {{2,4,6,8,12,16}}, worst deviation {worst:.3e} ({elapsed:?})"
    );
}

/// Criterion 3: plane waves are simultaneous eigenstates of U and H in the
/// full space.
#[test]
fn criterion_3_plane_wave_eigenstates() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let fixtures: Vec<Circuit> = vec![
        Circuit::new(1, vec![Gate::identity(0)]).unwrap(),
        Circuit::new(1, vec![Gate::standard(GateKind::X, vec![0]).unwrap()]).unwrap(),
        Circuit::new(
            2,
            vec![
                Gate::standard(GateKind::H, vec![0]).unwrap(),
                Gate::standard(GateKind::Cnot, vec![0, 1]).unwrap(),
            ],
        )
        .unwrap(),
        common::random_circuit(&mut rng, 2, 4), // m = 8
    ];
    let mut worst = 0.0f64;
    for circuit in &fixtures {
        let program = Program::from_circuit(circuit, circuit.len() + 1).unwrap();
        let trace = run_forward(&program, &QubitState::zero(circuit.num_qubits())).unwrap();
        let cyclic = cyclic_closure(circuit).unwrap();
        let check = verify_plane_waves(&cyclic, &trace).expect("plane waves");
        worst = worst.max(check.max_h_residual).max(check.max_u_residual);
        assert!(
            check.max_h_residual <= 1e-9 && check.max_u_residual <= 1e-9,
            "T={}: H residual {:.3e}, U residual {:.3e}",
            circuit.len(),
            check.max_h_residual,
            check.max_u_residual
        );
    }
    println!("[PASS] criterion 3: plane-wave residuals on full-space fixtures, worst {worst:.3e}");
}

/// Criterion 4: halting-sector gap equals 4sin²(π/m) for even m up to 64.
#[test]
fn criterion_4_gap_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let mut worst = 0.0f64;
    for m in (4..=64).step_by(2) {
        let circuit = common::random_circuit(&mut rng, 1, m / 2);
        let (trace, schedule, h) = cyclic_fixture(&circuit);
        let ray = restrict_to_ray(&h, &trace, &schedule).expect("ray matrix");
        let report = numeric_spectrum(ray.entries()).expect("spectrum");
        let gap = spectral_gap(&report).expect("gap");
        let formula = 4.0 * (std::f64::consts::PI / m as f64).sin().powi(2);
        let dev = (gap - formula).abs();
        worst = worst.max(dev);
        assert!(dev <= 1e-9, "m={m}: gap {gap} vs 4sin²(π/m) {formula}");
    }
    println!("[PASS] criterion 4: gap = 4sin²(π/m) for m in 4..=64, worst deviation {worst:.3e}");
}

/// Criterion 5: truncated gaps fall like L^-2 and the spectrum fills [-2, 2].
#[test]
fn criterion_5_gapless_limit() {
    let started = Instant::now();
    let widths = [8usize, 16, 32, 64, 128];
    let program = identity_stream(256);
    let scan = gap_scan(&program, &widths).expect("scan");

    assert!(
        scan.gaps.windows(2).all(|w| w[1] < w[0]),
        "gaps not strictly decreasing: {:?}",
        scan.gaps
    );
    assert!(
        (-2.2..=-1.8).contains(&scan.fit_exponent),
        "fit exponent {} outside [-2.2, -1.8]",
        scan.fit_exponent
    );
    assert!(scan.fit_r2 >= 0.999, "fit R² {}", scan.fit_r2);

    // Band coverage at L = 128.
    let schedule = Schedule::Truncated(truncate_two_sided(&program, 128).expect("truncation"));
    let bounded = program.clone().with_budget(128).unwrap();
    let trace = run_forward(&bounded, &QubitState::zero(1)).unwrap();
    let h = build_hamiltonian(build_step_unitary(schedule.clone()).unwrap());
    let ray = restrict_to_ray(&h, &trace, &schedule).unwrap();
    let report = numeric_spectrum(ray.entries()).unwrap();
    let distance = max_spectrum_distance(&report.eigenvalues, 100);
    assert!(distance < 0.05, "band cover distance {distance}");
    let out_of_range = report
        .eigenvalues
        .iter()
        .map(|e| (e.abs() - 2.0).max(0.0))
        .fold(0.0f64, f64::max);
    assert!(
        out_of_range <= 1e-9,
        "eigenvalue escapes [-2, 2] by {out_of_range:.3e}"
    );

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 30.0, "took {elapsed:?}");
    println!(
        "[PASS] criterion 5: gaps {:?} fall with exponent {:.4} (R² {:.6}), band cover {:.4} ({elapsed:?})",
        scan.gaps, scan.fit_exponent, scan.fit_r2, distance
    );
}

/// Criterion 6: every unary-clock term touches at most four sites and the
/// term sum reproduces dense H on the legal subspace.
#[test]
fn criterion_6_four_locality() {
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let fixtures: Vec<Circuit> = vec![
        Circuit::new(1, vec![Gate::standard(GateKind::X, vec![0]).unwrap()]).unwrap(),
        Circuit::new(
            2,
            vec![
                Gate::standard(GateKind::H, vec![0]).unwrap(),
                Gate::standard(GateKind::Cnot, vec![0, 1]).unwrap(),
            ],
        )
        .unwrap(),
        Circuit::new(
            2,
            vec![
                Gate::standard(GateKind::Swap, vec![0, 1]).unwrap(),
                Gate::standard(GateKind::Cz, vec![1, 0]).unwrap(),
                Gate::standard(GateKind::T, vec![1]).unwrap(),
            ],
        )
        .unwrap(),
        common::random_circuit(&mut rng, 2, 4), // m = 8
    ];
    let mut worst = 0.0f64;
    for circuit in &fixtures {
        let (_, schedule, h) = cyclic_fixture(circuit);
        let layout = UnaryClockLayout::for_schedule(&schedule);
        let terms = emit_local_terms(&schedule, &layout);
        let max_support = terms.iter().map(|t| t.support()).max().unwrap();
        assert!(max_support <= 4, "support {max_support} > 4");

        let assembled = assemble_from_terms(&terms, &layout).expect("assembly");
        let reference = dense_on_legal_subspace(&h).expect("dense");
        for i in 0..assembled.nrows() {
            for j in 0..assembled.ncols() {
                let diff = (assembled[(i, j)] - reference[(i, j)]).norm();
                worst = worst.max(diff);
                assert!(diff <= 1e-10, "entry ({i},{j}) differs by {diff:.3e}");
            }
        }
    }
    println!("[PASS] criterion 6: four-locality and reassembly on all fixtures, worst entry diff {worst:.3e}");
}

/// Criterion 7: cyclic walks bounce with a stable period; truncated walks
/// spread ballistically before hitting the boundary.
#[test]
fn criterion_7_dynamics_dichotomy() {
    let started = Instant::now();

    // Cyclic m = 8: period from the default grid vs a 10x-refined grid.
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let circuit = common::random_circuit(&mut rng, 1, 4);
    let (trace, schedule, h) = cyclic_fixture(&circuit);
    let ray = restrict_to_ray(&h, &trace, &schedule).unwrap();
    let coarse_times = default_time_grid(ray.sector());
    let coarse = bounce_metrics(&evolve(&ray, 0, &coarse_times).unwrap()).expect("coarse peaks");
    let fine_times = uniform_times(0.0, *coarse_times.last().unwrap(), 10 * coarse_times.len());
    let fine = bounce_metrics(&evolve(&ray, 0, &fine_times).unwrap()).expect("fine peaks");
    let rel = (coarse.estimated_period - fine.estimated_period).abs() / fine.estimated_period;
    assert!(
        rel <= 0.05,
        "period {:.4} vs refined {:.4} (rel {rel:.4})",
        coarse.estimated_period,
        fine.estimated_period
    );

    // Truncated L = 64: ballistic fit on the pre-boundary window.
    let program = identity_stream(128);
    let schedule = Schedule::Truncated(truncate_two_sided(&program, 64).unwrap());
    let bounded = program.clone().with_budget(64).unwrap();
    let walk_trace = run_forward(&bounded, &QubitState::zero(1)).unwrap();
    let hh = build_hamiltonian(build_step_unitary(schedule.clone()).unwrap());
    let path = restrict_to_ray(&hh, &walk_trace, &schedule).unwrap();
    let traj = evolve(
        &path,
        path.origin_index(),
        &default_time_grid(path.sector()),
    )
    .unwrap();
    let fit = spread_metrics(&traj).expect("spread fit");
    assert!(fit.r_squared >= 0.99, "ballistic R² {}", fit.r_squared);

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 20.0, "took {elapsed:?}");
    println!(
        "[PASS] criterion 7: bounce period {:.4} (refined {:.4}, rel {:.4}); ballistic R² {:.6} ({elapsed:?})",
        coarse.estimated_period, fine.estimated_period, rel, fit.r_squared
    );
}

/// Criterion 8: eigendecomposition evolution agrees with the
/// scaling-and-squaring propagator.
#[test]
fn criterion_8_propagator_oracle() {
    // State evolved through the eigendecomposition route.
    fn evolve_by_eigen(matrix: &DMatrix<Complex64>, index: usize, t: f64) -> Vec<Complex64> {
        let (values, vectors) = hermitian_eigen(matrix).expect("eigen");
        let dim = matrix.nrows();
        let overlaps: Vec<Complex64> = (0..dim).map(|j| vectors[(index, j)].conj()).collect();
        (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| {
                        vectors[(i, j)] * overlaps[j] * Complex64::from_polar(1.0, -values[j] * t)
                    })
                    .sum()
            })
            .collect()
    }

    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let mut fixtures: Vec<(String, DMatrix<Complex64>, usize)> = Vec::new();

    // m = 8 and m = 64 cycles from random halting circuits.
    for t_steps in [4usize, 32] {
        let circuit = common::random_circuit(&mut rng, 1, t_steps);
        let (trace, schedule, h) = cyclic_fixture(&circuit);
        let ray = restrict_to_ray(&h, &trace, &schedule).unwrap();
        fixtures.push((format!("cycle m={}", 2 * t_steps), ray.entries().clone(), 0));
    }
    // Path with 63 sites.
    let program = identity_stream(64);
    let schedule = Schedule::Truncated(truncate_two_sided(&program, 31).unwrap());
    let bounded = program.clone().with_budget(31).unwrap();
    let trace = run_forward(&bounded, &QubitState::zero(1)).unwrap();
    let h = build_hamiltonian(build_step_unitary(schedule.clone()).unwrap());
    let path = restrict_to_ray(&h, &trace, &schedule).unwrap();
    fixtures.push(("path 63".into(), path.entries().clone(), 31));
    // Full-space dense H of the Bell circuit (dimension 32).
    let bell = Circuit::new(
        2,
        vec![
            Gate::standard(GateKind::H, vec![0]).unwrap(),
            Gate::standard(GateKind::Cnot, vec![0, 1]).unwrap(),
        ],
    )
    .unwrap();
    let (_, _, bell_h) = cyclic_fixture(&bell);
    fixtures.push(("dense bell H".into(), bell_h.dense().unwrap(), 0));

    let mut worst = 0.0f64;
    for (name, matrix, start) in &fixtures {
        assert!(matrix.nrows() <= 64, "{name} exceeds the fixture cap");
        for t in [0.25, 1.0, 3.5] {
            let a = evolve_by_eigen(matrix, *start, t);
            let b = propagate_by_expm(matrix, *start, t);
            let diff: f64 = a
                .iter()
                .zip(&b)
                .map(|(x, y)| (x - y).norm_sqr())
                .sum::<f64>()
                .sqrt();
            worst = worst.max(diff);
            assert!(
                diff <= 1e-8,
                "{name} at t={t}: propagator mismatch {diff:.3e}"
            );
        }
    }
    println!(
        "[PASS] criterion 8: propagator routes agree on {} fixtures, worst {worst:.3e}",
        fixtures.len()
    );
}

/// Criterion 9: the CLI verifies both bundled example files and reports the
/// sector mismatch for spectrum on the non-halting one.
#[test]
fn criterion_9_end_to_end_cli() {
    let bin = env!("CARGO_BIN_EXE_feynman-gap");
    let fixture = |name: &str| {
        std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("fixtures")
            .join(name)
    };
    let out = tempfile::tempdir().expect("tempdir");
    let run = |args: &[&str]| {
        std::process::Command::new(bin)
            .args(args)
            .env_remove("FEYNMAN_GAP_OUT")
            .output()
            .expect("binary runs")
    };

    let bell = fixture("bell.json");
    let forever = fixture("walk_forever.json");
    let out_dir = out.path().to_str().unwrap();

    let status = run(&["verify", "--in", bell.to_str().unwrap(), "--out", out_dir]);
    assert_eq!(status.status.code(), Some(0), "verify bell: {status:?}");

    let status = run(&[
        "verify",
        "--in",
        forever.to_str().unwrap(),
        "--out",
        out_dir,
    ]);
    assert_eq!(
        status.status.code(),
        Some(0),
        "verify non-halting: {status:?}"
    );

    let status = run(&[
        "spectrum",
        "--in",
        forever.to_str().unwrap(),
        "--out",
        out_dir,
    ]);
    assert_eq!(
        status.status.code(),
        Some(3),
        "spectrum on non-halting: {status:?}"
    );

    println!("[PASS] criterion 9: end-to-end verify (exit 0, 0) and sector mismatch (exit 3)");
}
