//! Command-line front end: parse flags, dispatch subcommands, write files.
//!
//! Exit codes: 0 ok, 1 usage, 2 I/O or malformed input, 3 halting/non-halting
//! sector mismatch, 4 budget exhausted without a halt signal, 5 invariant
//! failure.

use std::collections::BTreeMap;
use std::path::PathBuf;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::clock::{
    build_step_unitary, cyclic_closure, ray_vector, truncate_two_sided, Schedule, DENSE_CAP,
};
use crate::dynamics::{bounce_metrics, default_time_grid, evolve, spread_metrics, uniform_times};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_hamiltonian, restrict_to_ray, HamiltonianOp};
use crate::io;
use crate::program::{run_forward, Circuit, Program, RayTrace, DEFAULT_BUDGET};
use crate::spectral::{
    analytic_halting_spectrum, gap_scan, max_spectrum_distance, numeric_spectrum_with,
    spectral_gap, verify_plane_waves,
};
use crate::state::{inner, norm, QubitState};
use crate::terms::{
    assemble_from_terms, dense_on_legal_subspace, emit_local_terms, UnaryClockLayout,
};

/// Power-law window the truncated gap fit must land in.
pub const FIT_EXPONENT_WINDOW: (f64, f64) = (-2.2, -1.8);

const USAGE: &str = "\
feynman-gap <command> --in <program.json> [options]

Commands:
  build       lower the program to a clocked schedule (schedule.json)
  spectrum    restricted spectrum of a halting program, analytic vs numeric
  gap-scan    truncated-sector gap against half-width L (non-halting input)
  walk        clock-walk trajectory under e^{-iHt} (CSV + SVG)
  emit-terms  unary-clock local terms plus reassembly check
  verify      run the full invariant suite; exit 0 iff everything passes

Options:
  --in PATH         program JSON (required)
  --out DIR         output directory (default: out; env FEYNMAN_GAP_OUT wins)
  --budget N        step budget for halting detection (default: 1024)
  --L a,b,c         ascending truncation half-widths (default: 8,16,32,64)
  --times t0:t1:n   time grid for walk (default: sector-dependent)
  --tol.NAME=VALUE  override a named tolerance (positive reals)
  --seed N          seed for randomized probe vectors (default: 7)

Exit codes: 0 ok, 1 usage, 2 I/O, 3 sector mismatch, 4 budget exhausted,
5 invariant failure.";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Build,
    Spectrum,
    GapScan,
    Walk,
    EmitTerms,
    Verify,
}

impl Command {
    fn from_name(name: &str) -> Option<Command> {
        Some(match name {
            "build" => Command::Build,
            "spectrum" => Command::Spectrum,
            "gap-scan" => Command::GapScan,
            "walk" => Command::Walk,
            "emit-terms" => Command::EmitTerms,
            "verify" => Command::Verify,
            _ => return None,
        })
    }
}

/// Named tolerances with positive values; unknown names are rejected at
/// parse time so typos surface early.
#[derive(Debug, Clone)]
pub struct Tolerances(BTreeMap<String, f64>);

impl Default for Tolerances {
    fn default() -> Self {
        let defaults: &[(&str, f64)] = &[
            ("norm", 1e-10),          // trace normalization drift
            ("mirror", 1e-12),        // mirror-step composition to identity
            ("composition", 1e-10),   // full schedule composition to identity
            ("unitarity", 1e-10),     // dense U†U - I
            ("isometry", 1e-10),      // truncated interior isometry
            ("fidelity", 1e-10),      // 1 - U^m ray-return fidelity
            ("hermiticity", 1e-10),   // H probe symmetry
            ("norm_bound", 1e-10),    // ||Hv|| - 2||v||
            ("commutator", 1e-9),     // ||HUv - UHv||
            ("ray_structure", 1e-10), // restricted matrix vs adjacency
            ("spectrum", 1e-9),       // numeric vs analytic eigenvalues
            ("gap", 1e-9),            // gap vs 4sin²(π/m)
            ("planewave", 1e-9),      // plane-wave residuals
            ("reassembly", 1e-10),    // terms vs dense H
            ("degeneracy", 1e-7),     // level-collapse window
            ("range", 1e-9),          // eigenvalue containment in [-2,2]
            ("band_cover", 0.05),     // max point-to-spectrum distance
            ("walk_norm", 1e-9),      // distribution sum drift
            ("ballistic_r2", 0.99),   // lower bound on the spread fit R²
            ("fit_r2", 0.999),        // lower bound on the gap-scan fit R²
        ];
        Tolerances(defaults.iter().map(|&(k, v)| (k.to_string(), v)).collect())
    }
}

impl Tolerances {
    pub fn get(&self, name: &str) -> f64 {
        *self
            .0
            .get(name)
            .unwrap_or_else(|| panic!("unknown tolerance {name}"))
    }

    fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !self.0.contains_key(name) {
            let known: Vec<&str> = self.0.keys().map(String::as_str).collect();
            return Err(Error::Usage(format!(
                "unknown tolerance {name:?}; known: {}",
                known.join(", ")
            )));
        }
        if !value.is_finite() || value <= 0.0 {
            return Err(Error::Usage(format!(
                "tolerance {name} must be a positive real, got {value}"
            )));
        }
        self.0.insert(name.to_string(), value);
        Ok(())
    }
}

/// A validated CLI invocation.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub input_path: PathBuf,
    pub output_dir: PathBuf,
    pub budget: usize,
    pub half_widths: Vec<usize>,
    pub times: Option<(f64, f64, usize)>,
    pub tolerances: Tolerances,
    pub seed: u64,
}

/// Outcome of argument parsing: a run, or an explicit help request.
#[derive(Debug)]
pub enum Parsed {
    Config(RunConfig),
    Help,
}

/// Parse arguments (program name excluded).
pub fn parse_args(args: &[String]) -> Result<Parsed> {
    if args.is_empty() {
        return Err(Error::Usage("missing command\n\n".to_string() + USAGE));
    }
    if matches!(args[0].as_str(), "help" | "--help" | "-h") {
        return Ok(Parsed::Help);
    }
    let command = Command::from_name(&args[0])
        .ok_or_else(|| Error::Usage(format!("unknown command {:?}\n\n{USAGE}", args[0])))?;

    let mut input_path: Option<PathBuf> = None;
    let mut output_dir = PathBuf::from("out");
    let mut budget = DEFAULT_BUDGET;
    let mut half_widths = vec![8usize, 16, 32, 64];
    let mut times = None;
    let mut tolerances = Tolerances::default();
    let mut seed = 7u64;

    let next_value = |i: &mut usize, flag: &str| -> Result<String> {
        *i += 1;
        args.get(*i)
            .cloned()
            .ok_or_else(|| Error::Usage(format!("flag {flag} needs a value")))
    };
    let mut i = 1;
    while i < args.len() {
        let arg = &args[i];
        match arg.as_str() {
            "--in" => input_path = Some(PathBuf::from(next_value(&mut i, "--in")?)),
            "--out" => output_dir = PathBuf::from(next_value(&mut i, "--out")?),
            "--budget" => {
                let v = next_value(&mut i, "--budget")?;
                budget = v
                    .parse::<usize>()
                    .ok()
                    .filter(|&b| b >= 1)
                    .ok_or_else(|| Error::Usage(format!("bad --budget {v:?}")))?;
            }
            "--seed" => {
                let v = next_value(&mut i, "--seed")?;
                seed = v
                    .parse::<u64>()
                    .map_err(|_| Error::Usage(format!("bad --seed {v:?}")))?;
            }
            "--L" => {
                let v = next_value(&mut i, "--L")?;
                half_widths = parse_half_widths(&v)?;
            }
            "--times" => {
                let v = next_value(&mut i, "--times")?;
                times = Some(parse_times(&v)?);
            }
            _ if arg.starts_with("--tol.") => {
                let rest = &arg["--tol.".len()..];
                let (name, value_text) = match rest.split_once('=') {
                    Some((n, v)) => (n.to_string(), v.to_string()),
                    None => (rest.to_string(), next_value(&mut i, arg)?),
                };
                let value = value_text
                    .parse::<f64>()
                    .map_err(|_| Error::Usage(format!("bad tolerance value {value_text:?}")))?;
                tolerances.set(&name, value)?;
            }
            _ => return Err(Error::Usage(format!("unknown flag {arg:?}\n\n{USAGE}"))),
        }
        i += 1;
    }

    let input_path =
        input_path.ok_or_else(|| Error::Usage("missing required --in <program.json>".into()))?;
    if let Ok(dir) = std::env::var("FEYNMAN_GAP_OUT") {
        if !dir.is_empty() {
            output_dir = PathBuf::from(dir);
        }
    }
    Ok(Parsed::Config(RunConfig {
        command,
        input_path,
        output_dir,
        budget,
        half_widths,
        times,
        tolerances,
        seed,
    }))
}

fn parse_half_widths(text: &str) -> Result<Vec<usize>> {
    let values: Vec<usize> = text
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| Error::Usage(format!("bad half-width {p:?} in --L")))
        })
        .collect::<Result<_>>()?;
    if values.is_empty() || values[0] == 0 {
        return Err(Error::Usage("--L needs positive half-widths".into()));
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Usage(format!(
            "--L values must be strictly ascending, got {text:?}"
        )));
    }
    Ok(values)
}

fn parse_times(text: &str) -> Result<(f64, f64, usize)> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Usage(format!("--times wants t0:t1:n, got {text:?}")));
    }
    let t0: f64 = parts[0]
        .parse()
        .map_err(|_| Error::Usage(format!("bad t0 {:?}", parts[0])))?;
    let t1: f64 = parts[1]
        .parse()
        .map_err(|_| Error::Usage(format!("bad t1 {:?}", parts[1])))?;
    let n: usize = parts[2]
        .parse()
        .map_err(|_| Error::Usage(format!("bad sample count {:?}", parts[2])))?;
    if !(t0.is_finite() && t1.is_finite()) || t1 <= t0 || n < 2 {
        return Err(Error::Usage(format!(
            "--times wants finite t0 < t1 and n >= 2, got {text:?}"
        )));
    }
    Ok((t0, t1, n))
}

/// Map an error to the process exit code.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Usage(_) => 1,
        Error::Io { .. } | Error::Json { .. } => 2,
        Error::NonHaltingInput | Error::HaltsWithinWindow { .. } => 3,
        Error::BudgetExhausted { .. } => 4,
        _ => 5,
    }
}

/// Entry point used by the binary: returns the process exit code.
pub fn main_with_args(args: &[String]) -> i32 {
    match parse_args(args) {
        Ok(Parsed::Help) => {
            println!("{USAGE}");
            0
        }
        Ok(Parsed::Config(config)) => match run(&config) {
            Ok(()) => 0,
            Err(err) => {
                eprintln!("error: {err}");
                exit_code_for(&err)
            }
        },
        Err(err) => {
            eprintln!("error: {err}");
            exit_code_for(&err)
        }
    }
}

/// How the loaded program classifies under its budget.
enum ProgramClass {
    Halting(Circuit),
    NonHalting,
}

fn classify(program: &Program) -> Result<ProgramClass> {
    if program.is_declared_nonhalting() {
        return Ok(ProgramClass::NonHalting);
    }
    match program.halt_step() {
        Some(_) => Ok(ProgramClass::Halting(program.halting_circuit()?)),
        None => Err(Error::BudgetExhausted {
            budget: program.budget(),
        }),
    }
}

/// Dispatch a validated config.
pub fn run(config: &RunConfig) -> Result<()> {
    let (program, initial) = io::load_program(&config.input_path, config.budget)?;
    match config.command {
        Command::Build => cmd_build(config, &program),
        Command::Spectrum => cmd_spectrum(config, &program, &initial),
        Command::GapScan => cmd_gap_scan(config, &program),
        Command::Walk => cmd_walk(config, &program, &initial),
        Command::EmitTerms => cmd_emit_terms(config, &program),
        Command::Verify => cmd_verify(config, &program, &initial),
    }
}

fn out_path(config: &RunConfig, name: &str) -> PathBuf {
    config.output_dir.join(name)
}

fn schedule_for(config: &RunConfig, program: &Program) -> Result<Schedule> {
    match classify(program)? {
        ProgramClass::Halting(circuit) => Ok(Schedule::Cyclic(cyclic_closure(&circuit)?)),
        ProgramClass::NonHalting => {
            let l = *config.half_widths.last().expect("validated nonempty");
            Ok(Schedule::Truncated(truncate_two_sided(program, l)?))
        }
    }
}

fn cmd_build(config: &RunConfig, program: &Program) -> Result<()> {
    let schedule = schedule_for(config, program)?;
    let value = io::schedule_json(&schedule);
    let path = out_path(config, "schedule.json");
    io::atomic_write(&path, &format!("{:#}\n", value))?;
    match &schedule {
        Schedule::Cyclic(s) => println!(
            "cyclic schedule: period m = {} (halt at T = {}), {} qubit(s)",
            s.period(),
            s.halt_step(),
            s.num_qubits()
        ),
        Schedule::Truncated(s) => println!(
            "truncated schedule: clock sites -{}..{}, {} qubit(s)",
            s.half_width(),
            s.half_width(),
            s.num_qubits()
        ),
    }
    println!("wrote {}", path.display());
    Ok(())
}

/// Run the halting pipeline up to the restricted matrix.
fn halting_pipeline(
    program: &Program,
    initial: &QubitState,
) -> Result<(
    RayTrace,
    Schedule,
    HamiltonianOp,
    crate::hamiltonian::RayMatrix,
)> {
    let circuit = match classify(program)? {
        ProgramClass::Halting(c) => c,
        ProgramClass::NonHalting => return Err(Error::NonHaltingInput),
    };
    let trace = run_forward(program, initial)?;
    let schedule = Schedule::Cyclic(cyclic_closure(&circuit)?);
    let h = build_hamiltonian(build_step_unitary(schedule.clone())?);
    let ray = restrict_to_ray(&h, &trace, &schedule)?;
    Ok((trace, schedule, h, ray))
}

fn cmd_spectrum(config: &RunConfig, program: &Program, initial: &QubitState) -> Result<()> {
    if matches!(classify(program)?, ProgramClass::NonHalting) {
        eprintln!("input never halts; its spectrum is a continuum — use gap-scan");
        return Err(Error::NonHaltingInput);
    }
    let (_, _, _, ray) = halting_pipeline(program, initial)?;
    let m = ray.dimension();
    let report = numeric_spectrum_with(ray.entries(), config.tolerances.get("degeneracy"))?;

    let mut analytic: Vec<f64> = analytic_halting_spectrum(m)
        .iter()
        .map(|p| p.h_eigenvalue)
        .collect();
    analytic.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let max_dev = report
        .eigenvalues
        .iter()
        .zip(&analytic)
        .map(|(n, a)| (n - a).abs())
        .fold(0.0f64, f64::max);
    let gap = spectral_gap(&report)?;
    let gap_formula = 4.0 * (std::f64::consts::PI / m as f64).sin().powi(2);

    io::atomic_write(
        &out_path(config, "spectrum.csv"),
        &io::spectrum_csv(&report),
    )?;
    let report_json = json!({
        "period": m,
        "levels": report.levels,
        "multiplicities": report.multiplicities,
        "gap": gap,
        "gap_formula_4sin2": gap_formula,
        "max_analytic_deviation": max_dev,
        "tolerance": config.tolerances.get("spectrum"),
    });
    io::atomic_write(
        &out_path(config, "spectrum_report.json"),
        &format!("{:#}\n", report_json),
    )?;

    println!("period m = {m}: {} distinct level(s)", report.levels.len());
    println!("gap = {gap:.12} (4sin²(π/m) = {gap_formula:.12})");
    println!("max |numeric − analytic| = {max_dev:.3e}");
    println!(
        "wrote {} and {}",
        out_path(config, "spectrum.csv").display(),
        out_path(config, "spectrum_report.json").display()
    );
    if max_dev > config.tolerances.get("spectrum") {
        return Err(Error::InvariantFailed(format!(
            "numeric spectrum deviates from roots-of-unity form by {max_dev:.3e}"
        )));
    }
    if (gap - gap_formula).abs() > config.tolerances.get("gap") {
        return Err(Error::InvariantFailed(format!(
            "gap {gap:.12} disagrees with 4sin²(π/m) = {gap_formula:.12}"
        )));
    }
    Ok(())
}

fn cmd_gap_scan(config: &RunConfig, program: &Program) -> Result<()> {
    if let ProgramClass::Halting(c) = classify(program)? {
        let max_l = *config.half_widths.last().expect("nonempty");
        if c.len() <= max_l {
            eprintln!(
                "input halts at T = {}; use spectrum/verify instead",
                c.len()
            );
            return Err(Error::HaltsWithinWindow {
                halted_at: c.len(),
                window: max_l,
            });
        }
    }
    let scan = gap_scan(program, &config.half_widths)?;
    io::atomic_write(
        &out_path(config, "gap_scan.csv"),
        &io::gap_csv(&scan.half_widths, &scan.gaps),
    )?;
    let fit_json = json!({
        "half_widths": scan.half_widths,
        "gaps": scan.gaps,
        "fit_exponent": scan.fit_exponent,
        "fit_r2": scan.fit_r2,
    });
    io::atomic_write(
        &out_path(config, "gap_fit.json"),
        &format!("{:#}\n", fit_json),
    )?;
    for (l, g) in scan.half_widths.iter().zip(&scan.gaps) {
        println!("L = {l:>4}: gap = {g:.9e}");
    }
    println!(
        "power-law fit: gap ~ L^{:.4} (R² = {:.6})",
        scan.fit_exponent, scan.fit_r2
    );
    println!(
        "wrote {} and {}",
        out_path(config, "gap_scan.csv").display(),
        out_path(config, "gap_fit.json").display()
    );
    Ok(())
}

fn cmd_walk(config: &RunConfig, program: &Program, initial: &QubitState) -> Result<()> {
    let ray = match classify(program)? {
        ProgramClass::Halting(_) => {
            let (_, _, _, ray) = halting_pipeline(program, initial)?;
            ray
        }
        ProgramClass::NonHalting => {
            let l = *config.half_widths.last().expect("nonempty");
            let schedule = Schedule::Truncated(truncate_two_sided(program, l)?);
            let bounded = program.clone().with_budget(l)?;
            let trace = run_forward(&bounded, initial)?;
            let h = build_hamiltonian(build_step_unitary(schedule.clone())?);
            restrict_to_ray(&h, &trace, &schedule)?
        }
    };
    let times = match config.times {
        Some((t0, t1, n)) => uniform_times(t0, t1, n),
        None => default_time_grid(ray.sector()),
    };
    let traj = evolve(&ray, ray.origin_index(), &times)?;

    io::atomic_write(
        &out_path(config, "trajectory.csv"),
        &io::trajectory_csv(&traj),
    )?;
    io::atomic_write(
        &out_path(config, "distributions.csv"),
        &io::distributions_csv(&traj),
    )?;
    let rms: Vec<f64> = traj.mean_sq_displacement.iter().map(|m| m.sqrt()).collect();
    io::atomic_write(
        &out_path(config, "return_probability.svg"),
        &io::svg_line_plot(
            "return probability",
            "t",
            "|&lt;psi0|psi(t)&gt;|^2",
            &traj.times,
            &traj.return_probability,
        ),
    )?;
    io::atomic_write(
        &out_path(config, "rms_displacement.svg"),
        &io::svg_line_plot(
            "rms clock displacement",
            "t",
            "sqrt(&lt;l^2&gt;)",
            &traj.times,
            &rms,
        ),
    )?;

    match ray.sector() {
        crate::hamiltonian::Sector::Cyclic { period } => {
            println!("cyclic walk on the m = {period} cycle");
            match bounce_metrics(&traj) {
                Ok(report) => println!(
                    "bounce: {} peak(s), estimated period {:.6}",
                    report.peak_times.len(),
                    report.estimated_period
                ),
                Err(e) => println!("bounce: no period estimate ({e})"),
            }
        }
        crate::hamiltonian::Sector::Truncated { half_width } => {
            println!("truncated walk on clock sites -{half_width}..{half_width}");
            match spread_metrics(&traj) {
                Ok(fit) => println!(
                    "ballistic fit: slope {:.6}, R² = {:.6} over {} sample(s)",
                    fit.slope, fit.r_squared, fit.samples_used
                ),
                Err(e) => println!("ballistic fit unavailable ({e})"),
            }
        }
    }
    println!(
        "wrote {}, {}, {}",
        out_path(config, "trajectory.csv").display(),
        out_path(config, "return_probability.svg").display(),
        out_path(config, "rms_displacement.svg").display()
    );
    Ok(())
}

fn cmd_emit_terms(config: &RunConfig, program: &Program) -> Result<()> {
    let schedule = schedule_for(config, program)?;
    let layout = UnaryClockLayout::for_schedule(&schedule);
    let terms = emit_local_terms(&schedule, &layout);
    let max_support = terms.iter().map(|t| t.support()).max().unwrap_or(0);
    io::atomic_write(
        &out_path(config, "terms.json"),
        &format!("{:#}\n", io::terms_json(&terms)),
    )?;

    let full_dim =
        (1usize << schedule.num_qubits()) * schedule.sign_states() * schedule.clock_sites();
    let mut reassembly: Option<f64> = None;
    if layout.legal_dimension() <= DENSE_CAP && full_dim <= DENSE_CAP {
        let assembled = assemble_from_terms(&terms, &layout)?;
        let h = build_hamiltonian(build_step_unitary(schedule.clone())?);
        let reference = dense_on_legal_subspace(&h)?;
        let mut worst = 0.0f64;
        for i in 0..assembled.nrows() {
            for j in 0..assembled.ncols() {
                worst = worst.max((assembled[(i, j)] - reference[(i, j)]).norm());
            }
        }
        reassembly = Some(worst);
    }

    let report = json!({
        "num_terms": terms.len(),
        "max_support": max_support,
        "legal_dimension": layout.legal_dimension(),
        "reassembly_max_diff": reassembly,
        "tolerance": config.tolerances.get("reassembly"),
    });
    io::atomic_write(
        &out_path(config, "terms_report.json"),
        &format!("{:#}\n", report),
    )?;

    println!(
        "emitted {} term(s), max support {max_support} site(s)",
        terms.len()
    );
    match reassembly {
        Some(diff) => println!("reassembly check: max |terms − dense H| = {diff:.3e}"),
        None => println!("reassembly check skipped (dimension above dense cap)"),
    }
    println!(
        "wrote {} and {}",
        out_path(config, "terms.json").display(),
        out_path(config, "terms_report.json").display()
    );
    if max_support > 4 {
        return Err(Error::InvariantFailed(format!(
            "term support {max_support} exceeds four sites"
        )));
    }
    if let Some(diff) = reassembly {
        if diff > config.tolerances.get("reassembly") {
            return Err(Error::InvariantFailed(format!(
                "reassembled terms deviate from dense H by {diff:.3e}"
            )));
        }
    }
    Ok(())
}

// ── verify ──────────────────────────────────────────────────────────

struct CheckList {
    failures: Vec<String>,
    passed: usize,
}

impl CheckList {
    fn new() -> CheckList {
        CheckList {
            failures: Vec::new(),
            passed: 0,
        }
    }

    /// Pass when `value <= bound`.
    fn check_upper(&mut self, name: &str, value: f64, bound: f64) {
        if value <= bound {
            println!("[ ok ] {name}: {value:.3e} <= {bound:.3e}");
            self.passed += 1;
        } else {
            println!("[FAIL] {name}: {value:.3e} > {bound:.3e}");
            self.failures.push(name.to_string());
        }
    }

    /// Pass when `value >= bound`.
    fn check_lower(&mut self, name: &str, value: f64, bound: f64) {
        if value >= bound {
            println!("[ ok ] {name}: {value:.6} >= {bound:.6}");
            self.passed += 1;
        } else {
            println!("[FAIL] {name}: {value:.6} < {bound:.6}");
            self.failures.push(name.to_string());
        }
    }

    fn check_bool(&mut self, name: &str, ok: bool, detail: &str) {
        if ok {
            println!("[ ok ] {name}: {detail}");
            self.passed += 1;
        } else {
            println!("[FAIL] {name}: {detail}");
            self.failures.push(name.to_string());
        }
    }

    fn finish(self) -> Result<()> {
        if self.failures.is_empty() {
            println!("all {} check(s) passed", self.passed);
            Ok(())
        } else {
            println!(
                "{} of {} check(s) failed: {}",
                self.failures.len(),
                self.passed + self.failures.len(),
                self.failures.join(", ")
            );
            Err(Error::InvariantFailed(self.failures.join(", ")))
        }
    }
}

fn random_unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..dim)
        .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let n = norm(&v);
    for z in v.iter_mut() {
        *z /= n;
    }
    v
}

fn cmd_verify(config: &RunConfig, program: &Program, initial: &QubitState) -> Result<()> {
    match classify(program)? {
        ProgramClass::Halting(circuit) => verify_halting(config, program, initial, &circuit),
        ProgramClass::NonHalting => verify_nonhalting(config, program, initial),
    }
}

fn verify_halting(
    config: &RunConfig,
    program: &Program,
    initial: &QubitState,
    circuit: &Circuit,
) -> Result<()> {
    let tol = &config.tolerances;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut checks = CheckList::new();
    let t = circuit.len();
    let m = 2 * t;
    println!(
        "halting program: T = {t}, period m = {m}, {} qubit(s)",
        circuit.num_qubits()
    );

    let trace = run_forward(program, initial)?;
    checks.check_upper(
        "ray norms",
        crate::program::ray_orthonormality_defect(&trace),
        tol.get("norm"),
    );

    let cyclic = cyclic_closure(circuit)?;
    // Mirror property: step T+j composed with step T+1-j is the identity.
    let mut mirror_defect = 0.0f64;
    for j in 1..=t {
        let prod = cyclic
            .step_gate(t + j)
            .compose_matrix(cyclic.step_gate(t + 1 - j))
            .expect("mirror steps share targets");
        let dim = 1usize << cyclic.step_gate(t + j).width();
        for r in 0..dim {
            for c in 0..dim {
                let want = if r == c { 1.0 } else { 0.0 };
                mirror_defect = mirror_defect.max((prod[r * dim + c] - want).norm());
            }
        }
    }
    checks.check_upper("mirror property", mirror_defect, tol.get("mirror"));

    // Composing all m step gates returns every qubit basis state.
    let n = circuit.num_qubits();
    let mut comp_defect = 0.0f64;
    for label in 0..(1usize << n) {
        let mut psi = QubitState::basis(n, label);
        for step in 1..=m {
            psi = crate::state::apply_gate(&psi, cyclic.step_gate(step))?;
        }
        comp_defect = comp_defect.max((psi.inner(&QubitState::basis(n, label)) - 1.0).norm());
    }
    checks.check_upper("schedule composition", comp_defect, tol.get("composition"));

    let schedule = Schedule::Cyclic(cyclic.clone());
    let u = build_step_unitary(schedule.clone())?;
    if u.dimension() <= DENSE_CAP {
        let dense = u.dense()?;
        let gram = dense.adjoint() * &dense;
        let mut defect = 0.0f64;
        for i in 0..gram.nrows() {
            for j in 0..gram.ncols() {
                let want = if i == j { 1.0 } else { 0.0 };
                defect = defect.max((gram[(i, j)] - want).norm());
            }
        }
        checks.check_upper("step unitarity (dense)", defect, tol.get("unitarity"));
    } else {
        let mut defect = 0.0f64;
        for _ in 0..8 {
            let v = random_unit_vector(&mut rng, u.dimension());
            defect = defect.max((norm(&u.apply(&v)) - 1.0).abs());
        }
        checks.check_upper("step unitarity (probes)", defect, tol.get("unitarity"));
    }

    // U^m closes the cycle on the ray.
    let v0 = ray_vector(&schedule, &trace, 0)?;
    let mut v = v0.clone();
    for _ in 0..m {
        v = u.apply(&v);
    }
    let infidelity = 1.0 - inner(&v0, &v).norm_sqr();
    checks.check_upper(
        "cycle ray return (1 - fidelity)",
        infidelity,
        tol.get("fidelity"),
    );

    let h = build_hamiltonian(u.clone());
    let mut herm_defect = 0.0f64;
    let mut norm_excess: f64 = 0.0;
    let mut commutator = 0.0f64;
    for _ in 0..8 {
        let x = random_unit_vector(&mut rng, h.dimension());
        let y = random_unit_vector(&mut rng, h.dimension());
        herm_defect = herm_defect.max(crate::hamiltonian::hermiticity_probe(&h, &x, &y));
        norm_excess = norm_excess.max(norm(&h.apply(&x)) - 2.0);
        let hu = h.apply(&u.apply(&x));
        let uh = u.apply(&h.apply(&x));
        let diff: f64 = hu
            .iter()
            .zip(&uh)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        commutator = commutator.max(diff);
    }
    checks.check_upper(
        "H hermiticity (probes)",
        herm_defect,
        tol.get("hermiticity"),
    );
    checks.check_upper(
        "operator norm excess over 2",
        norm_excess.max(0.0),
        tol.get("norm_bound"),
    );
    checks.check_upper("[H, U] on probes", commutator, tol.get("commutator"));

    let ray = restrict_to_ray(&h, &trace, &schedule)?;
    let mut structure_defect = 0.0f64;
    for i in 0..m {
        for j in 0..m {
            let hop = (i + 1) % m == j || (j + 1) % m == i;
            let want = if m == 2 {
                if hop {
                    2.0
                } else {
                    0.0
                }
            } else if hop {
                1.0
            } else {
                0.0
            };
            structure_defect = structure_defect.max((ray.entries()[(i, j)] - want).norm());
        }
    }
    checks.check_upper(
        "ray matrix = cycle adjacency",
        structure_defect,
        tol.get("ray_structure"),
    );

    let report = numeric_spectrum_with(ray.entries(), tol.get("degeneracy"))?;
    let mut analytic: Vec<f64> = analytic_halting_spectrum(m)
        .iter()
        .map(|p| p.h_eigenvalue)
        .collect();
    analytic.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let spectrum_dev = report
        .eigenvalues
        .iter()
        .zip(&analytic)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    checks.check_upper("spectrum vs 2cos(2πk/m)", spectrum_dev, tol.get("spectrum"));

    let gap = spectral_gap(&report)?;
    let gap_formula = 4.0 * (std::f64::consts::PI / m as f64).sin().powi(2);
    println!("       gap = {gap:.12} (4sin²(π/m) = {gap_formula:.12})");
    checks.check_upper(
        "gap vs 4sin²(π/m)",
        (gap - gap_formula).abs(),
        tol.get("gap"),
    );

    let waves = verify_plane_waves(&cyclic, &trace)?;
    checks.check_upper(
        "plane-wave H residual",
        waves.max_h_residual,
        tol.get("planewave"),
    );
    checks.check_upper(
        "plane-wave U residual",
        waves.max_u_residual,
        tol.get("planewave"),
    );

    let layout = UnaryClockLayout::for_schedule(&schedule);
    let terms = emit_local_terms(&schedule, &layout);
    let max_support = terms.iter().map(|t| t.support()).max().unwrap_or(0);
    let has_two_qubit_gate = circuit.gates().iter().any(|g| g.width() == 2);
    let expected_support = if has_two_qubit_gate { 4 } else { 3 };
    checks.check_bool(
        "term locality",
        max_support == expected_support,
        &format!("max support {max_support} (expected {expected_support})"),
    );
    if layout.legal_dimension() <= DENSE_CAP && h.dimension() <= DENSE_CAP {
        let assembled = assemble_from_terms(&terms, &layout)?;
        let reference = dense_on_legal_subspace(&h)?;
        let mut diff = 0.0f64;
        for i in 0..assembled.nrows() {
            for j in 0..assembled.ncols() {
                diff = diff.max((assembled[(i, j)] - reference[(i, j)]).norm());
            }
        }
        checks.check_upper("terms reassembly vs dense H", diff, tol.get("reassembly"));
    }

    if m <= 64 {
        let traj = evolve(&ray, ray.origin_index(), &default_time_grid(ray.sector()))?;
        let walk_defect = traj
            .clock_distributions
            .iter()
            .map(|d| (d.iter().sum::<f64>() - 1.0).abs())
            .fold(0.0f64, f64::max);
        checks.check_upper("walk norm conservation", walk_defect, tol.get("walk_norm"));
        match bounce_metrics(&traj) {
            Ok(b) => println!(
                "       bounce: {} peak(s), period ≈ {:.6}",
                b.peak_times.len(),
                b.estimated_period
            ),
            Err(e) => println!("       bounce: {e}"),
        }
    }

    checks.finish()
}

fn verify_nonhalting(config: &RunConfig, program: &Program, initial: &QubitState) -> Result<()> {
    let tol = &config.tolerances;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut checks = CheckList::new();
    let widths = &config.half_widths;
    let l_small = widths[0];
    let l_large = *widths.last().expect("nonempty");
    println!(
        "non-halting program: truncations L = {:?}, {} qubit(s)",
        widths,
        program.num_qubits()
    );

    let bounded = program.clone().with_budget(l_large)?;
    let trace = run_forward(&bounded, initial)?;
    checks.check_upper(
        "ray norms",
        crate::program::ray_orthonormality_defect(&trace),
        tol.get("norm"),
    );

    // Interior isometry at the small truncation.
    let schedule = Schedule::Truncated(truncate_two_sided(program, l_small)?);
    let u = build_step_unitary(schedule.clone())?;
    let layout = u.layout();
    let interior_dim = layout.block_len() * (layout.clock_sites - 1);
    let mut isometry_defect = 0.0f64;
    for _ in 0..8 {
        let mut v = vec![Complex64::new(0.0, 0.0); u.dimension()];
        let probe = random_unit_vector(&mut rng, interior_dim);
        v[..interior_dim].copy_from_slice(&probe);
        isometry_defect = isometry_defect.max((norm(&u.apply(&v)) - 1.0).abs());
    }
    checks.check_upper("interior isometry", isometry_defect, tol.get("isometry"));

    let h = build_hamiltonian(u);
    let mut herm_defect = 0.0f64;
    let mut norm_excess: f64 = 0.0;
    for _ in 0..8 {
        let x = random_unit_vector(&mut rng, h.dimension());
        let y = random_unit_vector(&mut rng, h.dimension());
        herm_defect = herm_defect.max(crate::hamiltonian::hermiticity_probe(&h, &x, &y));
        norm_excess = norm_excess.max(norm(&h.apply(&x)) - 2.0);
    }
    checks.check_upper(
        "H hermiticity (probes)",
        herm_defect,
        tol.get("hermiticity"),
    );
    checks.check_upper(
        "operator norm excess over 2",
        norm_excess.max(0.0),
        tol.get("norm_bound"),
    );

    let small_trace = run_forward(&program.clone().with_budget(l_small)?, initial)?;
    let ray_small = restrict_to_ray(&h, &small_trace, &schedule)?;
    let sites = ray_small.dimension();
    let mut structure_defect = 0.0f64;
    for i in 0..sites {
        for j in 0..sites {
            let want = if i.abs_diff(j) == 1 { 1.0 } else { 0.0 };
            structure_defect = structure_defect.max((ray_small.entries()[(i, j)] - want).norm());
        }
    }
    checks.check_upper(
        "ray matrix = path adjacency",
        structure_defect,
        tol.get("ray_structure"),
    );

    let terms_layout = UnaryClockLayout::for_schedule(&schedule);
    let terms = emit_local_terms(&schedule, &terms_layout);
    let max_support = terms.iter().map(|t| t.support()).max().unwrap_or(0);
    checks.check_bool(
        "term locality",
        max_support <= 4,
        &format!("max support {max_support}"),
    );
    if terms_layout.legal_dimension() <= DENSE_CAP && h.dimension() <= DENSE_CAP {
        let assembled = assemble_from_terms(&terms, &terms_layout)?;
        let reference = dense_on_legal_subspace(&h)?;
        let mut diff = 0.0f64;
        for i in 0..assembled.nrows() {
            for j in 0..assembled.ncols() {
                diff = diff.max((assembled[(i, j)] - reference[(i, j)]).norm());
            }
        }
        checks.check_upper("terms reassembly vs dense H", diff, tol.get("reassembly"));
    }

    let scan = gap_scan(program, widths)?;
    for (l, g) in scan.half_widths.iter().zip(&scan.gaps) {
        println!("       L = {l:>4}: gap = {g:.9e}");
    }
    checks.check_bool(
        "gaps strictly decreasing",
        scan.gaps.windows(2).all(|w| w[1] < w[0]),
        &format!("{:?}", scan.gaps),
    );
    if widths.len() >= 3 {
        let (lo, hi) = FIT_EXPONENT_WINDOW;
        checks.check_bool(
            "gap power law ~ L^-2",
            scan.fit_exponent >= lo && scan.fit_exponent <= hi,
            &format!(
                "fit exponent {:.4} (window [{lo}, {hi}])",
                scan.fit_exponent
            ),
        );
        checks.check_lower("gap fit R²", scan.fit_r2, tol.get("fit_r2"));
    }

    // Band filling and eigenvalue range at the extreme truncations.
    let mut distances = Vec::new();
    for &l in &[l_small, l_large] {
        let sched = Schedule::Truncated(truncate_two_sided(program, l)?);
        let tr = run_forward(&program.clone().with_budget(l)?, initial)?;
        let hh = build_hamiltonian(build_step_unitary(sched.clone())?);
        let rm = restrict_to_ray(&hh, &tr, &sched)?;
        let report = numeric_spectrum_with(rm.entries(), tol.get("degeneracy"))?;
        let out_of_range = report
            .eigenvalues
            .iter()
            .map(|e| (e.abs() - 2.0).max(0.0))
            .fold(0.0f64, f64::max);
        checks.check_upper(
            &format!("eigenvalue range at L = {l}"),
            out_of_range,
            tol.get("range"),
        );
        distances.push(max_spectrum_distance(&report.eigenvalues, 100));
    }
    checks.check_bool(
        "band filling improves",
        distances[1] < distances[0],
        &format!("distance {:.4} -> {:.4}", distances[0], distances[1]),
    );
    checks.check_upper(
        &format!("band cover distance at L = {l_large}"),
        distances[1],
        tol.get("band_cover"),
    );

    // Ballistic walk at the large truncation.
    let walk_l = l_large.min(128);
    let sched = Schedule::Truncated(truncate_two_sided(program, walk_l)?);
    let tr = run_forward(&program.clone().with_budget(walk_l)?, initial)?;
    let hh = build_hamiltonian(build_step_unitary(sched.clone())?);
    let rm = restrict_to_ray(&hh, &tr, &sched)?;
    let traj = evolve(&rm, rm.origin_index(), &default_time_grid(rm.sector()))?;
    let walk_defect = traj
        .clock_distributions
        .iter()
        .map(|d| (d.iter().sum::<f64>() - 1.0).abs())
        .fold(0.0f64, f64::max);
    checks.check_upper("walk norm conservation", walk_defect, tol.get("walk_norm"));
    let fit = spread_metrics(&traj)?;
    checks.check_lower("ballistic fit R²", fit.r_squared, tol.get("ballistic_r2"));

    checks.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(parts: &[&str]) -> Vec<String> {
        parts.iter().map(|s| s.to_string()).collect()
    }

    fn config(parts: &[&str]) -> Result<RunConfig> {
        match parse_args(&argv(parts))? {
            Parsed::Config(c) => Ok(c),
            Parsed::Help => panic!("unexpected help"),
        }
    }

    #[test]
    fn parses_spectrum_command() {
        let c = config(&["spectrum", "--in", "circ.json", "--out", "out/"]).unwrap();
        assert_eq!(c.command, Command::Spectrum);
        assert_eq!(c.input_path, PathBuf::from("circ.json"));
    }

    #[test]
    fn parses_half_width_list() {
        let c = config(&["gap-scan", "--in", "prog.json", "--L", "8,16,32,64"]).unwrap();
        assert_eq!(c.half_widths, vec![8, 16, 32, 64]);
    }

    #[test]
    fn rejects_descending_half_widths() {
        let err = config(&["gap-scan", "--in", "p.json", "--L", "64,8"]).unwrap_err();
        assert!(matches!(err, Error::Usage(_)));
        assert_eq!(exit_code_for(&err), 1);
    }

    #[test]
    fn rejects_unknown_flag_and_missing_input() {
        assert!(matches!(
            config(&["build", "--frobnicate"]).unwrap_err(),
            Error::Usage(_)
        ));
        assert!(matches!(config(&["build"]).unwrap_err(), Error::Usage(_)));
    }

    #[test]
    fn parses_tolerance_overrides() {
        let c = config(&["verify", "--in", "x.json", "--tol.gap=1e-8"]).unwrap();
        assert!((c.tolerances.get("gap") - 1e-8).abs() < 1e-20);
        let err = config(&["verify", "--in", "x.json", "--tol.nosuch=1"]).unwrap_err();
        assert!(matches!(err, Error::Usage(_)));
        let err = config(&["verify", "--in", "x.json", "--tol.gap=-1"]).unwrap_err();
        assert!(matches!(err, Error::Usage(_)));
    }

    #[test]
    fn parses_times() {
        let c = config(&["walk", "--in", "x.json", "--times", "0:12.5:100"]).unwrap();
        assert_eq!(c.times, Some((0.0, 12.5, 100)));
        assert!(config(&["walk", "--in", "x.json", "--times", "5:1:10"]).is_err());
    }

    #[test]
    fn help_is_not_an_error() {
        assert!(matches!(
            parse_args(&argv(&["--help"])).unwrap(),
            Parsed::Help
        ));
    }

    #[test]
    fn exit_codes_map_per_contract() {
        assert_eq!(exit_code_for(&Error::Usage("x".into())), 1);
        assert_eq!(
            exit_code_for(&Error::Json {
                path: "p".into(),
                message: "m".into()
            }),
            2
        );
        assert_eq!(exit_code_for(&Error::NonHaltingInput), 3);
        assert_eq!(exit_code_for(&Error::BudgetExhausted { budget: 4 }), 4);
        assert_eq!(exit_code_for(&Error::InvariantFailed("x".into())), 5);
    }
}
