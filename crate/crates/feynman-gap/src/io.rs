//! File formats: program JSON input, schedule/term dumps, CSV tables, and
//! SVG line plots. All writes are atomic (temp file + rename).

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::clock::{Schedule, SignBit};
use crate::error::{Error, Result};
use crate::gate::{Gate, GateKind};
use crate::program::Program;
use crate::spectral::SpectrumReport;
use crate::state::QubitState;
use crate::terms::{LocalTerm, SiteId};

/// One gate descriptor in program JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GateSpec {
    pub kind: String,
    pub targets: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
}

/// Program JSON: a gate list plus halt/repeat markers.
///
/// `halt_after: T` declares a halt signal after step T (default: after the
/// last gate). `repeat: "forever"` cycles the gate list without halting.
/// The optional `initial` amplitude list overrides |0…0⟩.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProgramSpec {
    pub num_qubits: usize,
    pub gates: Vec<GateSpec>,
    #[serde(default)]
    pub halt_after: Option<usize>,
    #[serde(default)]
    pub repeat: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<[f64; 2]>>,
}

fn gate_from_spec(spec: &GateSpec, path: &str) -> Result<Gate> {
    let kind = GateKind::from_name(&spec.kind).ok_or_else(|| Error::Json {
        path: path.into(),
        message: format!("unknown gate kind {:?}", spec.kind),
    })?;
    if kind == GateKind::Custom {
        let rows = spec.matrix.as_ref().ok_or_else(|| Error::Json {
            path: path.into(),
            message: "custom gate needs a matrix".into(),
        })?;
        let dim = 1usize << spec.targets.len();
        if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Json {
                path: path.into(),
                message: format!("custom gate matrix must be {dim}x{dim}"),
            });
        }
        let mut flat = Vec::with_capacity(dim * dim);
        for row in rows {
            for &[re, im] in row {
                flat.push(Complex64::new(re, im));
            }
        }
        Gate::custom(spec.targets.clone(), flat)
    } else {
        if spec.matrix.is_some() {
            return Err(Error::Json {
                path: path.into(),
                message: format!("gate kind {:?} does not take a matrix", spec.kind),
            });
        }
        Gate::standard(kind, spec.targets.clone())
    }
}

/// Parse a program spec into a runnable program plus its initial state.
///
/// Validation failures inside the file (unknown kinds, non-unitary custom
/// matrices, inconsistent halt markers, bad initial amplitudes) surface as
/// `Json` errors so the CLI reports them as malformed input.
pub fn program_from_spec(
    spec: &ProgramSpec,
    budget: usize,
    path: &str,
) -> Result<(Program, QubitState)> {
    let as_json_error = |e: Error| match e {
        Error::Json { .. } | Error::Io { .. } => e,
        other => Error::Json {
            path: path.into(),
            message: other.to_string(),
        },
    };
    let repeat = match spec.repeat.as_deref() {
        None => false,
        Some("forever") => true,
        Some(other) => {
            return Err(Error::Json {
                path: path.into(),
                message: format!("repeat must be \"forever\" or null, got {other:?}"),
            })
        }
    };
    let gates = spec
        .gates
        .iter()
        .map(|g| gate_from_spec(g, path))
        .collect::<Result<Vec<_>>>()
        .map_err(&as_json_error)?;
    let program =
        Program::new(spec.num_qubits, gates, spec.halt_after, repeat, budget).map_err(|e| {
            // A zero budget is a CLI usage problem, not a file problem.
            if matches!(e, Error::ZeroBudget) {
                e
            } else {
                as_json_error(e)
            }
        })?;
    let initial = match &spec.initial {
        None => QubitState::zero(spec.num_qubits),
        Some(amps) => QubitState::new(
            spec.num_qubits,
            amps.iter()
                .map(|&[re, im]| Complex64::new(re, im))
                .collect(),
        )
        .map_err(&as_json_error)?,
    };
    Ok((program, initial))
}

/// Load a program JSON file.
pub fn load_program(path: &Path, budget: usize) -> Result<(Program, QubitState)> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let spec: ProgramSpec = serde_json::from_str(&text).map_err(|e| Error::Json {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    program_from_spec(&spec, budget, &path.display().to_string())
}

fn step_value(gate: &Gate) -> Value {
    let mut v = json!({
        "kind": gate.kind().name(),
        "targets": gate.targets(),
        "dagger": gate.is_adjointed(),
    });
    if gate.kind() == GateKind::Custom {
        let dim = 1usize << gate.width();
        let rows: Vec<Vec<[f64; 2]>> = (0..dim)
            .map(|r| {
                (0..dim)
                    .map(|c| {
                        let z = gate.matrix()[r * dim + c];
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect();
        v["matrix"] = json!(rows);
    }
    v
}

/// Schedule dump: period/half-width, per-step gate descriptors, sign map.
pub fn schedule_json(schedule: &Schedule) -> Value {
    match schedule {
        Schedule::Cyclic(s) => {
            let steps: Vec<Value> = (1..=s.period())
                .map(|step| {
                    let mut v = step_value(s.step_gate(step));
                    v["step"] = json!(step);
                    v
                })
                .collect();
            let sign_map: Vec<&str> = (0..s.period())
                .map(|l| match s.sign_of(l) {
                    SignBit::Plus => "plus",
                    SignBit::Minus => "minus",
                })
                .collect();
            json!({
                "schedule": "cyclic",
                "num_qubits": s.num_qubits(),
                "period": s.period(),
                "halt_step": s.halt_step(),
                "steps": steps,
                "sign_map": sign_map,
            })
        }
        Schedule::Truncated(s) => {
            let l = s.half_width() as i64;
            let steps: Vec<Value> = (-l..l)
                .map(|from| {
                    let mut v = step_value(&s.edge_gate(from));
                    v["edge_from"] = json!(from);
                    v
                })
                .collect();
            json!({
                "schedule": "truncated",
                "num_qubits": s.num_qubits(),
                "half_width": s.half_width(),
                "steps": steps,
            })
        }
    }
}

/// Local-term dump: sites and row-major tensors.
pub fn terms_json(terms: &[LocalTerm]) -> Value {
    let items: Vec<Value> = terms
        .iter()
        .map(|term| {
            let sites: Vec<Value> = term
                .sites
                .iter()
                .map(|s| match s {
                    SiteId::Qubit(i) => json!({"qubit": i}),
                    SiteId::ClockCell(c) => json!({"clock": c}),
                })
                .collect();
            let dim = 1usize << term.sites.len();
            let tensor: Vec<Vec<[f64; 2]>> = (0..dim)
                .map(|r| {
                    (0..dim)
                        .map(|c| {
                            let z = term.tensor[r * dim + c];
                            [z.re, z.im]
                        })
                        .collect()
                })
                .collect();
            json!({"sites": sites, "tensor": tensor})
        })
        .collect();
    json!(items)
}

/// Spectrum CSV: index, eigenvalue, level index, multiplicity of the level.
pub fn spectrum_csv(report: &SpectrumReport) -> String {
    let mut out = String::from("index,eigenvalue,level_index,multiplicity\n");
    let mut level = 0usize;
    let mut remaining = report.multiplicities.first().copied().unwrap_or(0);
    for (i, e) in report.eigenvalues.iter().enumerate() {
        if remaining == 0 {
            level += 1;
            remaining = report.multiplicities[level];
        }
        out.push_str(&format!(
            "{i},{e:.15e},{level},{}\n",
            report.multiplicities[level]
        ));
        remaining -= 1;
    }
    out
}

/// Gap-scan CSV: half width, gap.
pub fn gap_csv(half_widths: &[usize], gaps: &[f64]) -> String {
    let mut out = String::from("L,gap\n");
    for (l, g) in half_widths.iter().zip(gaps) {
        out.push_str(&format!("{l},{g:.15e}\n"));
    }
    out
}

/// Trajectory CSV: time, return probability, mean squared displacement.
pub fn trajectory_csv(traj: &crate::dynamics::WalkTrajectory) -> String {
    let mut out = String::from("t,return_prob,mean_sq_displacement\n");
    for ((t, rp), msd) in traj
        .times
        .iter()
        .zip(&traj.return_probability)
        .zip(&traj.mean_sq_displacement)
    {
        out.push_str(&format!("{t:.15e},{rp:.15e},{msd:.15e}\n"));
    }
    out
}

/// Per-site distribution matrix CSV: one row per time, one column per clock
/// label.
pub fn distributions_csv(traj: &crate::dynamics::WalkTrajectory) -> String {
    let mut out = String::from("t");
    for label in &traj.clock_labels {
        out.push_str(&format!(",p_{label}"));
    }
    out.push('\n');
    for (t, dist) in traj.times.iter().zip(&traj.clock_distributions) {
        out.push_str(&format!("{t:.15e}"));
        for p in dist {
            out.push_str(&format!(",{p:.15e}"));
        }
        out.push('\n');
    }
    out
}

/// A minimal axis-labeled SVG line plot.
pub fn svg_line_plot(title: &str, x_label: &str, y_label: &str, xs: &[f64], ys: &[f64]) -> String {
    assert_eq!(xs.len(), ys.len());
    let (width, height) = (640.0, 400.0);
    let (ml, mr, mt, mb) = (70.0, 20.0, 40.0, 50.0);
    let pw = width - ml - mr;
    let ph = height - mt - mb;
    let (x_min, x_max) = bounds(xs);
    let (y_min, y_max) = bounds(ys);
    let sx = |x: f64| ml + (x - x_min) / (x_max - x_min).max(f64::MIN_POSITIVE) * pw;
    let sy = |y: f64| mt + ph - (y - y_min) / (y_max - y_min).max(f64::MIN_POSITIVE) * ph;

    let mut points = String::new();
    for (x, y) in xs.iter().zip(ys) {
        points.push_str(&format!("{:.2},{:.2} ", sx(*x), sy(*y)));
    }
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">{title}</text>\n",
        ml + pw / 2.0
    ));
    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>\n",
        mt + ph,
        ml + pw
    ));
    svg.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"{mt}\" x2=\"{ml}\" y2=\"{}\" stroke=\"black\"/>\n",
        mt + ph
    ));
    // Tick labels at the extremes.
    svg.push_str(&format!(
        "<text x=\"{ml}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{x_min:.3}</text>\n",
        mt + ph + 16.0
    ));
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{x_max:.3}</text>\n",
        ml + pw,
        mt + ph + 16.0
    ));
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{y_min:.3}</text>\n",
        ml - 6.0,
        mt + ph
    ));
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{y_max:.3}</text>\n",
        ml - 6.0,
        mt + 10.0
    ));
    // Axis labels.
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">{x_label}</text>\n",
        ml + pw / 2.0,
        height - 12.0
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 16 {:.1})\">{y_label}</text>\n",
        mt + ph / 2.0,
        mt + ph / 2.0
    ));
    svg.push_str(&format!(
        "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\" points=\"{}\"/>\n",
        points.trim_end()
    ));
    svg.push_str("</svg>\n");
    svg
}

fn bounds(vals: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in vals {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Write a file atomically: temp file in the same directory, then rename.
pub fn atomic_write(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let mut tmp: PathBuf = dir.to_path_buf();
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    tmp.push(format!(".{name}.tmp-{}", std::process::id()));
    fs::write(&tmp, contents).map_err(|source| Error::Io {
        path: tmp.display().to_string(),
        source,
    })?;
    fs::rename(&tmp, path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(())
}
