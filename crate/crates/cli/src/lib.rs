//! `cohtomo`: plan, simulate, reconstruct and inspect coherence measurements
//! from the command line. All artifacts are JSON documents (see
//! [`document`]).

pub mod document;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use cohtomo_core::expansion::predicted_moment;
use cohtomo_core::fock::{CoherenceTensor, FixedNState};
use cohtomo_core::gadget::{euler_from_setting, plate_angles_from_euler, table1, MeasurementSetting};
use cohtomo_core::recipe::{reconstruct, settings_plan, MeasurementRecord, Reconstruction};
use cohtomo_core::sampler::{run_campaign, RNG_ALGORITHM};
use cohtomo_core::tomography::{density_from_coherences, stokes_means, stokes_variances};
use document::{
    describe_warning, Body, DensityPayload, Document, PlanPayload, PlatesPayload, Provenance, RecordsPayload,
    StatePayload, StokesPayload, TablePayload, TensorPayload,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "cohtomo", version, about = "Measure and reconstruct Nth-order two-mode coherences")]
struct Cli {
    /// Interpret angles given on the command line as degrees.
    #[arg(long, global = true)]
    degrees: bool,
    /// Write the output document to PATH instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Input document for commands that read a single one ("-" for standard input).
    #[arg(long = "in", global = true, value_name = "PATH")]
    input: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Emit the measurement plan for order N.
    Plan {
        #[arg(long)]
        order: usize,
    },
    /// Exact Nth-order intensity moments of a state, at one setting or at every plan setting.
    Predict {
        /// State document ("-" for standard input).
        #[arg(long, value_name = "PATH")]
        state: Option<String>,
        /// Setting as "THETA,PHI".
        #[arg(long, value_parser = parse_setting, allow_hyphen_values = true, value_name = "THETA,PHI")]
        setting: Option<(f64, f64)>,
    },
    /// Simulate a finite-shot measurement campaign over the plan.
    Campaign {
        #[arg(long, value_name = "PATH")]
        state: Option<String>,
        /// Defaults to the photon number of the state.
        #[arg(long)]
        order: Option<usize>,
        #[arg(long)]
        shots: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Recover every order-N coherence from a records document.
    Reconstruct {
        #[arg(long, value_name = "PATH")]
        records: Option<String>,
        /// Defaults to the order stored in the records document.
        #[arg(long)]
        order: Option<usize>,
    },
    /// Density matrix from a records document, with a validation report.
    Tomography {
        #[arg(long, value_name = "PATH")]
        records: Option<String>,
        #[arg(long)]
        order: Option<usize>,
        /// Clip negative eigenvalues and renormalize.
        #[arg(long)]
        project_psd: bool,
    },
    /// Euler and wave-plate angles realizing a setting.
    Plates {
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long, allow_hyphen_values = true)]
        phi: f64,
    },
    /// The nine N = 2 settings with Euler and plate angles next to the reference values.
    Table1 {
        /// Emit a table document instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Stokes means and covariance from order-1 and order-2 records.
    Stokes {
        #[arg(long, value_name = "PATH")]
        records1: String,
        #[arg(long, value_name = "PATH")]
        records2: String,
    },
    /// Write a state document for a NOON or Fock state.
    State {
        #[arg(long)]
        photons: usize,
        /// (|N,0⟩ + |0,N⟩)/√2.
        #[arg(long, conflicts_with = "mode1")]
        noon: bool,
        /// Fock state with this many photons in mode 1.
        #[arg(long, required_unless_present = "noon")]
        mode1: Option<usize>,
    },
}

fn parse_setting(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected THETA,PHI, got {s:?}"))?;
    let parse = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
    let (t, p) = (parse(a)?, parse(b)?);
    if !(t.is_finite() && p.is_finite()) {
        return Err("angles must be finite".into());
    }
    Ok((t, p))
}

#[derive(Debug)]
enum CliError {
    Input(String),
    Numerical(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_INPUT,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<cohtomo_core::Error> for CliError {
    fn from(e: cohtomo_core::Error) -> Self {
        use cohtomo_core::Error as E;
        match e {
            E::SingularSystem { .. } | E::Normalization(_) | E::Unitarity { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

struct Io<'a> {
    stdin: &'a mut dyn Read,
    stdin_used: bool,
}

impl Io<'_> {
    fn read_text(&mut self, path: &str) -> Result<String, CliError> {
        if path == "-" {
            if self.stdin_used {
                return Err(CliError::Input("standard input can be read only once".into()));
            }
            self.stdin_used = true;
            let mut s = String::new();
            self.stdin.read_to_string(&mut s).map_err(|e| CliError::Input(format!("standard input: {e}")))?;
            Ok(s)
        } else {
            std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{path}: {e}")))
        }
    }

    fn read_doc(&mut self, path: &str) -> Result<Document, CliError> {
        let text = self.read_text(path)?;
        Document::from_json(&text).map_err(|e| CliError::Input(format!("{path}: {e}")))
    }
}

fn pick_input(specific: Option<String>, global: &Option<String>) -> String {
    specific.or_else(|| global.clone()).unwrap_or_else(|| "-".into())
}

fn wrong_kind(path: &str, want: &str, got: &Body) -> CliError {
    CliError::Input(format!("{path}: expected a {want} document, got {}", got.kind()))
}

fn read_state(io: &mut Io, path: &str) -> Result<FixedNState, CliError> {
    match io.read_doc(path)?.body {
        Body::State(p) => p.to_state().map_err(|e| CliError::Input(format!("{path}: {e}"))),
        other => Err(wrong_kind(path, "state", &other)),
    }
}

fn read_records(io: &mut Io, path: &str) -> Result<RecordsPayload, CliError> {
    match io.read_doc(path)?.body {
        Body::Records(p) => Ok(p),
        other => Err(wrong_kind(path, "records", &other)),
    }
}

fn resolve_order(flag: Option<usize>, stored: usize) -> Result<usize, CliError> {
    match flag {
        Some(n) if n != stored => {
            Err(CliError::Input(format!("--order {n} does not match the order {stored} of the records")))
        }
        _ => Ok(stored),
    }
}

fn reconstruct_from(io: &mut Io, path: &str, order: Option<usize>) -> Result<Reconstruction, CliError> {
    let payload = read_records(io, path)?;
    let order = resolve_order(order, payload.order)?;
    Ok(reconstruct(&payload.to_records(), order)?)
}

/// The representative of `x` modulo `period` closest to `reference`.
fn nearest(x: f64, reference: f64, period: f64) -> f64 {
    x + period * ((reference - x) / period).round()
}

fn table_text(payload: &TablePayload) -> String {
    use std::f64::consts::{FRAC_PI_2, PI, TAU};
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>5} {:>5} | {:>7} {:>7} {:>7} | {:>6} {:>6} {:>6} | {:>7} {:>7} {:>7} | {:>6} {:>6} {:>6} | {:>8} {:>8}",
        "θ", "φ", "ξ", "η", "ζ", "QP1", "QP2", "HP", "ξ ref", "η ref", "ζ ref", "QP1", "QP2", "HP", "dEuler", "dPlates"
    );
    for r in &payload.rows {
        let [pxi, peta, pzeta] = r.printed_euler;
        let [pq1, pq2, ph] = r.printed_plates;
        // computed angles shown as the equivalent closest to the reference
        let [xi, eta, zeta] = [0, 1, 2].map(|k| nearest(r.euler[k], r.printed_euler[k], TAU));
        let [q1, q2] = [0, 1].map(|k| nearest(r.plates[k], r.printed_plates[k], PI));
        let h = nearest(r.plates[2], ph, FRAC_PI_2);
        let _ = writeln!(
            out,
            "{:>5} {:>5} | {xi:>7.3} {eta:>7.3} {zeta:>7.3} | {q1:>6.3} {q2:>6.3} {h:>6.3} | {pxi:>7.3} {peta:>7.3} {pzeta:>7.3} | {pq1:>6.3} {pq2:>6.3} {ph:>6.3} | {:>8.1e} {:>8.1e}",
            r.theta_label,
            r.phi_label,
            r.euler_deviation.abs(),
            r.plates_deviation.abs()
        );
    }
    for (i, r) in payload.rows.iter().enumerate() {
        if let Some(note) = &r.note {
            let [a, b, c] = r.euler_from_printed_plates;
            let _ = writeln!(
                out,
                "row {}: {note}; Euler angles from the reference plates: ({a:.3}, {b:.3}, {c:.3})",
                i + 1
            );
        }
    }
    out
}

/// Output text: a document, or a plain table. Warnings are collected even
/// when the command fails later.
fn execute(cli: Cli, io: &mut Io, warnings: &mut Vec<String>) -> Result<String, CliError> {
    let angle = |x: f64| if cli.degrees { x.to_radians() } else { x };
    let doc = |body: Body| Document::new(body).to_json();
    let text = match cli.command {
        Command::Plan { order } => doc(Body::Plan(PlanPayload::from_plan(&settings_plan(order)?))),
        Command::Predict { state, setting } => {
            let path = pick_input(state, &cli.input);
            let state = read_state(io, &path)?;
            let n = state.photons();
            let tensor = CoherenceTensor::from_state(&state, n);
            let settings = match setting {
                Some((t, p)) => vec![MeasurementSetting::new(angle(t), angle(p))],
                None => settings_plan(n)?.settings,
            };
            let records = settings
                .iter()
                .map(|s| Ok(MeasurementRecord::exact(*s, predicted_moment(&tensor, s)?)))
                .collect::<Result<Vec<_>, cohtomo_core::Error>>()?;
            let source = Provenance { method: "exact".into(), shots: None, seed: None, rng: None };
            doc(Body::Records(RecordsPayload::new(n, Some(source), &records)))
        }
        Command::Campaign { state, order, shots, seed } => {
            let path = pick_input(state, &cli.input);
            let state = read_state(io, &path)?;
            let n = state.photons();
            if let Some(o) = order.filter(|&o| o != n) {
                return Err(CliError::Input(format!("--order {o} does not match the {n}-photon state")));
            }
            let records = run_campaign(&state, &settings_plan(n)?, shots, seed)?;
            let source = Provenance {
                method: "simulated".into(),
                shots: Some(shots),
                seed: Some(seed),
                rng: Some(RNG_ALGORITHM.into()),
            };
            doc(Body::Records(RecordsPayload::new(n, Some(source), &records)))
        }
        Command::Reconstruct { records, order } => {
            let path = pick_input(records, &cli.input);
            let rec = reconstruct_from(io, &path, order)?;
            doc(Body::Tensor(TensorPayload::from_reconstruction(&rec)))
        }
        Command::Tomography { records, order, project_psd } => {
            let path = pick_input(records, &cli.input);
            let rec = reconstruct_from(io, &path, order)?;
            let est = density_from_coherences(&rec.tensor)?;
            warnings.extend(est.warnings.iter().map(describe_warning));
            let payload = if project_psd {
                DensityPayload::from_projected(&est, &est.project_psd()?)
            } else {
                DensityPayload::from_estimate(&est)
            };
            doc(Body::Density(payload))
        }
        Command::Plates { theta, phi } => {
            let setting = MeasurementSetting::new(angle(theta), angle(phi));
            let euler = euler_from_setting(&setting);
            let plates = plate_angles_from_euler(&euler);
            doc(Body::Plates(PlatesPayload::new(&setting, &euler, &plates)))
        }
        Command::Table1 { json } => {
            let payload = TablePayload::from_rows(&table1());
            if json {
                doc(Body::Table(payload))
            } else {
                return Ok(table_text(&payload));
            }
        }
        Command::Stokes { records1, records2 } => {
            let first = reconstruct_from(io, &records1, Some(1))?;
            let second = reconstruct_from(io, &records2, Some(2))?;
            let means = stokes_means(&first.tensor)?;
            let cov = stokes_variances(&first.tensor, &second.tensor)?;
            doc(Body::Stokes(StokesPayload::new(&means, &cov)))
        }
        Command::State { photons, noon, mode1 } => {
            let state = if noon {
                FixedNState::noon(photons)
            } else {
                FixedNState::basis(photons, mode1.expect("clap requires --mode1 without --noon"))?
            };
            doc(Body::State(StatePayload::from_state(&state)))
        }
    };
    Ok(text + "\n")
}

/// Runs the command line `argv` (program name first) against the given
/// streams and returns the exit code.
pub fn run_with<I, T>(argv: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let out = cli.out.clone();
    let mut io = Io { stdin, stdin_used: false };
    let mut warnings = Vec::new();
    let result = execute(cli, &mut io, &mut warnings);
    for w in warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    match result {
        Ok(text) => {
            let written = match out {
                Some(path) => std::fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display())),
                None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => EXIT_OK,
                Err(e) => {
                    let _ = writeln!(stderr, "error: {e}");
                    EXIT_INPUT
                }
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message());
            e.code()
        }
    }
}

/// [`run_with`] on the process's standard streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(argv, &mut std::io::stdin().lock(), &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
