//! Command-line front end. Exit codes: 0 success, 1 check failed, 2 usage or input error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::basis::{gram_matrix, non_orthogonal_pairs, synthesize, CoefficientVector, NonOrthogonalPair};
use crate::circuit::{parse_circuit, run_circuit_with, RunOptions};
use crate::error::{Error, Result};
use crate::ladder::{build_custom_ladder, build_ladder, FrequencyLadder};
use crate::measurement::{MeasureMode, MeasureOrder, MeasurementRecord};
use crate::oracle::{assert_equivalent, dense_run, differential_suite, DenseState};
use crate::shor::{self, ShorConfig, ShorMode, ShorStatus};
use crate::truncation::{default_taus, series_to_csv, Knee, TruncationStudy, KNEE_THRESHOLD};
use crate::waveform::{parse_bitstring, Interval};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "qwave", version, about = "Quantum computation on harmonic-function waveforms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Qft,
    Simplified,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MeasureModeArg {
    MaxRule,
    Born,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OrderArg {
    Msb,
    Lsb,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum IntervalArg {
    Full,
    Half,
}

impl From<MeasureModeArg> for MeasureMode {
    fn from(m: MeasureModeArg) -> Self {
        match m {
            MeasureModeArg::MaxRule => MeasureMode::MaxRule,
            MeasureModeArg::Born => MeasureMode::Born,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Factor a small odd composite by period finding.
    Shor {
        #[arg(long, default_value_t = 21)]
        n: u64,
        #[arg(long, default_value_t = 2)]
        a: u64,
        #[arg(long, value_enum, default_value = "qft")]
        mode: ModeArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "max-rule")]
        measure_mode: MeasureModeArg,
        /// Order in which register-2 qubits are measured.
        #[arg(long, value_enum, default_value = "msb")]
        measure_order: OrderArg,
        #[arg(long, default_value_t = 2)]
        oversample: usize,
        /// Report JSON path (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Histogram CSV path (`x,probability`).
        #[arg(long)]
        hist: Option<PathBuf>,
    },
    /// Truncated-addressing error and probability-ratio sweeps.
    Trunc {
        /// Entangled qubit counts, e.g. `5..8`, `5..=8` or `5,6,7`.
        #[arg(long, default_value = "5..8")]
        ne: String,
        #[arg(long, default_value_t = 1)]
        qubit: usize,
        /// Output paths for the delta and ratio CSVs.
        #[arg(long, num_args = 2, value_names = ["DELTA", "RATIO"])]
        out: Option<Vec<PathBuf>>,
        /// Also run 9 entangled qubits.
        #[arg(long)]
        big: bool,
        #[arg(long, default_value_t = 64)]
        points: usize,
        #[arg(long, default_value_t = 2)]
        oversample: usize,
        /// Summary JSON path (stdout if omitted).
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Gram matrix of the product basis and its non-orthogonal pairs.
    Gram {
        /// Comma-separated qubit frequencies.
        #[arg(long, value_delimiter = ',', conflicts_with = "n", required_unless_present = "n")]
        freqs: Option<Vec<u64>>,
        /// Standard ladder of this many qubits.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum, default_value = "full")]
        interval: IntervalArg,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a circuit file on the waveform and dense backends and compare.
    Circuit {
        file: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Initial state: `random`, `zero`, or a bitstring such as `0110`.
        #[arg(long, default_value = "random")]
        init: String,
        #[arg(long, value_enum, default_value = "max-rule")]
        measure_mode: MeasureModeArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Differential suite of random circuits against the dense oracle.
    Verify {
        /// Qubit counts, e.g. `5` or `2..6`.
        #[arg(long, default_value = "5")]
        n: String,
        #[arg(long, default_value_t = 100)]
        circuits: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        depth: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `a..b` (inclusive), `a..=b`, or a comma list.
pub fn parse_count_list(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::Domain(format!("invalid qubit-count list {s:?}"));
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    let out = if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
        if a > b {
            return Err(bad());
        }
        (a..=b).collect()
    } else {
        s.split(',').map(num).collect::<Result<Vec<_>>>()?
    };
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

fn emit(path: Option<&Path>, contents: &str, stdout: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, contents).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => stdout
            .write_all(contents.as_bytes())
            .map_err(|e| Error::Io(e.to_string())),
    }
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct GramReport {
    freqs: Vec<u64>,
    fund: u64,
    unique_spectrum: bool,
    interval: &'static str,
    expected_diagonal: f64,
    max_off_diagonal: f64,
    gram: Vec<Vec<f64>>,
    non_orthogonal_pairs: Vec<NonOrthogonalPair>,
}

#[derive(Serialize)]
struct TruncSummary {
    qubit: usize,
    threshold: f64,
    curves: Vec<TruncCurveSummary>,
    knees: Vec<Knee>,
    knee_ratios: Vec<f64>,
}

#[derive(Serialize)]
struct TruncCurveSummary {
    n_entangled: usize,
    points: usize,
    delta_at_full: Option<f64>,
    ratio_at_full: Option<f64>,
}

#[derive(Serialize)]
struct CircuitReport {
    file: String,
    n_qubits: usize,
    ops: usize,
    init: String,
    seed: u64,
    measurements: Vec<MeasurementRecord>,
    final_qubits: usize,
    max_diff: f64,
    tol: f64,
    pass: bool,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
    }
}

pub fn execute(cmd: &Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Shor {
            n,
            a,
            mode,
            seed,
            measure_mode,
            measure_order,
            oversample,
            out,
            hist,
        } => {
            let mut cfg = ShorConfig::new(
                *n,
                *a,
                *seed,
                match mode {
                    ModeArg::Qft => ShorMode::Qft,
                    ModeArg::Simplified => ShorMode::Simplified,
                },
            );
            cfg.measure_mode = (*measure_mode).into();
            cfg.measure_order = match measure_order {
                OrderArg::Msb => MeasureOrder::MsbFirst,
                OrderArg::Lsb => MeasureOrder::LsbFirst,
            };
            cfg.oversample = *oversample;
            let report = shor::run(&cfg)?;
            emit(out.as_deref(), &(report.to_json() + "\n"), stdout)?;
            if let Some(h) = hist {
                emit(Some(h), &report.histogram_csv(), stdout)?;
            }
            let _ = writeln!(stderr, "{}", report.message);
            Ok(match report.status {
                ShorStatus::Success | ShorStatus::Trivial => EXIT_OK,
                _ => EXIT_FAILED,
            })
        }
        Command::Trunc {
            ne,
            qubit,
            out,
            big,
            points,
            oversample,
            summary,
        } => {
            let mut counts = parse_count_list(ne)?;
            if *big && !counts.contains(&9) {
                counts.push(9);
            }
            if *points == 0 {
                return Err(Error::Domain("need at least one sweep point".into()));
            }
            let (mut deltas, mut ratios, mut knees, mut curves) = (vec![], vec![], vec![], vec![]);
            for &n_e in &counts {
                let study = TruncationStudy::new(n_e, *qubit, *oversample)?;
                let taus = default_taus(study.grid(), *points);
                let d = study.delta_curve(&taus)?;
                let r = study.ratio_curve(&taus)?;
                if let Some(k) = study.knee(&d, KNEE_THRESHOLD)? {
                    knees.push(k);
                }
                curves.push(TruncCurveSummary {
                    n_entangled: n_e,
                    points: taus.len(),
                    delta_at_full: d.last(),
                    ratio_at_full: r.last(),
                });
                deltas.push(d);
                ratios.push(r);
            }
            if let Some(paths) = out {
                emit(Some(&paths[0]), &series_to_csv(&deltas), stdout)?;
                emit(Some(&paths[1]), &series_to_csv(&ratios), stdout)?;
            }
            let knee_ratios = knees
                .windows(2)
                .map(|w| w[1].tau_physical / w[0].tau_physical)
                .collect();
            let s = TruncSummary {
                qubit: *qubit,
                threshold: KNEE_THRESHOLD,
                curves,
                knees,
                knee_ratios,
            };
            emit(summary.as_deref(), &json(&s), stdout)?;
            Ok(EXIT_OK)
        }
        Command::Gram {
            freqs,
            n,
            interval,
            tol,
            out,
        } => {
            let (ladder, grid) = match (freqs, n) {
                (Some(f), _) => build_custom_ladder(f, 2)?,
                (None, Some(n)) => build_ladder(*n, 2)?,
                (None, None) => return Err(Error::Domain("pass --freqs or --n".into())),
            };
            let (iv, name) = match interval {
                IntervalArg::Full => (Interval::Full, "full"),
                IntervalArg::Half => (Interval::Half, "half"),
            };
            let gram = gram_matrix(&grid, iv)?;
            let report = gram_report(&ladder, gram, name, *tol);
            emit(out.as_deref(), &json(&report), stdout)?;
            Ok(EXIT_OK)
        }
        Command::Circuit {
            file,
            tol,
            seed,
            init,
            measure_mode,
            out,
        } => {
            let text = fs::read_to_string(file)
                .map_err(|e| Error::Io(format!("{}: {e}", file.display())))?;
            let circuit = parse_circuit(&text)?;
            let n_qubits = circuit.n_qubits;
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let dense = match init.as_str() {
                "random" => DenseState::random(n_qubits, &mut rng),
                "zero" => DenseState::basis_state(n_qubits, 0),
                bits => {
                    if bits.len() != n_qubits {
                        return Err(Error::Domain(format!(
                            "initial bitstring {bits:?} must have {n_qubits} bits"
                        )));
                    }
                    DenseState::basis_state(n_qubits, parse_bitstring(bits)?)
                }
            };
            let (_, grid) = build_ladder(n_qubits, 2)?;
            let psi = synthesize(&CoefficientVector::new(n_qubits, dense.amps.clone())?, &grid)?;
            let opts = RunOptions {
                mode: (*measure_mode).into(),
                ..Default::default()
            };
            let (result, records) = run_circuit_with(&psi, &circuit, &mut rng, &opts)?;
            let outcomes: Vec<_> = records.iter().map(|r| r.outcome).collect();
            let expect = dense_run(&dense, &circuit, &outcomes)?;
            let eq = assert_equivalent(&result, &expect, *tol)?;
            let report = CircuitReport {
                file: file.display().to_string(),
                n_qubits,
                ops: circuit.ops.len(),
                init: init.clone(),
                seed: *seed,
                measurements: records,
                final_qubits: result.n_qubits(),
                max_diff: eq.max_diff,
                tol: *tol,
                pass: eq.pass,
            };
            emit(out.as_deref(), &json(&report), stdout)?;
            Ok(if eq.pass { EXIT_OK } else { EXIT_FAILED })
        }
        Command::Verify {
            n,
            circuits,
            seed,
            depth,
            tol,
            out,
        } => {
            let counts = parse_count_list(n)?;
            let report = differential_suite(&counts, *circuits, *depth, *seed, *tol)?;
            let _ = writeln!(
                stderr,
                "{}/{} circuits within {:e} (max deviation {:.3e})",
                report.passed, report.circuits, report.tol, report.max_diff
            );
            emit(out.as_deref(), &json(&report), stdout)?;
            Ok(if report.pass() { EXIT_OK } else { EXIT_FAILED })
        }
    }
}

fn gram_report(ladder: &FrequencyLadder, gram: Vec<Vec<f64>>, interval: &'static str, tol: f64) -> GramReport {
    let n_qubits = ladder.n_qubits();
    let span = if interval == "full" { ladder.period() } else { ladder.period() / 2.0 };
    let max_off_diagonal = gram
        .iter()
        .enumerate()
        .flat_map(|(j, row)| row.iter().enumerate().filter(move |(k, _)| *k != j).map(|(_, v)| v.abs()))
        .fold(0.0, f64::max);
    GramReport {
        freqs: ladder.freqs().to_vec(),
        fund: ladder.fund(),
        unique_spectrum: ladder.unique_spectrum(),
        interval,
        expected_diagonal: span / (1u64 << n_qubits) as f64,
        max_off_diagonal,
        non_orthogonal_pairs: non_orthogonal_pairs(&gram, n_qubits, tol),
        gram,
    }
}
