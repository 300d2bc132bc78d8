//! Python bindings: `import qwave_py`.

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use qwave::basis::gram_matrix;
use qwave::circuit::{parse_circuit_for, run_circuit};
use qwave::gates::{apply_controlled, apply_multi_controlled_with, apply_single, GateOptions, Unitary2};
use qwave::ladder::FrequencyLadder;
use qwave::measurement::{self, MeasureMode, MeasureOrder};
use qwave::oracle::differential_suite;
use qwave::shor::{self, ShorConfig, ShorMode};
use qwave::truncation::{default_taus, TruncationStudy, KNEE_THRESHOLD};
use qwave::waveform::parse_bitstring;
use qwave::{analyze, build_custom_ladder, build_ladder, synthesize, Basis, CoefficientVector, Interval, Waveform};

create_exception!(qwave_py, QwaveError, PyValueError);

fn err(e: qwave::Error) -> PyErr {
    match e {
        qwave::Error::Io(m) => PyOSError::new_err(m),
        other => QwaveError::new_err(other.to_string()),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let s = serde_json::to_string(v).map_err(|e| QwaveError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (s,))
}

fn unitary(matrix: Vec<Vec<Complex64>>) -> PyResult<Unitary2> {
    match matrix.as_slice() {
        [r0, r1] if r0.len() == 2 && r1.len() == 2 => Unitary2::new(r0[0], r0[1], r1[0], r1[1]).map_err(err),
        _ => Err(QwaveError::new_err("gate matrix must be 2x2")),
    }
}

fn outcome(bit: u8) -> PyResult<Basis> {
    match bit {
        0 => Ok(Basis::Sin),
        1 => Ok(Basis::Cos),
        _ => Err(QwaveError::new_err(format!("outcome must be 0 or 1, got {bit}"))),
    }
}

/// Integer frequency ladder.
#[pyclass(name = "Ladder", module = "qwave_py", frozen)]
struct PyLadder {
    inner: FrequencyLadder,
}

#[pymethods]
impl PyLadder {
    #[new]
    fn new(freqs: Vec<u64>) -> PyResult<Self> {
        Ok(Self {
            inner: FrequencyLadder::custom(freqs).map_err(err)?,
        })
    }

    /// `[2^(N-1), ..., 2, 1]`.
    #[staticmethod]
    fn standard(n_qubits: usize) -> PyResult<Self> {
        Ok(Self {
            inner: FrequencyLadder::standard(n_qubits).map_err(err)?,
        })
    }

    #[getter]
    fn freqs(&self) -> Vec<u64> {
        self.inner.freqs().to_vec()
    }

    #[getter]
    fn fund(&self) -> u64 {
        self.inner.fund()
    }

    #[getter]
    fn n_qubits(&self) -> usize {
        self.inner.n_qubits()
    }

    #[getter]
    fn unique_spectrum(&self) -> bool {
        self.inner.unique_spectrum()
    }

    #[getter]
    fn period(&self) -> f64 {
        self.inner.period()
    }

    fn __repr__(&self) -> String {
        format!("Ladder({:?})", self.inner.freqs())
    }
}

/// Sampled register waveform. Gate methods return a new waveform.
#[pyclass(name = "Waveform", module = "qwave_py", frozen)]
struct PyWaveform {
    inner: Waveform,
}

impl PyWaveform {
    fn wrap(inner: Waveform) -> Self {
        Self { inner }
    }
}

#[pymethods]
impl PyWaveform {
    #[staticmethod]
    #[pyo3(signature = (amplitudes, freqs=None, oversample=2))]
    fn from_amplitudes(amplitudes: Vec<Complex64>, freqs: Option<Vec<u64>>, oversample: usize) -> PyResult<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(QwaveError::new_err(format!("{len} amplitudes is not a power of two >= 2")));
        }
        let n_qubits = len.trailing_zeros() as usize;
        let (_, grid) = match freqs {
            Some(f) => build_custom_ladder(&f, oversample),
            None => build_ladder(n_qubits, oversample),
        }
        .map_err(err)?;
        let c = CoefficientVector::new(n_qubits, amplitudes).map_err(err)?;
        Ok(Self::wrap(synthesize(&c, &grid).map_err(err)?))
    }

    /// Product basis state from a bitstring such as `"0110"` (`1` = cos).
    #[staticmethod]
    #[pyo3(signature = (bits, oversample=2))]
    fn basis_state(bits: &str, oversample: usize) -> PyResult<Self> {
        let j = parse_bitstring(bits).map_err(err)?;
        let (_, grid) = build_ladder(bits.len(), oversample).map_err(err)?;
        let c = CoefficientVector::basis_state(bits.len(), j);
        Ok(Self::wrap(synthesize(&c, &grid).map_err(err)?))
    }

    #[getter]
    fn n_qubits(&self) -> usize {
        self.inner.n_qubits()
    }

    #[getter]
    fn freqs(&self) -> Vec<u64> {
        self.inner.grid().ladder().freqs().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.samples().len()
    }

    fn samples(&self) -> Vec<Complex64> {
        self.inner.samples().to_vec()
    }

    fn times(&self) -> Vec<f64> {
        let grid = self.inner.grid();
        (0..grid.len()).map(|k| grid.time(k)).collect()
    }

    fn amplitudes(&self) -> PyResult<Vec<Complex64>> {
        Ok(analyze(&self.inner).map_err(err)?.into_amps())
    }

    fn norm_sqr(&self) -> f64 {
        self.inner.norm_sqr()
    }

    fn h(&self, qubit: usize) -> PyResult<Self> {
        Ok(Self::wrap(apply_single(&self.inner, qubit, &Unitary2::hadamard()).map_err(err)?))
    }

    /// Applies a 2x2 unitary `[[u00, u01], [u10, u11]]`.
    fn gate(&self, qubit: usize, matrix: Vec<Vec<Complex64>>) -> PyResult<Self> {
        let u = unitary(matrix)?;
        Ok(Self::wrap(apply_single(&self.inner, qubit, &u).map_err(err)?))
    }

    fn cnot(&self, control: usize, target: usize) -> PyResult<Self> {
        Ok(Self::wrap(
            apply_controlled(&self.inner, control, target, &Unitary2::not()).map_err(err)?,
        ))
    }

    fn cr(&self, d: u32, control: usize, target: usize) -> PyResult<Self> {
        Ok(Self::wrap(
            apply_controlled(&self.inner, control, target, &Unitary2::rotation_rd(d)).map_err(err)?,
        ))
    }

    fn controlled(&self, controls: Vec<usize>, target: usize, matrix: Vec<Vec<Complex64>>) -> PyResult<Self> {
        let u = unitary(matrix)?;
        Ok(Self::wrap(
            apply_multi_controlled_with(&self.inner, &controls, target, &u, &GateOptions::default()).map_err(err)?,
        ))
    }

    /// `(p_sin, p_cos)`.
    fn probabilities(&self, qubit: usize) -> PyResult<(f64, f64)> {
        measurement::probabilities(&self.inner, qubit).map_err(err)
    }

    /// Returns the measurement record and the collapsed waveform.
    #[pyo3(signature = (qubit, mode="max_rule", seed=0))]
    fn measure<'py>(&self, py: Python<'py>, qubit: usize, mode: &str, seed: u64) -> PyResult<(Bound<'py, PyAny>, Self)> {
        let mode: MeasureMode = mode.parse().map_err(err)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (record, post) = measurement::measure(&self.inner, qubit, mode, &mut rng).map_err(err)?;
        Ok((to_py(py, &record)?, Self::wrap(post)))
    }

    /// Drops a measured qubit; `outcome` is 0 (sin) or 1 (cos).
    fn remove_qubit(&self, qubit: usize, outcome: u8) -> PyResult<Self> {
        let o = self::outcome(outcome)?;
        Ok(Self::wrap(measurement::remove_qubit(&self.inner, qubit, o).map_err(err)?))
    }

    fn histogram(&self, qubits: Vec<usize>) -> PyResult<Vec<f64>> {
        Ok(measurement::histogram(&self.inner, &qubits).map_err(err)?.probabilities)
    }

    /// Runs circuit text on this waveform.
    #[pyo3(signature = (text, seed=0, mode="max_rule"))]
    fn run_circuit<'py>(
        &self,
        py: Python<'py>,
        text: &str,
        seed: u64,
        mode: &str,
    ) -> PyResult<(Self, Bound<'py, PyAny>)> {
        let mode: MeasureMode = mode.parse().map_err(err)?;
        let circuit = parse_circuit_for(text, self.inner.n_qubits()).map_err(err)?;
        let (out, records) = run_circuit(&self.inner, &circuit, seed, mode).map_err(err)?;
        Ok((Self::wrap(out), to_py(py, &records)?))
    }

    fn __repr__(&self) -> String {
        format!(
            "Waveform(n_qubits={}, freqs={:?}, samples={})",
            self.inner.n_qubits(),
            self.inner.grid().ladder().freqs(),
            self.inner.samples().len()
        )
    }
}

/// Gram matrix of the product basis for `freqs` over `"full"` or `"half"` period.
#[pyfunction]
#[pyo3(signature = (freqs, interval="full", oversample=2))]
fn gram(freqs: Vec<u64>, interval: &str, oversample: usize) -> PyResult<Vec<Vec<f64>>> {
    let interval = match interval {
        "full" => Interval::Full,
        "half" => Interval::Half,
        other => return Err(QwaveError::new_err(format!("unknown interval {other:?}"))),
    };
    let (_, grid) = build_custom_ladder(&freqs, oversample).map_err(err)?;
    gram_matrix(&grid, interval).map_err(err)
}

/// Period finding; returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (n=21, a=2, mode="qft", seed=0, measure_mode="max_rule", measure_order="msb", oversample=2))]
#[allow(clippy::too_many_arguments)]
fn run_shor<'py>(
    py: Python<'py>,
    n: u64,
    a: u64,
    mode: &str,
    seed: u64,
    measure_mode: &str,
    measure_order: &str,
    oversample: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let mode: ShorMode = mode.parse().map_err(err)?;
    let mut cfg = ShorConfig::new(n, a, seed, mode);
    cfg.measure_mode = measure_mode.parse().map_err(err)?;
    cfg.measure_order = measure_order.parse::<MeasureOrder>().map_err(err)?;
    cfg.oversample = oversample;
    let report = shor::run(&cfg).map_err(err)?;
    to_py(py, &report)
}

#[derive(Serialize)]
struct Truncation {
    n_entangled: usize,
    qubit: usize,
    taus: Vec<f64>,
    delta: Vec<Option<f64>>,
    ratio: Vec<Option<f64>>,
    knee: Option<qwave::truncation::Knee>,
}

/// Delta and ratio sweeps for one entangled-qubit count.
#[pyfunction]
#[pyo3(signature = (n_entangled, qubit=1, points=64, oversample=2))]
fn truncation<'py>(
    py: Python<'py>,
    n_entangled: usize,
    qubit: usize,
    points: usize,
    oversample: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let s = TruncationStudy::new(n_entangled, qubit, oversample).map_err(err)?;
    let taus = default_taus(s.grid(), points);
    let d = s.delta_curve(&taus).map_err(err)?;
    let r = s.ratio_curve(&taus).map_err(err)?;
    let knee = s.knee(&d, KNEE_THRESHOLD).map_err(err)?;
    to_py(
        py,
        &Truncation {
            n_entangled,
            qubit,
            taus,
            delta: d.values,
            ratio: r.values,
            knee,
        },
    )
}

/// Random circuits on both backends; returns the differential report.
#[pyfunction]
#[pyo3(signature = (qubit_counts, circuits=100, depth=20, seed=7, tol=1e-8))]
fn verify<'py>(
    py: Python<'py>,
    qubit_counts: Vec<usize>,
    circuits: usize,
    depth: usize,
    seed: u64,
    tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let report = differential_suite(&qubit_counts, circuits, depth, seed, tol).map_err(err)?;
    to_py(py, &report)
}

#[pymodule]
fn qwave_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("QwaveError", m.py().get_type::<QwaveError>())?;
    m.add_class::<PyLadder>()?;
    m.add_class::<PyWaveform>()?;
    m.add_function(wrap_pyfunction!(gram, m)?)?;
    m.add_function(wrap_pyfunction!(run_shor, m)?)?;
    m.add_function(wrap_pyfunction!(truncation, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
