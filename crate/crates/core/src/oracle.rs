//! Dense state-vector reference simulator.
//!
//! Amplitudes use the same indexing as [`CoefficientVector`]: bit `N - n` of
//! the index is qubit `n`, with 0 for sin and 1 for cos.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::basis::{analyze, synthesize, CoefficientVector};
use crate::circuit::{run_circuit_with, Circuit, CircuitOp, LabelMap, RunOptions};
use crate::error::{Error, Result};
use crate::gates::Unitary2;
use crate::ladder::build_ladder;
use crate::measurement::slice_conditional;
use crate::waveform::{Basis, Waveform};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    pub n_qubits: usize,
    pub amps: Vec<Complex64>,
}

impl DenseState {
    pub fn new(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1 << n_qubits {
            return Err(Error::Shape(format!(
                "expected {} amplitudes, got {}",
                1usize << n_qubits,
                amps.len()
            )));
        }
        Ok(Self { n_qubits, amps })
    }

    pub fn basis_state(n_qubits: usize, j: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[j] = Complex64::new(1.0, 0.0);
        Self { n_qubits, amps }
    }

    /// Normalized state with independent uniform real and imaginary parts.
    pub fn random<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Self {
        let amps: Vec<Complex64> = (0..1 << n_qubits)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        Self {
            n_qubits,
            amps: amps.into_iter().map(|a| a / norm).collect(),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn to_coefficients(&self) -> CoefficientVector {
        CoefficientVector::new(self.n_qubits, self.amps.clone()).expect("consistent length")
    }

    pub fn from_coefficients(c: &CoefficientVector) -> Self {
        Self {
            n_qubits: c.n_qubits(),
            amps: c.amps().to_vec(),
        }
    }

    fn check(&self, q: usize) -> Result<usize> {
        if q == 0 || q > self.n_qubits {
            return Err(Error::QubitIndex {
                qubit: q,
                n_qubits: self.n_qubits,
            });
        }
        Ok(self.n_qubits - q)
    }

    pub fn apply_single(&self, q: usize, u: &Unitary2) -> Result<Self> {
        let bit = 1usize << self.check(q)?;
        let mut out = self.amps.clone();
        for j in (0..self.amps.len()).filter(|j| j & bit == 0) {
            let (a0, a1) = (self.amps[j], self.amps[j | bit]);
            out[j] = u.u00 * a0 + u.u01 * a1;
            out[j | bit] = u.u10 * a0 + u.u11 * a1;
        }
        Ok(Self {
            n_qubits: self.n_qubits,
            amps: out,
        })
    }

    pub fn apply_controlled(&self, controls: &[usize], q: usize, u: &Unitary2) -> Result<Self> {
        let bit = 1usize << self.check(q)?;
        let mut mask = 0usize;
        for &c in controls {
            let cb = 1usize << self.check(c)?;
            if cb == bit || mask & cb != 0 {
                return Err(Error::Gate(format!("overlapping qubits {controls:?} / {q}")));
            }
            mask |= cb;
        }
        let mut out = self.amps.clone();
        for j in (0..self.amps.len()).filter(|j| j & bit == 0 && j & mask == mask) {
            let (a0, a1) = (self.amps[j], self.amps[j | bit]);
            out[j] = u.u00 * a0 + u.u01 * a1;
            out[j | bit] = u.u10 * a0 + u.u11 * a1;
        }
        Ok(Self {
            n_qubits: self.n_qubits,
            amps: out,
        })
    }

    /// `(p_sin, p_cos)` for qubit `q`.
    pub fn probabilities(&self, q: usize) -> Result<(f64, f64)> {
        let bit = 1usize << self.check(q)?;
        let (mut p0, mut p1) = (0.0, 0.0);
        for (j, a) in self.amps.iter().enumerate() {
            if j & bit == 0 {
                p0 += a.norm_sqr();
            } else {
                p1 += a.norm_sqr();
            }
        }
        let total = p0 + p1;
        if !(total > 0.0) {
            return Err(Error::MeasurementOnNull(q));
        }
        Ok((p0 / total, p1 / total))
    }

    /// Projects qubit `q` onto `outcome` and renormalizes.
    pub fn collapse(&self, q: usize, outcome: Basis) -> Result<Self> {
        let bit = 1usize << self.check(q)?;
        let keep = if outcome.bit() { bit } else { 0 };
        let mut amps: Vec<Complex64> = self
            .amps
            .iter()
            .enumerate()
            .map(|(j, &a)| if j & bit == keep { a } else { Complex64::new(0.0, 0.0) })
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::MeasurementOnNull(q));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Ok(Self {
            n_qubits: self.n_qubits,
            amps,
        })
    }

    /// Conditional state of the other qubits, given qubit `q` reads `outcome`.
    pub fn remove(&self, q: usize, outcome: Basis) -> Result<Self> {
        self.check(q)?;
        if self.n_qubits < 2 {
            return Err(Error::Protocol("cannot remove the last qubit".into()));
        }
        Ok(Self::from_coefficients(&slice_conditional(
            &self.to_coefficients(),
            q,
            outcome,
        )))
    }

    pub fn max_abs_diff(&self, other: &[Complex64]) -> Result<f64> {
        if other.len() != self.amps.len() {
            return Err(Error::Shape(format!(
                "{} vs {} amplitudes",
                self.amps.len(),
                other.len()
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

/// Textbook action of a unitary op; indices are positions in `state`.
pub fn dense_apply(state: &DenseState, op: &CircuitOp) -> Result<DenseState> {
    match op.as_gate() {
        Some((None, q, u)) => state.apply_single(q, &u),
        Some((Some(c), q, u)) => state.apply_controlled(&[c], q, &u),
        None => Err(Error::Circuit(format!(
            "{op:?} needs an outcome; use dense_run"
        ))),
    }
}

/// Runs a circuit densely, taking measurement outcomes from `outcomes` in order.
pub fn dense_run(state: &DenseState, circuit: &Circuit, outcomes: &[Basis]) -> Result<DenseState> {
    if state.n_qubits != circuit.n_qubits {
        return Err(Error::Circuit(format!(
            "circuit is for {} qubits, state has {}",
            circuit.n_qubits, state.n_qubits
        )));
    }
    let mut labels = LabelMap::new(circuit.n_qubits);
    let mut last: Vec<Option<Basis>> = vec![None; circuit.n_qubits + 1];
    let mut outcomes = outcomes.iter();
    let mut s = state.clone();
    for op in &circuit.ops {
        s = match *op {
            CircuitOp::Measure(q) => {
                let o = *outcomes
                    .next()
                    .ok_or_else(|| Error::Circuit("ran out of measurement outcomes".into()))?;
                last[q] = Some(o);
                s.collapse(labels.live(q)?, o)?
            }
            CircuitOp::Remove(q) => {
                let o = last[q].ok_or_else(|| Error::Circuit(format!("qubit {q} not measured")))?;
                s.remove(labels.remove(q)?, o)?
            }
            _ => {
                let (control, target, u) = op.as_gate().expect("unitary op");
                for q in op.qubits() {
                    last[q] = None;
                }
                let t = labels.live(target)?;
                match control {
                    None => s.apply_single(t, &u)?,
                    Some(c) => s.apply_controlled(&[labels.live(c)?], t, &u)?,
                }
            }
        };
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub max_diff: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Compares `analyze(psi)` with the dense amplitudes.
pub fn assert_equivalent(psi: &Waveform, state: &DenseState, tol: f64) -> Result<EquivalenceReport> {
    if psi.n_qubits() != state.n_qubits {
        return Err(Error::Shape(format!(
            "waveform has {} qubits, dense state {}",
            psi.n_qubits(),
            state.n_qubits
        )));
    }
    let c = analyze(psi)?;
    let max_diff = state.max_abs_diff(c.amps())?;
    Ok(EquivalenceReport {
        max_diff,
        tol,
        pass: max_diff < tol,
    })
}

/// Random circuit of Hadamards, controlled `R_d` and CNOTs.
pub fn random_circuit<R: Rng + ?Sized>(n_qubits: usize, depth: usize, rng: &mut R) -> Circuit {
    let mut ops = Vec::with_capacity(depth);
    for _ in 0..depth {
        let kind = if n_qubits < 2 { 0 } else { rng.random_range(0..3) };
        let q = rng.random_range(1..=n_qubits);
        let op = match kind {
            0 => CircuitOp::Hadamard(q),
            _ => {
                let mut c = rng.random_range(1..n_qubits);
                if c >= q {
                    c += 1;
                }
                if kind == 1 {
                    CircuitOp::Phase {
                        control: c,
                        target: q,
                        d: rng.random_range(1..=n_qubits as u32),
                    }
                } else {
                    CircuitOp::Cnot { control: c, target: q }
                }
            }
        };
        ops.push(op);
    }
    Circuit::new(n_qubits, ops).expect("generated circuit is valid")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DifferentialCase {
    pub index: usize,
    pub n_qubits: usize,
    pub depth: usize,
    pub max_diff: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DifferentialReport {
    pub seed: u64,
    pub tol: f64,
    pub circuits: usize,
    pub passed: usize,
    pub max_diff: f64,
    pub cases: Vec<DifferentialCase>,
}

impl DifferentialReport {
    pub fn pass(&self) -> bool {
        self.passed == self.circuits
    }
}

/// Runs `circuits` random circuits (depth 1..=`max_depth`) on random states,
/// cycling through `qubit_counts`, on both backends.
pub fn differential_suite(
    qubit_counts: &[usize],
    circuits: usize,
    max_depth: usize,
    seed: u64,
    tol: f64,
) -> Result<DifferentialReport> {
    if qubit_counts.is_empty() || max_depth == 0 {
        return Err(Error::Domain("need at least one qubit count and depth >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::with_capacity(circuits);
    for index in 0..circuits {
        let n_qubits = qubit_counts[index % qubit_counts.len()];
        let depth = rng.random_range(1..=max_depth);
        let circuit = random_circuit(n_qubits, depth, &mut rng);
        let dense = DenseState::random(n_qubits, &mut rng);
        let (_, grid) = build_ladder(n_qubits, 2)?;
        let psi = synthesize(&dense.to_coefficients(), &grid)?;
        let (out, _) = run_circuit_with(&psi, &circuit, &mut rng, &RunOptions::default())?;
        let expect = dense_run(&dense, &circuit, &[])?;
        let report = assert_equivalent(&out, &expect, tol)?;
        cases.push(DifferentialCase {
            index,
            n_qubits,
            depth,
            max_diff: report.max_diff,
            pass: report.pass,
        });
    }
    Ok(DifferentialReport {
        seed,
        tol,
        circuits,
        passed: cases.iter().filter(|c| c.pass).count(),
        max_diff: cases.iter().map(|c| c.max_diff).fold(0.0, f64::max),
        cases,
    })
}
