//! Circuits over labelled qubits: op list, QFT builder, text parser and runner.
//!
//! Qubit labels are the 1-based indices of the register the circuit was
//! written for. Removing a qubit shrinks the waveform, so labels are mapped to
//! live indices while the circuit runs.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gates::{
    apply_controlled_with, apply_single_with, GateOptions, Unitary2, UNITARY_TOL,
};
use crate::measurement::{measure, remove_qubit, MeasureMode, MeasurementRecord};
use crate::waveform::{qubit_bit, Basis, Waveform};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CircuitOp {
    Hadamard(usize),
    /// `diag(1, 1, 1, e^{iπ/2^d})` on (control, target).
    Phase { control: usize, target: usize, d: u32 },
    Cnot { control: usize, target: usize },
    Unitary { qubit: usize, gate: Unitary2 },
    Controlled { control: usize, target: usize, gate: Unitary2 },
    Measure(usize),
    Remove(usize),
}

impl CircuitOp {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Self::Hadamard(q) | Self::Measure(q) | Self::Remove(q) => vec![q],
            Self::Unitary { qubit, .. } => vec![qubit],
            Self::Phase { control, target, .. }
            | Self::Cnot { control, target }
            | Self::Controlled { control, target, .. } => vec![control, target],
        }
    }

    pub fn is_unitary(&self) -> bool {
        !matches!(self, Self::Measure(_) | Self::Remove(_))
    }

    /// `(control, target, gate)` for two-qubit ops, `(None, qubit, gate)` for single-qubit ones.
    pub fn as_gate(&self) -> Option<(Option<usize>, usize, Unitary2)> {
        match *self {
            Self::Hadamard(q) => Some((None, q, Unitary2::hadamard())),
            Self::Unitary { qubit, gate } => Some((None, qubit, gate)),
            Self::Phase { control, target, d } => Some((Some(control), target, Unitary2::rotation_rd(d))),
            Self::Cnot { control, target } => Some((Some(control), target, Unitary2::not())),
            Self::Controlled { control, target, gate } => Some((Some(control), target, gate)),
            Self::Measure(_) | Self::Remove(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub n_qubits: usize,
    pub ops: Vec<CircuitOp>,
    /// Labels in the order the result register is read, most significant first.
    pub output_order: Vec<usize>,
}

impl Circuit {
    pub fn new(n_qubits: usize, ops: Vec<CircuitOp>) -> Result<Self> {
        let c = Self {
            n_qubits,
            ops,
            output_order: (1..=n_qubits).collect(),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn empty(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            ops: Vec::new(),
            output_order: (1..=n_qubits).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut removed = vec![false; self.n_qubits + 1];
        let mut measured = vec![false; self.n_qubits + 1];
        for (i, op) in self.ops.iter().enumerate() {
            let qs = op.qubits();
            for &q in &qs {
                if q == 0 || q > self.n_qubits {
                    return Err(Error::Circuit(format!(
                        "op {i}: qubit {q} out of range 1..={}",
                        self.n_qubits
                    )));
                }
                if removed[q] {
                    return Err(Error::Circuit(format!("op {i}: qubit {q} was removed")));
                }
            }
            if qs.len() == 2 && qs[0] == qs[1] {
                return Err(Error::Circuit(format!("op {i}: control equals target {}", qs[0])));
            }
            match *op {
                CircuitOp::Unitary { gate, .. } | CircuitOp::Controlled { gate, .. }
                    if !gate.is_unitary(UNITARY_TOL) =>
                {
                    return Err(Error::Circuit(format!("op {i}: matrix is not unitary")));
                }
                CircuitOp::Measure(q) => measured[q] = true,
                CircuitOp::Remove(q) => {
                    if !measured[q] {
                        return Err(Error::Circuit(format!(
                            "op {i}: qubit {q} removed before it was measured"
                        )));
                    }
                    removed[q] = true;
                }
                _ => {
                    for &q in &qs {
                        measured[q] = false;
                    }
                }
            }
        }
        if removed.iter().filter(|&&r| r).count() >= self.n_qubits {
            return Err(Error::Circuit("circuit removes every qubit".into()));
        }
        Ok(())
    }

    pub fn gate_count(&self) -> usize {
        self.ops.iter().filter(|op| op.is_unitary()).count()
    }
}

/// QFT over `qubits` (first listed is the most significant input bit).
/// Each qubit gets a Hadamard followed by controlled `R_d` from every later
/// qubit at distance `d`; the output bit order is reversed by relabelling.
pub fn build_qft(qubits: &[usize]) -> Result<Circuit> {
    let n_qubits = qubits.iter().copied().max().unwrap_or(0);
    build_qft_on(n_qubits, qubits)
}

pub fn build_qft_on(n_qubits: usize, qubits: &[usize]) -> Result<Circuit> {
    if qubits.is_empty() {
        return Err(Error::Circuit("QFT needs at least one qubit".into()));
    }
    for (i, q) in qubits.iter().enumerate() {
        if qubits[..i].contains(q) {
            return Err(Error::Circuit(format!("qubit {q} listed twice")));
        }
    }
    let mut ops = Vec::with_capacity(qubits.len() * (qubits.len() + 1) / 2);
    for (k, &target) in qubits.iter().enumerate() {
        ops.push(CircuitOp::Hadamard(target));
        for (j, &control) in qubits.iter().enumerate().skip(k + 1) {
            ops.push(CircuitOp::Phase {
                control,
                target,
                d: (j - k) as u32,
            });
        }
    }
    let mut c = Circuit::new(n_qubits, ops)?;
    c.output_order = qubits.iter().rev().copied().collect();
    Ok(c)
}

/// Current index of each label, given which labels have been removed.
#[derive(Debug, Clone)]
pub(crate) struct LabelMap {
    removed: Vec<bool>,
}

impl LabelMap {
    pub(crate) fn new(n_qubits: usize) -> Self {
        Self {
            removed: vec![false; n_qubits + 1],
        }
    }

    pub(crate) fn live(&self, label: usize) -> Result<usize> {
        if label == 0 || label >= self.removed.len() {
            return Err(Error::Circuit(format!("qubit {label} out of range")));
        }
        if self.removed[label] {
            return Err(Error::Circuit(format!("qubit {label} was removed")));
        }
        Ok(label - self.removed[..label].iter().filter(|&&r| r).count())
    }

    pub(crate) fn remove(&mut self, label: usize) -> Result<usize> {
        let idx = self.live(label)?;
        self.removed[label] = true;
        Ok(idx)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunOptions {
    pub mode: MeasureMode,
    pub gates: GateOptions,
}

pub fn run_circuit(
    psi: &Waveform,
    circuit: &Circuit,
    seed: u64,
    mode: MeasureMode,
) -> Result<(Waveform, Vec<MeasurementRecord>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let opts = RunOptions {
        mode,
        ..Default::default()
    };
    run_circuit_with(psi, circuit, &mut rng, &opts)
}

/// Applies the ops in order. Measurement records carry circuit labels.
pub fn run_circuit_with(
    psi: &Waveform,
    circuit: &Circuit,
    rng: &mut ChaCha8Rng,
    opts: &RunOptions,
) -> Result<(Waveform, Vec<MeasurementRecord>)> {
    if psi.n_qubits() != circuit.n_qubits {
        return Err(Error::Circuit(format!(
            "circuit is for {} qubits, state has {}",
            circuit.n_qubits,
            psi.n_qubits()
        )));
    }
    circuit.validate()?;
    let mut labels = LabelMap::new(circuit.n_qubits);
    let mut last: Vec<Option<Basis>> = vec![None; circuit.n_qubits + 1];
    let mut records = Vec::new();
    let mut state = psi.clone();
    for op in &circuit.ops {
        state = match *op {
            CircuitOp::Measure(q) => {
                let (mut rec, post) = measure(&state, labels.live(q)?, opts.mode, rng)?;
                rec.qubit = q;
                last[q] = Some(rec.outcome);
                records.push(rec);
                post
            }
            CircuitOp::Remove(q) => {
                let outcome = last[q]
                    .ok_or_else(|| Error::Circuit(format!("qubit {q} removed before it was measured")))?;
                remove_qubit(&state, labels.remove(q)?, outcome)?
            }
            _ => {
                let (control, target, gate) = op.as_gate().expect("unitary op");
                for q in op.qubits() {
                    last[q] = None;
                }
                let t = labels.live(target)?;
                match control {
                    None => apply_single_with(&state, t, &gate, &opts.gates)?,
                    Some(c) => apply_controlled_with(&state, labels.live(c)?, t, &gate, &opts.gates)?,
                }
            }
        };
    }
    Ok((state, records))
}

/// Amplitudes re-indexed so that the bits of the new index read the labels in
/// `order`, most significant first. `order` must be a permutation of all labels.
pub fn reorder_amplitudes(amps: &[Complex64], n_qubits: usize, order: &[usize]) -> Result<Vec<Complex64>> {
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (1..=n_qubits).collect::<Vec<_>>() || amps.len() != 1 << n_qubits {
        return Err(Error::Shape(format!(
            "order {order:?} is not a permutation of 1..={n_qubits}"
        )));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
    for (j, &a) in amps.iter().enumerate() {
        let v = order
            .iter()
            .fold(0usize, |acc, &q| (acc << 1) | qubit_bit(j, q, n_qubits) as usize);
        out[v] = a;
    }
    Ok(out)
}

/// Parses circuit text; the qubit count is the largest index used.
pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let (ops, max_q) = parse_ops(text, None)?;
    Circuit::new(max_q.max(1), ops)
}

/// Parses circuit text for a register of `n_qubits`; larger indices are errors.
pub fn parse_circuit_for(text: &str, n_qubits: usize) -> Result<Circuit> {
    let (ops, _) = parse_ops(text, Some(n_qubits))?;
    Circuit::new(n_qubits, ops)
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokens(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices().chain(std::iter::once((line.len(), ' '))) {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(i),
            (true, Some(s)) => {
                out.push(Token {
                    text: &line[s..i],
                    column: line[..s].chars().count() + 1,
                });
                start = None;
            }
            _ => {}
        }
    }
    out
}

fn parse_ops(text: &str, n_qubits: Option<usize>) -> Result<(Vec<CircuitOp>, usize)> {
    let mut ops = Vec::new();
    let mut max_q = 0;
    let mut removed: Vec<usize> = Vec::new();
    let mut measured: Vec<usize> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let line = raw.split('#').next().unwrap_or("");
        let toks = tokens(line);
        let Some(head) = toks.first() else { continue };
        let err = |column: usize, message: String| Error::Parse {
            line: line_no,
            column,
            message,
        };
        let qubit = |t: &Token| -> Result<usize> {
            let q: usize = t
                .text
                .parse()
                .map_err(|_| err(t.column, format!("expected a qubit index, found {:?}", t.text)))?;
            if q == 0 {
                return Err(err(t.column, "qubit indices start at 1".into()));
            }
            if let Some(n) = n_qubits {
                if q > n {
                    return Err(err(t.column, format!("qubit {q} out of range 1..={n}")));
                }
            }
            if removed.contains(&q) {
                return Err(err(t.column, format!("qubit {q} was removed")));
            }
            Ok(q)
        };
        let real = |t: &Token| -> Result<f64> {
            t.text
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(t.column, format!("expected a number, found {:?}", t.text)))
        };
        let mnemonic = head.text.to_ascii_uppercase();
        let arity = match mnemonic.as_str() {
            "H" | "MEASURE" | "REMOVE" => 1,
            "CNOT" => 2,
            "CR" => 3,
            "U" => 9,
            _ => return Err(err(head.column, format!("unknown mnemonic {:?}", head.text))),
        };
        let args = &toks[1..];
        if args.len() != arity {
            let column = args.get(arity).map_or(line.trim_end().chars().count() + 1, |t| t.column);
            return Err(err(
                column,
                format!("{mnemonic} takes {arity} argument(s), found {}", args.len()),
            ));
        }
        let distinct = |a: usize, b: usize, t: &Token| -> Result<()> {
            if a == b {
                Err(err(t.column, format!("control and target are both qubit {a}")))
            } else {
                Ok(())
            }
        };
        let op = match mnemonic.as_str() {
            "H" => CircuitOp::Hadamard(qubit(&args[0])?),
            "MEASURE" => CircuitOp::Measure(qubit(&args[0])?),
            "REMOVE" => {
                let q = qubit(&args[0])?;
                if !measured.contains(&q) {
                    return Err(err(args[0].column, format!("qubit {q} removed before it was measured")));
                }
                CircuitOp::Remove(q)
            }
            "CNOT" => {
                let (c, t) = (qubit(&args[0])?, qubit(&args[1])?);
                distinct(c, t, &args[1])?;
                CircuitOp::Cnot { control: c, target: t }
            }
            "CR" => {
                let d: u32 = args[0].text.parse().map_err(|_| {
                    err(args[0].column, format!("expected a rotation order, found {:?}", args[0].text))
                })?;
                if d > 62 {
                    return Err(err(args[0].column, format!("rotation order {d} too large")));
                }
                let (c, t) = (qubit(&args[1])?, qubit(&args[2])?);
                distinct(c, t, &args[2])?;
                CircuitOp::Phase { control: c, target: t, d }
            }
            _ => {
                let q = qubit(&args[0])?;
                let mut z = [Complex64::new(0.0, 0.0); 4];
                for (k, zk) in z.iter_mut().enumerate() {
                    *zk = Complex64::new(real(&args[1 + 2 * k])?, real(&args[2 + 2 * k])?);
                }
                let gate = Unitary2::new(z[0], z[1], z[2], z[3])
                    .map_err(|_| err(args[1].column, "matrix is not unitary".into()))?;
                CircuitOp::Unitary { qubit: q, gate }
            }
        };
        for q in op.qubits() {
            max_q = max_q.max(q);
            match op {
                CircuitOp::Measure(_) => measured.push(q),
                CircuitOp::Remove(_) => removed.push(q),
                _ => measured.retain(|&m| m != q),
            }
        }
        ops.push(op);
    }
    Ok((ops, max_q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{analyze, synthesize, CoefficientVector};
    use crate::ladder::build_ladder;
    use std::f64::consts::PI;

    fn uniform(n_qubits: usize) -> Waveform {
        let a = Complex64::new((1.0 / (1u64 << n_qubits) as f64).sqrt(), 0.0);
        let c = CoefficientVector::new(n_qubits, vec![a; 1 << n_qubits]).unwrap();
        let (_, g) = build_ladder(n_qubits, 2).unwrap();
        synthesize(&c, &g).unwrap()
    }

    fn basis(n_qubits: usize, j: usize) -> Waveform {
        let (_, g) = build_ladder(n_qubits, 2).unwrap();
        synthesize(&CoefficientVector::basis_state(n_qubits, j), &g).unwrap()
    }

    #[test]
    fn parse_examples() {
        let c = parse_circuit("H 1\nCNOT 1 2").unwrap();
        assert_eq!(c.n_qubits, 2);
        assert_eq!(
            c.ops,
            vec![CircuitOp::Hadamard(1), CircuitOp::Cnot { control: 1, target: 2 }]
        );
        let c = parse_circuit("CR 2 1 3").unwrap();
        assert_eq!(c.ops, vec![CircuitOp::Phase { control: 1, target: 3, d: 2 }]);
        let (_, _, g) = c.ops[0].as_gate().unwrap();
        assert!((g.u11 - Complex64::from_polar(1.0, PI / 4.0)).norm() < 1e-15);

        let text = "# header\n\nH 2   # trailing\nU 1 0 0 1 0 1 0 0 0\nMEASURE 1\nREMOVE 1\n";
        let c = parse_circuit(text).unwrap();
        assert_eq!(c.ops.len(), 4);
        assert!(matches!(c.ops[1], CircuitOp::Unitary { qubit: 1, .. }));
    }

    #[test]
    fn parse_errors_are_positioned() {
        let e = parse_circuit("HADAMARD 1").unwrap_err();
        assert_eq!(
            e,
            Error::Parse {
                line: 1,
                column: 1,
                message: "unknown mnemonic \"HADAMARD\"".into()
            }
        );
        let Error::Parse { line, column, .. } = parse_circuit("H 1\n  CNOT 1").unwrap_err() else {
            panic!()
        };
        assert_eq!((line, column), (2, 9));
        let Error::Parse { line, column, .. } = parse_circuit("H 1\nH 0").unwrap_err() else {
            panic!()
        };
        assert_eq!((line, column), (2, 3));
        assert!(matches!(parse_circuit_for("H 4", 3), Err(Error::Parse { line: 1, column: 3, .. })));
        assert!(matches!(parse_circuit("CNOT 2 2"), Err(Error::Parse { .. })));
        assert!(matches!(parse_circuit("U 1 2 0 0 0 0 0 2 0"), Err(Error::Parse { .. })));
        assert!(matches!(parse_circuit("H x"), Err(Error::Parse { column: 3, .. })));
        assert!(matches!(parse_circuit("REMOVE 1"), Err(Error::Parse { .. })));
        assert!(matches!(
            parse_circuit("H 2\nMEASURE 1\nREMOVE 1\nH 1"),
            Err(Error::Parse { line: 4, .. })
        ));
    }

    #[test]
    fn validation() {
        assert!(Circuit::new(2, vec![CircuitOp::Hadamard(3)]).is_err());
        assert!(Circuit::new(2, vec![CircuitOp::Cnot { control: 1, target: 1 }]).is_err());
        assert!(Circuit::new(2, vec![CircuitOp::Measure(1), CircuitOp::Remove(1), CircuitOp::Hadamard(1)]).is_err());
        assert!(Circuit::new(2, vec![CircuitOp::Measure(1), CircuitOp::Hadamard(1), CircuitOp::Remove(1)]).is_err());
        assert!(Circuit::new(1, vec![CircuitOp::Measure(1), CircuitOp::Remove(1)]).is_err());
    }

    #[test]
    fn qft_structure() {
        let c = build_qft(&[1]).unwrap();
        assert_eq!(c.ops, vec![CircuitOp::Hadamard(1)]);
        let c = build_qft(&[1, 2, 3]).unwrap();
        assert_eq!(
            c.ops,
            vec![
                CircuitOp::Hadamard(1),
                CircuitOp::Phase { control: 2, target: 1, d: 1 },
                CircuitOp::Phase { control: 3, target: 1, d: 2 },
                CircuitOp::Hadamard(2),
                CircuitOp::Phase { control: 3, target: 2, d: 1 },
                CircuitOp::Hadamard(3),
            ]
        );
        assert_eq!(c.output_order, vec![3, 2, 1]);
        let c = build_qft(&(1..=9).collect::<Vec<_>>()).unwrap();
        let h = c.ops.iter().filter(|o| matches!(o, CircuitOp::Hadamard(_))).count();
        assert_eq!((h, c.ops.len() - h), (9, 36));
        assert!(build_qft(&[]).is_err());
    }

    #[test]
    fn qft_of_uniform_is_delta() {
        let psi = uniform(4);
        let qft = build_qft(&[1, 2, 3, 4]).unwrap();
        let (out, _) = run_circuit(&psi, &qft, 0, MeasureMode::MaxRule).unwrap();
        let a = analyze(&out).unwrap();
        assert!((a.amps()[0] - 1.0).norm() < 1e-10);
        assert!(a.amps()[1..].iter().all(|z| z.norm() < 1e-8));
    }

    #[test]
    fn qft_matches_dft() {
        let n = 3;
        let dim = 1 << n;
        let qft = build_qft(&[1, 2, 3]).unwrap();
        for x in 0..dim {
            let (out, _) = run_circuit(&basis(n, x), &qft, 0, MeasureMode::MaxRule).unwrap();
            let amps = reorder_amplitudes(analyze(&out).unwrap().amps(), n, &qft.output_order).unwrap();
            for (y, a) in amps.iter().enumerate() {
                let expect = Complex64::from_polar(
                    1.0 / (dim as f64).sqrt(),
                    2.0 * PI * (x * y) as f64 / dim as f64,
                );
                assert!((a - expect).norm() < 1e-10, "x={x} y={y}");
            }
        }
    }

    #[test]
    fn run_basics() {
        let psi = uniform(3);
        let (out, recs) = run_circuit(&psi, &Circuit::empty(3), 1, MeasureMode::MaxRule).unwrap();
        assert!(out.max_abs_diff(&psi).unwrap() < 1e-15 && recs.is_empty());

        let psi = basis(3, 0b010);
        let hh = parse_circuit_for("H 1\nH 1", 3).unwrap();
        let (out, _) = run_circuit(&psi, &hh, 1, MeasureMode::MaxRule).unwrap();
        assert!(out.max_abs_diff(&psi).unwrap() < 1e-10);

        assert!(run_circuit(&psi, &Circuit::empty(2), 1, MeasureMode::MaxRule).is_err());
    }

    #[test]
    fn measure_remove_relabels() {
        // |1⟩ on qubit 1, Bell pair on 2,3: after measuring and removing 2, qubit 3 lives at index 2
        let psi = basis(3, 0b100);
        let text = "H 2\nCNOT 2 3\nMEASURE 2\nREMOVE 2\nH 3\nH 3\nMEASURE 3\nMEASURE 1";
        let c = parse_circuit(text).unwrap();
        let (out, recs) = run_circuit(&psi, &c, 4, MeasureMode::MaxRule).unwrap();
        assert_eq!(out.n_qubits(), 2);
        assert_eq!(recs.iter().map(|r| r.qubit).collect::<Vec<_>>(), vec![2, 3, 1]);
        assert_eq!(recs[0].outcome, recs[1].outcome);
        assert_eq!(recs[2].outcome, Basis::Cos);
        assert!((recs[1].p_cos.max(recs[1].p_sin) - 1.0).abs() < 1e-10);

        let again = run_circuit(&psi, &c, 4, MeasureMode::MaxRule).unwrap();
        assert_eq!(again.1, recs);
    }

    #[test]
    fn label_map() {
        let mut m = LabelMap::new(5);
        assert_eq!(m.remove(2).unwrap(), 2);
        assert_eq!(m.live(5).unwrap(), 4);
        assert_eq!(m.remove(4).unwrap(), 3);
        assert_eq!(m.live(5).unwrap(), 3);
        assert_eq!(m.live(1).unwrap(), 1);
        assert!(m.live(2).is_err());
    }
}
