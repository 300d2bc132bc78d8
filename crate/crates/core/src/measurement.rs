//! Per-qubit measurement, collapse, qubit removal and register histograms.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::addressing::{address, AddressMethod};
use crate::basis::{analyze, synthesize, CoefficientVector};
use crate::error::{Error, Result};
use crate::ladder::{gcd, FrequencyLadder, SampleGrid};
use crate::waveform::{bitstring, inner_product, qubit_bit, Basis, Interval, Waveform};

/// Probabilities closer than this count as a tie under the max rule.
pub const TIE_TOL: f64 = 1e-9;
/// Largest residual weight of the discarded branch accepted by [`remove_qubit`].
pub const REMOVE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureMode {
    /// Outcome with the higher probability; ties broken by the random source.
    #[default]
    MaxRule,
    /// Outcome sampled from the probabilities.
    Born,
}

impl std::str::FromStr for MeasureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max_rule" | "max-rule" | "max" => Ok(Self::MaxRule),
            "born" => Ok(Self::Born),
            _ => Err(Error::Domain(format!("unknown measure mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub qubit: usize,
    pub p_sin: f64,
    pub p_cos: f64,
    pub outcome: Basis,
    pub mode: MeasureMode,
}

/// Order in which the qubits of a register are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureOrder {
    #[default]
    MsbFirst,
    LsbFirst,
}

impl std::str::FromStr for MeasureOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "msb" | "msb_first" | "msb-first" => Ok(Self::MsbFirst),
            "lsb" | "lsb_first" | "lsb-first" => Ok(Self::LsbFirst),
            _ => Err(Error::Domain(format!("unknown measure order {s:?}"))),
        }
    }
}

fn branch_weights(psi: &Waveform, n: usize) -> Result<(Waveform, Waveform, f64, f64)> {
    let pair = address(psi, n, AddressMethod::Fast)?;
    let ws = inner_product(&pair.f_s, &pair.f_s, Interval::Half)?.re;
    let wc = inner_product(&pair.f_c, &pair.f_c, Interval::Half)?.re;
    Ok((pair.f_s, pair.f_c, ws.max(0.0), wc.max(0.0)))
}

/// `(p_sin, p_cos)` for qubit `n`, from the half-period norms of the addressed branches.
pub fn probabilities(psi: &Waveform, n: usize) -> Result<(f64, f64)> {
    let (_, _, ws, wc) = branch_weights(psi, n)?;
    normalize_pair(n, ws, wc)
}

fn normalize_pair(n: usize, ws: f64, wc: f64) -> Result<(f64, f64)> {
    let total = ws + wc;
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::MeasurementOnNull(n));
    }
    Ok((ws / total, wc / total))
}

/// Measures qubit `n` and collapses the state onto `F_outcome · h_outcome(ω_n t)`, renormalized.
pub fn measure<R: Rng + ?Sized>(
    psi: &Waveform,
    n: usize,
    mode: MeasureMode,
    rng: &mut R,
) -> Result<(MeasurementRecord, Waveform)> {
    let (f_s, f_c, ws, wc) = branch_weights(psi, n)?;
    let (p_sin, p_cos) = normalize_pair(n, ws, wc)?;
    let outcome = match mode {
        MeasureMode::MaxRule if (p_sin - p_cos).abs() <= TIE_TOL => Basis::from_bit(rng.random_bool(0.5)),
        MeasureMode::MaxRule => Basis::from_bit(p_cos > p_sin),
        MeasureMode::Born => Basis::from_bit(rng.random::<f64>() >= p_sin),
    };
    let (cos, sin) = psi.grid().qubit_tables(n);
    let post = match outcome {
        Basis::Sin => f_s.mul_real(&sin),
        Basis::Cos => f_c.mul_real(&cos),
    };
    let post = post.normalized().map_err(|_| Error::MeasurementOnNull(n))?;
    let record = MeasurementRecord {
        qubit: n,
        p_sin,
        p_cos,
        outcome,
        mode,
    };
    Ok((record, post))
}

/// Measures `qubits` one after another in the given order.
pub fn measure_sequence<R: Rng + ?Sized>(
    psi: &Waveform,
    qubits: &[usize],
    mode: MeasureMode,
    rng: &mut R,
) -> Result<(Vec<MeasurementRecord>, Waveform)> {
    let mut state = psi.clone();
    let mut records = Vec::with_capacity(qubits.len());
    for &q in qubits {
        let (rec, next) = measure(&state, q, mode, rng)?;
        records.push(rec);
        state = next;
    }
    Ok((records, state))
}

/// Drops a collapsed qubit and re-expresses the remaining branch on the
/// reduced ladder, with frequencies divided by their gcd and a rebuilt grid.
/// Qubits above `n` shift down by one index.
pub fn remove_qubit(psi: &Waveform, n: usize, outcome: Basis) -> Result<Waveform> {
    let grid = psi.grid();
    let ladder = grid.ladder();
    ladder.check_qubit(n)?;
    let n_qubits = ladder.n_qubits();
    if n_qubits < 2 {
        return Err(Error::Protocol("cannot remove the last qubit".into()));
    }
    let (_, _, ws, wc) = branch_weights(psi, n)?;
    let (kept, dropped) = match outcome {
        Basis::Sin => (ws, wc),
        Basis::Cos => (wc, ws),
    };
    if !(kept + dropped > 0.0) {
        return Err(Error::MeasurementOnNull(n));
    }
    if dropped / (kept + dropped) > REMOVE_TOL {
        return Err(Error::Protocol(format!(
            "qubit {n} is not collapsed to {outcome:?} (other branch weight {:.3e})",
            dropped / (kept + dropped)
        )));
    }

    let coeffs = analyze(psi)?;
    let sub = slice_conditional(&coeffs, n, outcome);

    let rest: Vec<u64> = ladder
        .freqs()
        .iter()
        .enumerate()
        .filter(|&(i, _)| i + 1 != n)
        .map(|(_, &f)| f)
        .collect();
    let g = rest.iter().copied().fold(0, gcd);
    let reduced = FrequencyLadder::with_unit(rest.iter().map(|f| f / g).collect(), ladder.unit() * g)?;
    let new_grid = SampleGrid::new(reduced, grid.oversample())?;
    synthesize(&sub, &new_grid)
}

/// Amplitudes with qubit `n` fixed to `outcome`, as an `(N-1)`-qubit vector.
pub fn slice_conditional(c: &CoefficientVector, n: usize, outcome: Basis) -> CoefficientVector {
    let n_qubits = c.n_qubits();
    let pos = n_qubits - n;
    let low = (1usize << pos) - 1;
    let amps = (0..1usize << (n_qubits - 1))
        .map(|r| {
            let j = ((r & !low) << 1) | ((outcome.bit() as usize) << pos) | (r & low);
            c.amps()[j]
        })
        .collect::<Vec<Complex64>>();
    CoefficientVector::new(n_qubits - 1, amps).expect("slice has matching length")
}

/// Marginal distribution over `qubits`; the first listed qubit is the most significant bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub qubits: Vec<usize>,
    pub probabilities: Vec<f64>,
}

impl Histogram {
    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    pub fn argmax(&self) -> usize {
        self.probabilities
            .iter()
            .enumerate()
            .fold((0, f64::MIN), |best, (i, &p)| if p > best.1 { (i, p) } else { best })
            .0
    }

    /// Outcome indices sorted by decreasing probability (ties by index).
    pub fn ranked(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| {
            self.probabilities[b]
                .total_cmp(&self.probabilities[a])
                .then(a.cmp(&b))
        });
        idx
    }

    /// CSV with columns `bitstring,value,probability`.
    pub fn to_csv(&self) -> String {
        let width = self.qubits.len();
        let mut out = String::from("bitstring,value,probability\n");
        for (v, p) in self.probabilities.iter().enumerate() {
            writeln!(out, "{},{v},{p:.17e}", bitstring(v, width)).unwrap();
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("histogram serializes")
    }
}

pub fn histogram(psi: &Waveform, qubits: &[usize]) -> Result<Histogram> {
    let c = analyze(psi)?;
    histogram_from_coefficients(&c, qubits)
}

pub fn histogram_from_coefficients(c: &CoefficientVector, qubits: &[usize]) -> Result<Histogram> {
    let n_qubits = c.n_qubits();
    for (i, &q) in qubits.iter().enumerate() {
        if q == 0 || q > n_qubits {
            return Err(Error::QubitIndex { qubit: q, n_qubits });
        }
        if qubits[..i].contains(&q) {
            return Err(Error::Domain(format!("qubit {q} listed twice")));
        }
    }
    let mut probs = vec![0.0; 1 << qubits.len()];
    for (j, a) in c.amps().iter().enumerate() {
        let v = qubits
            .iter()
            .fold(0usize, |acc, &q| (acc << 1) | qubit_bit(j, q, n_qubits) as usize);
        probs[v] += a.norm_sqr();
    }
    let total: f64 = probs.iter().sum();
    if !(total > 0.0) {
        return Err(Error::MeasurementOnNull(qubits.first().copied().unwrap_or(0)));
    }
    probs.iter_mut().for_each(|p| *p /= total);
    Ok(Histogram {
        qubits: qubits.to_vec(),
        probabilities: probs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ladder::build_ladder;
    use crate::waveform::product_basis_waveform;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn state(n_qubits: usize, amps: &[(usize, f64)]) -> Waveform {
        let mut c = CoefficientVector::zeros(n_qubits);
        for &(j, a) in amps {
            c.amps_mut()[j] = Complex64::new(a, 0.0);
        }
        let (_, g) = build_ladder(n_qubits, 2).unwrap();
        synthesize(&c, &g).unwrap()
    }

    fn uniform(n_qubits: usize) -> Waveform {
        let a = (1.0 / (1u64 << n_qubits) as f64).sqrt();
        let all: Vec<(usize, f64)> = (0..1 << n_qubits).map(|j| (j, a)).collect();
        state(n_qubits, &all)
    }

    fn random_coeffs(n_qubits: usize, seed: u64) -> CoefficientVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amps: Vec<Complex64> = (0..1 << n_qubits)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        CoefficientVector::new(n_qubits, amps.into_iter().map(|a| a / norm).collect()).unwrap()
    }

    #[test]
    fn basic_probabilities() {
        let psi = state(3, &[(0b010, 1.0)]);
        let (ps, pc) = probabilities(&psi, 1).unwrap();
        assert!((ps - 1.0).abs() < 1e-12 && pc.abs() < 1e-12);
        let (ps, pc) = probabilities(&psi, 2).unwrap();
        assert!(ps.abs() < 1e-12 && (pc - 1.0).abs() < 1e-12);

        let psi = state(2, &[(0b00, 0.6), (0b11, 0.8)]);
        let (ps, pc) = probabilities(&psi, 1).unwrap();
        assert!((ps - 0.36).abs() < 1e-12 && (pc - 0.64).abs() < 1e-12);

        let psi = uniform(4);
        for n in 1..=4 {
            let (ps, pc) = probabilities(&psi, n).unwrap();
            assert!((ps - 0.5).abs() < 1e-12 && (pc - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn null_state_errors() {
        let (_, g) = build_ladder(2, 2).unwrap();
        let z = Waveform::zeros(&g);
        assert_eq!(probabilities(&z, 1), Err(Error::MeasurementOnNull(1)));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            measure(&z, 2, MeasureMode::Born, &mut rng),
            Err(Error::MeasurementOnNull(2))
        ));
    }

    #[test]
    fn waveform_and_coefficient_probabilities_agree() {
        let (_, g) = build_ladder(5, 2).unwrap();
        let c = random_coeffs(5, 3);
        let psi = synthesize(&c, &g).unwrap();
        for n in 1..=5 {
            let (_, pc) = probabilities(&psi, n).unwrap();
            let expect: f64 = c
                .amps()
                .iter()
                .enumerate()
                .filter(|(j, _)| qubit_bit(*j, n, 5))
                .map(|(_, a)| a.norm_sqr())
                .sum();
            assert!((pc - expect).abs() < 1e-9, "qubit {n}");
        }
    }

    #[test]
    fn certain_outcomes_any_mode() {
        let psi = state(2, &[(0b01, 1.0)]);
        for mode in [MeasureMode::MaxRule, MeasureMode::Born] {
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            let (rec, post) = measure(&psi, 1, mode, &mut rng).unwrap();
            assert_eq!(rec.outcome, Basis::Sin);
            assert!(post.max_abs_diff(&psi).unwrap() < 1e-12);
            assert!((rec.p_sin + rec.p_cos - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn ties_are_reproducible_and_collapse_is_idempotent() {
        let psi = uniform(3);
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            measure(&psi, 2, MeasureMode::MaxRule, &mut rng).unwrap()
        };
        let (a, post) = run(42);
        let (b, _) = run(42);
        assert_eq!(a, b);
        let outcomes: Vec<Basis> = (0..16).map(|s| run(s).0.outcome).collect();
        assert!(outcomes.contains(&Basis::Sin) && outcomes.contains(&Basis::Cos));

        assert!((post.norm_sqr() - 1.0).abs() < 1e-10);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (again, _) = measure(&post, 2, MeasureMode::Born, &mut rng).unwrap();
        assert_eq!(again.outcome, a.outcome);
        let p = match a.outcome {
            Basis::Sin => again.p_sin,
            Basis::Cos => again.p_cos,
        };
        assert!((p - 1.0).abs() < 1e-10);
    }

    #[test]
    fn max_rule_picks_larger() {
        let psi = state(2, &[(0b00, 0.6), (0b11, 0.8)]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (rec, post) = measure(&psi, 2, MeasureMode::MaxRule, &mut rng).unwrap();
        assert_eq!(rec.outcome, Basis::Cos);
        let expect = state(2, &[(0b11, 1.0)]);
        assert!(post.max_abs_diff(&expect).unwrap() < 1e-10);
    }

    #[test]
    fn born_frequencies() {
        let psi = state(2, &[(0b00, 0.6), (0b11, 0.8)]);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 2000;
        let cos = (0..n)
            .filter(|_| measure(&psi, 1, MeasureMode::Born, &mut rng).unwrap().0.outcome == Basis::Cos)
            .count();
        let frac = cos as f64 / n as f64;
        assert!((frac - 0.64).abs() < 0.05, "{frac}");
    }

    #[test]
    fn remove_two_qubit_cos_cos() {
        let (_, g) = build_ladder(2, 2).unwrap();
        let psi = product_basis_waveform(&g, 0b11).unwrap();
        let out = remove_qubit(&psi, 2, Basis::Cos).unwrap();
        assert_eq!(out.n_qubits(), 1);
        assert_eq!(out.grid().ladder().freqs(), &[1]);
        let (_, g1) = build_ladder(1, 2).unwrap();
        let expect = product_basis_waveform(&g1, 1).unwrap();
        assert_eq!(out.grid().ladder().unit(), 2);
        let diff = out
            .samples()
            .iter()
            .zip(expect.samples())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-12);
        assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn remove_shrinks_period_and_keeps_conditional() {
        let (_, g) = build_ladder(6, 2).unwrap();
        let c = random_coeffs(6, 8);
        let psi = synthesize(&c, &g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (rec, post) = measure(&psi, 6, MeasureMode::MaxRule, &mut rng).unwrap();
        let reduced = remove_qubit(&post, 6, rec.outcome).unwrap();
        let ladder = reduced.grid().ladder();
        assert_eq!(ladder.freqs(), &[16, 8, 4, 2, 1]);
        assert_eq!(ladder.unit(), 2);
        assert!(ladder.base_period() < g.ladder().base_period());

        let hist_before = histogram(&post, &[1, 2, 3, 4, 5]).unwrap();
        let hist_after = histogram(&reduced, &[1, 2, 3, 4, 5]).unwrap();
        for (a, b) in hist_before.probabilities.iter().zip(&hist_after.probabilities) {
            assert!((a - b).abs() < 1e-9);
        }
        let slice = slice_conditional(&analyze(&post).unwrap(), 6, rec.outcome);
        assert!(analyze(&reduced).unwrap().max_abs_diff(&slice).unwrap() < 1e-10);
    }

    #[test]
    fn remove_middle_qubit_keeps_order() {
        let (_, g) = build_ladder(3, 2).unwrap();
        let psi = product_basis_waveform(&g, 0b110).unwrap();
        let out = remove_qubit(&psi, 2, Basis::Cos).unwrap();
        assert_eq!(out.grid().ladder().freqs(), &[4, 1]);
        let c = analyze(&out).unwrap();
        assert!((c.amps()[0b10] - 1.0).norm() < 1e-12);
    }

    #[test]
    fn remove_uncollapsed_is_protocol_error() {
        let psi = uniform(3);
        assert!(matches!(remove_qubit(&psi, 1, Basis::Sin), Err(Error::Protocol(_))));
        let psi = state(3, &[(0b000, 1.0)]);
        assert!(matches!(remove_qubit(&psi, 1, Basis::Cos), Err(Error::Protocol(_))));
    }

    #[test]
    fn histograms() {
        let psi = state(3, &[(0b101, 1.0)]);
        let h = histogram(&psi, &[1, 2, 3]).unwrap();
        assert_eq!(h.argmax(), 0b101);
        assert!((h.probabilities[0b101] - 1.0).abs() < 1e-12);
        let h = histogram(&psi, &[3, 1]).unwrap();
        assert!((h.probabilities[0b11] - 1.0).abs() < 1e-12);

        let h = histogram(&uniform(9), &(1..=9).collect::<Vec<_>>()).unwrap();
        assert_eq!(h.len(), 512);
        assert!(h.probabilities.iter().all(|p| (p - 1.0 / 512.0).abs() < 1e-12));
        assert!((h.total() - 1.0).abs() < 1e-9);

        assert!(histogram(&psi, &[1, 1]).is_err());
        assert!(histogram(&psi, &[4]).is_err());
    }

    #[test]
    fn histogram_serialization() {
        let psi = state(2, &[(0b00, 0.6), (0b10, 0.8)]);
        let h = histogram(&psi, &[1, 2]).unwrap();
        let csv = h.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "bitstring,value,probability");
        assert_eq!(lines.len(), 5);
        assert!(lines[3].starts_with("10,2,6.4"));
        let back: Histogram = serde_json::from_str(&h.to_json()).unwrap();
        assert_eq!(back, h);
        let rec = MeasurementRecord {
            qubit: 1,
            p_sin: 0.5,
            p_cos: 0.5,
            outcome: Basis::Cos,
            mode: MeasureMode::MaxRule,
        };
        let json = serde_json::to_string(&rec).unwrap();
        assert!(json.contains("\"max_rule\"") && json.contains("\"cos\""));
    }

    mod props {
        use super::*;
        use crate::oracle::DenseState;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn probabilities_match_dense(seed in any::<u64>(), n in 1usize..=6, q in 1usize..=6) {
                let q = 1 + (q - 1) % n;
                let dense = DenseState::random(n, &mut ChaCha8Rng::seed_from_u64(seed));
                let (_, g) = build_ladder(n, 2).unwrap();
                let psi = synthesize(&dense.to_coefficients(), &g).unwrap();
                let (ps, pc) = probabilities(&psi, q).unwrap();
                let (ws, wc) = dense.probabilities(q).unwrap();
                prop_assert!((ps + pc - 1.0).abs() < 1e-12);
                prop_assert!((ps - ws).abs() < 1e-9 && (pc - wc).abs() < 1e-9);
            }

            #[test]
            fn measure_then_remove_matches_dense(seed in any::<u64>(), n in 2usize..=6, q in 1usize..=6) {
                let q = 1 + (q - 1) % n;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let dense = DenseState::random(n, &mut rng);
                let (_, g) = build_ladder(n, 2).unwrap();
                let psi = synthesize(&dense.to_coefficients(), &g).unwrap();
                let (rec, post) = measure(&psi, q, MeasureMode::Born, &mut rng).unwrap();
                let reduced = remove_qubit(&post, q, rec.outcome).unwrap();
                let want = dense.collapse(q, rec.outcome).unwrap().remove(q, rec.outcome).unwrap();
                let got = analyze(&reduced).unwrap();
                prop_assert_eq!(reduced.n_qubits(), n - 1);
                prop_assert!(want.max_abs_diff(got.amps()).unwrap() < 1e-9);
            }
        }
    }
}
