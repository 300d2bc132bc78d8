//! Product-basis analysis and synthesis.
//!
//! Two routes are provided for each direction. The projection routes are the
//! literal inner-product definitions; the spectral routes use the fact that
//! every `H_{N,j}` is a combination of `2^N` complex exponentials whose
//! coefficients factor per qubit, so the basis change is a Kronecker product
//! of 2x2 maps followed by one FFT.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;
use crate::ladder::{signed_sum, FrequencyLadder, SampleGrid};
use crate::waveform::{
    bitstring, parse_bitstring, product_basis_table, qubit_bit, Basis, Interval, Waveform,
};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Amplitudes over the `2^N` product-basis functions. Index bits follow
/// [`qubit_bit`]: qubit 1 is the most significant bit, `1 ↔ cos`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl CoefficientVector {
    pub fn new(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > 30 || amps.len() != 1usize << n_qubits {
            return Err(Error::Size(format!(
                "{} amplitudes do not index a {n_qubits}-qubit register",
                amps.len()
            )));
        }
        Ok(Self { n_qubits, amps })
    }

    pub fn zeros(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            amps: vec![Complex64::new(0.0, 0.0); 1 << n_qubits],
        }
    }

    pub fn basis_state(n_qubits: usize, j: usize) -> Self {
        let mut c = Self::zeros(n_qubits);
        c.amps[j] = Complex64::new(1.0, 0.0);
        c
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amps_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amps(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn max_abs_diff(&self, other: &CoefficientVector) -> Result<f64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::Shape(format!(
                "comparing {}-qubit and {}-qubit vectors",
                self.n_qubits, other.n_qubits
            )));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// `{bitstring: [re, im]}`, ordered by bitstring.
    pub fn to_json_map(&self) -> BTreeMap<String, [f64; 2]> {
        self.amps
            .iter()
            .enumerate()
            .map(|(j, a)| (bitstring(j, self.n_qubits), [a.re, a.im]))
            .collect()
    }

    pub fn from_json_map(map: &BTreeMap<String, [f64; 2]>) -> Result<Self> {
        let n_qubits = map
            .keys()
            .next()
            .map(|k| k.len())
            .ok_or_else(|| Error::Size("empty coefficient map".into()))?;
        let mut c = Self::new(n_qubits, vec![Complex64::new(0.0, 0.0); 1 << n_qubits])?;
        for (k, v) in map {
            if k.len() != n_qubits {
                return Err(Error::Shape(format!("bitstring {k:?} has the wrong length")));
            }
            c.amps[parse_bitstring(k)?] = Complex64::new(v[0], v[1]);
        }
        Ok(c)
    }
}

/// Applies the same 2x2 map to every qubit axis of a `2^N` array.
fn kron_apply(data: &mut [Complex64], n_qubits: usize, m: [[Complex64; 2]; 2]) {
    for p in 0..n_qubits {
        let bit = 1usize << p;
        for i in 0..data.len() {
            if i & bit == 0 {
                let (a0, a1) = (data[i], data[i | bit]);
                data[i] = m[0][0] * a0 + m[0][1] * a1;
                data[i | bit] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
    }
}

// Slot 0 of the exponential axis is e^{+iωt}, slot 1 is e^{-iωt}.
fn to_exponentials() -> [[Complex64; 2]; 2] {
    let h = Complex64::new(0.5, 0.0);
    [[-I * 0.5, h], [I * 0.5, h]]
}

fn from_exponentials() -> [[Complex64; 2]; 2] {
    let one = Complex64::new(1.0, 0.0);
    [[I, -I], [one, one]]
}

/// `Σ_j amps[j] H_{N,j}` sampled on the grid (spectral route).
pub fn synthesize(c: &CoefficientVector, grid: &SampleGrid) -> Result<Waveform> {
    check_dims(c, grid)?;
    let mut data = c.amps.clone();
    kron_apply(&mut data, c.n_qubits, to_exponentials());
    let freqs = grid.ladder().freqs();
    let mut buf = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (s, d) in data.iter().enumerate() {
        buf[grid.bin(signed_sum(freqs, s))] += d;
    }
    fft::inverse(&mut buf);
    Ok(Waveform::from_parts(grid.clone(), buf))
}

/// Pointwise `Σ_j amps[j] H_{N,j}(t_k)`; cost `O(2^N · m · N)`.
pub fn synthesize_direct(c: &CoefficientVector, grid: &SampleGrid) -> Result<Waveform> {
    check_dims(c, grid)?;
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (j, &a) in c.amps.iter().enumerate() {
        if a == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (o, h) in out.iter_mut().zip(product_basis_table(grid, j)) {
            *o += a * h;
        }
    }
    Ok(Waveform::from_parts(grid.clone(), out))
}

/// Product-basis amplitudes of `w` (spectral route). Equals
/// [`analyze_projection`] for any sample vector, since both are discrete
/// orthogonal projections onto the same span.
pub fn analyze(w: &Waveform) -> Result<CoefficientVector> {
    let grid = w.grid();
    grid.ladder().require_unique()?;
    let n_qubits = grid.n_qubits();
    let mut buf = w.samples().to_vec();
    fft::forward(&mut buf);
    let scale = 1.0 / grid.len() as f64;
    let freqs = grid.ladder().freqs();
    let mut data: Vec<Complex64> = (0..1usize << n_qubits)
        .map(|s| buf[grid.bin(signed_sum(freqs, s))] * scale)
        .collect();
    kron_apply(&mut data, n_qubits, from_exponentials());
    Ok(CoefficientVector {
        n_qubits,
        amps: data,
    })
}

/// `amps[j] = ⟨H_j, w⟩ / ⟨H_j, H_j⟩` over the full period.
pub fn analyze_projection(w: &Waveform) -> Result<CoefficientVector> {
    let grid = w.grid();
    grid.ladder().require_unique()?;
    let n_qubits = grid.n_qubits();
    let amps = (0..1usize << n_qubits)
        .map(|j| {
            let h = product_basis_table(grid, j);
            let num: Complex64 = h.iter().zip(w.samples()).map(|(&a, &b)| b * a).sum();
            let den: f64 = h.iter().map(|a| a * a).sum();
            num / den
        })
        .collect();
    Ok(CoefficientVector { n_qubits, amps })
}

fn check_dims(c: &CoefficientVector, grid: &SampleGrid) -> Result<()> {
    if c.n_qubits != grid.n_qubits() {
        return Err(Error::Shape(format!(
            "{}-qubit coefficients on a {}-qubit grid",
            c.n_qubits,
            grid.n_qubits()
        )));
    }
    Ok(())
}

pub const GRAM_MAX_QUBITS: usize = 10;

/// `G[j][k] = ⟨H_j, H_k⟩` by quadrature over the interval.
pub fn gram_matrix(grid: &SampleGrid, interval: Interval) -> Result<Vec<Vec<f64>>> {
    let n_qubits = grid.n_qubits();
    if n_qubits > GRAM_MAX_QUBITS {
        return Err(Error::Size(format!(
            "Gram matrix limited to {GRAM_MAX_QUBITS} qubits, got {n_qubits}"
        )));
    }
    let weights = interval.weights(grid)?;
    let dim = 1usize << n_qubits;
    let tables: Vec<Vec<f64>> = (0..dim)
        .map(|j| {
            let mut t = product_basis_table(grid, j);
            t.truncate(weights.len());
            t
        })
        .collect();
    let mut g = vec![vec![0.0; dim]; dim];
    for j in 0..dim {
        for k in j..dim {
            let v: f64 = tables[j]
                .iter()
                .zip(&tables[k])
                .zip(&weights)
                .map(|((a, b), w)| a * b * w)
                .sum();
            g[j][k] = v;
            g[k][j] = v;
        }
    }
    Ok(g)
}

/// One real Fourier component `coefficient · kind(freq · t)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FourierTerm {
    pub freq: u64,
    pub kind: Basis,
    pub coefficient: Ratio<i64>,
}

/// Exact real Fourier expansion of `H_{N,j}`.
///
/// Terms follow the signed-sum enumeration order (last qubit's sign flipping
/// fastest); components landing on the same `(|Ω|, kind)` are merged in place
/// of their first occurrence.
pub fn fourier_expansion(j: usize, ladder: &FrequencyLadder) -> Result<Vec<FourierTerm>> {
    let n_qubits = ladder.n_qubits();
    if j >= 1usize << n_qubits {
        return Err(Error::Size(format!(
            "basis index {j} overflows a {n_qubits}-qubit register"
        )));
    }
    let denom = 1i64 << (n_qubits - 1);
    let mut terms: Vec<FourierTerm> = Vec::new();
    for s in 0..1usize << (n_qubits - 1) {
        // Coefficient of e^{iΩt} is i^q · sign / 2^N.
        let mut quarter_turns = 0u32;
        for n in 1..=n_qubits {
            if !qubit_bit(j, n, n_qubits) {
                let minus = (s >> (n_qubits - n)) & 1 == 1;
                // sin: -i/2 on e^{+iωt}, +i/2 on e^{-iωt}
                quarter_turns += if minus { 1 } else { 3 };
            }
        }
        let freq = signed_sum(ladder.freqs(), s);
        // c e^{iΩt} + conj(c) e^{-iΩt} = 2Re(c) cos Ωt - 2Im(c) sin Ωt
        let (kind, mut sign) = match quarter_turns % 4 {
            0 => (Basis::Cos, 1),
            1 => (Basis::Sin, -1),
            2 => (Basis::Cos, -1),
            _ => (Basis::Sin, 1),
        };
        if freq < 0 && kind == Basis::Sin {
            sign = -sign;
        }
        if freq == 0 && kind == Basis::Sin {
            continue;
        }
        let coefficient = Ratio::new(sign, denom);
        let freq = freq.unsigned_abs();
        match terms.iter_mut().find(|t| t.freq == freq && t.kind == kind) {
            Some(t) => t.coefficient += coefficient,
            None => terms.push(FourierTerm {
                freq,
                kind,
                coefficient,
            }),
        }
    }
    Ok(terms)
}

/// Full-period inner product of two expansions: each nonzero frequency
/// component contributes `π/fund`, the constant term `2π/fund`.
pub fn expansion_inner_product(a: &[FourierTerm], b: &[FourierTerm], fund: u64) -> f64 {
    let unit = PI / fund as f64;
    a.iter()
        .flat_map(|x| {
            b.iter()
                .filter(move |y| y.freq == x.freq && y.kind == x.kind)
                .map(move |y| {
                    let c = x.coefficient * y.coefficient;
                    let w = if x.freq == 0 { 2.0 * unit } else { unit };
                    *c.numer() as f64 / *c.denom() as f64 * w
                })
        })
        .sum()
}

pub fn expansion_waveform(terms: &[FourierTerm], grid: &SampleGrid) -> Waveform {
    let samples = (0..grid.len())
        .map(|k| {
            let v: f64 = terms
                .iter()
                .map(|t| {
                    let (c, s) = grid.harmonic(t.freq as i64, k);
                    let coef = *t.coefficient.numer() as f64 / *t.coefficient.denom() as f64;
                    coef * match t.kind {
                        Basis::Cos => c,
                        Basis::Sin => s,
                    }
                })
                .sum();
            Complex64::new(v, 0.0)
        })
        .collect();
    Waveform::from_parts(grid.clone(), samples)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonOrthogonalPair {
    pub j: String,
    pub k: String,
    pub value: f64,
    pub value_over_pi: f64,
}

/// Off-diagonal Gram entries with magnitude above `tol`.
pub fn non_orthogonal_pairs(gram: &[Vec<f64>], n_qubits: usize, tol: f64) -> Vec<NonOrthogonalPair> {
    let mut out = Vec::new();
    for (j, row) in gram.iter().enumerate() {
        for (k, &v) in row.iter().enumerate().skip(j + 1) {
            if v.abs() > tol {
                out.push(NonOrthogonalPair {
                    j: bitstring(j, n_qubits),
                    k: bitstring(k, n_qubits),
                    value: v,
                    value_over_pi: v / PI,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ladder::{build_custom_ladder, build_ladder};
    use crate::waveform::{inner_product, product_basis_waveform};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_vector(n_qubits: usize, seed: u64) -> CoefficientVector {
        // xorshift; independent of the crate's RNG plumbing
        let mut x = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
        let mut next = || {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let amps: Vec<Complex64> = (0..1 << n_qubits).map(|_| c(next(), next())).collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        CoefficientVector::new(n_qubits, amps.into_iter().map(|a| a / norm).collect()).unwrap()
    }

    #[test]
    fn analyze_all_cos() {
        let (_, g) = build_ladder(4, 2).unwrap();
        let w = product_basis_waveform(&g, 0b1111).unwrap();
        let a = analyze(&w).unwrap();
        assert!(a.max_abs_diff(&CoefficientVector::basis_state(4, 15)).unwrap() < 1e-13);
    }

    #[test]
    fn analyze_linear_combination() {
        let (_, g) = build_ladder(3, 2).unwrap();
        let ha = product_basis_waveform(&g, 2).unwrap();
        let hb = product_basis_waveform(&g, 5).unwrap();
        let w = &ha.scale(c(0.6, 0.0)) + &hb.scale(c(0.8, 0.0));
        let a = analyze(&w).unwrap();
        assert!((a.amps()[2] - c(0.6, 0.0)).norm() < 1e-13);
        assert!((a.amps()[5] - c(0.8, 0.0)).norm() < 1e-13);
        assert!((a.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn analyze_rejects_redundant() {
        let (_, g) = build_custom_ladder(&[3, 1, 1], 2).unwrap();
        let w = Waveform::zeros(&g);
        assert!(matches!(analyze(&w), Err(Error::NonOrthogonalBasis(_))));
        assert!(matches!(
            analyze_projection(&w),
            Err(Error::NonOrthogonalBasis(_))
        ));
    }

    #[test]
    fn synthesize_examples() {
        let (_, g) = build_ladder(3, 2).unwrap();
        let w = synthesize(&CoefficientVector::basis_state(3, 0), &g).unwrap();
        for k in 0..g.len() {
            let t = g.time(k);
            let expect = (4.0 * t).sin() * (2.0 * t).sin() * t.sin();
            assert!((w.samples()[k] - c(expect, 0.0)).norm() < 1e-13);
        }

        let ones = CoefficientVector::new(3, vec![c(1.0, 0.0); 8]).unwrap();
        let w = synthesize(&ones, &g).unwrap();
        for k in 0..g.len() {
            let t = g.time(k);
            let expect: f64 = [4.0, 2.0, 1.0]
                .iter()
                .map(|f: &f64| (f * t).sin() + (f * t).cos())
                .product();
            assert!((w.samples()[k].re - expect).abs() < 1e-12);
        }

        let w = synthesize(&CoefficientVector::zeros(3), &g).unwrap();
        assert_eq!(w.max_abs(), 0.0);
    }

    #[test]
    fn synthesize_dimension_mismatch() {
        let (_, g) = build_ladder(3, 2).unwrap();
        assert!(matches!(
            synthesize(&CoefficientVector::zeros(2), &g),
            Err(Error::Shape(_))
        ));
        assert!(CoefficientVector::new(3, vec![c(0.0, 0.0); 7]).is_err());
    }

    #[test]
    fn spectral_and_direct_routes_agree() {
        for n in 1..=6 {
            let (_, g) = build_ladder(n, 2).unwrap();
            let v = random_vector(n, n as u64 + 11);
            let ws = synthesize(&v, &g).unwrap();
            let wd = synthesize_direct(&v, &g).unwrap();
            assert!(ws.max_abs_diff(&wd).unwrap() < 1e-12);
            let a1 = analyze(&wd).unwrap();
            let a2 = analyze_projection(&wd).unwrap();
            assert!(a1.max_abs_diff(&a2).unwrap() < 1e-12);
            assert!(a1.max_abs_diff(&v).unwrap() < 1e-12);
        }
    }

    #[test]
    fn custom_unique_ladder_round_trip() {
        let (_, g) = build_custom_ladder(&[12, 6, 9], 4).unwrap();
        assert!(g.ladder().unique_spectrum());
        let v = random_vector(3, 5);
        let a = analyze(&synthesize(&v, &g).unwrap()).unwrap();
        assert!(a.max_abs_diff(&v).unwrap() < 1e-12);
    }

    proptest! {
        #[test]
        fn round_trip(n in 1usize..=8, seed in any::<u64>()) {
            let (_, g) = build_ladder(n, 2).unwrap();
            let v = random_vector(n, seed);
            let w = synthesize(&v, &g).unwrap();
            prop_assert!(analyze(&w).unwrap().max_abs_diff(&v).unwrap() < 1e-10);
            prop_assert!((w.norm_sqr() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn gram_examples() {
        let (_, g) = build_ladder(3, 2).unwrap();
        let gm = gram_matrix(&g, Interval::Full).unwrap();
        for (j, row) in gm.iter().enumerate() {
            for (k, &v) in row.iter().enumerate() {
                let expect = if j == k { 2.0 * PI / 8.0 } else { 0.0 };
                assert!((v - expect).abs() < 1e-10);
            }
        }

        let (_, g) = build_custom_ladder(&[3, 1, 1], 2).unwrap();
        let gm = gram_matrix(&g, Interval::Full).unwrap();
        assert!((gm[0b111][0b100] - PI / 8.0).abs() < 1e-12);
        let pairs = non_orthogonal_pairs(&gm, 3, 1e-9);
        assert!(pairs
            .iter()
            .any(|p| p.j == "100" && p.k == "111" && (p.value_over_pi - 0.125).abs() < 1e-12));
    }

    fn rank(m: &[Vec<f64>], tol: f64) -> usize {
        let mut a: Vec<Vec<f64>> = m.to_vec();
        let (rows, cols) = (a.len(), a[0].len());
        let mut r = 0;
        for col in 0..cols {
            let Some(p) = (r..rows).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            else {
                break;
            };
            if a[p][col].abs() < tol {
                continue;
            }
            a.swap(r, p);
            for i in 0..rows {
                if i != r {
                    let f = a[i][col] / a[r][col];
                    for k in 0..cols {
                        a[i][k] -= f * a[r][k];
                    }
                }
            }
            r += 1;
        }
        r
    }

    #[test]
    fn zero_frequency_degeneracy() {
        let (_, g) = build_custom_ladder(&[2, 1, 1], 2).unwrap();
        let gm = gram_matrix(&g, Interval::Full).unwrap();
        assert!(rank(&gm, 1e-9) < 8);
        let (_, g) = build_ladder(3, 2).unwrap();
        assert_eq!(rank(&gram_matrix(&g, Interval::Full).unwrap(), 1e-9), 8);
    }

    #[test]
    fn half_period_is_half_of_full() {
        for n in 1..=5 {
            let (_, g) = build_ladder(n, 2).unwrap();
            let full = gram_matrix(&g, Interval::Full).unwrap();
            let half = gram_matrix(&g, Interval::Half).unwrap();
            for (rf, rh) in full.iter().zip(&half) {
                for (f, h) in rf.iter().zip(rh) {
                    assert!((h - f / 2.0).abs() < 1e-12);
                }
            }
        }
    }

    fn r(n: i64, d: i64) -> Ratio<i64> {
        Ratio::new(n, d)
    }

    #[test]
    fn expansion_ccc_and_sss() {
        let l = FrequencyLadder::standard(3).unwrap();
        let ccc = fourier_expansion(0b111, &l).unwrap();
        assert_eq!(ccc.len(), 4);
        assert_eq!(
            ccc.iter().map(|t| t.freq).collect::<Vec<_>>(),
            vec![7, 5, 3, 1]
        );
        assert!(ccc
            .iter()
            .all(|t| t.kind == Basis::Cos && t.coefficient == r(1, 4)));

        let sss = fourier_expansion(0b000, &l).unwrap();
        assert!(sss.iter().all(|t| t.kind == Basis::Sin));
        let signs: Vec<Ratio<i64>> = sss.iter().map(|t| t.coefficient).collect();
        assert_eq!(signs, vec![r(-1, 4), r(1, 4), r(1, 4), r(-1, 4)]);
    }

    #[test]
    fn expansion_vectors_match_table() {
        // Rows of the 3-qubit compact-vector table: (cos block, sin block) in units of 1/4.
        let table: [(usize, [i64; 8]); 8] = [
            (0b111, [1, 1, 1, 1, 0, 0, 0, 0]),
            (0b110, [0, 0, 0, 0, 1, -1, 1, -1]),
            (0b101, [0, 0, 0, 0, 1, 1, -1, -1]),
            (0b100, [-1, 1, 1, -1, 0, 0, 0, 0]),
            (0b011, [0, 0, 0, 0, 1, 1, 1, 1]),
            (0b010, [-1, 1, -1, 1, 0, 0, 0, 0]),
            (0b001, [-1, -1, 1, 1, 0, 0, 0, 0]),
            (0b000, [0, 0, 0, 0, -1, 1, 1, -1]),
        ];
        let l = FrequencyLadder::standard(3).unwrap();
        let freqs = [7u64, 5, 3, 1];
        for (j, row) in table {
            let e = fourier_expansion(j, &l).unwrap();
            for (slot, &v) in row.iter().enumerate() {
                let kind = if slot < 4 { Basis::Cos } else { Basis::Sin };
                let f = freqs[slot % 4];
                let got = e
                    .iter()
                    .find(|t| t.freq == f && t.kind == kind)
                    .map(|t| t.coefficient)
                    .unwrap_or(r(0, 1));
                assert_eq!(got, r(v, 4), "j={j:03b} slot={slot}");
            }
        }
    }

    #[test]
    fn expansion_redundant_merge() {
        let l = FrequencyLadder::custom(vec![3, 1, 1]).unwrap();
        let ccc = fourier_expansion(0b111, &l).unwrap();
        let three = ccc.iter().find(|t| t.freq == 3).unwrap();
        assert_eq!(three.coefficient, r(1, 2));
        let css = fourier_expansion(0b100, &l).unwrap();
        // (1,2,1)·(-1,2,-1) = 2 units of π/16
        let ip = expansion_inner_product(&ccc, &css, 1);
        assert!((ip - 2.0 * PI / 16.0).abs() < 1e-15);
    }

    #[test]
    fn expansion_consistency_with_quadrature() {
        for freqs in [vec![4u64, 2, 1], vec![3, 1, 1], vec![2, 1, 1], vec![6, 3, 2, 1], vec![1, 2]] {
            let (l, g) = build_custom_ladder(&freqs, 2).unwrap();
            let n = l.n_qubits();
            let exps: Vec<_> = (0..1 << n).map(|j| fourier_expansion(j, &l).unwrap()).collect();
            for j in 0..1 << n {
                let hj = product_basis_waveform(&g, j).unwrap();
                assert!(expansion_waveform(&exps[j], &g).max_abs_diff(&hj).unwrap() < 1e-12);
                for k in 0..1 << n {
                    let hk = product_basis_waveform(&g, k).unwrap();
                    let quad = inner_product(&hj, &hk, Interval::Full).unwrap().re;
                    let formal = expansion_inner_product(&exps[j], &exps[k], l.fund());
                    assert!((quad - formal).abs() < 1e-12, "{freqs:?} j={j} k={k}");
                }
            }
        }
    }

    #[test]
    fn json_map_round_trip() {
        let v = random_vector(3, 9);
        let map = v.to_json_map();
        assert!(map.contains_key("101"));
        assert_eq!(CoefficientVector::from_json_map(&map).unwrap(), v);
    }
}
