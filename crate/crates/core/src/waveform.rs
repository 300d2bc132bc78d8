//! Sampled complex waveforms, per-qubit basis functions, and rectangle-rule inner products.

use std::fmt::Write as _;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ladder::SampleGrid;

/// Single-qubit basis function. `|0⟩ ↔ sin(ω t)`, `|1⟩ ↔ cos(ω t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Sin,
    Cos,
}

impl Basis {
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Basis::Cos
        } else {
            Basis::Sin
        }
    }

    pub fn bit(self) -> bool {
        self == Basis::Cos
    }

    pub fn other(self) -> Self {
        match self {
            Basis::Sin => Basis::Cos,
            Basis::Cos => Basis::Sin,
        }
    }
}

/// Bit of qubit `n` (1-based, qubit 1 most significant) in basis index `j`.
pub fn qubit_bit(j: usize, n: usize, n_qubits: usize) -> bool {
    (j >> (n_qubits - n)) & 1 == 1
}

/// Renders basis index `j` as a bitstring, qubit 1 first.
pub fn bitstring(j: usize, n_qubits: usize) -> String {
    (1..=n_qubits)
        .map(|n| if qubit_bit(j, n, n_qubits) { '1' } else { '0' })
        .collect()
}

pub fn parse_bitstring(s: &str) -> Result<usize> {
    if s.is_empty() || s.len() > 63 {
        return Err(Error::Size(format!("invalid bitstring length {}", s.len())));
    }
    s.chars().try_fold(0usize, |acc, c| match c {
        '0' => Ok(acc << 1),
        '1' => Ok((acc << 1) | 1),
        _ => Err(Error::Shape(format!("invalid bitstring character {c:?}"))),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Interval {
    /// `[0, 2π/fund)`
    Full,
    /// `[0, π/fund)`
    Half,
    /// `[0, τ)` with `0 < τ ≤ 2π/fund`.
    Truncated(f64),
}

impl Interval {
    /// Rectangle-rule weights for the samples inside the interval. The last
    /// cell of a truncated interval gets a fractional weight.
    pub(crate) fn weights(self, grid: &SampleGrid) -> Result<Vec<f64>> {
        let dt = grid.dt();
        match self {
            Interval::Full => Ok(vec![dt; grid.len()]),
            Interval::Half => Ok(vec![dt; grid.len() / 2]),
            Interval::Truncated(tau) => {
                if !(tau > 0.0 && tau <= grid.period() * (1.0 + 1e-12)) {
                    return Err(Error::Domain(format!(
                        "truncation limit {tau} outside (0, {}]",
                        grid.period()
                    )));
                }
                let count = ((tau / dt) - 1e-9).ceil().max(1.0) as usize;
                let count = count.min(grid.len());
                Ok((0..count)
                    .map(|k| (tau - grid.time(k)).clamp(0.0, dt))
                    .collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    grid: SampleGrid,
    samples: Vec<Complex64>,
}

impl Waveform {
    pub fn new(grid: SampleGrid, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::Shape(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        if samples.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain("waveform samples must be finite".into()));
        }
        Ok(Self { grid, samples })
    }

    pub(crate) fn from_parts(grid: SampleGrid, samples: Vec<Complex64>) -> Self {
        debug_assert_eq!(samples.len(), grid.len());
        Self { grid, samples }
    }

    pub fn zeros(grid: &SampleGrid) -> Self {
        Self {
            grid: grid.clone(),
            samples: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_real(grid: &SampleGrid, values: &[f64]) -> Result<Self> {
        Self::new(
            grid.clone(),
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        )
    }

    pub fn grid(&self) -> &SampleGrid {
        &self.grid
    }

    pub fn n_qubits(&self) -> usize {
        self.grid.n_qubits()
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::from_parts(
            self.grid.clone(),
            self.samples.iter().map(|&z| z * c).collect(),
        )
    }

    /// Pointwise product with a real table sampled on the same grid.
    pub(crate) fn mul_real(&self, table: &[f64]) -> Self {
        Self::from_parts(
            self.grid.clone(),
            self.samples
                .iter()
                .zip(table)
                .map(|(&z, &r)| z * r)
                .collect(),
        )
    }

    /// Squared norm of the product-basis amplitudes: `⟨Ψ,Ψ⟩ · 2^N · fund / 2π`.
    pub fn norm_sqr(&self) -> f64 {
        let raw: f64 = self.samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.dt();
        raw * (1u64 << self.n_qubits()) as f64 / self.grid.period()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr();
        if n <= 0.0 || !n.is_finite() {
            return Err(Error::Domain("cannot normalize a null waveform".into()));
        }
        Ok(self.scale(Complex64::new(1.0 / n.sqrt(), 0.0)))
    }

    pub fn max_abs_diff(&self, other: &Waveform) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub(crate) fn check_same_grid(&self, other: &Waveform) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Shape("waveforms live on different grids".into()));
        }
        Ok(())
    }

    /// CSV with header `index,t,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,t,re,im\n");
        for (k, z) in self.samples.iter().enumerate() {
            let _ = writeln!(out, "{},{},{},{}", k, self.grid.time(k), z.re, z.im);
        }
        out
    }
}

impl Add for &Waveform {
    type Output = Waveform;

    fn add(self, rhs: &Waveform) -> Waveform {
        assert!(self.grid == rhs.grid, "adding waveforms on different grids");
        Waveform::from_parts(
            self.grid.clone(),
            self.samples
                .iter()
                .zip(&rhs.samples)
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

impl Sub for &Waveform {
    type Output = Waveform;

    fn sub(self, rhs: &Waveform) -> Waveform {
        assert!(self.grid == rhs.grid, "subtracting waveforms on different grids");
        Waveform::from_parts(
            self.grid.clone(),
            self.samples
                .iter()
                .zip(&rhs.samples)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }
}

impl Mul<Complex64> for &Waveform {
    type Output = Waveform;

    fn mul(self, rhs: Complex64) -> Waveform {
        self.scale(rhs)
    }
}

/// Samples of `sin(ω_n t)` or `cos(ω_n t)`.
pub fn basis_waveform(grid: &SampleGrid, n: usize, basis: Basis) -> Result<Waveform> {
    grid.ladder().check_qubit(n)?;
    let (cos, sin) = grid.qubit_tables(n);
    let table = match basis {
        Basis::Sin => sin,
        Basis::Cos => cos,
    };
    Waveform::from_real(grid, &table)
}

/// Samples of `H_{N,j}(t) = Π_n h_n(ω_n t)` for basis index `j`.
pub fn product_basis_waveform(grid: &SampleGrid, j: usize) -> Result<Waveform> {
    let n_qubits = grid.n_qubits();
    if j >= 1usize << n_qubits {
        return Err(Error::Size(format!(
            "basis index {j} overflows a {n_qubits}-qubit register"
        )));
    }
    Waveform::from_real(grid, &product_basis_table(grid, j))
}

pub(crate) fn product_basis_table(grid: &SampleGrid, j: usize) -> Vec<f64> {
    let n_qubits = grid.n_qubits();
    let freqs = grid.ladder().freqs();
    (0..grid.len())
        .map(|k| {
            (1..=n_qubits)
                .map(|n| {
                    let (c, s) = grid.harmonic(freqs[n - 1] as i64, k);
                    if qubit_bit(j, n, n_qubits) {
                        c
                    } else {
                        s
                    }
                })
                .product()
        })
        .collect()
}

/// Rectangle-rule `∫ conj(w1) w2 dt` over the interval.
pub fn inner_product(w1: &Waveform, w2: &Waveform, interval: Interval) -> Result<Complex64> {
    w1.check_same_grid(w2)?;
    let weights = interval.weights(w1.grid())?;
    Ok(weights
        .iter()
        .zip(w1.samples.iter().zip(&w2.samples))
        .map(|(&w, (a, b))| a.conj() * b * w)
        .sum())
}
