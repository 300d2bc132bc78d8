//! Integer frequency ladders and the uniform sample grids built on them.
//!
//! Frequencies are exact integers. Qubit `n` (1-based, qubit 1 the most
//! significant) carries `freqs[n - 1]`; the standard ladder assigns
//! `2^(N - n)`, i.e. each qubit has half the frequency of the previous one.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyLadder {
    freqs: Vec<u64>,
    fund: u64,
    omega_max: u64,
    unique_spectrum: bool,
    unit: u64,
}

pub(crate) fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl FrequencyLadder {
    /// The standard ladder `[2^(N-1), ..., 2, 1]`.
    pub fn standard(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(Error::Size(format!(
                "n_qubits must be in 1..={MAX_QUBITS}, got {n_qubits}"
            )));
        }
        let freqs = (0..n_qubits).map(|i| 1u64 << (n_qubits - 1 - i)).collect();
        Self::custom(freqs)
    }

    pub fn custom(freqs: Vec<u64>) -> Result<Self> {
        Self::with_unit(freqs, 1)
    }

    /// A ladder whose unit frequency corresponds to `unit` base-rate units.
    /// Used when a register shrinks and its frequencies are divided by their gcd.
    pub fn with_unit(freqs: Vec<u64>, unit: u64) -> Result<Self> {
        if freqs.is_empty() {
            return Err(Error::Size("frequency ladder must not be empty".into()));
        }
        if freqs.len() > MAX_QUBITS {
            return Err(Error::Size(format!(
                "at most {MAX_QUBITS} qubits supported, got {}",
                freqs.len()
            )));
        }
        if freqs.contains(&0) {
            return Err(Error::Size("qubit frequencies must be positive".into()));
        }
        if unit == 0 {
            return Err(Error::Size("ladder unit must be positive".into()));
        }
        let fund = freqs.iter().copied().fold(0, gcd);
        let omega_max = freqs.iter().sum();
        let unique_spectrum = spectrum_is_unique(&freqs);
        Ok(Self {
            freqs,
            fund,
            omega_max,
            unique_spectrum,
            unit,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.freqs.len()
    }

    pub fn freqs(&self) -> &[u64] {
        &self.freqs
    }

    /// Frequency of qubit `n` (1-based).
    pub fn freq(&self, n: usize) -> Result<u64> {
        self.check_qubit(n)?;
        Ok(self.freqs[n - 1])
    }

    pub fn fund(&self) -> u64 {
        self.fund
    }

    pub fn omega_max(&self) -> u64 {
        self.omega_max
    }

    pub fn unique_spectrum(&self) -> bool {
        self.unique_spectrum
    }

    pub fn unit(&self) -> u64 {
        self.unit
    }

    /// Full period `2π/fund` in ladder time units.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.fund as f64
    }

    /// Full period measured in base-rate time units. Shrinks as low-frequency
    /// qubits are removed from a register.
    pub fn base_period(&self) -> f64 {
        self.period() / self.unit as f64
    }

    pub fn check_qubit(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.freqs.len() {
            Err(Error::QubitIndex {
                qubit: n,
                n_qubits: self.freqs.len(),
            })
        } else {
            Ok(())
        }
    }

    pub fn require_unique(&self) -> Result<()> {
        if self.unique_spectrum {
            Ok(())
        } else {
            Err(Error::NonOrthogonalBasis(self.freqs.clone()))
        }
    }
}

/// Signed sum of the ladder for sign pattern `s`: bit `N - q` of `s` set means
/// qubit `q` enters with a minus sign. Qubit 1 is always positive when `s < 2^(N-1)`.
pub(crate) fn signed_sum(freqs: &[u64], s: usize) -> i64 {
    let n = freqs.len();
    freqs
        .iter()
        .enumerate()
        .map(|(i, &f)| {
            if (s >> (n - 1 - i)) & 1 == 1 {
                -(f as i64)
            } else {
                f as i64
            }
        })
        .sum()
}

fn spectrum_is_unique(freqs: &[u64]) -> bool {
    let half = 1usize << (freqs.len() - 1);
    let mut sums: Vec<u64> = (0..half)
        .map(|s| signed_sum(freqs, s).unsigned_abs())
        .collect();
    if sums.contains(&0) {
        return false;
    }
    sums.sort_unstable();
    sums.windows(2).all(|w| w[0] != w[1])
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectralComponent {
    /// Signed sum `Σ σ_n ω_n`.
    pub freq: i64,
    /// Sign pattern, one entry per qubit; the first is always `+1`.
    pub signs: Vec<i8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FourierSpectrum {
    pub components: Vec<SpectralComponent>,
    /// Number of components per distinct `|Ω|`.
    pub multiplicities: BTreeMap<u64, usize>,
}

/// Enumerates the `2^(N-1)` signed sums with qubit 1 fixed positive, in the
/// order where the last qubit's sign flips fastest.
pub fn fourier_spectrum(ladder: &FrequencyLadder) -> FourierSpectrum {
    let n = ladder.n_qubits();
    let half = 1usize << (n - 1);
    let mut components = Vec::with_capacity(half);
    let mut multiplicities = BTreeMap::new();
    for s in 0..half {
        let freq = signed_sum(&ladder.freqs, s);
        let signs = (0..n)
            .map(|i| if (s >> (n - 1 - i)) & 1 == 1 { -1 } else { 1 })
            .collect();
        *multiplicities.entry(freq.unsigned_abs()).or_insert(0) += 1;
        components.push(SpectralComponent { freq, signs });
    }
    FourierSpectrum {
        components,
        multiplicities,
    }
}

/// Uniform grid over one full period `[0, 2π/fund)`.
///
/// The sample count exceeds twice the highest frequency of any product of
/// two register waveforms, so the rectangle rule integrates every such
/// product exactly over the full period (and over the half period when all
/// frequencies are even multiples of `fund`).
#[derive(Debug, Clone)]
pub struct SampleGrid {
    ladder: FrequencyLadder,
    m: usize,
    oversample: usize,
    dt: f64,
    /// `(cos, sin)` of `2π k / m`.
    circle: Arc<Vec<(f64, f64)>>,
}

impl PartialEq for SampleGrid {
    fn eq(&self, other: &Self) -> bool {
        self.ladder == other.ladder && self.m == other.m
    }
}

impl SampleGrid {
    pub fn new(ladder: FrequencyLadder, oversample: usize) -> Result<Self> {
        if oversample < 2 || !oversample.is_power_of_two() {
            return Err(Error::Size(format!(
                "oversample must be a power of two >= 2, got {oversample}"
            )));
        }
        // Smallest power of two strictly above 2·(2·omega_max)/fund.
        let need = (4 * ladder.omega_max / ladder.fund) as usize;
        let base = (need + 1).next_power_of_two();
        let m = base * oversample / 2;
        let dt = ladder.period() / m as f64;
        let circle = (0..m)
            .map(|k| {
                let (s, c) = (2.0 * PI * k as f64 / m as f64).sin_cos();
                (c, s)
            })
            .collect();
        Ok(Self {
            ladder,
            m,
            oversample,
            dt,
            circle: Arc::new(circle),
        })
    }

    pub fn ladder(&self) -> &FrequencyLadder {
        &self.ladder
    }

    pub fn n_qubits(&self) -> usize {
        self.ladder.n_qubits()
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn oversample(&self) -> usize {
        self.oversample
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn period(&self) -> f64 {
        self.ladder.period()
    }

    /// Upper limit `π/fund` of the half-period integrals.
    pub fn half_period(&self) -> f64 {
        self.ladder.period() / 2.0
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    /// `(cos, sin)` of `Ω t_k` for an integer frequency that is a multiple of `fund`.
    pub(crate) fn harmonic(&self, freq: i64, k: usize) -> (f64, f64) {
        let r = freq / self.ladder.fund as i64;
        let m = self.m as i64;
        let idx = (r.rem_euclid(m) * (k as i64 % m)).rem_euclid(m) as usize;
        self.circle[idx]
    }

    /// Samples of `cos(ω_n t)` and `sin(ω_n t)` for qubit `n`.
    pub(crate) fn qubit_tables(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        let freq = self.ladder.freqs[n - 1] as i64;
        (0..self.m).map(|k| self.harmonic(freq, k)).unzip()
    }

    /// FFT bin of an integer frequency.
    pub(crate) fn bin(&self, freq: i64) -> usize {
        (freq / self.ladder.fund as i64).rem_euclid(self.m as i64) as usize
    }
}

/// Builds the standard ladder for `n_qubits` and its sample grid.
pub fn build_ladder(n_qubits: usize, oversample: usize) -> Result<(FrequencyLadder, SampleGrid)> {
    let ladder = FrequencyLadder::standard(n_qubits)?;
    let grid = SampleGrid::new(ladder.clone(), oversample)?;
    Ok((ladder, grid))
}

pub fn build_custom_ladder(
    freqs: &[u64],
    oversample: usize,
) -> Result<(FrequencyLadder, SampleGrid)> {
    let ladder = FrequencyLadder::custom(freqs.to_vec())?;
    let grid = SampleGrid::new(ladder.clone(), oversample)?;
    Ok((ladder, grid))
}
