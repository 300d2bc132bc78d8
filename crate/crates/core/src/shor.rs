//! Period finding and factoring on a waveform register.
//!
//! Register 1 (`n1` qubits, labels `1..=n1`) holds `x`, register 2 (`n2`
//! qubits, labels `n1+1..=n1+n2`) holds `a^x mod 𝖭`; both are read most
//! significant qubit first.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::basis::{analyze, synthesize, CoefficientVector};
use crate::circuit::{build_qft, run_circuit_with, RunOptions};
use crate::error::{Error, Result};
use crate::gates::{apply_single, Unitary2};
use crate::ladder::{build_ladder, gcd, SampleGrid};
use crate::measurement::{
    histogram, measure_sequence, remove_qubit, MeasureMode, MeasureOrder, MeasurementRecord,
};
use crate::waveform::Waveform;

/// Smallest `k` with `2^k >= x`.
fn ceil_log2(x: u64) -> usize {
    (64 - (x - 1).leading_zeros()) as usize
}

pub fn pow_mod(base: u64, mut exp: u64, modulus: u64) -> u64 {
    let m = modulus as u128;
    let mut b = base as u128 % m;
    let mut acc = 1u128 % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegisterSizes {
    Quantum { n1: usize, n2: usize },
    /// Even modulus: 2 is a factor, nothing to simulate.
    Trivial { factor: u64 },
}

/// `n1 = ⌈log2 𝖭²⌉`, `n2 = ⌈log2 𝖭⌉`.
pub fn register_sizes(n: u64) -> Result<RegisterSizes> {
    if n < 3 {
        return Err(Error::Domain(format!("modulus must be at least 3, got {n}")));
    }
    if n % 2 == 0 {
        return Ok(RegisterSizes::Trivial { factor: 2 });
    }
    if is_prime(n) {
        return Err(Error::Domain(format!("{n} is prime")));
    }
    if n > 1 << 31 {
        return Err(Error::Domain(format!("modulus {n} too large")));
    }
    Ok(RegisterSizes::Quantum {
        n1: ceil_log2(n * n),
        n2: ceil_log2(n),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShorMode {
    #[default]
    Qft,
    Simplified,
}

impl std::str::FromStr for ShorMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "qft" => Ok(Self::Qft),
            "simplified" => Ok(Self::Simplified),
            _ => Err(Error::Domain(format!("unknown mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShorStatus {
    Success,
    /// Odd period or `a^{p/2} ≡ -1`: try another base.
    Retry,
    InferenceFailed,
    /// Even modulus, factored without simulation.
    Trivial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorOutcome {
    Factors(u64, u64),
    Retry,
}

/// `gcd(a^{p/2} ± 1, 𝖭)`, ordered.
pub fn factors_from_period(a: u64, p: u64, n: u64) -> FactorOutcome {
    if p == 0 || p % 2 == 1 {
        return FactorOutcome::Retry;
    }
    let h = pow_mod(a, p / 2, n);
    if h == n - 1 {
        return FactorOutcome::Retry;
    }
    let f1 = gcd((h + n - 1) % n, n);
    let f2 = gcd((h + 1) % n, n);
    for f in [f1, f2] {
        if f > 1 && f < n {
            let (lo, hi) = (f.min(n / f), f.max(n / f));
            return FactorOutcome::Factors(lo, hi);
        }
    }
    FactorOutcome::Retry
}

/// Denominators of the continued-fraction convergents of `num/den` not exceeding `max_den`.
pub fn convergent_denominators(num: u64, den: u64, max_den: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let (mut h0, mut h1) = (0u64, 1u64);
    let (mut k0, mut k1) = (1u64, 0u64);
    let (mut p, mut q) = (num, den);
    while q != 0 {
        let t = p / q;
        let (h, k) = (t * h1 + h0, t * k1 + k0);
        if k > max_den {
            break;
        }
        out.push(k);
        (h0, h1, k0, k1) = (h1, h, k1, k);
        (p, q) = (q, p % q);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub x: usize,
    pub probability: f64,
}

/// Probability floor for outcomes used by [`infer_period`].
pub const INFER_MIN_PROB: f64 = 0.01;
pub const INFER_MAX_OUTCOMES: usize = 32;

/// Period from the dominant outcomes of a post-QFT histogram over `n1` qubits.
///
/// Convergent denominators of every `x̃ / 2^{n1}` are pooled, closed under
/// lcm (up to `𝖭`), and the smallest candidate with `a^p ≡ 1 (mod 𝖭)` wins.
pub fn infer_period(probabilities: &[f64], n1: usize, n: u64, a: u64) -> Option<u64> {
    let size = 1u64 << n1;
    if probabilities.len() as u64 != size {
        return None;
    }
    let mut order: Vec<usize> = (0..probabilities.len()).collect();
    order.sort_by(|&i, &j| probabilities[j].total_cmp(&probabilities[i]).then(i.cmp(&j)));
    let mut dens: Vec<u64> = vec![1];
    for &x in order
        .iter()
        .filter(|&&x| x != 0 && probabilities[x] >= INFER_MIN_PROB)
        .take(INFER_MAX_OUTCOMES)
    {
        for k in convergent_denominators(x as u64, size, n) {
            if !dens.contains(&k) {
                dens.push(k);
            }
        }
    }
    loop {
        let mut grew = false;
        for i in 0..dens.len() {
            for j in 0..i {
                let l = lcm(dens[i], dens[j]);
                if l <= n && !dens.contains(&l) {
                    dens.push(l);
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
    }
    dens.sort_unstable();
    dens.into_iter().find(|&p| pow_mod(a, p, n) == 1)
}

/// `Σ_x |x⟩|a^x mod 𝖭⟩` over all `2^{n1}` values of register 1, normalized.
pub fn modexp_entangle(grid: &SampleGrid, a: u64, n: u64, n1: usize) -> Result<Waveform> {
    let total = grid.n_qubits();
    let n2 = check_registers(total, n1, n)?;
    let mut c = CoefficientVector::zeros(total);
    let amp = Complex64::new((1.0 / (1u64 << n1) as f64).sqrt(), 0.0);
    for x in 0..1u64 << n1 {
        let y = pow_mod(a, x, n);
        c.amps_mut()[((x as usize) << n2) | y as usize] = amp;
    }
    synthesize(&c, grid)
}

/// `|x⟩|y⟩ → |x⟩|y ⊕ (a^x mod 𝖭)⟩`, applied to the product-basis amplitudes.
pub fn modexp_apply(psi: &Waveform, a: u64, n: u64, n1: usize) -> Result<Waveform> {
    let total = psi.n_qubits();
    let n2 = check_registers(total, n1, n)?;
    let c = analyze(psi)?;
    let mut out = CoefficientVector::zeros(total);
    let mask = (1usize << n2) - 1;
    for (j, &amp) in c.amps().iter().enumerate() {
        let x = (j >> n2) as u64;
        let y = (j & mask) ^ pow_mod(a, x, n) as usize;
        out.amps_mut()[(j & !mask) | y] = amp;
    }
    synthesize(&out, psi.grid())
}

fn check_registers(total: usize, n1: usize, n: u64) -> Result<usize> {
    if n1 == 0 || n1 >= total {
        return Err(Error::Size(format!("register 1 of {n1} qubits does not fit {total}")));
    }
    let n2 = total - n1;
    if n > 1 << n2 {
        return Err(Error::Size(format!("register 2 of {n2} qubits cannot hold values mod {n}")));
    }
    Ok(n2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShorConfig {
    pub n: u64,
    pub a: u64,
    pub seed: u64,
    pub mode: ShorMode,
    pub measure_mode: MeasureMode,
    pub measure_order: MeasureOrder,
    pub oversample: usize,
}

impl ShorConfig {
    pub fn new(n: u64, a: u64, seed: u64, mode: ShorMode) -> Self {
        Self {
            n,
            a,
            seed,
            mode,
            measure_mode: MeasureMode::MaxRule,
            measure_order: MeasureOrder::MsbFirst,
            oversample: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShorReport {
    pub n_to_factor: u64,
    pub a: u64,
    pub mode: ShorMode,
    pub seed: u64,
    pub measure_mode: MeasureMode,
    pub measure_order: MeasureOrder,
    pub n1: usize,
    pub n2: usize,
    pub total_qubits: usize,
    pub second_register_value: Option<u64>,
    pub second_register_measurements: Vec<MeasurementRecord>,
    /// Register-1 values with nonzero amplitude after the register-2 measurement.
    pub conditional_support: Vec<u64>,
    /// Every support value satisfies `a^x ≡ v (mod 𝖭)`.
    pub support_consistent: bool,
    pub histogram: Vec<f64>,
    pub top_outcomes: Vec<Outcome>,
    pub period: Option<u64>,
    /// `κ · 2^{n1} / p` for `κ = 0..p`.
    pub peak_centers: Vec<f64>,
    /// Histogram mass with `|x - center| <= 1` (circular), qft mode.
    pub peak_mass: Option<f64>,
    /// Same with windows around the nearest integer to each center.
    pub peak_mass_nearest: Option<f64>,
    /// Common spacing of the support, simplified mode.
    pub support_spacing: Option<u64>,
    /// `(max - min) / max` over support heights, simplified mode.
    pub support_height_spread: Option<f64>,
    pub factors: Option<[u64; 2]>,
    pub status: ShorStatus,
    pub message: String,
}

impl ShorReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// CSV with columns `x,probability`.
    pub fn histogram_csv(&self) -> String {
        let mut out = String::from("x,probability\n");
        for (x, p) in self.histogram.iter().enumerate() {
            writeln!(out, "{x},{p:.17e}").unwrap();
        }
        out
    }
}

/// Support threshold on amplitude magnitude.
pub const SUPPORT_TOL: f64 = 1e-8;

pub fn peak_centers(n1: usize, p: u64) -> Vec<f64> {
    (0..p).map(|k| k as f64 * (1u64 << n1) as f64 / p as f64).collect()
}

/// Mass within distance 1 of any center on the circle of `probs.len()` points.
pub fn mass_near_centers(probs: &[f64], centers: &[f64], nearest: bool) -> f64 {
    let size = probs.len() as f64;
    probs
        .iter()
        .enumerate()
        .filter(|&(x, _)| {
            centers.iter().any(|&c| {
                let c = if nearest { c.round() } else { c };
                let d = (x as f64 - c).rem_euclid(size);
                d.min(size - d) <= 1.0 + 1e-12
            })
        })
        .map(|(_, p)| p)
        .sum()
}

fn trivial_report(cfg: &ShorConfig, factor: u64) -> ShorReport {
    ShorReport {
        n_to_factor: cfg.n,
        a: cfg.a,
        mode: cfg.mode,
        seed: cfg.seed,
        measure_mode: cfg.measure_mode,
        measure_order: cfg.measure_order,
        n1: 0,
        n2: 0,
        total_qubits: 0,
        second_register_value: None,
        second_register_measurements: Vec::new(),
        conditional_support: Vec::new(),
        support_consistent: true,
        histogram: Vec::new(),
        top_outcomes: Vec::new(),
        period: None,
        peak_centers: Vec::new(),
        peak_mass: None,
        peak_mass_nearest: None,
        support_spacing: None,
        support_height_spread: None,
        factors: Some([factor, cfg.n / factor]),
        status: ShorStatus::Trivial,
        message: format!("{} is even", cfg.n),
    }
}

/// Full pipeline in the configured mode.
pub fn run(cfg: &ShorConfig) -> Result<ShorReport> {
    let (n1, n2) = match register_sizes(cfg.n)? {
        RegisterSizes::Trivial { factor } => return Ok(trivial_report(cfg, factor)),
        RegisterSizes::Quantum { n1, n2 } => match cfg.mode {
            ShorMode::Qft => (n1, n2),
            ShorMode::Simplified => (n2, n2),
        },
    };
    if cfg.a < 2 || cfg.a >= cfg.n {
        return Err(Error::Domain(format!("base must be in 2..{}, got {}", cfg.n, cfg.a)));
    }
    if gcd(cfg.a, cfg.n) != 1 {
        return Err(Error::Domain(format!(
            "gcd({}, {}) = {} is already a factor",
            cfg.a,
            cfg.n,
            gcd(cfg.a, cfg.n)
        )));
    }
    let total = n1 + n2;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let (_, grid) = build_ladder(total, cfg.oversample)?;
    let mut psi = synthesize(&CoefficientVector::basis_state(total, 0), &grid)?;
    for q in 1..=n1 {
        psi = apply_single(&psi, q, &Unitary2::hadamard())?;
    }
    let psi = modexp_apply(&psi, cfg.a, cfg.n, n1)?;

    let mut reg2: Vec<usize> = (n1 + 1..=total).collect();
    if cfg.measure_order == MeasureOrder::LsbFirst {
        reg2.reverse();
    }
    let (records, mut state) = measure_sequence(&psi, &reg2, cfg.measure_mode, &mut rng)?;
    let v = records.iter().fold(0u64, |acc, r| {
        acc | ((r.outcome.bit() as u64) << (total - r.qubit))
    });
    let mut by_label: Vec<&MeasurementRecord> = records.iter().collect();
    by_label.sort_by_key(|r| std::cmp::Reverse(r.qubit));
    for r in by_label {
        state = remove_qubit(&state, r.qubit, r.outcome)?;
    }

    let reg1: Vec<usize> = (1..=n1).collect();
    let cond = analyze(&state)?;
    let conditional_support: Vec<u64> = cond
        .amps()
        .iter()
        .enumerate()
        .filter(|(_, z)| z.norm() > SUPPORT_TOL)
        .map(|(x, _)| x as u64)
        .collect();
    let support_consistent = conditional_support
        .iter()
        .all(|&x| pow_mod(cfg.a, x, cfg.n) == v);

    let mut report = ShorReport {
        n_to_factor: cfg.n,
        a: cfg.a,
        mode: cfg.mode,
        seed: cfg.seed,
        measure_mode: cfg.measure_mode,
        measure_order: cfg.measure_order,
        n1,
        n2,
        total_qubits: total,
        second_register_value: Some(v),
        second_register_measurements: records,
        conditional_support,
        support_consistent,
        histogram: Vec::new(),
        top_outcomes: Vec::new(),
        period: None,
        peak_centers: Vec::new(),
        peak_mass: None,
        peak_mass_nearest: None,
        support_spacing: None,
        support_height_spread: None,
        factors: None,
        status: ShorStatus::InferenceFailed,
        message: String::new(),
    };

    let hist = match cfg.mode {
        ShorMode::Qft => {
            let qft = build_qft(&reg1)?;
            let opts = RunOptions {
                mode: cfg.measure_mode,
                ..Default::default()
            };
            let (out, _) = run_circuit_with(&state, &qft, &mut rng, &opts)?;
            histogram(&out, &qft.output_order)?
        }
        ShorMode::Simplified => histogram(&state, &reg1)?,
    };
    report.histogram = hist.probabilities.clone();
    report.top_outcomes = hist
        .ranked()
        .into_iter()
        .take(12)
        .map(|x| Outcome {
            x,
            probability: hist.probabilities[x],
        })
        .collect();

    let period = match cfg.mode {
        ShorMode::Qft => infer_period(&report.histogram, n1, cfg.n, cfg.a),
        ShorMode::Simplified => {
            let support: Vec<usize> = (0..hist.len())
                .filter(|&x| hist.probabilities[x] > SUPPORT_TOL * SUPPORT_TOL)
                .collect();
            let spacing = support.windows(2).map(|w| (w[1] - w[0]) as u64).fold(0, gcd);
            let heights: Vec<f64> = support.iter().map(|&x| hist.probabilities[x]).collect();
            let hi = heights.iter().copied().fold(0.0, f64::max);
            let lo = heights.iter().copied().fold(f64::INFINITY, f64::min);
            report.support_height_spread = Some(if hi > 0.0 { (hi - lo) / hi } else { 0.0 });
            report.support_spacing = (spacing > 0).then_some(spacing);
            report
                .support_spacing
                .filter(|&p| pow_mod(cfg.a, p, cfg.n) == 1)
        }
    };
    report.period = period;

    match period {
        None => {
            report.message = "no candidate period satisfies a^p = 1 (mod N)".into();
        }
        Some(p) => {
            report.peak_centers = peak_centers(n1, p);
            if cfg.mode == ShorMode::Qft {
                report.peak_mass = Some(mass_near_centers(&report.histogram, &report.peak_centers, false));
                report.peak_mass_nearest = Some(mass_near_centers(&report.histogram, &report.peak_centers, true));
            }
            match factors_from_period(cfg.a, p, cfg.n) {
                FactorOutcome::Factors(f1, f2) => {
                    report.factors = Some([f1, f2]);
                    report.status = ShorStatus::Success;
                    report.message = format!("{} = {f1} x {f2}", cfg.n);
                }
                FactorOutcome::Retry => {
                    report.status = ShorStatus::Retry;
                    report.message = format!("period {p} gives no factor; retry with a different base");
                }
            }
        }
    }
    Ok(report)
}

pub fn run_shor(n: u64, a: u64, seed: u64, mode: ShorMode) -> Result<ShorReport> {
    run(&ShorConfig::new(n, a, seed, mode))
}

pub fn run_simplified(n: u64, a: u64, seed: u64) -> Result<ShorReport> {
    run(&ShorConfig::new(n, a, seed, ShorMode::Simplified))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(register_sizes(21).unwrap(), RegisterSizes::Quantum { n1: 9, n2: 5 });
        assert_eq!(register_sizes(15).unwrap(), RegisterSizes::Quantum { n1: 8, n2: 4 });
        assert_eq!(register_sizes(6).unwrap(), RegisterSizes::Trivial { factor: 2 });
        assert!(register_sizes(7).is_err());
        assert!(register_sizes(2).is_err());
    }

    #[test]
    fn modular_arithmetic() {
        assert_eq!(pow_mod(2, 6, 21), 1);
        assert_eq!(pow_mod(2, 0, 21), 1);
        assert_eq!(pow_mod(7, 4, 15), 1);
        assert_eq!(pow_mod(u64::MAX - 1, 3, u64::MAX), u64::MAX - 1);
        let orbit: Vec<u64> = (0..6).map(|x| pow_mod(2, x, 21)).collect();
        assert_eq!(orbit, vec![1, 2, 4, 8, 16, 11]);
    }

    #[test]
    fn factor_extraction() {
        assert_eq!(factors_from_period(2, 6, 21), FactorOutcome::Factors(3, 7));
        assert_eq!(factors_from_period(7, 4, 15), FactorOutcome::Factors(3, 5));
        assert_eq!(factors_from_period(2, 3, 21), FactorOutcome::Retry);
        // 14^(2/2) = 14 ≡ -1 mod 15
        assert_eq!(factors_from_period(14, 2, 15), FactorOutcome::Retry);
    }

    #[test]
    fn convergents() {
        assert_eq!(convergent_denominators(256, 512, 21), vec![1, 2]);
        assert_eq!(convergent_denominators(85, 512, 21), vec![1, 6]);
        assert_eq!(convergent_denominators(0, 512, 21), vec![1]);
    }

    fn synthetic(n1: usize, peaks: &[usize]) -> Vec<f64> {
        let mut h = vec![0.0; 1 << n1];
        for &x in peaks {
            h[x] = 1.0 / peaks.len() as f64;
        }
        h
    }

    #[test]
    fn period_inference() {
        // 256 alone suggests 2, which fails 2^2 mod 21
        assert_eq!(infer_period(&synthetic(9, &[256]), 9, 21, 2), None);
        assert_eq!(infer_period(&synthetic(9, &[256, 85]), 9, 21, 2), Some(6));
        assert_eq!(infer_period(&synthetic(9, &[0]), 9, 21, 2), None);
        let peaks: Vec<usize> = (0..8).map(|k| k * 64).collect();
        assert_eq!(infer_period(&synthetic(9, &peaks), 9, 255, 2), Some(8));
        assert_eq!(infer_period(&synthetic(9, &[256]), 8, 21, 2), None);
    }

    #[test]
    fn entangled_state() {
        let (_, grid) = build_ladder(9, 2).unwrap();
        let psi = modexp_entangle(&grid, 2, 21, 4).unwrap();
        let c = analyze(&psi).unwrap();
        assert!((c.amps()[1] - 0.25).norm() < 1e-12);
        assert!((c.amps()[(6 << 5) | 1] - 0.25).norm() < 1e-12);
        let reg2 = histogram(&psi, &[5, 6, 7, 8, 9]).unwrap();
        let support: Vec<usize> = (0..32).filter(|&y| reg2.probabilities[y] > 1e-12).collect();
        assert_eq!(support, vec![1, 2, 4, 8, 11, 16]);

        let mut h = synthesize(&CoefficientVector::basis_state(9, 0), &grid).unwrap();
        for q in 1..=4 {
            h = apply_single(&h, q, &Unitary2::hadamard()).unwrap();
        }
        let applied = modexp_apply(&h, 2, 21, 4).unwrap();
        assert!(applied.max_abs_diff(&psi).unwrap() < 1e-10);
        assert!(modexp_entangle(&grid, 2, 21, 5).is_err());
    }

    #[test]
    fn peak_windows() {
        let centers = peak_centers(9, 6);
        assert!((centers[1] - 85.333_333).abs() < 1e-5 && centers[3] == 256.0);
        let mut h = vec![0.0; 512];
        h[511] = 0.25;
        h[84] = 0.25;
        h[86] = 0.25;
        h[300] = 0.25;
        assert!((mass_near_centers(&h, &centers, false) - 0.5).abs() < 1e-12);
        assert!((mass_near_centers(&h, &centers, true) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn trivial_and_invalid() {
        let r = run_shor(6, 5, 0, ShorMode::Qft).unwrap();
        assert_eq!(r.status, ShorStatus::Trivial);
        assert_eq!(r.factors, Some([2, 3]));
        assert!(run_shor(21, 7, 0, ShorMode::Qft).is_err());
        assert!(run_shor(21, 1, 0, ShorMode::Qft).is_err());
        assert!(run_shor(13, 2, 0, ShorMode::Qft).is_err());
    }

    #[test]
    fn simplified_15_7() {
        let r = run_simplified(15, 7, 3).unwrap();
        assert_eq!(r.total_qubits, 8);
        assert_eq!(r.support_spacing, Some(4));
        assert_eq!(r.period, Some(4));
        assert_eq!(r.factors, Some([3, 5]));
        assert!(r.support_consistent);
    }
}
