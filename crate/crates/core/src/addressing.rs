//! Qubit addressing: isolating `F_c^{(n)}` and `F_s^{(n)}` in
//! `Ψ(t) = F_c(t) cos(ω_n t) + F_s(t) sin(ω_n t)`.
//!
//! The generator `G(x,t) = Π_{i≠n} cos(ω_i (t - x))` equals
//! `Σ_k H'_k(t) H'_k(x)` over the product basis of the other qubits, so
//! integrating `cos(ω_n t) G(x,t) Ψ(t)` over `t` moves the functional form of
//! `F_c` onto `x`. The kernel only depends on `t - x`, which makes the
//! full-period integral a circular cross-correlation.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft;
use crate::ladder::SampleGrid;
use crate::waveform::{Interval, Waveform};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AddressMethod {
    /// Double-loop quadrature over `[0, π/fund)`.
    Direct,
    /// FFT cross-correlation over the full period.
    #[default]
    Fast,
}

/// `K(u) = Π_{i≠n} cos(ω_i u)` sampled at the grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorKernel {
    pub qubit: usize,
    pub samples: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AddressedPair {
    pub qubit: usize,
    /// Coefficient function of `cos(ω_n t)`.
    pub f_c: Waveform,
    /// Coefficient function of `sin(ω_n t)`.
    pub f_s: Waveform,
}

pub fn generator_kernel(grid: &SampleGrid, n: usize) -> Result<GeneratorKernel> {
    let all: Vec<usize> = (1..=grid.n_qubits()).collect();
    kernel_within(grid, n, &all)
}

fn kernel_within(grid: &SampleGrid, n: usize, active: &[usize]) -> Result<GeneratorKernel> {
    grid.ladder().check_qubit(n)?;
    let mut samples = vec![1.0; grid.len()];
    for &i in active.iter().filter(|&&i| i != n) {
        let (cos, _) = grid.qubit_tables(i);
        for (s, c) in samples.iter_mut().zip(cos) {
            *s *= c;
        }
    }
    Ok(GeneratorKernel { qubit: n, samples })
}

fn check_active(grid: &SampleGrid, n: usize, active: &[usize]) -> Result<()> {
    let ladder = grid.ladder();
    ladder.require_unique()?;
    ladder.check_qubit(n)?;
    for &i in active {
        ladder.check_qubit(i)?;
    }
    if !active.contains(&n) {
        return Err(Error::Protocol(format!(
            "qubit {n} is not among the active qubits {active:?}"
        )));
    }
    let mut sorted = active.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != active.len() {
        return Err(Error::Protocol(format!("duplicate active qubits {active:?}")));
    }
    Ok(())
}

/// Addresses qubit `n` of a function that lives in the span of the product
/// basis over `active` qubits only (all other qubits already factored out).
/// `active` must contain `n`.
pub fn address_within(
    psi: &Waveform,
    n: usize,
    active: &[usize],
    method: AddressMethod,
) -> Result<AddressedPair> {
    let grid = psi.grid();
    check_active(grid, n, active)?;
    let kernel = kernel_within(grid, n, active)?;
    let (cos, sin) = grid.qubit_tables(n);
    let dim = (1u64 << active.len()) as f64;
    let fund = grid.ladder().fund() as f64;
    let (f_c, f_s) = match method {
        AddressMethod::Direct => {
            let weights = Interval::Half.weights(grid)?;
            let pref = dim * fund / PI;
            (
                project_direct(psi, &kernel, &cos, &weights, pref),
                project_direct(psi, &kernel, &sin, &weights, pref),
            )
        }
        AddressMethod::Fast => {
            // Integrand t-frequencies are even multiples of fund, so the full
            // period gives twice the half-period value.
            let pref = dim / 2.0 * fund / PI * grid.dt();
            let mut kf: Vec<Complex64> =
                kernel.samples.iter().map(|&k| Complex64::new(k, 0.0)).collect();
            fft::forward(&mut kf);
            (
                project_fast(psi, &kf, &cos, pref),
                project_fast(psi, &kf, &sin, pref),
            )
        }
    };
    Ok(AddressedPair {
        qubit: n,
        f_c: Waveform::from_parts(grid.clone(), f_c),
        f_s: Waveform::from_parts(grid.clone(), f_s),
    })
}

fn project_direct(
    psi: &Waveform,
    kernel: &GeneratorKernel,
    basis: &[f64],
    weights: &[f64],
    pref: f64,
) -> Vec<Complex64> {
    let m = psi.grid().len();
    let integrand: Vec<Complex64> = weights
        .iter()
        .enumerate()
        .map(|(k, &w)| psi.samples()[k] * basis[k] * w)
        .collect();
    (0..m)
        .map(|j| {
            let acc: Complex64 = integrand
                .iter()
                .enumerate()
                .map(|(k, &g)| g * kernel.samples[(k + m - j) % m])
                .sum();
            acc * pref
        })
        .collect()
}

fn project_fast(psi: &Waveform, kernel_hat: &[Complex64], basis: &[f64], pref: f64) -> Vec<Complex64> {
    let m = psi.grid().len();
    let mut g: Vec<Complex64> = psi
        .samples()
        .iter()
        .zip(basis)
        .map(|(&z, &b)| z * b)
        .collect();
    fft::forward(&mut g);
    for (x, k) in g.iter_mut().zip(kernel_hat) {
        *x *= k.conj();
    }
    fft::inverse(&mut g);
    let scale = pref / m as f64;
    g.iter_mut().for_each(|x| *x *= scale);
    g
}

/// Exact addressing by direct quadrature of the projector integral over `[0, π/fund)`.
pub fn address_direct(psi: &Waveform, n: usize) -> Result<AddressedPair> {
    let all: Vec<usize> = (1..=psi.n_qubits()).collect();
    address_within(psi, n, &all, AddressMethod::Direct)
}

/// Same result as [`address_direct`] in `O(m log m)`.
pub fn address_fast(psi: &Waveform, n: usize) -> Result<AddressedPair> {
    let all: Vec<usize> = (1..=psi.n_qubits()).collect();
    address_within(psi, n, &all, AddressMethod::Fast)
}

pub fn address(psi: &Waveform, n: usize, method: AddressMethod) -> Result<AddressedPair> {
    let all: Vec<usize> = (1..=psi.n_qubits()).collect();
    address_within(psi, n, &all, method)
}

/// Projector integrals truncated to `[0, τ)`, `0 < τ ≤ π/fund`, with the
/// exact-addressing prefactor. At `τ = π/fund` this is [`address_direct`].
pub fn address_truncated(psi: &Waveform, n: usize, tau: f64) -> Result<AddressedPair> {
    let grid = psi.grid();
    let all: Vec<usize> = (1..=psi.n_qubits()).collect();
    check_active(grid, n, &all)?;
    let half = grid.half_period();
    if !(tau > 0.0 && tau <= half * (1.0 + 1e-12)) {
        return Err(Error::Domain(format!(
            "truncation limit {tau} outside (0, {half}]"
        )));
    }
    let weights = Interval::Truncated(tau.min(half)).weights(grid)?;
    let kernel = kernel_within(grid, n, &all)?;
    let (cos, sin) = grid.qubit_tables(n);
    let pref = (1u64 << all.len()) as f64 * grid.ladder().fund() as f64 / PI;
    Ok(AddressedPair {
        qubit: n,
        f_c: Waveform::from_parts(grid.clone(), project_direct(psi, &kernel, &cos, &weights, pref)),
        f_s: Waveform::from_parts(grid.clone(), project_direct(psi, &kernel, &sin, &weights, pref)),
    })
}

/// `f_c · cos(ω_n t) + f_s · sin(ω_n t)`.
pub fn recombine(pair: &AddressedPair) -> Result<Waveform> {
    pair.f_c.check_same_grid(&pair.f_s)?;
    let grid = pair.f_c.grid();
    grid.ladder().check_qubit(pair.qubit)?;
    let (cos, sin) = grid.qubit_tables(pair.qubit);
    Ok(&pair.f_c.mul_real(&cos) + &pair.f_s.mul_real(&sin))
}
