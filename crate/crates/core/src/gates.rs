//! Single-qubit and controlled gates on waveform states.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::addressing::{address_within, AddressMethod};
use crate::error::{Error, Result};
use crate::waveform::Waveform;

pub const UNITARY_TOL: f64 = 1e-10;
pub const MAX_CONTROLS: usize = 3;

/// 2x2 matrix on the ordered basis `(|0⟩ ↔ sin, |1⟩ ↔ cos)`, stored row-major:
/// `U|0⟩ = u00|0⟩ + u10|1⟩`, `U|1⟩ = u01|0⟩ + u11|1⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Unitary2 {
    pub u00: Complex64,
    pub u01: Complex64,
    pub u10: Complex64,
    pub u11: Complex64,
}

impl Unitary2 {
    pub fn new(u00: Complex64, u01: Complex64, u10: Complex64, u11: Complex64) -> Result<Self> {
        let u = Self::linear(u00, u01, u10, u11);
        if !u.is_unitary(UNITARY_TOL) {
            return Err(Error::Gate(format!("matrix is not unitary: {u:?}")));
        }
        Ok(u)
    }

    /// Any linear map, unchecked.
    pub fn linear(u00: Complex64, u01: Complex64, u10: Complex64, u11: Complex64) -> Self {
        Self { u00, u01, u10, u11 }
    }

    pub fn identity() -> Self {
        let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        Self::linear(o, z, z, o)
    }

    pub fn hadamard() -> Self {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Self::linear(h, h, h, -h)
    }

    pub fn not() -> Self {
        let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        Self::linear(z, o, o, z)
    }

    /// `diag(1, e^{iθ})`: phase on the cos branch.
    pub fn phase(theta: f64) -> Self {
        let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        Self::linear(o, z, z, Complex64::from_polar(1.0, theta))
    }

    /// Target part of the controlled rotation `R_d` by `π/2^d`.
    pub fn rotation_rd(d: u32) -> Self {
        Self::phase(PI / 2f64.powi(d as i32))
    }

    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        [[self.u00, self.u01], [self.u10, self.u11]]
    }

    pub fn mul(&self, rhs: &Unitary2) -> Unitary2 {
        let (a, b) = (self.matrix(), rhs.matrix());
        let e = |i: usize, j: usize| a[i][0] * b[0][j] + a[i][1] * b[1][j];
        Self::linear(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }

    pub fn dagger(&self) -> Unitary2 {
        Self::linear(self.u00.conj(), self.u10.conj(), self.u01.conj(), self.u11.conj())
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let p = self.dagger().mul(self);
        (p.u00 - 1.0).norm() < tol && p.u01.norm() < tol && p.u10.norm() < tol && (p.u11 - 1.0).norm() < tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GateOptions {
    pub method: AddressMethod,
    /// Accept non-unitary 2x2 maps (for testing linearity).
    pub allow_non_unitary: bool,
}

fn check_gate(u: &Unitary2, opts: &GateOptions) -> Result<()> {
    if !opts.allow_non_unitary && !u.is_unitary(UNITARY_TOL) {
        return Err(Error::Gate(format!("matrix is not unitary: {u:?}")));
    }
    Ok(())
}

/// Applies `u` to qubit `n` of a function spanned by the `active` qubits.
fn transform_within(
    psi: &Waveform,
    n: usize,
    active: &[usize],
    u: &Unitary2,
    method: AddressMethod,
) -> Result<Waveform> {
    let pair = address_within(psi, n, active, method)?;
    let (cos, sin) = psi.grid().qubit_tables(n);
    let samples = pair
        .f_s
        .samples()
        .iter()
        .zip(pair.f_c.samples())
        .zip(cos.iter().zip(&sin))
        .map(|((&fs, &fc), (&c, &s))| {
            fs * (u.u00 * s + u.u10 * c) + fc * (u.u01 * s + u.u11 * c)
        })
        .collect();
    Ok(Waveform::from_parts(psi.grid().clone(), samples))
}

pub fn apply_single(psi: &Waveform, n: usize, u: &Unitary2) -> Result<Waveform> {
    apply_single_with(psi, n, u, &GateOptions::default())
}

pub fn apply_single_with(
    psi: &Waveform,
    n: usize,
    u: &Unitary2,
    opts: &GateOptions,
) -> Result<Waveform> {
    check_gate(u, opts)?;
    let all: Vec<usize> = (1..=psi.n_qubits()).collect();
    transform_within(psi, n, &all, u, opts.method)
}

/// Applies `u` to `target` on the branch where `control` is `|1⟩` (cos).
pub fn apply_controlled(
    psi: &Waveform,
    control: usize,
    target: usize,
    u: &Unitary2,
) -> Result<Waveform> {
    apply_multi_controlled_with(psi, &[control], target, u, &GateOptions::default())
}

pub fn apply_controlled_with(
    psi: &Waveform,
    control: usize,
    target: usize,
    u: &Unitary2,
    opts: &GateOptions,
) -> Result<Waveform> {
    apply_multi_controlled_with(psi, &[control], target, u, opts)
}

/// Controlled gate with up to [`MAX_CONTROLS`] controls, all required to be `|1⟩`.
///
/// Each control is addressed in turn and only its `F_c` branch is passed
/// down; the innermost branch has the target transformed, then every level
/// is rebuilt as `branch' · cos(ω_c t) + F_s^{(c)} · sin(ω_c t)`.
pub fn apply_multi_controlled_with(
    psi: &Waveform,
    controls: &[usize],
    target: usize,
    u: &Unitary2,
    opts: &GateOptions,
) -> Result<Waveform> {
    check_gate(u, opts)?;
    let ladder = psi.grid().ladder();
    ladder.check_qubit(target)?;
    if controls.is_empty() || controls.len() > MAX_CONTROLS {
        return Err(Error::Gate(format!(
            "between 1 and {MAX_CONTROLS} controls supported, got {}",
            controls.len()
        )));
    }
    for (i, &c) in controls.iter().enumerate() {
        ladder.check_qubit(c)?;
        if c == target || controls[..i].contains(&c) {
            return Err(Error::Gate(format!(
                "overlapping qubits: controls {controls:?}, target {target}"
            )));
        }
    }
    let all: Vec<usize> = (1..=psi.n_qubits()).collect();
    controlled_within(psi, controls, target, u, &all, opts.method)
}

fn controlled_within(
    psi: &Waveform,
    controls: &[usize],
    target: usize,
    u: &Unitary2,
    active: &[usize],
    method: AddressMethod,
) -> Result<Waveform> {
    let Some((&c, rest)) = controls.split_first() else {
        return transform_within(psi, target, active, u, method);
    };
    let pair = address_within(psi, c, active, method)?;
    let inner: Vec<usize> = active.iter().copied().filter(|&q| q != c).collect();
    let branch = controlled_within(&pair.f_c, rest, target, u, &inner, method)?;
    let (cos, sin) = psi.grid().qubit_tables(c);
    Ok(&branch.mul_real(&cos) + &pair.f_s.mul_real(&sin))
}
