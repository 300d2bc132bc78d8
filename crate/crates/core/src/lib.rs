//! Quantum computation on harmonic-function waveforms.
//!
//! An `N`-qubit register is a single complex function of time, sampled on a
//! uniform grid. Qubit `n` is represented by `sin(ω_n t)` (`|0⟩`) and
//! `cos(ω_n t)` (`|1⟩`) with integer frequencies `ω_n`, and the `2^N`
//! products of these functions play the role of computational basis states.
//! Gates act by *addressing* a qubit: isolating the coefficient functions of
//! `cos(ω_n t)` and `sin(ω_n t)` with a generator/projector inner product.

pub mod addressing;
pub mod basis;
pub mod circuit;
pub mod cli;
pub mod error;
mod fft;
pub mod gates;
pub mod ladder;
pub mod measurement;
pub mod oracle;
pub mod shor;
pub mod truncation;
pub mod waveform;

pub use basis::{analyze, synthesize, CoefficientVector};
pub use error::{Error, Result};
pub use ladder::{build_custom_ladder, build_ladder, FrequencyLadder, SampleGrid};
pub use waveform::{Basis, Interval, Waveform};

pub use num_complex::Complex64;
