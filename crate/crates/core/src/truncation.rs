//! Truncated-interval addressing: error `δ(τ)` and probability ratio `r(τ)`
//! when the projector integrals stop at `τ < π/fund`.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::addressing::{address_truncated, recombine};
use crate::basis::synthesize;
use crate::basis::CoefficientVector;
use crate::error::{Error, Result};
use crate::ladder::{build_ladder, SampleGrid};
use crate::waveform::{Interval, Waveform};

pub const DEFAULT_SWEEP_POINTS: usize = 64;
pub const KNEE_THRESHOLD: f64 = 1e-3;
const KNEE_BISECTIONS: usize = 40;

/// `Π cos(ω_n t) + Π sin(ω_n t)` over all qubits of the grid, normalized.
pub fn ghz_like_state(grid: &SampleGrid) -> Result<Waveform> {
    let n_e = grid.n_qubits();
    if !(2..=10).contains(&n_e) {
        return Err(Error::Size(format!("entangled qubit count must be in 2..=10, got {n_e}")));
    }
    let mut c = CoefficientVector::zeros(n_e);
    c.amps_mut()[0] = Complex64::new(1.0, 0.0);
    c.amps_mut()[(1 << n_e) - 1] = Complex64::new(1.0, 0.0);
    synthesize(&c, grid)?.normalized()
}

/// `count` log-spaced points from `dt` up to (not including) `π/fund`, then `π/fund` itself.
pub fn default_taus(grid: &SampleGrid, count: usize) -> Vec<f64> {
    let (lo, hi) = (grid.dt(), grid.half_period());
    let mut taus: Vec<f64> = (0..count)
        .map(|i| lo * (hi / lo).powf(i as f64 / count as f64))
        .collect();
    taus.push(hi);
    taus
}

fn weighted_norm_sqr(samples: &[Complex64], weights: &[f64]) -> f64 {
    weights
        .iter()
        .zip(samples)
        .map(|(&w, z)| z.norm_sqr() * w)
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    Delta,
    Ratio,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationSeries {
    pub n_entangled: usize,
    pub qubit: usize,
    pub kind: SeriesKind,
    /// Exact-addressing limit `π/fund`.
    pub half_period: f64,
    pub taus: Vec<f64>,
    /// `None` where the ratio's denominator vanishes.
    pub values: Vec<Option<f64>>,
}

impl TruncationSeries {
    pub fn last(&self) -> Option<f64> {
        self.values.last().copied().flatten()
    }
}

/// Rows `ne,tau_over_full,value`; missing values are left empty.
pub fn series_to_csv(series: &[TruncationSeries]) -> String {
    let mut out = String::from("ne,tau_over_full,value\n");
    for s in series {
        for (tau, v) in s.taus.iter().zip(&s.values) {
            let v = v.map(|v| format!("{v:.17e}")).unwrap_or_default();
            writeln!(out, "{},{:.17e},{v}", s.n_entangled, tau / s.half_period).unwrap();
        }
    }
    out
}

/// The test state on a standard ladder of `n_e` qubits, with qubit `n` addressed.
#[derive(Debug, Clone)]
pub struct TruncationStudy {
    psi: Waveform,
    qubit: usize,
}

impl TruncationStudy {
    pub fn new(n_e: usize, qubit: usize, oversample: usize) -> Result<Self> {
        let (ladder, grid) = build_ladder(n_e, oversample)?;
        ladder.check_qubit(qubit)?;
        Ok(Self {
            psi: ghz_like_state(&grid)?,
            qubit,
        })
    }

    pub fn state(&self) -> &Waveform {
        &self.psi
    }

    pub fn grid(&self) -> &SampleGrid {
        self.psi.grid()
    }

    pub fn n_entangled(&self) -> usize {
        self.psi.n_qubits()
    }

    /// Squared deviation over `[0, τ)` between the normalized state and the
    /// normalized recombination of the truncated branches.
    pub fn delta(&self, tau: f64) -> Result<f64> {
        let pair = address_truncated(&self.psi, self.qubit, tau)?;
        let rebuilt = recombine(&pair)?;
        let w = Interval::Truncated(tau.min(self.grid().half_period())).weights(self.grid())?;
        let np = weighted_norm_sqr(self.psi.samples(), &w).sqrt();
        let nr = weighted_norm_sqr(rebuilt.samples(), &w).sqrt();
        if !(np > 0.0 && nr > 0.0) {
            return Err(Error::Domain(format!("null truncated waveform at τ = {tau}")));
        }
        Ok(w
            .iter()
            .zip(self.psi.samples().iter().zip(rebuilt.samples()))
            .map(|(&wk, (p, r))| (p / np - r / nr).norm_sqr() * wk)
            .sum())
    }

    /// `∫|F_s(τ,·)|² / ∫|F_c(τ,·)|²` over `[0, τ)`; `None` if the denominator vanishes.
    pub fn ratio(&self, tau: f64) -> Result<Option<f64>> {
        let pair = address_truncated(&self.psi, self.qubit, tau)?;
        let w = Interval::Truncated(tau.min(self.grid().half_period())).weights(self.grid())?;
        let num = weighted_norm_sqr(pair.f_s.samples(), &w);
        let den = weighted_norm_sqr(pair.f_c.samples(), &w);
        Ok((den > f64::MIN_POSITIVE).then(|| num / den))
    }

    fn series(&self, kind: SeriesKind, taus: &[f64]) -> Result<TruncationSeries> {
        let half = self.grid().half_period();
        if taus.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("taus must be strictly increasing".into()));
        }
        let values = taus
            .iter()
            .map(|&t| match kind {
                SeriesKind::Delta => self.delta(t).map(Some),
                SeriesKind::Ratio => self.ratio(t),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TruncationSeries {
            n_entangled: self.n_entangled(),
            qubit: self.qubit,
            kind,
            half_period: half,
            taus: taus.to_vec(),
            values,
        })
    }

    pub fn delta_curve(&self, taus: &[f64]) -> Result<TruncationSeries> {
        self.series(SeriesKind::Delta, taus)
    }

    pub fn ratio_curve(&self, taus: &[f64]) -> Result<TruncationSeries> {
        self.series(SeriesKind::Ratio, taus)
    }

    /// Smallest `τ*` such that `δ < threshold` at every sweep point from `τ*`
    /// on, refined by bisection inside the bracketing sweep interval.
    pub fn knee(&self, delta: &TruncationSeries, threshold: f64) -> Result<Option<Knee>> {
        let last_bad = delta
            .values
            .iter()
            .rposition(|v| v.is_none_or(|d| d >= threshold));
        let tau = match last_bad {
            None => delta.taus[0],
            Some(i) if i + 1 == delta.taus.len() => return Ok(None),
            Some(i) => {
                let (mut lo, mut hi) = (delta.taus[i], delta.taus[i + 1]);
                for _ in 0..KNEE_BISECTIONS {
                    let mid = 0.5 * (lo + hi);
                    if self.delta(mid)? < threshold {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                hi
            }
        };
        let top = self.grid().ladder().freqs()[0] as f64;
        Ok(Some(Knee {
            n_entangled: self.n_entangled(),
            tau,
            tau_over_full: tau / delta.half_period,
            tau_physical: tau * top,
        }))
    }
}

/// Knee location in ladder units, as a fraction of `π/fund`, and in units of
/// `1/ω_1` (top qubit frequency held fixed across register sizes).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Knee {
    pub n_entangled: usize,
    pub tau: f64,
    pub tau_over_full: f64,
    pub tau_physical: f64,
}

pub fn delta_curve(n_e: usize, qubit: usize, taus: &[f64]) -> Result<TruncationSeries> {
    TruncationStudy::new(n_e, qubit, 2)?.delta_curve(taus)
}

pub fn ratio_curve(n_e: usize, qubit: usize, taus: &[f64]) -> Result<TruncationSeries> {
    TruncationStudy::new(n_e, qubit, 2)?.ratio_curve(taus)
}
