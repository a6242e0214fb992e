//! Diagnostics extracted from density fields and their time series: the
//! probability profile, spin coherence, the reduced spin density and its
//! Shannon entropy, displacement moments, diffusion-coefficient fitting,
//! and profile kurtosis.
//!
//! Entropy is reported in bits (base-2 logarithm), which makes the
//! long-time entanglement entropy of the noiseless Hadamard walk come out
//! at its known value 0.872 and the maximally mixed spin state at exactly
//! one.

use crate::density::{basis_change_vector, default_initial_mode_u, Basis, DensityField};
use crate::grid::CircleGrid;
use crate::linalg::{Mat2, Mat4, Vec4, C64, ZERO};
use crate::noise::{averaged_r_u, NoiseConfig};
use crate::walk::{fourier_coin, CoinAngles};
use crate::{Error, Result};
use std::f64::consts::FRAC_1_SQRT_2;

/// A named real time series sampled at strictly increasing integer steps,
/// with free-form metadata carried into exports.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSeries {
    pub name: String,
    pub times: Vec<u64>,
    pub values: Vec<f64>,
    pub metadata: Vec<(String, String)>,
}

impl ObservableSeries {
    pub fn new(
        name: impl Into<String>,
        times: Vec<u64>,
        values: Vec<f64>,
        metadata: Vec<(String, String)>,
    ) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::InvalidConfig(format!(
                "series has {} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "series times must be strictly increasing".into(),
            ));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NumericalValidity(format!(
                "series value {bad} is not finite"
            )));
        }
        Ok(ObservableSeries {
            name: name.into(),
            times,
            values,
            metadata,
        })
    }

    /// From step-indexed values j = 0, 1, 2, ...
    pub fn from_values(
        name: impl Into<String>,
        values: Vec<f64>,
        metadata: Vec<(String, String)>,
    ) -> Result<Self> {
        let times = (0..values.len() as u64).collect();
        Self::new(name, times, values, metadata)
    }

    /// CSV export: `#key=value` comment lines, a `j,value` header, one row
    /// per sample. Floats print in shortest round-trip form, so identical
    /// series export byte-identically.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            out.push_str(&format!("#{k}={v}\n"));
        }
        out.push_str("j,value\n");
        for (t, v) in self.times.iter().zip(&self.values) {
            out.push_str(&format!("{t},{v}\n"));
        }
        out
    }

    /// The sub-series with j₁ ≤ j ≤ j₂.
    pub fn window(&self, j1: u64, j2: u64) -> (Vec<u64>, Vec<f64>) {
        let mut ts = Vec::new();
        let mut vs = Vec::new();
        for (t, v) in self.times.iter().zip(&self.values) {
            if *t >= j1 && *t <= j2 {
                ts.push(*t);
                vs.push(*v);
            }
        }
        (ts, vs)
    }
}

/// Trailing moving average over `window` consecutive samples; entry i of
/// the result averages values[i+1−window ..= i], so the output is shorter
/// by window−1.
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    if window == 0 || values.len() < window {
        return Vec::new();
    }
    let mut out = Vec::with_capacity(values.len() - window + 1);
    let mut acc: f64 = values[..window].iter().sum();
    out.push(acc / window as f64);
    for i in window..values.len() {
        acc += values[i] - values[i - window];
        out.push(acc / window as f64);
    }
    out
}

/// Site-occupation probabilities N_m = ρᴸᴸ_{m,m} + ρᴿᴿ_{m,m}.
pub fn probability_profile(rho: &DensityField) -> Result<Vec<f64>> {
    if rho.basis != Basis::V {
        return Err(Error::InvalidConfig(
            "probability profile needs the product-basis representation; convert first".into(),
        ));
    }
    let n = rho.grid.size();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let idx = i * n + i;
        let v = (rho.comp[0][idx] + rho.comp[3][idx]).re;
        if v < -1e-12 {
            return Err(Error::NumericalValidity(format!(
                "negative occupation {v} at site index {i}"
            )));
        }
        out.push(v);
    }
    Ok(out)
}

/// Spin coherence: the largest modulus of the LR density component over
/// all site pairs (m, m′).
pub fn spin_coherence(rho: &DensityField) -> Result<f64> {
    if rho.basis != Basis::V {
        return Err(Error::InvalidConfig(
            "spin coherence needs the product-basis representation; convert first".into(),
        ));
    }
    Ok(rho.comp[1].iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Reduced spin density ρ_r = Σ_m ρ_{m,m}, a 2×2 matrix on the coin space.
pub fn reduced_spin_density(rho: &DensityField) -> Result<Mat2> {
    if rho.basis != Basis::V {
        return Err(Error::InvalidConfig(
            "spin reduction needs the product-basis representation; convert first".into(),
        ));
    }
    let n = rho.grid.size();
    let mut acc = [ZERO; 4];
    for i in 0..n {
        let idx = i * n + i;
        for c in 0..4 {
            acc[c] += rho.comp[c][idx];
        }
    }
    Ok(Mat2 {
        e: [[acc[0], acc[1]], [acc[2], acc[3]]],
    })
}

/// Shannon entropy −Σ λᵢ log₂ λᵢ of a Hermitian, unit-trace, positive
/// semidefinite 2×2 matrix, in bits; 0·log 0 reads as 0.
pub fn shannon_entropy(rho_r: &Mat2) -> Result<f64> {
    let herm_defect = (rho_r.e[0][1] - rho_r.e[1][0].conj()).norm()
        + rho_r.e[0][0].im.abs()
        + rho_r.e[1][1].im.abs();
    if herm_defect > 1e-10 {
        return Err(Error::InvalidConfig(format!(
            "spin density is not Hermitian (defect {herm_defect})"
        )));
    }
    let trace = rho_r.e[0][0].re + rho_r.e[1][1].re;
    if (trace - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidConfig(format!(
            "spin density trace {trace} is not one"
        )));
    }
    let mut s = 0.0;
    for lambda in rho_r.hermitian_eigenvalues() {
        if lambda < -1e-10 || lambda > 1.0 + 1e-10 {
            return Err(Error::NumericalValidity(format!(
                "spin density eigenvalue {lambda} outside [0, 1]"
            )));
        }
        let l = lambda.clamp(0.0, 1.0);
        if l > 0.0 {
            s -= l * l.log2();
        }
    }
    Ok(s.clamp(0.0, 1.0))
}

/// Mean-square displacement of a profile, with a flag marking detectable
/// mass on the outermost sites |m| = M (wrap-around contamination).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSquareDisplacement {
    pub value: f64,
    pub wrapped: bool,
}

pub fn mean_square_displacement(
    profile: &[f64],
    grid: &CircleGrid,
) -> Result<MeanSquareDisplacement> {
    if profile.len() != grid.size() {
        return Err(Error::InvalidConfig(format!(
            "profile has {} entries for a grid of {} sites",
            profile.len(),
            grid.size()
        )));
    }
    let total: f64 = profile.iter().sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidConfig(format!(
            "profile mass {total} is not one"
        )));
    }
    let mut value = 0.0;
    for (i, m) in grid.sites().enumerate() {
        value += (m as f64) * (m as f64) * profile[i];
    }
    let m_edge = grid.half_width() as i64;
    let edge = profile[grid.index_of(m_edge)] + profile[grid.index_of(-m_edge)];
    Ok(MeanSquareDisplacement {
        value,
        wrapped: edge > 1e-12,
    })
}

/// Result of a least-squares line through m²̄(j) over a window: the slope,
/// intercept, the diffusion coefficient slope/2, and the RMS residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusionFit {
    pub coefficient: f64,
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
}

pub fn fit_diffusion_coefficient(
    series: &ObservableSeries,
    window: (u64, u64),
) -> Result<DiffusionFit> {
    let (j1, j2) = window;
    if j2 <= j1 {
        return Err(Error::InvalidConfig(format!(
            "fit window [{j1}, {j2}] is not increasing"
        )));
    }
    let (ts, vs) = series.window(j1, j2);
    if ts.len() < 3 {
        return Err(Error::InvalidConfig(format!(
            "fit window [{j1}, {j2}] holds {} points; need at least 3",
            ts.len()
        )));
    }
    let n = ts.len() as f64;
    let mean_t = ts.iter().map(|t| *t as f64).sum::<f64>() / n;
    let mean_v = vs.iter().sum::<f64>() / n;
    let mut stt = 0.0;
    let mut stv = 0.0;
    for (t, v) in ts.iter().zip(&vs) {
        let dt = *t as f64 - mean_t;
        stt += dt * dt;
        stv += dt * (v - mean_v);
    }
    let slope = stv / stt;
    let intercept = mean_v - slope * mean_t;
    let mut ss = 0.0;
    for (t, v) in ts.iter().zip(&vs) {
        let r = v - (slope * *t as f64 + intercept);
        ss += r * r;
    }
    Ok(DiffusionFit {
        coefficient: 0.5 * slope,
        slope,
        intercept,
        residual_rms: (ss / n).sqrt(),
    })
}

/// Profile kurtosis Σ m⁴N / (Σ m²N)²; equals 3 for a Gaussian profile.
pub fn profile_kurtosis(profile: &[f64], grid: &CircleGrid) -> Result<f64> {
    if profile.len() != grid.size() {
        return Err(Error::InvalidConfig(format!(
            "profile has {} entries for a grid of {} sites",
            profile.len(),
            grid.size()
        )));
    }
    let total: f64 = profile.iter().sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidConfig(format!(
            "profile mass {total} is not one"
        )));
    }
    let mut m2 = 0.0;
    let mut m4 = 0.0;
    for (i, m) in grid.sites().enumerate() {
        let mm = (m as f64) * (m as f64);
        m2 += mm * profile[i];
        m4 += mm * mm * profile[i];
    }
    if m2 <= 0.0 {
        return Err(Error::InvalidConfig(
            "degenerate profile concentrated at the origin has no kurtosis".into(),
        ));
    }
    Ok(m4 / (m2 * m2))
}

/// Coherence decay time: the first sampled j at which a `window`-step
/// trailing moving average of C_j falls below c0/e.
pub fn coherence_decay_time(
    series: &ObservableSeries,
    c0: f64,
    window: usize,
) -> Option<u64> {
    let threshold = c0 / std::f64::consts::E;
    let smoothed = moving_average(&series.values, window);
    for (i, v) in smoothed.iter().enumerate() {
        if *v < threshold {
            return Some(series.times[i + window - 1]);
        }
    }
    None
}

/// Reduced spin density at every step of the noiseless walk with a fixed
/// coin, computed mode-by-mode in Fourier space: the impulse initial state
/// is flat, each mode evolves by a 2×2 matrix, and
/// ρ_r = (1/NN)·Σ_k ψ̂(k)ψ̂(k)† by the transform's Parseval identity. Cost
/// is O(steps · NN) with no wavefront wrap-around concerns.
pub fn pure_reduced_spin_series(
    grid: CircleGrid,
    angles: &CoinAngles,
    steps: usize,
) -> Vec<Mat2> {
    let n = grid.size();
    let coins: Vec<Mat2> = grid
        .sites()
        .map(|k| fourier_coin(angles, grid.wavenumber(k)))
        .collect();
    let mut modes: Vec<[C64; 2]> = vec![
        [
            C64::new(FRAC_1_SQRT_2, 0.0),
            C64::new(0.0, FRAC_1_SQRT_2)
        ];
        n
    ];
    let mut out = Vec::with_capacity(steps + 1);
    let accumulate = |modes: &Vec<[C64; 2]>| {
        let mut acc = Mat2::zeros();
        for m in modes {
            acc.e[0][0] += m[0] * m[0].conj();
            acc.e[0][1] += m[0] * m[1].conj();
            acc.e[1][0] += m[1] * m[0].conj();
            acc.e[1][1] += m[1] * m[1].conj();
        }
        for r in 0..2 {
            for c in 0..2 {
                acc.e[r][c] /= n as f64;
            }
        }
        acc
    };
    out.push(accumulate(&modes));
    for _ in 0..steps {
        for (mode, coin) in modes.iter_mut().zip(&coins) {
            let fresh = coin.mulv(&[mode[0], mode[1]]);
            *mode = fresh;
        }
        out.push(accumulate(&modes));
    }
    out
}

/// Reduced spin density at every step of the exact averaged dynamics,
/// computed on the K = 0 Fourier line: summing ρ_{m,m} over m picks out the
/// mode pairs (k, −k), so ρ_r(j) = (1/NN)·Σ_n ρ̂_j(K=0, p=−k_n). Each of
/// the NN modes evolves by a 4×4 matrix; cost is O(steps · NN) regardless
/// of how wide the physical profile has spread.
pub fn averaged_reduced_spin_series(
    cfg: &NoiseConfig,
    grid: CircleGrid,
    steps: usize,
) -> Vec<Mat2> {
    let n = grid.size();
    let ops: Vec<Mat4> = grid
        .sites()
        .map(|k| averaged_r_u(cfg.case, 0.0, -grid.wavenumber(k), cfg.sigma))
        .collect();
    let mut modes: Vec<Vec4> = vec![default_initial_mode_u(); n];
    let mut out = Vec::with_capacity(steps + 1);
    let accumulate = |modes: &Vec<Vec4>| {
        let mut acc = [ZERO; 4];
        for u in modes {
            let v = basis_change_vector(u, Basis::U, Basis::V);
            for c in 0..4 {
                acc[c] += v[c];
            }
        }
        Mat2 {
            e: [
                [acc[0] / n as f64, acc[1] / n as f64],
                [acc[2] / n as f64, acc[3] / n as f64],
            ],
        }
    };
    out.push(accumulate(&modes));
    for _ in 0..steps {
        for (mode, op) in modes.iter_mut().zip(&ops) {
            *mode = op.mulv(mode);
        }
        out.push(accumulate(&modes));
    }
    out
}

/// Aggregate coherence weight of the averaged state on the K = 0 Fourier
/// line at every step: the root-mean-square of the mode components outside
/// the conserved trace direction,
///
/// W_j = √[(1/NN)·Σ_p (|u₂|² + |u₃|² + |u₄|²)(K=0, p, j)].
///
/// At K = 0 the one-step operator fixes u₁ and, in the noiseless limit,
/// acts unitarily on the (u₂, u₃, u₄) complement, so W_j is exactly
/// constant at σ = 0 — spreading of the walker never dilutes it. Noise is
/// the only mechanism that lowers it, which makes the first crossing of
/// W₀/e a decoherence time proper: its σ-scaling is the σ⁻² law, where the
/// site-resolved maximum coherence conflates decoherence with ballistic
/// dilution. Starts at W₀ = 1/2 for the standard initial state. A small
/// non-decaying remainder survives from the measure-zero p where the
/// quartic sector keeps unit modulus; it stays below the 1/e threshold at
/// the grid sizes used here.
pub fn coherence_weight_series(cfg: &NoiseConfig, grid: CircleGrid, steps: usize) -> Vec<f64> {
    let n = grid.size();
    let ops: Vec<Mat4> = grid
        .sites()
        .map(|k| averaged_r_u(cfg.case, 0.0, -grid.wavenumber(k), cfg.sigma))
        .collect();
    let mut modes: Vec<Vec4> = vec![default_initial_mode_u(); n];
    let weight = |modes: &Vec<Vec4>| -> f64 {
        let s: f64 = modes
            .iter()
            .map(|c| c[1].norm_sqr() + c[2].norm_sqr() + c[3].norm_sqr())
            .sum();
        (s / n as f64).sqrt()
    };
    let mut out = Vec::with_capacity(steps + 1);
    out.push(weight(&modes));
    for _ in 0..steps {
        for (mode, op) in modes.iter_mut().zip(&ops) {
            *mode = op.mulv(mode);
        }
        out.push(weight(&modes));
    }
    out
}
