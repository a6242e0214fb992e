//! Circle lattice indexing and discrete Fourier transform conventions shared
//! by every engine in the crate.
//!
//! Sites live on m ∈ {−M, …, +M}, so a grid always has odd size 2M+1 and
//! periodic boundary conditions. Wavenumbers are k_n = 2πn/(2M+1) with
//! n ∈ {−M, …, +M}. The transform pair is
//!
//! forward:  Â_{k_n} = Σ_m A_m e^{+i k_n m}
//! inverse:  A_m = (1/(2M+1)) Σ_n Â_{k_n} e^{−i k_n m}
//!
//! Note the sign: the *forward* transform carries e^{+ikm}, opposite to the
//! common FFT convention. All phases are computed from the integer product
//! n·m reduced mod 2M+1, so no rounding accumulates across the grid.

use crate::{C64, Error, Result};
use std::f64::consts::TAU;

/// Periodic one-dimensional lattice with sites m ∈ {−M..+M}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CircleGrid {
    m_half: usize,
}

impl CircleGrid {
    /// Creates a grid of half-width M = `m_half`, with 2M+1 sites labeled
    /// m ∈ {−M, …, +M}.
    pub fn new(m_half: usize) -> Result<Self> {
        if m_half == 0 {
            return Err(Error::InvalidConfig(
                "grid half-width M must be at least 1".into(),
            ));
        }
        Ok(CircleGrid { m_half })
    }

    /// Half-width M.
    pub fn half_width(&self) -> usize {
        self.m_half
    }

    /// Number of sites, 2M+1 (always odd).
    pub fn size(&self) -> usize {
        2 * self.m_half + 1
    }

    /// Flat storage index of site m ∈ {−M..+M}. Storage is ordered
    /// m = −M, −M+1, …, +M.
    pub fn index_of(&self, m: i64) -> usize {
        let mm = self.m_half as i64;
        debug_assert!(m >= -mm && m <= mm);
        (m + mm) as usize
    }

    /// Site label m for flat index `idx`.
    pub fn site_of(&self, idx: usize) -> i64 {
        debug_assert!(idx < self.size());
        idx as i64 - self.m_half as i64
    }

    /// Flat index of the periodic neighbor at offset `delta` from flat index
    /// `idx` (wraps around the circle).
    pub fn shifted(&self, idx: usize, delta: i64) -> usize {
        let n = self.size() as i64;
        (idx as i64 + delta).rem_euclid(n) as usize
    }

    /// Wavenumber k_n = 2πn/(2M+1) for n ∈ {−M..+M}.
    pub fn wavenumber(&self, n: i64) -> f64 {
        TAU * (n as f64) / (self.size() as f64)
    }

    /// Iterator over site labels −M..=+M in storage order.
    pub fn sites(&self) -> impl Iterator<Item = i64> {
        let mm = self.m_half as i64;
        -mm..=mm
    }
}

/// One complex value per grid site, in storage order m = −M..+M (or, for
/// transformed data, n = −M..+M).
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSequence {
    pub grid: CircleGrid,
    pub values: Vec<C64>,
}

impl ComplexSequence {
    pub fn new(grid: CircleGrid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.size() {
            return Err(Error::InvalidConfig(format!(
                "sequence length {} does not match grid size {}",
                values.len(),
                grid.size()
            )));
        }
        Ok(ComplexSequence { grid, values })
    }

    pub fn zeros(grid: CircleGrid) -> Self {
        ComplexSequence {
            grid,
            values: vec![C64::new(0.0, 0.0); grid.size()],
        }
    }

    /// Value at site m.
    pub fn at(&self, m: i64) -> C64 {
        self.values[self.grid.index_of(m)]
    }
}

/// Twiddle-factor table: e^{i 2π r/(2M+1)} for r ∈ {0..2M}. Every DFT phase
/// k_n·m = 2π·(n·m)/(2M+1) reduces to one of these via n·m mod (2M+1).
fn phase_table(size: usize) -> Vec<C64> {
    (0..size)
        .map(|r| {
            let angle = TAU * (r as f64) / (size as f64);
            C64::new(angle.cos(), angle.sin())
        })
        .collect()
}

/// Forward transform Â_{k_n} = Σ_m A_m e^{+i k_n m} (no normalization).
pub fn dft_forward(seq: &ComplexSequence) -> ComplexSequence {
    let grid = seq.grid;
    let nn = grid.size();
    let table = phase_table(nn);
    let nn_i = nn as i64;
    let mut out = vec![C64::new(0.0, 0.0); nn];
    for (ni, n) in grid.sites().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for (mi, m) in grid.sites().enumerate() {
            let r = (n * m).rem_euclid(nn_i) as usize;
            acc += seq.values[mi] * table[r];
        }
        out[ni] = acc;
    }
    ComplexSequence { grid, values: out }
}

/// Inverse transform A_m = (1/(2M+1)) Σ_n Â_{k_n} e^{−i k_n m}.
pub fn dft_inverse(modes: &ComplexSequence) -> ComplexSequence {
    let grid = modes.grid;
    let nn = grid.size();
    let table = phase_table(nn);
    let nn_i = nn as i64;
    let norm = 1.0 / nn as f64;
    let mut out = vec![C64::new(0.0, 0.0); nn];
    for (mi, m) in grid.sites().enumerate() {
        let mut acc = C64::new(0.0, 0.0);
        for (ni, n) in grid.sites().enumerate() {
            let r = (-n * m).rem_euclid(nn_i) as usize;
            acc += modes.values[ni] * table[r];
        }
        out[mi] = acc * norm;
    }
    ComplexSequence { grid, values: out }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{ONE, ZERO};

    fn random_seq(grid: CircleGrid, seed: u64) -> ComplexSequence {
        // Small deterministic LCG; plenty for test data.
        let mut s = seed.wrapping_mul(2862933555777941757).wrapping_add(3037000493);
        let mut next = move || {
            s = s.wrapping_mul(2862933555777941757).wrapping_add(3037000493);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let values = (0..grid.size())
            .map(|_| C64::new(next(), next()))
            .collect();
        ComplexSequence { grid, values }
    }

    #[test]
    fn impulse_transforms_to_constant() {
        let grid = CircleGrid::new(4).unwrap();
        let mut seq = ComplexSequence::zeros(grid);
        seq.values[grid.index_of(0)] = ONE;
        let out = dft_forward(&seq);
        for v in &out.values {
            assert!((v - ONE).norm() < 1e-14);
        }
    }

    #[test]
    fn constant_transforms_to_scaled_impulse() {
        let grid = CircleGrid::new(1).unwrap();
        let seq = ComplexSequence::new(grid, vec![ONE; 3]).unwrap();
        let out = dft_forward(&seq);
        assert!((out.at(0) - C64::new(3.0, 0.0)).norm() < 1e-14);
        assert!((out.at(-1) - ZERO).norm() < 1e-14);
        assert!((out.at(1) - ZERO).norm() < 1e-14);
    }

    #[test]
    fn inverse_of_unit_modes_is_impulse() {
        let grid = CircleGrid::new(3).unwrap();
        let modes = ComplexSequence::new(grid, vec![ONE; 7]).unwrap();
        let out = dft_inverse(&modes);
        for m in grid.sites() {
            let want = if m == 0 { ONE } else { ZERO };
            assert!((out.at(m) - want).norm() < 1e-13);
        }
    }

    #[test]
    fn single_oscillating_mode_localizes_at_plus_one() {
        // Â_{k_n} = e^{i k_n} means Â is the forward transform of δ_{m,1}
        // under this crate's sign convention, so the inverse recovers the
        // impulse at m = +1.
        let grid = CircleGrid::new(2).unwrap();
        let values: Vec<C64> = grid
            .sites()
            .map(|n| {
                let k = grid.wavenumber(n);
                C64::new(k.cos(), k.sin())
            })
            .collect();
        let modes = ComplexSequence::new(grid, values).unwrap();
        let out = dft_inverse(&modes);
        for m in grid.sites() {
            let want = if m == 1 { ONE } else { ZERO };
            assert!(
                (out.at(m) - want).norm() < 1e-13,
                "site {m}: got {}",
                out.at(m)
            );
        }
    }

    #[test]
    fn roundtrip_is_identity() {
        let grid = CircleGrid::new(8).unwrap();
        let seq = random_seq(grid, 7);
        let back = dft_inverse(&dft_forward(&seq));
        for (a, b) in seq.values.iter().zip(&back.values) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn parseval_holds_at_large_m() {
        let grid = CircleGrid::new(512).unwrap();
        let seq = random_seq(grid, 99);
        let modes = dft_forward(&seq);
        let direct: f64 = seq.values.iter().map(|v| v.norm_sqr()).sum();
        let spectral: f64 =
            modes.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / grid.size() as f64;
        assert!(
            (direct - spectral).abs() <= 1e-12 * direct.abs(),
            "direct {direct} vs spectral {spectral}"
        );
    }

    #[test]
    fn inverse_is_linear() {
        let grid = CircleGrid::new(5).unwrap();
        let x = random_seq(grid, 1);
        let y = random_seq(grid, 2);
        let a = C64::new(0.3, -1.1);
        let b = C64::new(-2.0, 0.7);
        let combo = ComplexSequence::new(
            grid,
            x.values
                .iter()
                .zip(&y.values)
                .map(|(xv, yv)| a * xv + b * yv)
                .collect(),
        )
        .unwrap();
        let lhs = dft_inverse(&combo);
        let ix = dft_inverse(&x);
        let iy = dft_inverse(&y);
        for i in 0..grid.size() {
            let rhs = a * ix.values[i] + b * iy.values[i];
            assert!((lhs.values[i] - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_zero_half_width_and_length_mismatch() {
        assert!(CircleGrid::new(0).is_err());
        let grid = CircleGrid::new(2).unwrap();
        assert!(ComplexSequence::new(grid, vec![ZERO; 4]).is_err());
    }
}
