//! Unaveraged wavefunction dynamics: the SU(2) coin, the one-step update in
//! physical and Fourier space, and the extended four-angle coin family.
//!
//! The basic walk is
//!
//! [ψᴸ_{j+1,m}, ψᴿ_{j+1,m}]ᵀ = B(θ,ξ) · [ψᴸ_{j,m+1}, ψᴿ_{j,m−1}]ᵀ
//!
//! with B(θ,ξ) = [[e^{iξ}cosθ, i sinθ], [i sinθ, e^{−iξ}cosθ]] ∈ SU(2) and
//! periodic site indexing. The extended family multiplies a global phase
//! e^{iα} and replaces the off-diagonal phases by e^{±iζ}:
//!
//! B̃(θ,ξ,ζ,α) = e^{iα} [[e^{iξ}cosθ, e^{iζ}sinθ], [−e^{−iζ}sinθ, e^{−iξ}cosθ]].
//!
//! Note the e^{−iζ} in the lower-left entry: with e^{+iζ} there the matrix
//! is not unitary for ζ ∉ {0, π} and the discrete gauge transformation
//! (ξ, ζ, α) → (ξ+δ, ζ−δ, α+σ/2) fails to be an exact invariance. Both
//! conventions coincide at ζ = 0, which covers every walk studied at the
//! density level.

use crate::grid::{CircleGrid, ComplexSequence};
use crate::linalg::{Mat2, I, ZERO};
use crate::{C64, Error, Result};
use std::f64::consts::PI;

/// Coin angles (θ, ξ, ζ, α). Plain walks use only (θ, ξ); the extended
/// four-angle family adds ζ (off-diagonal phase) and α (global phase).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoinAngles {
    pub theta: f64,
    pub xi: f64,
    pub zeta: f64,
    pub alpha: f64,
}

/// Default global phase for the extended coin: π/2 + 3π/2. With this
/// assignment e^{iα} = 1 and B̃(θ, ξ, 0, α) matches B(θ, ξ) up to the
/// constant spin-basis rotation diag(i, 1).
pub const ALPHA_DEFAULT: f64 = PI / 2.0 + 3.0 * PI / 2.0;

impl CoinAngles {
    /// Plain two-angle coin; ζ = 0 and α at its default.
    pub fn new(theta: f64, xi: f64) -> Self {
        CoinAngles {
            theta,
            xi,
            zeta: 0.0,
            alpha: ALPHA_DEFAULT,
        }
    }

    /// Full four-angle coin.
    pub fn extended(theta: f64, xi: f64, zeta: f64, alpha: f64) -> Self {
        CoinAngles {
            theta,
            xi,
            zeta,
            alpha,
        }
    }

    /// Hadamard point (θ, ξ) = (π/4, π/2).
    pub fn hadamard() -> Self {
        CoinAngles::new(PI / 4.0, PI / 2.0)
    }
}

/// Two-component wavefunction on a circle grid, stored component-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    pub grid: CircleGrid,
    pub psi_l: Vec<C64>,
    pub psi_r: Vec<C64>,
}

impl SpinorField {
    pub fn new(grid: CircleGrid, psi_l: Vec<C64>, psi_r: Vec<C64>) -> Result<Self> {
        if psi_l.len() != grid.size() || psi_r.len() != grid.size() {
            return Err(Error::InvalidConfig(format!(
                "spinor component lengths ({}, {}) do not match grid size {}",
                psi_l.len(),
                psi_r.len(),
                grid.size()
            )));
        }
        Ok(SpinorField { grid, psi_l, psi_r })
    }

    pub fn zeros(grid: CircleGrid) -> Self {
        SpinorField {
            grid,
            psi_l: vec![ZERO; grid.size()],
            psi_r: vec![ZERO; grid.size()],
        }
    }

    /// The standard initial condition: Ψ₀ = δ_{m,0} (b_L + i b_R)/√2.
    pub fn default_initial(grid: CircleGrid) -> Self {
        let mut state = SpinorField::zeros(grid);
        let idx = grid.index_of(0);
        let amp = 1.0 / 2f64.sqrt();
        state.psi_l[idx] = C64::new(amp, 0.0);
        state.psi_r[idx] = C64::new(0.0, amp);
        state
    }

    /// Total norm squared Σ_m (|ψᴸ_m|² + |ψᴿ_m|²).
    pub fn norm_sqr(&self) -> f64 {
        self.psi_l
            .iter()
            .zip(&self.psi_r)
            .map(|(l, r)| l.norm_sqr() + r.norm_sqr())
            .sum()
    }
}

/// True when a walk of `steps` steps from a localized initial state can
/// reach its own wavefront on the far side of the circle, so that
/// infinite-line quantities are no longer reproduced exactly.
pub fn wavefront_wraps(grid: &CircleGrid, steps: usize) -> bool {
    steps >= grid.half_width()
}

/// Coin matrix B(θ,ξ) = [[e^{iξ}cosθ, i sinθ], [i sinθ, e^{−iξ}cosθ]].
pub fn coin_matrix(angles: &CoinAngles) -> Mat2 {
    let c = angles.theta.cos();
    let s = angles.theta.sin();
    let exi = C64::new(angles.xi.cos(), angles.xi.sin());
    Mat2 {
        e: [[exi * c, I * s], [I * s, exi.conj() * c]],
    }
}

/// Extended coin B̃(θ,ξ,ζ,α); see the module docs for the ζ phase
/// convention.
pub fn coin_matrix_extended(angles: &CoinAngles) -> Mat2 {
    let c = angles.theta.cos();
    let s = angles.theta.sin();
    let exi = C64::new(angles.xi.cos(), angles.xi.sin());
    let ezeta = C64::new(angles.zeta.cos(), angles.zeta.sin());
    let ealpha = C64::new(angles.alpha.cos(), angles.alpha.sin());
    Mat2 {
        e: [
            [ealpha * exi * c, ealpha * ezeta * s],
            [-ealpha * ezeta.conj() * s, ealpha * exi.conj() * c],
        ],
    }
}

/// Fourier-space coin C(θ,ξ,k) = B(θ,ξ) · diag(e^{−ik}, e^{+ik}): one step
/// of the walk acts modewise as ψ̂_{j+1}(k) = C(θ,ξ,k) ψ̂_j(k) under the
/// forward transform Σ_m e^{+ikm}.
pub fn fourier_coin(angles: &CoinAngles, k: f64) -> Mat2 {
    let b = coin_matrix(angles);
    let em = C64::new(k.cos(), -k.sin());
    let ep = em.conj();
    Mat2 {
        e: [[b.e[0][0] * em, b.e[0][1] * ep], [b.e[1][0] * em, b.e[1][1] * ep]],
    }
}

/// One walk step with a uniform coin: gather (ψᴸ_{m+1}, ψᴿ_{m−1}) with
/// periodic wrap, then apply B(θ,ξ).
pub fn step_wavefunction(state: &SpinorField, angles: &CoinAngles) -> SpinorField {
    let b = coin_matrix(angles);
    step_with_matrices(state, |_| b)
}

/// One walk step with a per-site extended coin B̃(θ_m, ξ_m, ζ_m, α_m).
pub fn step_wavefunction_extended(
    state: &SpinorField,
    angle_field: &[CoinAngles],
) -> Result<SpinorField> {
    if angle_field.len() != state.grid.size() {
        return Err(Error::InvalidConfig(format!(
            "angle field length {} does not match grid size {}",
            angle_field.len(),
            state.grid.size()
        )));
    }
    Ok(step_with_matrices(state, |idx| {
        coin_matrix_extended(&angle_field[idx])
    }))
}

fn step_with_matrices<F: Fn(usize) -> Mat2>(state: &SpinorField, coin_at: F) -> SpinorField {
    let grid = state.grid;
    let n = grid.size();
    let mut out = SpinorField::zeros(grid);
    for idx in 0..n {
        let from_l = state.psi_l[grid.shifted(idx, 1)];
        let from_r = state.psi_r[grid.shifted(idx, -1)];
        let b = coin_at(idx);
        out.psi_l[idx] = b.e[0][0] * from_l + b.e[0][1] * from_r;
        out.psi_r[idx] = b.e[1][0] * from_l + b.e[1][1] * from_r;
    }
    out
}

/// Probability per site N_m = |ψᴸ_m|² + |ψᴿ_m|².
pub fn site_probabilities(state: &SpinorField) -> Vec<f64> {
    state
        .psi_l
        .iter()
        .zip(&state.psi_r)
        .map(|(l, r)| l.norm_sqr() + r.norm_sqr())
        .collect()
}

/// Forward DFT of each spin component.
pub fn spinor_dft_forward(state: &SpinorField) -> (ComplexSequence, ComplexSequence) {
    let l = ComplexSequence {
        grid: state.grid,
        values: state.psi_l.clone(),
    };
    let r = ComplexSequence {
        grid: state.grid,
        values: state.psi_r.clone(),
    };
    (crate::grid::dft_forward(&l), crate::grid::dft_forward(&r))
}
