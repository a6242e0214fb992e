//! Unaveraged density-operator dynamics in physical space (the 4×4 local
//! coin Q) and Fourier space (the mode operator R), plus basis management
//! between the v- and u-bases and the standard initial condition.
//!
//! The density operator of a two-component walk is stored through its
//! components ρ^{ab}_{m,m′} = ψ^{b*}_{m′} ψ^a_m on the product basis
//! v₁ = LL, v₂ = LR, v₃ = RL, v₄ = RR. One step gathers the four components
//! from the shifted site pairs
//!
//! (LL: m+1,m′+1)  (LR: m+1,m′−1)  (RL: m−1,m′+1)  (RR: m−1,m′−1)
//!
//! and applies Q(θ,ξ), the Kronecker product of the coin with its
//! conjugate. Under the double transform
//! ρ̂(k,k′) = Σ_{m,m′} ρ_{m,m′} e^{−i(km+k′m′)}, written in the rotated
//! momenta K = (k+k′)/2, p = (k′−k)/2, the step acts modewise through the
//! unitary R(θ,ξ,K,p) = Q · diag(e^{2iK}, e^{−2ip}, e^{2ip}, e^{−2iK}).
//!
//! The u-basis u₁ = v₁+v₄, u₂ = v₁−v₄, u₃ = v₂+v₃, u₄ = v₂−v₃ block-organizes
//! the averaged dynamics; coefficients transform as a₁ = (v₁+v₄)/2, etc.

use crate::grid::CircleGrid;
use crate::linalg::{Mat2, Mat4, Vec4, I, ONE, ZERO};
use crate::walk::{CoinAngles, SpinorField};
use crate::{C64, Error, Result};

/// Which 4-component basis the stored values refer to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// Product spin basis (ρᴸᴸ, ρᴸᴿ, ρᴿᴸ, ρᴿᴿ).
    V,
    /// Combination basis u₁ = v₁+v₄, u₂ = v₁−v₄, u₃ = v₂+v₃, u₄ = v₂−v₃.
    U,
}

/// Density-operator components on all site pairs (m, m′), stored
/// component-major: four planes of (2M+1)² complex values.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    pub grid: CircleGrid,
    pub basis: Basis,
    pub comp: [Vec<C64>; 4],
}

impl DensityField {
    pub fn zeros(grid: CircleGrid, basis: Basis) -> Self {
        let plane = vec![ZERO; grid.size() * grid.size()];
        DensityField {
            grid,
            basis,
            comp: [plane.clone(), plane.clone(), plane.clone(), plane],
        }
    }

    /// Flat index of the site pair (m, m′).
    pub fn pair_index(&self, m: i64, m_prime: i64) -> usize {
        self.grid.index_of(m) * self.grid.size() + self.grid.index_of(m_prime)
    }

    /// Component `c` at site pair (m, m′).
    pub fn at(&self, c: usize, m: i64, m_prime: i64) -> C64 {
        self.comp[c][self.pair_index(m, m_prime)]
    }

    /// All four components at (m, m′) as a vector.
    pub fn vector_at(&self, m: i64, m_prime: i64) -> Vec4 {
        let idx = self.pair_index(m, m_prime);
        [
            self.comp[0][idx],
            self.comp[1][idx],
            self.comp[2][idx],
            self.comp[3][idx],
        ]
    }

    /// Trace Σ_m (ρᴸᴸ_{m,m} + ρᴿᴿ_{m,m}), evaluated in either basis
    /// (in the u-basis the integrand is 2·u₁ on the diagonal).
    pub fn trace(&self) -> C64 {
        let n = self.grid.size();
        let mut acc = ZERO;
        for i in 0..n {
            let idx = i * n + i;
            acc += match self.basis {
                Basis::V => self.comp[0][idx] + self.comp[3][idx],
                Basis::U => 2.0 * self.comp[0][idx],
            };
        }
        acc
    }

    /// Purity tr(ρ²) = Σ_{a,b,m,m′} |ρ^{ab}_{m,m′}|² for Hermitian ρ
    /// (v-basis contract).
    pub fn purity(&self) -> Result<f64> {
        if self.basis != Basis::V {
            return Err(Error::InvalidConfig(
                "purity is defined on the v-basis representation; convert first".into(),
            ));
        }
        Ok(self
            .comp
            .iter()
            .map(|plane| plane.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .sum())
    }

    /// Largest violation of Hermiticity ρ^{ab}_{m,m′} = conj(ρ^{ba}_{m′,m})
    /// over all entries (v-basis contract).
    pub fn hermiticity_defect(&self) -> Result<f64> {
        if self.basis != Basis::V {
            return Err(Error::InvalidConfig(
                "hermiticity is checked on the v-basis representation; convert first".into(),
            ));
        }
        let n = self.grid.size();
        let transpose_pairs = [(0usize, 0usize), (1, 2), (2, 1), (3, 3)];
        let mut worst = 0.0f64;
        for (c, ct) in transpose_pairs {
            for i in 0..n {
                for ip in 0..n {
                    let d = (self.comp[c][i * n + ip] - self.comp[ct][ip * n + i].conj()).norm();
                    worst = worst.max(d);
                }
            }
        }
        Ok(worst)
    }

    /// The anti-diagonal slice ρ_{m,−m} of one component; its departure from
    /// a pure m = 0 impulse measures the gain of spatial coherence carried
    /// by Σ_K ρ̂(K, p).
    pub fn anti_diagonal(&self, c: usize) -> Vec<C64> {
        self.grid.sites().map(|m| self.at(c, m, -m)).collect()
    }
}

/// One 4-component Fourier mode of the density operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierModeVector {
    pub big_k: f64,
    pub p: f64,
    pub basis: Basis,
    pub comp: Vec4,
}

/// ρ^{ab}_{m,m′} = ψ^{b*}_{m′} ψ^a_m from a pure state.
pub fn density_from_pure(state: &SpinorField) -> DensityField {
    let grid = state.grid;
    let n = grid.size();
    let mut rho = DensityField::zeros(grid, Basis::V);
    for i in 0..n {
        for ip in 0..n {
            let idx = i * n + ip;
            rho.comp[0][idx] = state.psi_l[i] * state.psi_l[ip].conj();
            rho.comp[1][idx] = state.psi_l[i] * state.psi_r[ip].conj();
            rho.comp[2][idx] = state.psi_r[i] * state.psi_l[ip].conj();
            rho.comp[3][idx] = state.psi_r[i] * state.psi_r[ip].conj();
        }
    }
    rho
}

/// The local 4×4 coin Q(θ,ξ) acting on (ρᴸᴸ, ρᴸᴿ, ρᴿᴸ, ρᴿᴿ):
///
/// [[c², −icse^{iξ}, +icse^{−iξ}, s²],
///  [−icse^{iξ}, c²e^{2iξ}, s², +icse^{iξ}],
///  [+icse^{−iξ}, s², c²e^{−2iξ}, −icse^{−iξ}],
///  [s², +icse^{iξ}, −icse^{−iξ}, c²]]
///
/// which equals the Kronecker product B ⊗ conj(B) (walk component slow,
/// conjugate component fast).
pub fn local_coin_q(angles: &CoinAngles) -> Mat4 {
    let c = angles.theta.cos();
    let s = angles.theta.sin();
    let e = C64::new(angles.xi.cos(), angles.xi.sin());
    let ics_p = I * (c * s) * e;
    let ics_m = I * (c * s) * e.conj();
    let c2 = C64::new(c * c, 0.0);
    let s2 = C64::new(s * s, 0.0);
    Mat4 {
        e: [
            [c2, -ics_p, ics_m, s2],
            [-ics_p, c2 * e * e, s2, ics_p],
            [ics_m, s2, c2 * (e * e).conj(), -ics_m],
            [s2, ics_p, -ics_m, c2],
        ],
    }
}

/// Kronecker product B ⊗ conj(B) of a 2×2 coin — the defining route to Q.
pub fn kron_with_conjugate(b: &Mat2) -> Mat4 {
    let mut out = Mat4::zeros();
    for a in 0..2 {
        for bb in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    out.e[2 * a + bb][2 * c + d] = b.e[a][c] * b.e[bb][d].conj();
                }
            }
        }
    }
    out
}

/// One density step in physical space: gather (m±1, m′±1) then apply Q.
pub fn step_density(rho: &DensityField, angles: &CoinAngles) -> Result<DensityField> {
    step_density_with(rho, &local_coin_q(angles))
}

/// One density step with an arbitrary local 4×4 operator in place of Q —
/// the same shifted gather, used for exact averaged evolution where the
/// one-step coin is replaced by its statistical mean.
pub fn step_density_with(rho: &DensityField, q: &Mat4) -> Result<DensityField> {
    if rho.basis != Basis::V {
        return Err(Error::InvalidConfig(
            "step_density requires the v-basis representation; convert first".into(),
        ));
    }
    let grid = rho.grid;
    let n = grid.size();
    let mut out = DensityField::zeros(grid, Basis::V);
    for i in 0..n {
        let i_plus = grid.shifted(i, 1);
        let i_minus = grid.shifted(i, -1);
        for ip in 0..n {
            let ip_plus = grid.shifted(ip, 1);
            let ip_minus = grid.shifted(ip, -1);
            let gathered = [
                rho.comp[0][i_plus * n + ip_plus],
                rho.comp[1][i_plus * n + ip_minus],
                rho.comp[2][i_minus * n + ip_plus],
                rho.comp[3][i_minus * n + ip_minus],
            ];
            let fresh = q.mulv(&gathered);
            let idx = i * n + ip;
            out.comp[0][idx] = fresh[0];
            out.comp[1][idx] = fresh[1];
            out.comp[2][idx] = fresh[2];
            out.comp[3][idx] = fresh[3];
        }
    }
    Ok(out)
}

/// Fourier-space one-step operator
/// R(θ,ξ,K,p) = Q(θ,ξ) · diag(e^{2iK}, e^{−2ip}, e^{2ip}, e^{−2iK}).
pub fn fourier_r(angles: &CoinAngles, big_k: f64, p: f64) -> Mat4 {
    let q = local_coin_q(angles);
    let ek = C64::new((2.0 * big_k).cos(), (2.0 * big_k).sin());
    let ep = C64::new((2.0 * p).cos(), (2.0 * p).sin());
    let phases = [ek, ep.conj(), ep, ek.conj()];
    let mut out = q;
    for r in 0..4 {
        for c in 0..4 {
            out.e[r][c] *= phases[c];
        }
    }
    out
}

/// Change of 4-component coefficients between the v- and u-bases:
/// a₁ = (v₁+v₄)/2, a₂ = (v₁−v₄)/2, a₃ = (v₂+v₃)/2, a₄ = (v₂−v₃)/2, and back
/// v₁ = a₁+a₂, v₂ = a₃+a₄, v₃ = a₃−a₄, v₄ = a₁−a₂.
pub fn basis_change_vector(comp: &Vec4, from: Basis, to: Basis) -> Vec4 {
    match (from, to) {
        (Basis::V, Basis::U) => [
            0.5 * (comp[0] + comp[3]),
            0.5 * (comp[0] - comp[3]),
            0.5 * (comp[1] + comp[2]),
            0.5 * (comp[1] - comp[2]),
        ],
        (Basis::U, Basis::V) => [
            comp[0] + comp[1],
            comp[2] + comp[3],
            comp[2] - comp[3],
            comp[0] - comp[1],
        ],
        _ => *comp,
    }
}

/// Basis change of a whole field.
pub fn basis_change(rho: &DensityField, to: Basis) -> DensityField {
    if rho.basis == to {
        return rho.clone();
    }
    let n = rho.grid.size();
    let mut out = DensityField::zeros(rho.grid, to);
    for idx in 0..n * n {
        let v = [
            rho.comp[0][idx],
            rho.comp[1][idx],
            rho.comp[2][idx],
            rho.comp[3][idx],
        ];
        let w = basis_change_vector(&v, rho.basis, to);
        out.comp[0][idx] = w[0];
        out.comp[1][idx] = w[1];
        out.comp[2][idx] = w[2];
        out.comp[3][idx] = w[3];
    }
    out
}

/// Matrix form of the v→u coefficient map (rows give a₁..a₄ in terms of
/// v₁..v₄).
pub fn u_from_v_matrix() -> Mat4 {
    let h = C64::new(0.5, 0.0);
    Mat4 {
        e: [
            [h, ZERO, ZERO, h],
            [h, ZERO, ZERO, -h],
            [ZERO, h, h, ZERO],
            [ZERO, h, -h, ZERO],
        ],
    }
}

/// Matrix form of the u→v coefficient map (columns are the u-basis vectors
/// expressed in v-components).
pub fn v_from_u_matrix() -> Mat4 {
    Mat4 {
        e: [
            [ONE, ONE, ZERO, ZERO],
            [ZERO, ZERO, ONE, ONE],
            [ZERO, ZERO, ONE, -ONE],
            [ONE, -ONE, ZERO, ZERO],
        ],
    }
}

/// Basis change of a single Fourier mode.
pub fn basis_change_mode(mode: &FourierModeVector, to: Basis) -> FourierModeVector {
    FourierModeVector {
        big_k: mode.big_k,
        p: mode.p,
        basis: to,
        comp: basis_change_vector(&mode.comp, mode.basis, to),
    }
}

/// The standard initial condition ρ_{0,0} = (u₁ − i u₄)/2 (all other site
/// pairs zero), i.e. the pure state (b_L + i b_R)/√2 localized at m = 0.
/// Its double DFT is flat: ρ̂₀(K,p) = (u₁ − i u₄)/2 for every mode.
pub fn default_initial_density(grid: CircleGrid) -> DensityField {
    let mut rho = DensityField::zeros(grid, Basis::V);
    let idx = rho.pair_index(0, 0);
    rho.comp[0][idx] = C64::new(0.5, 0.0);
    rho.comp[1][idx] = C64::new(0.0, -0.5);
    rho.comp[2][idx] = C64::new(0.0, 0.5);
    rho.comp[3][idx] = C64::new(0.5, 0.0);
    rho
}

/// The u-basis coefficients of the standard initial mode, (1/2, 0, 0, −i/2).
pub fn default_initial_mode_u() -> Vec4 {
    [
        C64::new(0.5, 0.0),
        ZERO,
        ZERO,
        C64::new(0.0, -0.5),
    ]
}

/// Double DFT of every component plane:
/// ρ̂(k_n, k_{n′}) = Σ_{m,m′} ρ_{m,m′} e^{−i(k_n m + k_{n′} m′)}, returned in
/// the same flat (n, n′) layout as the input's (m, m′) layout.
pub fn double_dft_planes(rho: &DensityField) -> [Vec<C64>; 4] {
    let grid = rho.grid;
    let n = grid.size();
    let n_i = n as i64;
    // e^{−i 2π r / n} table.
    let table: Vec<C64> = (0..n)
        .map(|r| {
            let ang = -std::f64::consts::TAU * (r as f64) / (n as f64);
            C64::new(ang.cos(), ang.sin())
        })
        .collect();
    let mut out: [Vec<C64>; 4] = [
        vec![ZERO; n * n],
        vec![ZERO; n * n],
        vec![ZERO; n * n],
        vec![ZERO; n * n],
    ];
    for c in 0..4 {
        // Transform the second index first, then the first.
        let mut half = vec![ZERO; n * n];
        for (mi, _) in grid.sites().enumerate() {
            for (npi, np) in grid.sites().enumerate() {
                let mut acc = ZERO;
                for (mpi, mp) in grid.sites().enumerate() {
                    let r = (np * mp).rem_euclid(n_i) as usize;
                    acc += rho.comp[c][mi * n + mpi] * table[r];
                }
                half[mi * n + npi] = acc;
            }
        }
        for (ni, nn) in grid.sites().enumerate() {
            for npi in 0..n {
                let mut acc = ZERO;
                for (mi, m) in grid.sites().enumerate() {
                    let r = (nn * m).rem_euclid(n_i) as usize;
                    acc += half[mi * n + npi] * table[r];
                }
                out[c][ni * n + npi] = acc;
            }
        }
    }
    out
}

/// Rotated momenta (K, p) of the native mode pair (n, n′):
/// K = (k_n + k_{n′})/2, p = (k_{n′} − k_n)/2.
pub fn mode_momenta(grid: &CircleGrid, n: i64, n_prime: i64) -> (f64, f64) {
    let k = grid.wavenumber(n);
    let kp = grid.wavenumber(n_prime);
    (0.5 * (k + kp), 0.5 * (kp - k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::CircleGrid;
    use crate::walk::{coin_matrix, step_wavefunction, SpinorField};
    use std::f64::consts::PI;

    fn rng_stream(seed: u64, count: usize) -> Vec<f64> {
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (0..count)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect()
    }

    fn random_pure_state(grid: CircleGrid, seed: u64) -> SpinorField {
        let raw = rng_stream(seed, 4 * grid.size());
        let mut st = SpinorField::zeros(grid);
        for i in 0..grid.size() {
            st.psi_l[i] = C64::new(raw[4 * i], raw[4 * i + 1]);
            st.psi_r[i] = C64::new(raw[4 * i + 2], raw[4 * i + 3]);
        }
        let norm = st.norm_sqr().sqrt();
        for i in 0..grid.size() {
            st.psi_l[i] /= norm;
            st.psi_r[i] /= norm;
        }
        st
    }

    fn random_hermitian_density(grid: CircleGrid, seed: u64) -> DensityField {
        // Mix a few random pure states to get a Hermitian, trace-1,
        // genuinely mixed field.
        let weights = [0.5, 0.3, 0.2];
        let mut rho = DensityField::zeros(grid, Basis::V);
        for (w_i, w) in weights.iter().enumerate() {
            let pure = density_from_pure(&random_pure_state(grid, seed + w_i as u64));
            for c in 0..4 {
                for (dst, src) in rho.comp[c].iter_mut().zip(&pure.comp[c]) {
                    *dst += w * src;
                }
            }
        }
        rho
    }

    #[test]
    fn pure_density_from_default_state_matches_closed_form() {
        let grid = CircleGrid::new(3).unwrap();
        let rho = density_from_pure(&SpinorField::default_initial(grid));
        let v = rho.vector_at(0, 0);
        assert!((v[0] - C64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((v[1] - C64::new(0.0, -0.5)).norm() < 1e-15);
        assert!((v[2] - C64::new(0.0, 0.5)).norm() < 1e-15);
        assert!((v[3] - C64::new(0.5, 0.0)).norm() < 1e-15);
        let u = basis_change_vector(&v, Basis::V, Basis::U);
        assert!((u[0] - C64::new(0.5, 0.0)).norm() < 1e-15);
        assert!(u[1].norm() < 1e-15);
        assert!(u[2].norm() < 1e-15);
        assert!((u[3] - C64::new(0.0, -0.5)).norm() < 1e-15);
        assert!((rho.trace() - ONE).norm() < 1e-14);
    }

    #[test]
    fn single_component_state_fills_only_ll() {
        let grid = CircleGrid::new(2).unwrap();
        let mut st = SpinorField::zeros(grid);
        st.psi_l[grid.index_of(0)] = ONE;
        let rho = density_from_pure(&st);
        assert!((rho.at(0, 0, 0) - ONE).norm() < 1e-15);
        for c in 1..4 {
            assert!(rho.comp[c].iter().all(|z| z.norm() < 1e-15));
        }
    }

    #[test]
    fn pure_states_have_unit_purity() {
        let grid = CircleGrid::new(5).unwrap();
        let rho = density_from_pure(&random_pure_state(grid, 3));
        assert!((rho.purity().unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn q_matches_kronecker_product_of_coin_with_conjugate() {
        for seed in 0..6u64 {
            let raw = rng_stream(seed + 10, 2);
            let ang = CoinAngles::new(raw[0] * PI, raw[1] * PI);
            let q = local_coin_q(&ang);
            let kron = kron_with_conjugate(&coin_matrix(&ang));
            assert!(q.max_abs_diff(&kron) < 1e-14);
        }
    }

    #[test]
    fn q_at_theta_zero_is_diagonal_phase() {
        let xi = 0.93;
        let q = local_coin_q(&CoinAngles::new(0.0, xi));
        let e2 = C64::new((2.0 * xi).cos(), (2.0 * xi).sin());
        let want = Mat4::diag(&[ONE, e2, e2.conj(), ONE]);
        assert!(q.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn hadamard_q_entries_all_have_modulus_half() {
        let q = local_coin_q(&CoinAngles::hadamard());
        for r in 0..4 {
            for c in 0..4 {
                assert!((q.e[r][c].norm() - 0.5).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn density_step_tracks_wavefunction_step() {
        let grid = CircleGrid::new(6).unwrap();
        let mut st = random_pure_state(grid, 17);
        let mut rho = density_from_pure(&st);
        let raw = rng_stream(23, 10);
        for pair in raw.chunks(2) {
            let ang = CoinAngles::new(pair[0] * PI, pair[1] * PI);
            st = step_wavefunction(&st, &ang);
            rho = step_density(&rho, &ang).unwrap();
            let direct = density_from_pure(&st);
            for c in 0..4 {
                for (a, b) in rho.comp[c].iter().zip(&direct.comp[c]) {
                    assert!((a - b).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn identity_coin_shifts_all_planes() {
        let grid = CircleGrid::new(3).unwrap();
        let rho = random_hermitian_density(grid, 5);
        let out = step_density(&rho, &CoinAngles::new(0.0, 0.0)).unwrap();
        let n = grid.size();
        let offs = [(1i64, 1i64), (1, -1), (-1, 1), (-1, -1)];
        for (c, (dm, dmp)) in offs.iter().enumerate() {
            for i in 0..n {
                for ip in 0..n {
                    let want = rho.comp[c][grid.shifted(i, *dm) * n + grid.shifted(ip, *dmp)];
                    assert!((out.comp[c][i * n + ip] - want).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn step_preserves_trace_and_hermiticity() {
        let grid = CircleGrid::new(4).unwrap();
        let mut rho = random_hermitian_density(grid, 29);
        let t0 = rho.trace();
        let raw = rng_stream(31, 8);
        for pair in raw.chunks(2) {
            rho = step_density(&rho, &CoinAngles::new(pair[0] * PI, pair[1] * PI)).unwrap();
        }
        assert!((rho.trace() - t0).norm() < 1e-12);
        assert!(rho.hermiticity_defect().unwrap() < 1e-12);
    }

    #[test]
    fn step_rejects_u_basis_input() {
        let grid = CircleGrid::new(2).unwrap();
        let rho = basis_change(&default_initial_density(grid), Basis::U);
        assert!(step_density(&rho, &CoinAngles::hadamard()).is_err());
    }

    #[test]
    fn fourier_r_at_zero_momenta_is_q() {
        let ang = CoinAngles::new(0.7, -0.4);
        assert!(fourier_r(&ang, 0.0, 0.0).max_abs_diff(&local_coin_q(&ang)) < 1e-15);
    }

    #[test]
    fn fourier_r_is_unitary() {
        let raw = rng_stream(37, 16);
        for quad in raw.chunks(4) {
            let ang = CoinAngles::new(quad[0] * PI, quad[1] * PI);
            let r = fourier_r(&ang, quad[2] * PI, quad[3] * PI);
            assert!(r.unitarity_defect() < 1e-14);
        }
    }

    #[test]
    fn double_dft_evolution_matches_physical_step() {
        let grid = CircleGrid::new(4).unwrap();
        let rho = random_hermitian_density(grid, 41);
        let ang = CoinAngles::new(0.53, 1.21);
        let stepped = step_density(&rho, &ang).unwrap();
        let modes_before = double_dft_planes(&rho);
        let modes_after = double_dft_planes(&stepped);
        let n = grid.size();
        for (ni, nn) in grid.sites().enumerate() {
            for (npi, np) in grid.sites().enumerate() {
                let (big_k, p) = mode_momenta(&grid, nn, np);
                let r = fourier_r(&ang, big_k, p);
                let idx = ni * n + npi;
                let before = [
                    modes_before[0][idx],
                    modes_before[1][idx],
                    modes_before[2][idx],
                    modes_before[3][idx],
                ];
                let want = r.mulv(&before);
                for c in 0..4 {
                    assert!(
                        (modes_after[c][idx] - want[c]).norm() < 1e-12,
                        "mode ({nn},{np}) component {c}"
                    );
                }
            }
        }
    }

    #[test]
    fn modes_never_mix_under_time_dependent_angles() {
        // Evolve the full field three steps with three different coins and
        // compare against independent per-mode matrix products.
        let grid = CircleGrid::new(3).unwrap();
        let rho0 = random_hermitian_density(grid, 47);
        let angles = [
            CoinAngles::new(0.3, 1.5),
            CoinAngles::new(-0.8, 0.2),
            CoinAngles::new(1.1, -0.9),
        ];
        let mut rho = rho0.clone();
        for a in &angles {
            rho = step_density(&rho, a).unwrap();
        }
        let start = double_dft_planes(&rho0);
        let end = double_dft_planes(&rho);
        let n = grid.size();
        for (ni, nn) in grid.sites().enumerate() {
            for (npi, np) in grid.sites().enumerate() {
                let (big_k, p) = mode_momenta(&grid, nn, np);
                let idx = ni * n + npi;
                let mut v = [
                    start[0][idx],
                    start[1][idx],
                    start[2][idx],
                    start[3][idx],
                ];
                for a in &angles {
                    v = fourier_r(a, big_k, p).mulv(&v);
                }
                for c in 0..4 {
                    assert!((end[c][idx] - v[c]).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn basis_round_trip_is_exact() {
        let raw = rng_stream(53, 8);
        let v: Vec4 = [
            C64::new(raw[0], raw[1]),
            C64::new(raw[2], raw[3]),
            C64::new(raw[4], raw[5]),
            C64::new(raw[6], raw[7]),
        ];
        let u = basis_change_vector(&v, Basis::V, Basis::U);
        let back = basis_change_vector(&u, Basis::U, Basis::V);
        for c in 0..4 {
            assert!((v[c] - back[c]).norm() < 1e-14);
        }
    }

    #[test]
    fn basis_change_examples() {
        let v1 = [ONE, ZERO, ZERO, ONE];
        let u1 = basis_change_vector(&v1, Basis::V, Basis::U);
        assert!((u1[0] - ONE).norm() < 1e-15);
        assert!(u1[1].norm() + u1[2].norm() + u1[3].norm() < 1e-15);
        let v2 = [ZERO, ONE, -ONE, ZERO];
        let u2 = basis_change_vector(&v2, Basis::V, Basis::U);
        assert!(u2[0].norm() + u2[1].norm() + u2[2].norm() < 1e-15);
        assert!((u2[3] - ONE).norm() < 1e-15);
    }

    #[test]
    fn default_initial_density_is_flat_in_fourier_space() {
        let grid = CircleGrid::new(3).unwrap();
        let rho = default_initial_density(grid);
        assert!((rho.trace() - ONE).norm() < 1e-15);
        assert!((rho.at(1, 0, 0) - C64::new(0.0, -0.5)).norm() < 1e-15);
        let modes = double_dft_planes(&rho);
        let n = grid.size();
        let want_v = basis_change_vector(&default_initial_mode_u(), Basis::U, Basis::V);
        for idx in 0..n * n {
            for c in 0..4 {
                assert!((modes[c][idx] - want_v[c]).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn hadamard_profile_is_symmetric_from_default_state() {
        let grid = CircleGrid::new(24).unwrap();
        let mut rho = default_initial_density(grid);
        for _ in 0..16 {
            rho = step_density(&rho, &CoinAngles::hadamard()).unwrap();
        }
        for m in grid.sites() {
            let n_plus = (rho.at(0, m, m) + rho.at(3, m, m)).re;
            let n_minus = (rho.at(0, -m, -m) + rho.at(3, -m, -m)).re;
            assert!((n_plus - n_minus).abs() < 1e-14, "m = {m}");
        }
    }
}
