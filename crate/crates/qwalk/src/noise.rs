//! Time-random gauge-field model: per-step angle sampling, the exact
//! averaged one-step operators in closed form, averaged evolution in
//! physical and Fourier space, and Monte Carlo ensemble averaging for
//! cross-validation.
//!
//! Two noise cases are supported. In the electric case θ is pinned at π/4
//! and ξ is drawn uniformly from (π/2 − σ/2, π/2 + σ/2) at every step; in
//! the gravitational case ξ is pinned at π/2 and θ is drawn uniformly from
//! (π/4 − σ/2, π/4 + σ/2). Because the angles depend only on time, Fourier
//! modes never mix and the statistical average of the one-step map is again
//! a one-step map, with closed-form matrix elements built from
//! sinc(σ/2) and sinc(σ). The averaged operators are trace-preserving but
//! not unitary; the loss of unitarity is the source of decoherence and
//! asymptotic diffusion.

use crate::asymptotics::sinc;
use crate::density::{
    default_initial_mode_u, step_density_with, u_from_v_matrix, v_from_u_matrix, Basis,
    DensityField, FourierModeVector,
};
use crate::linalg::{Mat4, Vec4, C64, I, ONE, ZERO};
use crate::walk::{step_wavefunction, CoinAngles, SpinorField};
use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

/// Which coin angle fluctuates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseCase {
    /// θ = π/4 fixed, ξ uniform on (π/2 − σ/2, π/2 + σ/2).
    Electric,
    /// ξ = π/2 fixed, θ uniform on (π/4 − σ/2, π/4 + σ/2).
    Gravitational,
}

/// Noise model configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    pub case: NoiseCase,
    pub sigma: f64,
    pub seed: u64,
    pub realizations: usize,
}

impl NoiseConfig {
    /// Validates σ ∈ [0, 2π). The noise model proper requires σ > 0; σ = 0
    /// is accepted as the deterministic (Hadamard) limit for testing.
    pub fn new(case: NoiseCase, sigma: f64) -> Result<Self> {
        if !sigma.is_finite() || sigma < 0.0 || sigma >= TAU {
            return Err(Error::InvalidConfig(format!(
                "noise width sigma must lie in [0, 2*pi), got {sigma}"
            )));
        }
        Ok(NoiseConfig {
            case,
            sigma,
            seed: 0,
            realizations: 1,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_realizations(mut self, realizations: usize) -> Self {
        self.realizations = realizations;
        self
    }

    /// Center of the sampling interval: the Hadamard value of the
    /// fluctuating angle.
    pub fn center(&self) -> f64 {
        match self.case {
            NoiseCase::Electric => FRAC_PI_2,
            NoiseCase::Gravitational => FRAC_PI_4,
        }
    }

    /// Coin angles for one sampled value of the fluctuating angle.
    pub fn angles_for(&self, omega: f64) -> CoinAngles {
        match self.case {
            NoiseCase::Electric => CoinAngles::new(FRAC_PI_4, omega),
            NoiseCase::Gravitational => CoinAngles::new(omega, FRAC_PI_2),
        }
    }
}

/// Draws one angle uniformly from the configured interval.
pub fn sample_angle<R: Rng>(cfg: &NoiseConfig, rng: &mut R) -> f64 {
    cfg.center() + cfg.sigma * (rng.gen::<f64>() - 0.5)
}

/// Deterministic per-realization generator: stream `realization` of the
/// ChaCha sequence seeded by `seed`, so realizations are independent and
/// reproducible in any order.
pub fn realization_rng(seed: u64, realization: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(realization);
    rng
}

/// One recorded noise realization: the seed it came from and the sampled
/// angle sequence ω₁..ω_N.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizationRecord {
    pub seed: u64,
    pub angles: Vec<f64>,
}

impl RealizationRecord {
    /// Samples `steps` angles from realization stream `realization`.
    pub fn generate(cfg: &NoiseConfig, steps: usize, realization: u64) -> Self {
        let mut rng = realization_rng(cfg.seed, realization);
        let angles = (0..steps).map(|_| sample_angle(cfg, &mut rng)).collect();
        RealizationRecord {
            seed: cfg.seed,
            angles,
        }
    }

    /// Plain-text form: the seed on the first line, then one angle per line
    /// with 17 significant digits (enough to round-trip f64 bit-exactly).
    pub fn to_text(&self) -> String {
        let mut out = format!("seed {}\n", self.seed);
        for a in &self.angles {
            out.push_str(&format!("{:.16e}\n", a));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let head = lines
            .next()
            .ok_or_else(|| Error::InvalidConfig("empty realization record".into()))?;
        let seed = head
            .strip_prefix("seed ")
            .and_then(|s| s.trim().parse::<u64>().ok())
            .ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "realization record must start with 'seed <u64>', got '{head}'"
                ))
            })?;
        let mut angles = Vec::new();
        for line in lines {
            let v = line.trim().parse::<f64>().map_err(|_| {
                Error::InvalidConfig(format!("bad angle line in realization record: '{line}'"))
            })?;
            angles.push(v);
        }
        Ok(RealizationRecord { seed, angles })
    }

    /// Runs the walk this record describes.
    pub fn apply(&self, cfg: &NoiseConfig, psi0: &SpinorField) -> SpinorField {
        let mut psi = psi0.clone();
        for omega in &self.angles {
            psi = step_wavefunction(&psi, &cfg.angles_for(*omega));
        }
        psi
    }
}

/// Exact averaged one-step operator for the electric case in the u-basis:
///
/// [[cos2K, i sin2K, 0, 0],
///  [0, 0, S cos2p, −i S sin2p],
///  [i S sin2K, S cos2K, ((1−Σ)/2)cos2p, i((Σ−1)/2)sin2p],
///  [0, 0, i((1+Σ)/2)sin2p, −((Σ+1)/2)cos2p]]
///
/// with S = sinc(σ/2) and Σ = sinc(σ).
pub fn averaged_r_electric(big_k: f64, p: f64, sigma: f64) -> Mat4 {
    let s = sinc(sigma / 2.0);
    let sg = sinc(sigma);
    let c2k = (2.0 * big_k).cos();
    let s2k = (2.0 * big_k).sin();
    let c2p = (2.0 * p).cos();
    let s2p = (2.0 * p).sin();
    let re = |x: f64| C64::new(x, 0.0);
    Mat4 {
        e: [
            [re(c2k), I * s2k, ZERO, ZERO],
            [ZERO, ZERO, re(s * c2p), -I * (s * s2p)],
            [
                I * (s * s2k),
                re(s * c2k),
                re(0.5 * (1.0 - sg) * c2p),
                I * (0.5 * (sg - 1.0) * s2p),
            ],
            [
                ZERO,
                ZERO,
                I * (0.5 * (1.0 + sg) * s2p),
                re(-0.5 * (sg + 1.0) * c2p),
            ],
        ],
    }
}

/// Exact averaged one-step operator for the gravitational case in the
/// u-basis:
///
/// [[cos2K, i sin2K, 0, 0],
///  [0, 0, Σ cos2p, −i Σ sin2p],
///  [i Σ sin2K, Σ cos2K, 0, 0],
///  [0, 0, i sin2p, −cos2p]]
///
/// with Σ = sinc(σ).
pub fn averaged_r_gravitational(big_k: f64, p: f64, sigma: f64) -> Mat4 {
    let sg = sinc(sigma);
    let c2k = (2.0 * big_k).cos();
    let s2k = (2.0 * big_k).sin();
    let c2p = (2.0 * p).cos();
    let s2p = (2.0 * p).sin();
    let re = |x: f64| C64::new(x, 0.0);
    Mat4 {
        e: [
            [re(c2k), I * s2k, ZERO, ZERO],
            [ZERO, ZERO, re(sg * c2p), -I * (sg * s2p)],
            [I * (sg * s2k), re(sg * c2k), ZERO, ZERO],
            [ZERO, ZERO, I * s2p, re(-c2p)],
        ],
    }
}

/// Averaged u-basis operator for either case.
pub fn averaged_r_u(case: NoiseCase, big_k: f64, p: f64, sigma: f64) -> Mat4 {
    match case {
        NoiseCase::Electric => averaged_r_electric(big_k, p, sigma),
        NoiseCase::Gravitational => averaged_r_gravitational(big_k, p, sigma),
    }
}

/// Statistical mean of the local coin Q over the noise law, in the v-basis.
/// Electric case (S = sinc(σ/2), Σ = sinc(σ)):
///
/// (1/2) [[1, S, S, 1], [S, −Σ, 1, −S], [S, 1, −Σ, −S], [1, −S, −S, 1]]
///
/// Gravitational case: S → Σ and the (2,2)/(3,3) entries become −1.
pub fn averaged_q(cfg: &NoiseConfig) -> Mat4 {
    let (a, b) = match cfg.case {
        NoiseCase::Electric => (sinc(cfg.sigma / 2.0), sinc(cfg.sigma)),
        NoiseCase::Gravitational => (sinc(cfg.sigma), 1.0),
    };
    let re = |x: f64| C64::new(0.5 * x, 0.0);
    Mat4 {
        e: [
            [re(1.0), re(a), re(a), re(1.0)],
            [re(a), re(-b), re(1.0), re(-a)],
            [re(a), re(1.0), re(-b), re(-a)],
            [re(1.0), re(-a), re(-a), re(1.0)],
        ],
    }
}

/// Averaged v-basis Fourier operator: the mode phases are noise-independent,
/// so R̄_v(K,p) = Q̄ · diag(e^{2iK}, e^{−2ip}, e^{2ip}, e^{−2iK}).
pub fn averaged_r_v(cfg: &NoiseConfig, big_k: f64, p: f64) -> Mat4 {
    let q = averaged_q(cfg);
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

/// One physical-space step of the exact averaged dynamics (Q̄ in place of Q).
pub fn step_averaged(rho: &DensityField, cfg: &NoiseConfig) -> Result<DensityField> {
    step_density_with(rho, &averaged_q(cfg))
}

/// Trajectory of the exact mean density operator in physical space:
/// `steps + 1` fields, the first being `rho0`. Memory is
/// O(steps · (2M+1)²); keep runs modest or step manually with
/// [`step_averaged`]. If `steps ≥ M` the wavefront wraps around the circle
/// and infinite-line profiles are distorted (see
/// [`crate::walk::wavefront_wraps`]).
pub fn evolve_averaged(
    rho0: &DensityField,
    cfg: &NoiseConfig,
    steps: usize,
) -> Result<Vec<DensityField>> {
    let mut out = Vec::with_capacity(steps + 1);
    out.push(rho0.clone());
    for _ in 0..steps {
        let next = step_averaged(out.last().unwrap(), cfg)?;
        out.push(next);
    }
    Ok(out)
}

/// Trajectory of one Fourier mode under the exact averaged dynamics,
/// `steps + 1` entries, evolved in whichever basis the mode carries.
pub fn evolve_mode(mode: &FourierModeVector, cfg: &NoiseConfig, steps: usize) -> Vec<FourierModeVector> {
    let m = match mode.basis {
        Basis::U => averaged_r_u(cfg.case, mode.big_k, mode.p, cfg.sigma),
        Basis::V => averaged_r_v(cfg, mode.big_k, mode.p),
    };
    let mut out = Vec::with_capacity(steps + 1);
    out.push(*mode);
    let mut v = mode.comp;
    for _ in 0..steps {
        v = m.mulv(&v);
        out.push(FourierModeVector {
            big_k: mode.big_k,
            p: mode.p,
            basis: mode.basis,
            comp: v,
        });
    }
    out
}

/// The standard initial mode (u₁ − i u₄)/2 at given (K, p), u-basis.
pub fn initial_mode(big_k: f64, p: f64) -> FourierModeVector {
    FourierModeVector {
        big_k,
        p,
        basis: Basis::U,
        comp: default_initial_mode_u(),
    }
}

/// Exact moments of the averaged probability profile, computed in Fourier
/// space without ever forming the profile.
///
/// With ĝ_N(K) = Σ_m N_m e^{−2iKm} = 2·⟨a₁ρ̂(K,p)⟩_p, the moments are
/// m²̄_j = −(1/2)⟨∂²_K a₁ρ̂_j⟩_p |_{K=0} and
/// m⁴̄_j = (1/8)⟨∂⁴_K a₁ρ̂_j⟩_p |_{K=0}.
/// K-derivatives at K = 0 are propagated exactly alongside the mode vector:
/// writing R̄(K) = C₀ + cos(2K)·C_c + sin(2K)·C_s (which both closed forms
/// satisfy), the r-th derivative stack obeys
/// v⁽ʳ⁾_j = Σ_s binom(r,s) R̄⁽ˢ⁾(0) v⁽ʳ⁻ˢ⁾_{j−1}. The p-average over
/// `np` uniform points is exact while j < np (the integrand is a
/// trigonometric polynomial of degree ≤ j in 2p).
pub struct MomentSeries {
    /// m²̄ at j = 0..steps.
    pub m2: Vec<f64>,
    /// m⁴̄ at j = 0..steps (only when order-4 propagation was requested).
    pub m4: Option<Vec<f64>>,
}

pub fn averaged_moment_series(
    cfg: &NoiseConfig,
    steps: usize,
    np: usize,
    with_fourth: bool,
) -> Result<MomentSeries> {
    if np == 0 {
        return Err(Error::InvalidConfig("p-grid size must be positive".into()));
    }
    if np <= steps {
        return Err(Error::InvalidConfig(format!(
            "p-grid of {np} points is only exact for fewer than {np} steps, got {steps}"
        )));
    }
    let coef = match cfg.case {
        NoiseCase::Electric => sinc(cfg.sigma / 2.0),
        NoiseCase::Gravitational => sinc(cfg.sigma),
    };
    let order = if with_fourth { 4 } else { 2 };
    // Derivative tables for cos(2K) and sin(2K) at K = 0, orders 0..4.
    let cos_d = [1.0, 0.0, -4.0, 0.0, 16.0];
    let sin_d = [0.0, 2.0, 0.0, -8.0, 0.0];
    let binom: [[f64; 5]; 5] = [
        [1.0, 0.0, 0.0, 0.0, 0.0],
        [1.0, 1.0, 0.0, 0.0, 0.0],
        [1.0, 2.0, 1.0, 0.0, 0.0],
        [1.0, 3.0, 3.0, 1.0, 0.0],
        [1.0, 4.0, 6.0, 4.0, 1.0],
    ];

    let mut sum_m2 = vec![0.0f64; steps + 1];
    let mut sum_m4 = vec![0.0f64; steps + 1];

    for t in 0..np {
        let p = PI * (t as f64) / (np as f64) - FRAC_PI_2;
        // Split R̄(K, p) into its K-independent part and the cos2K/sin2K
        // carriers; only four entries carry K.
        let full = averaged_r_u(cfg.case, 0.0, p, cfg.sigma);
        let mut c0 = full;
        c0.e[0][0] = ZERO;
        c0.e[0][1] = ZERO;
        c0.e[2][0] = ZERO;
        c0.e[2][1] = ZERO;
        let mut cc = Mat4::zeros();
        cc.e[0][0] = ONE;
        cc.e[2][1] = C64::new(coef, 0.0);
        let mut cs = Mat4::zeros();
        cs.e[0][1] = I;
        cs.e[2][0] = I * coef;

        // Derivative matrices R̄⁽ˢ⁾(0) for s = 0..order.
        let deriv: Vec<Mat4> = (0..=order)
            .map(|s| {
                let mut m = cc.scale(C64::new(cos_d[s], 0.0)).add(&cs.scale(C64::new(sin_d[s], 0.0)));
                if s == 0 {
                    m = m.add(&c0);
                }
                m
            })
            .collect();

        let mut stack: Vec<Vec4> = vec![[ZERO; 4]; order + 1];
        stack[0] = default_initial_mode_u();
        sum_m2[0] += 0.0;
        for j in 1..=steps {
            let mut fresh: Vec<Vec4> = vec![[ZERO; 4]; order + 1];
            for r in 0..=order {
                let mut acc = [ZERO; 4];
                for s in 0..=r {
                    let contrib = deriv[s].mulv(&stack[r - s]);
                    let b = binom[r][s];
                    for c in 0..4 {
                        acc[c] += b * contrib[c];
                    }
                }
                fresh[r] = acc;
            }
            stack = fresh;
            sum_m2[j] += -0.5 * stack[2][0].re;
            if with_fourth {
                sum_m4[j] += 0.125 * stack[4][0].re;
            }
        }
    }

    let norm = 1.0 / np as f64;
    let m2 = sum_m2.iter().map(|v| v * norm).collect();
    let m4 = if with_fourth {
        Some(sum_m4.iter().map(|v| v * norm).collect())
    } else {
        None
    };
    Ok(MomentSeries { m2, m4 })
}

/// Monte Carlo ensemble average of the density operator with per-entry and
/// per-site standard errors of the mean.
pub struct MonteCarloEstimate {
    /// Ensemble mean of ρ at the final step, v-basis.
    pub mean: DensityField,
    /// Standard error of each complex entry of `mean`
    /// (√[(Var Re + Var Im)/R]), one plane per component.
    pub entry_std_error: [Vec<f64>; 4],
    /// Ensemble mean of the probability profile N_m.
    pub profile: Vec<f64>,
    /// Standard error of each entry of `profile`.
    pub profile_std_error: Vec<f64>,
    pub realizations: usize,
}

pub fn monte_carlo_average(
    psi0: &SpinorField,
    cfg: &NoiseConfig,
    steps: usize,
    realizations: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    if realizations == 0 {
        return Err(Error::InvalidConfig(
            "monte carlo requires at least one realization".into(),
        ));
    }
    let grid = psi0.grid;
    let n = grid.size();
    let npairs = n * n;
    let mut mean = DensityField::zeros(grid, Basis::V);
    let mut m2: [Vec<f64>; 4] = [
        vec![0.0; npairs],
        vec![0.0; npairs],
        vec![0.0; npairs],
        vec![0.0; npairs],
    ];
    let mut prof_mean = vec![0.0f64; n];
    let mut prof_m2 = vec![0.0f64; n];
    let run_cfg = NoiseConfig { seed, ..*cfg };

    for r in 0..realizations {
        let record = RealizationRecord::generate(&run_cfg, steps, r as u64);
        let psi = record.apply(&run_cfg, psi0);
        let count = (r + 1) as f64;
        // Welford update of every density entry.
        for i in 0..n {
            for ip in 0..n {
                let idx = i * n + ip;
                let sample = [
                    psi.psi_l[i] * psi.psi_l[ip].conj(),
                    psi.psi_l[i] * psi.psi_r[ip].conj(),
                    psi.psi_r[i] * psi.psi_l[ip].conj(),
                    psi.psi_r[i] * psi.psi_r[ip].conj(),
                ];
                for c in 0..4 {
                    let delta = sample[c] - mean.comp[c][idx];
                    mean.comp[c][idx] += delta / count;
                    let delta2 = sample[c] - mean.comp[c][idx];
                    m2[c][idx] += (delta.conj() * delta2).re;
                }
            }
        }
        for i in 0..n {
            let nm = psi.psi_l[i].norm_sqr() + psi.psi_r[i].norm_sqr();
            let delta = nm - prof_mean[i];
            prof_mean[i] += delta / count;
            prof_m2[i] += delta * (nm - prof_mean[i]);
        }
    }

    let rf = realizations as f64;
    let sample_var_norm = if realizations > 1 { rf - 1.0 } else { 1.0 };
    let mut entry_se: [Vec<f64>; 4] = [
        vec![0.0; npairs],
        vec![0.0; npairs],
        vec![0.0; npairs],
        vec![0.0; npairs],
    ];
    for c in 0..4 {
        for idx in 0..npairs {
            entry_se[c][idx] = (m2[c][idx] / sample_var_norm / rf).sqrt();
        }
    }
    let profile_std_error = prof_m2
        .iter()
        .map(|v| (v / sample_var_norm / rf).sqrt())
        .collect();
    Ok(MonteCarloEstimate {
        mean,
        entry_std_error: entry_se,
        profile: prof_mean,
        profile_std_error,
        realizations,
    })
}

/// Conjugates a v-basis 4×4 operator into the u-basis.
pub fn to_u_basis(m_v: &Mat4) -> Mat4 {
    u_from_v_matrix().mul(m_v).mul(&v_from_u_matrix())
}
