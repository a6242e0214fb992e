//! Closed-form asymptotic quantities of the averaged walks — the diffusion
//! exponents α, the diffusion coefficients D, the auxiliary factor s(σ) —
//! together with numerical eigenanalysis of the averaged mode operator and
//! reconstruction of the long-time density profile.
//!
//! For small K the leading eigenvalue of the averaged operator behaves as
//! λ₁ = 1 − α K² + O(K⁴), which makes the u₁ amplitude of a mode decay as
//! exp(−α j K²) and the profile spread diffusively, m²̄ ≈ 2 D j with
//! D = (1/2π)∫ α dp. The gravitational exponent is p-independent, so
//! D^g = α^g; the electric exponent depends on p and its integral has the
//! closed form implemented by [`diffusion_e`].

use crate::grid::CircleGrid;
use crate::linalg::{eig4, eig_residual, vec4_norm, Vec4, C64, ONE, ZERO};
use crate::noise::{averaged_r_u, NoiseCase};
use crate::quadrature::integrate;
use crate::{Error, Result};
use std::f64::consts::PI;

/// sin(x)/x with the removable singularity filled in: sinc(0) = 1.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

/// Numerator and denominator of the electric exponent as functions of
/// cos(2p): α^e = 2(A′ + B′ c)/(A + B c).
fn alpha_electric_parts(sigma: f64) -> (f64, f64, f64, f64) {
    let s2 = sinc(sigma / 2.0).powi(2);
    let sg = sinc(sigma);
    let a_num = 3.0 + sg * sg + 2.0 * s2 * (1.0 + sg);
    let b_num = 4.0 * (sg + s2);
    let a_den = 3.0 + sg * sg - 2.0 * s2 * (1.0 + sg);
    let b_den = 4.0 * (sg - s2);
    (a_num, b_num, a_den, b_den)
}

/// Asymptotic decay exponent of the electric case,
///
/// α^e(p,σ) = 2·[3 + Σ² + 2S²(1+Σ) + 4cos(2p)(Σ + S²)]
///            / [3 + Σ² − 2S²(1+Σ) + 4cos(2p)(Σ − S²)]
///
/// with S = sinc(σ/2), Σ = sinc(σ). Even in p, period π.
pub fn alpha_electric(p: f64, sigma: f64) -> Result<f64> {
    let (a_num, b_num, a_den, b_den) = alpha_electric_parts(sigma);
    let c2p = (2.0 * p).cos();
    let den = a_den + b_den * c2p;
    if den.abs() < 1e-12 {
        return Err(Error::SingularParameter(format!(
            "electric exponent denominator vanishes at p = {p}, sigma = {sigma}"
        )));
    }
    Ok(2.0 * (a_num + b_num * c2p) / den)
}

/// Asymptotic decay exponent of the gravitational case,
/// α^g(σ) = 2(1 + sinc²σ)/(1 − sinc²σ), independent of p.
pub fn alpha_gravitational(sigma: f64) -> Result<f64> {
    let sg = sinc(sigma);
    let den = 1.0 - sg * sg;
    if den.abs() < 1e-12 {
        return Err(Error::SingularParameter(format!(
            "gravitational exponent diverges (ballistic limit) at sigma = {sigma}"
        )));
    }
    Ok(2.0 * (1.0 + sg * sg) / den)
}

/// The exponent for either case.
pub fn alpha_for(case: NoiseCase, p: f64, sigma: f64) -> Result<f64> {
    match case {
        NoiseCase::Electric => alpha_electric(p, sigma),
        NoiseCase::Gravitational => alpha_gravitational(sigma),
    }
}

/// Auxiliary square-root factor of the electric diffusion coefficient,
/// s(σ) = √[(3 + Σ² − 2S²(1+Σ))² − 16(Σ − S²)²].
pub fn s_factor(sigma: f64) -> Result<f64> {
    let s2 = sinc(sigma / 2.0).powi(2);
    let sg = sinc(sigma);
    let x = 3.0 + sg * sg - 2.0 * s2 * (1.0 + sg);
    let y = sg - s2;
    let radicand = x * x - 16.0 * y * y;
    if radicand < -1e-12 {
        return Err(Error::SingularParameter(format!(
            "negative radicand {radicand} in s(sigma) at sigma = {sigma}"
        )));
    }
    Ok(radicand.max(0.0).sqrt())
}

/// Gravitational diffusion coefficient D^g(σ) = 2(1+sinc²σ)/(1−sinc²σ).
/// Equals α^g because the p-average of a constant is itself.
pub fn diffusion_g(sigma: f64) -> Result<f64> {
    alpha_gravitational(sigma)
}

/// Electric diffusion coefficient
///
/// D^e(σ) = [2/(Σ − S²)]·[(Σ + S²) + 2S²(Σ² + 2Σ − 3)/s(σ)],
///
/// the closed form of (1/2π)∫_{−π}^{π} α^e(p,σ) dp.
pub fn diffusion_e(sigma: f64) -> Result<f64> {
    let s2 = sinc(sigma / 2.0).powi(2);
    let sg = sinc(sigma);
    let den = sg - s2;
    if den.abs() < 1e-12 {
        return Err(Error::SingularParameter(format!(
            "electric diffusion coefficient singular at sigma = {sigma}"
        )));
    }
    let s = s_factor(sigma)?;
    if s <= 0.0 {
        return Err(Error::SingularParameter(format!(
            "s(sigma) vanishes at sigma = {sigma}"
        )));
    }
    Ok((2.0 / den) * ((sg + s2) + 2.0 * s2 * (sg * sg + 2.0 * sg - 3.0) / s))
}

/// Diffusion coefficient for either case.
pub fn diffusion_for(case: NoiseCase, sigma: f64) -> Result<f64> {
    match case {
        NoiseCase::Electric => diffusion_e(sigma),
        NoiseCase::Gravitational => diffusion_g(sigma),
    }
}

/// One eigenpair of the averaged mode operator, normalized so the first
/// u-component equals one.
#[derive(Debug, Clone, Copy)]
pub struct EigenPair {
    pub eigenvalue: C64,
    pub w: Vec4,
    pub big_k: f64,
    pub p: f64,
    pub sigma: f64,
    pub case: NoiseCase,
}

/// Numerically diagonalizes the exact 4×4 averaged operator and returns the
/// eigenpair continuously connected to (λ = 1, w = u₁) at K = 0, resolved by
/// overlap maximization with u₁ rather than by eigenvalue ordering. The
/// eigenvector is scaled so its first component is exactly one.
pub fn leading_eigenpair(
    case: NoiseCase,
    big_k: f64,
    p: f64,
    sigma: f64,
) -> Result<EigenPair> {
    if big_k == 0.0 {
        // u₁ is an exact eigenvector with eigenvalue 1 at K = 0: the first
        // column of the averaged operator is (cos2K, 0, coef·i·sin2K, 0).
        return Ok(EigenPair {
            eigenvalue: ONE,
            w: [ONE, ZERO, ZERO, ZERO],
            big_k,
            p,
            sigma,
            case,
        });
    }
    let m = averaged_r_u(case, big_k, p, sigma);
    let pairs = eig4(&m);
    let mut overlap: Vec<(f64, usize)> = pairs
        .iter()
        .enumerate()
        .map(|(i, (_, v))| (v[0].norm() / vec4_norm(v), i))
        .collect();
    overlap.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    if overlap[0].0 - overlap[1].0 < 1e-10 {
        return Err(Error::DegenerateEigenpair {
            lambda_a: pairs[overlap[0].1].0,
            lambda_b: pairs[overlap[1].1].0,
        });
    }
    let (lambda, raw) = pairs[overlap[0].1];
    if raw[0].norm() < 1e-12 {
        return Err(Error::NumericalValidity(
            "leading eigenvector has no u1 component to normalize against".into(),
        ));
    }
    let w = [ONE, raw[1] / raw[0], raw[2] / raw[0], raw[3] / raw[0]];
    let residual = eig_residual(&m, lambda, &w);
    if residual > 1e-10 * vec4_norm(&w) {
        return Err(Error::NumericalValidity(format!(
            "eigenpair residual {residual} exceeds tolerance at K={big_k}, p={p}, sigma={sigma}"
        )));
    }
    if lambda.norm() > 1.0 + 1e-10 {
        return Err(Error::NumericalValidity(format!(
            "averaged operator eigenvalue modulus {} exceeds one",
            lambda.norm()
        )));
    }
    Ok(EigenPair {
        eigenvalue: lambda,
        w,
        big_k,
        p,
        sigma,
        case,
    })
}

/// Long-time u₁ amplitude of a mode, (1/2)·exp(−α(p,σ) j K²); every other
/// component is zero in this approximation.
pub fn asymptotic_mode_amplitude(
    j: u64,
    big_k: f64,
    p: f64,
    sigma: f64,
    case: NoiseCase,
) -> Result<C64> {
    if j < 1 {
        return Err(Error::InvalidConfig(
            "asymptotic amplitude needs j >= 1".into(),
        ));
    }
    let alpha = alpha_for(case, p, sigma)?;
    Ok(C64::new(
        0.5 * (-alpha * j as f64 * big_k * big_k).exp(),
        0.0,
    ))
}

/// ∫ exp(−a K²) cos(K m) dK over the effective support of the Gaussian,
/// by composite 15-point Gauss–Kronrod panels sized to resolve both the
/// Gaussian width and the cosine oscillation. `a` must be positive.
fn gaussian_cos_integral(a: f64, m: f64) -> f64 {
    let half_width = 8.0 / a.sqrt();
    let panels = ((half_width * (m.abs() + 1.0)).ceil() as usize).clamp(16, 512);
    let nodes = [
        0.991455371120813,
        0.949107912342759,
        0.864864423359769,
        0.741531185599394,
        0.586087235467691,
        0.405845151377397,
        0.207784955007898,
        0.0,
    ];
    let weights = [
        0.022935322010529,
        0.063092092629979,
        0.104790010322250,
        0.140653259715525,
        0.169004726639267,
        0.190350578064785,
        0.204432940075298,
        0.209482141084728,
    ];
    let f = |k: f64| (-a * k * k).exp() * (k * m).cos();
    let mut total = 0.0;
    let step = 2.0 * half_width / panels as f64;
    for i in 0..panels {
        let lo = -half_width + i as f64 * step;
        let center = lo + 0.5 * step;
        let half = 0.5 * step;
        let mut acc = weights[7] * f(center);
        for q in 0..7 {
            let off = half * nodes[q];
            acc += weights[q] * (f(center - off) + f(center + off));
        }
        total += acc * half;
    }
    total
}

/// Asymptotic profile on a site window, plus a flag recording whether the
/// width criterion held.
#[derive(Debug, Clone)]
pub struct AsymptoticProfile {
    pub values: Vec<f64>,
    /// True when min_p α(p,σ)·j·π² ≥ 10, the validity criterion for the
    /// Gaussian mode approximation to have decayed inside the Brillouin
    /// zone; profiles computed below it carry this warning flag instead of
    /// failing.
    pub width_ok: bool,
}

/// Long-time density profile
///
/// N_{jm} = (1/4π²) ∫_{−π}^{π} dp ∫ dK exp(−α(p,σ) j K²) e^{−iKm},
///
/// with the inner Gaussian integral taken over its effective support and
/// the outer p-integral by adaptive quadrature (skipped in the
/// gravitational case, where α is constant in p).
pub fn asymptotic_density(
    j: u64,
    grid: &CircleGrid,
    sigma: f64,
    case: NoiseCase,
) -> Result<AsymptoticProfile> {
    if j < 1 {
        return Err(Error::InvalidConfig(
            "asymptotic density needs j >= 1".into(),
        ));
    }
    let jf = j as f64;
    match case {
        NoiseCase::Gravitational => {
            let alpha = alpha_gravitational(sigma)?;
            let width_ok = alpha * jf * PI * PI >= 10.0;
            let values = grid
                .sites()
                .map(|m| gaussian_cos_integral(alpha * jf, m as f64) / (2.0 * PI))
                .collect();
            Ok(AsymptoticProfile { values, width_ok })
        }
        NoiseCase::Electric => {
            let (a_num, b_num, a_den, b_den) = alpha_electric_parts(sigma);
            // The exponent is a Möbius function of cos(2p), so its extrema
            // over p sit exactly at cos(2p) = ±1.
            if a_den - b_den.abs() < 1e-9 {
                return Err(Error::SingularParameter(format!(
                    "electric exponent denominator not bounded away from zero at sigma = {sigma}"
                )));
            }
            if a_num - b_num.abs() <= 0.0 {
                return Err(Error::SingularParameter(format!(
                    "electric exponent loses positivity at sigma = {sigma}"
                )));
            }
            let alpha_at = |c2p: f64| 2.0 * (a_num + b_num * c2p) / (a_den + b_den * c2p);
            let alpha_min = alpha_at(1.0).min(alpha_at(-1.0));
            let width_ok = alpha_min * jf * PI * PI >= 10.0;
            let mut values = Vec::with_capacity(grid.size());
            for m in grid.sites() {
                let mf = m as f64;
                let outer = integrate(
                    |p| gaussian_cos_integral(alpha_at((2.0 * p).cos()) * jf, mf),
                    -PI,
                    PI,
                    1e-10,
                )?;
                values.push(outer / (4.0 * PI * PI));
            }
            Ok(AsymptoticProfile { values, width_ok })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::CircleGrid;
    use crate::linalg::I;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn sinc_basics() {
        assert_eq!(sinc(0.0), 1.0);
        assert!(sinc(PI).abs() < 1e-16);
        for x in [0.3, 1.7, 4.4] {
            assert!((sinc(x) - sinc(-x)).abs() < 1e-16);
        }
    }

    #[test]
    fn sinc_matches_taylor_series_at_half() {
        // Σ (−1)ⁿ x²ⁿ/(2n+1)! evaluated far past f64 precision at x = 1/2.
        let x: f64 = 0.5;
        let mut term = 1.0;
        let mut series = 1.0;
        for n in 1..12 {
            let tn = 2 * n;
            term *= -x * x / ((tn * (tn + 1)) as f64);
            series += term;
        }
        assert!((sinc(x) - series).abs() < 1e-14, "{}", sinc(x) - series);
    }

    #[test]
    fn alpha_electric_is_even_and_pi_periodic_in_p() {
        for (p, sigma) in [(0.4, 0.9), (1.3, 2.2), (2.8, 4.5)] {
            let a = alpha_electric(p, sigma).unwrap();
            assert!((a - alpha_electric(-p, sigma).unwrap()).abs() < 1e-12);
            assert!((a - alpha_electric(p + PI, sigma).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn alpha_electric_frozen_value_at_quarter_pi() {
        // σ = π, p = π/4: cos2p = 0, so α = 2(3 + 2S²)/(3 − 2S²) with
        // S = 2/π.
        let s2 = (2.0 / PI) * (2.0 / PI);
        let direct = 2.0 * (3.0 + 2.0 * s2) / (3.0 - 2.0 * s2);
        let a = alpha_electric(PI / 4.0, PI).unwrap();
        assert!((a - direct).abs() < 1e-14);
        assert!((a - 3.4808772559).abs() < 1e-9, "{a}");
    }

    #[test]
    fn alpha_electric_detects_vanishing_denominator() {
        // As σ → 0 the denominator at p = 0 collapses to zero: the
        // noiseless walk is ballistic, not diffusive.
        assert!(matches!(
            alpha_electric(0.0, 1e-7),
            Err(Error::SingularParameter(_))
        ));
    }

    #[test]
    fn alpha_gravitational_values() {
        assert!((alpha_gravitational(PI).unwrap() - 2.0).abs() < 1e-14);
        assert!((alpha_gravitational(1.0).unwrap() - 11.7020752833).abs() < 1e-9);
        assert!(matches!(
            alpha_gravitational(0.0),
            Err(Error::SingularParameter(_))
        ));
    }

    #[test]
    fn s_factor_matches_direct_substitution_at_pi() {
        let s2 = (2.0 / PI) * (2.0 / PI);
        let direct = ((3.0 - 2.0 * s2).powi(2) - 16.0 * s2 * s2).sqrt();
        let s = s_factor(PI).unwrap();
        assert!((s - direct).abs() < 1e-14);
        assert!((s - 1.4716).abs() < 5e-5, "{s}");
    }

    #[test]
    fn s_factor_vanishes_in_the_noiseless_limit() {
        let s = s_factor(1e-4).unwrap();
        assert!(s >= 0.0 && s < 1e-7, "{s}");
    }

    #[test]
    fn s_factor_real_and_finite_across_domain() {
        for i in 0..100 {
            let sigma = 0.05 + (2.0 * PI - 0.1) * i as f64 / 99.0;
            let s = s_factor(sigma).unwrap();
            assert!(s.is_finite() && s >= 0.0, "sigma {sigma}");
        }
    }

    #[test]
    fn diffusion_g_frozen_values() {
        assert!((diffusion_g(PI).unwrap() - 2.0).abs() < 1e-14);
        assert!(
            (diffusion_g(0.5).unwrap() - 47.624952144).abs() / 47.624952144 < 1e-9,
            "{}",
            diffusion_g(0.5).unwrap()
        );
        assert_eq!(
            diffusion_g(1.3).unwrap(),
            alpha_gravitational(1.3).unwrap()
        );
    }

    #[test]
    fn diffusion_e_frozen_values() {
        for (sigma, want) in [
            (0.5, 2752.3663),
            (0.8, 633.7306848),
            (1.0, 310.61997),
            (2.0, 30.10278),
            (PI, 6.1545629),
            (4.0, 3.1027111),
        ] {
            let d = diffusion_e(sigma).unwrap();
            assert!(
                ((d - want) / want).abs() < 1e-6,
                "sigma {sigma}: got {d}, frozen {want}"
            );
        }
    }

    #[test]
    fn diffusion_matches_p_quadrature_of_alpha() {
        // At σ = 0.8 the integrand spikes to ~6700 near p = 0 and ±π
        // (denominator minimum ≈ 0.0044), so the absolute tolerance is set
        // against the integral's ~4000 magnitude, far tighter than the
        // 1e−8 relative assertion below.
        for sigma in [0.8, 2.0, 4.0] {
            let quad = integrate(
                |p| alpha_electric(p, sigma).unwrap(),
                -PI,
                PI,
                1e-7,
            )
            .unwrap()
                / (2.0 * PI);
            let closed = diffusion_e(sigma).unwrap();
            assert!(
                ((quad - closed) / closed).abs() < 1e-8,
                "sigma {sigma}: quadrature {quad} vs closed form {closed}"
            );
        }
        let quad_g = integrate(
            |_| alpha_gravitational(1.1).unwrap(),
            -PI,
            PI,
            1e-10,
        )
        .unwrap()
            / (2.0 * PI);
        assert!((quad_g - diffusion_g(1.1).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn gravitational_diffusion_below_electric_at_moderate_sigma() {
        for i in 0..50 {
            let sigma = 0.3 + (5.0 - 0.3) * i as f64 / 49.0;
            let dg = diffusion_g(sigma).unwrap();
            let de = diffusion_e(sigma).unwrap();
            assert!(dg < de, "sigma {sigma}: D^g {dg} vs D^e {de}");
        }
    }

    #[test]
    fn leading_eigenpair_at_zero_k_is_exactly_unit() {
        for case in [NoiseCase::Electric, NoiseCase::Gravitational] {
            let ep = leading_eigenpair(case, 0.0, 0.83, 1.2).unwrap();
            assert_eq!(ep.eigenvalue, ONE);
            assert_eq!(ep.w, [ONE, ZERO, ZERO, ZERO]);
        }
    }

    #[test]
    fn u1_is_exact_eigenvector_at_zero_k() {
        for case in [NoiseCase::Electric, NoiseCase::Gravitational] {
            let m = averaged_r_u(case, 0.0, 0.83, 1.2);
            let image = m.mulv(&[ONE, ZERO, ZERO, ZERO]);
            assert!((image[0] - ONE).norm() < 1e-15);
            assert!(image[1].norm() + image[2].norm() + image[3].norm() < 1e-15);
        }
    }

    #[test]
    fn eigenvalue_curvature_recovers_alpha() {
        for (case, p, sigma) in [
            (NoiseCase::Gravitational, 0.7, 1.0),
            (NoiseCase::Electric, 1.2, 2.0),
        ] {
            let alpha = alpha_for(case, p, sigma).unwrap();
            let r = |k: f64| {
                let ep = leading_eigenpair(case, k, p, sigma).unwrap();
                (ONE - ep.eigenvalue) / (k * k)
            };
            let coarse = r(1e-2);
            let fine = r(1e-3);
            let extrap = (100.0 * fine - coarse) / 99.0;
            assert!(
                ((extrap - alpha) / alpha).norm() < 1e-4,
                "case {case:?}: extrapolated {extrap} vs {alpha}"
            );
            // Convergence is second order: the error must drop by roughly
            // 100 when K drops by 10.
            let err_coarse = (coarse - alpha).norm();
            let err_fine = (fine - alpha).norm();
            assert!(
                err_coarse >= 10.0 * err_fine,
                "coarse error {err_coarse} vs fine {err_fine}"
            );
        }
    }

    #[test]
    fn gravitational_alpha_is_p_independent_in_the_spectrum() {
        // The K⁴ coefficient of λ₁ grows with p, so the Richardson pair
        // must sit at small enough K for its leftover (≈ γK⁴/100) to drop
        // below the agreement tolerance; {1e−3, 1e−4} leaves ~1e−8.
        let sigma = 1.0;
        let extract = |p: f64| {
            let fine = (ONE - leading_eigenpair(NoiseCase::Gravitational, 1e-4, p, sigma)
                .unwrap()
                .eigenvalue)
                / 1e-8;
            let coarse = (ONE - leading_eigenpair(NoiseCase::Gravitational, 1e-3, p, sigma)
                .unwrap()
                .eigenvalue)
                / 1e-6;
            (100.0 * fine - coarse) / 99.0
        };
        let a = extract(0.3);
        let b = extract(1.2);
        let alpha = alpha_gravitational(sigma).unwrap();
        assert!((a - b).norm() / alpha < 1e-6, "{a} vs {b}");
    }

    #[test]
    fn leading_eigenvector_matches_small_k_expansion() {
        // Gravitational small-K eigenvector components:
        // w₂ ≈ 2iK Σ²/(1−Σ²), w₃ ≈ 2iK Σ/(1−Σ²), w₄ ≈ −2K Σ tan(p)/(1−Σ²),
        // with O(K²) corrections bounded well below C·K².
        let sigma = 1.0;
        let p = 0.7;
        let sg = sinc(sigma);
        let denom = 1.0 - sg * sg;
        for k in [1e-3, 1e-4] {
            let ep = leading_eigenpair(NoiseCase::Gravitational, k, p, sigma).unwrap();
            let want1 = I * (2.0 * k * sg * sg / denom);
            let want2 = I * (2.0 * k * sg / denom);
            let want3 = C64::new(-2.0 * k * sg * p.tan() / denom, 0.0);
            let bound = 1500.0 * k * k;
            assert!((ep.w[1] - want1).norm() < bound, "w2 at K={k}");
            assert!((ep.w[2] - want2).norm() < bound, "w3 at K={k}");
            assert!((ep.w[3] - want3).norm() < bound, "w4 at K={k}");
        }
    }

    #[test]
    fn all_eigenvalues_stay_inside_unit_disk() {
        for case in [NoiseCase::Electric, NoiseCase::Gravitational] {
            for big_k in [0.01, 0.05] {
                for p in [0.4, 1.1, 2.3] {
                    for sigma in [0.6, 1.8, 3.9] {
                        let m = averaged_r_u(case, big_k, p, sigma);
                        for (lambda, _) in eig4(&m) {
                            assert!(
                                lambda.norm() <= 1.0 + 1e-10,
                                "case {case:?} K {big_k} p {p} sigma {sigma}: |lambda| = {}",
                                lambda.norm()
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn gravitational_u4_reaches_unit_modulus_on_exceptional_set() {
        // At K = 0 and sin(2p) = 0 the fourth basis vector is an exact
        // eigenvector with eigenvalue −cos(2p): modulus one at p = 0, ±π/2,
        // ±π regardless of σ.
        for (p, want) in [(0.0, -ONE), (FRAC_PI_2, ONE), (PI, -ONE)] {
            let m = averaged_r_u(NoiseCase::Gravitational, 0.0, p, 1.3);
            let image = m.mulv(&[ZERO, ZERO, ZERO, ONE]);
            assert!(image[0].norm() + image[1].norm() + image[2].norm() < 1e-14);
            assert!((image[3] - want).norm() < 1e-14, "p = {p}");
        }
    }

    #[test]
    fn subleading_eigenvalues_decay_off_the_exceptional_set() {
        for case in [NoiseCase::Electric, NoiseCase::Gravitational] {
            for p in [0.4, 0.9, 2.0, 2.7] {
                for sigma in [0.5, 1.5, 3.0] {
                    let m = averaged_r_u(case, 0.0, p, sigma);
                    let pairs = eig4(&m);
                    let mut mods: Vec<f64> =
                        pairs.iter().map(|(l, _)| l.norm()).collect();
                    mods.sort_by(|a, b| b.partial_cmp(a).unwrap());
                    assert!((mods[0] - 1.0).abs() < 1e-10);
                    assert!(
                        mods[1] < 1.0 - 1e-6,
                        "case {case:?} p {p} sigma {sigma}: subleading {}",
                        mods[1]
                    );
                }
            }
        }
    }

    #[test]
    fn mode_amplitude_basics() {
        let half = asymptotic_mode_amplitude(17, 0.0, 0.9, 1.1, NoiseCase::Electric).unwrap();
        assert!((half - C64::new(0.5, 0.0)).norm() < 1e-15);
        assert!(asymptotic_mode_amplitude(0, 0.1, 0.9, 1.1, NoiseCase::Electric).is_err());
        // K = K⋆/√j gives a j-independent amplitude.
        let kstar = 0.8f64;
        let a1 = asymptotic_mode_amplitude(100, kstar / 10.0, 0.0, 1.0, NoiseCase::Gravitational)
            .unwrap();
        let a2 = asymptotic_mode_amplitude(400, kstar / 20.0, 0.0, 1.0, NoiseCase::Gravitational)
            .unwrap();
        assert!((a1 - a2).norm() < 1e-12);
        let alpha = alpha_gravitational(1.0).unwrap();
        let want = 0.5 * (-alpha * kstar * kstar).exp();
        assert!((a1.re - want).abs() < 1e-12);
    }

    #[test]
    fn gaussian_integral_matches_closed_form() {
        for (a, m) in [(25.0, 0.0), (25.0, 7.0), (400.0, 31.0), (3.0, 2.0)] {
            let got = gaussian_cos_integral(a, m);
            let want = (PI / a).sqrt() * (-m * m / (4.0 * a)).exp();
            assert!(
                (got - want).abs() < 1e-12 * (PI / a).sqrt(),
                "a {a} m {m}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn gravitational_asymptotic_density_is_the_gaussian() {
        let sigma = 1.0;
        let j = 300u64;
        let grid = CircleGrid::new(450).unwrap();
        let profile = asymptotic_density(j, &grid, sigma, NoiseCase::Gravitational).unwrap();
        assert!(profile.width_ok);
        let alpha = alpha_gravitational(sigma).unwrap();
        let aj = alpha * j as f64;
        let mut total = 0.0;
        for (i, m) in grid.sites().enumerate() {
            let mf = m as f64;
            let gauss = (4.0 * PI * aj).powf(-0.5) * (-mf * mf / (4.0 * aj)).exp();
            assert!(
                (profile.values[i] - gauss).abs() < 1e-6,
                "m {m}: {} vs {gauss}",
                profile.values[i]
            );
            total += profile.values[i];
        }
        assert!((total - 1.0).abs() < 1e-3, "mass {total}");
        let mut second = 0.0;
        for (i, m) in grid.sites().enumerate() {
            second += (m as f64).powi(2) * profile.values[i];
        }
        let want = 2.0 * diffusion_g(sigma).unwrap() * j as f64;
        assert!(
            ((second - want) / want).abs() < 0.01,
            "second moment {second} vs 2Dj {want}"
        );
    }

    #[test]
    fn electric_asymptotic_density_mass_moment_and_cusp() {
        let sigma = PI;
        let j = 150u64;
        let grid = CircleGrid::new(300).unwrap();
        let profile = asymptotic_density(j, &grid, sigma, NoiseCase::Electric).unwrap();
        assert!(profile.width_ok);
        let mut total = 0.0;
        let mut second = 0.0;
        for (i, m) in grid.sites().enumerate() {
            total += profile.values[i];
            second += (m as f64).powi(2) * profile.values[i];
        }
        assert!((total - 1.0).abs() < 1e-3, "mass {total}");
        let want = 2.0 * diffusion_e(sigma).unwrap() * j as f64;
        assert!(
            ((second - want) / want).abs() < 0.01,
            "second moment {second} vs 2Dj {want}"
        );
        // Central cusp: the profile exceeds at m = 0 the Gaussian carrying
        // the same variance.
        let center = profile.values[grid.index_of(0)];
        let gauss_peak = (2.0 * PI * second).powf(-0.5);
        assert!(
            center > gauss_peak,
            "center {center} vs matching Gaussian {gauss_peak}"
        );
    }

    #[test]
    fn asymptotic_density_flags_narrow_width() {
        // The gravitational exponent never drops below 2, so its width
        // criterion holds for every j ≥ 1; the electric exponent at
        // σ = 0.8 dips to about 0.104 near cos(2p) = −1, putting small j
        // below the validity threshold.
        let grid = CircleGrid::new(3).unwrap();
        let profile = asymptotic_density(5, &grid, 0.8, NoiseCase::Electric).unwrap();
        assert!(!profile.width_ok);
        let ok = asymptotic_density(1, &grid, 3.0, NoiseCase::Gravitational).unwrap();
        assert!(ok.width_ok);
    }

    #[test]
    fn asymptotic_density_rejects_zero_steps_and_sigma() {
        let grid = CircleGrid::new(10).unwrap();
        assert!(asymptotic_density(0, &grid, 1.0, NoiseCase::Gravitational).is_err());
        assert!(asymptotic_density(10, &grid, 0.0, NoiseCase::Gravitational).is_err());
    }
}
