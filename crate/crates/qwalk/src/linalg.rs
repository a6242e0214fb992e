//! Dense 2×2 and 4×4 complex matrix kernels.
//!
//! Everything in the crate reduces to small fixed-size matrices: the coin
//! acts on two spin components, density components live in a
//! four-dimensional spin-pair space. Matrices are stored row-major in
//! fixed arrays; none of the routines allocate.

use num_complex::Complex64;

pub type C64 = Complex64;
pub type Vec2 = [C64; 2];
pub type Vec4 = [C64; 4];

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2 {
    pub e: [[C64; 2]; 2],
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat4 {
    pub e: [[C64; 4]; 4],
}

impl Mat2 {
    pub fn zeros() -> Self {
        Mat2 { e: [[ZERO; 2]; 2] }
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        m.e[0][0] = ONE;
        m.e[1][1] = ONE;
        m
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        let mut out = Mat2::zeros();
        for i in 0..2 {
            for j in 0..2 {
                let mut acc = ZERO;
                for k in 0..2 {
                    acc += self.e[i][k] * rhs.e[k][j];
                }
                out.e[i][j] = acc;
            }
        }
        out
    }

    pub fn mulv(&self, v: &Vec2) -> Vec2 {
        [
            self.e[0][0] * v[0] + self.e[0][1] * v[1],
            self.e[1][0] * v[0] + self.e[1][1] * v[1],
        ]
    }

    pub fn adjoint(&self) -> Mat2 {
        let mut out = Mat2::zeros();
        for i in 0..2 {
            for j in 0..2 {
                out.e[i][j] = self.e[j][i].conj();
            }
        }
        out
    }

    pub fn det(&self) -> C64 {
        self.e[0][0] * self.e[1][1] - self.e[0][1] * self.e[1][0]
    }

    pub fn trace(&self) -> C64 {
        self.e[0][0] + self.e[1][1]
    }

    pub fn max_abs_diff(&self, rhs: &Mat2) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.e[i][j] - rhs.e[i][j]).norm());
            }
        }
        worst
    }

    /// Eigenvalues of a Hermitian 2×2 matrix, descending.
    ///
    /// Only the real diagonal and one off-diagonal entry are read; the
    /// caller is responsible for Hermiticity.
    pub fn hermitian_eigenvalues(&self) -> [f64; 2] {
        let a = self.e[0][0].re;
        let d = self.e[1][1].re;
        let b2 = self.e[0][1].norm_sqr();
        let half_tr = 0.5 * (a + d);
        let disc = (0.25 * (a - d) * (a - d) + b2).max(0.0).sqrt();
        [half_tr + disc, half_tr - disc]
    }
}

impl Mat4 {
    pub fn zeros() -> Self {
        Mat4 { e: [[ZERO; 4]; 4] }
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..4 {
            m.e[i][i] = ONE;
        }
        m
    }

    pub fn diag(d: &Vec4) -> Self {
        let mut m = Self::zeros();
        for i in 0..4 {
            m.e[i][i] = d[i];
        }
        m
    }

    pub fn mul(&self, rhs: &Mat4) -> Mat4 {
        let mut out = Mat4::zeros();
        for i in 0..4 {
            for k in 0..4 {
                let a = self.e[i][k];
                for j in 0..4 {
                    out.e[i][j] += a * rhs.e[k][j];
                }
            }
        }
        out
    }

    pub fn mulv(&self, v: &Vec4) -> Vec4 {
        let mut out = [ZERO; 4];
        for i in 0..4 {
            let row = &self.e[i];
            out[i] = row[0] * v[0] + row[1] * v[1] + row[2] * v[2] + row[3] * v[3];
        }
        out
    }

    pub fn adjoint(&self) -> Mat4 {
        let mut out = Mat4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                out.e[i][j] = self.e[j][i].conj();
            }
        }
        out
    }

    pub fn add(&self, rhs: &Mat4) -> Mat4 {
        let mut out = *self;
        for i in 0..4 {
            for j in 0..4 {
                out.e[i][j] += rhs.e[i][j];
            }
        }
        out
    }

    pub fn sub(&self, rhs: &Mat4) -> Mat4 {
        let mut out = *self;
        for i in 0..4 {
            for j in 0..4 {
                out.e[i][j] -= rhs.e[i][j];
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Mat4 {
        let mut out = *self;
        for i in 0..4 {
            for j in 0..4 {
                out.e[i][j] *= s;
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        self.e[0][0] + self.e[1][1] + self.e[2][2] + self.e[3][3]
    }

    pub fn max_abs_entry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max(self.e[i][j].norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, rhs: &Mat4) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((self.e[i][j] - rhs.e[i][j]).norm());
            }
        }
        worst
    }

    pub fn frobenius_diff(&self, rhs: &Mat4) -> f64 {
        let mut acc = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                acc += (self.e[i][j] - rhs.e[i][j]).norm_sqr();
            }
        }
        acc.sqrt()
    }

    fn one_norm(&self) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..4 {
            let mut col = 0.0f64;
            for i in 0..4 {
                col += self.e[i][j].norm();
            }
            worst = worst.max(col);
        }
        worst
    }

    /// Deviation from unitarity, max-entry norm of `A†A − I`.
    pub fn unitarity_defect(&self) -> f64 {
        self.adjoint().mul(self).max_abs_diff(&Mat4::identity())
    }
}

pub fn vec4_norm(v: &Vec4) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn vec4_sub(a: &Vec4, b: &Vec4) -> Vec4 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
///
/// Returns `None` when a pivot falls below an absolute floor, which for
/// the matrices handled here means singular to working precision.
pub fn solve4(a: &Mat4, b: &Vec4) -> Option<Vec4> {
    let mut m = a.e;
    let mut rhs = *b;
    for col in 0..4 {
        let mut pivot = col;
        for row in (col + 1)..4 {
            if m[row][col].norm() > m[pivot][col].norm() {
                pivot = row;
            }
        }
        if m[pivot][col].norm() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        let inv = ONE / m[col][col];
        for row in (col + 1)..4 {
            let f = m[row][col] * inv;
            if f == ZERO {
                continue;
            }
            for k in col..4 {
                let sub = f * m[col][k];
                m[row][k] -= sub;
            }
            let sub = f * rhs[col];
            rhs[row] -= sub;
        }
    }
    let mut x = [ZERO; 4];
    for row in (0..4).rev() {
        let mut acc = rhs[row];
        for k in (row + 1)..4 {
            acc -= m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Some(x)
}

pub fn inverse4(a: &Mat4) -> Option<Mat4> {
    let mut out = Mat4::zeros();
    for j in 0..4 {
        let mut e = [ZERO; 4];
        e[j] = ONE;
        let col = solve4(a, &e)?;
        for i in 0..4 {
            out.e[i][j] = col[i];
        }
    }
    Some(out)
}

/// Coefficients of the characteristic polynomial
/// `λ⁴ + c[3]λ³ + c[2]λ² + c[1]λ + c[0]`, from traces of matrix powers.
fn char_poly(a: &Mat4) -> [C64; 4] {
    let a2 = a.mul(a);
    let a3 = a2.mul(a);
    let a4 = a3.mul(a);
    let t1 = a.trace();
    let t2 = a2.trace();
    let t3 = a3.trace();
    let t4 = a4.trace();
    let e1 = t1;
    let e2 = (t1 * t1 - t2) * 0.5;
    let e3 = (t1 * t1 * t1 - t1 * t2 * 3.0 + t3 * 2.0) / 6.0;
    let e4 = (t1 * t1 * t1 * t1 - t1 * t1 * t2 * 6.0 + t2 * t2 * 3.0 + t1 * t3 * 8.0
        - t4 * 6.0)
        / 24.0;
    [e4, -e3, e2, -e1]
}

fn poly_eval(c: &[C64; 4], z: C64) -> C64 {
    (((z + c[3]) * z + c[2]) * z + c[1]) * z + c[0]
}

fn poly_deriv_eval(c: &[C64; 4], z: C64) -> C64 {
    ((z * 4.0 + c[3] * 3.0) * z + c[2] * 2.0) * z + c[1]
}

/// All roots of the monic quartic, by Durand–Kerner iteration with a
/// Newton polish.
fn quartic_roots(c: &[C64; 4]) -> [C64; 4] {
    let radius = 1.0
        + c.iter()
            .map(|z| z.norm())
            .fold(0.0f64, f64::max);
    let seed = C64::new(0.4, 0.9);
    let mut z = [ZERO; 4];
    let mut w = ONE;
    for root in z.iter_mut() {
        w *= seed;
        *root = w * radius;
    }
    for _ in 0..200 {
        let mut moved = 0.0f64;
        for i in 0..4 {
            let mut denom = ONE;
            for j in 0..4 {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            let step = poly_eval(c, z[i]) / denom;
            z[i] -= step;
            moved = moved.max(step.norm());
        }
        if moved < 1e-15 * radius {
            break;
        }
    }
    for root in z.iter_mut() {
        for _ in 0..3 {
            let d = poly_deriv_eval(c, *root);
            if d.norm() < 1e-30 {
                break;
            }
            *root -= poly_eval(c, *root) / d;
        }
    }
    z
}

/// Eigenvector for a known eigenvalue, by inverse iteration with a tiny
/// shift off the exact eigenvalue. Returned vector has unit norm.
fn eigenvector_for(a: &Mat4, lambda: C64) -> Vec4 {
    let scale = a.one_norm().max(1.0);
    let shift = lambda + C64::new(1e-13 * scale, 1e-13 * scale);
    let mut shifted = *a;
    for i in 0..4 {
        shifted.e[i][i] -= shift;
    }
    let mut v: Vec4 = [
        C64::new(0.5, 0.1),
        C64::new(0.45, -0.2),
        C64::new(0.55, 0.15),
        C64::new(0.4, -0.05),
    ];
    for _ in 0..3 {
        match solve4(&shifted, &v) {
            Some(next) => {
                let n = vec4_norm(&next);
                if !n.is_finite() || n == 0.0 {
                    break;
                }
                for (dst, src) in v.iter_mut().zip(next.iter()) {
                    *dst = src / n;
                }
            }
            None => break,
        }
    }
    v
}

/// Full eigendecomposition of a general complex 4×4 matrix.
///
/// Pairs are returned in descending order of |λ|. Intended for the
/// well-separated spectra of the averaged walk operators; residuals
/// `‖Av − λv‖` land near machine precision there and should be checked
/// by the caller when the spectrum may be degenerate.
pub fn eig4(a: &Mat4) -> [(C64, Vec4); 4] {
    let c = char_poly(a);
    let mut roots = quartic_roots(&c);
    roots.sort_by(|x, y| y.norm().partial_cmp(&x.norm()).unwrap());
    let mut out = [(ZERO, [ZERO; 4]); 4];
    for (slot, &lambda) in out.iter_mut().zip(roots.iter()) {
        *slot = (lambda, eigenvector_for(a, lambda));
    }
    out
}

pub fn eig_residual(a: &Mat4, lambda: C64, v: &Vec4) -> f64 {
    let av = a.mulv(v);
    let mut acc = 0.0f64;
    for i in 0..4 {
        acc += (av[i] - lambda * v[i]).norm_sqr();
    }
    acc.sqrt()
}

/// Matrix exponential by scaling and squaring with a (6,6) Padé
/// approximant; accurate to well below 1e−12 for the matrices used here.
pub fn expm4(a: &Mat4) -> Mat4 {
    let norm = a.one_norm();
    let mut squarings = 0u32;
    let mut scaled = *a;
    if norm > 0.5 {
        squarings = (norm / 0.5).log2().ceil() as u32;
        scaled = a.scale(C64::new(0.5f64.powi(squarings as i32), 0.0));
    }
    let mut coeff = [0.0f64; 7];
    coeff[0] = 1.0;
    for k in 0..6 {
        coeff[k + 1] = coeff[k] * (6.0 - k as f64) / ((12.0 - k as f64) * (k as f64 + 1.0));
    }
    let mut num = Mat4::identity().scale(C64::new(coeff[0], 0.0));
    let mut den = num;
    let mut power = Mat4::identity();
    for (k, &ck) in coeff.iter().enumerate().skip(1) {
        power = power.mul(&scaled);
        let term = power.scale(C64::new(ck, 0.0));
        num = num.add(&term);
        if k % 2 == 0 {
            den = den.add(&term);
        } else {
            den = den.sub(&term);
        }
    }
    let mut result = Mat4::zeros();
    for j in 0..4 {
        let col = [num.e[0][j], num.e[1][j], num.e[2][j], num.e[3][j]];
        let x = solve4(&den, &col).expect("Padé denominator is invertible at this scaling");
        for i in 0..4 {
            result.e[i][j] = x[i];
        }
    }
    for _ in 0..squarings {
        result = result.mul(&result);
    }
    result
}

/// Principal matrix square root by the Denman–Beavers iteration.
///
/// Converges quadratically when no eigenvalue lies on the closed negative
/// real axis; returns `None` if an intermediate inverse does not exist.
fn sqrtm4(a: &Mat4) -> Option<Mat4> {
    let mut y = *a;
    let mut z = Mat4::identity();
    for _ in 0..60 {
        let y_inv = inverse4(&y)?;
        let z_inv = inverse4(&z)?;
        let half = C64::new(0.5, 0.0);
        let y_next = y.add(&z_inv).scale(half);
        let z_next = z.add(&y_inv).scale(half);
        let delta = y_next.max_abs_diff(&y);
        y = y_next;
        z = z_next;
        if delta < 1e-16 {
            break;
        }
    }
    Some(y)
}

/// Principal matrix logarithm by inverse scaling and squaring: repeated
/// square roots bring the matrix within 0.25 of the identity in the
/// 1-norm, the alternating series for `log(I + X)` is summed there, and
/// the result is scaled back by the number of roots taken.
///
/// Valid whenever no eigenvalue lies on the closed negative real axis.
/// Unlike an eigendecomposition route, accuracy does not degrade for
/// clustered spectra, which is the common situation for near-identity
/// two-step operators.
pub fn logm4(a: &Mat4) -> Option<Mat4> {
    let mut t = *a;
    let mut roots = 0i32;
    while t.sub(&Mat4::identity()).one_norm() > 0.25 {
        t = sqrtm4(&t)?;
        roots += 1;
        if roots > 50 {
            return None;
        }
    }
    let x = t.sub(&Mat4::identity());
    let mut acc = Mat4::zeros();
    let mut power = x;
    for n in 1..=48u32 {
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        acc = acc.add(&power.scale(C64::new(sign / n as f64, 0.0)));
        power = power.mul(&x);
        if power.one_norm() < 1e-18 {
            break;
        }
    }
    Some(acc.scale(C64::new(2.0f64.powi(roots), 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn solve_recovers_known_solution() {
        let mut a = Mat4::identity();
        a.e[0][1] = C64::new(2.0, 1.0);
        a.e[2][3] = C64::new(-0.5, 0.25);
        a.e[3][0] = C64::new(0.1, -0.7);
        let x = [
            C64::new(1.0, -1.0),
            C64::new(0.5, 0.5),
            C64::new(-2.0, 0.0),
            C64::new(0.0, 3.0),
        ];
        let b = a.mulv(&x);
        let got = solve4(&a, &b).unwrap();
        for i in 0..4 {
            assert!(close(got[i], x[i], 1e-13));
        }
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let mut a = Mat4::identity();
        for i in 0..4 {
            for j in 0..4 {
                a.e[i][j] += C64::new(0.3 * (i as f64 - j as f64), 0.2 * (i + j) as f64);
            }
        }
        let inv = inverse4(&a).unwrap();
        assert!(inv.mul(&a).max_abs_diff(&Mat4::identity()) < 1e-12);
    }

    #[test]
    fn eig_diagonal_matrix() {
        let d = [
            C64::new(2.0, 0.0),
            C64::new(-1.0, 0.5),
            C64::new(0.3, 0.0),
            C64::new(0.0, -0.2),
        ];
        let a = Mat4::diag(&d);
        let pairs = eig4(&a);
        let mut expected: Vec<C64> = d.to_vec();
        expected.sort_by(|x, y| y.norm().partial_cmp(&x.norm()).unwrap());
        for (got, want) in pairs.iter().zip(expected.iter()) {
            assert!(close(got.0, *want, 1e-12));
            assert!(eig_residual(&a, got.0, &got.1) < 1e-11);
        }
    }

    #[test]
    fn eig_residuals_small_for_generic_matrix() {
        let mut a = Mat4::zeros();
        for i in 0..4 {
            for j in 0..4 {
                a.e[i][j] = C64::new(
                    ((i * 4 + j) as f64 * 0.37).sin(),
                    ((i + 2 * j) as f64 * 0.23).cos() * 0.4,
                );
            }
        }
        for (lambda, v) in eig4(&a) {
            assert!(eig_residual(&a, lambda, &v) < 1e-10);
        }
    }

    #[test]
    fn expm_of_zero_is_identity() {
        assert!(expm4(&Mat4::zeros()).max_abs_diff(&Mat4::identity()) < 1e-15);
    }

    #[test]
    fn expm_matches_series_for_nilpotent() {
        let mut n = Mat4::zeros();
        n.e[0][1] = C64::new(1.0, 0.0);
        n.e[1][2] = C64::new(0.0, 2.0);
        n.e[2][3] = C64::new(-0.5, 0.0);
        let e = expm4(&n);
        let n2 = n.mul(&n);
        let n3 = n2.mul(&n);
        let series = Mat4::identity()
            .add(&n)
            .add(&n2.scale(C64::new(0.5, 0.0)))
            .add(&n3.scale(C64::new(1.0 / 6.0, 0.0)));
        assert!(e.max_abs_diff(&series) < 1e-14);
    }

    #[test]
    fn log_then_exp_roundtrip() {
        let mut a = Mat4::identity();
        a.e[0][1] = C64::new(0.05, 0.02);
        a.e[1][0] = C64::new(-0.03, 0.0);
        a.e[2][3] = C64::new(0.0, 0.04);
        a.e[3][2] = C64::new(0.01, -0.02);
        a.e[1][1] = C64::new(0.97, 0.01);
        let g = logm4(&a).unwrap();
        assert!(expm4(&g).max_abs_diff(&a) < 1e-12);
    }

    #[test]
    fn hermitian_eigenvalues_of_spin_half_mix() {
        let mut m = Mat2::zeros();
        m.e[0][0] = C64::new(0.5, 0.0);
        m.e[1][1] = C64::new(0.5, 0.0);
        m.e[0][1] = C64::new(0.0, -0.5);
        m.e[1][0] = C64::new(0.0, 0.5);
        let [hi, lo] = m.hermitian_eigenvalues();
        assert!((hi - 1.0).abs() < 1e-15);
        assert!(lo.abs() < 1e-15);
    }
}
