//! Drift matrix of the linearized fluctuations and its stability verdict.
//!
//! Fluctuation vector ordering is (dQ, dP, dx, dy) with dx = dc + dc^+ and
//! dy = i(dc^+ - dc). Two independent routes decide stability:
//!
//! * the Routh-Hurwitz conditions evaluated from closed-form coefficients
//!   of the characteristic quartic, and
//! * the eigenvalues of the numeric matrix, from its Faddeev-LeVerrier
//!   characteristic polynomial and a simultaneous (Aberth) root iteration.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::DerivedParams;
use crate::scalar::Real;
use crate::steadystate::SteadyBranch;

/// Scaled margins closer to zero than this are treated as marginal.
pub const MARGINAL_BAND: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftMatrix<T> {
    pub entries: [[T; 4]; 4],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityVerdict<T> {
    pub stable: bool,
    /// First Routh-Hurwitz expression divided by omega_m^6.
    pub rh_margin_1: T,
    /// Second Routh-Hurwitz expression divided by omega_m^3.
    pub rh_margin_2: T,
    /// Largest real part of the drift-matrix eigenvalues [rad/s].
    pub max_eig_real: T,
    /// A margin sits inside the marginal band; such points count as unstable.
    pub marginal: bool,
}

/// Build the drift matrix for a steady branch.
pub fn build_drift_matrix<T: Real>(d: &DerivedParams<T>, b: &SteadyBranch<T>) -> DriftMatrix<T> {
    drift_matrix_at(d, b.delta, b.c_s)
}

/// Drift matrix at an arbitrary operating point (effective detuning, field amplitude).
pub fn drift_matrix_at<T: Real>(d: &DerivedParams<T>, delta: T, c_s: Complex<T>) -> DriftMatrix<T> {
    let (wm, gm, k, g) = (d.omega_m(), d.gamma_m, d.kappa(), d.g);
    let i = Complex::new(T::zero(), T::one());
    let gc = Complex::new(g, T::zero());
    let sum = gc * (c_s + c_s.conj());
    let diff_p = -i * gc * (c_s - c_s.conj());
    let diff_x = i * gc * (c_s - c_s.conj());
    let scale = (g * c_s.norm()).max(T::min_positive_value());
    for z in [sum, diff_p, diff_x] {
        debug_assert!(z.im.abs() <= T::lit(1e-14) * scale + T::epsilon() * scale);
    }
    let z = T::zero();
    DriftMatrix {
        entries: [
            [z, wm, z, z],
            [-wm, -gm, sum.re, diff_p.re],
            [diff_x.re, z, -k, delta],
            [sum.re, z, -delta, -k],
        ],
    }
}

impl<T: Real> DriftMatrix<T> {
    fn scaled(&self, s: T) -> [[T; 4]; 4] {
        let mut a = self.entries;
        for row in a.iter_mut() {
            for x in row.iter_mut() {
                *x = *x / s;
            }
        }
        a
    }

    fn max_abs(&self) -> T {
        self.entries.iter().flatten().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    /// Coefficients `[1, c1, c2, c3, c4]` of det(lambda I - A), by Faddeev-LeVerrier.
    pub fn characteristic_polynomial(&self) -> [T; 5] {
        faddeev_leverrier(&self.entries)
    }

    /// Eigenvalues of the matrix.
    pub fn eigenvalues(&self) -> Result<[Complex<T>; 4]> {
        let s = self.max_abs();
        if s == T::zero() {
            return Ok([Complex::new(T::zero(), T::zero()); 4]);
        }
        let c = faddeev_leverrier(&self.scaled(s));
        let roots = quartic_roots(&c)?;
        Ok(roots.map(|r| r * s))
    }
}

fn matmul<T: Real>(a: &[[T; 4]; 4], b: &[[T; 4]; 4]) -> [[T; 4]; 4] {
    let mut c = [[T::zero(); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            c[i][j] = (0..4).fold(T::zero(), |acc, k| acc + a[i][k] * b[k][j]);
        }
    }
    c
}

fn faddeev_leverrier<T: Real>(a: &[[T; 4]; 4]) -> [T; 5] {
    let mut coeffs = [T::zero(); 5];
    coeffs[0] = T::one();
    // M_k = A M_{k-1} + c_{k-1} I ; c_k = -tr(A M_k)/k
    let mut m = [[T::zero(); 4]; 4];
    for k in 1..=4 {
        let mut next = matmul(a, &m);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] = row[i] + coeffs[k - 1];
        }
        m = next;
        let am = matmul(a, &m);
        let tr = (0..4).fold(T::zero(), |acc, i| acc + am[i][i]);
        coeffs[k] = -tr / T::lit(k as f64);
    }
    coeffs
}

fn horner<T: Real>(c: &[T; 5], z: Complex<T>) -> (Complex<T>, Complex<T>) {
    let mut p = Complex::new(c[0], T::zero());
    let mut dp = Complex::new(T::zero(), T::zero());
    for &ck in &c[1..] {
        dp = dp * z + p;
        p = p * z + ck;
    }
    (p, dp)
}

/// Roots of the monic quartic `z^4 + c1 z^3 + c2 z^2 + c3 z + c4` by Aberth-Ehrlich iteration.
fn quartic_roots<T: Real>(c: &[T; 5]) -> Result<[Complex<T>; 4]> {
    // Cauchy bound for the starting circle
    let bound = T::one() + c[1..].iter().fold(T::zero(), |m, x| m.max(x.abs()));
    let radius = bound * T::lit(0.5);
    let mut z: [Complex<T>; 4] = std::array::from_fn(|k| {
        let angle = T::lit(0.4 + k as f64 * std::f64::consts::FRAC_PI_2);
        Complex::from_polar(radius, angle)
    });
    let tol = T::epsilon() * T::lit(4.0);
    for _ in 0..500 {
        let mut max_step = T::zero();
        for k in 0..4 {
            let (p, dp) = horner(c, z[k]);
            if p.norm() == T::zero() {
                continue;
            }
            let ratio = p / dp;
            let mut repulsion = Complex::new(T::zero(), T::zero());
            for j in 0..4 {
                if j != k {
                    repulsion = repulsion + (z[k] - z[j]).inv();
                }
            }
            let step = ratio / (Complex::new(T::one(), T::zero()) - ratio * repulsion);
            if !step.re.is_finite() || !step.im.is_finite() {
                continue;
            }
            z[k] = z[k] - step;
            max_step = max_step.max(step.norm() / (T::one() + z[k].norm()));
        }
        if max_step <= tol {
            return Ok(z);
        }
    }
    // Aberth converges only linearly at multiple roots; accept once residuals are tiny.
    let ok = z.iter().all(|&zk| {
        let (p, _) = horner(c, zk);
        p.norm() <= T::lit(1e-6) * (T::one() + zk.norm()).powi(4)
    });
    if ok {
        Ok(z)
    } else {
        Err(Error::EigenNonConvergence)
    }
}

/// Largest real part over the four drift-matrix eigenvalues [rad/s].
pub fn eigenvalue_check<T: Real>(m: &DriftMatrix<T>) -> Result<T> {
    let ev = m.eigenvalues()?;
    Ok(ev.iter().fold(T::neg_infinity(), |acc, z| acc.max(z.re)))
}

/// Closed-form coefficients `[1, c1, c2, c3, c4]` of det(lambda I - A), in units of omega_m.
pub fn characteristic_polynomial_closed_form<T: Real>(d: &DerivedParams<T>, delta: T, c_s: Complex<T>) -> [T; 5] {
    let wm = d.omega_m();
    let k = d.kappa() / wm;
    let gm = d.gamma_m / wm;
    let dl = delta / wm;
    let gg = d.g * d.g * c_s.norm_sqr() / (wm * wm);
    let two = T::two();
    [
        T::one(),
        gm + two * k,
        dl * dl + two * gm * k + k * k + T::one(),
        dl * dl * gm + gm * k * k + two * k,
        dl * dl - T::lit(4.0) * dl * gg + k * k,
    ]
}

fn rh_margins<T: Real>(d: &DerivedParams<T>, delta: T, c_s: Complex<T>) -> (T, T) {
    let wm = d.omega_m();
    let k = d.kappa() / wm;
    let gm = d.gamma_m / wm;
    let dl = delta / wm;
    let gg = d.g * d.g * c_s.norm_sqr() / (wm * wm);
    let two = T::two();
    let four = T::lit(4.0);
    let s = k * k + dl * dl;
    let m1 = k * gm * (s * s + (two * k * gm + gm * gm - two) * s + (four * k * k + T::one() + two * k * gm))
        + two * dl * gg * (two * k + gm).powi(2);
    let m2 = s - four * dl * gg;
    (m1, m2)
}

/// Routh-Hurwitz verdict for a steady branch, with the eigenvalue cross-check filled in.
pub fn routh_hurwitz<T: Real>(d: &DerivedParams<T>, b: &SteadyBranch<T>) -> Result<StabilityVerdict<T>> {
    routh_hurwitz_at(d, b.delta, b.c_s)
}

/// Routh-Hurwitz verdict at an arbitrary operating point.
///
/// The remaining Hurwitz determinants (c1 > 0, c1 c2 - c3 > 0, c3 > 0) hold
/// identically for positive rates, so the two margins decide stability.
pub fn routh_hurwitz_at<T: Real>(d: &DerivedParams<T>, delta: T, c_s: Complex<T>) -> Result<StabilityVerdict<T>> {
    let (m1, m2) = rh_margins(d, delta, c_s);
    let band = T::lit(MARGINAL_BAND);
    let marginal = m1.abs() <= band || m2.abs() <= band;
    let stable = m1 > band && m2 > band;
    let max_eig_real = eigenvalue_check(&drift_matrix_at(d, delta, c_s))?;
    Ok(StabilityVerdict {
        stable,
        rh_margin_1: m1,
        rh_margin_2: m2,
        max_eig_real,
        marginal,
    })
}
