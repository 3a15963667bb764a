//! Fluctuation spectra of the mirror and the interaction-picture variances.
//!
//! Everything is evaluated in units of the mechanical frequency: with
//! `w = omega / omega_m`, the SI coefficients are recovered as
//! `d = omega_m^4 d_hat` and `A, B, C = (A, B, C)_hat / omega_m^3`, and
//!
//! ```text
//! <dQ~^2> = 1/2pi Int (A + B + C) dw
//! <dP~^2> = 1/2pi Int [w^2 A + w (w - 2) B + w (w + 2) C] dw
//! ```
//!
//! The integrals run over the whole real line, folded onto `w >= 0`. The core
//! `[0, W]` is integrated with forced panel edges at the mechanical and cavity
//! features; `[W, inf)` is mapped to `(0, 1]` with `w = W / t`. The zero-point
//! part of the Ohmic bath noise (`|w|` in `w coth(w / 2 theta)`) makes the
//! momentum integral grow logarithmically, so that part alone is band-limited
//! to `|omega| <= omega_max = W omega_m`.

use num_complex::Complex;
use serde::Serialize;

use crate::constants::{HBAR, K_B};
use crate::error::{Error, Result};
use crate::params::DerivedParams;
use crate::quadrature::{integrate, QuadOptions};
use crate::scalar::Real;
use crate::steadystate::SteadyBranch;

/// Accepted band for the relative quadrature tolerance.
pub const TOL_RANGE: (f64, f64) = (1e-10, 1e-3);
/// Initial core half-width is omega_m + this many kappa.
pub const CORE_KAPPAS: f64 = 50.0;
/// Largest core half-width tried before giving up, in units of omega_m.
pub const MAX_CORE: f64 = 1024.0;

/// Model for the thermal factor `1 + coth(hbar omega / 2 k_B T)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum CothModel {
    Exact,
    /// `1 + 2 k_B T / (hbar omega)`, valid for k_B T >> hbar omega_m.
    HighTApprox,
    /// `2` for omega > 0 and `0` for omega < 0.
    ZeroT,
}

impl CothModel {
    /// High-temperature form above 0 K, the zero-temperature limit at 0 K.
    pub fn default_for<T: Real>(temperature: T) -> Self {
        if temperature > T::zero() {
            CothModel::HighTApprox
        } else {
            CothModel::ZeroT
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CothModel::Exact => "exact",
            CothModel::HighTApprox => "hiT",
            CothModel::ZeroT => "zeroT",
        }
    }

    /// `w (1 + coth(w / 2 theta))` with `w = omega / omega_m` and
    /// `theta = k_B T / (hbar omega_m)`; finite at `w = 0`.
    pub fn weighted<T: Real>(self, w: T, theta: T) -> T {
        match self {
            CothModel::HighTApprox => w + T::two() * theta,
            CothModel::ZeroT => {
                if w > T::zero() {
                    T::two() * w
                } else {
                    T::zero()
                }
            }
            CothModel::Exact => {
                if theta <= T::zero() {
                    return w + w.abs();
                }
                let x = w / (T::two() * theta);
                if x.abs() < T::lit(1e-6) {
                    // x coth x = 1 + x^2 / 3 + O(x^4)
                    w + T::two() * theta * (T::one() + x * x / T::lit(3.0))
                } else {
                    w + w / x.tanh()
                }
            }
        }
    }

    /// `w (1 + coth) + (-w)(1 + coth)` evaluated at `+w` and `-w`, optionally
    /// without the zero-point part `2 |w|`.
    fn folded<T: Real>(self, w: T, theta: T, zero_point: bool) -> T {
        match self {
            CothModel::HighTApprox => T::lit(4.0) * theta,
            CothModel::ZeroT => {
                if zero_point {
                    T::two() * w.abs()
                } else {
                    T::zero()
                }
            }
            CothModel::Exact => {
                if zero_point {
                    self.weighted(w, theta) + self.weighted(-w, theta)
                } else if theta <= T::zero() {
                    T::zero()
                } else {
                    // 2 w (coth(w / 2 theta) - 1) = 4 w / (e^{w / theta} - 1)
                    let a = w.abs();
                    T::lit(4.0) * a / (a / theta).exp_m1()
                }
            }
        }
    }
}

impl std::str::FromStr for CothModel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "exact" => Ok(CothModel::Exact),
            "hiT" | "hit" | "high-t" => Ok(CothModel::HighTApprox),
            "zeroT" | "zerot" | "zero-t" => Ok(CothModel::ZeroT),
            other => Err(format!("unknown coth model `{other}` (exact, hiT, zeroT)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceResult<T> {
    pub var_q: T,
    pub var_p: T,
    pub imag_residual_q: T,
    pub imag_residual_p: T,
    pub quad_error_q: T,
    pub quad_error_p: T,
    /// Core half-width and zero-point band edge [rad/s].
    pub omega_max: T,
    pub evaluations: usize,
}

/// Dimensionless spectral kernel for one operating point.
#[derive(Debug, Clone, Copy)]
pub struct SpectralKernel<T> {
    kappa: T,
    delta: T,
    gamma: T,
    /// g^2 |c_s|^2 / omega_m^2
    coupling: T,
    /// c_s*^2 / |c_s|^2
    phase: Complex<T>,
    n_sq: T,
    m_sq: Complex<T>,
    theta: T,
    model: CothModel,
}

impl<T: Real> SpectralKernel<T> {
    pub fn new(d: &DerivedParams<T>, b: &SteadyBranch<T>, model: CothModel) -> Self {
        let wm = d.omega_m();
        let phase = if b.c_s.norm_sqr() > T::zero() {
            let u = b.c_s.conj() / b.c_s.norm();
            u * u
        } else {
            Complex::new(T::one(), T::zero())
        };
        SpectralKernel {
            kappa: d.kappa() / wm,
            delta: b.delta / wm,
            gamma: d.gamma_m / wm,
            coupling: (d.g / wm) * (d.g / wm) * b.photon_number,
            phase,
            n_sq: d.n_sq,
            m_sq: d.m_sq,
            theta: d.thermal_ratio(),
            model,
        }
    }

    fn i() -> Complex<T> {
        Complex::new(T::zero(), T::one())
    }

    fn re(x: T) -> Complex<T> {
        Complex::new(x, T::zero())
    }

    /// `-4 Delta g^2 |c_s|^2 + (1 - w^2 - i gamma w) [(kappa - i w)^2 + Delta^2]`.
    pub fn d(&self, w: T) -> Complex<T> {
        let i = Self::i();
        let mech = Complex::new(T::one() - w * w, -self.gamma * w);
        let cav = (Self::re(self.kappa) - i * w).powi(2) + Self::re(self.delta * self.delta);
        mech * cav - Self::re(T::lit(4.0) * self.delta * self.coupling)
    }

    /// Radiation-pressure part of A and the coefficient multiplying `w (1 + coth)`.
    fn a_parts(&self, w: T) -> (T, T) {
        let (k, dl) = (self.kappa, self.delta);
        let dd = self.d(w).norm_sqr();
        let rad = T::lit(8.0)
            * k
            * self.coupling
            * ((self.n_sq + T::one()) * (k * k + (dl + w) * (dl + w)) + self.n_sq * (k * k + (dl - w) * (dl - w)));
        let x = dl * dl + k * k - w * w;
        let thermal = T::two() * self.gamma * (x * x + T::lit(4.0) * k * k * w * w);
        (rad / dd, thermal / dd)
    }

    pub fn a(&self, w: T) -> Complex<T> {
        let (rad, th) = self.a_parts(w);
        Self::re(rad + th * self.model.weighted(w, self.theta))
    }

    pub fn b(&self, w: T) -> Complex<T> {
        let i = Self::i();
        let (k, dl, two) = (self.kappa, self.delta, T::two());
        let pref = self.phase * self.m_sq * (T::lit(8.0) * k * self.coupling);
        let bracket = (Self::re(k) - i * (dl + w)) * (Self::re(k) - i * (dl + two - w));
        pref * bracket / (self.d(w) * self.d(two - w))
    }

    pub fn c(&self, w: T) -> Complex<T> {
        let i = Self::i();
        let (k, dl, two) = (self.kappa, self.delta, T::two());
        let pref = self.phase.conj() * self.m_sq.conj() * (T::lit(8.0) * k * self.coupling);
        let bracket = (Self::re(k) + i * (dl - w)) * (Self::re(k) + i * (dl + two + w));
        pref * bracket / (self.d(w) * self.d(-two - w))
    }

    /// `[Re q, Re p, Im q, Im p]` integrands summed over `+w` and `-w`.
    fn folded(&self, w: T, zero_point: bool) -> [T; 4] {
        let two = T::two();
        let (rad_p, th) = self.a_parts(w);
        let (rad_m, _) = self.a_parts(-w);
        let a_sum = rad_p + rad_m + th * self.model.folded(w, self.theta, zero_point);
        let (bp, cp, bm, cm) = (self.b(w), self.c(w), self.b(-w), self.c(-w));
        let q = bp + cp + bm + cm + Self::re(a_sum);
        let wc = Self::re(w);
        let p = wc * (wc - two) * bp + wc * (wc + two) * cp + wc * (wc + two) * bm + wc * (wc - two) * cm + Self::re(w * w * a_sum);
        [q.re, p.re, q.im, p.im]
    }

    /// Panel edges inside `[0, core]` at the resonances of `d(w)`, `d(2 - w)` and `d(2 + w)`.
    fn breakpoints(&self, core: T) -> Vec<T> {
        let dl = self.delta.abs();
        let two = T::two();
        let mut pts = vec![T::zero(), T::one(), dl, two, T::lit(3.0), two + dl, (two - dl).abs(), core];
        pts.retain(|x| x.is_finite() && *x >= T::zero() && *x <= core);
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup_by(|a, b| (*a - *b).abs() <= T::lit(1e-9) * core);
        pts
    }
}

fn check_tol<T: Real>(tol: T) -> Result<()> {
    let t = tol.to_f64_lossy();
    if !(TOL_RANGE.0..=TOL_RANGE.1).contains(&t) {
        return Err(Error::validation("tol", format!("must lie in [1e-10, 1e-3], got {t}")));
    }
    Ok(())
}

/// `d(omega)` in SI units [rad^4/s^4].
pub fn d_of_omega<T: Real>(d: &DerivedParams<T>, b: &SteadyBranch<T>, omega: T) -> Complex<T> {
    let wm = d.omega_m();
    SpectralKernel::new(d, b, CothModel::ZeroT).d(omega / wm) * wm.powi(4)
}

/// Coefficient `A(omega)` [s^3]; uses the squeezed photon number from `d`.
pub fn coefficient_a<T: Real>(d: &DerivedParams<T>, b: &SteadyBranch<T>, omega: T, coth: CothModel) -> Complex<T> {
    let wm = d.omega_m();
    SpectralKernel::new(d, b, coth).a(omega / wm) / wm.powi(3)
}

/// Coefficient `B(omega)` [s^3].
pub fn coefficient_b<T: Real>(d: &DerivedParams<T>, b: &SteadyBranch<T>, omega: T) -> Complex<T> {
    let wm = d.omega_m();
    SpectralKernel::new(d, b, CothModel::ZeroT).b(omega / wm) / wm.powi(3)
}

/// Coefficient `C(omega)` [s^3].
pub fn coefficient_c<T: Real>(d: &DerivedParams<T>, b: &SteadyBranch<T>, omega: T) -> Complex<T> {
    let wm = d.omega_m();
    SpectralKernel::new(d, b, CothModel::ZeroT).c(omega / wm) / wm.powi(3)
}

/// Interaction-picture variances of the mirror quadratures on a stable branch.
pub fn variance_qp<T: Real>(d: &DerivedParams<T>, b: &SteadyBranch<T>, coth: CothModel, tol: T) -> Result<VarianceResult<T>> {
    check_tol(tol)?;
    if !b.stable {
        return Err(Error::UnstableBranch);
    }
    let kernel = SpectralKernel::new(d, b, coth);
    let two_pi = T::two() * T::PI();
    let w_limit = T::max_value().powf(T::lit(0.1));
    let mut core = T::one() + T::lit(CORE_KAPPAS) * kernel.kappa;
    let mut evaluations = 0;
    let mut tail_error = T::zero();

    while core <= T::lit(MAX_CORE) {
        let pts = kernel.breakpoints(core);
        let inner = integrate(
            |w| kernel.folded(w, true),
            &pts,
            &QuadOptions::relative(tol),
            |v| [v[0], v[1], v[0], v[1]],
        );
        evaluations += inner.evaluations;
        if !inner.converged {
            let e = inner.error[0].max(inner.error[1]).to_f64_lossy();
            return Err(Error::QuadratureNotConverged {
                tol: tol.to_f64_lossy(),
                error: e,
            });
        }
        let reference = inner.value;
        let tail = integrate(
            |t: T| {
                let w = core / t;
                if w > w_limit {
                    return [T::zero(); 4];
                }
                let jac = core / (t * t);
                kernel.folded(w, false).map(|x| x * jac)
            },
            &[T::zero(), T::lit(0.5), T::one()],
            &QuadOptions::relative(tol * T::lit(0.1)),
            |_| [reference[0], reference[1], reference[0], reference[1]],
        );
        evaluations += tail.evaluations;
        if !tail.converged || tail.value.iter().any(|x| !x.is_finite()) {
            tail_error = tail.error[0].max(tail.error[1]);
            core = core * T::two();
            continue;
        }
        let total: Vec<T> = (0..4).map(|k| (inner.value[k] + tail.value[k]) / two_pi).collect();
        let err: Vec<T> = (0..2).map(|k| (inner.error[k] + tail.error[k]) / two_pi).collect();
        return Ok(VarianceResult {
            var_q: total[0],
            var_p: total[1],
            imag_residual_q: total[2],
            imag_residual_p: total[3],
            quad_error_q: err[0],
            quad_error_p: err[1],
            omega_max: core * d.omega_m(),
            evaluations,
        });
    }
    Err(Error::TailNotConverged {
        omega_max: (core / T::two() * d.omega_m()).to_f64_lossy(),
        error: tail_error.to_f64_lossy(),
    })
}

/// Variance of either quadrature for the uncoupled mirror in its thermal state,
/// `1 + 2 / (exp(hbar omega_m / k_B T) - 1)`.
pub fn free_mirror_variance<T: Real>(omega_m: T, temperature: T) -> T {
    if temperature <= T::zero() {
        return T::one();
    }
    let x = T::lit(HBAR / K_B) * omega_m / temperature;
    T::one() + T::two() / x.exp_m1()
}
