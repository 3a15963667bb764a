//! Steady-state mean values and optical multistability.
//!
//! With c_s = eps / (kappa + i Delta) and Delta = Delta0 - 2 g^2 |c_s|^2 / omega_m,
//! the effective detuning solves
//!
//! ```text
//! Delta (kappa^2 + Delta^2) = Delta0 (kappa^2 + Delta^2) - 2 g^2 eps^2 / omega_m
//! ```
//!
//! The cubic is solved in Delta scaled by |Delta0| + kappa.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::DerivedParams;
use crate::scalar::Real;
use crate::stability::{routh_hurwitz_at, StabilityVerdict};

/// Scaled discriminant band inside which two roots are merged.
pub const DEGENERACY_BAND: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteadyBranch<T> {
    /// Mean mirror displacement in units of the zero-point amplitude.
    pub q_s: T,
    /// Effective detuning [rad/s].
    pub delta: T,
    #[serde(skip)]
    pub c_s: Complex<T>,
    pub photon_number: T,
    pub stable: bool,
    /// (Delta - Delta0 + 2 g^2 |c_s|^2 / omega_m) / (|Delta0| + kappa).
    pub residual: T,
    /// Double root of the cubic (sits on a fold).
    pub degenerate: bool,
    pub verdict: StabilityVerdict<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchPolicy {
    /// Stable branch of smallest Q_s, reached by ramping the drive up adiabatically.
    #[default]
    LowestQsStable,
    HighestQsStable,
    /// Every stable branch.
    All,
}

impl std::str::FromStr for BranchPolicy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "lowest-qs-stable" | "lowest" => Ok(BranchPolicy::LowestQsStable),
            "highest-qs-stable" | "highest" => Ok(BranchPolicy::HighestQsStable),
            "all" => Ok(BranchPolicy::All),
            other => Err(format!(
                "unknown branch policy `{other}` (lowest-qs-stable, highest-qs-stable, all)"
            )),
        }
    }
}

/// Value of the steady-state cubic at `delta`; zero at every steady state.
pub fn cubic_residual<T: Real>(d: &DerivedParams<T>, delta0: T, delta: T) -> T {
    let k2 = d.kappa() * d.kappa();
    (delta - delta0) * (k2 + delta * delta) + d.cubic_drive()
}

/// Real roots of the monic cubic x^3 + a x^2 + b x + c, ascending, each
/// flagged when it is a multiple root.
fn real_cubic_roots<T: Real>(a: T, b: T, c: T) -> Vec<(T, bool)> {
    let three = T::lit(3.0);
    let shift = a / three;
    // x = y - a/3  =>  y^3 + p y + q = 0
    let p = b - a * a / three;
    let q = T::two() * a * a * a / T::lit(27.0) - a * b / three + c;
    let disc = -(T::lit(4.0) * p * p * p + T::lit(27.0) * q * q);
    let band = T::lit(DEGENERACY_BAND);
    let mut roots = Vec::with_capacity(3);
    if disc.abs() <= band {
        if p.abs() <= band.cbrt() {
            roots.push((-q.cbrt() - shift, true));
        } else {
            roots.push((T::lit(3.0) * q / p - shift, false));
            roots.push((-T::lit(1.5) * q / p - shift, true));
        }
    } else if disc > T::zero() {
        // three distinct real roots: trigonometric form
        let m = T::two() * (-p / three).sqrt();
        let arg = (three * q / (p * m)).max(-T::one()).min(T::one());
        let theta = arg.acos() / three;
        for k in 0..3 {
            let y = m * (theta - T::two() * T::PI() * T::lit(k as f64) / three).cos();
            roots.push((y - shift, false));
        }
    } else {
        // one real root: Cardano, written to avoid cancellation
        let half_q = q / T::two();
        let sq = (half_q * half_q + p * p * p / T::lit(27.0)).sqrt();
        let u = if half_q >= T::zero() {
            -(half_q + sq).cbrt()
        } else {
            (-half_q + sq).cbrt()
        };
        let y = if u == T::zero() { T::zero() } else { u - p / (three * u) };
        roots.push((y - shift, false));
    }
    // one Newton polish step each
    for (x, _) in roots.iter_mut() {
        let f = ((*x + a) * *x + b) * *x + c;
        let df = (three * *x + T::two() * a) * *x + b;
        if df != T::zero() {
            let next = *x - f / df;
            if next.is_finite() && (((next + a) * next + b) * next + c).abs() <= f.abs() {
                *x = next;
            }
        }
    }
    roots.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal));
    roots
}

/// Every real steady state at bare detuning `delta0`, ascending in Q_s.
///
/// One or three branches are returned; a double root appears once with
/// `degenerate` set.
pub fn solve_steady_state<T: Real>(d: &DerivedParams<T>, delta0: T) -> Result<Vec<SteadyBranch<T>>> {
    if !delta0.is_finite() {
        return Err(Error::validation("detuning_Delta0", "must be finite"));
    }
    let kappa = d.kappa();
    let scale = delta0.abs() + kappa;
    let a0 = delta0 / scale;
    let k2 = (kappa / scale) * (kappa / scale);
    let drive = d.cubic_drive() / (scale * scale * scale);
    // x^3 - a0 x^2 + k2 x + (drive - a0 k2) = 0
    let roots = real_cubic_roots(-a0, k2, drive - a0 * k2);

    let mut branches = Vec::with_capacity(roots.len());
    // descending Delta <=> ascending Q_s
    for &(x, degenerate) in roots.iter().rev() {
        let delta = x * scale;
        let c_s = Complex::new(d.epsilon, T::zero()) / Complex::new(kappa, delta);
        let photon_number = c_s.norm_sqr();
        let q_s = T::two() * d.g * photon_number / d.omega_m();
        let shift = T::two() * d.g * d.g * photon_number / d.omega_m();
        let residual = (delta - delta0 + shift) / scale;
        let verdict = routh_hurwitz_at(d, delta, c_s)?;
        branches.push(SteadyBranch {
            q_s,
            delta,
            c_s,
            photon_number,
            stable: verdict.stable,
            residual,
            degenerate,
            verdict,
        });
    }
    Ok(branches)
}

/// Branches chosen by a [`BranchPolicy`].
#[derive(Debug, Clone, PartialEq)]
pub enum Selected<'a, T> {
    One(&'a SteadyBranch<T>),
    Many(Vec<&'a SteadyBranch<T>>),
}

impl<'a, T> Selected<'a, T> {
    pub fn into_vec(self) -> Vec<&'a SteadyBranch<T>> {
        match self {
            Selected::One(b) => vec![b],
            Selected::Many(v) => v,
        }
    }
}

pub fn select_branch<T: Real>(branches: &[SteadyBranch<T>], policy: BranchPolicy) -> Result<Selected<'_, T>> {
    if branches.is_empty() {
        return Err(Error::validation("branches", "empty branch list"));
    }
    let mut stable = branches.iter().filter(|b| b.stable);
    match policy {
        BranchPolicy::LowestQsStable => stable.next().map(Selected::One).ok_or(Error::NoStableBranch),
        BranchPolicy::HighestQsStable => stable.last().map(Selected::One).ok_or(Error::NoStableBranch),
        BranchPolicy::All => {
            let v: Vec<_> = stable.collect();
            if v.is_empty() {
                Err(Error::NoStableBranch)
            } else {
                Ok(Selected::Many(v))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{derive_params, SystemParams};
    use approx::assert_relative_eq;

    fn derived_with(f: impl FnOnce(&mut SystemParams<f64>)) -> DerivedParams<f64> {
        let mut p = SystemParams::groeblacher();
        f(&mut p);
        derive_params(&p).unwrap()
    }

    /// Sign-change bisection over [Delta0 - K/kappa^2, Delta0], which brackets every root.
    fn bisection_oracle(d: &DerivedParams<f64>, delta0: f64) -> Vec<f64> {
        let lo = delta0 - d.cubic_drive() / d.kappa().powi(2);
        let n = 200_000;
        let f = |x: f64| cubic_residual(d, delta0, x);
        let mut roots = Vec::new();
        let h = (delta0 - lo) / n as f64;
        for i in 0..n {
            let (mut a, mut b) = (lo + i as f64 * h, lo + (i + 1) as f64 * h);
            if i == n - 1 {
                b = delta0;
            }
            let (fa, fb) = (f(a), f(b));
            if fa == 0.0 {
                roots.push(a);
                continue;
            }
            if fa * fb < 0.0 {
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    if f(a) * f(m) <= 0.0 {
                        b = m;
                    } else {
                        a = m;
                    }
                }
                roots.push(0.5 * (a + b));
            }
        }
        roots
    }

    #[test]
    fn undriven_cavity() {
        let d = derived_with(|p| p.power = 1e-30);
        let d = DerivedParams { epsilon: 0.0, ..d };
        let b = solve_steady_state(&d, 0.8 * d.omega_m()).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].q_s, 0.0);
        assert_relative_eq!(b[0].delta, 0.8 * d.omega_m(), max_relative = 1e-15);
        assert_eq!(b[0].c_s, Complex::new(0.0, 0.0));
        match select_branch(&b, BranchPolicy::LowestQsStable).unwrap() {
            Selected::One(x) => assert_eq!(x.q_s, 0.0),
            _ => unreachable!(),
        }
    }

    #[test]
    fn decoupled_mirror() {
        let d = derived_with(|_| ());
        let d = DerivedParams { g: 0.0, ..d };
        let delta0 = 1.3 * d.omega_m();
        let b = solve_steady_state(&d, delta0).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].q_s, 0.0);
        assert_relative_eq!(b[0].delta, delta0, max_relative = 1e-12);
        let n = d.epsilon.powi(2) / (d.kappa().powi(2) + delta0 * delta0);
        assert_relative_eq!(b[0].photon_number, n, max_relative = 1e-12);
    }

    #[test]
    fn experimental_point_matches_oracle() {
        let d = derived_with(|p| p.power = 6.9e-3);
        let delta0 = d.omega_m();
        let branches = solve_steady_state(&d, delta0).unwrap();
        let oracle = bisection_oracle(&d, delta0);
        assert_eq!(branches.len(), oracle.len());
        let mut ours: Vec<f64> = branches.iter().map(|b| b.delta).collect();
        ours.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (x, y) in ours.iter().zip(&oracle) {
            assert_relative_eq!(*x, *y, max_relative = 1e-9);
        }
        for b in &branches {
            assert!(b.residual.abs() < 1e-9);
            let scale = delta0.abs() + d.kappa();
            assert!(cubic_residual(&d, delta0, b.delta).abs() / scale.powi(3) < 1e-12);
        }
        // the experimental operating point is stable
        assert!(branches[0].stable);
    }

    /// Drive hard enough that the fold opens, then check the three roots.
    ///
    /// With h(Delta) = (Delta0 - Delta)(kappa^2 + Delta^2) the cubic reads
    /// h(Delta) = K, K = 2 g^2 eps^2 / omega_m. For Delta0 = 2 kappa, h has a
    /// local minimum 50/27 kappa^3 at kappa/3 and a maximum 2 kappa^3 at kappa,
    /// so K = 1.95 kappa^3 gives three roots, all red detuned.
    fn multistable_point() -> (DerivedParams<f64>, f64) {
        let base = derived_with(|_| ());
        let k = base.kappa();
        let eps2 = 1.95 * k.powi(3) * base.omega_m() / (2.0 * base.g * base.g);
        let power = eps2 * crate::constants::HBAR * base.omega_l / (2.0 * k);
        let d = derived_with(|p| p.power = power);
        (d, 2.0 * k)
    }

    #[test]
    fn three_branches_against_oracle() {
        let (d, delta0) = multistable_point();
        let branches = solve_steady_state(&d, delta0).unwrap();
        let oracle = bisection_oracle(&d, delta0);
        assert_eq!(oracle.len(), 3);
        assert_eq!(branches.len(), 3);
        // ascending Q_s
        assert!(branches.windows(2).all(|w| w[0].q_s < w[1].q_s));
        let mut ours: Vec<f64> = branches.iter().map(|b| b.delta).collect();
        ours.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (x, y) in ours.iter().zip(&oracle) {
            assert_relative_eq!(*x, *y, max_relative = 1e-9);
        }
    }

    #[test]
    fn policies_pick_outer_stable_branches() {
        let (d, delta0) = multistable_point();
        let branches = solve_steady_state(&d, delta0).unwrap();
        let stable: Vec<_> = branches.iter().filter(|b| b.stable).collect();
        assert!(stable.len() >= 2, "{branches:#?}");
        assert!(!branches[1].stable, "middle branch of a fold is a saddle");
        match select_branch(&branches, BranchPolicy::LowestQsStable).unwrap() {
            Selected::One(b) => assert_eq!(b.q_s, branches[0].q_s),
            _ => unreachable!(),
        }
        match select_branch(&branches, BranchPolicy::HighestQsStable).unwrap() {
            Selected::One(b) => assert_eq!(b.q_s, branches[2].q_s),
            _ => unreachable!(),
        }
        assert_eq!(select_branch(&branches, BranchPolicy::All).unwrap().into_vec().len(), stable.len());
    }

    #[test]
    fn no_stable_branch_is_an_error() {
        // far blue detuned and strongly driven
        let d = derived_with(|p| p.power = 0.05);
        let b = solve_steady_state(&d, -d.omega_m()).unwrap();
        assert!(b.iter().all(|x| !x.stable));
        assert_eq!(select_branch(&b, BranchPolicy::LowestQsStable), Err(Error::NoStableBranch));
    }

    #[test]
    fn single_stable_branch() {
        let d = derived_with(|p| p.power = 1e-3);
        let b = solve_steady_state(&d, d.omega_m()).unwrap();
        assert_eq!(b.len(), 1);
        assert!(matches!(select_branch(&b, BranchPolicy::LowestQsStable), Ok(Selected::One(_))));
    }

    #[test]
    fn degenerate_double_root_reported_once() {
        // (x - 1)^2 (x + 2) = x^3 - 3x + 2
        let roots = real_cubic_roots(0.0f64, -3.0, 2.0);
        assert_eq!(roots.len(), 2);
        assert_relative_eq!(roots[0].0, -2.0, max_relative = 1e-12);
        assert!(!roots[0].1);
        assert_relative_eq!(roots[1].0, 1.0, max_relative = 1e-9);
        assert!(roots[1].1);
    }

    #[test]
    fn fold_opens_once_along_power_ramp() {
        let base = SystemParams::groeblacher();
        let delta0 = 3.0 * base.omega_m;
        let counts: Vec<usize> = (0..200)
            .map(|i| {
                let mut p = base;
                p.power = 1e-4 * (1.05f64).powi(i);
                let d = derive_params(&p).unwrap();
                solve_steady_state(&d, delta0).unwrap().len()
            })
            .collect();
        let transitions_up = counts.windows(2).filter(|w| w[0] == 1 && w[1] == 3).count();
        assert!(transitions_up <= 1, "{counts:?}");
        assert_eq!(counts[0], 1);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn roots_satisfy_cubic(power in 1e-5f64..1.0, dl in -3.0f64..4.0) {
                let d = derived_with(|p| p.power = power);
                let delta0 = dl * d.omega_m();
                let branches = solve_steady_state(&d, delta0).unwrap();
                prop_assert!(branches.len() == 1 || branches.len() == 3 || branches.iter().any(|b| b.degenerate));
                let scale = delta0.abs() + d.kappa();
                for b in &branches {
                    prop_assert!(cubic_residual(&d, delta0, b.delta).abs() / scale.powi(3) < 1e-12);
                    prop_assert!(b.residual.abs() < 1e-9);
                    prop_assert!(b.q_s >= 0.0);
                }
            }

            #[test]
            fn weak_coupling_limit(dl in -3.0f64..3.0) {
                let d = derived_with(|_| ());
                let d = DerivedParams { g: 1e-12, ..d };
                let delta0 = dl * d.omega_m();
                let b = solve_steady_state(&d, delta0).unwrap();
                prop_assert_eq!(b.len(), 1);
                let n = d.epsilon.powi(2) / (d.kappa().powi(2) + delta0 * delta0);
                prop_assert!((b[0].photon_number - n).abs() <= 1e-12 * n);
            }
        }
    }
}
