//! One-dimensional parameter sweeps and minimum search.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::minimize::golden_section;
use crate::params::{derive_params, SystemParams};
use crate::scalar::Real;
use crate::spectrum::{variance_qp, CothModel};
use crate::steadystate::{select_branch, solve_steady_state, BranchPolicy};

/// Default detuning window, in units of omega_m, and its point count.
pub const DEFAULT_DELTA0_WINDOW: (f64, f64) = (0.1, 3.0);
pub const DEFAULT_DELTA0_POINTS: usize = 400;
/// Relative coordinate tolerance of the golden-section refinement.
pub const REFINE_X_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepAxis {
    /// Bare detuning [rad/s].
    Delta0,
    /// Squeezing parameter.
    R,
    /// Temperature [K].
    T,
    /// Laser power [W].
    P,
}

impl SweepAxis {
    pub fn apply<T: Real>(self, p: &mut SystemParams<T>, x: T) {
        match self {
            SweepAxis::Delta0 => p.detuning0 = x,
            SweepAxis::R => p.squeeze_r = x,
            SweepAxis::T => p.temperature = x,
            SweepAxis::P => p.power = x,
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "delta0" | "Delta0" | "detuning" => Ok(SweepAxis::Delta0),
            "r" => Ok(SweepAxis::R),
            "T" | "temperature" => Ok(SweepAxis::T),
            "P" | "power" => Ok(SweepAxis::P),
            other => Err(format!("unknown sweep axis `{other}` (delta0, r, T, P)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Quadrature {
    Q,
    P,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec<T> {
    pub axis: SweepAxis,
    pub grid: Vec<T>,
    pub fixed: SystemParams<T>,
    pub branch_policy: BranchPolicy,
    /// `None` picks [`CothModel::default_for`] at each point's temperature.
    pub coth: Option<CothModel>,
    pub tol: T,
    pub workers: usize,
}

impl<T: Real> SweepSpec<T> {
    /// Uniform detuning sweep over the default window.
    pub fn detuning(fixed: SystemParams<T>, points: usize) -> Self {
        let (lo, hi) = DEFAULT_DELTA0_WINDOW;
        let wm = fixed.omega_m;
        SweepSpec {
            axis: SweepAxis::Delta0,
            grid: linspace(T::lit(lo) * wm, T::lit(hi) * wm, points),
            fixed,
            branch_policy: BranchPolicy::default(),
            coth: None,
            tol: T::lit(1e-7),
            workers: 1,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.grid.len() < 2 {
            return Err(Error::InvalidSweep("grid needs at least two points".into()));
        }
        if self
            .grid
            .windows(2)
            .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
        {
            return Err(Error::InvalidSweep("grid must be strictly increasing".into()));
        }
        if self.workers == 0 {
            return Err(Error::InvalidSweep("workers must be >= 1".into()));
        }
        for &x in &self.grid {
            let mut p = self.fixed;
            self.axis.apply(&mut p, x);
            p.validate()?;
        }
        Ok(())
    }
}

pub fn linspace<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    if n < 2 {
        return vec![lo];
    }
    let step = (hi - lo) / T::lit((n - 1) as f64);
    (0..n).map(|i| if i + 1 == n { hi } else { lo + step * T::lit(i as f64) }).collect()
}

/// One row of sweep output. Unstable or failed rows carry no variances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord<T> {
    pub coordinate: T,
    /// Index of the branch in ascending-Q_s order.
    pub branch: usize,
    pub q_s: T,
    pub stable: bool,
    pub var_q: Option<T>,
    pub var_p: Option<T>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl<T: Real> SweepRecord<T> {
    pub fn value(&self, which: Quadrature) -> Option<T> {
        match which {
            Quadrature::Q => self.var_q,
            Quadrature::P => self.var_p,
        }
    }
}

/// Evaluate a single grid point; never fails, problems become flagged rows.
pub fn evaluate_point<T: Real>(spec: &SweepSpec<T>, x: T) -> Vec<SweepRecord<T>> {
    let mut p = spec.fixed;
    spec.axis.apply(&mut p, x);
    let flagged = |q_s: T, e: &Error| SweepRecord {
        coordinate: x,
        branch: 0,
        q_s,
        stable: false,
        var_q: None,
        var_p: None,
        error: Some(e.to_string()),
    };
    let d = match derive_params(&p) {
        Ok(d) => d,
        Err(e) => return vec![flagged(T::nan(), &e)],
    };
    let branches = match solve_steady_state(&d, p.detuning0) {
        Ok(b) => b,
        Err(e) => return vec![flagged(T::nan(), &e)],
    };
    let selected = match select_branch(&branches, spec.branch_policy) {
        Ok(s) => s.into_vec(),
        Err(e) => return vec![flagged(branches[0].q_s, &e)],
    };
    let coth = spec.coth.unwrap_or_else(|| CothModel::default_for(p.temperature));
    selected
        .into_iter()
        .map(|b| {
            let index = branches.iter().position(|x| std::ptr::eq(x, b)).unwrap_or(0);
            match variance_qp(&d, b, coth, spec.tol) {
                Ok(v) => SweepRecord {
                    coordinate: x,
                    branch: index,
                    q_s: b.q_s,
                    stable: true,
                    var_q: Some(v.var_q),
                    var_p: Some(v.var_p),
                    error: None,
                },
                Err(e) => SweepRecord {
                    branch: index,
                    stable: b.stable,
                    ..flagged(b.q_s, &e)
                },
            }
        })
        .collect()
}

/// Run the sweep; rows come back in grid order whatever the worker count.
pub fn run_sweep<T: Real>(spec: &SweepSpec<T>) -> Result<Vec<SweepRecord<T>>> {
    spec.validate()?;
    let rows: Vec<Vec<SweepRecord<T>>> = if spec.workers == 1 {
        spec.grid.iter().map(|&x| evaluate_point(spec, x)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(spec.workers)
            .build()
            .map_err(|e| Error::InvalidSweep(e.to_string()))?;
        pool.install(|| spec.grid.par_iter().map(|&x| evaluate_point(spec, x)).collect())
    };
    Ok(rows.into_iter().flatten().collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Minimum<T> {
    pub coordinate: T,
    pub value: T,
    /// Best grid point before refinement.
    pub grid_coordinate: T,
    pub grid_value: T,
}

/// Refine a grid minimum of `f` by golden section inside the neighbouring cells.
///
/// `values[i]` is `f(grid[i])` or `None` where `f` is undefined.
pub fn refine_minimum<T: Real, F: FnMut(T) -> Option<T>>(grid: &[T], values: &[Option<T>], mut f: F) -> Option<Minimum<T>> {
    let (i, best) = values
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|v| (i, v)))
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))?;
    let lo = grid[i.saturating_sub(1)];
    let hi = grid[(i + 1).min(grid.len() - 1)];
    let x_tol = T::lit(REFINE_X_TOL) * grid[i].abs().max((hi - lo) * T::lit(0.5));
    let (x, fx) = golden_section(|x| f(x).unwrap_or(T::infinity()), lo, hi, x_tol);
    let (coordinate, value) = if fx <= best { (x, fx) } else { (grid[i], best) };
    Some(Minimum {
        coordinate,
        value,
        grid_coordinate: grid[i],
        grid_value: best,
    })
}

/// Coarse grid scan followed by golden-section refinement.
pub fn find_min_variance<T: Real>(spec: &SweepSpec<T>, which: Quadrature) -> Result<Minimum<T>> {
    let rows = run_sweep(spec)?;
    // per grid point, the lowest value over the selected branches
    let values: Vec<Option<T>> = spec
        .grid
        .iter()
        .map(|&x| {
            rows.iter()
                .filter(|r| r.coordinate == x)
                .filter_map(|r| r.value(which))
                .fold(None, |m: Option<T>, v| Some(m.map_or(v, |m| m.min(v))))
        })
        .collect();
    refine_minimum(&spec.grid, &values, |x| {
        evaluate_point(spec, x)
            .iter()
            .filter_map(|r| r.value(which))
            .fold(None, |m: Option<T>, v| Some(m.map_or(v, |m| m.min(v))))
    })
    .ok_or(Error::NoStableBranch)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linspace_endpoints() {
        let g = linspace(0.0, 1.0, 5);
        assert_eq!(g, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn synthetic_minimum_through_seam() {
        let f = |x: f64| Some((x - 0.737).powi(2) + 0.5);
        let grid = linspace(0.0, 2.0, 21);
        let values: Vec<_> = grid.iter().map(|&x| f(x)).collect();
        let m = refine_minimum(&grid, &values, f).unwrap();
        assert!((m.coordinate - 0.737).abs() < 1e-4 * 0.737);
        assert!(m.value <= m.grid_value);
    }

    #[test]
    fn undefined_points_are_skipped() {
        let grid = linspace(0.0, 1.0, 11);
        let values: Vec<Option<f64>> = vec![None; 11];
        assert!(refine_minimum(&grid, &values, |_| None).is_none());
    }

    #[test]
    fn grid_must_increase() {
        let mut spec = SweepSpec::detuning(SystemParams::groeblacher(), 4);
        spec.grid = vec![1.0, 1.0, 2.0];
        assert!(matches!(run_sweep(&spec), Err(Error::InvalidSweep(_))));
        spec.grid = vec![1.0];
        assert!(matches!(run_sweep(&spec), Err(Error::InvalidSweep(_))));
    }

    #[test]
    fn unstable_everywhere_is_flagged_not_fatal() {
        let mut p = SystemParams::groeblacher();
        p.power = 0.05;
        let spec = SweepSpec {
            axis: SweepAxis::Delta0,
            grid: linspace(-1.2 * p.omega_m, -0.8 * p.omega_m, 5),
            ..SweepSpec::detuning(p, 2)
        };
        let rows = run_sweep(&spec).unwrap();
        assert_eq!(rows.len(), 5);
        assert!(rows.iter().all(|r| !r.stable && r.var_p.is_none() && r.var_q.is_none()));
        assert!(matches!(find_min_variance(&spec, Quadrature::P), Err(Error::NoStableBranch)));
    }

    #[test]
    fn worker_count_does_not_change_output() {
        let mut spec = SweepSpec::detuning(SystemParams::groeblacher(), 12);
        let serial = run_sweep(&spec).unwrap();
        spec.workers = 4;
        let parallel = run_sweep(&spec).unwrap();
        assert_eq!(serial.len(), parallel.len());
        for (a, b) in serial.iter().zip(&parallel) {
            assert_eq!(a.coordinate.to_bits(), b.coordinate.to_bits());
            assert_eq!(a.var_p.map(f64::to_bits), b.var_p.map(f64::to_bits));
            assert_eq!(a.var_q.map(f64::to_bits), b.var_q.map(f64::to_bits));
        }
    }

    #[test]
    fn axis_parsing() {
        assert_eq!("delta0".parse::<SweepAxis>().unwrap(), SweepAxis::Delta0);
        assert_eq!("T".parse::<SweepAxis>().unwrap(), SweepAxis::T);
        assert!("x".parse::<SweepAxis>().is_err());
    }
}
