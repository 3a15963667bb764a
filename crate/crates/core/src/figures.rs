//! Reference minima of the momentum variance for the four detuning-sweep figures.
//!
//! Each figure plots the interaction-picture momentum variance against the
//! bare detuning for the experimental parameters of
//! [`SystemParams::groeblacher`], varying one of r, T or P.

use serde::Serialize;

use crate::error::Result;
use crate::params::SystemParams;
use crate::spectrum::CothModel;
use crate::sweep::{find_min_variance, Minimum, Quadrature, SweepSpec};

/// Relative band around each reference value.
pub const REFERENCE_TOLERANCE: f64 = 0.03;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Case {
    pub squeeze_r: f64,
    pub temperature: f64,
    pub power: f64,
    /// Reference minimum of the momentum variance.
    pub expected_min: f64,
}

impl Case {
    pub fn params(&self) -> SystemParams<f64> {
        SystemParams {
            squeeze_r: self.squeeze_r,
            temperature: self.temperature,
            power: self.power,
            ..SystemParams::groeblacher()
        }
    }

    pub fn label(&self) -> String {
        format!("r={} T={}mK P={:.1}mW", self.squeeze_r, self.temperature * 1e3, self.power * 1e3)
    }
}

const fn case(squeeze_r: f64, temperature: f64, power: f64, expected_min: f64) -> Case {
    Case {
        squeeze_r,
        temperature,
        power,
        expected_min,
    }
}

/// Figures 2-5; `None` for any other number.
pub fn figure(id: u32) -> Option<Vec<Case>> {
    let cases = match id {
        2 => vec![
            case(0.0, 1e-3, 6.9e-3, 1.071),
            case(0.5, 1e-3, 6.9e-3, 0.467),
            case(1.0, 1e-3, 6.9e-3, 0.319),
            case(1.5, 1e-3, 6.9e-3, 0.468),
            case(2.0, 1e-3, 6.9e-3, 1.078),
        ],
        3 => vec![
            case(1.0, 0.0, 0.6e-3, 0.252),
            case(1.0, 1e-3, 0.6e-3, 0.611),
            case(1.0, 5e-3, 0.6e-3, 2.082),
            case(1.0, 10e-3, 0.6e-3, 3.919),
        ],
        4 => vec![
            case(1.0, 0.0, 3.8e-3, 0.261),
            case(1.0, 1e-3, 3.8e-3, 0.330),
            case(1.0, 10e-3, 3.8e-3, 0.968),
        ],
        5 => vec![
            case(1.0, 0.0, 6.9e-3, 0.275),
            case(1.0, 1e-3, 6.9e-3, 0.319),
            case(1.0, 10e-3, 6.9e-3, 0.731),
        ],
        _ => return None,
    };
    Some(cases)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CaseOutcome {
    pub case: Case,
    pub minimum: Minimum<f64>,
    pub relative_deviation: f64,
    pub pass: bool,
}

/// Locate the momentum-variance minimum over the detuning window for one case.
pub fn reproduce_case(case: &Case, coth: Option<CothModel>, points: usize, tol: f64, workers: usize) -> Result<CaseOutcome> {
    let spec = SweepSpec {
        coth,
        tol,
        workers,
        ..SweepSpec::detuning(case.params(), points)
    };
    let minimum = find_min_variance(&spec, Quadrature::P)?;
    let relative_deviation = minimum.value / case.expected_min - 1.0;
    Ok(CaseOutcome {
        case: *case,
        minimum,
        relative_deviation,
        pass: relative_deviation.abs() <= REFERENCE_TOLERANCE,
    })
}
