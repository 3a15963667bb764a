use proptest::prelude::*;

use optosqueeze::params::{derive_params, SystemParams};
use optosqueeze::spectrum::{variance_qp, CothModel};
use optosqueeze::steadystate::{select_branch, solve_steady_state, BranchPolicy};
use optosqueeze::sweep::{find_min_variance, Quadrature, SweepSpec};

fn min_var_p(r: f64, t: f64, power: f64) -> f64 {
    let p = SystemParams {
        squeeze_r: r,
        temperature: t,
        power,
        ..SystemParams::groeblacher()
    };
    find_min_variance(&SweepSpec::detuning(p, 200), Quadrature::P).unwrap().value
}

#[test]
fn minimum_rises_with_temperature() {
    for power in [0.6e-3, 3.8e-3, 6.9e-3] {
        let v: Vec<f64> = [0.0, 1e-3, 1e-2].iter().map(|&t| min_var_p(1.0, t, power)).collect();
        assert!(v[0] < v[1] && v[1] < v[2], "P={power}: {v:?}");
    }
}

#[test]
fn minimum_falls_with_power_when_warm() {
    let v: Vec<f64> = [6.9e-3, 3.8e-3, 0.6e-3].iter().map(|&p| min_var_p(1.0, 1e-2, p)).collect();
    assert!(v[0] < v[1] && v[1] < v[2], "{v:?}");
}

#[test]
fn best_squeezing_near_unit_r() {
    let at_one = min_var_p(1.0, 1e-3, 6.9e-3);
    for r in [0.0, 0.5, 1.5, 2.0] {
        let v = min_var_p(r, 1e-3, 6.9e-3);
        assert!(at_one < v, "r={r}: {v} <= {at_one}");
    }
}

#[test]
fn vacuum_input_never_squeezes_at_zero_temperature() {
    let p = SystemParams {
        squeeze_r: 0.0,
        temperature: 0.0,
        ..SystemParams::groeblacher()
    };
    for power in [0.6e-3, 3.8e-3, 6.9e-3] {
        let m = find_min_variance(&SweepSpec::detuning(SystemParams { power, ..p }, 200), Quadrature::P).unwrap();
        assert!(m.value >= 0.99, "P={power}: {}", m.value);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn uncertainty_and_reality(
        d0 in 0.2f64..3.0,
        r in 0.0f64..2.0,
        t in 0.0f64..1e-2,
        power in 1e-4f64..7e-3,
        phi in 0.0f64..std::f64::consts::TAU,
    ) {
        let p = SystemParams {
            squeeze_r: r,
            squeeze_phi: phi,
            temperature: t,
            power,
            detuning0: d0 * SystemParams::groeblacher().omega_m,
            ..SystemParams::groeblacher()
        };
        let d = derive_params(&p).unwrap();
        let branches = solve_steady_state(&d, p.detuning0).unwrap();
        let Ok(selected) = select_branch(&branches, BranchPolicy::All) else {
            return Ok(());
        };
        for b in selected.into_vec() {
            let v = variance_qp(&d, b, CothModel::Exact, 1e-7).unwrap();
            prop_assert!(v.var_q * v.var_p >= 1.0 - 1e-6, "{v:?}");
            prop_assert!(v.imag_residual_q.abs() < 1e-6 * v.var_q);
            prop_assert!(v.imag_residual_p.abs() < 1e-6 * v.var_p);
        }
    }
}
