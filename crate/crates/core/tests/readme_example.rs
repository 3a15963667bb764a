use optosqueeze::params::derive_params;
use optosqueeze::spectrum::variance_qp;
use optosqueeze::steadystate::{select_branch, solve_steady_state};
use optosqueeze::{BranchPolicy, CothModel, Params};

#[test]
fn readme_example() -> optosqueeze::Result<()> {
    let p = Params {
        detuning0: 1.0229 * Params::groeblacher().omega_m,
        ..Params::groeblacher()
    };
    let d = derive_params(&p)?;
    let branches = solve_steady_state(&d, p.detuning0)?;
    let b = select_branch(&branches, BranchPolicy::default())?.into_vec()[0];
    let v = variance_qp(&d, b, CothModel::HighTApprox, 1e-7)?;
    assert!((v.var_p - 0.319).abs() < 0.005);
    Ok(())
}
