use hessian_blowup::barriers::{WeightDescriptor, WeightForm};
use hessian_blowup::geometry::BallDomain;
use hessian_blowup::nonlinearity::Nonlinearity;
use hessian_blowup::radial_solver::{parameter_sweep, BallProblem, BlowupOptions, SweepParameter};

fn template(n: usize, f: Nonlinearity) -> BallProblem {
    let dom = BallDomain::new(n, 1.0, f.k()).unwrap();
    BallProblem::new(dom, WeightDescriptor::constant(WeightForm::Power { lambda: 0.0 }, 1.0).unwrap(), f).unwrap()
}

#[test]
fn exponential_sweep_approaches_the_order() {
    let p = template(2, Nonlinearity::exponential(1).unwrap());
    let table =
        parameter_sweep(&p, SweepParameter::Lambda, &[-1.9, -1.99], &[0.0, 0.5], &BlowupOptions::default()).unwrap();
    assert_eq!(table.normalization, "ln(k+1+lambda)");
    let q: Vec<f64> = table.rows.iter().map(|r| r.result.as_ref().unwrap().normalized[0]).collect();
    assert!(q[0] < q[1] && q[1] <= 1.0 && q[1] > 0.99, "{q:?}");
}

#[test]
fn unresolvable_boundary_layers_are_flagged_partial() {
    // With k = 2 and λ → -3 the layer lies far below the smallest grid distance.
    let p = template(2, Nonlinearity::power(4.0, 2).unwrap());
    let table = parameter_sweep(&p, SweepParameter::Lambda, &[-2.99], &[0.0], &BlowupOptions::default()).unwrap();
    let row = table.rows[0].result.as_ref().unwrap();
    assert!(!row.converged);
}

#[test]
fn sweep_rejects_probes_outside_the_ball() {
    let p = template(2, Nonlinearity::exponential(1).unwrap());
    assert!(parameter_sweep(&p, SweepParameter::Lambda, &[-1.9], &[1.0], &BlowupOptions::default()).is_err());
    assert!(parameter_sweep(&p, SweepParameter::Mu, &[2.0], &[0.0], &BlowupOptions::default()).is_err());
}
