mod common;

use hessian_blowup::barriers::{ThetaFunction, WeightDescriptor, WeightForm};
use hessian_blowup::geometry::BallDomain;
use hessian_blowup::nonlinearity::Nonlinearity;
use hessian_blowup::radial_solver::{boundary_rate, solve_blowup, BallProblem, BlowupOptions};

#[test]
fn ode_oracle_is_step_converged() {
    let a = common::cubic_planar_shot(1e-4, 10.0);
    let b = common::cubic_planar_shot(5e-5, 20.0);
    assert!((a.radius - b.radius).abs() < 1e-10, "{a:?} {b:?}");
    assert!((a.rate - 2f64.sqrt()).abs() < 1e-9, "{a:?}");
}

#[test]
fn solver_center_value_matches_the_scaled_shot() {
    // λ u(λ r) solves the same equation, so the unit-ball solution has
    // u(0) equal to the blow-up radius of the shot from u(0) = 1.
    let shot = common::cubic_planar_shot(1e-4, 10.0);
    let dom = BallDomain::new(2, 1.0, 1).unwrap();
    let p = BallProblem::new(
        dom,
        WeightDescriptor::constant(WeightForm::Power { lambda: 0.0 }, 1.0).unwrap(),
        Nonlinearity::power(3.0, 1).unwrap(),
    )
    .unwrap();
    let sol = solve_blowup(&p, &BlowupOptions::default()).unwrap();
    let rel = (sol.center_value() - shot.radius).abs() / shot.radius;
    assert!(rel < 1e-6, "solver {} oracle {}", sol.center_value(), shot.radius);
}

#[test]
fn planar_cubic_rate_matches_the_oracle() {
    let shot = common::cubic_planar_shot(1e-4, 10.0);
    let dom = BallDomain::new(2, 1.0, 1).unwrap();
    let theta = ThetaFunction::constant(1.0).unwrap();
    let p = BallProblem::new(
        dom,
        WeightDescriptor::constant(WeightForm::BoundaryRate { theta }, 1.0).unwrap(),
        Nonlinearity::power(3.0, 1).unwrap(),
    )
    .unwrap();
    let sol = solve_blowup(&p, &BlowupOptions::default()).unwrap();
    let rep = boundary_rate(&sol, 0.1, 0.02).unwrap();
    // For f = u³ and θ ≡ 1 the normalisation is ψ(d²) = 1/(√2 d), so u·d = ratio/√2.
    let ud = rep.estimate.value / 2f64.sqrt();
    assert!((ud - shot.rate).abs() / shot.rate < 1e-3, "solver {ud} oracle {}", shot.rate);
}
