use hessian_blowup::barriers::{build_barrier_with_grid, verify_barrier, BarrierKind, Role, WeightDescriptor, WeightForm};
use hessian_blowup::geometry::BallDomain;
use hessian_blowup::karamata::{KaramataFunction, Orientation, Perturbation};
use hessian_blowup::nonlinearity::Nonlinearity;
use hessian_blowup::radial_solver::BallProblem;
use hessian_blowup::symfun::{elem_sym, sk_matrix, SymMatrix};
use hessian_blowup::transforms::PsiTransform;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn symmetric(n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    proptest::collection::vec(-2.0f64..2.0, n * n).prop_map(move |v| {
        (0..n).map(|i| (0..n).map(|j| 0.5 * (v[i * n + j] + v[j * n + i])).collect()).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sk_matches_symmetric_functions_of_eigenvalues(rows in (2usize..=5).prop_flat_map(symmetric)) {
        let n = rows.len();
        let m = SymMatrix::from_rows(&rows).unwrap();
        let dm = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        let eig: Vec<f64> = dm.symmetric_eigen().eigenvalues.iter().copied().collect();
        for k in 1..=n {
            let a = sk_matrix(&m, k).unwrap();
            let b = elem_sym(&eig, k).unwrap();
            let scale = 2f64.powi(k as i32) * n.pow(k as u32) as f64;
            prop_assert!((a - b).abs() <= 1e-12 * scale, "k {} {} {}", k, a, b);
        }
    }

    #[test]
    fn numeric_psi_is_decreasing_with_the_right_slope(gamma in 2.5f64..8.0, t in 1e-4f64..5.0) {
        let nl = Nonlinearity::power(gamma, 2).unwrap();
        let psi = PsiTransform::numeric(&nl).unwrap();
        let (a, b) = (psi.psi(t).unwrap(), psi.psi(t * 1.01).unwrap());
        prop_assert!(b < a);
        let h = 1e-4 * t;
        let slope = (psi.psi(t + h).unwrap() - psi.psi(t - h).unwrap()) / (2.0 * h);
        let exact = -nl.f(a).sqrt();
        prop_assert!((slope - exact).abs() <= 1e-5 * exact.abs(), "{} {}", slope, exact);
    }

    #[test]
    fn log_factor_closed_form_matches_quadrature(sigma in -1.0f64..1.5, t in 1e-8f64..0.9) {
        let l = KaramataFunction::new(1.0, Perturbation::LogFactor(sigma), Orientation::AtZero).unwrap();
        let (a, b) = (l.eval(t).unwrap(), l.eval_numeric(t).unwrap());
        prop_assert!((a - b).abs() <= 1e-10 * a, "{} {}", a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn power_scaling_barriers_verify(gamma in 2.2f64..7.0, n in 2usize..=4, k in 1usize..=2, b in 0.5f64..2.0) {
        prop_assume!(gamma > k as f64 && n >= k);
        let dom = BallDomain::new(n, 1.0, k).unwrap();
        let weight = WeightDescriptor::new(WeightForm::Power { lambda: 0.0 }, b, 1.5 * b).unwrap();
        let p = BallProblem::new(dom, weight, Nonlinearity::power(gamma, k).unwrap()).unwrap();
        let radii: Vec<f64> = (0..48).map(|i| i as f64 / 48.0).collect();
        for role in [Role::Sub, Role::Super] {
            let spec = build_barrier_with_grid(BarrierKind::PowerScaling, &p, role, 256).unwrap();
            let rep = verify_barrier(&spec, &p, &radii);
            prop_assert!(rep.passed(), "{:?} worst {} at {}", role, rep.worst_margin, rep.worst_r);
        }
    }
}
