mod common;

use std::time::Instant;

use hessian_blowup::barriers::{BarrierKind, ThetaFunction, WeightDescriptor, WeightForm};
use hessian_blowup::geometry::{self, BallDomain, DefiningFunction};
use hessian_blowup::karamata::{self, RvFunction, Side};
use hessian_blowup::nonlinearity::Nonlinearity;
use hessian_blowup::radial_solver::{
    boundary_rate, parameter_sweep, solve_blowup, BallProblem, BlowupOptions, RadialSolution, SweepParameter,
};
use hessian_blowup::symfun::{sk_matrix, SymMatrix};
use hessian_blowup::transforms::{PhiTransform, PsiTransform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Solved = Vec<(String, RadialSolution)>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn problem(n: usize, k: usize, f: Nonlinearity, form: WeightForm) -> BallProblem {
    let dom = BallDomain::new(n, 1.0, k).unwrap();
    BallProblem::new(dom, WeightDescriptor::constant(form, 1.0).unwrap(), f).unwrap()
}

fn log_samples(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| (lo.ln() + (hi / lo).ln() * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Checks `sub ≤ u ≤ super` with slack `tol·u` at every interior grid point.
fn pointwise_sandwich(sol: &RadialSolution, tol: f64) -> (bool, f64) {
    let mut worst = f64::INFINITY;
    for i in 0..=sol.interior_end {
        let r = sol.grid.r()[i];
        let u = sol.u[i];
        let lo = sol.sub.value(r).unwrap();
        let hi = sol.sup.value(r).unwrap();
        worst = worst.min((u - lo) / u.abs()).min((hi - u) / u.abs());
    }
    (worst >= -tol, worst)
}

fn invariants_hold(sol: &RadialSolution) -> bool {
    sol.monotonicity_violations == 0 && sol.gamma_violations == 0 && sol.max_residual <= 1e-6
}

fn transforms() -> Outcome {
    let start = Instant::now();
    let mut cases = vec![];
    for gamma in [3.0, 4.0, 6.0] {
        for k in (1..=3).filter(|&k| gamma > k as f64) {
            cases.push(Nonlinearity::power(gamma, k).unwrap());
        }
    }
    for k in 1..=3 {
        cases.push(Nonlinearity::exponential(k).unwrap());
    }
    let mut worst = 0.0f64;
    for nl in &cases {
        let (psi, psi_n) = (PsiTransform::new(nl).unwrap(), PsiTransform::numeric(nl).unwrap());
        let (phi, phi_n) = (PhiTransform::new(nl).unwrap(), PhiTransform::numeric(nl).unwrap());
        assert!(psi.is_closed_form() && phi.is_closed_form() && !psi_n.is_closed_form());
        for t in log_samples(1e-6, 10.0, 71) {
            // ψ = k ln(k/t) for the exponential vanishes at t = k.
            let (a, b) = (psi.psi(t).unwrap(), psi_n.psi(t).unwrap());
            worst = worst.max((a - b).abs() / a.abs().max(1.0));
            let (a, b) = (phi.phi(t).unwrap(), phi_n.phi(t).unwrap());
            worst = worst.max((a - b).abs() / a.abs().max(1.0));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-8 && secs < 5.0,
        format!("{} nonlinearities, worst relative error {worst:.2e}, {secs:.2} s", cases.len()),
    )
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.1 && norm <= 1.0 {
            return v.iter().map(|x| x / norm).collect();
        }
    }
}

fn outer(a: f64, b: f64, x: &[f64]) -> SymMatrix {
    let n = x.len();
    let rows: Vec<Vec<f64>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { a } else { 0.0 } + b * x[i] * x[j]).collect()).collect();
    SymMatrix::from_rows(&rows).unwrap()
}

fn compositions() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (mut worst_v, mut worst_r) = (0.0f64, 0.0f64);
    for _ in 0..500 {
        let n = rng.gen_range(2..=4);
        let k = rng.gen_range(1..=n);
        let radius = rng.gen_range(0.5..2.0);
        let dom = BallDomain::new(n, radius, k).unwrap();
        let dfn = DefiningFunction::standard(&dom);
        let dir = random_unit(&mut rng, n);
        let r = radius * rng.gen_range(0.01..1.0);
        let x: Vec<f64> = dir.iter().map(|d| d * r).collect();

        let (h1, h2) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let c = dfn.coefficient();
        // D²(h∘v) = h′D²v + h″∇v∇vᵀ with D²v = −2cI and ∇v = −2cx.
        let g: Vec<f64> = x.iter().map(|xi| -2.0 * c * xi).collect();
        let exact = sk_matrix(&outer(-2.0 * c * h1, h2, &g), k).unwrap();
        let got = geometry::sk_of_v_composition(&dom, &dfn, h1, h2, &x).unwrap();
        let scale = (h1.abs() * 2.0 * c + h2.abs() * g.iter().map(|a| a * a).sum::<f64>()).powi(k as i32);
        worst_v = worst_v.max((got - exact).abs() / exact.abs().max(scale));

        let (du, ddu) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        // D²u = (u′/r) I + (u″ − u′/r) x̂x̂ᵀ.
        let exact = sk_matrix(&outer(du / r, ddu - du / r, &dir), k).unwrap();
        let got = geometry::radial_sk(&dom, du, ddu, r).unwrap();
        let scale = ddu.abs().max((du / r).abs()).powi(k as i32);
        worst_r = worst_r.max((got - exact).abs() / exact.abs().max(scale));
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst_v <= 1e-10 && worst_r <= 1e-10 && secs < 5.0,
        format!("500 samples, composition {worst_v:.2e}, radial {worst_r:.2e}, {secs:.2} s"),
    )
}

fn index_constants() -> Outcome {
    let mut worst = 0.0f64;
    for gamma in [3.0, 4.0, 6.0] {
        for k in (1..=3).filter(|&k| gamma > k as f64) {
            let c = Nonlinearity::power(gamma, k).unwrap().extrapolated_constants().unwrap();
            let kf = k as f64;
            let cf = gamma / (gamma - kf);
            worst = worst.max((c.c_plus - cf).abs());
            worst = worst.max((c.c_zero.unwrap() - cf).abs());
            worst = worst.max((c.e_zero.unwrap() - (gamma + 1.0) / (gamma - kf)).abs());
        }
    }
    for k in 1..=3 {
        let c = Nonlinearity::exponential(k).unwrap().extrapolated_constants().unwrap();
        worst = worst.max((c.c_plus - 1.0).abs()).max((c.e_plus.unwrap() - 1.0).abs());
    }
    outcome(worst <= 1e-3, format!("worst deviation {worst:.2e}"))
}

fn power_sandwich(solutions: &mut Vec<(String, RadialSolution)>) -> Outcome {
    let mut pass = true;
    let mut details = vec![];
    for (n, k, gamma) in [(2, 1, 3.0), (3, 2, 4.0), (2, 2, 4.0)] {
        let start = Instant::now();
        let p = problem(n, k, Nonlinearity::power(gamma, k).unwrap(), WeightForm::Power { lambda: 0.0 });
        let opts = BlowupOptions { barrier: Some(BarrierKind::PowerScaling), ..Default::default() };
        let sol = solve_blowup(&p, &opts).unwrap();
        let secs = start.elapsed().as_secs_f64();
        let (ok, margin) = pointwise_sandwich(&sol, 1e-6);
        pass &= ok && sol.converged && secs < 60.0;
        details.push(format!("(N={n},k={k},γ={gamma}) margin {margin:.2e} {secs:.1} s"));
        solutions.push((format!("power-scaling N={n} k={k}"), sol));
    }
    outcome(pass, details.join("; "))
}

fn psi_sandwich(solutions: &mut Vec<(String, RadialSolution)>) -> Outcome {
    let mut pass = true;
    let mut details = vec![];
    let families = [
        ("exp", 1, Nonlinearity::exponential(1).unwrap()),
        ("u^3", 1, Nonlinearity::power(3.0, 1).unwrap()),
        ("u^4", 2, Nonlinearity::power(4.0, 2).unwrap()),
    ];
    for (name, k, f) in families {
        for lambda in [0.0, -1.0] {
            let p = problem(2, k, f.clone(), WeightForm::Power { lambda });
            let levels = if lambda < 0.0 { 34 } else { 24 };
            let opts = BlowupOptions { barrier: Some(BarrierKind::PsiPowerWeight), levels, ..Default::default() };
            let sol = solve_blowup(&p, &opts).unwrap();
            let (ok, margin) = pointwise_sandwich(&sol, 1e-6);
            let tau = [&sol.sub, &sol.sup].iter().map(|s| s.tau_solve().map_or(f64::INFINITY, |t| t.residual)).fold(0.0, f64::max);
            pass &= ok && sol.converged && tau <= 1e-10;
            details.push(format!("{name} λ={lambda}: margin {margin:.2e}, τ residual {tau:.1e}"));
            solutions.push((format!("psi-power {name} λ={lambda}"), sol));
        }
    }
    outcome(pass, details.join("; "))
}

fn rate_problem(k: usize, f: Nonlinearity) -> BallProblem {
    problem(2, k, f, WeightForm::BoundaryRate { theta: ThetaFunction::constant(1.0).unwrap() })
}

fn planar_rate(solutions: &mut Vec<(String, RadialSolution)>) -> Outcome {
    let start = Instant::now();
    let sol = solve_blowup(&rate_problem(1, Nonlinearity::power(3.0, 1).unwrap()), &BlowupOptions::default()).unwrap();
    let rep = boundary_rate(&sol, 0.1, 0.02).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let ud = rep.estimate.value / 2f64.sqrt();
    let oracle = common::cubic_planar_shot(1e-4, 10.0).rate;
    let root2 = 2f64.sqrt();
    let (e_sol, e_oracle) = ((ud - root2).abs() / root2, (oracle - root2).abs() / root2);
    solutions.push(("rate u^3".into(), sol));
    outcome(
        e_sol <= 0.02 && e_oracle <= 1e-3 && secs < 120.0,
        format!("u·d → {ud:.8} ({e_sol:.1e}), ODE oracle {oracle:.10} ({e_oracle:.1e}), {secs:.1} s"),
    )
}

fn hessian_rate(solutions: &mut Vec<(String, RadialSolution)>) -> Outcome {
    let sol = solve_blowup(&rate_problem(2, Nonlinearity::power(4.0, 2).unwrap()), &BlowupOptions::default()).unwrap();
    let rep = boundary_rate(&sol, 0.1, 0.02).unwrap();
    let (lo, hi) = rep.constants.bracket;
    let v = rep.estimate.value;
    let pass = (rep.constants.c_plus - 2.0).abs() < 1e-12 && v >= lo * 0.98 && v <= hi * 1.02;
    solutions.push(("rate k=N=2".into(), sol));
    outcome(pass, format!("limit {v:.8} ± {:.1e}, bracket [{lo:.8}, {hi:.8}], C = {}", rep.estimate.error, rep.constants.c_plus))
}

fn sweeps() -> Outcome {
    let mut pass = true;
    let mut details = vec![];
    let cases = [
        ("exp N=2", 2, Nonlinearity::exponential(1).unwrap()),
        ("u^3 N=2", 2, Nonlinearity::power(3.0, 1).unwrap()),
    ];
    for (name, n, f) in cases {
        let k = f.k();
        let p = problem(n, k, f, WeightForm::Power { lambda: 0.0 });
        let schedule: Vec<f64> = (1..=3).map(|j| -(k as f64) - 1.0 + 10f64.powi(-j)).collect();
        let opts = BlowupOptions { levels: 34, ..Default::default() };
        let table = parameter_sweep(&p, SweepParameter::Lambda, &schedule, &[0.0], &opts).unwrap();
        let last = table.rows.last().unwrap().result.as_ref().unwrap();
        let q = last.normalized[0];
        let (lo, hi) = table.predicted.unwrap();
        let ok = q >= lo * 0.95 && q <= hi * 1.05;
        pass &= ok && last.converged;
        let seq: Vec<String> = table
            .rows
            .iter()
            .map(|r| r.result.as_ref().map_or("err".into(), |v| format!("{:.5}", v.normalized[0])))
            .collect();
        details.push(format!("{name}: {} vs [{lo:.4}, {hi:.4}]{}", seq.join(" → "), if last.converged { "" } else { " (partial)" }));
    }
    outcome(pass, details.join("; "))
}

fn karamata_suite() -> Outcome {
    let mut pass = true;
    let mut details = vec![];
    for (name, l, rho, side) in karamata::builtin_pairs() {
        let ts: Vec<f64> = (2..=6)
            .map(|j| match side {
                Side::AtZero => 10f64.powi(-j),
                Side::AtInfinity => 10f64.powi(j),
            })
            .collect();
        let errs: Vec<f64> =
            ts.iter().map(|&t| (karamata::asymptotic_integral_ratio(&l, rho, side, t).unwrap() - 1.0).abs()).collect();
        let rv = RvFunction::new(rho, l.clone());
        let devs: Vec<f64> = ts.iter().map(|&t| rv.uniform_deviation(t).unwrap()).collect();
        let decreasing = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0] || w[1] <= 1e-12);
        let ok = decreasing(&errs) && decreasing(&devs);
        pass &= ok;
        details.push(format!("{name}: {:.1e} → {:.1e}, deviation {:.1e} → {:.1e}", errs[0], errs[4], devs[0], devs[4]));
    }
    outcome(pass, details.join("; "))
}

fn scheme_invariants(solutions: &[(String, RadialSolution)]) -> Outcome {
    let bad: Vec<&str> = solutions.iter().filter(|(_, s)| !invariants_hold(s)).map(|(n, _)| n.as_str()).collect();
    let residual = solutions.iter().map(|(_, s)| s.max_residual).fold(0.0, f64::max);
    let violations: usize = solutions.iter().map(|(_, s)| s.monotonicity_violations + s.gamma_violations).sum();
    outcome(
        bad.is_empty(),
        format!("{} solves, {violations} violations, worst residual {residual:.2e}{}", solutions.len(), if bad.is_empty() { String::new() } else { format!(", failing: {}", bad.join(", ")) }),
    )
}

#[test]
fn acceptance_criteria() {
    let mut solutions = vec![];
    let mut results: Vec<(&str, Outcome, f64)> = vec![];
    let mut run = |name, f: &mut dyn FnMut(&mut Solved) -> Outcome| {
        let t = Instant::now();
        let o = f(&mut solutions);
        results.push((name, o, t.elapsed().as_secs_f64()));
    };
    run("transform oracle equivalence", &mut |_| transforms());
    run("composition oracle", &mut |_| compositions());
    run("index constants", &mut |_| index_constants());
    run("power-scaling sandwich", &mut |s| power_sandwich(s));
    run("psi-power sandwich", &mut |s| psi_sandwich(s));
    run("planar cubic boundary rate", &mut |s| planar_rate(s));
    run("k-Hessian rate bracket", &mut |s| hessian_rate(s));
    run("parameter sweeps", &mut |_| sweeps());
    run("Karamata suite", &mut |_| karamata_suite());
    run("monotone-scheme invariants", &mut |s| scheme_invariants(s));
    for (i, (name, o, secs)) in results.iter().enumerate() {
        println!("{} criterion {} ({name}, {secs:.1} s): {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, (_, o, _))| !o.pass).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
