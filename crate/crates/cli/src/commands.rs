//! The subcommand pipelines.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use hessian_blowup::barriers::{self, Role};
use hessian_blowup::geometry::BallDomain;
use hessian_blowup::nonlinearity::Nonlinearity;
use hessian_blowup::radial_solver::{self, RadialSolution, SweepParameter};
use hessian_blowup::symfun::{self, SymMatrix};
use hessian_blowup::transforms::{PhiTransform, PsiTransform};

use crate::experiment::{CliError, Command, Experiment};
use crate::plot::{self, Scale, Series};

/// Runs the resolved experiment, printing a summary to `out`.
pub fn run(exp: &Experiment, out: &mut dyn Write) -> Result<(), CliError> {
    match exp.command {
        Command::Indices => indices(exp, out),
        Command::Transform => transform(exp, out),
        Command::Barrier => barrier(exp, out),
        Command::Solve => solve(exp, out),
        Command::Rate => rate(exp, out),
        Command::Sweep => sweep(exp, out),
        Command::Selftest => selftest(exp, out),
    }
}

/// Writes a CSV through `body` to the configured path, `-` meaning stdout.
fn write_csv(exp: &Experiment, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), CliError> {
    let Some(path) = &exp.csv else { return Ok(()) };
    if path == Path::new("-") {
        let stdout = io::stdout();
        let mut lock = stdout.lock();
        body(&mut lock)?;
        lock.flush()?;
    } else {
        let file = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut w = BufWriter::new(file);
        body(&mut w)?;
        w.flush()?;
    }
    Ok(())
}

fn write_plot(exp: &Experiment, svg: impl FnOnce() -> String) -> Result<(), CliError> {
    if let Some(path) = &exp.plot {
        std::fs::write(path, svg()).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), |v| format!("{v}"))
}

fn indices(exp: &Experiment, out: &mut dyn Write) -> Result<(), CliError> {
    let c = exp.f.limit_constants()?;
    writeln!(out, "C_f^+inf = {}", c.c_plus)?;
    if let Some(c0) = c.c_zero {
        writeln!(out, "C_f^0 = {c0}")?;
    }
    if let Some(cm) = c.c_minus {
        writeln!(out, "C_f^-inf = {cm}")?;
    }
    writeln!(out, "E_f^+inf = {}", opt(c.e_plus))?;
    if c.c_zero.is_some() {
        writeln!(out, "E_f^0 = {}", opt(c.e_zero))?;
    } else {
        writeln!(out, "E_f^-inf = {}", opt(c.e_minus))?;
    }
    writeln!(out, "h0 = {}", c.h_inf)?;
    writeln!(out, "H0 = {}", c.h_sup)?;
    let (t_min, t_max, samples) = sample_range(exp)?;
    write_csv(exp, |w| {
        writeln!(w, "# {}", exp.comment())?;
        writeln!(w, "t,index_i,index_j")?;
        for t in log_samples(t_min, t_max, samples) {
            let i = exp.f.index_i(t).unwrap_or(f64::NAN);
            let j = exp.f.index_j(t).unwrap_or(f64::NAN);
            writeln!(w, "{t:.17e},{i:.17e},{j:.17e}")?;
        }
        Ok(())
    })
}

fn sample_range(exp: &Experiment) -> Result<(f64, f64, usize), CliError> {
    let raw = &exp.raw;
    let t_min = raw.f64("solver.t_min")?;
    let t_max = raw.f64("solver.t_max")?;
    raw.check("solver.t_min", t_min > 0.0 && t_min < t_max, "0 < t_min < t_max")?;
    let samples = raw.usize("solver.samples")?;
    raw.check("solver.samples", samples >= 2, "≥ 2")?;
    Ok((t_min, t_max, samples))
}

fn log_samples(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Relative discrepancy with the error scale `max(|exact|, 1)`.
fn discrepancy(numeric: f64, exact: f64) -> f64 {
    (numeric - exact).abs() / exact.abs().max(1.0)
}

fn transform(exp: &Experiment, out: &mut dyn Write) -> Result<(), CliError> {
    let (t_min, t_max, samples) = sample_range(exp)?;
    let psi = PsiTransform::new(&exp.f)?;
    let phi = PhiTransform::new(&exp.f)?;
    let psi_n = PsiTransform::numeric(&exp.f)?;
    let phi_n = PhiTransform::numeric(&exp.f)?;
    let mut rows = vec![];
    let (mut worst_psi, mut worst_phi) = (0.0f64, 0.0f64);
    for t in log_samples(t_min, t_max, samples) {
        let row = (t, psi.psi(t)?, phi.phi(t)?, psi_n.psi(t)?, phi_n.phi(t)?);
        worst_psi = worst_psi.max(discrepancy(row.3, row.1));
        worst_phi = worst_phi.max(discrepancy(row.4, row.2));
        rows.push(row);
    }
    let closed = psi.is_closed_form() && phi.is_closed_form();
    writeln!(out, "samples = {samples} on [{t_min:e}, {t_max:e}]")?;
    if closed {
        writeln!(out, "max relative psi discrepancy (numeric vs closed form) = {worst_psi:e}")?;
        writeln!(out, "max relative phi discrepancy (numeric vs closed form) = {worst_phi:e}")?;
    } else {
        writeln!(out, "no closed form for this family; numeric transforms only")?;
    }
    write_csv(exp, |w| {
        writeln!(w, "# {}", exp.comment())?;
        writeln!(w, "t,psi,phi,psi_numeric,phi_numeric")?;
        for (t, a, b, c, d) in &rows {
            writeln!(w, "{t:.17e},{a:.17e},{b:.17e},{c:.17e},{d:.17e}")?;
        }
        Ok(())
    })
}

fn barrier(exp: &Experiment, out: &mut dyn Write) -> Result<(), CliError> {
    let problem = exp.problem()?;
    let opts = exp.blowup_options()?;
    let (kind, bp) = radial_solver::select_barrier(&problem, opts.barrier)?;
    let sub = barriers::build_barrier_with_grid(kind, &bp, Role::Sub, opts.barrier_grid)?;
    let sup = barriers::build_barrier_with_grid(kind, &bp, Role::Super, opts.barrier_grid)?;
    let n = exp.raw.usize("solver.verify_points")?;
    exp.raw.check("solver.verify_points", n >= 2, "≥ 2")?;
    let radius = problem.dom.radius();
    let radii: Vec<f64> = (0..n).map(|i| radius * i as f64 / n as f64).collect();
    writeln!(out, "barrier = {}", kind.name())?;
    let mut failed = vec![];
    for (name, spec) in [("sub", &sub), ("super", &sup)] {
        let constants: Vec<String> = spec.constants().iter().map(|(k, v)| format!("{k}={v}")).collect();
        writeln!(out, "{name}: {}", constants.join(" "))?;
        if let Some(t) = spec.tau_solve() {
            writeln!(out, "{name}: tau residual = {:e} after {} iterations", t.residual, t.iterations)?;
        }
        let rep = barriers::verify_barrier(spec, &problem, &radii);
        writeln!(
            out,
            "{name}: verified at {} radii, worst margin {:e} at r = {}, {}",
            rep.points,
            rep.worst_margin,
            rep.worst_r,
            if rep.passed() { "PASS" } else { "FAIL" }
        )?;
        if !rep.passed() {
            failed.push(name);
        }
    }
    for note in sub.notes() {
        writeln!(out, "note: {note}")?;
    }
    write_csv(exp, |w| {
        writeln!(w, "# {}", exp.comment())?;
        writeln!(w, "r,d,sub,super")?;
        for &r in &radii {
            let a = sub.value(r).unwrap_or(f64::NAN);
            let b = sup.value(r).unwrap_or(f64::NAN);
            writeln!(w, "{r:.17e},{:.17e},{a:.17e},{b:.17e}", radius - r)?;
        }
        Ok(())
    })?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Check(format!("barrier inequality fails for {}", failed.join(" and "))))
    }
}

fn summarize(sol: &RadialSolution, out: &mut dyn Write) -> io::Result<()> {
    let last = sol.levels.last();
    writeln!(out, "barrier = {}", sol.barrier.name())?;
    writeln!(out, "levels = {}", sol.levels.len())?;
    if let Some(l) = last {
        writeln!(out, "final sigma = {:e} at d = {:e}", l.sigma, l.truncation_distance)?;
        writeln!(out, "final interior change = {:e}", l.interior_change)?;
    }
    writeln!(out, "converged = {}", sol.converged)?;
    writeln!(out, "u(0) = {}", sol.center_value())?;
    writeln!(out, "discretization estimate = {:e}", sol.discretization_estimate)?;
    writeln!(out, "max residual = {:e}", sol.max_residual)?;
    writeln!(
        out,
        "sandwich margins: lower {:e}, upper {:e} over {} points",
        sol.sandwich.lower, sol.sandwich.upper, sol.sandwich.points
    )?;
    writeln!(out, "monotonicity violations = {}", sol.monotonicity_violations)?;
    writeln!(out, "Gamma_k violations = {}", sol.gamma_violations)?;
    for note in &sol.notes {
        writeln!(out, "note: {note}")?;
    }
    Ok(())
}

fn solve(exp: &Experiment, out: &mut dyn Write) -> Result<(), CliError> {
    let problem = exp.problem()?;
    let sol = radial_solver::solve_blowup(&problem, &exp.blowup_options()?)?;
    summarize(&sol, out)?;
    write_csv(exp, |w| sol.write_csv(w, &exp.comment()))?;
    write_plot(exp, || {
        let pts = |f: &dyn Fn(f64) -> f64| -> Vec<(f64, f64)> { sol.d().iter().map(|&d| (d, f(d))).collect() };
        let u: Vec<(f64, f64)> = sol.d().iter().zip(&sol.u).map(|(&d, &u)| (d, u)).collect();
        let series = [
            Series { label: "u", points: u, dashed: false },
            Series { label: "sub", points: pts(&|d| sol.sub.value_at_distance(d).unwrap_or(f64::NAN)), dashed: true },
            Series { label: "super", points: pts(&|d| sol.sup.value_at_distance(d).unwrap_or(f64::NAN)), dashed: true },
        ];
        plot::line_plot("radial large solution", "d = R - r", "u", &series, Scale::Log, Scale::Log)
    })
}

fn rate(exp: &Experiment, out: &mut dyn Write) -> Result<(), CliError> {
    let problem = exp.problem()?;
    let raw = &exp.raw;
    let start = raw.f64("solver.rate_start")?;
    raw.check("solver.rate_start", start > 0.0 && start < problem.dom.radius(), "(0, R)")?;
    let tolerance = raw.f64("solver.rate_tolerance")?;
    raw.check("solver.rate_tolerance", tolerance > 0.0 && tolerance < 1.0, "(0, 1)")?;
    barriers::rate_constants(&problem)?;
    let sol = radial_solver::solve_blowup(&problem, &exp.blowup_options()?)?;
    summarize(&sol, out)?;
    let rep = radial_solver::boundary_rate(&sol, start, tolerance)?;
    let (lo, hi) = rep.constants.bracket;
    writeln!(out, "C_f^+inf = {}", rep.constants.c_plus)?;
    writeln!(out, "tau_b1 = {}, tau_b2 = {}", rep.constants.tau_b1, rep.constants.tau_b2)?;
    writeln!(out, "predicted bracket = [{lo}, {hi}]")?;
    writeln!(out, "measured limit = {} +- {:e} from {} probes", rep.estimate.value, rep.estimate.error, rep.ratios.len())?;
    writeln!(out, "inside bracket (tolerance {}) = {}", tolerance, rep.inside)?;
    write_csv(exp, |w| {
        writeln!(w, "# {}", exp.comment())?;
        writeln!(w, "d,ratio")?;
        for (d, q) in rep.distances.iter().zip(&rep.ratios) {
            writeln!(w, "{d:.17e},{q:.17e}")?;
        }
        Ok(())
    })?;
    write_plot(exp, || {
        let span = |v: f64| rep.distances.iter().map(|&d| (d, v)).collect::<Vec<_>>();
        let measured: Vec<(f64, f64)> = rep.distances.iter().copied().zip(rep.ratios.iter().copied()).collect();
        let series = [
            Series { label: "ratio", points: measured, dashed: false },
            Series { label: "tau_b2^(1-C)", points: span(lo), dashed: true },
            Series { label: "tau_b1^(1-C)", points: span(hi), dashed: true },
        ];
        plot::line_plot("boundary rate", "d", "u / psi(Theta^((k+1)/k))", &series, Scale::Log, Scale::Linear)
    })?;
    if rep.inside {
        Ok(())
    } else {
        Err(CliError::Check(format!("measured limit {} outside [{lo}, {hi}]", rep.estimate.value)))
    }
}

fn default_schedule(parameter: SweepParameter, k: usize) -> Vec<f64> {
    match parameter {
        SweepParameter::Lambda => (1..=3).map(|j| -(k as f64) - 1.0 + 10f64.powi(-j)).collect(),
        SweepParameter::Mu => vec![2.0, 4.0, 8.0],
        SweepParameter::Eta => vec![1.0, 0.1, 0.01],
    }
}

fn sweep(exp: &Experiment, out: &mut dyn Write) -> Result<(), CliError> {
    let problem = exp.problem()?;
    let parameter = exp.sweep_parameter()?;
    let mut schedule = exp.raw.list("solver.schedule")?;
    if schedule.is_empty() {
        schedule = default_schedule(parameter, exp.k);
    }
    let probes = exp.raw.list("solver.probes")?;
    exp.raw.check("solver.probes", !probes.is_empty(), "a nonempty list of radii in [0, R)")?;
    let table = radial_solver::parameter_sweep(&problem, parameter, &schedule, &probes, &exp.blowup_options()?)?;
    writeln!(out, "parameter = {}, normalisation = u / {}", parameter.name(), table.normalization)?;
    for row in &table.rows {
        match &row.result {
            Ok(v) => {
                let q: Vec<String> = v.normalized.iter().map(|x| format!("{x:.6}")).collect();
                let flag = if v.converged { "" } else { " (partial)" };
                writeln!(out, "{} = {}: normalised {}{flag}", parameter.name(), row.value, q.join(" "))?;
            }
            Err(e) => writeln!(out, "{} = {}: failed: {e}", parameter.name(), row.value)?,
        }
    }
    if let Some(l) = &table.limit {
        writeln!(out, "extrapolated limit = {} +- {:e}", l.value, l.error)?;
    }
    if let Some((a, b)) = table.predicted {
        writeln!(out, "predicted = [{a}, {b}]")?;
    }
    write_csv(exp, |w| table.write_csv(w, &exp.comment()))
}

/// One selftest check.
fn check(out: &mut dyn Write, name: &str, ok: bool, detail: String) -> io::Result<bool> {
    writeln!(out, "{} {name}: {detail}", if ok { "PASS" } else { "FAIL" })?;
    Ok(ok)
}

fn selftest(_exp: &Experiment, out: &mut dyn Write) -> Result<(), CliError> {
    let mut all = true;

    let mut worst = 0.0f64;
    for n in 2..=4 {
        for s in 0..8 {
            let eig: Vec<f64> = (0..n).map(|i| ((s * 7 + i * 3) as f64 * 0.61).sin() * 2.0 + 0.3).collect();
            let m = rotated(&eig, 0.37 + s as f64 * 0.2);
            for k in 1..=n {
                let a = symfun::sk_matrix(&m, k)?;
                let b = symfun::elem_sym(&eig, k)?;
                worst = worst.max((a - b).abs() / b.abs().max(1.0));
            }
        }
    }
    all &= check(out, "sk_matrix matches eigenvalue symmetric functions", worst <= 1e-10, format!("{worst:e}"))?;

    let mut worst = 0.0f64;
    for nl in [Nonlinearity::power(3.0, 1)?, Nonlinearity::power(4.0, 2)?, Nonlinearity::exponential(1)?] {
        let (psi, psi_n) = (PsiTransform::new(&nl)?, PsiTransform::numeric(&nl)?);
        let (phi, phi_n) = (PhiTransform::new(&nl)?, PhiTransform::numeric(&nl)?);
        for t in log_samples(1e-6, 10.0, 15) {
            worst = worst.max(discrepancy(psi_n.psi(t)?, psi.psi(t)?));
            worst = worst.max(discrepancy(phi_n.phi(t)?, phi.phi(t)?));
        }
    }
    all &= check(out, "numeric transforms match closed forms", worst <= 1e-8, format!("{worst:e}"))?;

    let nl = Nonlinearity::power(3.0, 1)?;
    let (exact, ext) = (nl.limit_constants()?, nl.extrapolated_constants()?);
    let gap = (exact.c_plus - ext.c_plus).abs().max((exact.c_zero.unwrap_or(0.0) - ext.c_zero.unwrap_or(0.0)).abs());
    all &= check(out, "extrapolated index constants match closed forms", gap <= 1e-3, format!("{gap:e}"))?;

    let dom = BallDomain::new(2, 1.0, 1)?;
    let problem = radial_solver::BallProblem::new(
        dom,
        barriers::WeightDescriptor::constant(barriers::WeightForm::Power { lambda: 0.0 }, 1.0)?,
        nl.clone(),
    )?;
    let radii: Vec<f64> = (0..64).map(|i| i as f64 / 64.0).collect();
    let mut ok = true;
    for kind in [barriers::BarrierKind::PowerScaling, barriers::BarrierKind::PsiPowerWeight] {
        for role in [Role::Sub, Role::Super] {
            let spec = barriers::build_barrier_with_grid(kind, &problem, role, 512)?;
            ok &= barriers::verify_barrier(&spec, &problem, &radii).passed();
        }
    }
    all &= check(out, "barriers satisfy their inequalities", ok, "power-scaling and psi-power, sub and super".into())?;

    let opts = radial_solver::BlowupOptions { barrier_grid: 512, ..Default::default() };
    let sol = radial_solver::solve_blowup(&problem, &opts)?;
    all &= check(
        out,
        "monotone scheme invariants",
        sol.converged
            && sol.monotonicity_violations == 0
            && sol.gamma_violations == 0
            && sol.max_residual <= 1e-6
            && sol.sandwich.holds(1e-6),
        format!(
            "converged {}, residual {:e}, sandwich ({:e}, {:e}), violations {}/{}",
            sol.converged,
            sol.max_residual,
            sol.sandwich.lower,
            sol.sandwich.upper,
            sol.monotonicity_violations,
            sol.gamma_violations
        ),
    )?;

    let mut rate_problem = problem.clone();
    rate_problem.weight.form =
        barriers::WeightForm::BoundaryRate { theta: barriers::ThetaFunction::constant(1.0)? };
    let sol = radial_solver::solve_blowup(&rate_problem, &opts)?;
    let rep = radial_solver::boundary_rate(&sol, 0.1, 0.02)?;
    let ud = rep.estimate.value / 2f64.sqrt();
    all &= check(
        out,
        "boundary rate of u^3 in the plane",
        rep.inside && (ud - 2f64.sqrt()).abs() <= 0.02 * 2f64.sqrt(),
        format!("u*d -> {ud}"),
    )?;

    if all {
        Ok(())
    } else {
        Err(CliError::Check("selftest".into()))
    }
}

/// `Q diag(eig) Qᵀ` with `Q` a product of plane rotations.
fn rotated(eig: &[f64], angle: f64) -> SymMatrix {
    let n = eig.len();
    let mut q: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for p in 0..n.saturating_sub(1) {
        let (c, s) = ((angle * (p + 1) as f64).cos(), (angle * (p + 1) as f64).sin());
        for row in q.iter_mut() {
            let (a, b) = (row[p], row[p + 1]);
            row[p] = c * a - s * b;
            row[p + 1] = s * a + c * b;
        }
    }
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|l| q[i][l] * eig[l] * q[j][l]).sum()).collect())
        .collect();
    SymMatrix::from_rows(&rows).expect("rotation of a diagonal matrix is symmetric")
}
