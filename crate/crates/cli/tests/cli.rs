use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hessian-blowup")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn indices_of_a_cubic_at_order_two() {
    let o = run(&["indices", "--family", "power", "--gamma", "3", "--k", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = stdout(&o);
    for line in ["C_f^+inf = 3", "C_f^0 = 3", "h0 = 3"] {
        assert!(s.lines().any(|l| l == line), "missing '{line}' in\n{s}");
    }
}

#[test]
fn exponential_indices_are_one() {
    let o = run(&["indices", "--family", "exp"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("C_f^+inf = 1") && s.contains("C_f^-inf = 1"), "{s}");
}

#[test]
fn keller_osserman_violation_exits_two() {
    let o = run(&["indices", "--gamma", "1", "--k", "2"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn unknown_flag_and_subcommand_exit_one() {
    assert_eq!(run(&["indices", "--gama", "3"]).status.code(), Some(1));
    assert_eq!(run(&["integrate"]).status.code(), Some(1));
    assert_eq!(run(&[]).status.code(), Some(1));
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
    assert_eq!(run(&["solve", "--help"]).status.code(), Some(0));
}

#[test]
fn malformed_config_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.conf");
    fs::write(&path, "[problem]\ngamma = 3\n\nflavour = sweet\n").unwrap();
    let o = run(&["indices", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 4") && stderr(&o).contains("flavour"), "{}", stderr(&o));

    fs::write(&path, "[solver]\nlevels = lots\n").unwrap();
    let o = run(&["solve", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn out_of_range_flag_exits_one() {
    let o = run(&["solve", "--N", "1", "--k", "2"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("--N"), "{}", stderr(&o));
    assert_eq!(run(&["indices", "--gamma", "three"]).status.code(), Some(1));
    assert_eq!(run(&["indices", "--config", "/nonexistent/x.conf"]).status.code(), Some(1));
}

#[test]
fn flags_override_config_values() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.conf");
    fs::write(&path, "[problem]\ngamma = 5\nk = 1\n").unwrap();
    let o = run(&["indices", "--config", path.to_str().unwrap(), "--gamma", "3"]);
    assert!(stdout(&o).contains("C_f^+inf = 1.5"), "{}", stdout(&o));
    let o = run(&["indices", "--config", path.to_str().unwrap()]);
    assert!(stdout(&o).contains("C_f^+inf = 1.25"), "{}", stdout(&o));
}

#[test]
fn solve_csv_is_commented_headed_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let svg = dir.path().join("u.svg");
    let args = |p: &std::path::Path| {
        vec!["solve".to_string(), "--levels".into(), "10".into(), "--output".into(), p.display().to_string()]
    };
    let mut first = args(&a);
    first.extend(["--plot".to_string(), svg.display().to_string()]);
    let o = run(&first.iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = run(&args(&b).iter().map(String::as_str).collect::<Vec<_>>());
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&a).unwrap();
    let mut lines = text.lines();
    let comment = lines.next().unwrap();
    assert!(comment.starts_with("# hessian-blowup solve ") && comment.contains("problem.gamma=3"), "{comment}");
    assert!(comment.contains("solver.levels=10"));
    assert_eq!(lines.next(), Some("r,d,u,u_prime,residual"));
    assert!(lines.count() > 100);
    let ca: Vec<&str> = text.lines().skip(1).collect();
    let other = fs::read_to_string(&b).unwrap();
    let cb: Vec<&str> = other.lines().skip(1).collect();
    assert_eq!(ca, cb);
    let plot = fs::read_to_string(&svg).unwrap();
    assert!(plot.starts_with("<svg") && plot.contains("<path"));
}

#[test]
fn csv_to_stdout_keeps_summary_on_stderr() {
    let o = run(&["transform", "--gamma", "4", "--k", "2", "--samples", "5", "--output", "-"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let lines: Vec<&str> = s.lines().collect();
    assert!(lines[0].starts_with("# hessian-blowup transform"));
    assert_eq!(lines[1], "t,psi,phi,psi_numeric,phi_numeric");
    assert_eq!(lines.len(), 7);
    assert!(stderr(&o).contains("psi discrepancy"));
}

#[test]
fn barrier_verification_passes_for_the_default_problem() {
    let o = run(&["barrier", "--N", "3", "--k", "2", "--gamma", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("barrier = power-scaling"));
    assert_eq!(s.matches(", PASS").count(), 2, "{s}");
}

#[test]
fn rate_of_the_planar_cubic_is_inside_the_bracket() {
    let o = run(&["rate", "--N", "2", "--k", "1", "--family", "power", "--gamma", "3", "--b", "const:1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("inside bracket (tolerance 0.02) = true"), "{s}");
}

#[test]
fn rate_without_a_boundary_weight_is_a_hypothesis_error() {
    let o = run(&["rate", "--weight", "power"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn sweep_writes_one_row_per_schedule_value() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let o = run(&[
        "sweep",
        "--family",
        "exp",
        "--schedule",
        "-1.9,-1.99",
        "--probes",
        "0,0.5",
        "--output",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("# hessian-blowup sweep"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 3, "{text}");
}

#[test]
fn selftest_passes() {
    let o = run(&["selftest"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    let s = stdout(&o);
    assert!(s.lines().all(|l| l.starts_with("PASS ")), "{s}");
}
