//! Typed experiment settings resolved from a [`RawConfig`].

use std::fmt;
use std::path::PathBuf;

use hessian_blowup::barriers::{BarrierKind, ThetaFunction, WeightDescriptor, WeightForm};
use hessian_blowup::geometry::BallDomain;
use hessian_blowup::karamata::{KaramataFunction, Orientation, Perturbation};
use hessian_blowup::nonlinearity::{Family, Nonlinearity, TabulatedF};
use hessian_blowup::radial_solver::{BallProblem, BlowupOptions, SweepParameter, TruncatedMethod};
use hessian_blowup::Error;

use crate::config::{ConfigError, RawConfig};

/// Why a command stopped; maps to the process exit code.
#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Io(String),
    Core(Error),
    /// A verification ran but its check failed.
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Core(e) if e.is_hypothesis() => 2,
            CliError::Core(_) | CliError::Check(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "configuration error: {e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Check(e) => write!(f, "check failed: {e}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

/// The subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Indices,
    Transform,
    Barrier,
    Solve,
    Rate,
    Sweep,
    Selftest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Indices => "indices",
            Command::Transform => "transform",
            Command::Barrier => "barrier",
            Command::Solve => "solve",
            Command::Rate => "rate",
            Command::Sweep => "sweep",
            Command::Selftest => "selftest",
        }
    }
}

/// Settings shared by the subcommands.
#[derive(Debug)]
pub struct Experiment {
    pub command: Command,
    pub raw: RawConfig,
    pub k: usize,
    pub f: Nonlinearity,
    pub csv: Option<PathBuf>,
    pub plot: Option<PathBuf>,
}

impl Experiment {
    pub fn resolve(command: Command, mut raw: RawConfig) -> Result<Self, CliError> {
        if raw.get("problem.weight") == "auto" {
            let w = if command == Command::Rate { "rate" } else { "power" };
            raw.set_flag("problem.weight", w.to_string());
        }
        let k = raw.usize("problem.k")?;
        raw.check("problem.k", (1..=16).contains(&k), "1..=16")?;
        let f = nonlinearity(&raw, k)?;
        let path = |key: &str| {
            let v = raw.get(key);
            (!v.is_empty()).then(|| PathBuf::from(v))
        };
        let (csv, plot) = (path("output.csv"), path("output.plot"));
        Ok(Experiment { command, raw, k, f, csv, plot })
    }

    /// The boundary-value problem on the ball.
    pub fn problem(&self) -> Result<BallProblem, CliError> {
        let raw = &self.raw;
        let n = raw.usize("problem.n")?;
        raw.check("problem.n", (self.k..=16).contains(&n), &format!("{}..=16 (N ≥ k)", self.k))?;
        let radius = raw.f64("problem.radius")?;
        raw.check("problem.radius", radius > 0.0, "(0, ∞)")?;
        let dom = BallDomain::new(n, radius, self.k)?;
        let (b1, b2) = weight_bounds(raw)?;
        let form = weight_form(raw, self.k)?;
        let weight = WeightDescriptor::new(form, b1, b2)?;
        Ok(BallProblem::new(dom, weight, self.f.clone())?)
    }

    pub fn barrier(&self) -> Result<Option<BarrierKind>, CliError> {
        match self.raw.get("problem.barrier") {
            "auto" => Ok(None),
            s => BarrierKind::parse(s)
                .map(Some)
                .map_err(|e| self.raw.invalid("problem.barrier", e.to_string()).into()),
        }
    }

    pub fn blowup_options(&self) -> Result<BlowupOptions, CliError> {
        let raw = &self.raw;
        let points = raw.usize("solver.points")?;
        raw.check("solver.points", (16..=1 << 20).contains(&points), "16..=1048576")?;
        let s_max = raw.f64("solver.s_max")?;
        raw.check("solver.s_max", s_max > 1.0 && s_max <= 700.0, "(1, 700]")?;
        let levels = raw.usize("solver.levels")?;
        raw.check("solver.levels", (1..=60).contains(&levels), "1..=60")?;
        let delta0 = raw.f64("solver.delta0")?;
        raw.check("solver.delta0", delta0 > 0.0 && delta0 < 1.0, "(0, 1)")?;
        let tol = raw.f64("solver.tol")?;
        raw.check("solver.tol", tol > 0.0, "(0, ∞)")?;
        let report_distance = raw.f64("solver.report_distance")?;
        raw.check("solver.report_distance", report_distance > 0.0 && report_distance < 1.0, "(0, 1)")?;
        let barrier_grid = raw.usize("solver.barrier_grid")?;
        raw.check("solver.barrier_grid", barrier_grid >= 8, "≥ 8")?;
        let method = match raw.get("solver.method") {
            "anchored" => TruncatedMethod::Anchored,
            "picard" => TruncatedMethod::DampedPicard,
            other => {
                return Err(raw.invalid("solver.method", format!("unknown method '{other}' (anchored, picard)")).into())
            }
        };
        Ok(BlowupOptions {
            points,
            s_max,
            levels,
            delta0,
            tol,
            report_distance,
            method,
            barrier: self.barrier()?,
            barrier_grid,
            ..Default::default()
        })
    }

    pub fn sweep_parameter(&self) -> Result<SweepParameter, CliError> {
        SweepParameter::parse(self.raw.get("solver.parameter"))
            .map_err(|e| self.raw.invalid("solver.parameter", e.to_string()).into())
    }

    /// Comment line recorded in every CSV.
    pub fn comment(&self) -> String {
        format!("hessian-blowup {} {}", self.command.name(), self.raw.describe())
    }
}

fn nonlinearity(raw: &RawConfig, k: usize) -> Result<Nonlinearity, CliError> {
    let gamma = || raw.f64("problem.gamma");
    let family = match raw.get("problem.family") {
        "power" => Family::Power { gamma: gamma()? },
        "exp" | "exponential" => Family::Exponential,
        "negative-power-tail" => Family::NegativePowerTail { gamma: gamma()? },
        "table" => {
            let path = raw.get("problem.table");
            if path.is_empty() {
                return Err(raw.invalid("problem.table", "family 'table' needs a table file".into()).into());
            }
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
            Family::Tabulated(TabulatedF::parse(&text).map_err(|e| raw.invalid("problem.table", e.to_string()))?)
        }
        other => {
            return Err(raw
                .invalid(
                    "problem.family",
                    format!("unknown family '{other}' (power, exp, negative-power-tail, table)"),
                )
                .into())
        }
    };
    Nonlinearity::new(family, k).map_err(|e| match e {
        Error::Argument(m) => raw.invalid("problem.gamma", m).into(),
        other => other.into(),
    })
}

fn weight_bounds(raw: &RawConfig) -> Result<(f64, f64), CliError> {
    let spec = raw.get("problem.b");
    let bad = || raw.invalid("problem.b", format!("expected const:<b> or range:<b1>,<b2>, found '{spec}'"));
    let num = |s: &str| s.trim().parse::<f64>().ok().filter(|x| x.is_finite() && *x > 0.0);
    let (b1, b2) = if let Some(v) = spec.strip_prefix("const:") {
        let b = num(v).ok_or_else(bad)?;
        (b, b)
    } else if let Some(v) = spec.strip_prefix("range:") {
        let (a, b) = v.split_once(',').ok_or_else(bad)?;
        (num(a).ok_or_else(bad)?, num(b).ok_or_else(bad)?)
    } else {
        return Err(bad().into());
    };
    raw.check("problem.b", b1 <= b2, "0 < b1 ≤ b2")?;
    Ok((b1, b2))
}

fn weight_form(raw: &RawConfig, _k: usize) -> Result<WeightForm, CliError> {
    Ok(match raw.get("problem.weight") {
        "power" => WeightForm::Power { lambda: raw.f64("problem.lambda")? },
        "log" => WeightForm::LogCritical { mu: raw.f64("problem.mu")? },
        "karamata" => {
            let c = raw.f64("problem.karamata_c")?;
            raw.check("problem.karamata_c", c > 0.0, "(0, ∞)")?;
            let sigma = raw.f64("problem.karamata_sigma")?;
            let l = KaramataFunction::new(c, Perturbation::LogFactor(sigma), Orientation::AtZero)?;
            WeightForm::Karamata { lambda: raw.f64("problem.lambda")?, l }
        }
        "rate" => {
            let c = raw.f64("problem.theta_c")?;
            let p = raw.f64("problem.theta_p")?;
            let theta = ThetaFunction::new(c, p).map_err(|e| raw.invalid("problem.theta_c", e.to_string()))?;
            WeightForm::BoundaryRate { theta }
        }
        other => {
            return Err(raw
                .invalid("problem.weight", format!("unknown weight '{other}' (power, log, karamata, rate)"))
                .into())
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw(pairs: &[(&str, &str)]) -> RawConfig {
        let mut r = RawConfig::default();
        for (k, v) in pairs {
            r.set_flag(k, v.to_string());
        }
        r
    }

    #[test]
    fn rate_defaults_to_boundary_weight() {
        let e = Experiment::resolve(Command::Rate, raw(&[])).unwrap();
        assert!(matches!(e.problem().unwrap().weight.form, WeightForm::BoundaryRate { .. }));
        let e = Experiment::resolve(Command::Solve, raw(&[])).unwrap();
        assert!(matches!(e.problem().unwrap().weight.form, WeightForm::Power { .. }));
    }

    #[test]
    fn weight_bounds_parse() {
        let e = Experiment::resolve(Command::Solve, raw(&[("problem.b", "range:1,2")])).unwrap();
        let p = e.problem().unwrap();
        assert_eq!((p.weight.b1, p.weight.b2), (1.0, 2.0));
        let e = Experiment::resolve(Command::Solve, raw(&[("problem.b", "range:2,1")])).unwrap();
        assert!(matches!(e.problem(), Err(CliError::Config(_))));
        let e = Experiment::resolve(Command::Solve, raw(&[("problem.b", "one")])).unwrap();
        assert!(matches!(e.problem(), Err(CliError::Config(_))));
    }

    #[test]
    fn hypothesis_errors_map_to_exit_two() {
        let e = Experiment::resolve(Command::Indices, raw(&[("problem.gamma", "1"), ("problem.k", "2")]));
        let err = e.and_then(|e| e.f.limit_constants().map_err(CliError::from)).unwrap_err();
        assert_eq!(err.exit_code(), 2, "{err}");
    }

    #[test]
    fn dimension_below_order_is_rejected() {
        let e = Experiment::resolve(Command::Solve, raw(&[("problem.k", "3"), ("problem.n", "2")])).unwrap();
        assert!(matches!(e.problem(), Err(CliError::Config(_))));
    }
}
