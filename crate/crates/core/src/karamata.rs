//! Regularly varying functions in Karamata representation form, index
//! estimation, and the asymptotic integral estimates for slowly varying
//! factors.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::extrap::{self, Estimate};
use crate::quad::{self, Decay};

const QUAD_TOL: f64 = 1e-13;

/// Where the function is slowly varying.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    AtZero,
    AtPositiveInfinity,
    AtNegativeInfinity,
}

/// Sampled perturbation `y`, interpolated linearly in `ln s` and held
/// constant beyond the ends.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationTable {
    log_s: Vec<f64>,
    y: Vec<f64>,
}

impl PerturbationTable {
    pub fn new(s: &[f64], y: &[f64]) -> Result<Self> {
        if s.len() != y.len() || s.len() < 2 {
            return Err(Error::Argument("table needs at least two (s, y) pairs".into()));
        }
        if s.iter().any(|&x| x <= 0.0) || s.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Argument("table abscissae must be positive and increasing".into()));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("table values must be finite".into()));
        }
        Ok(PerturbationTable { log_s: s.iter().map(|x| x.ln()).collect(), y: y.to_vec() })
    }

    fn at(&self, s: f64) -> f64 {
        let w = s.ln();
        let n = self.log_s.len();
        if w <= self.log_s[0] {
            return self.y[0];
        }
        if w >= self.log_s[n - 1] {
            return self.y[n - 1];
        }
        let i = self.log_s.partition_point(|&x| x <= w) - 1;
        let f = (w - self.log_s[i]) / (self.log_s[i + 1] - self.log_s[i]);
        self.y[i] + f * (self.y[i + 1] - self.y[i])
    }

    /// `∫_{w0}^{w} y dw'` in `w = ln s`, with `w0` the first abscissa.
    fn primitive(&self, w: f64) -> f64 {
        let (ls, y) = (&self.log_s, &self.y);
        let n = ls.len();
        if w <= ls[0] {
            return y[0] * (w - ls[0]);
        }
        let mut total = 0.0;
        for i in 0..n - 1 {
            if w <= ls[i + 1] {
                let f = (w - ls[i]) / (ls[i + 1] - ls[i]);
                return total + 0.5 * (w - ls[i]) * (2.0 * y[i] + f * (y[i + 1] - y[i]));
            }
            total += 0.5 * (ls[i + 1] - ls[i]) * (y[i] + y[i + 1]);
        }
        total + y[n - 1] * (w - ls[n - 1])
    }
}

/// Perturbation `y` of the representation `c·exp(∫ y(s)/s ds)`.
#[derive(Clone)]
pub enum Perturbation {
    Zero,
    /// `y ≡ ε`, giving a pure power factor.
    Constant(f64),
    /// `y(s) = σ/(1 + |ln s|)`, giving the factor `(1 + |ln t|)^σ`.
    LogFactor(f64),
    Table(PerturbationTable),
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Perturbation::Zero => write!(f, "Zero"),
            Perturbation::Constant(e) => write!(f, "Constant({e})"),
            Perturbation::LogFactor(s) => write!(f, "LogFactor({s})"),
            Perturbation::Table(_) => write!(f, "Table"),
            Perturbation::Function(_) => write!(f, "Function"),
        }
    }
}

impl Perturbation {
    fn at(&self, s: f64) -> f64 {
        match self {
            Perturbation::Zero => 0.0,
            Perturbation::Constant(e) => *e,
            Perturbation::LogFactor(sigma) => sigma / (1.0 + s.ln().abs()),
            Perturbation::Table(t) => t.at(s),
            Perturbation::Function(g) => g(s),
        }
    }

    /// `∫_a^b y(s)/s ds` for `0 < a, b`.
    fn log_integral(&self, a: f64, b: f64, numeric: bool) -> Result<f64> {
        let (la, lb) = (a.ln(), b.ln());
        if !numeric {
            match self {
                Perturbation::Zero => return Ok(0.0),
                Perturbation::Constant(e) => return Ok(e * (lb - la)),
                Perturbation::LogFactor(sigma) => {
                    let p = |w: f64| w.signum() * w.abs().ln_1p();
                    return Ok(sigma * (p(lb) - p(la)));
                }
                Perturbation::Table(t) => return Ok(t.primitive(lb) - t.primitive(la)),
                _ => {}
            }
        }
        if la == lb {
            return Ok(0.0);
        }
        let (lo, hi, sign) = if la < lb { (la, lb, 1.0) } else { (lb, la, -1.0) };
        // Split at w = 0 where the log-factor kink sits.
        let mut total = 0.0;
        let mut pieces = vec![lo];
        if lo < 0.0 && hi > 0.0 {
            pieces.push(0.0);
        }
        pieces.push(hi);
        for w in pieces.windows(2) {
            total += quad::integrate(|x: f64| self.at(x.exp()), w[0], w[1], QUAD_TOL)?.value;
        }
        Ok(sign * total)
    }
}

/// A slowly varying function `L̃(t) = c·exp(∫_t^1 y(s)/s ds)` at zero, or
/// `c·exp(∫_1^t y(s)/s ds)` at infinity.
#[derive(Debug, Clone)]
pub struct KaramataFunction {
    c: f64,
    y: Perturbation,
    orientation: Orientation,
}

impl KaramataFunction {
    pub fn new(c: f64, y: Perturbation, orientation: Orientation) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Argument(format!("constant c = {c} must be positive")));
        }
        Ok(KaramataFunction { c, y, orientation })
    }

    /// The constant function `c`.
    pub fn constant(c: f64) -> Result<Self> {
        Self::new(c, Perturbation::Zero, Orientation::AtZero)
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn perturbation(&self) -> &Perturbation {
        &self.y
    }

    /// True when `y` tends to zero by construction (zero, log factor) or by
    /// a small sampled end value.
    pub fn is_slowly_varying(&self) -> bool {
        match &self.y {
            Perturbation::Zero | Perturbation::LogFactor(_) => true,
            Perturbation::Constant(e) => *e == 0.0,
            Perturbation::Table(t) => {
                let end = match self.orientation {
                    Orientation::AtZero => t.y[0],
                    _ => *t.y.last().unwrap(),
                };
                end.abs() < 1e-3
            }
            Perturbation::Function(_) => true,
        }
    }

    fn check(&self, t: f64) -> Result<f64> {
        let s = match self.orientation {
            Orientation::AtZero | Orientation::AtPositiveInfinity => t,
            Orientation::AtNegativeInfinity => -t,
        };
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::Domain(format!(
                "t = {t} outside the domain of a {:?} function",
                self.orientation
            )));
        }
        Ok(s)
    }

    fn eval_impl(&self, t: f64, numeric: bool) -> Result<f64> {
        let s = self.check(t)?;
        let expo = match self.orientation {
            Orientation::AtZero => self.y.log_integral(s, 1.0, numeric)?,
            _ => self.y.log_integral(1.0, s, numeric)?,
        };
        Ok(self.c * expo.exp())
    }

    /// Value at `t`; closed forms for the built-in perturbations.
    pub fn eval(&self, t: f64) -> Result<f64> {
        self.eval_impl(t, false)
    }

    /// Value at `t` by quadrature of the representation integral.
    pub fn eval_numeric(&self, t: f64) -> Result<f64> {
        self.eval_impl(t, true)
    }

    /// Perturbation value at `t` (oriented argument).
    pub fn y_at(&self, t: f64) -> Result<f64> {
        Ok(self.y.at(self.check(t)?))
    }

    /// `t·L̃′(t)/L̃(t)`.
    pub fn log_derivative(&self, t: f64) -> Result<f64> {
        let y = self.y_at(t)?;
        Ok(match self.orientation {
            Orientation::AtZero => -y,
            _ => y,
        })
    }
}

/// A regularly varying function `t^ρ·L̃(t)` (with `|t|` for the negative
/// orientation).
#[derive(Debug, Clone)]
pub struct RvFunction {
    pub index: f64,
    pub slowly_varying: KaramataFunction,
}

impl RvFunction {
    pub fn new(index: f64, slowly_varying: KaramataFunction) -> Self {
        RvFunction { index, slowly_varying }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        let l = self.slowly_varying.eval(t)?;
        let g = t.abs().powf(self.index) * l;
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::Domain(format!("value at t = {t} is not positive and finite")));
        }
        Ok(g)
    }

    /// `t·g′(t)/g(t)`.
    pub fn log_derivative(&self, t: f64) -> Result<f64> {
        Ok(self.index + self.slowly_varying.log_derivative(t)?)
    }

    /// `max_{ξ ∈ [0.5, 2]} |g(ξt)/g(t) − ξ^ρ|` on a 65-point probe.
    pub fn uniform_deviation(&self, t: f64) -> Result<f64> {
        let gt = self.eval(t)?;
        let mut worst = 0.0f64;
        for i in 0..=64 {
            let xi = 0.5 * 4f64.powf(i as f64 / 64.0);
            let d = (self.eval(xi * t)? / gt - xi.powf(self.index)).abs();
            worst = worst.max(d);
        }
        Ok(worst)
    }
}

/// Fourth-order central difference for `g′(t)` with step `1e-3·|t|`.
pub fn derivative(g: &dyn Fn(f64) -> f64, t: f64) -> f64 {
    let h = 1e-3 * t.abs().max(f64::MIN_POSITIVE);
    (-g(t + 2.0 * h) + 8.0 * g(t + h) - 8.0 * g(t - h) + g(t - 2.0 * h)) / (12.0 * h)
}

/// Index of regular variation at zero: the accelerated limit of
/// `t·g′(t)/g(t)` along `t_j = t0·2^(-j)`, `j < terms`.
pub fn rv_index_at_zero(
    g: &dyn Fn(f64) -> f64,
    dg: Option<&dyn Fn(f64) -> f64>,
    t0: f64,
    terms: usize,
) -> Result<Estimate> {
    if !(t0 > 0.0) || terms < 4 {
        return Err(Error::Argument("need t0 > 0 and at least four probe points".into()));
    }
    let seq: Vec<f64> = (0..terms)
        .map(|j| {
            let t = t0 * 0.5f64.powi(j as i32);
            let d = match dg {
                Some(d) => d(t),
                None => derivative(g, t),
            };
            t * d / g(t)
        })
        .collect();
    extrap::limit(&seq, 1e-7, 1.0)
}

/// Which end the integral estimate refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    AtZero,
    AtInfinity,
}

/// Ratio of `∫ s^ρ L(s) ds` to its Karamata asymptotic form, for the four
/// cases: tail at infinity (`ρ < -1`), from `t` to 1 at zero (`ρ < -1`), from 1
/// to `t` at infinity (`ρ > -1`) and from zero (`ρ > -1`). Tends to 1.
pub fn asymptotic_integral_ratio(
    l: &KaramataFunction,
    rho: f64,
    side: Side,
    t: f64,
) -> Result<f64> {
    if rho == -1.0 {
        return Err(Error::Argument("index -1 has no power-type estimate".into()));
    }
    match (side, l.orientation()) {
        (Side::AtZero, Orientation::AtZero) | (Side::AtInfinity, Orientation::AtPositiveInfinity) => {}
        _ => {
            return Err(Error::Argument(format!(
                "side {side:?} does not match a {:?} function",
                l.orientation()
            )))
        }
    }
    let lt = l.eval(t)?;
    let integrand = |s: f64| l.eval(s).map_or(f64::NAN, |v| s.powf(rho) * v);
    let in_log = |w: f64| {
        let s = w.exp();
        s * integrand(s)
    };
    let value = match (side, rho < -1.0) {
        (Side::AtInfinity, true) => quad::integrate_tail(integrand, t, Decay::Power(-rho), QUAD_TOL)?.value,
        (Side::AtZero, false) => quad::integrate_from_zero(integrand, t, rho, QUAD_TOL)?.value,
        (Side::AtZero, true) => quad::integrate(in_log, t.ln(), 0.0, QUAD_TOL)?.value,
        (Side::AtInfinity, false) => quad::integrate(in_log, 0.0, t.ln(), QUAD_TOL)?.value,
    };
    let formula = t.powf(1.0 + rho) * lt / (rho + 1.0).abs();
    Ok(value / formula)
}

/// The shipped slowly varying factors paired with the indices used in the
/// integral-estimate checks.
pub fn builtin_pairs() -> Vec<(String, KaramataFunction, f64, Side)> {
    let zero_log = KaramataFunction::new(1.0, Perturbation::LogFactor(1.0), Orientation::AtZero).unwrap();
    let zero_neg = KaramataFunction::new(2.0, Perturbation::LogFactor(-0.5), Orientation::AtZero).unwrap();
    let inf_log =
        KaramataFunction::new(1.0, Perturbation::LogFactor(1.0), Orientation::AtPositiveInfinity).unwrap();
    let inf_neg =
        KaramataFunction::new(1.0, Perturbation::LogFactor(-0.5), Orientation::AtPositiveInfinity).unwrap();
    let s: Vec<f64> = (0..=60).map(|i| 10f64.powf(-12.0 + 0.2 * i as f64)).collect();
    let y: Vec<f64> = s.iter().map(|&x| 0.3 / (1.0 + x.ln().abs())).collect();
    let table = KaramataFunction::new(
        1.0,
        Perturbation::Table(PerturbationTable::new(&s, &y).unwrap()),
        Orientation::AtZero,
    )
    .unwrap();
    let one = KaramataFunction::constant(1.0).unwrap();
    let one_inf = KaramataFunction::new(1.0, Perturbation::Zero, Orientation::AtPositiveInfinity).unwrap();
    vec![
        ("constant, index 1, from zero".into(), one, 1.0, Side::AtZero),
        ("constant, index -2, tail".into(), one_inf, -2.0, Side::AtInfinity),
        ("log factor, index 2, from zero".into(), zero_log.clone(), 2.0, Side::AtZero),
        ("log factor, index -2, toward zero".into(), zero_log, -2.0, Side::AtZero),
        ("inverse sqrt-log, index 0.5, from zero".into(), zero_neg, 0.5, Side::AtZero),
        ("log factor, index -2, tail".into(), inf_log, -2.0, Side::AtInfinity),
        ("inverse sqrt-log, index 1, growing".into(), inf_neg, 1.0, Side::AtInfinity),
        ("tabulated log factor, index 1.5, from zero".into(), table, 1.5, Side::AtZero),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_closed_form_matches_quadrature() {
        let s = [1e-6, 1e-3, 0.1, 1.0, 5.0];
        let y = [0.02, 0.1, -0.3, 0.4, 0.0];
        let l = KaramataFunction::new(
            1.5,
            Perturbation::Table(PerturbationTable::new(&s, &y).unwrap()),
            Orientation::AtZero,
        )
        .unwrap();
        for t in [1e-9, 1e-6, 3e-4, 0.05, 0.7, 1.0, 2.0, 40.0] {
            let (a, b) = (l.eval(t).unwrap(), l.eval_numeric(t).unwrap());
            assert!((a - b).abs() <= 1e-8 * b, "{t}: {a} vs {b}");
        }
    }

    #[test]
    fn zero_perturbation_is_constant() {
        let l = KaramataFunction::constant(2.0).unwrap();
        for t in [1e-8, 0.3, 1.0] {
            assert_eq!(l.eval(t).unwrap(), 2.0);
        }
    }

    #[test]
    fn constant_perturbation_closed_form_agrees_with_quadrature() {
        let l = KaramataFunction::new(1.0, Perturbation::Constant(0.1), Orientation::AtZero).unwrap();
        let a = l.eval(0.5).unwrap();
        let b = l.eval_numeric(0.5).unwrap();
        assert!((a - 1.071_773_462_536_293).abs() < 1e-12);
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn log_factor_value() {
        let l = KaramataFunction::new(1.0, Perturbation::LogFactor(1.0), Orientation::AtZero).unwrap();
        let t = (-1f64).exp();
        assert!((l.eval(t).unwrap() - 2.0).abs() < 1e-14);
        assert!((l.eval_numeric(t).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn negative_orientation_reflects() {
        let pos =
            KaramataFunction::new(1.0, Perturbation::LogFactor(0.7), Orientation::AtPositiveInfinity).unwrap();
        let neg =
            KaramataFunction::new(1.0, Perturbation::LogFactor(0.7), Orientation::AtNegativeInfinity).unwrap();
        assert_eq!(pos.eval(40.0).unwrap(), neg.eval(-40.0).unwrap());
        assert!(neg.eval(3.0).is_err());
    }

    #[test]
    fn domain_error_at_zero() {
        let l = KaramataFunction::constant(1.0).unwrap();
        assert!(matches!(l.eval(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn index_of_cube() {
        let e = rv_index_at_zero(&|t: f64| t * t * t, None, 0.5, 16).unwrap();
        assert!((e.value - 3.0).abs() < 1e-8);
    }

    #[test]
    fn slowly_varying_factor_does_not_shift_index() {
        let e = rv_index_at_zero(&|t: f64| t * t * (1.0 / t).ln(), None, 0.5, 24).unwrap();
        assert!((e.value - 2.0).abs() < 1e-6, "{e:?}");
    }

    #[test]
    fn rapid_variation_is_flagged() {
        assert!(rv_index_at_zero(&|t: f64| (1.0 / t).exp(), None, 0.5, 24).is_err());
    }

    #[test]
    fn integral_ratio_exact_cases() {
        let one = KaramataFunction::new(1.0, Perturbation::Zero, Orientation::AtPositiveInfinity).unwrap();
        for t in [2.0, 10.0, 1e3] {
            let r = asymptotic_integral_ratio(&one, -2.0, Side::AtInfinity, t).unwrap();
            assert!((r - 1.0).abs() < 1e-12);
        }
        let one0 = KaramataFunction::constant(1.0).unwrap();
        let r = asymptotic_integral_ratio(&one0, 1.0, Side::AtZero, 0.3).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_factor_integral_ratio_close_to_one() {
        let l = KaramataFunction::new(1.0, Perturbation::LogFactor(1.0), Orientation::AtZero).unwrap();
        let r3 = asymptotic_integral_ratio(&l, 2.0, Side::AtZero, 1e-3).unwrap();
        let r6 = asymptotic_integral_ratio(&l, 2.0, Side::AtZero, 1e-6).unwrap();
        assert!((r3 - 1.0).abs() < 0.05);
        assert!((r6 - 1.0).abs() < (r3 - 1.0).abs());
    }

    #[test]
    fn mismatched_side_rejected() {
        let l = KaramataFunction::constant(1.0).unwrap();
        assert!(asymptotic_integral_ratio(&l, -2.0, Side::AtInfinity, 10.0).is_err());
    }
}
