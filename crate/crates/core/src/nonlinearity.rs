//! Blow-up nonlinearities `f`, their antiderivatives, the index functions
//! `I` and `J`, their limit constants and the Keller–Osserman classification.

use std::fmt;

use crate::error::{Error, Result};
use crate::extrap::{self, Estimate};
use crate::karamata;
use crate::quad::{self, Decay};

const QUAD_TOL: f64 = 1e-13;

/// Whether `f` vanishes at the origin and lives on `[0, ∞)`, or is positive
/// on the whole line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignClass {
    /// `f(0) = 0`, `f > 0` and increasing on `(0, ∞)`; extended by zero.
    VanishingAtZero,
    /// `f > 0` and increasing on the whole real line.
    PositiveOnLine,
}

/// `f` sampled on a positive log-spaced grid with power-law tails.
#[derive(Clone, PartialEq)]
pub struct TabulatedF {
    log_t: Vec<f64>,
    log_f: Vec<f64>,
    slope: Vec<f64>,
    tail_plus: f64,
    tail_zero: f64,
    cum: Vec<f64>,
}

impl fmt::Debug for TabulatedF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "TabulatedF {{ points: {}, tail_plus: {}, tail_zero: {} }}",
            self.log_t.len(),
            self.tail_plus,
            self.tail_zero
        )
    }
}

impl TabulatedF {
    /// Builds a table from samples; `tail_plus` and `tail_zero` are the power
    /// exponents of `f` beyond the last and before the first sample.
    pub fn new(t: &[f64], f: &[f64], tail_plus: f64, tail_zero: f64) -> Result<Self> {
        let n = t.len();
        if n < 3 || f.len() != n {
            return Err(Error::Argument("table needs at least three (t, f) pairs".into()));
        }
        if t.iter().any(|&x| x <= 0.0) || t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Argument("table abscissae must be positive and increasing".into()));
        }
        if f.iter().any(|&x| !(x > 0.0 && x.is_finite())) || f.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Argument("table values must be positive and strictly increasing".into()));
        }
        if !(tail_plus > 0.0 && tail_zero > 0.0) {
            return Err(Error::Argument("tail exponents must be positive".into()));
        }
        let log_t: Vec<f64> = t.iter().map(|x| x.ln()).collect();
        let log_f: Vec<f64> = f.iter().map(|x| x.ln()).collect();
        let slope = pchip_slopes(&log_t, &log_f, tail_zero, tail_plus);
        let mut tab = TabulatedF { log_t, log_f, slope, tail_plus, tail_zero, cum: vec![] };
        let mut cum = Vec::with_capacity(n);
        let (t0, f0) = (t[0], f[0]);
        let mut acc = f0 * t0 / (tail_zero + 1.0);
        cum.push(acc);
        for i in 1..n {
            let piece = quad::integrate(
                |w: f64| {
                    let s = w.exp();
                    s * tab.value(s)
                },
                tab.log_t[i - 1],
                tab.log_t[i],
                QUAD_TOL,
            )?;
            acc += piece.value;
            cum.push(acc);
        }
        tab.cum = cum;
        Ok(tab)
    }

    /// Parses the plain-text table format: header lines `tail_exp_plus=` and
    /// `tail_exp_zero=`, comment lines starting with `#`, then `t f` pairs.
    pub fn parse(text: &str) -> Result<Self> {
        let mut tail_plus = None;
        let mut tail_zero = None;
        let (mut t, mut f) = (Vec::new(), Vec::new());
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some((key, val)) = line.split_once('=') {
                let v: f64 = val.trim().parse().map_err(|_| {
                    Error::Argument(format!("line {}: bad number in '{line}'", no + 1))
                })?;
                match key.trim() {
                    "tail_exp_plus" => tail_plus = Some(v),
                    "tail_exp_zero" => tail_zero = Some(v),
                    "tail_exp_minus" => {
                        return Err(Error::Argument(format!(
                            "line {}: tables on the whole line are not supported; sample f on (0, ∞)",
                            no + 1
                        )))
                    }
                    other => {
                        return Err(Error::Argument(format!("line {}: unknown header '{other}'", no + 1)))
                    }
                }
                continue;
            }
            let cols: Vec<&str> = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .collect();
            if cols.len() != 2 {
                return Err(Error::Argument(format!("line {}: expected two columns", no + 1)));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::Argument(format!("line {}: bad number '{s}'", no + 1)))
            };
            t.push(parse(cols[0])?);
            f.push(parse(cols[1])?);
        }
        let tail_plus =
            tail_plus.ok_or_else(|| Error::Argument("missing header tail_exp_plus=".into()))?;
        let tail_zero =
            tail_zero.ok_or_else(|| Error::Argument("missing header tail_exp_zero=".into()))?;
        Self::new(&t, &f, tail_plus, tail_zero)
    }

    /// `(ln f, d ln f / d ln t)` at `t > 0`.
    fn log_eval(&self, t: f64) -> (f64, f64) {
        let w = t.ln();
        let n = self.log_t.len();
        if w <= self.log_t[0] {
            return (self.log_f[0] + self.tail_zero * (w - self.log_t[0]), self.tail_zero);
        }
        if w >= self.log_t[n - 1] {
            return (self.log_f[n - 1] + self.tail_plus * (w - self.log_t[n - 1]), self.tail_plus);
        }
        let i = self.log_t.partition_point(|&x| x <= w).saturating_sub(1).min(n - 2);
        let h = self.log_t[i + 1] - self.log_t[i];
        let s = (w - self.log_t[i]) / h;
        let (y0, y1) = (self.log_f[i], self.log_f[i + 1]);
        let (m0, m1) = (self.slope[i], self.slope[i + 1]);
        let h00 = 2.0 * s * s * s - 3.0 * s * s + 1.0;
        let h10 = s * s * s - 2.0 * s * s + s;
        let h01 = -2.0 * s * s * s + 3.0 * s * s;
        let h11 = s * s * s - s * s;
        let y = h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1;
        let d00 = 6.0 * s * s - 6.0 * s;
        let d10 = 3.0 * s * s - 4.0 * s + 1.0;
        let d01 = -6.0 * s * s + 6.0 * s;
        let d11 = 3.0 * s * s - 2.0 * s;
        let dy = (d00 * y0 + d01 * y1) / h + d10 * m0 + d11 * m1;
        (y, dy)
    }

    fn value(&self, t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else {
            self.log_eval(t).0.exp()
        }
    }

    fn derivative(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let (y, dy) = self.log_eval(t);
        y.exp() * dy / t
    }

    fn antiderivative(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let n = self.log_t.len();
        let w = t.ln();
        if w <= self.log_t[0] {
            return self.value(t) * t / (self.tail_zero + 1.0);
        }
        let i = self.log_t.partition_point(|&x| x <= w).saturating_sub(1).min(n - 1);
        let piece = quad::integrate(
            |x: f64| {
                let s = x.exp();
                s * self.value(s)
            },
            self.log_t[i],
            w,
            QUAD_TOL,
        )
        .map(|q| q.value)
        .unwrap_or(f64::NAN);
        self.cum[i] + piece
    }
}

/// Fritsch–Carlson monotone slopes with prescribed end slopes.
fn pchip_slopes(x: &[f64], y: &[f64], left: f64, right: f64) -> Vec<f64> {
    let n = x.len();
    let d: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
    let mut m = vec![0.0; n];
    m[0] = left;
    m[n - 1] = right;
    for i in 1..n - 1 {
        if d[i - 1] * d[i] <= 0.0 {
            m[i] = 0.0;
        } else {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            let w1 = 2.0 * h1 + h0;
            let w2 = h1 + 2.0 * h0;
            m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
    m
}

/// The shipped nonlinearity families.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `f(t) = t^γ` on `[0, ∞)`.
    Power { gamma: f64 },
    /// `f(t) = e^t` on the whole line.
    Exponential,
    /// `f(t) = (1 − t)^γ` for `t ≤ 0` and `e^{-γt}` for `t > 0` with `γ < 0`:
    /// a `(−t)^γ` tail at `−∞` glued C¹ to exponential growth.
    NegativePowerTail { gamma: f64 },
    Tabulated(TabulatedF),
}

/// A nonlinearity together with the Hessian order its indices refer to.
#[derive(Debug, Clone, PartialEq)]
pub struct Nonlinearity {
    family: Family,
    k: usize,
}

/// Limit constants of the index functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitConstants {
    /// Limit of `I(t)` as `t → ∞`.
    pub c_plus: f64,
    /// Limit of `I(t)` as `t → 0⁺` (vanishing-at-zero class).
    pub c_zero: Option<f64>,
    /// Limit of `I(t)` as `t → −∞` (whole-line class).
    pub c_minus: Option<f64>,
    /// Limit of `J(t)` as `t → ∞`.
    pub e_plus: Option<f64>,
    /// Limit of `J(t)` as `t → 0⁺`.
    pub e_zero: Option<f64>,
    /// Limit of `J(t)` as `t → −∞`.
    pub e_minus: Option<f64>,
    /// `inf_{t>0} I(t)`.
    pub h_inf: f64,
    /// `sup_{t>0} I(t)`.
    pub h_sup: f64,
}

/// Keller–Osserman verdicts.
#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Satisfied,
    Violated,
    NotApplicable,
    Indeterminate(String),
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Satisfied | Verdict::NotApplicable)
    }
}

/// Which tail integral the Keller–Osserman test examines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KoOrder {
    /// `∫^∞ f^{-1/k} < ∞`.
    Inverse,
    /// `∫^∞ F^{-1/(k+1)} < ∞`.
    Energy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KoReport {
    pub tail: Verdict,
    pub near_zero_divergence: Verdict,
}

impl KoReport {
    pub fn holds(&self) -> bool {
        self.tail.holds() && self.near_zero_divergence.holds()
    }
}

/// Cross-check between the regular-variation index of `f` and the index
/// implied by `C_f^{+∞}`.
#[derive(Debug, Clone, PartialEq)]
pub enum IndexEquivalence {
    Consistent { c_plus: f64, implied: f64, measured: f64, discrepancy: f64 },
    /// `C_f^{+∞} = 1`: `f` grows faster than every power; `verified` records
    /// that `f(t)/t^10` increased without bound along the probe.
    RapidVariation { verified: bool, probe: Vec<f64> },
}

impl Nonlinearity {
    pub fn new(family: Family, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Argument("Hessian order must be at least 1".into()));
        }
        match &family {
            Family::Power { gamma } if !(*gamma > 0.0) => {
                return Err(Error::Argument(format!("power exponent {gamma} must be positive")))
            }
            Family::NegativePowerTail { gamma } if !(*gamma < 0.0) => {
                return Err(Error::Argument(format!("tail exponent {gamma} must be negative")))
            }
            _ => {}
        }
        Ok(Nonlinearity { family, k })
    }

    pub fn power(gamma: f64, k: usize) -> Result<Self> {
        Self::new(Family::Power { gamma }, k)
    }

    pub fn exponential(k: usize) -> Result<Self> {
        Self::new(Family::Exponential, k)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Same nonlinearity with indices taken against another order.
    pub fn with_order(&self, k: usize) -> Result<Self> {
        Self::new(self.family.clone(), k)
    }

    pub fn sign_class(&self) -> SignClass {
        match self.family {
            Family::Power { .. } | Family::Tabulated(_) => SignClass::VanishingAtZero,
            Family::Exponential | Family::NegativePowerTail { .. } => SignClass::PositiveOnLine,
        }
    }

    pub fn f(&self, t: f64) -> f64 {
        match &self.family {
            Family::Power { gamma } => {
                if t <= 0.0 {
                    0.0
                } else {
                    t.powf(*gamma)
                }
            }
            Family::Exponential => t.exp(),
            Family::NegativePowerTail { gamma } => {
                if t <= 0.0 {
                    (1.0 - t).powf(*gamma)
                } else {
                    (-gamma * t).exp()
                }
            }
            Family::Tabulated(tab) => tab.value(t),
        }
    }

    pub fn df(&self, t: f64) -> f64 {
        match &self.family {
            Family::Power { gamma } => {
                if t <= 0.0 {
                    0.0
                } else {
                    gamma * t.powf(gamma - 1.0)
                }
            }
            Family::Exponential => t.exp(),
            Family::NegativePowerTail { gamma } => {
                if t <= 0.0 {
                    -gamma * (1.0 - t).powf(gamma - 1.0)
                } else {
                    -gamma * (-gamma * t).exp()
                }
            }
            Family::Tabulated(tab) => tab.derivative(t),
        }
    }

    /// `F(t) = ∫_ς^t f` with `ς = 0` or `−∞` by sign class; `+∞` when the
    /// lower tail diverges.
    pub fn big_f(&self, t: f64) -> f64 {
        match &self.family {
            Family::Power { gamma } => {
                if t <= 0.0 {
                    0.0
                } else {
                    t.powf(gamma + 1.0) / (gamma + 1.0)
                }
            }
            Family::Exponential => t.exp(),
            Family::NegativePowerTail { gamma } => {
                if *gamma >= -1.0 {
                    return f64::INFINITY;
                }
                let at0 = 1.0 / (-gamma - 1.0);
                if t <= 0.0 {
                    (1.0 - t).powf(gamma + 1.0) / (-gamma - 1.0)
                } else {
                    at0 + (-gamma * t).exp_m1() / (-gamma)
                }
            }
            Family::Tabulated(tab) => tab.antiderivative(t),
        }
    }

    /// Lower end of the domain of `f` where the blow-up profile lives.
    pub fn lower_end(&self) -> f64 {
        match self.sign_class() {
            SignClass::VanishingAtZero => 0.0,
            SignClass::PositiveOnLine => f64::NEG_INFINITY,
        }
    }

    /// Power exponent of `f` at `+∞`, `None` for faster-than-power growth.
    pub fn growth_exponent(&self) -> Option<f64> {
        match &self.family {
            Family::Power { gamma } => Some(*gamma),
            Family::Tabulated(t) => Some(t.tail_plus),
            _ => None,
        }
    }

    /// Power exponent of `f` at `0⁺` for the vanishing class.
    pub fn zero_exponent(&self) -> Option<f64> {
        match &self.family {
            Family::Power { gamma } => Some(*gamma),
            Family::Tabulated(t) => Some(t.tail_zero),
            _ => None,
        }
    }

    /// Decay of `f^{-1/k}` at `+∞`.
    pub fn inverse_decay(&self) -> Decay {
        match self.growth_exponent() {
            Some(g) => Decay::Power(g / self.k as f64),
            None => Decay::Rapid,
        }
    }

    /// Decay of `((k+1)F)^{-1/(k+1)}` at `+∞`.
    pub fn energy_decay(&self) -> Decay {
        match self.growth_exponent() {
            Some(g) => Decay::Power((g + 1.0) / (self.k as f64 + 1.0)),
            None => Decay::Rapid,
        }
    }

    fn kf(&self) -> f64 {
        self.k as f64
    }

    /// `∫_t^∞ f^{-1/k}`.
    pub fn inverse_tail(&self, t: f64) -> Result<f64> {
        let k = self.kf();
        if let Decay::Power(q) = self.inverse_decay() {
            if q <= 1.0 {
                return Err(Error::KellerOsserman(format!(
                    "∫^∞ f^(-1/{k}) diverges (tail exponent {q})"
                )));
            }
        }
        if self.sign_class() == SignClass::VanishingAtZero && t <= 0.0 {
            return Err(Error::Domain(format!("t = {t} must be positive for this family")));
        }
        let q = quad::integrate_tail(|s| self.f(s).powf(-1.0 / k), t, self.inverse_decay(), QUAD_TOL)?;
        Ok(q.value)
    }

    /// `∫_t^∞ ((k+1)F)^{-1/(k+1)}`.
    pub fn energy_tail(&self, t: f64) -> Result<f64> {
        let k1 = self.kf() + 1.0;
        if let Decay::Power(q) = self.energy_decay() {
            if q <= 1.0 {
                return Err(Error::KellerOsserman(format!(
                    "∫^∞ F^(-1/{k1}) diverges (tail exponent {q})"
                )));
            }
        }
        if self.sign_class() == SignClass::VanishingAtZero && t <= 0.0 {
            return Err(Error::Domain(format!("t = {t} must be positive for this family")));
        }
        if !self.big_f(t).is_finite() {
            return Err(Error::KellerOsserman("antiderivative from −∞ diverges".into()));
        }
        let q = quad::integrate_tail(
            |s| (k1 * self.big_f(s)).powf(-1.0 / k1),
            t,
            self.energy_decay(),
            QUAD_TOL,
        )?;
        Ok(q.value)
    }

    /// `I(t) = (f^{1/k})′(t) · ∫_t^∞ f^{-1/k}`.
    pub fn index_i(&self, t: f64) -> Result<f64> {
        let k = self.kf();
        let f = self.f(t);
        let d = f.powf(1.0 / k - 1.0) * self.df(t) / k;
        Ok(d * self.inverse_tail(t)?)
    }

    /// `J(t) = (F^{1/(k+1)})′(t) · ∫_t^∞ F^{-1/(k+1)}`.
    pub fn index_j(&self, t: f64) -> Result<f64> {
        let k1 = self.kf() + 1.0;
        let big = self.big_f(t);
        let d = big.powf(1.0 / k1 - 1.0) * self.f(t) / k1;
        // The energy tail carries the factor (k+1)^{-1/(k+1)}; undo it.
        Ok(d * self.energy_tail(t)? * k1.powf(1.0 / k1))
    }

    /// Closed-form limit constants for the built-in families, numerical
    /// extrapolation otherwise.
    pub fn limit_constants(&self) -> Result<LimitConstants> {
        let k = self.kf();
        let c = match &self.family {
            Family::Power { gamma } => {
                let g = *gamma;
                if g <= k {
                    return Err(Error::KellerOsserman(format!("γ = {g} must exceed k = {k}")));
                }
                let ci = g / (g - k);
                let ej = (g + 1.0) / (g - k);
                LimitConstants {
                    c_plus: ci,
                    c_zero: Some(ci),
                    c_minus: None,
                    e_plus: Some(ej),
                    e_zero: Some(ej),
                    e_minus: None,
                    h_inf: ci,
                    h_sup: ci,
                }
            }
            Family::Exponential => LimitConstants {
                c_plus: 1.0,
                c_zero: None,
                c_minus: Some(1.0),
                e_plus: Some(1.0),
                e_zero: None,
                e_minus: Some(1.0),
                h_inf: 1.0,
                h_sup: 1.0,
            },
            Family::NegativePowerTail { gamma } => {
                let g = *gamma;
                let (h_inf, h_sup) = self.index_range(1.0, None)?;
                LimitConstants {
                    c_plus: 1.0,
                    c_zero: None,
                    c_minus: Some(g / (g - k)),
                    e_plus: Some(1.0),
                    e_zero: None,
                    e_minus: if g < -1.0 { Some((g + 1.0) / (g - k)) } else { None },
                    h_inf,
                    h_sup,
                }
            }
            Family::Tabulated(_) => self.extrapolated_constants()?,
        };
        if !(c.h_inf > 0.0) {
            return Err(Error::Assumption(format!(
                "inf of the index function is {} but must be positive",
                c.h_inf
            )));
        }
        Ok(c)
    }

    /// Index values along `ts`; failures after the first point, from
    /// underflow or overflow far out, become NaN and cut the sequence.
    fn index_sequence(&self, ts: &[f64], index: fn(&Self, f64) -> Result<f64>) -> Result<Vec<f64>> {
        let first = index(self, ts[0])?;
        Ok(std::iter::once(first).chain(ts[1..].iter().map(|&t| index(self, t).unwrap_or(f64::NAN))).collect())
    }

    fn extrapolate(&self, mut seq: Vec<f64>) -> Result<Estimate> {
        // Rapidly growing families overflow far out; keep the finite prefix.
        if let Some(cut) = seq.iter().position(|v| !v.is_finite()) {
            if cut >= 5 {
                seq.truncate(cut);
            }
        }
        extrap::limit(&seq, 1e-6, 1.0)
    }

    /// Limit constants obtained by extrapolating `I` and `J` along geometric
    /// sequences toward each end, whatever the family.
    pub fn extrapolated_constants(&self) -> Result<LimitConstants> {
        let up: Vec<f64> = (0..16).map(|j| 2f64.powi(j)).collect();
        let down: Vec<f64> = (0..16).map(|j| 0.5f64.powi(j)).collect();
        let neg: Vec<f64> = up.iter().map(|t| -t).collect();
        let i_seq = |ts: &[f64]| self.index_sequence(ts, Self::index_i);
        let j_limit = |ts: &[f64]| {
            self.index_sequence(ts, Self::index_j).ok().and_then(|s| self.extrapolate(s).ok()).map(|e| e.value)
        };
        let c_plus = self.extrapolate(i_seq(&up)?)?.value;
        let e_plus = j_limit(&up);
        let (c_zero, c_minus, e_zero, e_minus) = match self.sign_class() {
            SignClass::VanishingAtZero => {
                let cz = self
                    .extrapolate(i_seq(&down)?)
                    .map_err(|e| match e {
                        Error::Estimation { message, sequence } => Error::Estimation {
                            message: format!("limit of I at zero is not finite: {message}"),
                            sequence,
                        },
                        other => other,
                    })?
                    .value;
                (Some(cz), None, j_limit(&down), None)
            }
            SignClass::PositiveOnLine => {
                let cm = self.extrapolate(i_seq(&neg)?)?.value;
                (None, Some(cm), None, j_limit(&neg))
            }
        };
        let (h_inf, h_sup) = self.index_range(c_plus, c_zero)?;
        Ok(LimitConstants { c_plus, c_zero, c_minus, e_plus, e_zero, e_minus, h_inf, h_sup })
    }

    /// Inf and sup of `I` over `t > 0`: 64 points per decade on
    /// `[1e-4, 1e4]` plus the end limits.
    pub fn index_range(&self, c_plus: f64, c_zero: Option<f64>) -> Result<(f64, f64)> {
        let mut lo = c_plus;
        let mut hi = c_plus;
        if let Some(cz) = c_zero {
            lo = lo.min(cz);
            hi = hi.max(cz);
        } else {
            let i0 = self.index_i(0.0)?;
            lo = lo.min(i0);
            hi = hi.max(i0);
        }
        for j in 0..=512 {
            let t = 10f64.powf(-4.0 + j as f64 / 64.0);
            let v = self.index_i(t)?;
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Ok((lo, hi))
    }

    /// Keller–Osserman tail condition for the chosen order and the divergence
    /// of `∫_0^1 F^{-1/(k+1)}` near zero.
    pub fn keller_osserman(&self, order: KoOrder) -> KoReport {
        let k = self.kf();
        let tail = match (order, self.growth_exponent()) {
            (KoOrder::Inverse, Some(g)) => {
                if g > k {
                    Verdict::Satisfied
                } else {
                    Verdict::Violated
                }
            }
            (KoOrder::Energy, Some(g)) => {
                if (g + 1.0) / (k + 1.0) > 1.0 {
                    Verdict::Satisfied
                } else {
                    Verdict::Violated
                }
            }
            (_, None) => {
                let probe = match order {
                    KoOrder::Inverse => self.inverse_tail(1.0),
                    KoOrder::Energy => self.energy_tail(1.0),
                };
                match probe {
                    Ok(v) if v.is_finite() => Verdict::Satisfied,
                    Ok(_) => Verdict::Violated,
                    Err(e) => Verdict::Indeterminate(e.to_string()),
                }
            }
        };
        let near_zero_divergence = match (self.sign_class(), self.zero_exponent()) {
            (SignClass::PositiveOnLine, _) => Verdict::NotApplicable,
            (_, Some(g)) => {
                if (g + 1.0) / (k + 1.0) >= 1.0 {
                    Verdict::Satisfied
                } else {
                    Verdict::Violated
                }
            }
            (_, None) => Verdict::Indeterminate("no exponent at zero".into()),
        };
        KoReport { tail, near_zero_divergence }
    }

    /// Compares the regular-variation index of `f` at infinity with
    /// `k·C/(C−1)`.
    pub fn index_equivalence_check(&self) -> Result<IndexEquivalence> {
        let c = self.limit_constants()?.c_plus;
        if c < 1.0 - 1e-9 {
            return Err(Error::Assumption(format!("C_f at infinity = {c} is below 1")));
        }
        if (c - 1.0).abs() <= 1e-9 {
            let probe: Vec<f64> = [50.0, 100.0, 200.0, 400.0]
                .iter()
                .map(|&t: &f64| {
                    self.f(t).ln() - 10.0 * t.ln()
                })
                .collect();
            let verified = probe.windows(2).all(|w| w[1] > w[0]) && *probe.last().unwrap() > 50.0;
            return Ok(IndexEquivalence::RapidVariation { verified, probe });
        }
        let implied = self.kf() * c / (c - 1.0);
        let g = |s: f64| self.f(1.0 / s);
        let dg = |s: f64| -self.df(1.0 / s) / (s * s);
        let t0 = match &self.family {
            Family::Tabulated(tab) => (-tab.log_t[tab.log_t.len() - 1]).exp().min(1.0),
            _ => 1e-2,
        };
        let measured = -karamata::rv_index_at_zero(&g, Some(&dg), t0, 20)?.value;
        Ok(IndexEquivalence::Consistent {
            c_plus: c,
            implied,
            measured,
            discrepancy: (measured - implied).abs(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn power_index_is_constant() {
        let f = Nonlinearity::power(3.0, 2).unwrap();
        for t in [1e-3, 0.5, 1.0, 7.0, 1e4] {
            assert!(rel(f.index_i(t).unwrap(), 3.0) < 1e-12, "t={t}");
        }
    }

    #[test]
    fn exponential_index_is_one() {
        let f = Nonlinearity::exponential(1).unwrap();
        for t in [-20.0, -1.0, 0.0, 3.0] {
            assert!(rel(f.index_i(t).unwrap(), 1.0) < 1e-12, "t={t}");
        }
    }

    #[test]
    fn square_at_one() {
        let f = Nonlinearity::power(2.0, 1).unwrap();
        assert!(rel(f.index_i(1.0).unwrap(), 2.0) < 1e-12);
    }

    #[test]
    fn energy_index_cube() {
        let f = Nonlinearity::power(3.0, 1).unwrap();
        assert!(rel(f.index_j(1.0).unwrap(), 2.0) < 1e-12);
        let g = Nonlinearity::power(4.0, 2).unwrap();
        assert!(rel(g.index_j(1e-6).unwrap(), 2.5) < 1e-10);
    }

    #[test]
    fn exponential_energy_index_at_minus_infinity() {
        let f = Nonlinearity::exponential(2).unwrap();
        assert!(rel(f.index_j(-30.0).unwrap(), 1.0) < 1e-10);
    }

    #[test]
    fn closed_form_constants() {
        let c = Nonlinearity::power(3.0, 2).unwrap().limit_constants().unwrap();
        assert_eq!((c.c_plus, c.c_zero, c.h_inf, c.h_sup), (3.0, Some(3.0), 3.0, 3.0));
        let e = Nonlinearity::exponential(1).unwrap().limit_constants().unwrap();
        assert_eq!((e.c_plus, e.c_minus), (1.0, Some(1.0)));
        let n = Nonlinearity::new(Family::NegativePowerTail { gamma: -2.0 }, 1)
            .unwrap()
            .limit_constants()
            .unwrap();
        assert!(rel(n.c_minus.unwrap(), 2.0 / 3.0) < 1e-15);
    }

    #[test]
    fn negative_tail_extrapolates_to_closed_form() {
        let f = Nonlinearity::new(Family::NegativePowerTail { gamma: -2.0 }, 1).unwrap();
        let c = f.extrapolated_constants().unwrap();
        assert!((c.c_minus.unwrap() - 2.0 / 3.0).abs() < 1e-3, "{c:?}");
        assert!((c.c_plus - 1.0).abs() < 1e-6);
        assert!(c.c_minus.unwrap() <= 1.0);
    }

    #[test]
    fn keller_osserman_classification() {
        let r = Nonlinearity::power(3.0, 2).unwrap().keller_osserman(KoOrder::Energy);
        assert_eq!(r.tail, Verdict::Satisfied);
        assert_eq!(r.near_zero_divergence, Verdict::Satisfied);
        let lin = Nonlinearity::power(1.0, 1).unwrap().keller_osserman(KoOrder::Energy);
        assert_eq!(lin.tail, Verdict::Violated);
        for k in 1..=4 {
            let e = Nonlinearity::exponential(k).unwrap().keller_osserman(KoOrder::Energy);
            assert!(e.holds());
        }
    }

    #[test]
    fn divergent_tail_raises() {
        let f = Nonlinearity::power(1.0, 1).unwrap();
        assert!(matches!(f.index_i(1.0), Err(Error::KellerOsserman(_))));
        assert!(matches!(f.index_j(1.0), Err(Error::KellerOsserman(_))));
    }

    #[test]
    fn equivalence_power_and_rapid() {
        match Nonlinearity::power(3.0, 2).unwrap().index_equivalence_check().unwrap() {
            IndexEquivalence::Consistent { implied, measured, .. } => {
                assert!((implied - 3.0).abs() < 1e-12);
                assert!((measured - 3.0).abs() < 1e-6);
            }
            other => panic!("{other:?}"),
        }
        match Nonlinearity::exponential(1).unwrap().index_equivalence_check().unwrap() {
            IndexEquivalence::RapidVariation { verified, .. } => assert!(verified),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let fams = vec![
            Nonlinearity::power(3.5, 2).unwrap(),
            Nonlinearity::exponential(1).unwrap(),
            Nonlinearity::new(Family::NegativePowerTail { gamma: -2.0 }, 1).unwrap(),
        ];
        for f in fams {
            for t in [0.3, 1.7, 12.0] {
                let fd = karamata::derivative(&|s| f.f(s), t);
                assert!(rel(f.df(t), fd) < 1e-6, "{f:?} t={t}");
            }
        }
    }

    #[test]
    fn table_round_trip() {
        let t: Vec<f64> = (0..=80).map(|i| 10f64.powf(-2.0 + 0.05 * i as f64)).collect();
        let f: Vec<f64> = t.iter().map(|x| x.powi(3)).collect();
        let mut text = String::from("# cube\ntail_exp_plus=3\ntail_exp_zero = 3\n");
        for (a, b) in t.iter().zip(&f) {
            text.push_str(&format!("{a:.17e} {b:.17e}\n"));
        }
        let tab = TabulatedF::parse(&text).unwrap();
        let nl = Nonlinearity::new(Family::Tabulated(tab), 1).unwrap();
        for x in [1e-3, 0.37, 5.0, 1e3] {
            assert!(rel(nl.f(x), x.powi(3)) < 1e-10, "x={x}");
            assert!(rel(nl.big_f(x), x.powi(4) / 4.0) < 1e-9, "x={x}");
        }
    }

    #[test]
    fn table_parse_errors_are_line_numbered() {
        let err = TabulatedF::parse("tail_exp_plus=3\ntail_exp_zero=3\n1 2 3\n").unwrap_err();
        assert!(err.to_string().contains("line 3"));
    }
}
