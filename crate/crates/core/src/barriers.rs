//! Explicit sub- and supersolutions on balls: the weight classes, the
//! coefficient functions `ω`, the scaling constants and `τ` solves, pointwise
//! verification of the barrier inequalities, and the boundary-rate constants.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::extrap::{self, Estimate};
use crate::geometry::{self, BallDomain, DefiningFunction};
use crate::karamata::{self, KaramataFunction};
use crate::nonlinearity::LimitConstants;
use crate::quad::{self, Decay};
use crate::radial_solver::BallProblem;
use crate::symfun::{self, binom};
use crate::transforms::{PhiTransform, PsiTransform};

const QUAD_TOL: f64 = 1e-12;
const TAU_TOL: f64 = 1e-10;
const MARGIN_TOL: f64 = 1e-9;

/// Boundary weight profile `θ(t) = c·t^p` with `p ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaFunction {
    c: f64,
    p: f64,
}

impl ThetaFunction {
    pub fn new(c: f64, p: f64) -> Result<Self> {
        if !(c > 0.0 && p >= 0.0 && c.is_finite() && p.is_finite()) {
            return Err(Error::Argument(format!("θ = {c}·t^{p} needs c > 0 and p ≥ 0")));
        }
        Ok(ThetaFunction { c, p })
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::new(c, 0.0)
    }

    pub fn theta(&self, t: f64) -> f64 {
        self.c * t.powf(self.p)
    }

    /// `Θ(t) = ∫_0^t θ(s) ds` by quadrature.
    pub fn big_theta(&self, t: f64) -> Result<f64> {
        if t <= 0.0 {
            return Err(Error::Domain(format!("Θ needs t > 0, got {t}")));
        }
        Ok(quad::integrate_from_zero(|s| self.theta(s), t, self.p, 1e-14)?.value)
    }

    /// `D_θ = lim_{t→0⁺} d/dt (Θ/θ)`, extrapolated along `t = 2^{-j}`.
    pub fn d_theta(&self) -> Result<Estimate> {
        let ratio = |t: f64| self.big_theta(t).map(|v| v / self.theta(t)).unwrap_or(f64::NAN);
        let seq: Vec<f64> = (1..=12)
            .map(|j| karamata::derivative(&ratio, 0.5f64.powi(j)))
            .collect();
        extrap::limit(&seq, 1e-6, 1.0)
    }
}

/// The four weight classes: a model profile in `v` or `d` that `b` is
/// sandwiched against.
#[derive(Debug, Clone)]
pub enum WeightForm {
    /// `v^λ`.
    Power { lambda: f64 },
    /// `v^{-k-1} (−ln v)^{-kμ}`.
    LogCritical { mu: f64 },
    /// `v^λ L̃(v)^k` with `L̃` slowly varying at zero.
    Karamata { lambda: f64, l: KaramataFunction },
    /// `θ(d)^{k+1}`.
    BoundaryRate { theta: ThetaFunction },
}

/// `b(x) = model(x)·(b₁ + (b₂ − b₁)|x|²/R²)`, so `b₁·model ≤ b ≤ b₂·model`.
#[derive(Debug, Clone)]
pub struct WeightDescriptor {
    pub form: WeightForm,
    pub b1: f64,
    pub b2: f64,
}

impl WeightDescriptor {
    pub fn new(form: WeightForm, b1: f64, b2: f64) -> Result<Self> {
        if !(b1 > 0.0 && b2 >= b1 && b2.is_finite()) {
            return Err(Error::Argument(format!("weight bounds need 0 < b1 ≤ b2, got {b1}, {b2}")));
        }
        Ok(WeightDescriptor { form, b1, b2 })
    }

    pub fn constant(form: WeightForm, b: f64) -> Result<Self> {
        Self::new(form, b, b)
    }

    /// `b ≡ 0`, a degenerate weight for sanity checks.
    pub fn zero() -> Self {
        WeightDescriptor { form: WeightForm::Power { lambda: 0.0 }, b1: 0.0, b2: 0.0 }
    }

    /// The model profile at defining-function value `v` and distance `d`.
    pub fn model(&self, k: usize, v: f64, d: f64) -> f64 {
        let kf = k as f64;
        match &self.form {
            WeightForm::Power { lambda } => v.powf(*lambda),
            WeightForm::LogCritical { mu } => v.powf(-kf - 1.0) * (-v.ln()).powf(-kf * mu),
            WeightForm::Karamata { lambda, l } => {
                v.powf(*lambda) * l.eval(v).unwrap_or(f64::NAN).powi(k as i32)
            }
            WeightForm::BoundaryRate { theta } => theta.theta(d).powf(kf + 1.0),
        }
    }

    pub fn modulation(&self, r: f64, radius: f64) -> f64 {
        let s = (r / radius).powi(2);
        self.b1 + (self.b2 - self.b1) * s
    }

    pub fn eval(&self, dom: &BallDomain, dfn: &DefiningFunction, r: f64) -> f64 {
        self.eval_at_distance(dom, dfn, dom.radius() - r)
    }

    /// `b` at distance `d` from the boundary, exact for tiny `d`.
    pub fn eval_at_distance(&self, dom: &BallDomain, dfn: &DefiningFunction, d: f64) -> f64 {
        let v = dfn.v_of_distance(d);
        self.model(dom.k(), v, d) * self.modulation(dom.radius() - d, dom.radius())
    }

    /// A power-weight descriptor `v^λ` whose bounds sandwich this weight;
    /// `θ(d) = c·d^p` becomes `λ = p(k+1)` through `R c_v d ≤ v ≤ 2R c_v d`.
    pub fn power_equivalent(&self, dom: &BallDomain, dfn: &DefiningFunction) -> Option<Self> {
        match &self.form {
            WeightForm::Power { .. } => Some(self.clone()),
            WeightForm::BoundaryRate { theta } => {
                let k = dom.k() as f64;
                let lambda = theta.p * (k + 1.0);
                let scale = theta.c.powf(k + 1.0);
                let rc = dom.radius() * dfn.coefficient();
                Some(WeightDescriptor {
                    form: WeightForm::Power { lambda },
                    b1: self.b1 * scale * (2.0 * rc).powf(-lambda),
                    b2: self.b2 * scale * rc.powf(-lambda),
                })
            }
            _ => None,
        }
    }

    /// True when `b₁·model ≤ b ≤ b₂·model` at `n` radii.
    pub fn check_sandwich(&self, dom: &BallDomain, dfn: &DefiningFunction, n: usize) -> bool {
        (0..n).all(|i| {
            let r = dom.radius() * i as f64 / n as f64;
            let d = dom.radius() - r;
            let m = self.model(dom.k(), dfn.v_of_distance(d), d);
            let b = self.eval(dom, dfn, r);
            let tol = 1e-14 * b.abs();
            b >= self.b1 * m - tol && b <= self.b2 * m + tol
        })
    }
}

/// The barrier constructions, named by their outer profile and weight class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BarrierKind {
    /// `m·v^{-α}` for power `f` and power weights.
    PowerScaling,
    /// `m − (λ+k+1) ln v` for exponential `f` and power weights.
    LogShift,
    /// `ψ(τ v^η/η)` for power weights.
    PsiPowerWeight,
    /// `ψ(τ (−ln v)^{1−μ}/(μ−1))` for log-critical weights.
    PsiLogWeight,
    /// `ψ(τ ∫_0^v s^{(1+λ)/k} L̃(s) ds)` for Karamata weights.
    PsiKaramataWeight,
    /// `φ(τ (∫_0^v s^{(1+λ)/k} L̃(s) ds)^{k/(k+1)})` for Karamata weights.
    PhiKaramataWeight,
}

impl BarrierKind {
    pub const ALL: [BarrierKind; 6] = [
        BarrierKind::PowerScaling,
        BarrierKind::LogShift,
        BarrierKind::PsiPowerWeight,
        BarrierKind::PsiLogWeight,
        BarrierKind::PsiKaramataWeight,
        BarrierKind::PhiKaramataWeight,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BarrierKind::PowerScaling => "power-scaling",
            BarrierKind::LogShift => "log-shift",
            BarrierKind::PsiPowerWeight => "psi-power-weight",
            BarrierKind::PsiLogWeight => "psi-log-weight",
            BarrierKind::PsiKaramataWeight => "psi-karamata-weight",
            BarrierKind::PhiKaramataWeight => "phi-karamata-weight",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Argument(format!("unknown barrier kind '{s}'")))
    }

    /// Power of `τ` (or of the scale) multiplying the extremum of `ω`.
    pub fn tau_power(self, k: usize) -> usize {
        match self {
            BarrierKind::PhiKaramataWeight => k + 1,
            _ => k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Sub,
    Super,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremum {
    Max,
    Min,
}

/// Inner function `g₀(v)` of a transform barrier.
#[derive(Debug, Clone)]
enum Inner {
    Power { eta: f64 },
    Log { mu: f64 },
    Karamata { a: f64, l: KaramataFunction, kappa: f64, edge_decay: Option<f64> },
}

/// `g₀`, `g₀′`, `ρ₁ = v g₀′/g₀` and `ρ₂ = v g₀″/g₀′` at one `v`.
#[derive(Debug, Clone, Copy)]
struct InnerData {
    g0: f64,
    g0p: f64,
    rho1: f64,
    rho2: f64,
}

impl Inner {
    fn karamata_integral(&self, v: f64) -> Result<(f64, f64)> {
        let Inner::Karamata { a, l, edge_decay, .. } = self else { unreachable!() };
        let lv = l.eval(v)?;
        let j = v.powf(*a) * lv;
        let j0 = match edge_decay {
            None => {
                let g = |s: f64| s.powf(*a) * l.eval(s).unwrap_or(f64::NAN);
                quad::integrate_from_zero(g, v, *a, QUAD_TOL)?.value
            }
            Some(q) => {
                let g = |w: f64| l.eval((-w).exp()).unwrap_or(f64::NAN);
                quad::integrate_tail(g, -v.ln(), Decay::Power(*q), QUAD_TOL)?.value
            }
        };
        Ok((j0, j))
    }

    fn at(&self, v: f64) -> Result<InnerData> {
        Ok(match self {
            Inner::Power { eta } => InnerData {
                g0: v.powf(*eta) / eta,
                g0p: v.powf(eta - 1.0),
                rho1: *eta,
                rho2: eta - 1.0,
            },
            Inner::Log { mu } => {
                let w = -v.ln();
                InnerData {
                    g0: w.powf(1.0 - mu) / (mu - 1.0),
                    g0p: w.powf(-mu) / v,
                    rho1: (mu - 1.0) / w,
                    rho2: mu / w - 1.0,
                }
            }
            Inner::Karamata { a, l, kappa, .. } => {
                let (j0, j) = self.karamata_integral(v)?;
                let q = v * j / j0;
                let ld = l.log_derivative(v)?;
                InnerData {
                    g0: j0.powf(*kappa),
                    g0p: kappa * j0.powf(kappa - 1.0) * j,
                    rho1: kappa * q,
                    rho2: (kappa - 1.0) * q + a + ld,
                }
            }
        })
    }

    /// `(ρ₁, ρ₂)` as `v → 0⁺`.
    fn boundary_rhos(&self) -> (f64, f64) {
        match self {
            Inner::Power { eta } => (*eta, eta - 1.0),
            Inner::Log { .. } => (0.0, -1.0),
            Inner::Karamata { a, kappa, .. } => (kappa * (a + 1.0), (kappa - 1.0) * (a + 1.0) + a),
        }
    }
}

/// Outer profile and its scale constant.
#[derive(Clone)]
enum Outer {
    Power { alpha: f64 },
    Log { beta: f64 },
    Psi(Arc<PsiTransform>),
    Phi(Arc<PhiTransform>),
}

impl fmt::Debug for Outer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outer::Power { alpha } => write!(f, "Power {{ alpha: {alpha} }}"),
            Outer::Log { beta } => write!(f, "Log {{ beta: {beta} }}"),
            Outer::Psi(t) => write!(f, "Psi {{ closed_form: {} }}", t.is_closed_form()),
            Outer::Phi(t) => write!(f, "Phi {{ closed_form: {} }}", t.is_closed_form()),
        }
    }
}

/// τ-independent geometric data at one radius.
#[derive(Debug, Clone, Copy)]
struct PointData {
    r: f64,
    /// `v·(−1)^k S_k(D²v)`.
    va: f64,
    /// `(−1)^{k+1}` times the adjugate form of `∇v`.
    g: f64,
    inner: Option<InnerData>,
    boundary: bool,
}

/// Everything needed to evaluate `ω` for one barrier kind and problem.
#[derive(Debug, Clone)]
pub struct OmegaContext {
    kind: BarrierKind,
    problem: BallProblem,
    outer: Outer,
    inner: Option<Inner>,
    limits: LimitConstants,
    grid: Vec<PointData>,
    notes: Vec<String>,
}

fn chebyshev_radii(n: usize, radius: f64) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 * radius * (1.0 - (std::f64::consts::PI * i as f64 / n as f64).cos()))
        .collect()
}

fn hypothesis(msg: String) -> Error {
    Error::Assumption(msg)
}

impl OmegaContext {
    /// Checks the hypotheses of `kind` against `problem` and prepares the
    /// transforms and the radial grid of `grid` Chebyshev points.
    pub fn new(kind: BarrierKind, problem: &BallProblem, grid: usize) -> Result<Self> {
        let mut problem = problem.clone();
        let k = problem.dom.k();
        let kf = k as f64;
        let mut notes = Vec::new();
        let f = &problem.f;
        let limits = match kind {
            BarrierKind::PowerScaling | BarrierKind::LogShift => None,
            _ => Some(f.limit_constants()?),
        };
        let power_lambda = |w: &WeightDescriptor| -> Result<f64> {
            match &w.form {
                WeightForm::Power { lambda } => Ok(*lambda),
                other => Err(hypothesis(format!(
                    "{} needs a power weight v^λ, got {other:?}",
                    kind.name()
                ))),
            }
        };
        let (outer, inner) = match kind {
            BarrierKind::PowerScaling => {
                let lambda = power_lambda(&problem.weight)?;
                let Some(gamma) = (match f.family() {
                    crate::nonlinearity::Family::Power { gamma } => Some(*gamma),
                    _ => None,
                }) else {
                    return Err(hypothesis("power scaling needs f = t^γ".into()));
                };
                if gamma <= kf {
                    return Err(hypothesis(format!("γ = {gamma} must exceed k = {k}")));
                }
                if lambda <= -kf - 1.0 {
                    return Err(hypothesis(format!("λ = {lambda} must exceed −k−1 = {}", -kf - 1.0)));
                }
                (Outer::Power { alpha: (kf + 1.0 + lambda) / (gamma - kf) }, None)
            }
            BarrierKind::LogShift => {
                let lambda = power_lambda(&problem.weight)?;
                if !matches!(f.family(), crate::nonlinearity::Family::Exponential) {
                    return Err(hypothesis("log shift needs f = e^t".into()));
                }
                if lambda <= -kf - 1.0 {
                    return Err(hypothesis(format!("λ = {lambda} must exceed −k−1 = {}", -kf - 1.0)));
                }
                (Outer::Log { beta: lambda + kf + 1.0 }, None)
            }
            BarrierKind::PsiPowerWeight => {
                let lambda = power_lambda(&problem.weight)?;
                if lambda <= -kf - 1.0 {
                    return Err(hypothesis(format!("λ = {lambda} must exceed −k−1 = {}", -kf - 1.0)));
                }
                let eta = (kf + 1.0 + lambda) / kf;
                let h0 = limits.unwrap().h_inf;
                if (h0 - 1.0) * eta + 1.0 <= 0.0 {
                    return Err(hypothesis(format!(
                        "(h₀ − 1)η + 1 = {} must be positive",
                        (h0 - 1.0) * eta + 1.0
                    )));
                }
                (Outer::Psi(Arc::new(PsiTransform::new(f)?)), Some(Inner::Power { eta }))
            }
            BarrierKind::PsiLogWeight => {
                let mu = match &problem.weight.form {
                    WeightForm::LogCritical { mu } => *mu,
                    other => {
                        return Err(hypothesis(format!(
                            "psi-log-weight needs a log-critical weight, got {other:?}"
                        )))
                    }
                };
                if mu <= 1.0 {
                    return Err(hypothesis(format!("μ = {mu} must exceed 1")));
                }
                let bound = (-mu).exp();
                if problem.dfn.max_value() >= bound {
                    problem.dfn = problem.dfn.capped(0.5 * bound);
                    notes.push(format!(
                        "defining-function coefficient lowered to {:e} so that max v < e^(-μ)",
                        problem.dfn.coefficient()
                    ));
                }
                (Outer::Psi(Arc::new(PsiTransform::new(f)?)), Some(Inner::Log { mu }))
            }
            BarrierKind::PsiKaramataWeight | BarrierKind::PhiKaramataWeight => {
                let (lambda, l) = match &problem.weight.form {
                    WeightForm::Karamata { lambda, l } => (*lambda, l.clone()),
                    WeightForm::Power { lambda } => (*lambda, KaramataFunction::constant(1.0)?),
                    other => {
                        return Err(hypothesis(format!(
                            "{} needs a Karamata weight, got {other:?}",
                            kind.name()
                        )))
                    }
                };
                if l.orientation() != karamata::Orientation::AtZero || !l.is_slowly_varying() {
                    return Err(hypothesis("L̃ must be slowly varying at zero".into()));
                }
                let a = (1.0 + lambda) / kf;
                let mut edge_decay = None;
                if lambda < -kf - 1.0 {
                    return Err(hypothesis(format!("λ = {lambda} is below −k−1 = {}", -kf - 1.0)));
                }
                if lambda == -kf - 1.0 {
                    // ∫_0^1 L̃(s)/s ds < ∞ is needed; L̃(e^{-w}) ~ w^{-q}.
                    let w = 1e3f64;
                    let q = -w * l.y_at((-w).exp())?;
                    if q <= 1.0 {
                        return Err(hypothesis(format!(
                            "∫_0^1 L̃(s)/s ds diverges (decay exponent {q})"
                        )));
                    }
                    edge_decay = Some(q);
                }
                let h0 = limits.unwrap().h_inf;
                let outer = if kind == BarrierKind::PsiKaramataWeight {
                    let cond = kf * h0 + (1.0 + lambda) * (h0 - 1.0);
                    if cond <= 0.0 {
                        return Err(hypothesis(format!(
                            "k·h₀ + (1+λ)(h₀−1) = {cond} must be positive"
                        )));
                    }
                    Outer::Psi(Arc::new(PsiTransform::new(f)?))
                } else {
                    if !(lambda > -kf - 1.0 && lambda < 0.0) {
                        return Err(hypothesis(format!("λ = {lambda} must lie in (−k−1, 0)")));
                    }
                    if limits.unwrap().e_plus.is_none() {
                        return Err(hypothesis("the energy index has no finite limit at infinity".into()));
                    }
                    Outer::Phi(Arc::new(PhiTransform::new(f)?))
                };
                let kappa = if kind == BarrierKind::PsiKaramataWeight { 1.0 } else { kf / (kf + 1.0) };
                (outer, Some(Inner::Karamata { a, l, kappa, edge_decay }))
            }
        };
        let limits = limits.unwrap_or(LimitConstants {
            c_plus: f64::NAN,
            c_zero: None,
            c_minus: None,
            e_plus: None,
            e_zero: None,
            e_minus: None,
            h_inf: f64::NAN,
            h_sup: f64::NAN,
        });
        let mut ctx = OmegaContext { kind, problem, outer, inner, limits, grid: vec![], notes };
        let radii = chebyshev_radii(grid.max(8), ctx.problem.dom.radius());
        let mut pts = radii.iter().map(|&r| ctx.point(r)).collect::<Result<Vec<_>>>()?;
        pts.push(ctx.boundary_point());
        ctx.grid = pts;
        Ok(ctx)
    }

    pub fn kind(&self) -> BarrierKind {
        self.kind
    }

    /// The problem the barrier refers to, with any defining-function
    /// adjustment applied.
    pub fn problem(&self) -> &BallProblem {
        &self.problem
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    fn geometry_terms(&self, r: f64) -> (f64, f64, f64) {
        let dom = &self.problem.dom;
        let (n, k) = (dom.dim(), dom.k());
        let c2 = 2.0 * self.problem.dfn.coefficient();
        let v = self.problem.dfn.v_of_distance(dom.radius() - r);
        let va = v * c2.powi(k as i32) * binom(n, k);
        let g = c2.powi(k as i32 + 1) * binom(n - 1, k - 1) * r * r;
        (v, va, g)
    }

    fn point(&self, r: f64) -> Result<PointData> {
        let (v, va, g) = self.geometry_terms(r);
        let inner = match &self.inner {
            Some(i) => Some(i.at(v)?),
            None => None,
        };
        Ok(PointData { r, va, g, inner, boundary: false })
    }

    fn boundary_point(&self) -> PointData {
        let radius = self.problem.dom.radius();
        let (_, _, g) = self.geometry_terms(radius);
        let inner = self.inner.as_ref().map(|i| {
            let (rho1, rho2) = i.boundary_rhos();
            InnerData { g0: 0.0, g0p: f64::INFINITY, rho1, rho2 }
        });
        PointData { r: radius, va: 0.0, g, inner, boundary: true }
    }

    fn omega_point(&self, p: &PointData, tau: f64) -> Result<f64> {
        let k = self.problem.dom.k() as i32;
        Ok(match &self.outer {
            Outer::Power { alpha } => p.va + (alpha + 1.0) * p.g,
            Outer::Log { .. } => p.va + p.g,
            Outer::Psi(tr) => {
                let d = p.inner.expect("transform barriers carry inner data");
                let big = if p.boundary {
                    self.limits.c_plus
                } else {
                    let t = tau * d.g0;
                    match tr.big_psi(t) {
                        Ok(x) => x,
                        Err(Error::Range { suggestion, .. }) if t < suggestion => self.limits.c_plus,
                        Err(e) => return Err(e),
                    }
                };
                p.va + (big * d.rho1 - d.rho2) * p.g
            }
            Outer::Phi(tr) => {
                let d = p.inner.expect("transform barriers carry inner data");
                let e_plus = self.limits.e_plus.unwrap_or(f64::NAN);
                let big = if p.boundary {
                    1.0 / e_plus
                } else {
                    let t = tau * d.g0;
                    match tr.big_phi(t) {
                        Ok(x) => x,
                        Err(Error::Range { suggestion, .. }) if t < suggestion => 1.0 / e_plus,
                        Err(e) => return Err(e),
                    }
                };
                let kap = k as f64 / (k as f64 + 1.0);
                kap.powi(k) * (big * p.va + (d.rho1 - big * d.rho2) * p.g)
            }
        })
    }

    /// `ω(τ, r)`.
    pub fn omega(&self, tau: f64, r: f64) -> Result<f64> {
        let radius = self.problem.dom.radius();
        if !(0.0..=radius).contains(&r) {
            return Err(Error::Domain(format!("radius {r} outside [0, {radius}]")));
        }
        if r == radius {
            return self.omega_point(&self.boundary_point(), tau);
        }
        self.omega_point(&self.point(r)?, tau)
    }

    /// True when `ω` does not depend on `τ` (constant `Ψ` or `Φ`).
    pub fn tau_independent(&self) -> bool {
        match &self.outer {
            Outer::Power { .. } | Outer::Log { .. } => true,
            Outer::Psi(t) => t.is_closed_form(),
            Outer::Phi(t) => t.is_closed_form(),
        }
    }

    /// Extremum of `ω(τ, ·)` over `[0, R]` and where it is attained: grid
    /// search including the boundary limit, then golden-section polish.
    pub fn extremum(&self, tau: f64, side: Extremum) -> Result<(f64, f64)> {
        let vals = self
            .grid
            .iter()
            .map(|p| self.omega_point(p, tau))
            .collect::<Result<Vec<_>>>()?;
        if let Some(bad) = vals.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(hypothesis(format!(
                "ω = {} at r = {} is not positive: the coefficient is not bounded below",
                vals[bad], self.grid[bad].r
            )));
        }
        let better = |a: f64, b: f64| match side {
            Extremum::Max => a > b,
            Extremum::Min => a < b,
        };
        let mut best = 0;
        for i in 1..vals.len() {
            if better(vals[i], vals[best]) {
                best = i;
            }
        }
        let n = self.grid.len();
        if self.grid[best].boundary || n < 3 {
            return Ok((vals[best], self.grid[best].r));
        }
        let lo = self.grid[best.saturating_sub(1)].r;
        let hi = if best + 1 < n - 1 { self.grid[best + 1].r } else { self.grid[best].r };
        let sign = if side == Extremum::Max { -1.0 } else { 1.0 };
        let obj = |r: f64| -> f64 {
            self.omega(tau, r).map(|w| sign * w).unwrap_or(f64::INFINITY)
        };
        let (mut a, mut b) = (lo, hi);
        let gr = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - gr * (b - a);
        let mut d = a + gr * (b - a);
        let (mut fc, mut fd) = (obj(c), obj(d));
        for _ in 0..80 {
            if (b - a).abs() <= 1e-14 * self.problem.dom.radius() {
                break;
            }
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - gr * (b - a);
                fc = obj(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + gr * (b - a);
                fd = obj(d);
            }
        }
        let (rp, fp) = if fc < fd { (c, fc) } else { (d, fd) };
        let polished = sign * fp;
        if fp.is_finite() && better(polished, vals[best]) {
            Ok((polished, rp))
        } else {
            Ok((vals[best], self.grid[best].r))
        }
    }

    /// Solves `τ^p · ext_r ω(τ, r) = b` with `p = k` (or `k + 1` for the φ
    /// barrier).
    pub fn solve_tau(&self, side: Extremum, b: f64) -> Result<TauSolve> {
        if !(b > 0.0) {
            return Err(Error::Argument(format!("target b = {b} must be positive")));
        }
        let p = self.kind.tau_power(self.problem.dom.k()) as f64;
        let eval = |ln_tau: f64| -> Result<f64> {
            let (e, _) = self.extremum(ln_tau.exp(), side)?;
            Ok(p * ln_tau + e.ln() - b.ln())
        };
        let (e1, _) = self.extremum(1.0, side)?;
        let start = (b / e1).ln() / p;
        if self.tau_independent() {
            let tau = start.exp();
            let residual = (tau.powf(p) * e1 - b).abs();
            return Ok(TauSolve { tau, residual, bracket: (tau, tau), iterations: 0 });
        }
        let (mut lo, mut hi) = (start, start);
        let mut flo = eval(lo)?;
        let mut steps = 0;
        while flo > 0.0 {
            lo -= std::f64::consts::LN_2;
            flo = eval(lo)?;
            steps += 1;
            if steps > 60 {
                return Err(Error::Bracketing("no sign change after 60 halvings of τ".into()));
            }
        }
        let mut fhi = eval(hi)?;
        steps = 0;
        while fhi < 0.0 {
            hi += std::f64::consts::LN_2;
            fhi = eval(hi)?;
            steps += 1;
            if steps > 60 {
                return Err(Error::Bracketing("no sign change after 60 doublings of τ".into()));
            }
        }
        let bracket = (lo.exp(), hi.exp());
        let mut iterations = 0;
        let mut mid = 0.5 * (lo + hi);
        let mut fm = eval(mid)?;
        while fm.exp_m1().abs() > TAU_TOL && iterations < 200 {
            if fm > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
            mid = 0.5 * (lo + hi);
            fm = eval(mid)?;
            iterations += 1;
            if hi - lo <= 4.0 * f64::EPSILON * mid.abs().max(1.0) {
                break;
            }
        }
        let residual = b * fm.exp_m1().abs();
        if residual > TAU_TOL * b {
            return Err(Error::Bracketing(format!(
                "τ bisection stalled with residual {residual:e}"
            )));
        }
        Ok(TauSolve { tau: mid.exp(), residual, bracket, iterations })
    }

    fn inner_at(&self, v: f64) -> Result<InnerData> {
        self.inner.as_ref().expect("transform barriers carry inner data").at(v)
    }
}

/// Result of a `τ` solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauSolve {
    pub tau: f64,
    /// `|τ^p · ext ω − b|`.
    pub residual: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
}

/// `ω(τ, x)` at a point `x` of the ball for the given barrier kind.
pub fn omega(kind: BarrierKind, problem: &BallProblem, tau: f64, x: &[f64]) -> Result<f64> {
    let ctx = OmegaContext::new(kind, problem, 8)?;
    let r = x.iter().map(|a| a * a).sum::<f64>().sqrt();
    ctx.omega(tau, r)
}

/// An evaluable barrier with its constants.
#[derive(Debug, Clone)]
pub struct BarrierSpec {
    ctx: OmegaContext,
    role: Role,
    /// `m` for the scaling and shift barriers, `τ` for transform barriers.
    scale: f64,
    /// Extremum of `ω` used to fix the scale.
    extremum: f64,
    tau_solve: Option<TauSolve>,
}

/// Default number of Chebyshev radii for extremum searches.
pub const DEFAULT_GRID: usize = 4096;

/// Builds the sub- (`Role::Sub`) or supersolution of `kind` for `problem`.
pub fn build_barrier(kind: BarrierKind, problem: &BallProblem, role: Role) -> Result<BarrierSpec> {
    build_barrier_with_grid(kind, problem, role, DEFAULT_GRID)
}

pub fn build_barrier_with_grid(
    kind: BarrierKind,
    problem: &BallProblem,
    role: Role,
    grid: usize,
) -> Result<BarrierSpec> {
    let ctx = OmegaContext::new(kind, problem, grid)?;
    let k = problem.dom.k() as f64;
    let (b1, b2) = (problem.weight.b1, problem.weight.b2);
    let (side, b) = match role {
        Role::Sub => (Extremum::Min, b2),
        Role::Super => (Extremum::Max, b1),
    };
    let (ext, _) = ctx.extremum(1.0, side)?;
    let (scale, extremum, tau_solve) = match &ctx.outer {
        Outer::Power { alpha } => {
            let gamma = match ctx.problem.f.family() {
                crate::nonlinearity::Family::Power { gamma } => *gamma,
                _ => unreachable!(),
            };
            ((b / (alpha.powf(k) * ext)).powf(1.0 / (k - gamma)), ext, None)
        }
        Outer::Log { beta } => (ext.ln() + k * beta.ln() - b.ln(), ext, None),
        _ => {
            let sol = ctx.solve_tau(side, b)?;
            let (e, _) = ctx.extremum(sol.tau, side)?;
            (sol.tau, e, Some(sol))
        }
    };
    Ok(BarrierSpec { ctx, role, scale, extremum, tau_solve })
}

/// Radial value and derivatives of a barrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Profile {
    pub u: f64,
    pub du: f64,
    pub d2u: f64,
}

impl BarrierSpec {
    pub fn kind(&self) -> BarrierKind {
        self.ctx.kind
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn extremum(&self) -> f64 {
        self.extremum
    }

    pub fn tau_solve(&self) -> Option<TauSolve> {
        self.tau_solve
    }

    pub fn context(&self) -> &OmegaContext {
        &self.ctx
    }

    pub fn problem(&self) -> &BallProblem {
        &self.ctx.problem
    }

    pub fn notes(&self) -> &[String] {
        &self.ctx.notes
    }

    /// Named constants of the construction for reports.
    pub fn constants(&self) -> Vec<(&'static str, f64)> {
        let mut out = vec![];
        match &self.ctx.outer {
            Outer::Power { alpha } => out.push(("alpha", *alpha)),
            Outer::Log { beta } => out.push(("beta", *beta)),
            _ => {}
        }
        match &self.ctx.inner {
            Some(Inner::Power { eta }) => out.push(("eta", *eta)),
            Some(Inner::Log { mu }) => out.push(("mu", *mu)),
            Some(Inner::Karamata { a, kappa, .. }) => {
                out.push(("a", *a));
                out.push(("kappa", *kappa));
            }
            None => {}
        }
        let name = match self.ctx.outer {
            Outer::Power { .. } | Outer::Log { .. } => "m",
            _ => "tau",
        };
        out.push((name, self.scale));
        out.push(("omega_extremum", self.extremum));
        out
    }

    /// `h(v), h′(v), h″(v)` with the barrier written as `h(v(x))`.
    fn h(&self, v: f64) -> Result<(f64, f64, f64)> {
        let m = self.scale;
        Ok(match &self.ctx.outer {
            Outer::Power { alpha } => {
                let a = *alpha;
                (m * v.powf(-a), -a * m * v.powf(-a - 1.0), a * (a + 1.0) * m * v.powf(-a - 2.0))
            }
            Outer::Log { beta } => (m - beta * v.ln(), -beta / v, beta / (v * v)),
            Outer::Psi(tr) => {
                let d = self.ctx.inner_at(v)?;
                let ps = tr.derivatives(m * d.g0)?;
                let g0pp = d.g0p * d.rho2 / v;
                (
                    ps.value,
                    ps.first * m * d.g0p,
                    ps.second * m * m * d.g0p * d.g0p + ps.first * m * g0pp,
                )
            }
            Outer::Phi(tr) => {
                let d = self.ctx.inner_at(v)?;
                let ph = tr.derivatives(m * d.g0)?;
                let g0pp = d.g0p * d.rho2 / v;
                (
                    ph.value,
                    ph.first * m * d.g0p,
                    ph.second * m * m * d.g0p * d.g0p + ph.first * m * g0pp,
                )
            }
        })
    }

    /// `(h′(v), h″(v))` at radius `r`.
    pub fn v_derivatives(&self, r: f64) -> Result<(f64, f64)> {
        let (_, h1, h2) = self.h(self.v_at(r)?)?;
        Ok((h1, h2))
    }

    fn v_at(&self, r: f64) -> Result<f64> {
        let radius = self.ctx.problem.dom.radius();
        if !(r >= 0.0 && r < radius) {
            return Err(Error::Domain(format!("radius {r} outside [0, {radius})")));
        }
        Ok(self.ctx.problem.dfn.v_of_distance(radius - r))
    }

    /// Barrier value at radius `r < R`.
    pub fn value(&self, r: f64) -> Result<f64> {
        Ok(self.h(self.v_at(r)?)?.0)
    }

    /// Barrier value at distance `d` from the boundary, accurate for tiny `d`.
    pub fn value_at_distance(&self, d: f64) -> Result<f64> {
        let radius = self.ctx.problem.dom.radius();
        if !(d > 0.0 && d <= radius) {
            return Err(Error::Domain(format!("distance {d} outside (0, {radius}]")));
        }
        Ok(self.h(self.ctx.problem.dfn.v_of_distance(d))?.0)
    }

    /// Radial value, first and second derivatives at `r`.
    pub fn profile(&self, r: f64) -> Result<Profile> {
        let (u, h1, h2) = self.h(self.v_at(r)?)?;
        let c = self.ctx.problem.dfn.coefficient();
        let vp = -2.0 * c * r;
        Ok(Profile { u, du: h1 * vp, d2u: h2 * vp * vp - 2.0 * c * h1 })
    }
}

/// Outcome of a pointwise barrier check.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub points: usize,
    /// Smallest relative margin; negative means the inequality fails.
    pub worst_margin: f64,
    pub worst_r: f64,
    /// `(r, margin)` where the margin is below `−1e−9`.
    pub failures: Vec<(f64, f64)>,
    /// Radii where the radial Hessian is not strictly in `Γ_k`.
    pub convexity_failures: Vec<f64>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.convexity_failures.is_empty()
    }
}

/// Checks `S_k(D²w) ≥ b f(w)` (sub) or `≤` (super) and strict k-convexity
/// at every radius in `radii`.
pub fn verify_barrier(spec: &BarrierSpec, problem: &BallProblem, radii: &[f64]) -> VerifyReport {
    let dom = spec.problem().dom;
    let dfn = spec.problem().dfn;
    let n = dom.dim();
    let rows: Vec<(f64, f64, bool)> = radii
        .par_iter()
        .map(|&r| {
            let eval = || -> Result<(f64, bool)> {
                let v = dfn.v_of_distance(dom.radius() - r);
                let (u, h1, h2) = spec.h(v)?;
                let mut x = vec![0.0; n];
                x[0] = r;
                let sk = geometry::sk_of_v_composition(&dom, &dfn, h1, h2, &x)?;
                let rhs = problem.weight.eval(&dom, &dfn, r) * problem.f.f(u);
                let scale = sk.abs().max(rhs.abs()).max(f64::MIN_POSITIVE);
                let margin = match spec.role {
                    Role::Sub => (sk - rhs) / scale,
                    Role::Super => (rhs - sk) / scale,
                };
                let c = dfn.coefficient();
                let du = -2.0 * c * r * h1;
                let d2u = h2 * 4.0 * c * c * r * r - 2.0 * c * h1;
                let eig = if r > 0.0 {
                    geometry::radial_eigenvalues(n, du, d2u, r)
                } else {
                    vec![d2u; n]
                };
                let convex = symfun::in_gamma_k(&eig, dom.k(), true)?;
                Ok((margin, convex))
            };
            match eval() {
                Ok((m, c)) => (r, m, c),
                Err(_) => (r, f64::NEG_INFINITY, false),
            }
        })
        .collect();
    let mut worst_margin = f64::INFINITY;
    let mut worst_r = f64::NAN;
    let mut failures = vec![];
    let mut convexity_failures = vec![];
    for &(r, m, c) in &rows {
        if m < worst_margin {
            worst_margin = m;
            worst_r = r;
        }
        if m < -MARGIN_TOL {
            failures.push((r, m));
        }
        if !c {
            convexity_failures.push(r);
        }
    }
    VerifyReport { points: rows.len(), worst_margin, worst_r, failures, convexity_failures }
}

/// Boundary-rate constants for weights `b ≍ θ(d)^{k+1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateConstants {
    /// `τ` built from the lower weight bound `b1`.
    pub tau_b1: f64,
    /// `τ` built from the upper weight bound `b2`.
    pub tau_b2: f64,
    /// `1 − C_f^{+∞}`.
    pub exponent: f64,
    pub c_plus: f64,
    pub d_theta: f64,
    /// Predicted `[liminf, limsup]` of `u / ψ(Θ(d)^{(k+1)/k})`.
    pub bracket: (f64, f64),
}

pub fn rate_constants(problem: &BallProblem) -> Result<RateConstants> {
    let WeightForm::BoundaryRate { theta } = &problem.weight.form else {
        return Err(hypothesis("boundary rates need a weight of the form θ(d)^(k+1)".into()));
    };
    let dom = &problem.dom;
    let k = dom.k() as f64;
    let c = problem.f.limit_constants()?.c_plus;
    let d = theta.d_theta()?.value;
    let d = if d.abs() < 1e-9 { 0.0 } else { d };
    if !(c > 1.0 || (c == 1.0 && d > 0.0)) {
        return Err(hypothesis(format!(
            "need C_f at infinity > 1, or = 1 with D_θ > 0 (got C = {c}, D_θ = {d})"
        )));
    }
    let m = binom(dom.dim() - 1, dom.k() - 1) / dom.radius().powf(k - 1.0);
    let den = ((k + 1.0) * (c - 1.0) + k * d) * m;
    let kap = k / (k + 1.0);
    let tau_b1 = kap * (problem.weight.b1 * k / den).powf(1.0 / k);
    let tau_b2 = kap * (problem.weight.b2 * k / den).powf(1.0 / k);
    let exponent = 1.0 - c;
    let bracket = (tau_b2.powf(exponent), tau_b1.powf(exponent));
    Ok(RateConstants { tau_b1, tau_b2, exponent, c_plus: c, d_theta: d, bracket })
}
