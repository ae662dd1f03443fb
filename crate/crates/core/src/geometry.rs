//! Ball domains, the quadratic defining function `v = c(R² − |x|²)`, distance
//! data and the composition formulas that turn profiles into `S_k` values.

use crate::error::{Error, Result};
use crate::symfun::{self, binom, SymMatrix};

/// The ball of radius `R` in `R^N`, together with the Hessian order `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallDomain {
    n: usize,
    radius: f64,
    k: usize,
}

/// Principal-curvature data of the parallel surface at distance `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureData {
    pub d: f64,
    pub eps: Vec<f64>,
}

impl BallDomain {
    pub fn new(n: usize, radius: f64, k: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Argument(format!("dimension {n} must be at least 2")));
        }
        if k == 0 || k > n {
            return Err(Error::Argument(format!("Hessian order {k} outside 1..={n}")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Argument(format!("radius {radius} must be positive")));
        }
        Ok(BallDomain { n, radius, k })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn with_order(&self, k: usize) -> Result<Self> {
        Self::new(self.n, self.radius, k)
    }

    /// Boundary principal curvature, `1/R` in every direction.
    pub fn boundary_curvature(&self) -> f64 {
        1.0 / self.radius
    }

    /// `ε_i = κ/(1 − κd) = 1/(R − d)` for each of the `N − 1` directions.
    pub fn curvature(&self, d: f64) -> Result<CurvatureData> {
        if !(d >= 0.0 && d < self.radius) {
            return Err(Error::Domain(format!(
                "distance {d} outside [0, {})",
                self.radius
            )));
        }
        let kappa = self.boundary_curvature();
        let e = kappa / (1.0 - kappa * d);
        Ok(CurvatureData { d, eps: vec![e; self.n - 1] })
    }
}

/// `v(x) = c(R² − |x|²)`, positive inside and vanishing on the sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefiningFunction {
    c: f64,
    radius: f64,
    n: usize,
}

impl DefiningFunction {
    /// `c = 1/(2R²)`, so that `max v = 1/2`.
    pub fn standard(dom: &BallDomain) -> Self {
        DefiningFunction { c: 0.5 / (dom.radius * dom.radius), radius: dom.radius, n: dom.n }
    }

    pub fn new(dom: &BallDomain, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Argument(format!("coefficient {c} must be positive")));
        }
        let f = DefiningFunction { c, radius: dom.radius, n: dom.n };
        if f.max_value() >= 1.0 {
            return Err(Error::Argument(format!(
                "max v = {} must stay below 1",
                f.max_value()
            )));
        }
        Ok(f)
    }

    /// Largest coefficient not exceeding the current one with `max v ≤ bound`.
    pub fn capped(&self, bound: f64) -> Self {
        let cap = bound / (self.radius * self.radius);
        DefiningFunction { c: self.c.min(cap), ..*self }
    }

    pub fn coefficient(&self) -> f64 {
        self.c
    }

    pub fn max_value(&self) -> f64 {
        self.c * self.radius * self.radius
    }

    pub fn v(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|a| a * a).sum();
        self.c * (self.radius * self.radius - r2)
    }

    pub fn v_radial(&self, r: f64) -> f64 {
        self.c * (self.radius - r) * (self.radius + r)
    }

    /// `v` as a function of the distance `d = R − r`, `c·d·(2R − d)`.
    pub fn v_of_distance(&self, d: f64) -> f64 {
        self.c * d * (2.0 * self.radius - d)
    }

    /// Inverse of `v_of_distance` on `[0, R]`.
    pub fn distance_of_v(&self, v: f64) -> f64 {
        let w = v / (self.c * self.radius * self.radius);
        // d = R(1 − √(1 − w)) written without cancellation.
        self.radius * w / (1.0 + (1.0 - w).max(0.0).sqrt())
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|a| -2.0 * self.c * a).collect()
    }

    pub fn hessian(&self) -> SymMatrix {
        SymMatrix::identity(self.n).scaled(-2.0 * self.c)
    }
}

/// `(−h′)^k S_k(ε) + (−h′)^{k−1} h″ S_{k−1}(ε)` for `h` a function of the
/// distance to the boundary.
pub fn sk_of_distance_composition(
    dom: &BallDomain,
    hprime: f64,
    hsecond: f64,
    d: f64,
    order: usize,
) -> Result<f64> {
    if order == 0 || order > dom.n {
        return Err(Error::Argument(format!("order {order} outside 1..={}", dom.n)));
    }
    let cd = dom.curvature(d)?;
    let sk = symfun::elem_sym(&cd.eps, order)?;
    let skm1 = if order == 1 { 1.0 } else { symfun::elem_sym(&cd.eps, order - 1)? };
    let m = -hprime;
    Ok(m.powi(order as i32) * sk + m.powi(order as i32 - 1) * hsecond * skm1)
}

/// Radial ingredients of the composition with `v`: `S_k(D²v) = (−2c)^k C(N,k)`
/// and the adjugate form `Σ_I gᵀ adj(D²v)_I g = (−2c)^{k+1} C(N−1,k−1) r²`.
pub fn ball_composition_terms(dom: &BallDomain, dfn: &DefiningFunction, r: f64) -> (f64, f64) {
    let (n, k, c) = (dom.n, dom.k, dfn.c);
    let a = (-2.0 * c).powi(k as i32) * binom(n, k);
    let s = (-2.0 * c).powi(k as i32 + 1) * binom(n - 1, k - 1) * r * r;
    (a, s)
}

/// `S_k(D²(h∘v))(x) = h′^k S_k(D²v) + h′^{k−1} h″ Σ` with the ball closed forms.
pub fn sk_of_v_composition(
    dom: &BallDomain,
    dfn: &DefiningFunction,
    hprime: f64,
    hsecond: f64,
    x: &[f64],
) -> Result<f64> {
    if x.len() != dom.n {
        return Err(Error::Argument(format!("point has {} coordinates, expected {}", x.len(), dom.n)));
    }
    let r = x.iter().map(|a| a * a).sum::<f64>().sqrt();
    let (a, s) = ball_composition_terms(dom, dfn, r);
    let k = dom.k as i32;
    Ok(hprime.powi(k) * a + hprime.powi(k - 1) * hsecond * s)
}

/// The same composition with the sum term evaluated over every principal
/// `k × k` submatrix.
pub fn sk_of_v_composition_brute(
    dom: &BallDomain,
    dfn: &DefiningFunction,
    hprime: f64,
    hsecond: f64,
    x: &[f64],
) -> Result<f64> {
    let m = dfn.hessian();
    let g = dfn.gradient(x);
    let a = symfun::sk_matrix(&m, dom.k)?;
    let s = symfun::submatrix_form_sum(&m, &g, dom.k)?;
    let k = dom.k as i32;
    Ok(hprime.powi(k) * a + hprime.powi(k - 1) * hsecond * s)
}

/// Hessian eigenvalues of a radial function: `u″` once, `u′/r` with
/// multiplicity `N − 1`.
pub fn radial_eigenvalues(n: usize, uprime: f64, usecond: f64, r: f64) -> Vec<f64> {
    let mut e = vec![uprime / r; n];
    e[0] = usecond;
    e
}

/// `S_k = C(N−1,k)(u′/r)^k + C(N−1,k−1) u″ (u′/r)^{k−1}`; at `r = 0` the
/// limit `C(N,k) u″(0)^k` when `u′(0) = 0`.
pub fn radial_sk(dom: &BallDomain, uprime: f64, usecond: f64, r: f64) -> Result<f64> {
    let (n, k) = (dom.n, dom.k);
    if r == 0.0 {
        if uprime == 0.0 {
            return Ok(binom(n, k) * usecond.powi(k as i32));
        }
        return Err(Error::Domain("nonzero radial slope at the center".into()));
    }
    if !(r > 0.0 && r <= dom.radius) {
        return Err(Error::Domain(format!("radius {r} outside (0, {}]", dom.radius)));
    }
    let q = uprime / r;
    Ok(binom(n - 1, k) * q.powi(k as i32) + binom(n - 1, k - 1) * usecond * q.powi(k as i32 - 1))
}

/// `(C(N−1,k−1)/k) r^{1−N} d/dr[r^{N−k} (u′)^k]` with the derivative expanded.
pub fn radial_sk_divergence(dom: &BallDomain, uprime: f64, usecond: f64, r: f64) -> Result<f64> {
    let (n, k) = (dom.n as i32, dom.k as i32);
    if !(r > 0.0 && r <= dom.radius) {
        return Err(Error::Domain(format!("radius {r} outside (0, {}]", dom.radius)));
    }
    let d = (n - k) as f64 * r.powi(n - k - 1) * uprime.powi(k)
        + k as f64 * r.powi(n - k) * uprime.powi(k - 1) * usecond;
    Ok(binom(dom.n - 1, dom.k - 1) / k as f64 * r.powi(1 - n) * d)
}
