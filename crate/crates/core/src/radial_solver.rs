//! Radial large solutions on balls by the monotone truncated-Dirichlet
//! scheme, and boundary-rate extraction.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::barriers::{self, BarrierKind, BarrierSpec, RateConstants, Role, WeightDescriptor, WeightForm};
use crate::error::{Error, Result};
use crate::extrap::{self, Estimate};
use crate::geometry::{self, BallDomain, DefiningFunction};
use crate::nonlinearity::{Family, Nonlinearity};
use crate::symfun::{self, binom};
use crate::transforms::PsiTransform;

/// `S_k(D²u) = b(x) f(u)` in a ball with `u = +∞` on the boundary.
#[derive(Debug, Clone)]
pub struct BallProblem {
    pub dom: BallDomain,
    pub weight: WeightDescriptor,
    pub f: Nonlinearity,
    pub dfn: DefiningFunction,
}

impl BallProblem {
    pub fn new(dom: BallDomain, weight: WeightDescriptor, f: Nonlinearity) -> Result<Self> {
        if f.k() != dom.k() {
            return Err(Error::Argument(format!(
                "nonlinearity indexed for k = {} but the domain has k = {}",
                f.k(),
                dom.k()
            )));
        }
        let dfn = DefiningFunction::standard(&dom);
        Ok(BallProblem { dom, weight, f, dfn })
    }

    pub fn with_defining_function(mut self, dfn: DefiningFunction) -> Self {
        self.dfn = dfn;
        self
    }

    /// `b` at radius `r`.
    pub fn b(&self, r: f64) -> f64 {
        self.weight.eval(&self.dom, &self.dfn, r)
    }

    /// `b` at distance `d` from the boundary.
    pub fn b_at_distance(&self, d: f64) -> f64 {
        self.weight.eval_at_distance(&self.dom, &self.dfn, d)
    }
}

/// Radial grid uniform in `s = ln(R/d)`, so `d_i = R e^{-s_i}` shrinks
/// geometrically toward the boundary while `r_0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    radius: f64,
    h: f64,
    r: Vec<f64>,
    d: Vec<f64>,
}

pub const DEFAULT_POINTS: usize = 2048;
pub const DEFAULT_S_MAX: f64 = 32.0;

impl RadialGrid {
    pub fn new(radius: f64, points: usize, s_max: f64) -> Result<Self> {
        if points < 8 || !(s_max > 0.0) || !(radius > 0.0) {
            return Err(Error::Argument(format!(
                "grid needs ≥ 8 points, s_max > 0 and R > 0 (got {points}, {s_max}, {radius})"
            )));
        }
        let h = s_max / (points - 1) as f64;
        let s: Vec<f64> = (0..points).map(|i| i as f64 * h).collect();
        let r = s.iter().map(|&s| -radius * (-s).exp_m1()).collect();
        let d = s.iter().map(|&s| radius * (-s).exp()).collect();
        Ok(RadialGrid { radius, h, r, d })
    }

    pub fn standard(radius: f64) -> Self {
        Self::new(radius, DEFAULT_POINTS, DEFAULT_S_MAX).expect("default grid is valid")
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Spacing in `s`.
    pub fn step(&self) -> f64 {
        self.h
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    /// Every other node.
    pub fn coarsen(&self) -> Self {
        RadialGrid {
            radius: self.radius,
            h: 2.0 * self.h,
            r: self.r.iter().step_by(2).copied().collect(),
            d: self.d.iter().step_by(2).copied().collect(),
        }
    }
}

/// Cell `[i, i+1]` of a uniform grid ending at `last`: first node of its
/// four-point interpolation stencil.
fn stencil_start(i: usize, last: usize) -> usize {
    if last < 3 || i == 0 {
        0
    } else if i + 1 == last {
        last - 3
    } else {
        i - 1
    }
}

/// Integral of samples `g` over cell `[i, i+1]` of a uniform grid of step `h`
/// ending at index `last`, by cubic interpolation through four nodes.
fn cell_integral(g: &[f64], i: usize, last: usize, h: f64) -> f64 {
    if last < 3 {
        return 0.5 * h * (g[i] + g[i + 1]);
    }
    let c = h / 24.0;
    if i == 0 {
        c * (9.0 * g[0] + 19.0 * g[1] - 5.0 * g[2] + g[3])
    } else if i + 1 == last {
        c * (9.0 * g[last] + 19.0 * g[last - 1] - 5.0 * g[last - 2] + g[last - 3])
    } else {
        c * (-g[i - 1] + 13.0 * g[i] + 13.0 * g[i + 1] - g[i + 2])
    }
}

const GAUSS5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (-0.906_179_845_938_664_0, 0.236_926_885_056_189_1),
    (0.906_179_845_938_664_0, 0.236_926_885_056_189_1),
];

/// Weights `∫_cell r(s)^{power} L_j(s) ds` for the Lagrange basis on nodes
/// `st..st+m` of cell `[i, i+1]`, so that `Σ_j w_j φ_j ≈ ∫_cell r^{power} φ ds`
/// stays accurate relative to `r^{power+1}` near the center.
fn lagrange_weights<const M: usize>(grid: &RadialGrid, i: usize, st: usize, m: usize, power: i32) -> [f64; M] {
    let h = grid.h;
    let mut w = [0.0; M];
    for &(x, gw) in &GAUSS5 {
        let s = (i as f64 + 0.5 * (x + 1.0)) * h;
        let r = -grid.radius * (-s).exp_m1();
        let meas = 0.5 * h * gw * r.powi(power);
        let t = s / h - st as f64;
        for (j, wj) in w.iter_mut().enumerate().take(m) {
            let mut l = 1.0;
            for q in 0..m {
                if q != j {
                    l *= (t - q as f64) / (j as f64 - q as f64);
                }
            }
            *wj += meas * l;
        }
    }
    w
}

fn product_weights(grid: &RadialGrid, i: usize, last: usize, n: usize) -> [f64; 4] {
    let m = if last < 3 { 2 } else { 4 };
    lagrange_weights(grid, i, stencil_start(i, last), m, n as i32 - 1)
}

/// Nodes in the causal stencils of the outward march.
const CAUSAL: usize = 6;

/// First stencil node of cell `[i, i+1]`, using only nodes `≤ i+1` once the
/// starting block `0..CAUSAL` is passed.
fn causal_start(i: usize) -> usize {
    (i + 2).saturating_sub(CAUSAL)
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Damped Picard iteration controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    pub damping: f64,
    /// Stop when successive profiles differ by less than this, relatively.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Consecutive growing sweeps tolerated before giving up.
    pub growth_limit: usize,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions { damping: 0.5, tol: 1e-10, max_sweeps: 200_000, growth_limit: 20 }
    }
}

/// Converged solution of one truncated Dirichlet problem on nodes `0..=truncation`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedProfile {
    pub sigma: f64,
    pub truncation: usize,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    pub sweeps: usize,
    pub damping: f64,
    pub change: f64,
}

/// The fixed-point map `u ↦ σ − ∫_r^ρ u′[u]` with
/// `u′(r)^k = (k/C(N−1,k−1)) r^{k−N} ∫_0^r s^{N−1} b f(u) ds`.
struct PicardMap<'a> {
    grid: &'a RadialGrid,
    last: usize,
    sigma: f64,
    k: usize,
    /// `b d`, the weight in `s` without the radial measure.
    bd: Vec<f64>,
    /// `r^{N−1}`.
    measure: Vec<f64>,
    cells: Vec<[f64; 4]>,
    /// `(k/C(N−1,k−1)) r^{k−N}`.
    factor: Vec<f64>,
    source: &'a (dyn Fn(f64) -> f64 + Sync),
    dsource: &'a (dyn Fn(f64) -> f64 + Sync),
}

impl<'a> PicardMap<'a> {
    fn new(
        problem: &BallProblem,
        grid: &'a RadialGrid,
        last: usize,
        sigma: f64,
        source: &'a (dyn Fn(f64) -> f64 + Sync),
        dsource: &'a (dyn Fn(f64) -> f64 + Sync),
    ) -> Self {
        let (n, k) = (problem.dom.dim(), problem.dom.k());
        let kc = k as f64 / binom(n - 1, k - 1);
        let bd = (0..=last).map(|i| problem.b_at_distance(grid.d[i]) * grid.d[i]).collect();
        let measure = (0..=last).map(|i| grid.r[i].powi(n as i32 - 1)).collect();
        let cells = (0..last).map(|i| product_weights(grid, i, last, n)).collect();
        let factor = (0..=last)
            .map(|i| if i == 0 { 0.0 } else { kc * grid.r[i].powi(k as i32 - n as i32) })
            .collect();
        PicardMap { grid, last, sigma, k, bd, measure, cells, factor, source, dsource }
    }

    fn slope(&self, u: &[f64]) -> Vec<f64> {
        let phi: Vec<f64> = u.iter().zip(&self.bd).map(|(&u, &w)| w * (self.source)(u)).collect();
        let inv_k = 1.0 / self.k as f64;
        let mut du = vec![0.0; self.last + 1];
        let mut acc = 0.0;
        for i in 0..self.last {
            let st = stencil_start(i, self.last);
            let w = &self.cells[i];
            let m = (self.last + 1 - st).min(4);
            acc += (0..m).map(|j| w[j] * phi[st + j]).sum::<f64>();
            du[i + 1] = (self.factor[i + 1] * acc.max(0.0)).powf(inv_k);
        }
        du
    }

    /// Weights of the norm in which the linearised damped map contracts.
    fn merit_weights(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .enumerate()
            .map(|(i, &x)| self.measure[i] * self.bd[i] * (self.dsource)(x).max(0.0))
            .collect()
    }

    /// `σ − ∫_r^ρ u′`, accumulated from the boundary in double-double.
    fn integrate_down(&self, du: &[f64]) -> Vec<f64> {
        let q: Vec<f64> = du.iter().zip(&self.grid.d).map(|(&p, &d)| p * d).collect();
        let mut out = vec![0.0; self.last + 1];
        let (mut hi, mut lo) = (self.sigma, 0.0);
        out[self.last] = self.sigma;
        for i in (0..self.last).rev() {
            let piece = cell_integral(&q, i, self.last, self.grid.h);
            let (s, e) = two_sum(hi, -piece);
            lo += e;
            let (s2, e2) = two_sum(s, lo);
            hi = s2;
            lo = e2;
            out[i] = hi + lo;
        }
        out
    }

    fn apply(&self, u: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let du = self.slope(u);
        (self.integrate_down(&du), du)
    }
}

/// `max_i |a_i − b_i| / scale_i`, infinite on NaN.
fn scaled_change(a: &[f64], b: &[f64], scale: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(scale)
        .map(|((&x, &y), &s)| {
            let d = (x - y).abs() / s;
            if d.is_nan() { f64::INFINITY } else { d }
        })
        .fold(0.0, f64::max)
}

fn merit(t: &[f64], u: &[f64], m: &[f64]) -> f64 {
    let s: f64 = t.iter().zip(u).zip(m).map(|((&a, &b), &w)| w * (a - b) * (a - b)).sum();
    if s.is_nan() { f64::INFINITY } else { s.sqrt() }
}

/// Damped Picard sweeps. A step is kept only if it lowers the residual in the
/// `r^{N−1} b f′(u)`-weighted norm, where the linearised map is self-adjoint;
/// otherwise the damping is halved and the step retried.
fn picard(map: &PicardMap, init: Vec<f64>, opts: &PicardOptions) -> Result<TruncatedProfile> {
    let floor = (10.0 * opts.tol).max(1e-12);
    let scale: Vec<f64> = init.iter().map(|x| x.abs().max(1.0)).collect();
    let mut u = init;
    let (mut t, _) = map.apply(&u);
    let mut change = scaled_change(&t, &u, &scale);
    let mut weights = map.merit_weights(&u);
    let plain = weights.iter().all(|&w| w == 0.0);
    let mut theta = opts.damping;
    let mut trace = vec![theta];
    let mut rejected = 0;
    let mut accepted = 0;
    let mut sweeps = 1;
    while change > opts.tol {
        if sweeps >= opts.max_sweeps {
            return Err(Error::NonConvergence {
                message: format!("Picard stopped at relative change {change:e} after {sweeps} sweeps"),
                damping: trace,
            });
        }
        let trial: Vec<f64> = u.iter().zip(&t).map(|(&x, &y)| (1.0 - theta) * x + theta * y).collect();
        let (tt, _) = map.apply(&trial);
        sweeps += 1;
        let c = scaled_change(&tt, &trial, &scale);
        let better = if plain {
            c < change
        } else {
            merit(&tt, &trial, &weights) < merit(&t, &u, &weights)
        };
        if better && c.is_finite() {
            u = trial;
            t = tt;
            change = c;
            if !plain {
                weights = map.merit_weights(&u);
            }
            rejected = 0;
            accepted += 1;
            if accepted % 16 == 0 && theta < opts.damping {
                theta = (2.0 * theta).min(opts.damping);
                trace.push(theta);
            }
            continue;
        }
        if change <= floor {
            break;
        }
        theta *= 0.5;
        trace.push(theta);
        rejected += 1;
        accepted = 0;
        if rejected >= opts.growth_limit {
            return Err(Error::NonConvergence {
                message: format!(
                    "Picard residual grew over {rejected} damped sweeps at σ = {:e}",
                    map.sigma
                ),
                damping: trace,
            });
        }
    }
    if change <= opts.tol {
        u = t;
    }
    let du = map.slope(&u);
    Ok(TruncatedProfile { sigma: map.sigma, truncation: map.last, u, du, sweeps, damping: theta, change })
}

fn check_truncation(grid: &RadialGrid, truncation: usize) -> Result<()> {
    if truncation < CAUSAL || truncation >= grid.len() {
        return Err(Error::Argument(format!(
            "truncation index {truncation} outside [{CAUSAL}, {})",
            grid.len()
        )));
    }
    Ok(())
}

/// Solves the radial Dirichlet problem `u(r_J) = σ`, `u′(0) = 0` on nodes
/// `0..=truncation` of `grid`.
pub fn solve_truncated(
    problem: &BallProblem,
    sigma: f64,
    grid: &RadialGrid,
    truncation: usize,
    init: Option<&[f64]>,
    opts: &PicardOptions,
) -> Result<TruncatedProfile> {
    check_truncation(grid, truncation)?;
    let (f, g) = (problem.f.clone(), problem.f.clone());
    let source = move |u: f64| f.f(u);
    let dsource = move |u: f64| g.df(u);
    let map = PicardMap::new(problem, grid, truncation, sigma, &source, &dsource);
    let start = init.map_or_else(|| vec![sigma; truncation + 1], |u| u[..=truncation].to_vec());
    picard(&map, start, opts)
}

/// As [`solve_truncated`] with `f` frozen to the constant `value`.
pub fn solve_truncated_frozen(
    problem: &BallProblem,
    sigma: f64,
    grid: &RadialGrid,
    truncation: usize,
    value: f64,
    opts: &PicardOptions,
) -> Result<TruncatedProfile> {
    check_truncation(grid, truncation)?;
    let source = move |_: f64| value;
    let dsource = |_: f64| 0.0;
    let map = PicardMap::new(problem, grid, truncation, sigma, &source, &dsource);
    picard(&map, vec![sigma; truncation + 1], opts)
}

/// Outward march of the integral identity from a prescribed center value,
/// with causal product integration so each node solves one scalar equation.
struct Shooter<'a> {
    map: &'a PicardMap<'a>,
    radial: Vec<[f64; CAUSAL]>,
    plain: Vec<[f64; CAUSAL]>,
}

impl<'a> Shooter<'a> {
    fn new(map: &'a PicardMap<'a>, dim: usize) -> Self {
        let grid = map.grid;
        let radial = (0..map.last)
            .map(|i| lagrange_weights(grid, i, causal_start(i), CAUSAL, dim as i32 - 1))
            .collect();
        let plain = (0..map.last).map(|i| lagrange_weights(grid, i, causal_start(i), CAUSAL, 0)).collect();
        Shooter { map, radial, plain }
    }

    /// Profile with `u(0) = a`, or `None` if it blows up before the
    /// truncation node.
    fn march(&self, a: f64) -> Option<(Vec<f64>, Vec<f64>)> {
        const B: usize = CAUSAL - 1;
        let m = self.map;
        let last = m.last;
        let d = &m.grid.d;
        let inv_k = 1.0 / m.k as f64;
        let mut u = vec![a; last + 1];
        let mut du = vec![0.0; last + 1];
        let mut phi = vec![0.0; last + 1];
        let mut q = vec![0.0; last + 1];
        let mut acc = vec![0.0; last + 1];
        let top = B.min(last);
        let block = |u: &[f64], phi: &mut [f64], acc: &mut [f64], du: &mut [f64], q: &mut [f64]| {
            for j in 0..=top {
                phi[j] = m.bd[j] * (m.source)(u[j]);
            }
            for i in 0..top {
                acc[i + 1] = acc[i] + (0..CAUSAL).map(|j| self.radial[i][j] * phi[j]).sum::<f64>();
                du[i + 1] = (m.factor[i + 1] * acc[i + 1].max(0.0)).powf(inv_k);
            }
            for j in 0..=top {
                q[j] = du[j] * d[j];
            }
        };
        let mut settled = false;
        for _ in 0..200 {
            block(&u, &mut phi, &mut acc, &mut du, &mut q);
            let mut change: f64 = 0.0;
            for i in 0..top {
                let x = u[i] + (0..CAUSAL).map(|j| self.plain[i][j] * q[j]).sum::<f64>();
                change = change.max((x - u[i + 1]).abs() / x.abs().max(1.0));
                u[i + 1] = x;
            }
            if !change.is_finite() {
                return None;
            }
            if change <= 1e-15 {
                settled = true;
                break;
            }
        }
        if !settled {
            return None;
        }
        block(&u, &mut phi, &mut acc, &mut du, &mut q);
        for i in top..last {
            let st = causal_start(i);
            let (cr, cp) = (&self.radial[i], &self.plain[i]);
            let ip = acc[i] + (0..B).map(|j| cr[j] * phi[st + j]).sum::<f64>();
            let up = u[i] + (0..B).map(|j| cp[j] * q[st + j]).sum::<f64>();
            let (b, dd, fac) = (m.bd[i + 1], d[i + 1], m.factor[i + 1]);
            let mut x = u[i];
            let mut solved = false;
            for _ in 0..100 {
                let big_i = (ip + cr[B] * b * (m.source)(x)).max(0.0);
                let p = (fac * big_i).powf(inv_k);
                let g = up + cp[B] * dd * p;
                if !g.is_finite() || g > 1e300 {
                    return None;
                }
                let dg = if big_i > 0.0 { cp[B] * dd * p * inv_k / big_i * cr[B] * b * (m.dsource)(x) } else { 0.0 };
                let slope = dg - 1.0;
                if !(slope < 0.0) {
                    return None;
                }
                let step = (g - x) / slope;
                x -= step;
                if step.abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
                    solved = true;
                    break;
                }
            }
            if !solved {
                return None;
            }
            phi[i + 1] = b * (m.source)(x);
            acc[i + 1] = ip + cr[B] * phi[i + 1];
            du[i + 1] = (fac * acc[i + 1].max(0.0)).powf(inv_k);
            q[i + 1] = du[i + 1] * dd;
            u[i + 1] = up + cp[B] * q[i + 1];
        }
        Some((u, du))
    }
}

/// Finds the center value whose outward profile reaches `σ` at the
/// truncation node, bracketing from `guess` and bisecting to adjacent floats.
/// The returned profile is the one from below.
fn anchored(shooter: &Shooter, guess: (f64, f64)) -> Result<TruncatedProfile> {
    let map = shooter.map;
    let (sigma, last) = (map.sigma, map.last);
    let mut marches = 0;
    let mut shoot = |a: f64| {
        marches += 1;
        shooter.march(a).map(|(u, du)| (u[last] - sigma, u, du))
    };
    let mut hi = guess.1.min(sigma);
    let mut lo = guess.0.min(hi);
    let mut below = match shoot(hi) {
        Some(r) if r.0 <= 0.0 => {
            lo = hi;
            hi = sigma;
            match shoot(sigma) {
                Some(top) if top.0 <= 0.0 => {
                    return Ok(TruncatedProfile {
                        sigma,
                        truncation: last,
                        change: top.0.abs() / sigma.abs().max(1.0),
                        u: top.1,
                        du: top.2,
                        sweeps: marches,
                        damping: f64::NAN,
                    });
                }
                _ => Some(r),
            }
        }
        _ => None,
    };
    if below.is_none() {
        let mut step = lo.abs().max(1.0);
        for _ in 0..2100 {
            match shoot(lo) {
                Some(r) if r.0 <= 0.0 => {
                    below = Some(r);
                    break;
                }
                _ => {
                    hi = lo;
                    lo -= step;
                    step *= 2.0;
                }
            }
        }
    }
    let mut below = below.ok_or_else(|| {
        Error::NonConvergence {
            message: format!("no center value keeps the profile below σ = {sigma:e}"),
            damping: Vec::new(),
        }
    })?;
    loop {
        let mid = if lo > 0.0 && hi > 4.0 * lo { (lo * hi).sqrt() } else { lo + 0.5 * (hi - lo) };
        if !(mid > lo && mid < hi) {
            break;
        }
        match shoot(mid) {
            Some(r) if r.0 <= 0.0 => {
                lo = mid;
                below = r;
            }
            _ => hi = mid,
        }
    }
    Ok(TruncatedProfile {
        sigma,
        truncation: last,
        change: below.0.abs() / sigma.abs().max(1.0),
        u: below.1,
        du: below.2,
        sweeps: marches,
        damping: f64::NAN,
    })
}

/// As [`solve_truncated`], but by bracketing the center value and marching
/// the integral identity outward. Interior values keep full relative
/// precision however large `σ` is.
pub fn solve_truncated_anchored(
    problem: &BallProblem,
    sigma: f64,
    grid: &RadialGrid,
    truncation: usize,
    guess: Option<(f64, f64)>,
) -> Result<TruncatedProfile> {
    check_truncation(grid, truncation)?;
    let (f, g) = (problem.f.clone(), problem.f.clone());
    let source = move |u: f64| f.f(u);
    let dsource = move |u: f64| g.df(u);
    let map = PicardMap::new(problem, grid, truncation, sigma, &source, &dsource);
    let shooter = Shooter::new(&map, problem.dom.dim());
    anchored(&shooter, guess.unwrap_or((sigma - 1.0, sigma)))
}

/// How each truncated problem of the ladder is solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TruncatedMethod {
    /// Center value bracketed, identity marched outward.
    #[default]
    Anchored,
    /// Damped Picard sweeps of `u ← σ − ∫_r^ρ u′`.
    DampedPicard,
}

/// Knobs of the blow-up solve.
#[derive(Debug, Clone, PartialEq)]
pub struct BlowupOptions {
    pub points: usize,
    pub s_max: f64,
    /// Number of truncation levels `σ_n`.
    pub levels: usize,
    /// `δ₀ / R` in the ladder `d_n = δ₀ 2^{-n}`.
    pub delta0: f64,
    /// Interior change between the last two levels declaring convergence.
    pub tol: f64,
    /// `δ_report / R`: the interior subgrid is `d ≥ δ_report`.
    pub report_distance: f64,
    pub method: TruncatedMethod,
    pub picard: PicardOptions,
    /// Barrier construction; chosen from the problem when `None`.
    pub barrier: Option<BarrierKind>,
    /// Chebyshev radii for the barrier extremum searches.
    pub barrier_grid: usize,
}

impl Default for BlowupOptions {
    fn default() -> Self {
        BlowupOptions {
            points: DEFAULT_POINTS,
            s_max: DEFAULT_S_MAX,
            levels: 24,
            delta0: 1e-3,
            tol: 1e-6,
            report_distance: 1e-3,
            method: TruncatedMethod::Anchored,
            picard: PicardOptions::default(),
            barrier: None,
            barrier_grid: barriers::DEFAULT_GRID,
        }
    }
}

/// One rung of the truncation ladder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelRecord {
    pub sigma: f64,
    pub truncation: usize,
    /// `R − ρ_n`.
    pub truncation_distance: f64,
    pub sweeps: usize,
    pub damping: f64,
    /// Largest relative change from the previous level on the interior subgrid.
    pub interior_change: f64,
}

/// Worst relative margins of `sub ≤ u ≤ super` on the interior subgrid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichReport {
    pub lower: f64,
    pub upper: f64,
    pub points: usize,
}

impl SandwichReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.lower >= -tol && self.upper >= -tol
    }
}

#[derive(Debug, Clone)]
pub struct RadialSolution {
    /// The problem actually solved (the defining function may be adjusted).
    pub problem: BallProblem,
    pub barrier: BarrierKind,
    pub grid: RadialGrid,
    /// Index of the truncation node of the final level.
    pub truncation: usize,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    /// Relative residual of the radial operator; NaN off the interior subgrid.
    pub residual: Vec<f64>,
    /// Relative change between the last two levels per node; NaN past the
    /// previous truncation.
    pub level_change: Vec<f64>,
    pub levels: Vec<LevelRecord>,
    pub converged: bool,
    /// Last node of the interior subgrid.
    pub interior_end: usize,
    pub sandwich: SandwichReport,
    pub monotonicity_violations: usize,
    pub gamma_violations: usize,
    pub max_residual: f64,
    pub discretization_estimate: f64,
    pub sub: BarrierSpec,
    pub sup: BarrierSpec,
    pub notes: Vec<String>,
}

/// Picks the barrier construction matching the weight class and `f`, with the
/// problem it is built on (power-type weights are normalised to `v^λ`).
pub fn select_barrier(problem: &BallProblem, kind: Option<BarrierKind>) -> Result<(BarrierKind, BallProblem)> {
    let mut bp = problem.clone();
    if let Some(w) = problem.weight.power_equivalent(&problem.dom, &problem.dfn) {
        bp.weight = w;
    }
    if let Some(kind) = kind {
        return Ok((kind, bp));
    }
    let kind = match (&problem.weight.form, problem.f.family()) {
        (WeightForm::Power { .. } | WeightForm::BoundaryRate { .. }, Family::Power { .. }) => {
            BarrierKind::PowerScaling
        }
        (WeightForm::Power { .. } | WeightForm::BoundaryRate { .. }, Family::Exponential) => {
            BarrierKind::LogShift
        }
        (WeightForm::Power { .. } | WeightForm::BoundaryRate { .. }, _) => BarrierKind::PsiPowerWeight,
        (WeightForm::LogCritical { .. }, _) => BarrierKind::PsiLogWeight,
        (WeightForm::Karamata { .. }, _) => {
            match barriers::OmegaContext::new(BarrierKind::PsiKaramataWeight, &bp, 8) {
                Ok(_) => BarrierKind::PsiKaramataWeight,
                Err(e) if e.is_hypothesis() => BarrierKind::PhiKaramataWeight,
                Err(e) => return Err(e),
            }
        }
    };
    Ok((kind, bp))
}

fn seventh_order_derivative(y: &[f64], i: usize, h: f64) -> f64 {
    (-y[i - 3] + 9.0 * y[i - 2] - 45.0 * y[i - 1] + 45.0 * y[i + 1] - 9.0 * y[i + 2] + y[i + 3])
        / (60.0 * h)
}

/// Runs the truncation ladder `σ_n = super(d_n)` and returns the final
/// level with its diagnostics.
pub fn solve_blowup(problem: &BallProblem, opts: &BlowupOptions) -> Result<RadialSolution> {
    let (kind, bp) = select_barrier(problem, opts.barrier)?;
    let sub = barriers::build_barrier_with_grid(kind, &bp, Role::Sub, opts.barrier_grid)?;
    let sup = barriers::build_barrier_with_grid(kind, &bp, Role::Super, opts.barrier_grid)?;
    let mut notes: Vec<String> = sub.notes().to_vec();
    let mut problem = problem.clone();
    if sub.problem().dfn != problem.dfn {
        problem.dfn = sub.problem().dfn;
    }
    let dom = problem.dom;
    let radius = dom.radius();
    let grid = RadialGrid::new(radius, opts.points, opts.s_max)?;
    let n = grid.len();
    let sub_vals: Vec<f64> = grid
        .d
        .iter()
        .map(|&d| sub.value_at_distance(d).unwrap_or(f64::INFINITY))
        .collect();
    let interior_end = grid.d.iter().rposition(|&d| d >= opts.report_distance * radius).unwrap_or(0);
    let (f, g) = (problem.f.clone(), problem.f.clone());
    let source = move |u: f64| f.f(u);
    let dsource = move |u: f64| g.df(u);

    let sup_center = sup.value_at_distance(radius).unwrap_or(f64::INFINITY);
    let mut levels: Vec<LevelRecord> = Vec::new();
    let mut prev: Option<TruncatedProfile> = None;
    let mut level_change = vec![f64::NAN; n];
    let mut violations = 0;
    for level in 1..=opts.levels {
        let dn = opts.delta0 * radius * 0.5f64.powi(level as i32);
        let target = match sup.value_at_distance(dn) {
            Ok(t) if t.is_finite() => t,
            _ => {
                notes.push(format!("ladder stopped at level {level}: super-barrier not evaluable at d = {dn:e}"));
                break;
            }
        };
        let j = sub_vals.partition_point(|&s| s <= target).saturating_sub(1).min(n - 1);
        if prev.as_ref().map_or(false, |p| j <= p.truncation) || j < 8 {
            continue;
        }
        if j == n - 1 {
            notes.push(format!("ladder reached the end of the grid at level {level}"));
        }
        let mut sigma = sub_vals[j];
        let mut init = sub_vals[..=j].to_vec();
        if let Some(p) = &prev {
            init[..=p.truncation].copy_from_slice(&p.u);
        }
        let mut map = PicardMap::new(&problem, &grid, j, sigma, &source, &dsource);
        if let (TruncatedMethod::Anchored, Some(p)) = (opts.method, &prev) {
            let cap = sup.value_at_distance(grid.d[j]).unwrap_or(f64::INFINITY);
            match Shooter::new(&map, dom.dim()).march(p.u[0]) {
                Some((ext, _)) if ext[j] <= sigma => {}
                Some((ext, _)) if ext[j] <= cap + 1e-6 * cap.abs().max(1.0) => {
                    sigma = ext[j];
                    map = PicardMap::new(&problem, &grid, j, sigma, &source, &dsource);
                }
                _ => {
                    notes.push(format!(
                        "ladder stopped at level {level}: the center value is resolved to rounding"
                    ));
                    break;
                }
            }
        }
        let prof = match opts.method {
            TruncatedMethod::Anchored => {
                let lo = prev.as_ref().map_or(sub_vals[0], |p| p.u[0]);
                anchored(&Shooter::new(&map, dom.dim()), (lo, sup_center))?
            }
            TruncatedMethod::DampedPicard => picard(&map, init, &opts.picard)?,
        };
        let mut interior_change = f64::NAN;
        if let Some(p) = &prev {
            level_change = vec![f64::NAN; n];
            interior_change = 0.0;
            for i in 0..=p.truncation {
                let (a, b) = (prof.u[i], p.u[i]);
                let scale = a.abs().max(b.abs()).max(1.0);
                let slack = match opts.method {
                    TruncatedMethod::Anchored => 1e-12 * scale,
                    TruncatedMethod::DampedPicard => (1e-12 + 4.0 * opts.picard.tol) * scale,
                };
                if a < b - slack {
                    violations += 1;
                }
                level_change[i] = (a - b).abs() / scale;
                if i <= interior_end {
                    interior_change = interior_change.max(level_change[i]);
                }
            }
            if violations > 0 {
                return Err(Error::SchemeFailure(format!(
                    "level {level} dropped below level {} at {violations} nodes: the grid is too coarse",
                    level - 1
                )));
            }
        }
        levels.push(LevelRecord {
            sigma,
            truncation: j,
            truncation_distance: grid.d[j],
            sweeps: prof.sweeps,
            damping: prof.damping,
            interior_change,
        });
        let done = j == n - 1;
        prev = Some(prof);
        if done {
            break;
        }
    }
    let fin = prev.ok_or_else(|| Error::SchemeFailure("no truncation level fits the grid".into()))?;
    let j = fin.truncation;
    let interior_end = interior_end.min(j.saturating_sub(4));
    let mut converged = levels.len() >= 2 && levels.last().map_or(false, |l| l.interior_change < opts.tol);
    let mut bracket = 0.0;
    if !converged {
        let cap = sup.value_at_distance(grid.d[j]).unwrap_or(f64::INFINITY);
        let upper = cap.is_finite().then(|| {
            let map = PicardMap::new(&problem, &grid, j, cap, &source, &dsource);
            match opts.method {
                TruncatedMethod::Anchored => anchored(&Shooter::new(&map, dom.dim()), (fin.u[0], sup_center)),
                TruncatedMethod::DampedPicard => picard(&map, fin.u.clone(), &opts.picard),
            }
        });
        if let Some(Ok(up)) = upper {
            let width = (0..=interior_end)
                .map(|i| (up.u[i] - fin.u[i]).abs() / up.u[i].abs().max(fin.u[i].abs()).max(1.0))
                .fold(0.0, f64::max);
            bracket = width;
            converged = width < opts.tol;
            notes.push(format!(
                "super-barrier data at the last truncation moves the interior by {width:.3e}"
            ));
        }
    }
    if !converged {
        notes.push("interior did not converge across the last two levels; partial result".into());
    }

    let h = grid.h;
    let mut residual = vec![f64::NAN; j + 1];
    let mut max_residual: f64 = 0.0;
    let mut gamma_violations = 0;
    for i in 3..=interior_end {
        let d2u = seventh_order_derivative(&fin.du, i, h) / grid.d[i];
        let lhs = geometry::radial_sk(&dom, fin.du[i], d2u, grid.r[i])?;
        let rhs = problem.b_at_distance(grid.d[i]) * problem.f.f(fin.u[i]);
        let res = (lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE);
        residual[i] = res;
        max_residual = max_residual.max(res);
        let eig = geometry::radial_eigenvalues(dom.dim(), fin.du[i], d2u, grid.r[i]);
        if !symfun::in_gamma_k(&eig, dom.k(), true)? {
            gamma_violations += 1;
        }
    }

    let mut lower = f64::INFINITY;
    let mut upper = f64::INFINITY;
    for i in 0..=interior_end {
        let u = fin.u[i];
        let scale = u.abs().max(f64::MIN_POSITIVE);
        lower = lower.min((u - sub_vals[i]) / scale);
        let s = sup.value_at_distance(grid.d[i])?;
        upper = upper.min((s - u) / scale);
    }
    let sandwich = SandwichReport { lower, upper, points: interior_end + 1 };

    let coarse = grid.coarsen();
    let jc = j / 2;
    let cu: Vec<f64> = fin.u.iter().step_by(2).take(jc + 1).copied().collect();
    let cmap = PicardMap::new(&problem, &coarse, jc, fin.u[2 * jc], &source, &dsource);
    let cprof = match opts.method {
        TruncatedMethod::Anchored => {
            let spread = 1e-3 * fin.u[0].abs().max(1.0);
            anchored(&Shooter::new(&cmap, dom.dim()), (fin.u[0] - spread, fin.u[0] + spread))?
        }
        TruncatedMethod::DampedPicard => picard(&cmap, cu, &opts.picard)?,
    };
    let ladder = levels.last().map_or(0.0, |l| if l.interior_change.is_nan() { 0.0 } else { l.interior_change });
    let discretization_estimate =
        ((fin.u[0] - cprof.u[0]).abs() / 15.0).max(ladder.max(bracket) * fin.u[0].abs().max(1.0));

    Ok(RadialSolution {
        problem,
        barrier: kind,
        grid,
        truncation: j,
        u: fin.u,
        du: fin.du,
        residual,
        level_change,
        levels,
        converged,
        interior_end,
        sandwich,
        monotonicity_violations: violations,
        gamma_violations,
        max_residual,
        discretization_estimate,
        sub,
        sup,
        notes,
    })
}

impl RadialSolution {
    pub fn r(&self) -> &[f64] {
        &self.grid.r[..=self.truncation]
    }

    pub fn d(&self) -> &[f64] {
        &self.grid.d[..=self.truncation]
    }

    pub fn center_value(&self) -> f64 {
        self.u[0]
    }

    /// `u` at distance `d` from the boundary by cubic Hermite interpolation
    /// in `s = ln(R/d)`.
    pub fn value_at_distance(&self, d: f64) -> Result<f64> {
        let radius = self.grid.radius;
        let s = (radius / d).ln();
        let h = self.grid.h;
        let pos = s / h;
        if !(pos >= 0.0 && pos <= self.truncation as f64) {
            return Err(Error::Domain(format!(
                "distance {d:e} outside the solved range [{:e}, {radius}]",
                self.grid.d[self.truncation]
            )));
        }
        let i = (pos.floor() as usize).min(self.truncation - 1);
        let t = pos - i as f64;
        let (y0, y1) = (self.u[i], self.u[i + 1]);
        let (m0, m1) = (self.du[i] * self.grid.d[i] * h, self.du[i + 1] * self.grid.d[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        Ok((2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1)
    }

    /// Smallest distance down to which the last two levels agree within `tol`.
    pub fn converged_distance(&self, tol: f64) -> f64 {
        let mut last = 0;
        for (i, c) in self.level_change.iter().enumerate() {
            if c.is_nan() || *c > tol {
                break;
            }
            last = i;
        }
        self.grid.d[last]
    }

    /// Columns `r, d, u, u_prime, residual` after a `#` comment line.
    pub fn write_csv<W: Write + ?Sized>(&self, w: &mut W, comment: &str) -> io::Result<()> {
        writeln!(w, "# {comment}")?;
        writeln!(w, "r,d,u,u_prime,residual")?;
        for i in 0..=self.truncation {
            writeln!(
                w,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.6e}",
                self.grid.r[i], self.grid.d[i], self.u[i], self.du[i], self.residual[i]
            )?;
        }
        Ok(())
    }
}

/// Boundary-rate measurement against the predicted bracket.
#[derive(Debug, Clone)]
pub struct RateReport {
    pub distances: Vec<f64>,
    /// `u(d) / ψ(Θ(d)^{(k+1)/k})`.
    pub ratios: Vec<f64>,
    pub estimate: Estimate,
    pub constants: RateConstants,
    pub tolerance: f64,
    pub inside: bool,
}

/// Measures `u / ψ(Θ(d)^{(k+1)/k})` along `d_j = d_start 2^{-j}`, extrapolates
/// to `d → 0` and compares with the bracket of [`barriers::rate_constants`].
pub fn boundary_rate(sol: &RadialSolution, d_start: f64, tolerance: f64) -> Result<RateReport> {
    let problem = &sol.problem;
    let WeightForm::BoundaryRate { theta } = &problem.weight.form else {
        return Err(Error::Assumption("boundary rates need a weight of the form θ(d)^(k+1)".into()));
    };
    let constants = barriers::rate_constants(problem)?;
    let psi = PsiTransform::new(&problem.f)?;
    let k = problem.dom.k() as f64;
    let d_lo = sol.converged_distance(1e-7).max(sol.grid.d[sol.truncation] * 1e3);
    let mut distances = vec![];
    let mut ratios = vec![];
    let mut d = d_start;
    while d >= d_lo {
        let u = sol.value_at_distance(d)?;
        let t = theta.big_theta(d)?.powf((k + 1.0) / k);
        ratios.push(u / psi.psi(t)?);
        distances.push(d);
        d *= 0.5;
    }
    if ratios.len() < 5 {
        return Err(Error::Extraction {
            message: format!("only {} converged probes above d = {d_lo:e}", ratios.len()),
            sequence: ratios,
        });
    }
    let n = ratios.len();
    let diffs: Vec<f64> = ratios[n - 5..].windows(2).map(|w| w[1] - w[0]).collect();
    let noise = 1e-9 * ratios[n - 1].abs();
    let signs: Vec<f64> = diffs.iter().filter(|x| x.abs() > noise).map(|x| x.signum()).collect();
    if signs.windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::Extraction {
            message: "ratio tail is not monotone".into(),
            sequence: ratios,
        });
    }
    let estimate = if constants.c_plus > 1.0 {
        let tail = &ratios[n.saturating_sub(6)..];
        extrap::richardson(tail, 2.0, &[1.0, 2.0, 3.0])?
    } else {
        extrap::limit(&ratios, tolerance, 1.0).map_err(|e| match e {
            Error::Estimation { message, sequence } => Error::Extraction { message, sequence },
            other => other,
        })?
    };
    let (lo, hi) = constants.bracket;
    let inside = estimate.value >= lo * (1.0 - tolerance) && estimate.value <= hi * (1.0 + tolerance);
    Ok(RateReport { distances, ratios, estimate, constants, tolerance, inside })
}

/// Parameter varied across a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    /// Exponent of a power or Karamata weight.
    Lambda,
    /// Exponent of a log-critical weight.
    Mu,
    /// `η = (k+1+λ)/k`.
    Eta,
}

impl SweepParameter {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "lambda" => Ok(SweepParameter::Lambda),
            "mu" => Ok(SweepParameter::Mu),
            "eta" => Ok(SweepParameter::Eta),
            _ => Err(Error::Argument(format!("unknown sweep parameter '{s}'"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Lambda => "lambda",
            SweepParameter::Mu => "mu",
            SweepParameter::Eta => "eta",
        }
    }
}

/// Values of one sweep instance at the probe radii.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepValues {
    pub u: Vec<f64>,
    /// `u` divided by the normalisation of the limit being tested.
    pub normalized: Vec<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub result: std::result::Result<SweepValues, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub parameter: SweepParameter,
    pub probes: Vec<f64>,
    pub normalization: &'static str,
    pub rows: Vec<SweepRow>,
    /// Extrapolated limit of the normalised value at the first probe.
    pub limit: Option<Estimate>,
    /// Predicted bracket for the normalised limit, when one is known.
    pub predicted: Option<(f64, f64)>,
}

impl SweepTable {
    pub fn write_csv<W: Write + ?Sized>(&self, w: &mut W, comment: &str) -> io::Result<()> {
        writeln!(w, "# {comment}")?;
        let mut header = vec![self.parameter.name().to_string()];
        for (j, _) in self.probes.iter().enumerate() {
            header.push(format!("u_{j}"));
            header.push(format!("normalized_{j}"));
        }
        header.push("status".into());
        writeln!(w, "{}", header.join(","))?;
        for row in &self.rows {
            let mut cols = vec![format!("{:.17e}", row.value)];
            match &row.result {
                Ok(v) => {
                    for (u, q) in v.u.iter().zip(&v.normalized) {
                        cols.push(format!("{u:.17e}"));
                        cols.push(format!("{q:.17e}"));
                    }
                    cols.push(if v.converged { "ok".into() } else { "partial".into() });
                }
                Err(e) => {
                    for _ in &self.probes {
                        cols.push(String::new());
                        cols.push(String::new());
                    }
                    cols.push(format!("\"{}\"", e.replace('"', "'")));
                }
            }
            writeln!(w, "{}", cols.join(","))?;
        }
        Ok(())
    }
}

/// A rayon pool capped by `HESSIAN_BLOWUP_THREADS` when set.
pub fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var("HESSIAN_BLOWUP_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::Argument(format!("HESSIAN_BLOWUP_THREADS = '{v}' is not a count")))?;
        b = b.num_threads(n.max(1));
    }
    b.build().map_err(|e| Error::Argument(format!("thread pool: {e}")))
}

fn lambda_of(parameter: SweepParameter, value: f64, k: usize) -> f64 {
    match parameter {
        SweepParameter::Eta => k as f64 * value - k as f64 - 1.0,
        _ => value,
    }
}

fn instance(template: &BallProblem, parameter: SweepParameter, value: f64) -> Result<BallProblem> {
    let mut p = template.clone();
    let k = p.dom.k();
    p.weight.form = match (&template.weight.form, parameter) {
        (WeightForm::Power { .. }, SweepParameter::Lambda | SweepParameter::Eta) => {
            WeightForm::Power { lambda: lambda_of(parameter, value, k) }
        }
        (WeightForm::Karamata { l, .. }, SweepParameter::Lambda | SweepParameter::Eta) => {
            WeightForm::Karamata { lambda: lambda_of(parameter, value, k), l: l.clone() }
        }
        (WeightForm::LogCritical { .. }, SweepParameter::Mu) => WeightForm::LogCritical { mu: value },
        (form, _) => {
            return Err(Error::Argument(format!(
                "cannot sweep {} for weight {form:?}",
                parameter.name()
            )))
        }
    };
    Ok(p)
}

/// Normalisation of the sweep limit for the template's family.
fn normalization(p: &BallProblem) -> (&'static str, Box<dyn Fn(f64) -> f64 + Send + Sync>) {
    let k = p.dom.k() as f64;
    match (&p.weight.form, p.f.family()) {
        (WeightForm::Power { lambda }, Family::Exponential) => {
            let l = (k + 1.0 + lambda).ln();
            ("ln(k+1+lambda)", Box::new(move |u| u / l))
        }
        (WeightForm::Power { lambda }, Family::Power { gamma }) => {
            let alpha = (k + 1.0 + lambda) / (gamma - k);
            let s = alpha.powf(k / (gamma - k));
            ("alpha^(k/(gamma-k))", Box::new(move |u| u / s))
        }
        _ => ("1", Box::new(|u| u)),
    }
}

/// `[min, max]` over the ball of `v(−1)^k S_k(D²v) + (−1)^{k+1}Σ`.
fn log_shift_omega_range(dom: &BallDomain, dfn: &DefiningFunction) -> (f64, f64) {
    let k = dom.k() as i32;
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..=4096 {
        let r = dom.radius() * i as f64 / 4096.0;
        let (a, s) = geometry::ball_composition_terms(dom, dfn, r);
        let w = dfn.v_radial(r) * sign * a - sign * s;
        lo = lo.min(w);
        hi = hi.max(w);
    }
    (lo, hi)
}

/// Solves each instance (rows in parallel) and tabulates the normalised
/// values at the probe radii.
pub fn parameter_sweep(
    template: &BallProblem,
    parameter: SweepParameter,
    schedule: &[f64],
    probes: &[f64],
    opts: &BlowupOptions,
) -> Result<SweepTable> {
    let pool = worker_pool()?;
    let radius = template.dom.radius();
    if probes.iter().any(|&r| !(0.0..radius).contains(&r)) {
        return Err(Error::Argument("sweep probes must lie in [0, R)".into()));
    }
    let rows: Vec<SweepRow> = pool.install(|| {
        schedule
            .par_iter()
            .map(|&value| {
                let run = || -> Result<SweepValues> {
                    let p = instance(template, parameter, value)?;
                    let (_, norm) = normalization(&p);
                    let sol = solve_blowup(&p, opts)?;
                    let u = probes
                        .iter()
                        .map(|&r| sol.value_at_distance(radius - r))
                        .collect::<Result<Vec<_>>>()?;
                    let normalized = u.iter().map(|&x| norm(x)).collect();
                    Ok(SweepValues { u, normalized, converged: sol.converged })
                };
                SweepRow { value, result: run().map_err(|e| e.to_string()) }
            })
            .collect()
    });
    let first = instance(template, parameter, schedule.first().copied().unwrap_or(0.0))?;
    let (name, _) = normalization(&first);
    let seq: Vec<f64> = rows
        .iter()
        .filter_map(|r| r.result.as_ref().ok().and_then(|v| v.normalized.first().copied()))
        .collect();
    let limit = if seq.len() >= 3 { extrap::limit(&seq, 0.05, 1.0).ok() } else { None };
    let k = template.dom.k() as f64;
    let predicted = match template.f.family() {
        Family::Exponential => Some((k, k)),
        Family::Power { gamma } => {
            let (c1, cc1) = log_shift_omega_range(&template.dom, &template.dfn);
            let e = 1.0 / (k - gamma);
            Some(((template.weight.b2 / c1).powf(e), (template.weight.b1 / cc1).powf(e)))
        }
        _ => None,
    };
    Ok(SweepTable { parameter, probes: probes.to_vec(), normalization: name, rows, limit, predicted })
}
