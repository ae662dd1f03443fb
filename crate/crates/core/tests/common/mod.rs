//! Independent oracles that do not touch the library's solver.

#![allow(dead_code)]

/// Planar large solution of `Δu = u³` shot from `u(0) = 1` with classical RK4.
#[derive(Debug, Clone, Copy)]
pub struct CubicShot {
    /// Blow-up radius of the shot.
    pub radius: f64,
    /// `lim u·(radius − r)` as `r → radius`.
    pub rate: f64,
}

/// Integrates `u″ + u′/r = u³` in `r` until `u = switch`, then in
/// `s = ln(1/u)` with `r(s)` and `y = u′/u²`, which stays regular at the
/// blow-up point: `dy/ds = (2y² − 1)/y + t/r`, `dr/ds = −t/y`, `t = eˢ`.
pub fn cubic_planar_shot(h: f64, switch: f64) -> CubicShot {
    let rhs = |r: f64, u: f64, p: f64| (p, u * u * u - p / r);
    let r0: f64 = 1e-3;
    let (mut r, mut u, mut p) = (r0, 1.0 + r0 * r0 / 4.0 + r0.powi(4) * 3.0 / 64.0, r0 / 2.0 + r0.powi(3) * 3.0 / 16.0);
    while u < switch {
        let (k1u, k1p) = rhs(r, u, p);
        let (k2u, k2p) = rhs(r + h / 2.0, u + h / 2.0 * k1u, p + h / 2.0 * k1p);
        let (k3u, k3p) = rhs(r + h / 2.0, u + h / 2.0 * k2u, p + h / 2.0 * k2p);
        let (k4u, k4p) = rhs(r + h, u + h * k3u, p + h * k3p);
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        r += h;
    }
    let f = |s: f64, r: f64, y: f64| {
        let t = s.exp();
        (-t / y, (2.0 * y * y - 1.0) / y + t / r)
    };
    let (mut s, mut y) = ((1.0 / u).ln(), p / (u * u));
    let end = -60.0;
    let hs = -h * 100.0;
    while s > end {
        let (a1, b1) = f(s, r, y);
        let (a2, b2) = f(s + hs / 2.0, r + hs / 2.0 * a1, y + hs / 2.0 * b1);
        let (a3, b3) = f(s + hs / 2.0, r + hs / 2.0 * a2, y + hs / 2.0 * b2);
        let (a4, b4) = f(s + hs, r + hs * a3, y + hs * b3);
        r += hs / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        y += hs / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
        s += hs;
    }
    CubicShot { radius: r, rate: 1.0 / y }
}
