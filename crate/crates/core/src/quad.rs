//! Adaptive Gauss–Kronrod quadrature with substitutions for improper
//! integrals on half-lines and integrable power singularities at zero.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const MAX_INTERVALS: usize = 5000;

/// Value and error estimate of a quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quad {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
}

/// Decay of an integrand on a half-line, used to pick the substitution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decay {
    /// Integrand behaves like `s^(-q)` with `q > 1`.
    Power(f64),
    /// Integrand decays faster than every power.
    Rapid,
}

impl Decay {
    fn exponent(self) -> Result<f64> {
        match self {
            Decay::Power(q) if q > 1.0 => Ok((1.0 / (q - 1.0)).clamp(0.125, 8.0)),
            Decay::Power(q) => Err(Error::Integration(format!(
                "tail exponent {q} does not give a convergent integral"
            ))),
            Decay::Rapid => Ok(1.0),
        }
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<(f64, f64)> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    for (j, &x) in XGK.iter().enumerate().take(7) {
        let f1 = f(c - h * x);
        let f2 = f(c + h * x);
        resk += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let value = resk * h;
    let error = ((resk - resg) * h).abs();
    if !value.is_finite() || !error.is_finite() {
        return Err(Error::Integration(format!(
            "non-finite integrand on [{a:e}, {b:e}]"
        )));
    }
    Ok((value, error))
}

/// Globally adaptive 7/15-point Gauss–Kronrod quadrature on a finite interval.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<Quad> {
    if a == b {
        return Ok(Quad { value: 0.0, error: 0.0, evals: 0 });
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Integration(format!("infinite limits [{a}, {b}]")));
    }
    let (v, e) = kronrod(&f, a, b)?;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value: v, error: e });
    let mut total = v;
    let mut err = e;
    let mut evals = 15;
    while err > rel_tol * total.abs() && err > f64::MIN_POSITIVE {
        if heap.len() >= MAX_INTERVALS {
            return Err(Error::Integration(format!(
                "interval budget exhausted on [{a:e}, {b:e}]: value {total:e}, error {err:e}"
            )));
        }
        let s = heap.pop().expect("heap is never empty");
        let m = 0.5 * (s.a + s.b);
        if m <= s.a || m >= s.b {
            // Interval cannot be split further; accept the current estimate.
            heap.push(s);
            break;
        }
        let (v1, e1) = kronrod(&f, s.a, m)?;
        let (v2, e2) = kronrod(&f, m, s.b)?;
        evals += 30;
        total += v1 + v2 - s.value;
        err += e1 + e2 - s.error;
        heap.push(Segment { a: s.a, b: m, value: v1, error: e1 });
        heap.push(Segment { a: m, b: s.b, value: v2, error: e2 });
    }
    // Re-sum to shed the drift of the running updates.
    let (value, error) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
    Ok(Quad { value, error, evals })
}

/// `∫_t^∞ g(s) ds` for `t > 0` through `s = t·u^(-m)`, `u ∈ (0, 1]`, with `m`
/// tuned to the decay so that power tails become bounded integrands.
pub fn integrate_tail<F: Fn(f64) -> f64>(
    g: F,
    t: f64,
    decay: Decay,
    rel_tol: f64,
) -> Result<Quad> {
    if t <= 0.0 {
        let head = integrate(&g, t, 1.0, rel_tol)?;
        let tail = positive_tail(&g, 1.0, decay, rel_tol)?;
        return Ok(Quad {
            value: head.value + tail.value,
            error: head.error + tail.error,
            evals: head.evals + tail.evals,
        });
    }
    positive_tail(&g, t, decay, rel_tol)
}

fn positive_tail<F: Fn(f64) -> f64>(g: &F, t: f64, decay: Decay, rel_tol: f64) -> Result<Quad> {
    let m = decay.exponent()?;
    let h = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        let s = t * u.powf(-m);
        if !s.is_finite() {
            return 0.0;
        }
        let w = g(s) * s * m / u;
        if w.is_finite() {
            w
        } else {
            0.0
        }
    };
    integrate(h, 0.0, 1.0, rel_tol)
}

/// `∫_{-∞}^t g(s) ds` by reflection onto an upper tail.
pub fn integrate_lower_tail<F: Fn(f64) -> f64>(
    g: F,
    t: f64,
    decay: Decay,
    rel_tol: f64,
) -> Result<Quad> {
    integrate_tail(|s| g(-s), -t, decay, rel_tol)
}

/// `∫_0^t g(s) ds` for `t > 0` when `g(s) ~ s^a` near zero with `a > -1`, via
/// `s = t·u^m`, `m = 1/(a+1)`, which removes the endpoint singularity.
pub fn integrate_from_zero<F: Fn(f64) -> f64>(g: F, t: f64, a: f64, rel_tol: f64) -> Result<Quad> {
    if t <= 0.0 {
        return Err(Error::Domain(format!("upper limit {t} must be positive")));
    }
    if a <= -1.0 {
        return Err(Error::Integration(format!(
            "integrand exponent {a} at zero is not integrable"
        )));
    }
    let m = (1.0 / (a + 1.0)).clamp(0.125, 8.0);
    let h = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        let s = t * u.powf(m);
        if s <= 0.0 {
            return 0.0;
        }
        let w = g(s) * s * m / u;
        if w.is_finite() {
            w
        } else {
            0.0
        }
    };
    integrate(h, 0.0, 1.0, rel_tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let q = integrate(|x| x * x * x - 2.0 * x, 0.0, 2.0, 1e-14).unwrap();
        assert!((q.value - 0.0).abs() < 1e-14);
    }

    #[test]
    fn oscillatory_integrand() {
        let q = integrate(|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-13).unwrap();
        assert!((q.value - 2.0).abs() < 1e-13);
    }

    #[test]
    fn power_tail() {
        let q = integrate_tail(|s: f64| s.powf(-1.5), 0.01, Decay::Power(1.5), 1e-13).unwrap();
        assert!((q.value / (2.0 / 0.1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exponential_tail_from_negative_start() {
        let q = integrate_tail(|s: f64| (-s).exp(), -3.0, Decay::Rapid, 1e-13).unwrap();
        assert!((q.value / 3f64.exp() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lower_tail_by_reflection() {
        let q = integrate_lower_tail(|s: f64| s.exp(), 0.5, Decay::Rapid, 1e-13).unwrap();
        assert!((q.value / 0.5f64.exp() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singular_at_zero() {
        let q = integrate_from_zero(|s: f64| s.powf(-0.9), 2.0, -0.9, 1e-13).unwrap();
        assert!((q.value / (2f64.powf(0.1) / 0.1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn divergent_tail_is_rejected() {
        assert!(integrate_tail(|s: f64| 1.0 / s, 1.0, Decay::Power(1.0), 1e-10).is_err());
    }
}
