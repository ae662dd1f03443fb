//! Inverse-integral transforms `ψ` and `φ` defined by
//! `∫_ψ(t)^∞ f^{-1/k} = t` and `∫_φ(t)^∞ ((k+1)F)^{-1/(k+1)} = t`, with their
//! derivatives and the ratio functionals `Ψ = −tψ″/ψ′` and `Φ = −φ′/(tφ″)`.

use crate::error::{Error, Result};
use crate::nonlinearity::{Family, Nonlinearity, SignClass};
use crate::quad;

const NODES: usize = 512;
const NODE_TOL: f64 = 1e-14;

/// Value and first two derivatives of a transform at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivatives {
    pub value: f64,
    pub first: f64,
    pub second: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Psi,
    Phi,
}

/// Shared inversion machinery: a table of exact `(ψ_i, t_i)` pairs and a
/// safeguarded Newton solve inside the bracketing cell.
#[derive(Debug, Clone)]
struct Inverse {
    nl: Nonlinearity,
    kind: Kind,
    closed_form: bool,
    psi_nodes: Vec<f64>,
    t_nodes: Vec<f64>,
}

impl Inverse {
    fn build(nl: &Nonlinearity, kind: Kind, allow_closed: bool) -> Result<Self> {
        match kind {
            Kind::Psi => {
                nl.inverse_tail(1.0_f64.max(nl.lower_end() + 1.0))?;
            }
            Kind::Phi => {
                nl.energy_tail(1.0_f64.max(nl.lower_end() + 1.0))?;
            }
        }
        let closed_form =
            allow_closed && matches!(nl.family(), Family::Power { .. } | Family::Exponential);
        let mut inv = Inverse {
            nl: nl.clone(),
            kind,
            closed_form,
            psi_nodes: vec![],
            t_nodes: vec![],
        };
        if !closed_form {
            inv.fill_cache()?;
        }
        Ok(inv)
    }

    fn integrand(&self, s: f64) -> f64 {
        let k = self.nl.k() as f64;
        match self.kind {
            Kind::Psi => self.nl.f(s).powf(-1.0 / k),
            Kind::Phi => ((k + 1.0) * self.nl.big_f(s)).powf(-1.0 / (k + 1.0)),
        }
    }

    fn fill_cache(&mut self) -> Result<()> {
        let raw: Vec<f64> = match self.nl.sign_class() {
            SignClass::VanishingAtZero => {
                let (a, b) = (1e-30f64.ln(), 1e100f64.ln());
                (0..NODES)
                    .map(|i| (a + (b - a) * i as f64 / (NODES - 1) as f64).exp())
                    .collect()
            }
            SignClass::PositiveOnLine => {
                let u = 1e8f64.asinh();
                (0..NODES)
                    .map(|i| (-u + 2.0 * u * i as f64 / (NODES - 1) as f64).sinh())
                    .collect()
            }
        };
        let psi: Vec<f64> = raw
            .into_iter()
            .filter(|&s| {
                let normal = |x: f64| x > 1e-290 && x < 1e290;
                let g = self.integrand(s);
                let base = match self.kind {
                    Kind::Psi => self.nl.f(s),
                    Kind::Phi => self.nl.big_f(s),
                };
                normal(g) && normal(base)
            })
            .collect();
        if psi.len() < 8 {
            return Err(Error::Integration("transform integrand has no usable range".into()));
        }
        let n = psi.len();
        let decay = match self.kind {
            Kind::Psi => self.nl.inverse_decay(),
            Kind::Phi => self.nl.energy_decay(),
        };
        let mut t = vec![0.0; n];
        t[n - 1] = quad::integrate_tail(|s| self.integrand(s), psi[n - 1], decay, NODE_TOL)?.value;
        for i in (0..n - 1).rev() {
            let piece = quad::integrate(|s| self.integrand(s), psi[i], psi[i + 1], NODE_TOL)?;
            t[i] = t[i + 1] + piece.value;
        }
        let mut keep_psi = Vec::with_capacity(n);
        let mut keep_t = Vec::with_capacity(n);
        for i in 0..n {
            if t[i].is_finite() && t[i] > 0.0 && keep_t.last().map_or(true, |&p: &f64| t[i] < p) {
                keep_psi.push(psi[i]);
                keep_t.push(t[i]);
            }
        }
        self.psi_nodes = keep_psi;
        self.t_nodes = keep_t;
        Ok(())
    }

    fn closed_value(&self, t: f64) -> f64 {
        let k = self.nl.k() as f64;
        match (self.nl.family(), self.kind) {
            (Family::Power { gamma }, Kind::Psi) => ((gamma - k) * t / k).powf(k / (k - gamma)),
            (Family::Exponential, Kind::Psi) => -k * (t / k).ln(),
            (Family::Power { gamma }, Kind::Phi) => {
                let q = (gamma + 1.0) / (k + 1.0);
                let a = ((k + 1.0) / (gamma + 1.0)).powf(-1.0 / (k + 1.0));
                (t * (q - 1.0) / a).powf(1.0 / (1.0 - q))
            }
            (Family::Exponential, Kind::Phi) => {
                -(k + 1.0) * (t / (k + 1.0).powf(k / (k + 1.0))).ln()
            }
            _ => unreachable!("closed forms exist only for powers and the exponential"),
        }
    }

    fn value(&self, t: f64) -> Result<f64> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Domain(format!("transform argument {t} must be positive")));
        }
        if self.closed_form {
            return Ok(self.closed_value(t));
        }
        let n = self.t_nodes.len();
        let (t_max, t_min) = (self.t_nodes[0], self.t_nodes[n - 1]);
        if t > t_max || t < t_min {
            let suggestion = if t > t_max { t_max } else { t_min };
            return Err(Error::Range { t, suggestion });
        }
        // Cell with t_nodes[i] >= t >= t_nodes[i + 1].
        let i = self.t_nodes.partition_point(|&x| x >= t).saturating_sub(1).min(n - 2);
        let (p0, p1) = (self.psi_nodes[i], self.psi_nodes[i + 1]);
        let (t0, t1) = (self.t_nodes[i], self.t_nodes[i + 1]);
        if t == t0 {
            return Ok(p0);
        }
        if t == t1 {
            return Ok(p1);
        }
        let s = (t.ln() - t0.ln()) / (t1.ln() - t0.ln());
        let mut psi = if p0 > 0.0 {
            (p0.ln() + s * (p1.ln() - p0.ln())).exp()
        } else {
            p0 + s * (p1 - p0)
        };
        let (mut lo, mut hi) = (p0, p1);
        for _ in 0..60 {
            let resid = t1 + quad::integrate(|x| self.integrand(x), psi, p1, NODE_TOL)?.value - t;
            if resid.abs() <= 1e-15 * t {
                break;
            }
            // resid decreases in psi.
            if resid > 0.0 {
                lo = psi;
            } else {
                hi = psi;
            }
            let step = resid / self.integrand(psi);
            if step.abs() <= 4.0 * f64::EPSILON * psi.abs().max(1e-300) {
                psi += step;
                break;
            }
            let mut next = psi + step;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            psi = next;
            if hi - lo <= 2.0 * f64::EPSILON * psi.abs() {
                break;
            }
        }
        Ok(psi)
    }
}

/// `ψ` for a nonlinearity satisfying the inverse Keller–Osserman condition.
#[derive(Debug, Clone)]
pub struct PsiTransform(Inverse);

impl PsiTransform {
    /// Uses the closed form for powers and the exponential.
    pub fn new(nl: &Nonlinearity) -> Result<Self> {
        Inverse::build(nl, Kind::Psi, true).map(PsiTransform)
    }

    /// Always inverts numerically, whatever the family.
    pub fn numeric(nl: &Nonlinearity) -> Result<Self> {
        Inverse::build(nl, Kind::Psi, false).map(PsiTransform)
    }

    pub fn is_closed_form(&self) -> bool {
        self.0.closed_form
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.0.nl
    }

    pub fn psi(&self, t: f64) -> Result<f64> {
        self.0.value(t)
    }

    /// `ψ′ = −f(ψ)^{1/k}` and `ψ″ = (1/k) f(ψ)^{(2−k)/k} f′(ψ)`.
    pub fn derivatives(&self, t: f64) -> Result<Derivatives> {
        let value = self.psi(t)?;
        Ok(self.derivatives_at_value(value))
    }

    pub fn derivatives_at_value(&self, psi: f64) -> Derivatives {
        let nl = &self.0.nl;
        let k = nl.k() as f64;
        let f = nl.f(psi);
        Derivatives {
            value: psi,
            first: -f.powf(1.0 / k),
            second: f.powf((2.0 - k) / k) * nl.df(psi) / k,
        }
    }

    /// `Ψ(t) = −tψ″(t)/ψ′(t)`.
    pub fn big_psi(&self, t: f64) -> Result<f64> {
        let d = self.derivatives(t)?;
        Ok(-t * d.second / d.first)
    }

    /// `Ψ(t) = (1/k) f(ψ)^{(1−k)/k} f′(ψ) t`, the same quantity written
    /// without derivatives of `ψ`.
    pub fn big_psi_direct(&self, t: f64) -> Result<f64> {
        let psi = self.psi(t)?;
        Ok(self.big_psi_at_value(psi, t))
    }

    pub fn big_psi_at_value(&self, psi: f64, t: f64) -> f64 {
        let nl = &self.0.nl;
        let k = nl.k() as f64;
        nl.f(psi).powf((1.0 - k) / k) * nl.df(psi) * t / k
    }
}

/// `φ` for a nonlinearity satisfying the energy Keller–Osserman condition.
#[derive(Debug, Clone)]
pub struct PhiTransform(Inverse);

impl PhiTransform {
    pub fn new(nl: &Nonlinearity) -> Result<Self> {
        Inverse::build(nl, Kind::Phi, true).map(PhiTransform)
    }

    pub fn numeric(nl: &Nonlinearity) -> Result<Self> {
        Inverse::build(nl, Kind::Phi, false).map(PhiTransform)
    }

    pub fn is_closed_form(&self) -> bool {
        self.0.closed_form
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.0.nl
    }

    pub fn phi(&self, t: f64) -> Result<f64> {
        self.0.value(t)
    }

    /// `φ′ = −((k+1)F(φ))^{1/(k+1)}` and `φ″ = ((k+1)F(φ))^{(1−k)/(k+1)} f(φ)`.
    pub fn derivatives(&self, t: f64) -> Result<Derivatives> {
        let value = self.phi(t)?;
        Ok(self.derivatives_at_value(value))
    }

    pub fn derivatives_at_value(&self, phi: f64) -> Derivatives {
        let nl = &self.0.nl;
        let k = nl.k() as f64;
        let e = (k + 1.0) * nl.big_f(phi);
        Derivatives {
            value: phi,
            first: -e.powf(1.0 / (k + 1.0)),
            second: e.powf((1.0 - k) / (k + 1.0)) * nl.f(phi),
        }
    }

    /// `Φ(t) = −φ′(t)/(tφ″(t))`.
    pub fn big_phi(&self, t: f64) -> Result<f64> {
        let d = self.derivatives(t)?;
        Ok(-d.first / (t * d.second))
    }

    pub fn big_phi_at_value(&self, phi: f64, t: f64) -> f64 {
        let d = self.derivatives_at_value(phi);
        -d.first / (t * d.second)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    fn fd(g: &dyn Fn(f64) -> f64, t: f64) -> f64 {
        let h = 1e-4 * t;
        (g(t - 2.0 * h) - 8.0 * g(t - h) + 8.0 * g(t + h) - g(t + 2.0 * h)) / (12.0 * h)
    }

    #[test]
    fn numeric_inverse_converges_inside_every_cell() {
        for k in 1..=3 {
            let nl = Nonlinearity::exponential(k).unwrap();
            let (psi, psi_n) = (PsiTransform::new(&nl).unwrap(), PsiTransform::numeric(&nl).unwrap());
            let (phi, phi_n) = (PhiTransform::new(&nl).unwrap(), PhiTransform::numeric(&nl).unwrap());
            for i in 0..400 {
                let t = 10f64.powf(-7.0 + i as f64 * 0.02);
                let a = psi.psi(t).unwrap();
                assert!((psi_n.psi(t).unwrap() - a).abs() <= 1e-10 * a.abs().max(1.0), "k {k} t {t}");
                let b = phi.phi(t).unwrap();
                assert!((phi_n.phi(t).unwrap() - b).abs() <= 1e-10 * b.abs().max(1.0), "k {k} t {t}");
            }
        }
    }

    #[test]
    fn closed_form_examples() {
        let cube = Nonlinearity::power(3.0, 1).unwrap();
        assert!(rel(PsiTransform::new(&cube).unwrap().psi(0.5).unwrap(), 1.0) < 1e-15);
        let e2 = Nonlinearity::exponential(2).unwrap();
        assert!(PsiTransform::new(&e2).unwrap().psi(2.0).unwrap().abs() < 1e-15);
        let p4 = Nonlinearity::power(4.0, 2).unwrap();
        assert!(rel(PsiTransform::new(&p4).unwrap().psi(10.0).unwrap(), 0.1) < 1e-15);
        let phi = PhiTransform::new(&cube).unwrap();
        assert!(rel(phi.phi(2f64.sqrt()).unwrap(), 1.0) < 1e-15);
    }

    #[test]
    fn derivative_examples() {
        let cube = Nonlinearity::power(3.0, 1).unwrap();
        let d = PsiTransform::new(&cube).unwrap().derivatives(0.5).unwrap();
        assert!(rel(d.first, -1.0) < 1e-15 && rel(d.second, 3.0) < 1e-14);
        let e1 = Nonlinearity::exponential(1).unwrap();
        let d = PsiTransform::new(&e1).unwrap().derivatives(1.0).unwrap();
        assert_eq!((d.value, d.first, d.second), (0.0, -1.0, 1.0));
    }

    #[test]
    fn numeric_matches_closed_form() {
        for nl in [
            Nonlinearity::power(3.0, 1).unwrap(),
            Nonlinearity::power(4.0, 2).unwrap(),
            Nonlinearity::exponential(2).unwrap(),
        ] {
            let exact = PsiTransform::new(&nl).unwrap();
            let num = PsiTransform::numeric(&nl).unwrap();
            let pexact = PhiTransform::new(&nl).unwrap();
            let pnum = PhiTransform::numeric(&nl).unwrap();
            for t in [1e-3, 0.07, 0.5, 3.0, 40.0] {
                let a = exact.psi(t).unwrap();
                let b = num.psi(t).unwrap();
                assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "{nl:?} t={t} {a} {b}");
                let a = pexact.phi(t).unwrap();
                let b = pnum.phi(t).unwrap();
                assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "{nl:?} t={t} {a} {b}");
            }
        }
    }

    #[test]
    fn numeric_derivative_consistency() {
        let nl = Nonlinearity::new(Family::NegativePowerTail { gamma: -2.0 }, 1).unwrap();
        let tr = PsiTransform::new(&nl).unwrap();
        assert!(!tr.is_closed_form());
        for t in [0.3, 1.1, 5.0] {
            let d = tr.derivatives(t).unwrap();
            let num = fd(&|s| tr.psi(s).unwrap(), t);
            assert!(rel(d.first, num) < 1e-7, "t={t}: {} vs {num}", d.first);
        }
    }

    #[test]
    fn big_psi_power_constant_and_formulas_agree() {
        let nl = Nonlinearity::power(3.0, 2).unwrap();
        let tr = PsiTransform::new(&nl).unwrap();
        for t in [0.01, 0.4, 9.0] {
            assert!(rel(tr.big_psi(t).unwrap(), 3.0) < 1e-13);
            assert!(rel(tr.big_psi(t).unwrap(), tr.big_psi_direct(t).unwrap()) < 1e-13);
        }
        let e = PsiTransform::new(&Nonlinearity::exponential(1).unwrap()).unwrap();
        assert!(rel(e.big_psi(1e-8).unwrap(), 1.0) < 1e-12);
    }

    #[test]
    fn phi_identity_and_ratio() {
        let nl = Nonlinearity::power(4.0, 2).unwrap();
        let tr = PhiTransform::new(&nl).unwrap();
        for t in [0.2, 1.0, 30.0] {
            let d = tr.derivatives(t).unwrap();
            let lhs = (-d.first).powi(1) * d.second;
            assert!(rel(lhs, nl.f(d.value)) < 1e-12);
            assert!(rel(tr.big_phi(t).unwrap(), 0.4) < 1e-12);
        }
    }

    #[test]
    fn round_trip_and_boundary_map() {
        let nl = Nonlinearity::new(Family::NegativePowerTail { gamma: -3.0 }, 2).unwrap();
        let tr = PsiTransform::new(&nl).unwrap();
        for t in [1e-4, 0.02, 0.9, 17.0] {
            let p = tr.psi(t).unwrap();
            let back = nl.inverse_tail(p).unwrap();
            assert!(rel(back, t) < 1e-8, "t={t}");
        }
        let vals: Vec<f64> = (1..=8).map(|j| tr.psi(10f64.powi(-j)).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn out_of_range_is_reported() {
        let nl = Nonlinearity::new(Family::NegativePowerTail { gamma: -2.0 }, 1).unwrap();
        let tr = PsiTransform::new(&nl).unwrap();
        assert!(matches!(tr.psi(1e300), Err(Error::Range { .. })));
    }
}
