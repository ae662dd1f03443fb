//! Bracketed scalar root finding.

use crate::error::{Error, Result};

/// Brent's method on a sign-changing bracket `[a, b]`.
pub fn brent<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    mut a: f64,
    mut b: f64,
    xtol: f64,
    max_iter: usize,
) -> Result<f64> {
    let mut fa = f(a)?;
    let mut fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Bracketing(format!(
            "no sign change on [{a:e}, {b:e}] (f = {fa:e}, {fb:e})"
        )));
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
    }
    Err(Error::Bracketing(format!(
        "Brent iteration budget exhausted near {b:e}"
    )))
}

/// Plain bisection until `|f| <= ftol` or the bracket collapses.
pub fn bisect<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    ftol: f64,
    max_iter: usize,
) -> Result<(f64, f64)> {
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo.abs() <= ftol {
        return Ok((lo, flo));
    }
    if fhi.abs() <= ftol {
        return Ok((hi, fhi));
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Bracketing(format!(
            "no sign change on [{lo:e}, {hi:e}] (f = {flo:e}, {fhi:e})"
        )));
    }
    let mut best = (lo, flo);
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid)?;
        if fm.abs() < best.1.abs() {
            best = (mid, fm);
        }
        if fm.abs() <= ftol || mid <= lo || mid >= hi {
            return Ok((mid, fm));
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(best)
}

/// Grows `[lo, hi]` geometrically around a positive starting point until `f`
/// changes sign; `f` is assumed monotone.
pub fn expand_bracket<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    start: f64,
    factor: f64,
    max_steps: usize,
) -> Result<(f64, f64)> {
    let f0 = f(start)?;
    if f0 == 0.0 {
        return Ok((start, start));
    }
    let mut lo = start;
    let mut hi = start;
    for _ in 0..max_steps {
        lo /= factor;
        hi *= factor;
        let flo = f(lo)?;
        if flo.signum() != f0.signum() {
            return Ok((lo, lo * factor));
        }
        let fhi = f(hi)?;
        if fhi.signum() != f0.signum() {
            return Ok((hi / factor, hi));
        }
    }
    Err(Error::Bracketing(format!(
        "no sign change within [{lo:e}, {hi:e}] after {max_steps} expansions"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn brent_finds_cubic_root() {
        let x = brent(|x| Ok(x * x * x - 2.0), 0.0, 2.0, 1e-15, 100).unwrap();
        assert!((x - 2f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn bisection_meets_residual() {
        let (x, fx) = bisect(|x| Ok(x.exp() - 3.0), 0.0, 3.0, 1e-12, 200).unwrap();
        assert!(fx.abs() <= 1e-12);
        assert!((x - 3f64.ln()).abs() < 1e-11);
    }

    #[test]
    fn expansion_brackets_far_root() {
        let (a, b) = expand_bracket(|x| Ok(x - 1e6), 1.0, 2.0, 60).unwrap();
        assert!(a <= 1e6 && 1e6 <= b);
    }

    #[test]
    fn missing_sign_change_is_reported() {
        assert!(brent(|x| Ok(x * x + 1.0), -1.0, 1.0, 1e-12, 50).is_err());
    }
}
