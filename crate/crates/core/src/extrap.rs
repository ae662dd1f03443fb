//! Sequence acceleration: Richardson tableaux, iterated Aitken and Wynn's
//! rho algorithm, plus a limit estimator that picks the most self-consistent.

use crate::error::{Error, Result};

/// A limit estimate with an error bar.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// Richardson extrapolation of samples taken at `h_j = h_0 · ratio^(-j)` for an
/// error expansion in the given powers of `h`. Returns the last diagonal entry
/// and the gap to the previous one as the error bar.
pub fn richardson(values: &[f64], ratio: f64, powers: &[f64]) -> Result<Estimate> {
    if values.len() < 2 {
        return Err(Error::Argument("Richardson needs at least two samples".into()));
    }
    let mut col: Vec<f64> = values.to_vec();
    let mut diag = vec![*col.last().unwrap()];
    for &p in powers {
        if col.len() < 2 {
            break;
        }
        let fac = ratio.powf(p) - 1.0;
        col = col
            .windows(2)
            .map(|w| w[1] + (w[1] - w[0]) / fac)
            .collect();
        diag.push(*col.last().unwrap());
    }
    let value = *diag.last().unwrap();
    let error = if col.len() >= 2 {
        (col[col.len() - 1] - col[col.len() - 2]).abs()
    } else {
        (diag[diag.len() - 1] - diag[diag.len() - 2]).abs()
    };
    if !value.is_finite() {
        return Err(Error::Estimation {
            message: "non-finite Richardson value".into(),
            sequence: values.to_vec(),
        });
    }
    Ok(Estimate { value, error })
}

/// One sweep of the three-term Aitken transform.
pub fn aitken(values: &[f64]) -> Vec<f64> {
    values
        .windows(3)
        .map(|w| {
            let d1 = w[1] - w[0];
            let d2 = w[2] - w[1];
            let den = d2 - d1;
            if den == 0.0 || !den.is_finite() {
                w[2]
            } else {
                w[2] - d2 * d2 / den
            }
        })
        .collect()
}

/// Last entry of every column of the iterated Aitken table.
pub fn iterated_aitken(values: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    let mut col = values.to_vec();
    while col.len() >= 3 {
        col = aitken(&col);
        out.push(*col.last().unwrap());
    }
    out
}

/// Even-column tails of Wynn's rho algorithm with abscissae `x_n = n + 1`;
/// exact for sequences rational in `n`, the typical logarithmic convergence.
pub fn wynn_rho(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut prev = vec![0.0; n + 1];
    let mut cur: Vec<f64> = values.to_vec();
    let mut out = Vec::new();
    let mut order = 0usize;
    while cur.len() >= 2 {
        let next: Vec<f64> = (0..cur.len() - 1)
            .map(|i| {
                let den = cur[i + 1] - cur[i];
                let dx = (order + 1) as f64;
                if den == 0.0 {
                    f64::INFINITY
                } else {
                    prev[i + 1] + dx / den
                }
            })
            .collect();
        order += 1;
        prev = cur;
        cur = next;
        if order % 2 == 0 {
            if let Some(&v) = cur.last() {
                if v.is_finite() {
                    out.push(v);
                } else {
                    break;
                }
            }
        }
    }
    out
}

fn consistency(candidates: &[f64]) -> Option<Estimate> {
    match candidates.len() {
        0 => None,
        1 => None,
        n => {
            let value = candidates[n - 1];
            let error = (candidates[n - 1] - candidates[n - 2]).abs();
            if value.is_finite() && error.is_finite() {
                Some(Estimate { value, error })
            } else {
                None
            }
        }
    }
}

/// Estimates the limit of a sequence by the more self-consistent of iterated
/// Aitken and Wynn rho; fails unless the accelerated values agree within
/// `rel_tol · max(|limit|, floor)`.
pub fn limit(values: &[f64], rel_tol: f64, floor: f64) -> Result<Estimate> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Estimation {
            message: "sequence contains non-finite terms".into(),
            sequence: values.to_vec(),
        });
    }
    let n = values.len();
    if n >= 2 && values[n - 1] == values[n - 2] {
        return Ok(Estimate { value: values[n - 1], error: 0.0 });
    }
    if n >= 4 {
        let d: Vec<f64> = values[n - 4..].windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        let scale = values[n - 4..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let noise = 1e-12 * scale;
        if d.iter().all(|&x| x <= noise) {
            return Ok(Estimate { value: values[n - 1], error: d.iter().fold(0.0f64, |m, &x| m.max(x)) });
        }
        if d[2] > d[1] && d[1] > d[0] {
            return Err(Error::Estimation {
                message: "increments grow: the sequence diverges".into(),
                sequence: values.to_vec(),
            });
        }
    }
    let mut a = vec![values[n - 1]];
    a.extend(iterated_aitken(values));
    let mut r = vec![values[n - 1]];
    r.extend(wynn_rho(values));
    let best = [consistency(&a), consistency(&r)]
        .into_iter()
        .flatten()
        .min_by(|x, y| x.error.total_cmp(&y.error));
    match best {
        Some(e) if e.error <= rel_tol * e.value.abs().max(floor) => Ok(e),
        Some(e) => Err(Error::Estimation {
            message: format!(
                "accelerated values disagree: estimate {:e} with spread {:e}",
                e.value, e.error
            ),
            sequence: values.to_vec(),
        }),
        None => Err(Error::Estimation {
            message: "too few terms to accelerate".into(),
            sequence: values.to_vec(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_removes_linear_and_quadratic_error() {
        let vals: Vec<f64> = (0..5)
            .map(|j| {
                let h = 0.1 / 2f64.powi(j);
                3.0 + 2.0 * h - 5.0 * h * h
            })
            .collect();
        let e = richardson(&vals, 2.0, &[1.0, 2.0]).unwrap();
        assert!((e.value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rounding_level_jitter_is_converged() {
        let vals = [1.0, 1.0, 1.0, 1.0000000000000002, 1.0, 0.9999999999999987, 1.0000000000000002, 1.0000000000000027];
        let e = limit(&vals, 1e-6, 1.0).unwrap();
        assert!((e.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn aitken_is_exact_for_geometric_error() {
        let vals: Vec<f64> = (0..6).map(|j| 1.5 + 0.3 * 0.5f64.powi(j)).collect();
        let e = limit(&vals, 1e-10, 1.0).unwrap();
        assert!((e.value - 1.5).abs() < 1e-12);
    }

    #[test]
    fn rho_handles_logarithmic_convergence() {
        let vals: Vec<f64> = (0..10).map(|j| 2.0 - 1.0 / (3.0 + 0.7 * j as f64)).collect();
        let e = limit(&vals, 1e-8, 1.0).unwrap();
        assert!((e.value - 2.0).abs() < 1e-9, "{e:?}");
    }

    #[test]
    fn divergent_sequence_fails() {
        let vals: Vec<f64> = (0..10).map(|j| -(2f64.powi(j))).collect();
        assert!(limit(&vals, 1e-7, 1.0).is_err());
    }
}
