//! Elementary symmetric polynomials, k-Hessian values of symmetric matrices,
//! Gårding cone membership and principal-submatrix quadratic-form sums.

use crate::error::{Error, Result};

/// Binomial coefficient as a float; zero when `k > n`.
pub fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c.round()
}

/// Dense symmetric matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Builds a matrix from rows, rejecting asymmetric or non-finite input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Argument("matrix must be square and non-empty".into()));
        }
        let data: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::from_vec(n, data)
    }

    /// Builds a matrix from row-major data.
    pub fn from_vec(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Argument(format!("expected {} entries, got {}", n * n, data.len())));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::Argument("matrix entries must be finite".into()));
        }
        let scale = data.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
        for i in 0..n {
            for j in 0..i {
                if (data[i * n + j] - data[j * n + i]).abs() > 1e-12 * scale {
                    return Err(Error::Argument(format!("matrix is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(SymMatrix { n, data })
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut data = vec![0.0; n * n];
        for (i, &x) in d.iter().enumerate() {
            data[i * n + i] = x;
        }
        SymMatrix { n, data }
    }

    pub fn scaled(&self, s: f64) -> Self {
        SymMatrix { n: self.n, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }
}

/// `S_k` of a vector by the recursive product expansion
/// `prod_i (1 + λ_i z)`, which avoids both subset enumeration and the
/// cancellation of the Newton–Girard power sums.
pub fn elem_sym(values: &[f64], k: usize) -> Result<f64> {
    if k == 0 || k > values.len() {
        return Err(Error::Argument(format!(
            "order {k} outside 1..={}",
            values.len()
        )));
    }
    Ok(elem_sym_all(values)[k])
}

/// All elementary symmetric polynomials `S_0 = 1, S_1, …, S_N`.
pub fn elem_sym_all(values: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; values.len() + 1];
    e[0] = 1.0;
    for (i, &x) in values.iter().enumerate() {
        for j in (1..=i + 1).rev() {
            e[j] += x * e[j - 1];
        }
    }
    e
}

/// Elementary symmetric functions of the eigenvalues by Leverrier–Faddeev:
/// `M_k = A·M_{k-1} + c_{k-1}·I`, `c_k = -tr(A·M_k)/k`, `S_k = (-1)^k c_k`.
fn leverrier(m: &SymMatrix) -> Vec<f64> {
    let n = m.n;
    let mul = |x: &[f64]| {
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for l in 0..n {
                let a = m.data[i * n + l];
                if a != 0.0 {
                    for j in 0..n {
                        out[i * n + j] += a * x[l * n + j];
                    }
                }
            }
        }
        out
    };
    let mut s = vec![0.0; n + 1];
    s[0] = 1.0;
    let mut mk = vec![0.0; n * n];
    let mut c_prev = 1.0;
    for k in 1..=n {
        let mut next = mul(&mk);
        for i in 0..n {
            next[i * n + i] += c_prev;
        }
        let amk = mul(&next);
        let c = -(0..n).map(|i| amk[i * n + i]).sum::<f64>() / k as f64;
        s[k] = if k % 2 == 0 { c } else { -c };
        c_prev = c;
        mk = next;
    }
    s
}

/// `S_k` of the eigenvalues of a symmetric matrix, via the characteristic
/// polynomial (no eigendecomposition).
pub fn sk_matrix(m: &SymMatrix, k: usize) -> Result<f64> {
    if k == 0 || k > m.n {
        return Err(Error::Argument(format!("order {k} outside 1..={}", m.n)));
    }
    Ok(sk_all(m)[k])
}

/// `S_0, …, S_N` of the eigenvalues of `m`.
pub fn sk_all(m: &SymMatrix) -> Vec<f64> {
    match diagonal_of(m) {
        Some(d) => elem_sym_all(&d),
        None => leverrier(m),
    }
}

fn diagonal_of(m: &SymMatrix) -> Option<Vec<f64>> {
    let n = m.n;
    for i in 0..n {
        for j in 0..n {
            if i != j && m.data[i * n + j] != 0.0 {
                return None;
            }
        }
    }
    Some((0..n).map(|i| m.data[i * n + i]).collect())
}

#[cfg(test)]
fn principal_minor_sums(m: &SymMatrix) -> Vec<f64> {
    let n = m.n;
    let mut out = vec![0.0; n + 1];
    out[0] = 1.0;
    for k in 1..=n {
        out[k] = subsets(n, k)
            .iter()
            .map(|s| determinant(&submatrix(m, s)))
            .sum();
    }
    out
}

/// True when the eigenvalues of `m` lie in the closed (or open, if `strict`)
/// cone `{S_i >= 0, i = 1..k}`.
pub fn is_k_convex(m: &SymMatrix, k: usize, strict: bool) -> Result<bool> {
    if k == 0 || k > m.n {
        return Err(Error::Argument(format!("order {k} outside 1..={}", m.n)));
    }
    let s = sk_all(m);
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    Ok((1..=k).all(|i| {
        let tol = 1e-13 * binom(m.n, i) * scale.powi(i as i32);
        if strict {
            s[i] > tol
        } else {
            s[i] >= -tol
        }
    }))
}

/// Cone membership for an explicit eigenvalue vector.
pub fn in_gamma_k(values: &[f64], k: usize, strict: bool) -> Result<bool> {
    if k == 0 || k > values.len() {
        return Err(Error::Argument(format!("order {k} outside 1..={}", values.len())));
    }
    let s = elem_sym_all(values);
    let scale = values.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    Ok((1..=k).all(|i| {
        let tol = 1e-13 * binom(values.len(), i) * scale.powi(i as i32);
        if strict {
            s[i] > tol
        } else {
            s[i] >= -tol
        }
    }))
}

/// All `k`-element subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        if idx[i] == i + n - k {
            return out;
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn submatrix(m: &SymMatrix, s: &[usize]) -> Vec<Vec<f64>> {
    s.iter()
        .map(|&i| s.iter().map(|&j| m.get(i, j)).collect())
        .collect()
}

/// Determinant by partial-pivot Gaussian elimination.
pub fn determinant(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut det = 1.0;
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))
            .unwrap();
        if m[p][c] == 0.0 {
            return 0.0;
        }
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        det *= m[c][c];
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for j in c..n {
                m[r][j] -= f * m[c][j];
            }
        }
    }
    det
}

fn solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))
            .unwrap();
        m.swap(p, c);
        for r in 0..n {
            if r != c {
                let f = m[r][c] / m[c][c];
                for j in c..=n {
                    m[r][j] -= f * m[c][j];
                }
            }
        }
    }
    (0..n).map(|i| m[i][n] / m[i][i]).collect()
}

/// `Σ_i det(M_i) · g_iᵀ M_i⁻¹ g_i` over all `k`-element principal index sets.
pub fn submatrix_form_sum(m: &SymMatrix, g: &[f64], k: usize) -> Result<f64> {
    let n = m.n;
    if g.len() != n {
        return Err(Error::Argument(format!("vector length {} != {}", g.len(), n)));
    }
    if k == 0 || k > n {
        return Err(Error::Argument(format!("order {k} outside 1..={n}")));
    }
    if n > 16 {
        return Err(Error::Argument(format!("dimension {n} exceeds 16")));
    }
    let guard = 1e-13 * m.max_abs().powi(k as i32);
    let mut total = 0.0;
    for s in subsets(n, k) {
        let sub = submatrix(m, &s);
        let det = determinant(&sub);
        if det.abs() <= guard || det == 0.0 {
            return Err(Error::Singular { subset: s, det });
        }
        let gs: Vec<f64> = s.iter().map(|&i| g[i]).collect();
        if gs.iter().all(|&x| x == 0.0) {
            continue;
        }
        let y = solve(&sub, &gs);
        let q: f64 = gs.iter().zip(&y).map(|(a, b)| a * b).sum();
        total += det * q;
    }
    Ok(total)
}
