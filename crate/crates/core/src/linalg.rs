//! Small dense linear algebra on `Vec<f64>` rows.

use alloc::vec;
use alloc::vec::Vec;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

pub fn scaled(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub fn normalized(a: &[f64]) -> Option<Vec<f64>> {
    let n = norm(a);
    if n > 0.0 && n.is_finite() {
        Some(scaled(a, 1.0 / n))
    } else {
        None
    }
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let mut d = 1.0;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        if m[piv][col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            m.swap(piv, col);
            d = -d;
        }
        let p = m[col][col];
        d *= p;
        for r in col + 1..n {
            let f = m[r][col] / p;
            if f != 0.0 {
                for c in col..n {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    d
}

/// Singular values of a dense `rows x cols` matrix, sorted descending,
/// by one-sided Jacobi rotations on the columns of the shorter orientation.
pub fn singular_values(rows: &[Vec<f64>]) -> Vec<f64> {
    let r = rows.len();
    if r == 0 {
        return Vec::new();
    }
    let c = rows[0].len();
    // Work on the matrix whose column count is min(r, c): orthogonalize its
    // columns; the column norms are then the singular values.
    let (k, len) = (r.min(c), r.max(c));
    let mut cols: Vec<Vec<f64>> = if r <= c {
        // columns of the c x r transpose are the rows
        rows.to_vec()
    } else {
        (0..c)
            .map(|j| rows.iter().map(|row| row[j]).collect())
            .collect()
    };
    debug_assert!(cols.iter().all(|v| v.len() == len));
    for _sweep in 0..60 {
        let mut off = 0.0f64;
        for p in 0..k {
            for q in p + 1..k {
                let alpha = dot(&cols[p], &cols[p]);
                let beta = dot(&cols[q], &cols[q]);
                let gamma = dot(&cols[p], &cols[q]);
                if gamma == 0.0 {
                    continue;
                }
                off = off.max(gamma.abs() / libm::sqrt(alpha * beta));
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
                let cs = 1.0 / libm::sqrt(1.0 + t * t);
                let sn = cs * t;
                let (lo, hi) = cols.split_at_mut(q);
                let (a, b) = (&mut lo[p], &mut hi[0]);
                for i in 0..len {
                    let x = a[i];
                    let y = b[i];
                    a[i] = cs * x - sn * y;
                    b[i] = sn * x + cs * y;
                }
            }
        }
        if off < 1e-15 {
            break;
        }
    }
    let mut sv: Vec<f64> = cols.iter().map(|v| norm(v)).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Numerical rank: singular values above `tol * max(1, sigma_max)`.
pub fn rank(rows: &[Vec<f64>], tol: f64) -> usize {
    let sv = singular_values(rows);
    let scale = sv.first().copied().unwrap_or(0.0).max(1.0);
    sv.iter().filter(|&&s| s > tol * scale).count()
}

/// Normal vector orthogonal to `d - 1` vectors in `R^d` (generalized cross
/// product via cofactor expansion). Zero if the vectors are dependent.
pub fn cofactor_normal(vectors: &[&[f64]]) -> Vec<f64> {
    let d = vectors.len() + 1;
    let mut out = vec![0.0; d];
    for (i, o) in out.iter_mut().enumerate() {
        let minor: Vec<Vec<f64>> = vectors
            .iter()
            .map(|v| {
                v.iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &x)| x)
                    .collect()
            })
            .collect();
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        *o = sign * det(&minor);
    }
    out
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    if k == 0 {
        out.push(Vec::new());
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
