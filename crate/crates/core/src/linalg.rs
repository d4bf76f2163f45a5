//! Small dense linear algebra over a generic scalar.

use crate::scalar::Scalar;

/// Solves `a x = b` by Gaussian elimination with partial pivoting.
///
/// Returns `None` when a pivot falls below `rel_pivot_tol` times the largest
/// entry of `a`.
pub fn solve<T: Scalar>(a: &[Vec<T>], b: &[T], rel_pivot_tol: T) -> Option<Vec<T>> {
    let n = b.len();
    let mut m: Vec<Vec<T>> = a.to_vec();
    let mut rhs = b.to_vec();
    let scale = m
        .iter()
        .flat_map(|r| r.iter())
        .fold(T::zero(), |acc, c| acc.max(c.abs()));
    if !(scale > T::zero()) {
        return None;
    }
    let floor = scale * rel_pivot_tol;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        if !(m[piv][col].abs() > floor) {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            if f.is_zero() {
                continue;
            }
            for k in col..n {
                let sub = f * m[col][k];
                m[row][k] = m[row][k] - sub;
            }
            rhs[row] = rhs[row] - f * rhs[col];
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for k in row + 1..n {
            acc = acc - m[row][k] * x[k];
        }
        x[row] = acc / m[row][row];
    }
    Some(x)
}

/// Determinant by LU with partial pivoting.
pub fn det<T: Scalar>(a: &[Vec<T>]) -> T {
    let n = a.len();
    let mut m: Vec<Vec<T>> = a.to_vec();
    let mut d = T::one();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        if m[piv][col].is_zero() {
            return T::zero();
        }
        if piv != col {
            m.swap(col, piv);
            d = -d;
        }
        d = d * m[col][col];
        for row in col + 1..n {
            let f = m[row][col] / m[col][col];
            for k in col..n {
                let sub = f * m[col][k];
                m[row][k] = m[row][k] - sub;
            }
        }
    }
    d
}

/// Coefficients `[1, c1, .., cn]` of `det(λI - A) = λⁿ + c1 λⁿ⁻¹ + .. + cn`
/// by the Faddeev–LeVerrier recurrence.
pub fn char_poly<T: Scalar>(a: &[Vec<T>]) -> Vec<T> {
    let n = a.len();
    let mut coeffs = vec![T::one()];
    // M_0 = 0, c_0 = 1; M_k = A M_{k-1} + c_{k-1} I; c_k = -tr(A M_k) / k
    let mut mk = vec![vec![T::zero(); n]; n];
    for k in 1..=n {
        let c_prev = coeffs[k - 1];
        let prod = matmul(a, &mk);
        for i in 0..n {
            for j in 0..n {
                mk[i][j] = prod[i][j] + if i == j { c_prev } else { T::zero() };
            }
        }
        let amk = matmul(a, &mk);
        let tr = (0..n).fold(T::zero(), |s, i| s + amk[i][i]);
        coeffs.push(-tr / T::lit(k as f64));
    }
    coeffs
}

pub fn matmul<T: Scalar>(a: &[Vec<T>], b: &[Vec<T>]) -> Vec<Vec<T>> {
    let n = a.len();
    let m = b.first().map_or(0, |r| r.len());
    let mut out = vec![vec![T::zero(); m]; n];
    for i in 0..n {
        for (k, brow) in b.iter().enumerate() {
            let aik = a[i][k];
            if aik.is_zero() {
                continue;
            }
            for j in 0..m {
                out[i][j] = out[i][j] + aik * brow[j];
            }
        }
    }
    out
}

pub fn matvec<T: Scalar>(a: &[Vec<T>], x: &[T]) -> Vec<T> {
    a.iter()
        .map(|row| row.iter().zip(x).fold(T::zero(), |s, (&r, &c)| s + r * c))
        .collect()
}
