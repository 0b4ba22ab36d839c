//! Dense least squares via Householder QR. Sized for the small windows used by the
//! polynomial-fit differentiator.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Pseudo-inverse `R^{-1} Q^T` of a full-column-rank `m x p` matrix (row-major rows),
/// returned as `p` rows of length `m`.
pub(crate) fn pseudo_inverse<T: Scalar>(rows: &[Vec<T>]) -> Result<Vec<Vec<T>>> {
    let m = rows.len();
    let p = rows.first().map_or(0, Vec::len);
    if p == 0 || m < p {
        return Err(Error::Config(format!(
            "least squares needs at least as many rows as columns (got {m} x {p})"
        )));
    }
    let mut a: Vec<Vec<T>> = rows.to_vec();
    // Q^T accumulated by applying the reflections to the identity.
    let mut qt: Vec<Vec<T>> = (0..m)
        .map(|i| (0..m).map(|j| if i == j { T::one() } else { T::zero() }).collect())
        .collect();

    for k in 0..p {
        let norm = (k..m).map(|i| a[i][k] * a[i][k]).sum::<T>().sqrt();
        if norm == T::zero() {
            continue;
        }
        let alpha = if a[k][k] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = (k..m).map(|i| a[i][k]).collect();
        v[0] -= alpha;
        let vnorm2: T = v.iter().map(|&x| x * x).sum();
        if vnorm2 == T::zero() {
            continue;
        }
        for j in k..p {
            let dot: T = (k..m).map(|i| v[i - k] * a[i][j]).sum();
            let s = (dot + dot) / vnorm2;
            for i in k..m {
                a[i][j] -= s * v[i - k];
            }
        }
        for j in 0..m {
            let dot: T = (k..m).map(|i| v[i - k] * qt[i][j]).sum();
            let s = (dot + dot) / vnorm2;
            for i in k..m {
                qt[i][j] -= s * v[i - k];
            }
        }
    }

    let rmax = (0..p).map(|i| a[i][i].abs()).fold(T::zero(), T::max);
    let floor = rmax * T::epsilon() * T::from_usize_lossy(m.max(p) * 4);
    for i in 0..p {
        if a[i][i].abs() <= floor {
            return Err(Error::Config(format!(
                "degenerate fit: design matrix is rank deficient (column {i})"
            )));
        }
    }

    // Solve R X = (Q^T)[0..p] by back substitution, one column of Q^T at a time.
    let mut x = vec![vec![T::zero(); m]; p];
    for col in 0..m {
        for i in (0..p).rev() {
            let mut acc = qt[i][col];
            for j in (i + 1)..p {
                acc -= a[i][j] * x[j][col];
            }
            x[i][col] = acc / a[i][i];
        }
    }
    Ok(x)
}
