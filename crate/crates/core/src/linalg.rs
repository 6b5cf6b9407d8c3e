//! Small dense linear algebra helpers. Dimensions here are tiny (n <= 3,
//! frames up to 9x9 states), so plain `Vec<f64>` row-major storage is enough.

use crate::error::{GeoError, Result};

/// Euclidean norm of a chart-component vector.
pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|x| x * s).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    norm(&sub(a, b))
}

/// Row-major n x n matrix times vector.
pub fn mat_vec(m: &[f64], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    debug_assert_eq!(m.len(), n * n);
    let mut out = vec![0.0; n];
    for i in 0..n {
        let row = &m[i * n..(i + 1) * n];
        out[i] = row.iter().zip(v).map(|(a, b)| a * b).sum();
    }
    out
}

pub fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

/// Solve `A x = b` by Gaussian elimination with partial pivoting.
/// `a` is row-major and consumed as scratch.
pub fn solve(mut a: Vec<f64>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    debug_assert_eq!(a.len(), n * n);
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if a[r * n + col].abs() > a[piv * n + col].abs() {
                piv = r;
            }
        }
        if a[piv * n + col].abs() < 1e-300 {
            return Err(GeoError::Numerics("singular Jacobian in linear solve".into()));
        }
        if piv != col {
            for c in 0..n {
                a.swap(col * n + c, piv * n + c);
            }
            b.swap(col, piv);
        }
        let d = a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] / d;
            if f == 0.0 {
                continue;
            }
            for c in col..n {
                a[r * n + c] -= f * a[col * n + c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for c in i + 1..n {
            s -= a[i * n + c] * x[c];
        }
        x[i] = s / a[i * n + i];
    }
    Ok(x)
}

/// Smallest and largest singular values of a row-major `rows x cols` matrix,
/// via cyclic Jacobi diagonalization of A^T A. Matrices here are at most
/// 6 x 6, so no scaling care beyond symmetry is needed.
pub fn singular_extremes(a: &[f64], rows: usize, cols: usize) -> (f64, f64) {
    let m = cols;
    debug_assert_eq!(a.len(), rows * cols);
    let mut s = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            s[i * m + j] = (0..rows).map(|k| a[k * cols + i] * a[k * cols + j]).sum();
        }
    }
    let scale = (0..m).fold(0.0_f64, |acc, i| acc.max(s[i * m + i].abs())).max(1e-300);
    for _sweep in 0..60 {
        let mut off: f64 = 0.0;
        for p in 0..m {
            for q in p + 1..m {
                off = off.max(s[p * m + q].abs());
            }
        }
        if off < 1e-15 * scale {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = s[p * m + q];
                if apq.abs() < 1e-18 * scale {
                    continue;
                }
                let theta = (s[q * m + q] - s[p * m + p]) / (2.0 * apq);
                let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..m {
                    let skp = s[k * m + p];
                    let skq = s[k * m + q];
                    s[k * m + p] = c * skp - sn * skq;
                    s[k * m + q] = sn * skp + c * skq;
                }
                for k in 0..m {
                    let spk = s[p * m + k];
                    let sqk = s[q * m + k];
                    s[p * m + k] = c * spk - sn * sqk;
                    s[q * m + k] = sn * spk + c * sqk;
                }
            }
        }
    }
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for i in 0..m {
        let d = s[i * m + i].max(0.0).sqrt();
        lo = lo.min(d);
        hi = hi.max(d);
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_2x2() {
        let a = vec![2.0, 1.0, 1.0, 3.0];
        let x = solve(a, vec![5.0, 10.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-12);
        assert!((x[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn solve_singular_errors() {
        let a = vec![1.0, 2.0, 2.0, 4.0];
        assert!(solve(a, vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn mat_vec_identity() {
        let m = identity(3);
        let v = vec![1.0, -2.0, 0.5];
        assert_eq!(mat_vec(&m, &v), v);
    }

    #[test]
    fn singular_extremes_diagonal() {
        let a = vec![3.0, 0.0, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0]; // 3x3 rank 2
        let (lo, hi) = singular_extremes(&a, 3, 3);
        assert!((hi - 3.0).abs() < 1e-12);
        assert!(lo.abs() < 1e-12);
    }

    #[test]
    fn singular_extremes_rotation_scaled() {
        // rotation by 0.3 times diag(2, 0.25): singular values are 2 and 0.25
        let (c, s) = (0.3_f64.cos(), 0.3_f64.sin());
        let a = vec![2.0 * c, -0.25 * s, 2.0 * s, 0.25 * c];
        let (lo, hi) = singular_extremes(&a, 2, 2);
        assert!((hi - 2.0).abs() < 1e-12, "{hi}");
        assert!((lo - 0.25).abs() < 1e-12, "{lo}");
    }
}
