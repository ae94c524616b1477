//! Brute-force dense linear algebra used as ground truth. Nothing here
//! shares code with the closed-form implementations it checks.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Determinant by LU with partial pivoting.
pub fn numeric_det(m: &DMatrix<Complex64>) -> Complex64 {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "determinant of a non-square matrix");
    let mut a = m.clone();
    let mut det = Complex64::new(1.0, 0.0);
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[(i, k)].norm().total_cmp(&a[(j, k)].norm()))
            .unwrap_or(k);
        if a[(p, k)].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if p != k {
            a.swap_rows(p, k);
            det = -det;
        }
        let pivot = a[(k, k)];
        det *= pivot;
        for i in k + 1..n {
            let f = a[(i, k)] / pivot;
            for j in k + 1..n {
                let v = a[(k, j)];
                a[(i, j)] -= f * v;
            }
        }
    }
    det
}

pub fn numeric_det_real(m: &DMatrix<f64>) -> f64 {
    numeric_det(&m.map(|v| Complex64::new(v, 0.0))).re
}

/// Transpose of the cofactor matrix, by Laplace expansion over column
/// subsets. No division, so it is exact in structure for singular input.
pub fn numeric_adjugate(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "adjugate of a non-square matrix");
    assert!(n <= 16, "adjugate oracle is exponential in the dimension");
    if n == 1 {
        return DMatrix::from_element(1, 1, 1.0);
    }
    let full: usize = (1 << n) - 1;
    let mut adj = DMatrix::zeros(n, n);
    let mut dp = vec![0.0f64; 1 << n];
    for removed in 0..n {
        let rows: Vec<usize> = (0..n).filter(|&r| r != removed).collect();
        dp.iter_mut().for_each(|v| *v = 0.0);
        dp[0] = 1.0;
        let mut masks: Vec<usize> = (1..=full).filter(|m| (m.count_ones() as usize) < n).collect();
        masks.sort_by_key(|m| m.count_ones());
        for mask in masks {
            let k = mask.count_ones() as usize;
            let row = rows[k - 1];
            let mut acc = 0.0;
            for c in 0..n {
                if mask & (1 << c) == 0 {
                    continue;
                }
                let pos = (mask & ((1 << c) - 1)).count_ones() as usize;
                let sign = if (k - 1 + pos) % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * m[(row, c)] * dp[mask ^ (1 << c)];
            }
            dp[mask] = acc;
        }
        for c in 0..n {
            let minor = dp[full ^ (1 << c)];
            let sign = if (removed + c) % 2 == 0 { 1.0 } else { -1.0 };
            adj[(c, removed)] = sign * minor;
        }
    }
    adj
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations,
/// ascending.
pub fn numeric_eig_sym(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut a = m.clone();
    let total: f64 = a.iter().map(|v| v * v).sum();
    for _ in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off <= 1e-32 * total {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Singular values (descending) and right singular vectors of a real
/// matrix, by one-sided Jacobi rotations.
pub fn numeric_svd(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let (rows, n) = m.shape();
    let mut u = m.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _ in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = 0.0;
                for i in 0..rows {
                    alpha += u[(i, p)] * u[(i, p)];
                    beta += u[(i, q)] * u[(i, q)];
                    gamma += u[(i, p)] * u[(i, q)];
                }
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..rows {
                    let up = u[(i, p)];
                    let uq = u[(i, q)];
                    u[(i, p)] = c * up - s * uq;
                    u[(i, q)] = s * up + c * uq;
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<(f64, usize)> = (0..n).map(|j| (u.column(j).norm(), j)).collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0));
    let sv = order.iter().map(|o| o.0).collect();
    let vs = DMatrix::from_fn(n, n, |i, j| v[(i, order[j].1)]);
    (sv, vs)
}

/// `sigma_max / sigma_min`, infinite for singular input.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let (sv, _) = numeric_svd(m);
    let lo = *sv.last().unwrap_or(&0.0);
    if lo == 0.0 {
        f64::INFINITY
    } else {
        sv[0] / lo
    }
}

/// Right singular vectors with `sigma <= tol * sigma_max`.
pub fn numeric_kernel(m: &DMatrix<f64>, tol: f64) -> Vec<DVector<f64>> {
    let (sv, v) = numeric_svd(m);
    let smax = sv.first().copied().unwrap_or(0.0);
    (0..sv.len())
        .filter(|&j| sv[j] <= tol * smax)
        .map(|j| v.column(j).into_owned())
        .collect()
}

/// Eigenvalues of a general real matrix via the complex Schur form.
pub fn numeric_eig_general(m: &DMatrix<f64>) -> Option<Vec<Complex64>> {
    let schur = m.clone().try_schur(1e-15, 10_000)?;
    Some(schur.complex_eigenvalues().iter().copied().collect())
}
