//! Wave speeds, the eigenvalues of `A(U, xi)`, spectral projectors of `p2`
//! and SVD kernels.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use num_complex::Complex64;

use crate::background::BackgroundEval;
use crate::error::{Error, Result};
use crate::symbols::{build_w2, check_disjoint_hypotheses, MatrixSymbol, PhasePoint};

/// Relative threshold for `xi . H = 0` and `xi x H = 0`.
pub const EPS_C: f64 = 1e-12;

/// Default relative singular-value cutoff for [`kernel_basis`].
pub const KERNEL_TOL: f64 = 1e-10;

/// Speeds per unit `|xi|`, in the direction `xi / |xi|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveSpeeds {
    pub cs2: f64,
    pub cf2: f64,
    /// `xi_hat . H / sqrt(rho)`
    pub a: f64,
    /// `|xi_hat x H|^2 / rho`
    pub b2: f64,
    pub c2: f64,
    pub h2: f64,
}

impl WaveSpeeds {
    pub fn cs(&self) -> f64 {
        self.cs2.sqrt()
    }

    pub fn cf(&self) -> f64 {
        self.cf2.sqrt()
    }

    /// Alfven speed `|a|`.
    pub fn ca(&self) -> f64 {
        self.a.abs()
    }
}

pub fn wave_speeds(bg: &BackgroundEval, xi: &Vector3<f64>) -> Result<WaveSpeeds> {
    bg.check_physical()?;
    let n = xi.norm();
    if n == 0.0 {
        return Err(Error::ZeroFrequency);
    }
    let xh = xi / n;
    let sr = bg.rho.sqrt();
    let a = xh.dot(&bg.h) / sr;
    let b2 = xh.cross(&bg.h).norm_squared() / bg.rho;
    let c2 = bg.c2();
    let h2 = bg.h2();
    let cf2 = 0.5 * ((c2 + h2) + ((c2 - h2).powi(2) + 4.0 * b2 * c2).sqrt());
    // cs2 * cf2 = a^2 c^2 avoids the cancellation in the minus-root form
    let cs2 = (a * a * c2 / cf2).max(0.0);
    Ok(WaveSpeeds {
        cs2,
        cf2,
        a,
        b2,
        c2,
        h2,
    })
}

/// Roots `rho c_s^2(x, xi)` and `rho c_f^2(x, xi)` of
/// `X^2 - A X + B`, with `A = (gamma p + |H|^2)|xi|^2` and
/// `B = gamma p (H.xi)^2 |xi|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MagnetosonicRoots {
    pub sum: f64,
    pub product: f64,
    /// `A^2 - 4B`, written as a sum of squares.
    pub radical_arg: f64,
    pub slow: f64,
    pub fast: f64,
}

pub fn magnetosonic_roots(bg: &BackgroundEval, xi: &Vector3<f64>) -> MagnetosonicRoots {
    let gp = bg.gamma_p();
    let h2 = bg.h.norm_squared();
    let x2 = xi.norm_squared();
    let s = bg.h.dot(xi);
    let sum = (gp + h2) * x2;
    let product = gp * s * s * x2;
    let radical_arg = (gp - h2).powi(2) * x2 * x2 + 4.0 * gp * xi.cross(&bg.h).norm_squared() * x2;
    let root = radical_arg.sqrt();
    let fast = 0.5 * (sum + root);
    let slow = if fast > 0.0 { product / fast } else { 0.0 };
    MagnetosonicRoots {
        sum,
        product,
        radical_arg,
        slow,
        fast,
    }
}

/// `[q1, q2, q3]` with `det p2 = q1 q2 q3`.
pub fn characteristic_factors(pt: &PhasePoint, bg: &BackgroundEval) -> Result<[f64; 3]> {
    bg.check_physical()?;
    let r = magnetosonic_roots(bg, &pt.xi);
    let rt2 = bg.rho * pt.tau * pt.tau;
    let s = bg.h.dot(&pt.xi);
    Ok([rt2 - s * s, rt2 - r.slow, rt2 - r.fast])
}

/// Eigenvalues of `A(U, xi)` from the closed-form list, ascending.
pub fn eigenvalues_a(bg: &BackgroundEval, xi: &Vector3<f64>) -> Result<[f64; 8]> {
    let ws = wave_speeds(bg, xi)?;
    let n = xi.norm();
    let cs = ws.cs() * n;
    let cf = ws.cf() * n;
    let al = bg.h.dot(xi) / bg.rho.sqrt();
    let mut v = [0.0, 0.0, cs, -cs, al, -al, cf, -cf];
    v.sort_by(f64::total_cmp);
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseTag {
    /// `xi . H != 0` and `xi x H != 0`
    GenericTransverse,
    /// `xi . H = 0`
    PerpendicularDegenerate,
    /// `xi x H = 0`, `|H|^2 < rho c^2`
    ParallelSubAlfvenic,
    /// `xi x H = 0`, `|H|^2 > rho c^2`
    ParallelSuperAlfvenic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiplicityCase {
    pub tag: CaseTag,
    /// Distinct eigenvalues, ascending, with multiplicities summing to 8.
    pub eigenvalues: Vec<(f64, usize)>,
}

pub fn multiplicity_case(bg: &BackgroundEval, xi: &Vector3<f64>) -> Result<MultiplicityCase> {
    let ws = wave_speeds(bg, xi)?;
    let nx = xi.norm();
    let nh = bg.h.norm();
    if nh == 0.0 {
        return Err(Error::UnclassifiedDegeneracy("H = 0".into()));
    }
    let cs = ws.cs() * nx;
    let cf = ws.cf() * nx;
    let al = (bg.h.dot(xi) / bg.rho.sqrt()).abs();
    let parallel = xi.cross(&bg.h).norm() <= EPS_C * nx * nh;
    let perpendicular = xi.dot(&bg.h).abs() <= EPS_C * nx * nh;

    let (tag, eigenvalues) = if perpendicular {
        (
            CaseTag::PerpendicularDegenerate,
            vec![(-cf, 1), (0.0, 6), (cf, 1)],
        )
    } else if parallel {
        let h2 = nh * nh;
        let rc2 = bg.rho * ws.c2;
        if (h2 - rc2).abs() <= EPS_C * (h2 + rc2) {
            return Err(Error::UnclassifiedDegeneracy("xi x H = 0 with |H|^2 = rho c^2".into()));
        }
        if h2 < rc2 {
            (
                CaseTag::ParallelSubAlfvenic,
                vec![(-cf, 1), (-al, 2), (0.0, 2), (al, 2), (cf, 1)],
            )
        } else {
            (
                CaseTag::ParallelSuperAlfvenic,
                vec![(-al, 2), (-cs, 1), (0.0, 2), (cs, 1), (al, 2)],
            )
        }
    } else {
        (
            CaseTag::GenericTransverse,
            vec![(-cf, 1), (-al, 1), (-cs, 1), (0.0, 2), (cs, 1), (al, 1), (cf, 1)],
        )
    };
    let mut eigenvalues = eigenvalues;
    eigenvalues.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(MultiplicityCase { tag, eigenvalues })
}

/// Orthogonal projectors onto the eigenlines of `p2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectorTriple {
    pub pi1: Matrix3<f64>,
    pub pi2: Matrix3<f64>,
    pub pi3: Matrix3<f64>,
}

impl ProjectorTriple {
    pub fn get(&self, sheet: crate::symbols::Sheet) -> &Matrix3<f64> {
        use crate::symbols::Sheet;
        match sheet {
            Sheet::Alfven => &self.pi1,
            Sheet::Slow => &self.pi2,
            Sheet::Fast => &self.pi3,
        }
    }

    pub fn as_array(&self) -> [Matrix3<f64>; 3] {
        [self.pi1, self.pi2, self.pi3]
    }
}

pub fn build_projectors(pt: &PhasePoint, bg: &BackgroundEval) -> Result<ProjectorTriple> {
    bg.check_physical()?;
    check_disjoint_hypotheses(pt, bg)?;
    let xi = &pt.xi;
    let h = &bg.h;
    let s = h.dot(xi);
    let s2 = s * s;
    let r = magnetosonic_roots(bg, xi);
    let w2 = build_w2(bg, xi);
    let k = xi * xi.transpose() * (bg.gamma_p() + h.norm_squared())
        - (xi * h.transpose() + h * xi.transpose()) * s;
    let pi1 = Matrix3::identity() + w2 / (s2 - h.norm_squared() * xi.norm_squared());
    let pi2 = (k + w2 * (s2 / (r.slow - s2))) / (r.slow - r.fast);
    let pi3 = (k + w2 * (s2 / (r.fast - s2))) / (r.fast - r.slow);
    Ok(ProjectorTriple { pi1, pi2, pi3 })
}

/// Right singular vectors whose singular value is at most
/// `tol_factor * sigma_max`.
pub fn kernel_basis(m: &MatrixSymbol, tol_factor: f64) -> Vec<DVector<Complex64>> {
    let n = m.dim();
    let svd = m.entries.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let smax = svd.singular_values.max();
    let mut idx: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] <= tol_factor * smax)
        .collect();
    idx.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    idx.into_iter()
        .map(|i| DVector::from_fn(n, |j, _| v_t[(i, j)].conj()))
        .collect()
}

/// Orthonormal bases `(U_k, V_k)` of the left and right singular
/// subspaces belonging to the `k` smallest singular values.
///
/// Both come from right singular vectors (of `m` and of `m^*`): the left
/// factor of the SVD is unreliable when singular values are exactly zero.
pub fn smallest_singular_subspaces(
    m: &DMatrix<Complex64>,
    k: usize,
) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    (smallest_right_subspace(&m.adjoint(), k), smallest_right_subspace(m, k))
}

fn smallest_right_subspace(m: &DMatrix<Complex64>, k: usize) -> DMatrix<Complex64> {
    let n = m.ncols();
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let idx = &idx[..k.min(idx.len())];
    DMatrix::from_fn(n, idx.len(), |r, c| v_t[(idx[c], r)].conj())
}
