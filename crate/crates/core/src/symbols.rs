//! Matrix symbols of the linearized MHD system at a phase-space point.
//!
//! The 8-vector state is ordered `(rho, u1, u2, u3, H1, H2, H3, p)`.

use nalgebra::{DMatrix, Matrix3, SMatrix, SVector, Vector3};
use num_complex::Complex64;

use crate::background::BackgroundEval;
use crate::error::{Error, Result};
use crate::spectra;

pub type Matrix8 = SMatrix<f64, 8, 8>;
pub type Vector8 = SVector<f64, 8>;
pub type CMatrix3 = Matrix3<Complex64>;

/// Relative threshold below which a factor of `det q` counts as vanishing
/// when it sits in a denominator.
pub const EPS_DEG: f64 = 1e-10;

/// A point `(t, x; tau, xi)` of the cotangent bundle of space-time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub t: f64,
    pub x: Vector3<f64>,
    pub tau: f64,
    pub xi: Vector3<f64>,
}

impl PhasePoint {
    pub fn new(t: f64, x: [f64; 3], tau: f64, xi: [f64; 3]) -> Self {
        Self {
            t,
            x: Vector3::from(x),
            tau,
            xi: Vector3::from(xi),
        }
    }

    /// Coordinates in the order `(t, x1, x2, x3, tau, xi1, xi2, xi3)`.
    pub fn to_array(&self) -> [f64; 8] {
        [
            self.t, self.x[0], self.x[1], self.x[2], self.tau, self.xi[0], self.xi[1], self.xi[2],
        ]
    }

    pub fn from_array(y: &[f64; 8]) -> Self {
        Self::new(y[0], [y[1], y[2], y[3]], y[4], [y[5], y[6], y[7]])
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    /// Scales the fiber variables `(tau, xi)`.
    pub fn scaled(mut self, lambda: f64) -> Self {
        self.tau *= lambda;
        self.xi *= lambda;
        self
    }

    pub fn base(&self) -> [f64; 3] {
        self.x.into()
    }

    pub fn fiber_norm(&self) -> f64 {
        (self.tau * self.tau + self.xi.norm_squared()).sqrt()
    }
}

/// A dense complex square matrix tagged with its homogeneity degree.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSymbol {
    pub degree: i32,
    pub entries: DMatrix<Complex64>,
}

impl MatrixSymbol {
    pub fn from_real<const D: usize>(m: &SMatrix<f64, D, D>, degree: i32) -> Self {
        Self {
            degree,
            entries: DMatrix::from_fn(D, D, |i, j| Complex64::new(m[(i, j)], 0.0)),
        }
    }

    pub fn from_complex<const D: usize>(m: &SMatrix<Complex64, D, D>, degree: i32) -> Self {
        Self {
            degree,
            entries: DMatrix::from_fn(D, D, |i, j| m[(i, j)]),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

fn physical(bg: &BackgroundEval) -> Result<()> {
    bg.check_physical()
}

fn outer(a: &Vector3<f64>, b: &Vector3<f64>) -> Matrix3<f64> {
    a * b.transpose()
}

fn a_matrix(rho: f64, gamma_p: f64, h: &Vector3<f64>, xi: &Vector3<f64>) -> Matrix8 {
    let s = h.dot(xi);
    let mut a = Matrix8::zeros();
    for i in 0..3 {
        a[(0, 1 + i)] = rho * xi[i];
        a[(7, 1 + i)] = gamma_p * xi[i];
        a[(1 + i, 7)] = xi[i] / rho;
        for j in 0..3 {
            let d = if i == j { s } else { 0.0 };
            a[(1 + i, 4 + j)] = (xi[i] * h[j] - d) / rho;
            a[(4 + i, 1 + j)] = h[i] * xi[j] - d;
        }
    }
    a
}

/// `A(U, xi)`, so that `q = tau Id + A`.
pub fn build_a(bg: &BackgroundEval, xi: &Vector3<f64>) -> Result<Matrix8> {
    physical(bg)?;
    Ok(a_matrix(bg.rho, bg.gamma_p(), &bg.h, xi))
}

/// First-order change of `A(U, xi)` when the background moves by
/// `(d_rho, d_gamma_p, d_h)` at fixed `xi`.
pub fn a_variation(
    bg: &BackgroundEval,
    xi: &Vector3<f64>,
    d_rho: f64,
    d_gamma_p: f64,
    d_h: &Vector3<f64>,
) -> Matrix8 {
    let rho = bg.rho;
    let h = &bg.h;
    let s = h.dot(xi);
    let ds = d_h.dot(xi);
    let r2 = d_rho / (rho * rho);
    let mut a = Matrix8::zeros();
    for i in 0..3 {
        a[(0, 1 + i)] = d_rho * xi[i];
        a[(7, 1 + i)] = d_gamma_p * xi[i];
        a[(1 + i, 7)] = -r2 * xi[i];
        for j in 0..3 {
            let (d, dd) = if i == j { (s, ds) } else { (0.0, 0.0) };
            a[(1 + i, 4 + j)] = (xi[i] * d_h[j] - dd) / rho - r2 * (xi[i] * h[j] - d);
            a[(4 + i, 1 + j)] = d_h[i] * xi[j] - dd;
        }
    }
    a
}

/// Background increments `(d rho, d(gamma p), dH)` along coordinate `k`
/// of `(t, x1, x2, x3)`.
pub fn background_partial(bg: &BackgroundEval, k: usize) -> (f64, f64, Vector3<f64>) {
    match k {
        0 => (bg.dt_rho, bg.gamma * bg.dt_p, bg.dt_h),
        1..=3 => {
            let i = k - 1;
            (
                bg.grad_rho[i],
                bg.gamma * bg.grad_p[i],
                bg.nabla_h.row(i).transpose(),
            )
        }
        _ => panic!("background coordinate index {k} out of range"),
    }
}

pub fn build_q(pt: &PhasePoint, bg: &BackgroundEval) -> Result<Matrix8> {
    Ok(Matrix8::identity() * pt.tau + build_a(bg, &pt.xi)?)
}

/// Partial derivative of `q` along phase coordinate `k` of
/// `(t, x1, x2, x3, tau, xi1, xi2, xi3)`.
pub fn q_partial(pt: &PhasePoint, bg: &BackgroundEval, k: usize) -> Matrix8 {
    match k {
        0..=3 => {
            let (d_rho, d_gp, d_h) = background_partial(bg, k);
            a_variation(bg, &pt.xi, d_rho, d_gp, &d_h)
        }
        4 => Matrix8::identity(),
        5..=7 => {
            let mut e = Vector3::zeros();
            e[k - 5] = 1.0;
            a_matrix(bg.rho, bg.gamma_p(), &bg.h, &e)
        }
        _ => panic!("phase coordinate index {k} out of range"),
    }
}

pub(crate) fn p2_with_cross_sign(pt: &PhasePoint, bg: &BackgroundEval, cross_sign: f64) -> Matrix3<f64> {
    let xi = &pt.xi;
    let h = &bg.h;
    let s = h.dot(xi);
    let g = bg.gamma_p() + h.norm_squared();
    Matrix3::identity() * (bg.rho * pt.tau * pt.tau - s * s) - outer(xi, xi) * g
        + (outer(xi, h) + outer(h, xi)) * (cross_sign * s)
}

/// Principal symbol of the second-order velocity system.
pub fn build_p2(pt: &PhasePoint, bg: &BackgroundEval) -> Result<Matrix3<f64>> {
    physical(bg)?;
    Ok(p2_with_cross_sign(pt, bg, 1.0))
}

/// First-order symbol, equilibrium-simplified form.
///
/// Uses `(grad (x) H)_{ik} = d_i H_k` and reads `grad(H.xi)` at frozen `xi`.
pub fn build_p1(pt: &PhasePoint, bg: &BackgroundEval) -> Result<CMatrix3> {
    physical(bg)?;
    let xi = &pt.xi;
    let h = &bg.h;
    let s = h.dot(xi);
    let gp = &bg.grad_p;
    let j = &bg.nabla_h;
    let grad_s = j * xi;
    let grad_h2 = bg.grad_h_sq();
    let div_h = bg.div_h();

    let m = outer(gp, xi) * bg.gamma + outer(xi, gp) - outer(gp, xi)
        + Matrix3::identity() * (grad_s.dot(h) + s * div_h)
        + (outer(xi, &grad_h2) + outer(&grad_h2, xi)) * 0.5
        - outer(&bg.h_dot_grad_h(), xi)
        - outer(&grad_s, h)
        - j * s
        - outer(xi, h) * div_h;
    Ok(m.map(|v| Complex64::new(0.0, v)))
}

/// `sum_j d^2 p2 / dx_j dxi_j`, background derivatives only.
pub fn mixed_derivative_trace(pt: &PhasePoint, bg: &BackgroundEval) -> Matrix3<f64> {
    let xi = &pt.xi;
    let h = &bg.h;
    let s = h.dot(xi);
    let hh = outer(xi, h) + outer(h, xi);
    let mut total = Matrix3::zeros();
    for jx in 0..3 {
        let dh = bg.nabla_h.row(jx).transpose();
        let ds = dh.dot(xi);
        let dg = bg.gamma * bg.grad_p[jx] + 2.0 * h.dot(&dh);
        let mut e = Vector3::zeros();
        e[jx] = 1.0;
        total += Matrix3::identity() * (-2.0 * (ds * h[jx] + s * dh[jx]))
            - (outer(&e, xi) + outer(xi, &e)) * dg
            + hh * dh[jx]
            + (outer(xi, &dh) + outer(&dh, xi)) * h[jx]
            + (outer(&e, h) + outer(h, &e)) * ds
            + (outer(&e, &dh) + outer(&dh, &e)) * s;
    }
    total
}

/// The real skew matrix `2i p^s` in closed form.
pub fn two_i_subprincipal(pt: &PhasePoint, bg: &BackgroundEval) -> Matrix3<f64> {
    let xi = &pt.xi;
    let h = &bg.h;
    let s = h.dot(xi);
    let gp = &bg.grad_p;
    let j = &bg.nabla_h;
    let grad_s = j * xi;
    let hgh = bg.h_dot_grad_h();
    (outer(xi, gp) - outer(gp, xi)) * bg.gamma
        + (outer(xi, h) - outer(h, xi)) * bg.div_h()
        + (j - j.transpose()) * s
        + outer(&hgh, xi)
        - outer(xi, &hgh)
        + outer(&grad_s, h)
        - outer(h, &grad_s)
        + (outer(gp, xi) - outer(xi, gp)) * 2.0
}

/// Subprincipal symbol from the closed form.
pub fn build_subprincipal(pt: &PhasePoint, bg: &BackgroundEval) -> Result<CMatrix3> {
    physical(bg)?;
    // p^s = (2i p^s) / (2i) = -i/2 * (2i p^s)
    Ok(two_i_subprincipal(pt, bg).map(|v| Complex64::new(0.0, -0.5 * v)))
}

/// Subprincipal symbol as `p1 - (1/2i) sum_j d^2 p2 / dx_j dxi_j`.
pub fn subprincipal_definitional(pt: &PhasePoint, bg: &BackgroundEval) -> Result<CMatrix3> {
    let p1 = build_p1(pt, bg)?;
    let corr = mixed_derivative_trace(pt, bg);
    // -(1/2i) = i/2
    Ok(p1 + corr.map(|v| Complex64::new(0.0, 0.5 * v)))
}

/// `|H|^2 xi xi^T + |xi|^2 H H^T - (H.xi)(H xi^T + xi H^T)`.
pub fn build_w2(bg: &BackgroundEval, xi: &Vector3<f64>) -> Matrix3<f64> {
    let h = &bg.h;
    let s = h.dot(xi);
    outer(xi, xi) * h.norm_squared() + outer(h, h) * xi.norm_squared()
        - (outer(h, xi) + outer(xi, h)) * s
}

/// Which characteristic factor `q_j` of `p2` a computation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sheet {
    /// `q1 = rho tau^2 - (H.xi)^2`
    Alfven,
    /// `q2 = rho (tau^2 - c_s^2 |xi|^2)`
    Slow,
    /// `q3 = rho (tau^2 - c_f^2 |xi|^2)`
    Fast,
}

impl Sheet {
    pub const ALL: [Sheet; 3] = [Sheet::Alfven, Sheet::Slow, Sheet::Fast];

    /// 1, 2 or 3.
    pub fn index(self) -> usize {
        match self {
            Sheet::Alfven => 1,
            Sheet::Slow => 2,
            Sheet::Fast => 3,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        match i {
            1 => Some(Sheet::Alfven),
            2 => Some(Sheet::Slow),
            3 => Some(Sheet::Fast),
            _ => None,
        }
    }
}

impl std::fmt::Display for Sheet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Sheet::Alfven => "Alfven",
            Sheet::Slow => "slow",
            Sheet::Fast => "fast",
        };
        write!(f, "{name} (q{})", self.index())
    }
}

/// Scale used to decide when a factor `q_j` is negligible.
pub fn factor_scale(pt: &PhasePoint, bg: &BackgroundEval) -> f64 {
    let xi2 = pt.xi.norm_squared();
    bg.rho * (pt.tau * pt.tau + (bg.c2() + bg.h2()) * xi2)
}

/// Checks the disjointness hypotheses that make every `q_j` factor of
/// the other sheets invertible near `pt`.
pub fn check_disjoint_hypotheses(pt: &PhasePoint, bg: &BackgroundEval) -> Result<()> {
    let nx = pt.xi.norm();
    let nh = bg.h.norm();
    let eps = spectra::EPS_C;
    if pt.xi.dot(&bg.h).abs() <= eps * nx * nh {
        return Err(Error::DegenerateMode("xi . H = 0".into()));
    }
    if pt.xi.cross(&bg.h).norm() <= eps * nx * nh {
        return Err(Error::DegenerateMode("xi x H = 0".into()));
    }
    let rc2 = bg.rho * bg.c2();
    if (bg.h.norm_squared() - rc2).abs() <= eps * (bg.h.norm_squared() + rc2) {
        return Err(Error::DegenerateMode("|H|^2 = rho c^2".into()));
    }
    Ok(())
}

/// `p~2` with `p~2 p2 = q_sheet Id`.
pub fn build_ptilde(pt: &PhasePoint, bg: &BackgroundEval, sheet: Sheet) -> Result<Matrix3<f64>> {
    physical(bg)?;
    check_disjoint_hypotheses(pt, bg)?;
    let [q1, q2, q3] = spectra::characteristic_factors(pt, bg)?;
    let scale = factor_scale(pt, bg);
    let need = |q: f64, name: &str| {
        if q.abs() < EPS_DEG * scale {
            Err(Error::DegenerateMode(format!("{name} vanishes")))
        } else {
            Ok(q)
        }
    };
    let xi = &pt.xi;
    let h = &bg.h;
    let s = h.dot(xi);
    let k = outer(xi, xi) * (bg.gamma_p() + h.norm_squared()) - (outer(xi, h) + outer(h, xi)) * s;
    let w2s = build_w2(bg, xi) * (s * s);
    let id = Matrix3::identity();
    Ok(match sheet {
        Sheet::Alfven => {
            let d = need(q2, "q2")? * need(q3, "q3")?;
            id + k * (q1 / d) + w2s / d
        }
        Sheet::Slow => {
            let (q1, q3) = (need(q1, "q1")?, need(q3, "q3")?);
            id * (q2 / q1) + k / q3 + w2s / (q1 * q3)
        }
        Sheet::Fast => {
            let (q1, q2) = (need(q1, "q1")?, need(q2, "q2")?);
            id * (q3 / q1) + k / q2 + w2s / (q1 * q2)
        }
    })
}

/// The 8x8 symmetrizer `S` with `S A` symmetric.
pub fn symmetrizer(bg: &BackgroundEval) -> Result<Matrix8> {
    physical(bg)?;
    let gp = bg.gamma_p();
    let rho = bg.rho;
    let mut s = Matrix8::zeros();
    s[(0, 0)] = gp;
    for i in 1..4 {
        s[(i, i)] = rho;
        s[(i + 3, i + 3)] = 1.0;
    }
    s[(7, 7)] = (1.0 + rho * rho) / gp;
    s[(0, 7)] = -rho;
    s[(7, 0)] = -rho;
    Ok(s)
}

/// `det q` from its factorization into wave-speed factors.
pub fn det_q(pt: &PhasePoint, bg: &BackgroundEval) -> Result<f64> {
    let ws = spectra::wave_speeds(bg, &pt.xi)?;
    let xi2 = pt.xi.norm_squared();
    let t2 = pt.tau * pt.tau;
    let s = bg.h.dot(&pt.xi);
    Ok(t2 * (t2 - ws.cs2 * xi2) * (t2 - ws.cf2 * xi2) * (t2 - s * s / bg.rho))
}

/// Max absolute row sum.
pub fn norm_inf<const D: usize>(m: &SMatrix<f64, D, D>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bg(rho: f64, gp: f64, h: [f64; 3]) -> BackgroundEval {
        BackgroundEval::uniform(rho, gp, 1.0, Vector3::from(h)).unwrap()
    }

    #[test]
    fn acoustic_a() {
        let a = build_a(&bg(1.0, 1.0, [0.0; 3]), &Vector3::x()).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let expected = match (i, j) {
                    (0, 1) | (1, 7) | (7, 1) => 1.0,
                    _ => 0.0,
                };
                assert_eq!(a[(i, j)], expected, "({i},{j})");
            }
        }
    }

    #[test]
    fn symmetrizer_symmetrizes() {
        let b = bg(2.0, 3.0, [1.0, 1.0, 0.0]);
        let sa = symmetrizer(&b).unwrap() * build_a(&b, &Vector3::new(0.0, 1.0, 2.0)).unwrap();
        assert!(norm_inf(&(sa - sa.transpose())) <= 1e-12 * norm_inf(&sa));
    }

    #[test]
    fn unit_symmetrizer() {
        let s = symmetrizer(&bg(1.0, 1.0, [0.3, 0.0, 0.0])).unwrap();
        let mut expected = Matrix8::identity();
        expected[(7, 7)] = 2.0;
        expected[(0, 7)] = -1.0;
        expected[(7, 0)] = -1.0;
        assert_eq!(s, expected);
    }

    #[test]
    fn p2_at_zero_xi() {
        let b = bg(2.0, 1.0, [1.0, 2.0, 3.0]);
        let pt = PhasePoint::new(0.0, [0.0; 3], 1.5, [0.0; 3]);
        assert_eq!(build_p2(&pt, &b).unwrap(), Matrix3::identity() * 4.5);
    }

    #[test]
    fn p2_transverse_entry() {
        // v along z, xi in the x-z plane: the (y, y) entry is rho tau^2 - (H.xi)^2.
        let b = bg(1.7, 2.0, [0.0, 0.0, 1.3]);
        let pt = PhasePoint::new(0.0, [0.0; 3], 0.8, [0.6, 0.0, 1.1]);
        let p2 = build_p2(&pt, &b).unwrap();
        let s = 1.3 * 1.1;
        assert!((p2[(1, 1)] - (1.7 * 0.64 - s * s)).abs() < 1e-14);
    }

    #[test]
    fn w2_examples() {
        let b = bg(1.0, 1.0, [1.0, 0.0, 0.0]);
        assert_eq!(build_w2(&b, &Vector3::y()), Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, 0.0)));
        assert_eq!(build_w2(&b, &Vector3::new(3.0, 0.0, 0.0)), Matrix3::zeros());
    }

    #[test]
    fn det_q_acoustic() {
        let b = bg(1.0, 1.0, [0.0; 3]);
        let pt = PhasePoint::new(0.0, [0.0; 3], 2.0, [1.0, 0.0, 0.0]);
        assert!((det_q(&pt, &b).unwrap() - 192.0).abs() < 1e-12);
        assert_eq!(det_q(&pt.with_tau(0.0), &b).unwrap(), 0.0);
    }

    #[test]
    fn ptilde_needs_oblique_xi() {
        let b = bg(1.0, 4.0, [1.0, 0.0, 0.0]);
        let pt = PhasePoint::new(0.0, [0.0; 3], 0.3, [2.0, 0.0, 0.0]);
        assert!(matches!(build_ptilde(&pt, &b, Sheet::Alfven), Err(Error::DegenerateMode(_))));
    }

    #[test]
    fn constant_background_lower_order_vanishes() {
        let b = bg(1.3, 0.7, [0.2, -1.0, 0.5]);
        let pt = PhasePoint::new(0.0, [0.0; 3], 0.3, [1.0, 2.0, -0.4]);
        assert_eq!(build_p1(&pt, &b).unwrap(), CMatrix3::zeros());
        assert_eq!(build_subprincipal(&pt, &b).unwrap(), CMatrix3::zeros());
    }

    #[test]
    fn q_partial_matches_difference_quotient_in_xi() {
        let b = bg(1.3, 0.7, [0.2, -1.0, 0.5]);
        let pt = PhasePoint::new(0.0, [0.0; 3], 0.3, [1.0, 2.0, -0.4]);
        let h = 1e-6;
        for k in 5..8 {
            let mut y = pt.to_array();
            y[k] += h;
            let up = build_q(&PhasePoint::from_array(&y), &b).unwrap();
            y[k] -= 2.0 * h;
            let dn = build_q(&PhasePoint::from_array(&y), &b).unwrap();
            let fd = (up - dn) / (2.0 * h);
            assert!((fd - q_partial(&pt, &b, k)).amax() < 1e-8);
        }
    }
}
