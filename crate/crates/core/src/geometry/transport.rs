use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::background::BackgroundField;
use crate::error::{Error, Result};
use crate::geometry::bracket::{bracket_from_gradients, central_difference, phase_gradient, FD_STEP};
use crate::geometry::hamilton::{check_sheet_isolated, hamilton_field};
use crate::geometry::ode::{dopri5, OdeOptions};
use crate::geometry::ray::{stop_error, Ray};
use crate::spectra::{build_projectors, kernel_basis};
use crate::symbols::{build_p2, build_ptilde, two_i_subprincipal, MatrixSymbol, PhasePoint, Sheet};

pub type CVector3 = Vector3<Complex64>;

/// Initial polarizations must satisfy `|p2 w| <= KERNEL_START_TOL |p2||w|`.
pub const KERNEL_START_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationSample {
    pub s: f64,
    pub point: PhasePoint,
    pub w: CVector3,
    pub direction: CVector3,
    pub kernel_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolarizationFrame {
    pub sheet: Sheet,
    pub samples: Vec<PolarizationSample>,
    pub max_kernel_residual: f64,
}

/// Unit vector along `w`, phase-fixed so its largest component is real and
/// positive.
pub fn normalized_direction(w: &CVector3) -> CVector3 {
    let n = w.norm();
    if n == 0.0 {
        return *w;
    }
    let big = w.iter().copied().fold(Complex64::new(0.0, 0.0), |a, b| if b.norm() > a.norm() { b } else { a });
    let phase = big.conj() / big.norm();
    w.map(|z| z * phase / n)
}

/// Sine of the angle between the complex lines spanned by `a` and `b`.
pub fn direction_distance(a: &CVector3, b: &CVector3) -> f64 {
    let a = a / Complex64::new(a.norm(), 0.0);
    let b = b / Complex64::new(b.norm(), 0.0);
    let c = b.dotc(&a);
    (a - b * c).norm()
}

/// `|p2 w| / (|p2| |w|)` at `pt`.
pub fn kernel_residual(p2: &Matrix3<f64>, w: &CVector3) -> f64 {
    let pw = p2.map(|v| Complex64::new(v, 0.0)) * w;
    pw.norm() / (p2.norm() * w.norm())
}

/// A unit vector spanning `ker p2` at a point of the sheet.
pub fn auto_polarization(pt: &PhasePoint, bg: &BackgroundField) -> Result<CVector3> {
    let ev = bg.eval(pt.t, pt.base())?;
    let p2 = build_p2(pt, &ev)?;
    let ker = kernel_basis(&MatrixSymbol::from_real(&p2, 2), 1e-8);
    let v = ker.first().ok_or(Error::NotInKernel {
        residual: f64::INFINITY,
    })?;
    Ok(normalized_direction(&CVector3::new(v[0], v[1], v[2])))
}

fn ptilde_at(bg: &BackgroundField, sheet: Sheet) -> impl Fn(&PhasePoint) -> Result<Matrix3<f64>> + '_ {
    move |p: &PhasePoint| build_ptilde(p, &bg.eval(p.t, p.base())?, sheet)
}

fn p2_at(bg: &BackgroundField) -> impl Fn(&PhasePoint) -> Result<Matrix3<f64>> + '_ {
    move |p: &PhasePoint| build_p2(p, &bg.eval(p.t, p.base())?)
}

/// `{p~2, p2}` by central differences.
pub fn ptilde_p2_bracket(pt: &PhasePoint, bg: &BackgroundField, sheet: Sheet) -> Result<Matrix3<f64>> {
    let df = phase_gradient(&ptilde_at(bg, sheet), pt)?;
    let dg = phase_gradient(&p2_at(bg), pt)?;
    Ok(bracket_from_gradients(&df, &dg))
}

/// Derivative of the sheet projector along the Hamilton field of
/// `q_sheet`, by a central difference along that field.
pub fn hamilton_derivative_projector(pt: &PhasePoint, bg: &BackgroundField, sheet: Sheet) -> Result<Matrix3<f64>> {
    let ev = bg.eval(pt.t, pt.base())?;
    let v = hamilton_field(sheet, pt, &ev)?;
    let y = pt.to_array();
    let base_len = y[..4].iter().map(|c| c * c).sum::<f64>().sqrt().max(1.0);
    let v_base = v[..4].iter().map(|c| c * c).sum::<f64>().sqrt();
    let v_fiber = v[4..].iter().map(|c| c * c).sum::<f64>().sqrt();
    let mut eps = f64::INFINITY;
    if v_base > 0.0 {
        eps = eps.min(FD_STEP * base_len / v_base);
    }
    if v_fiber > 0.0 {
        eps = eps.min(FD_STEP * pt.fiber_norm() / v_fiber);
    }
    if !eps.is_finite() {
        return Ok(Matrix3::zeros());
    }
    let at = |e: f64| -> Result<Matrix3<f64>> {
        let mut z = y;
        for k in 0..8 {
            z[k] += e * v[k];
        }
        let p = PhasePoint::from_array(&z);
        Ok(*build_projectors(&p, &bg.eval(p.t, p.base())?)?.get(sheet))
    };
    central_difference(at, eps)
}

/// Real matrix `M` with `dw/ds = M w` for the connection
/// `dw/ds = -1/2 {p~2, p2} w - i p~2 p^s w`.
pub fn dencker_matrix(pt: &PhasePoint, bg: &BackgroundField, sheet: Sheet) -> Result<Matrix3<f64>> {
    let ev = bg.eval(pt.t, pt.base())?;
    let b = ptilde_p2_bracket(pt, bg, sheet)?;
    let pt2 = build_ptilde(pt, &ev, sheet)?;
    // i p~2 p^s = i p~2 (2i p^s)/(2i) = p~2 (2i p^s) / 2
    let r = two_i_subprincipal(pt, &ev);
    Ok(-(b + pt2 * r) * 0.5)
}

fn pack(y: &[f64; 8], w: &CVector3) -> [f64; 14] {
    let mut z = [0.0; 14];
    z[..8].copy_from_slice(y);
    for i in 0..3 {
        z[8 + 2 * i] = w[i].re;
        z[9 + 2 * i] = w[i].im;
    }
    z
}

fn unpack(z: &[f64; 14]) -> ([f64; 8], CVector3) {
    let mut y = [0.0; 8];
    y.copy_from_slice(&z[..8]);
    let w = CVector3::new(
        Complex64::new(z[8], z[9]),
        Complex64::new(z[10], z[11]),
        Complex64::new(z[12], z[13]),
    );
    (y, w)
}

fn transport<M>(ray: &Ray, bg: &BackgroundField, w0: &CVector3, matrix: M) -> Result<PolarizationFrame>
where
    M: Fn(&PhasePoint) -> Result<Matrix3<f64>>,
{
    let start = ray.samples.first().ok_or(Error::Domain("empty ray".into()))?.point;
    let ev0 = bg.eval(start.t, start.base())?;
    let p2 = build_p2(&start, &ev0)?;
    let residual = kernel_residual(&p2, w0);
    if !(residual <= KERNEL_START_TOL) {
        return Err(Error::NotInKernel { residual });
    }
    let sheet = ray.sheet;
    let rhs = |_: f64, z: &[f64; 14]| -> Result<[f64; 14]> {
        let (y, w) = unpack(z);
        let pt = PhasePoint::from_array(&y);
        let ev = bg.eval(pt.t, pt.base())?;
        check_sheet_isolated(sheet, &pt, &ev)?;
        let v = hamilton_field(sheet, &pt, &ev)?;
        let m = matrix(&pt)?.map(|c| Complex64::new(c, 0.0));
        Ok(pack(&v, &(m * w)))
    };
    let integ = dopri5(
        rhs,
        pack(&start.to_array(), w0),
        ray.span(),
        ray.samples.len(),
        &OdeOptions::with_tol(ray.tol),
    )?;
    if let Some(stop) = integ.stop {
        return Err(Error::DegenerateMode(format!(
            "transport stopped at s = {}: {}",
            stop.s_reached,
            stop_error(stop.reason)
        )));
    }
    let mut samples = Vec::with_capacity(integ.s.len());
    let mut worst = 0.0f64;
    for (s, z) in integ.s.iter().zip(&integ.y) {
        let (y, w) = unpack(z);
        let point = PhasePoint::from_array(&y);
        let p2 = build_p2(&point, &bg.eval(point.t, point.base())?)?;
        let kr = kernel_residual(&p2, &w);
        worst = worst.max(kr);
        samples.push(PolarizationSample {
            s: *s,
            point,
            w,
            direction: normalized_direction(&w),
            kernel_residual: kr,
        });
    }
    Ok(PolarizationFrame {
        sheet,
        samples,
        max_kernel_residual: worst,
    })
}

/// Transports `w0` along the ray with `dw/ds = -1/2 {p~2, p2} w - i p~2 p^s w`.
pub fn dencker_transport(ray: &Ray, bg: &BackgroundField, w0: &CVector3) -> Result<PolarizationFrame> {
    let sheet = ray.sheet;
    transport(ray, bg, w0, |pt| dencker_matrix(pt, bg, sheet))
}

/// Transports `a0` along the ray with `da/ds = (H_q pi) a`.
pub fn simplified_transport(ray: &Ray, bg: &BackgroundField, a0: &CVector3) -> Result<PolarizationFrame> {
    let sheet = ray.sheet;
    transport(ray, bg, a0, |pt| hamilton_derivative_projector(pt, bg, sheet))
}
