use nalgebra::Matrix3;

use crate::error::Result;
use crate::symbols::PhasePoint;

/// Relative step of the five-point differences.
pub const FD_STEP: f64 = 1e-5;

/// Finite-difference steps: `FD_STEP max(1, |coord|)` in `(t, x)` and
/// `FD_STEP |(tau, xi)|` in the fiber.
pub fn fd_steps(pt: &PhasePoint) -> [f64; 8] {
    let y = pt.to_array();
    let fiber = pt.fiber_norm().max(f64::MIN_POSITIVE);
    let mut h = [0.0; 8];
    for k in 0..8 {
        h[k] = if k < 4 { FD_STEP * y[k].abs().max(1.0) } else { FD_STEP * fiber };
    }
    h
}

/// Five-point central difference `(f(-2h) - 8 f(-h) + 8 f(h) - f(2h)) / 12h`
/// of `g(e) = f(y + e d)` at `e = 0`.
pub fn central_difference<F>(f: F, h: f64) -> Result<Matrix3<f64>>
where
    F: Fn(f64) -> Result<Matrix3<f64>>,
{
    let m2 = f(-2.0 * h)?;
    let m1 = f(-h)?;
    let p1 = f(h)?;
    let p2 = f(2.0 * h)?;
    Ok((m2 - m1 * 8.0 + p1 * 8.0 - p2) / (12.0 * h))
}

/// Partials of a matrix symbol in the phase coordinates
/// `(t, x1, x2, x3, tau, xi1, xi2, xi3)`.
pub fn phase_gradient<F>(f: &F, pt: &PhasePoint) -> Result<[Matrix3<f64>; 8]>
where
    F: Fn(&PhasePoint) -> Result<Matrix3<f64>>,
{
    let y = pt.to_array();
    let steps = fd_steps(pt);
    let mut out = [Matrix3::zeros(); 8];
    for k in 0..8 {
        out[k] = central_difference(
            |e| {
                let mut z = y;
                z[k] += e;
                f(&PhasePoint::from_array(&z))
            },
            steps[k],
        )?;
    }
    Ok(out)
}

/// `{F, G} = d_tau F d_t G - d_t F d_tau G + sum_k (d_xi_k F d_x_k G - d_x_k F d_xi_k G)`
/// with matrix products in that order.
pub fn poisson_bracket_matrix<F, G>(f: &F, g: &G, pt: &PhasePoint) -> Result<Matrix3<f64>>
where
    F: Fn(&PhasePoint) -> Result<Matrix3<f64>>,
    G: Fn(&PhasePoint) -> Result<Matrix3<f64>>,
{
    let df = phase_gradient(f, pt)?;
    let dg = phase_gradient(g, pt)?;
    Ok(bracket_from_gradients(&df, &dg))
}

pub fn bracket_from_gradients(df: &[Matrix3<f64>; 8], dg: &[Matrix3<f64>; 8]) -> Matrix3<f64> {
    let mut b = df[4] * dg[0] - df[0] * dg[4];
    for k in 0..3 {
        b += df[5 + k] * dg[1 + k] - df[1 + k] * dg[5 + k];
    }
    b
}

/// Scalar Poisson bracket, same convention.
pub fn poisson_bracket_scalar<F, G>(f: &F, g: &G, pt: &PhasePoint) -> Result<f64>
where
    F: Fn(&PhasePoint) -> Result<f64>,
    G: Fn(&PhasePoint) -> Result<f64>,
{
    let fm = |p: &PhasePoint| -> Result<Matrix3<f64>> { Ok(Matrix3::identity() * f(p)?) };
    let gm = |p: &PhasePoint| -> Result<Matrix3<f64>> { Ok(Matrix3::identity() * g(p)?) };
    let b = poisson_bracket_matrix(&fm, &gm, pt)?;
    Ok(b[(0, 0)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_with_linear_function() {
        // {tau, f} = d_t f for f = 3t + 2 x1
        let tau = |p: &PhasePoint| Ok(p.tau);
        let f = |p: &PhasePoint| Ok(3.0 * p.t + 2.0 * p.x[0]);
        let pt = PhasePoint::new(0.5, [1.0, 2.0, 3.0], 1.0, [0.3, 0.2, 0.1]);
        let b = poisson_bracket_scalar(&tau, &f, &pt).unwrap();
        assert!((b - 3.0).abs() < 1e-9);
    }

    #[test]
    fn canonical_pair() {
        // {xi_1, x_1} = 1
        let xi1 = |p: &PhasePoint| Ok(p.xi[0]);
        let x1 = |p: &PhasePoint| Ok(p.x[0]);
        let pt = PhasePoint::new(0.0, [4.0, 0.0, 0.0], 1.0, [2.0, 0.0, 0.0]);
        assert!((poisson_bracket_scalar(&xi1, &x1, &pt).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn antisymmetric() {
        let f = |p: &PhasePoint| {
            Ok(Matrix3::new(
                p.tau * p.x[0], p.xi[1], 0.0,
                p.xi[0] * p.x[2], 1.0, p.t * p.xi[2],
                0.0, p.x[1].sin(), p.tau * p.tau,
            ))
        };
        let g = |p: &PhasePoint| {
            Ok(Matrix3::new(
                p.xi[2], p.x[1] * p.tau, 1.0,
                0.0, p.xi[0] * p.xi[1], p.x[0],
                p.t, 0.0, p.x[2] * p.xi[0],
            ))
        };
        let pt = PhasePoint::new(0.3, [0.4, -0.2, 0.9], 0.7, [1.1, -0.5, 0.6]);
        let fg = poisson_bracket_matrix(&f, &g, &pt).unwrap();
        let gf = poisson_bracket_matrix(&g, &f, &pt).unwrap();
        // matrix brackets are antisymmetric up to transposition of the products,
        // so compare traces, which are insensitive to product order
        assert!((fg.trace() + gf.trace()).abs() < 1e-8);
        let q = |p: &PhasePoint| Ok(p.tau * p.tau - p.xi.norm_squared() * (1.0 + p.x[0]));
        assert!(poisson_bracket_scalar(&q, &q, &pt).unwrap().abs() < 1e-8);
    }
}
