use nalgebra::{Matrix3, Vector3};

use super::dual::Dual;
use super::expr::{parse_expr, Expr};
use crate::error::{Error, Result};

/// Equilibrium fields `(rho, p, H)` as expressions, plus the adiabatic index.
#[derive(Debug, Clone, PartialEq)]
pub struct BackgroundField {
    pub rho: Expr,
    pub p: Expr,
    pub h: [Expr; 3],
    pub gamma: f64,
}

impl BackgroundField {
    pub fn new(rho: Expr, p: Expr, h: [Expr; 3], gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::NonPhysical(format!("gamma = {gamma} must be positive")));
        }
        Ok(Self { rho, p, h, gamma })
    }

    pub fn parse(rho: &str, p: &str, h: [&str; 3], gamma: f64) -> Result<Self> {
        Self::new(
            parse_expr(rho)?,
            parse_expr(p)?,
            [parse_expr(h[0])?, parse_expr(h[1])?, parse_expr(h[2])?],
            gamma,
        )
    }

    pub fn constant(rho: f64, p: f64, h: [f64; 3], gamma: f64) -> Result<Self> {
        Self::new(
            Expr::constant(rho),
            Expr::constant(p),
            h.map(Expr::constant),
            gamma,
        )
    }

    pub fn is_constant(&self) -> bool {
        self.rho.is_constant() && self.p.is_constant() && self.h.iter().all(Expr::is_constant)
    }

    pub fn eval(&self, t: f64, x: [f64; 3]) -> Result<BackgroundEval> {
        eval_background(self, t, x)
    }
}

/// Background values and first derivatives at one point.
///
/// `nabla_h[(i, k)]` is `d H_k / d x_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackgroundEval {
    pub rho: f64,
    pub p: f64,
    pub gamma: f64,
    pub h: Vector3<f64>,
    pub grad_rho: Vector3<f64>,
    pub grad_p: Vector3<f64>,
    pub nabla_h: Matrix3<f64>,
    pub dt_rho: f64,
    pub dt_p: f64,
    pub dt_h: Vector3<f64>,
}

impl BackgroundEval {
    /// A spatially constant state; checks positivity.
    pub fn uniform(rho: f64, p: f64, gamma: f64, h: Vector3<f64>) -> Result<Self> {
        let ev = Self {
            rho,
            p,
            gamma,
            h,
            grad_rho: Vector3::zeros(),
            grad_p: Vector3::zeros(),
            nabla_h: Matrix3::zeros(),
            dt_rho: 0.0,
            dt_p: 0.0,
            dt_h: Vector3::zeros(),
        };
        ev.check_physical()?;
        Ok(ev)
    }

    pub fn check_physical(&self) -> Result<()> {
        if !(self.rho > 0.0) {
            return Err(Error::NonPhysical(format!("rho = {} must be positive", self.rho)));
        }
        if !(self.p > 0.0) {
            return Err(Error::NonPhysical(format!("p = {} must be positive", self.p)));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::NonPhysical(format!("gamma = {} must be positive", self.gamma)));
        }
        Ok(())
    }

    pub fn gamma_p(&self) -> f64 {
        self.gamma * self.p
    }

    pub fn c2(&self) -> f64 {
        self.gamma * self.p / self.rho
    }

    pub fn h2(&self) -> f64 {
        self.h.norm_squared() / self.rho
    }

    pub fn curl_h(&self) -> Vector3<f64> {
        let j = &self.nabla_h;
        Vector3::new(j[(1, 2)] - j[(2, 1)], j[(2, 0)] - j[(0, 2)], j[(0, 1)] - j[(1, 0)])
    }

    pub fn div_h(&self) -> f64 {
        self.nabla_h.trace()
    }

    /// `grad |H|^2`
    pub fn grad_h_sq(&self) -> Vector3<f64> {
        2.0 * self.nabla_h * self.h
    }

    /// `(H . grad) H`
    pub fn h_dot_grad_h(&self) -> Vector3<f64> {
        self.nabla_h.transpose() * self.h
    }

    pub fn equilibrium_residual(&self) -> Vector3<f64> {
        self.grad_p + self.h.cross(&self.curl_h())
    }
}

fn split(d: Dual) -> (f64, f64, Vector3<f64>) {
    (d.re, d.eps[0], Vector3::new(d.eps[1], d.eps[2], d.eps[3]))
}

pub fn eval_background(bg: &BackgroundField, t: f64, x: [f64; 3]) -> Result<BackgroundEval> {
    let (rho, dt_rho, grad_rho) = split(bg.rho.eval_dual(t, x)?);
    let (p, dt_p, grad_p) = split(bg.p.eval_dual(t, x)?);
    let mut h = Vector3::zeros();
    let mut dt_h = Vector3::zeros();
    let mut nabla_h = Matrix3::zeros();
    for (k, e) in bg.h.iter().enumerate() {
        let (v, dt, grad) = split(e.eval_dual(t, x)?);
        h[k] = v;
        dt_h[k] = dt;
        nabla_h.set_column(k, &grad);
    }
    let ev = BackgroundEval {
        rho,
        p,
        gamma: bg.gamma,
        h,
        grad_rho,
        grad_p,
        nabla_h,
        dt_rho,
        dt_p,
        dt_h,
    };
    ev.check_physical()?;
    Ok(ev)
}

/// `grad p + H x curl H` at `t = 0`.
pub fn equilibrium_residual(bg: &BackgroundField, x: [f64; 3]) -> Result<Vector3<f64>> {
    Ok(eval_background(bg, 0.0, x)?.equilibrium_residual())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_background() {
        let bg = BackgroundField::constant(1.0, 1.0, [1.0, 0.0, 0.0], 5.0 / 3.0).unwrap();
        let ev = bg.eval(0.3, [1.0, -2.0, 4.0]).unwrap();
        assert_eq!(ev.grad_rho, Vector3::zeros());
        assert_eq!(ev.grad_p, Vector3::zeros());
        assert_eq!(ev.nabla_h, Matrix3::zeros());
        assert!((ev.c2() - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(ev.h2(), 1.0);
        assert_eq!(equilibrium_residual(&bg, [1.0, 2.0, 3.0]).unwrap(), Vector3::zeros());
    }

    #[test]
    fn linear_pressure() {
        let bg = BackgroundField::parse("1", "1+x2", ["1", "0", "0"], 1.4).unwrap();
        let ev = bg.eval(0.0, [0.0; 3]).unwrap();
        assert_eq!(ev.grad_p, Vector3::new(0.0, 1.0, 0.0));
        assert_eq!(equilibrium_residual(&bg, [0.0; 3]).unwrap(), Vector3::new(0.0, 1.0, 0.0));
    }

    #[test]
    fn exponential_density() {
        let bg = BackgroundField::parse("exp(x1)", "1", ["0", "0", "1"], 1.4).unwrap();
        let ev = bg.eval(0.0, [1.0, 0.0, 0.0]).unwrap();
        let e = std::f64::consts::E;
        assert!((ev.rho - e).abs() < 1e-15);
        assert!((ev.grad_rho[0] - e).abs() < 1e-14);
        let h = 1e-5;
        let fd = (bg.rho.eval(0.0, [1.0 + h, 0.0, 0.0]).unwrap()
            - bg.rho.eval(0.0, [1.0 - h, 0.0, 0.0]).unwrap())
            / (2.0 * h);
        assert!((fd - ev.grad_rho[0]).abs() < 1e-8);
    }

    #[test]
    fn balanced_sheared_field() {
        let bg = BackgroundField::parse("1", "1 - x2*x2/2", ["x2", "0", "0"], 5.0 / 3.0).unwrap();
        for &y in &[-0.7, 0.0, 0.4, 1.1] {
            let ev = bg.eval(0.0, [0.2, y, -0.5]).unwrap();
            assert_eq!(ev.grad_p, Vector3::new(0.0, -y, 0.0));
            assert_eq!(ev.curl_h(), Vector3::new(0.0, 0.0, -1.0));
            assert_eq!(ev.equilibrium_residual(), Vector3::zeros());
        }
    }

    #[test]
    fn jacobian_layout() {
        let bg = BackgroundField::parse("1", "1", ["x2", "3*x1", "x1*x3"], 1.4).unwrap();
        let ev = bg.eval(0.0, [2.0, 0.0, 5.0]).unwrap();
        // (i, k) = d_i H_k
        assert_eq!(ev.nabla_h[(1, 0)], 1.0);
        assert_eq!(ev.nabla_h[(0, 1)], 3.0);
        assert_eq!(ev.nabla_h[(0, 2)], 5.0);
        assert_eq!(ev.nabla_h[(2, 2)], 2.0);
        assert_eq!(ev.div_h(), 2.0);
        assert_eq!(ev.curl_h(), Vector3::new(0.0, -5.0, 2.0));
    }

    #[test]
    fn non_physical() {
        let bg = BackgroundField::parse("x1", "1", ["0", "0", "0"], 1.4).unwrap();
        assert!(matches!(bg.eval(0.0, [-1.0, 0.0, 0.0]), Err(Error::NonPhysical(_))));
        let bg = BackgroundField::parse("1", "sqrt(x1)", ["0", "0", "0"], 1.4).unwrap();
        assert!(matches!(bg.eval(0.0, [-1.0, 0.0, 0.0]), Err(Error::Domain(_))));
        assert!(BackgroundField::constant(1.0, 1.0, [0.0; 3], 0.0).is_err());
    }
}
