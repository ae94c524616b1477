//! Forward-mode dual numbers carrying the gradient with respect to `(t, x1, x2, x3)`.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Number of independent variables: `t, x1, x2, x3`.
pub const NVARS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual {
    pub re: f64,
    pub eps: [f64; NVARS],
}

impl Dual {
    pub const fn constant(re: f64) -> Self {
        Self { re, eps: [0.0; NVARS] }
    }

    /// Independent variable number `slot` with value `re`.
    pub fn variable(re: f64, slot: usize) -> Self {
        let mut eps = [0.0; NVARS];
        eps[slot] = 1.0;
        Self { re, eps }
    }

    fn chain(self, re: f64, slope: f64) -> Self {
        Self {
            re,
            eps: self.eps.map(|d| slope * d),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.eps.iter().all(|d| d.is_finite())
    }

    pub fn has_zero_tangent(&self) -> bool {
        self.eps.iter().all(|&d| d == 0.0)
    }

    pub fn sin(self) -> Self {
        self.chain(self.re.sin(), self.re.cos())
    }

    pub fn cos(self) -> Self {
        self.chain(self.re.cos(), -self.re.sin())
    }

    pub fn exp(self) -> Self {
        let e = self.re.exp();
        self.chain(e, e)
    }

    pub fn tanh(self) -> Self {
        let t = self.re.tanh();
        self.chain(t, 1.0 - t * t)
    }

    /// `|x|`; the derivative at zero is taken as zero.
    pub fn abs(self) -> Self {
        let slope = if self.re > 0.0 {
            1.0
        } else if self.re < 0.0 {
            -1.0
        } else {
            0.0
        };
        self.chain(self.re.abs(), slope)
    }

    /// Square root; `None` where the value or its derivative is undefined.
    pub fn sqrt(self) -> Option<Self> {
        if self.re < 0.0 {
            return None;
        }
        if self.re == 0.0 {
            return self.has_zero_tangent().then_some(Self::constant(0.0));
        }
        let s = self.re.sqrt();
        Some(self.chain(s, 0.5 / s))
    }

    /// `self^rhs`; `None` outside the real domain.
    pub fn pow(self, rhs: Self) -> Option<Self> {
        if rhs.has_zero_tangent() {
            let k = rhs.re;
            if self.re == 0.0 {
                // 0^k: defined for k >= 1 (derivative k*0^(k-1)), or k == 0
                if k == 0.0 {
                    return Some(Self::constant(1.0));
                }
                if k >= 1.0 {
                    let slope = if k == 1.0 { 1.0 } else { 0.0 };
                    return Some(self.chain(0.0, slope));
                }
                return None;
            }
            if self.re < 0.0 && k.fract() != 0.0 {
                return None;
            }
            let v = self.re.powf(k);
            return Some(self.chain(v, k * self.re.powf(k - 1.0)));
        }
        if self.re <= 0.0 {
            return None;
        }
        let v = self.re.powf(rhs.re);
        let ln = self.re.ln();
        let mut eps = [0.0; NVARS];
        for (i, e) in eps.iter_mut().enumerate() {
            *e = v * (rhs.eps[i] * ln + rhs.re * self.eps[i] / self.re);
        }
        Some(Self { re: v, eps })
    }
}

impl Add for Dual {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut eps = self.eps;
        for (e, r) in eps.iter_mut().zip(rhs.eps) {
            *e += r;
        }
        Self { re: self.re + rhs.re, eps }
    }
}

impl Sub for Dual {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for Dual {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            re: -self.re,
            eps: self.eps.map(|d| -d),
        }
    }
}

impl Mul for Dual {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut eps = [0.0; NVARS];
        for (i, e) in eps.iter_mut().enumerate() {
            *e = self.eps[i] * rhs.re + self.re * rhs.eps[i];
        }
        Self { re: self.re * rhs.re, eps }
    }
}

impl Div for Dual {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let inv = 1.0 / rhs.re;
        let q = self.re * inv;
        let mut eps = [0.0; NVARS];
        for (i, e) in eps.iter_mut().enumerate() {
            *e = (self.eps[i] - q * rhs.eps[i]) * inv;
        }
        Self { re: q, eps }
    }
}
