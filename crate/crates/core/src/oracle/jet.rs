//! Second-order forward-mode jets in one variable.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar that can be pushed through the exact fields: either a plain `f64`
/// or a [`Dual2`] carrying first and second derivatives.
pub trait Jet:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn cst(x: f64) -> Self;
    fn value(self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn powf(self, p: f64) -> Self;
}

impl Jet for f64 {
    fn cst(x: f64) -> Self {
        x
    }
    fn value(self) -> f64 {
        self
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
}

/// `(f, f', f'')` with respect to one seeded variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual2 {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Dual2 {
    pub fn var(x: f64) -> Self {
        Dual2 {
            v: x,
            d1: 1.0,
            d2: 0.0,
        }
    }

    /// Applies a scalar function given its value and first two derivatives at `self.v`.
    fn chain(self, f: f64, df: f64, ddf: f64) -> Self {
        Dual2 {
            v: f,
            d1: df * self.d1,
            d2: ddf * self.d1 * self.d1 + df * self.d2,
        }
    }
}

impl Add for Dual2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Dual2 {
            v: self.v + o.v,
            d1: self.d1 + o.d1,
            d2: self.d2 + o.d2,
        }
    }
}

impl Sub for Dual2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Dual2 {
            v: self.v - o.v,
            d1: self.d1 - o.d1,
            d2: self.d2 - o.d2,
        }
    }
}

impl Mul for Dual2 {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Dual2 {
            v: self.v * o.v,
            d1: self.d1 * o.v + self.v * o.d1,
            d2: self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        }
    }
}

impl Div for Dual2 {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let x = o.v;
        self * o.chain(1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x))
    }
}

impl Neg for Dual2 {
    type Output = Self;
    fn neg(self) -> Self {
        Dual2 {
            v: -self.v,
            d1: -self.d1,
            d2: -self.d2,
        }
    }
}

impl Jet for Dual2 {
    fn cst(x: f64) -> Self {
        Dual2 {
            v: x,
            d1: 0.0,
            d2: 0.0,
        }
    }
    fn value(self) -> f64 {
        self.v
    }
    fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }
    fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }
    fn powf(self, p: f64) -> Self {
        let x = self.v;
        self.chain(
            x.powf(p),
            p * x.powf(p - 1.0),
            p * (p - 1.0) * x.powf(p - 2.0),
        )
    }
}
