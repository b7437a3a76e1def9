use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::expr::tape::Scalar;

/// First-order dual number `v + d ε`, `ε² = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dual {
    pub v: f64,
    pub d: f64,
}

impl Dual {
    fn chain(self, g: f64, g1: f64) -> Dual {
        Dual { v: g, d: g1 * self.d }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual { v: self.v + o.v, d: self.d + o.d }
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual { v: self.v - o.v, d: self.d - o.d }
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual {
            v: self.v * o.v,
            d: self.v * o.d + self.d * o.v,
        }
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, o: Dual) -> Dual {
        let r = 1.0 / o.v;
        self * o.chain(r, -r * r)
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual { v: -self.v, d: -self.d }
    }
}

impl Scalar for Dual {
    fn constant(c: f64) -> Self {
        Dual { v: c, d: 0.0 }
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn all_finite(&self) -> bool {
        self.v.is_finite() && self.d.is_finite()
    }
    fn sin(self) -> Self {
        self.chain(self.v.sin(), self.v.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.v.cos(), -self.v.sin())
    }
    fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e)
    }
    fn ln(self) -> Self {
        self.chain(self.v.ln(), 1.0 / self.v)
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s)
    }
    fn tanh(self) -> Self {
        let t = self.v.tanh();
        self.chain(t, 1.0 - t * t)
    }
    fn powi(self, k: i32) -> Self {
        let (g, g1, _) = powi_terms(self.v, k);
        self.chain(g, g1)
    }
    fn powf(self, exponent: Self) -> Self {
        (exponent * self.ln()).exp()
    }
}

/// Hyper-dual number `v + a ε₁ + b ε₂ + ab ε₁ε₂` with `ε₁² = ε₂² = 0`.
///
/// Seeding `ε₁` on `x_i` and `ε₂` on `x_j` makes the `ab` part equal to
/// `∂²f/∂x_i∂x_j` with no truncation error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct HyperDual {
    pub v: f64,
    pub a: f64,
    pub b: f64,
    pub ab: f64,
}

impl HyperDual {
    /// Applies a scalar function given its value and first two derivatives at `v`.
    fn chain(self, g: f64, g1: f64, g2: f64) -> HyperDual {
        HyperDual {
            v: g,
            a: g1 * self.a,
            b: g1 * self.b,
            ab: g1 * self.ab + g2 * self.a * self.b,
        }
    }
}

impl Add for HyperDual {
    type Output = HyperDual;
    fn add(self, o: HyperDual) -> HyperDual {
        HyperDual {
            v: self.v + o.v,
            a: self.a + o.a,
            b: self.b + o.b,
            ab: self.ab + o.ab,
        }
    }
}

impl Sub for HyperDual {
    type Output = HyperDual;
    fn sub(self, o: HyperDual) -> HyperDual {
        HyperDual {
            v: self.v - o.v,
            a: self.a - o.a,
            b: self.b - o.b,
            ab: self.ab - o.ab,
        }
    }
}

impl Mul for HyperDual {
    type Output = HyperDual;
    fn mul(self, o: HyperDual) -> HyperDual {
        HyperDual {
            v: self.v * o.v,
            a: self.v * o.a + self.a * o.v,
            b: self.v * o.b + self.b * o.v,
            ab: self.v * o.ab + self.a * o.b + self.b * o.a + self.ab * o.v,
        }
    }
}

impl Div for HyperDual {
    type Output = HyperDual;
    fn div(self, o: HyperDual) -> HyperDual {
        let r = 1.0 / o.v;
        self * o.chain(r, -r * r, 2.0 * r * r * r)
    }
}

impl Neg for HyperDual {
    type Output = HyperDual;
    fn neg(self) -> HyperDual {
        HyperDual {
            v: -self.v,
            a: -self.a,
            b: -self.b,
            ab: -self.ab,
        }
    }
}

impl Scalar for HyperDual {
    fn constant(c: f64) -> Self {
        HyperDual { v: c, a: 0.0, b: 0.0, ab: 0.0 }
    }
    fn value(&self) -> f64 {
        self.v
    }
    fn all_finite(&self) -> bool {
        self.v.is_finite() && self.a.is_finite() && self.b.is_finite() && self.ab.is_finite()
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
    fn ln(self) -> Self {
        let r = 1.0 / self.v;
        self.chain(self.v.ln(), r, -r * r)
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }
    fn tanh(self) -> Self {
        let t = self.v.tanh();
        let d = 1.0 - t * t;
        self.chain(t, d, -2.0 * t * d)
    }
    fn powi(self, k: i32) -> Self {
        let (g, g1, g2) = powi_terms(self.v, k);
        self.chain(g, g1, g2)
    }
    fn powf(self, exponent: Self) -> Self {
        (exponent * self.ln()).exp()
    }
}

/// `x^k` and its first two derivatives, skipping terms whose coefficient is
/// zero so that `x = 0` never produces `0 * inf`.
fn powi_terms(x: f64, k: i32) -> (f64, f64, f64) {
    let kf = k as f64;
    let g = x.powi(k);
    let g1 = if k == 0 { 0.0 } else { kf * x.powi(k - 1) };
    let g2 = if k == 0 || k == 1 { 0.0 } else { kf * (kf - 1.0) * x.powi(k - 2) };
    (g, g1, g2)
}
