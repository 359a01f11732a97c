//! First-order forward-mode values carrying the gradient with respect to
//! `(x0, eps)`. Densities are polynomials in Gaussian amplitudes, so
//! propagating jets through the same arithmetic yields exact analytic
//! derivatives.

use std::ops::{Add, Mul, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Jet {
    pub v: f64,
    /// d/dx0, d/deps
    pub d: [f64; 2],
}

impl Jet {
    pub fn new(v: f64, d_x0: f64, d_eps: f64) -> Self {
        Jet { v, d: [d_x0, d_eps] }
    }
}

/// Arithmetic shared by plain values and jets so that density formulas are
/// written once.
pub(crate) trait Field:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Mul<f64, Output = Self>
{
    fn square(self) -> Self {
        self * self
    }
}

impl Field for f64 {}
impl Field for Jet {}

impl Add for Jet {
    type Output = Jet;
    #[inline]
    fn add(self, o: Jet) -> Jet {
        Jet { v: self.v + o.v, d: [self.d[0] + o.d[0], self.d[1] + o.d[1]] }
    }
}

impl Sub for Jet {
    type Output = Jet;
    #[inline]
    fn sub(self, o: Jet) -> Jet {
        Jet { v: self.v - o.v, d: [self.d[0] - o.d[0], self.d[1] - o.d[1]] }
    }
}

impl Mul for Jet {
    type Output = Jet;
    #[inline]
    fn mul(self, o: Jet) -> Jet {
        Jet {
            v: self.v * o.v,
            d: [self.d[0] * o.v + self.v * o.d[0], self.d[1] * o.v + self.v * o.d[1]],
        }
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    #[inline]
    fn mul(self, s: f64) -> Jet {
        Jet { v: self.v * s, d: [self.d[0] * s, self.d[1] * s] }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule() {
        let a = Jet::new(2.0, 1.0, 0.5);
        let b = Jet::new(3.0, -1.0, 2.0);
        let p = a * b - a * 0.5 + b;
        assert_eq!(p.v, 6.0 - 1.0 + 3.0);
        assert_eq!(p.d, [3.0 - 2.0 - 0.5 - 1.0, 1.5 + 4.0 - 0.25 + 2.0]);
    }
}
