//! Minimal double-double arithmetic: a value is the unevaluated sum
//! `hi + lo` with `|lo| <= ulp(hi) / 2`.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd { hi: s, lo: (a - (s - bb)) + (b - bb) }
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

#[inline]
fn split(x: f64) -> (f64, f64) {
    const SPLITTER: f64 = 134_217_729.0; // 2^27 + 1
    let c = SPLITTER * x;
    let big = c - (c - x);
    (big, x - big)
}

/// Exact product by Dekker's splitting; avoids a software `fma`.
#[inline]
fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    let (a1, a2) = split(a);
    let (b1, b2) = split(b);
    Dd { hi: p, lo: ((a1 * b1 - p) + a1 * b2 + a2 * b1) + a2 * b2 }
}

impl Dd {
    #[inline]
    pub fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn sum(a: f64, b: f64) -> Self {
        two_sum(a, b)
    }

    #[inline]
    pub fn product(a: f64, b: f64) -> Self {
        two_prod(a, b)
    }

    #[inline]
    pub fn recip(self) -> Self {
        Dd::new(1.0) / self
    }
}

impl Add for Dd {
    type Output = Dd;

    #[inline]
    fn add(self, o: Dd) -> Dd {
        let s = two_sum(self.hi, o.hi);
        let t = two_sum(self.lo, o.lo);
        let s = quick_two_sum(s.hi, s.lo + t.hi);
        quick_two_sum(s.hi, s.lo + t.lo)
    }
}

impl Add<f64> for Dd {
    type Output = Dd;

    #[inline]
    fn add(self, o: f64) -> Dd {
        let s = two_sum(self.hi, o);
        quick_two_sum(s.hi, s.lo + self.lo)
    }
}

impl Neg for Dd {
    type Output = Dd;

    #[inline]
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for Dd {
    type Output = Dd;

    #[inline]
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;

    #[inline]
    fn mul(self, o: Dd) -> Dd {
        let p = two_prod(self.hi, o.hi);
        quick_two_sum(p.hi, p.lo + (self.hi * o.lo + self.lo * o.hi))
    }
}

impl Mul<f64> for Dd {
    type Output = Dd;

    #[inline]
    fn mul(self, o: f64) -> Dd {
        let p = two_prod(self.hi, o);
        quick_two_sum(p.hi, p.lo + self.lo * o)
    }
}

impl Div for Dd {
    type Output = Dd;

    #[inline]
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * q1;
        let q2 = r.hi / o.hi;
        let r = r - o * q2;
        let q3 = r.hi / o.hi;
        quick_two_sum(q1, q2) + q3
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_product_and_sum() {
        let p = Dd::product(1.0 + f64::EPSILON, 1.0 + f64::EPSILON);
        assert_eq!(p.hi, 1.0 + 2.0 * f64::EPSILON);
        assert_eq!(p.lo, f64::EPSILON * f64::EPSILON);
        let s = Dd::sum(1.0, 1e-20);
        assert_eq!((s.hi, s.lo), (1.0, 1e-20));
    }

    #[test]
    fn division_recovers_thirds() {
        let third = Dd::new(1.0) / Dd::new(3.0);
        let back = third * 3.0 - Dd::new(1.0);
        assert!(back.value().abs() < 1e-31);
    }

    #[test]
    fn cancellation_keeps_low_part() {
        let x = Dd::sum(1.0, 1e-18);
        assert_eq!((x - Dd::new(1.0)).value(), 1e-18);
    }
}
