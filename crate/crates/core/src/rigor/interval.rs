//! Closed intervals with outward rounding.
//!
//! Addition and multiplication detect inexact results with error-free
//! transforms and widen by one ulp only when the rounded result is off.
//! Division and square root always widen by one ulp.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::EvalError;
use crate::scalar::Scalar;

/// Products below this magnitude may have an inexact FMA residual, so they
/// are widened unconditionally.
const TINY: f64 = 1e-290;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

fn add_down(a: f64, b: f64) -> f64 {
    let (s, e) = two_sum(a, b);
    if !s.is_finite() {
        return s;
    }
    if e < 0.0 || e.is_nan() {
        s.next_down()
    } else {
        s
    }
}

fn add_up(a: f64, b: f64) -> f64 {
    let (s, e) = two_sum(a, b);
    if !s.is_finite() {
        return s;
    }
    if e > 0.0 || e.is_nan() {
        s.next_up()
    } else {
        s
    }
}

fn mul_down(a: f64, b: f64) -> f64 {
    let p = a * b;
    if !p.is_finite() {
        return p;
    }
    if p.abs() < TINY {
        return if p == 0.0 && (a == 0.0 || b == 0.0) { 0.0 } else { p.next_down() };
    }
    if a.mul_add(b, -p) < 0.0 {
        p.next_down()
    } else {
        p
    }
}

fn mul_up(a: f64, b: f64) -> f64 {
    let p = a * b;
    if !p.is_finite() {
        return p;
    }
    if p.abs() < TINY {
        return if p == 0.0 && (a == 0.0 || b == 0.0) { 0.0 } else { p.next_up() };
    }
    if a.mul_add(b, -p) > 0.0 {
        p.next_up()
    } else {
        p
    }
}

impl Interval {
    /// Panics if `lo > hi` or either end is NaN.
    pub fn new(lo: f64, hi: f64) -> Self {
        assert!(lo <= hi, "invalid interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    /// `[-r, r]`.
    pub fn symmetric(r: f64) -> Self {
        Interval::new(-r.abs(), r.abs())
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn mid(&self) -> f64 {
        if self.lo == self.hi {
            self.lo
        } else {
            0.5 * self.lo + 0.5 * self.hi
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    /// `max |x|` over the interval.
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    /// `min |x|` over the interval.
    pub fn mig(&self) -> f64 {
        if self.contains(0.0) {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn abs(&self) -> Interval {
        Interval {
            lo: self.mig(),
            hi: self.mag(),
        }
    }

    pub fn min(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.min(other.lo),
            hi: self.hi.min(other.hi),
        }
    }

    pub fn max(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.max(other.lo),
            hi: self.hi.max(other.hi),
        }
    }

    /// Splits at the midpoint.
    pub fn bisect(&self) -> (Interval, Interval) {
        let m = self.mid();
        (Interval { lo: self.lo, hi: m }, Interval { lo: m, hi: self.hi })
    }

    pub fn sqr(self) -> Interval {
        let a = self.mig();
        let b = self.mag();
        Interval {
            lo: mul_down(a, a).max(0.0),
            hi: mul_up(b, b),
        }
    }

    pub fn recip(self) -> Result<Interval, EvalError> {
        Interval::point(1.0).try_div(self)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        Interval {
            lo: add_down(self.lo, rhs.lo),
            hi: add_up(self.hi, rhs.hi),
        }
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        self + (-rhs)
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval {
            lo: -self.hi,
            hi: -self.lo,
        }
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        let pairs = [
            (self.lo, rhs.lo),
            (self.lo, rhs.hi),
            (self.hi, rhs.lo),
            (self.hi, rhs.hi),
        ];
        let products = pairs.map(|(a, b)| a * b);
        if products.iter().any(|p| p.is_nan()) {
            // 0 * inf
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for (a, b) in pairs {
                lo = lo.min(mul_down(a, b));
                hi = hi.max(mul_up(a, b));
            }
            return Interval { lo, hi };
        }
        let pmin = products.iter().copied().fold(f64::INFINITY, f64::min);
        let pmax = products.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // rounding is monotone, so the exact extremes come from pairs whose
        // rounded product equals the rounded extreme
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for ((a, b), p) in pairs.into_iter().zip(products) {
            if p == pmin {
                lo = lo.min(mul_down(a, b));
            }
            if p == pmax {
                hi = hi.max(mul_up(a, b));
            }
        }
        Interval { lo, hi }
    }
}

impl Scalar for Interval {
    fn constant(x: f64) -> Self {
        Interval::point(x)
    }

    fn try_div(self, rhs: Self) -> Result<Self, EvalError> {
        if rhs.contains(0.0) {
            return Err(EvalError::DivisionByZero);
        }
        let qs = [
            self.lo / rhs.lo,
            self.lo / rhs.hi,
            self.hi / rhs.lo,
            self.hi / rhs.hi,
        ];
        let lo = qs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = qs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Interval {
            lo: lo.next_down(),
            hi: hi.next_up(),
        })
    }

    fn try_sqrt(self) -> Result<Self, EvalError> {
        if self.lo < 0.0 {
            return Err(EvalError::NegativeSqrt);
        }
        let lo = if self.lo == 0.0 { 0.0 } else { self.lo.sqrt().next_down().max(0.0) };
        let hi = if self.hi == 0.0 { 0.0 } else { self.hi.sqrt().next_up() };
        Ok(Interval { lo, hi })
    }

    fn square(self) -> Self {
        self.sqr()
    }

    fn unit_ratio(self, r: Self) -> Result<Self, EvalError> {
        let unit = Interval::new(-1.0, 1.0);
        if r.lo > 0.0 {
            let q = self.try_div(r)?;
            Ok(q.intersect(&unit).unwrap_or(unit))
        } else {
            Ok(unit)
        }
    }

    fn approx(&self) -> f64 {
        self.mid()
    }
}
