//! The scalar contract that subdivision rules are written against.
//!
//! Every rule is implemented once, generically over [`Scalar`], and then
//! evaluated over plain `f64`, over [`Interval`](crate::rigor::Interval)s and
//! over derivative-carrying [`Dual`](crate::rigor::Dual) numbers.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::EvalError;

pub trait Scalar:
    Clone + Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    fn constant(x: f64) -> Self;

    fn try_div(self, rhs: Self) -> Result<Self, EvalError>;

    fn try_sqrt(self) -> Result<Self, EvalError>;

    fn square(self) -> Self {
        self.clone() * self
    }

    fn mul_f64(self, k: f64) -> Self {
        self * Self::constant(k)
    }

    /// `x / r` for a quantity with `|x| <= r`. When `r` may vanish, any value
    /// in `[-1, 1]` is acceptable.
    fn unit_ratio(self, r: Self) -> Result<Self, EvalError>;

    /// Representative real value (the midpoint for intervals).
    fn approx(&self) -> f64;

    /// `‖v‖ v`, which is continuously differentiable at the origin even though
    /// `‖v‖` is not.
    fn norm_scaled(v: &[Self]) -> Result<Vec<Self>, EvalError> {
        let r = norm(v)?;
        Ok(v.iter().map(|x| x.clone() * r.clone()).collect())
    }
}

impl Scalar for f64 {
    fn constant(x: f64) -> Self {
        x
    }

    fn try_div(self, rhs: Self) -> Result<Self, EvalError> {
        if rhs == 0.0 {
            return Err(EvalError::DivisionByZero);
        }
        Ok(self / rhs)
    }

    fn try_sqrt(self) -> Result<Self, EvalError> {
        if self < 0.0 {
            return Err(EvalError::NegativeSqrt);
        }
        Ok(self.sqrt())
    }

    fn mul_f64(self, k: f64) -> Self {
        self * k
    }

    fn unit_ratio(self, r: Self) -> Result<Self, EvalError> {
        if r == 0.0 {
            Ok(0.0)
        } else {
            Ok((self / r).clamp(-1.0, 1.0))
        }
    }

    fn approx(&self) -> f64 {
        *self
    }
}

// Point helpers. Points are flat coordinate slices of length `d`.

pub fn sub<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(x, y)| x.clone() - y.clone()).collect()
}

pub fn add<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(x, y)| x.clone() + y.clone()).collect()
}

pub fn scale<T: Scalar>(a: &[T], k: &T) -> Vec<T> {
    a.iter().map(|x| x.clone() * k.clone()).collect()
}

pub fn scale_f64<T: Scalar>(a: &[T], k: f64) -> Vec<T> {
    a.iter().map(|x| x.clone().mul_f64(k)).collect()
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    let mut acc = T::constant(0.0);
    for (x, y) in a.iter().zip(b) {
        acc = acc + x.clone() * y.clone();
    }
    acc
}

pub fn norm_sq<T: Scalar>(a: &[T]) -> T {
    let mut acc = T::constant(0.0);
    for x in a {
        acc = acc + x.clone().square();
    }
    acc
}

pub fn norm<T: Scalar>(a: &[T]) -> Result<T, EvalError> {
    norm_sq(a).try_sqrt()
}

/// `a·p + b·q` with real weights.
pub fn affine2<T: Scalar>(p: &[T], a: f64, q: &[T], b: f64) -> Vec<T> {
    p.iter()
        .zip(q)
        .map(|(x, y)| x.clone().mul_f64(a) + y.clone().mul_f64(b))
        .collect()
}

/// z-component of the planar cross product.
pub fn cross2<T: Scalar>(a: &[T], b: &[T]) -> T {
    a[0].clone() * b[1].clone() - a[1].clone() * b[0].clone()
}
