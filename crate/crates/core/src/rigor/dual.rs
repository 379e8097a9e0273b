//! Forward-mode derivative propagation over any [`Scalar`].

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::EvalError;
use crate::scalar::{self, Scalar};

/// Partial derivatives; empty for constants.
pub type Partials<T> = Vec<T>;

/// A value together with its partial derivatives. An empty `partials` vector
/// stands for all-zero partials, so constants carry no allocation.
#[derive(Clone, Debug, PartialEq)]
pub struct Dual<T> {
    pub value: T,
    pub partials: Partials<T>,
}

impl<T: Scalar> Dual<T> {
    pub fn new(value: T, partials: impl IntoIterator<Item = T>) -> Self {
        Dual {
            value,
            partials: partials.into_iter().collect(),
        }
    }

    pub fn constant_value(value: T) -> Self {
        Dual {
            value,
            partials: Partials::new(),
        }
    }

    /// The `index`-th of `count` independent variables.
    pub fn variable(value: T, index: usize, count: usize) -> Self {
        let partials = (0..count)
            .map(|i| T::constant(if i == index { 1.0 } else { 0.0 }))
            .collect();
        Dual { value, partials }
    }

    pub fn partial(&self, i: usize) -> T {
        self.partials.get(i).cloned().unwrap_or_else(|| T::constant(0.0))
    }

    fn zip_partials(a: &[T], b: &[T], f: impl Fn(T, T) -> T) -> Partials<T> {
        let n = a.len().max(b.len());
        let zero = T::constant(0.0);
        (0..n)
            .map(|i| {
                let x = a.get(i).cloned().unwrap_or_else(|| zero.clone());
                let y = b.get(i).cloned().unwrap_or_else(|| zero.clone());
                f(x, y)
            })
            .collect()
    }

    fn scale_partials(p: &[T], k: &T) -> Partials<T> {
        p.iter().map(|x| x.clone() * k.clone()).collect()
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Dual<T>;
    fn add(self, rhs: Dual<T>) -> Dual<T> {
        let partials = if rhs.partials.is_empty() {
            self.partials
        } else if self.partials.is_empty() {
            rhs.partials
        } else {
            Dual::zip_partials(&self.partials, &rhs.partials, |x, y| x + y)
        };
        Dual {
            value: self.value + rhs.value,
            partials,
        }
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Dual<T>;
    fn sub(self, rhs: Dual<T>) -> Dual<T> {
        self + (-rhs)
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Dual<T>;
    fn neg(self) -> Dual<T> {
        Dual {
            value: -self.value,
            partials: self.partials.into_iter().map(|x| -x).collect(),
        }
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Dual<T>;
    fn mul(self, rhs: Dual<T>) -> Dual<T> {
        let partials = match (self.partials.is_empty(), rhs.partials.is_empty()) {
            (true, true) => Partials::new(),
            (false, true) => Dual::scale_partials(&self.partials, &rhs.value),
            (true, false) => Dual::scale_partials(&rhs.partials, &self.value),
            (false, false) => Dual::zip_partials(&self.partials, &rhs.partials, |x, y| {
                x * rhs.value.clone() + y * self.value.clone()
            }),
        };
        Dual {
            value: self.value * rhs.value,
            partials,
        }
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    fn constant(x: f64) -> Self {
        Dual::constant_value(T::constant(x))
    }

    fn try_div(self, rhs: Self) -> Result<Self, EvalError> {
        let value = self.value.clone().try_div(rhs.value.clone())?;
        if self.partials.is_empty() && rhs.partials.is_empty() {
            return Ok(Dual::constant_value(value));
        }
        let inv = T::constant(1.0).try_div(rhs.value)?;
        let partials = Dual::zip_partials(&self.partials, &rhs.partials, |x, y| {
            (x - value.clone() * y) * inv.clone()
        });
        Ok(Dual { value, partials })
    }

    fn try_sqrt(self) -> Result<Self, EvalError> {
        let value = self.value.try_sqrt()?;
        if self.partials.is_empty() {
            return Ok(Dual::constant_value(value));
        }
        let half_inv = T::constant(0.5).try_div(value.clone())?;
        let partials = Dual::scale_partials(&self.partials, &half_inv);
        Ok(Dual { value, partials })
    }

    fn square(self) -> Self {
        let partials = Dual::scale_partials(&self.partials, &self.value.clone().mul_f64(2.0));
        Dual {
            value: self.value.square(),
            partials,
        }
    }

    fn mul_f64(self, k: f64) -> Self {
        Dual {
            value: self.value.mul_f64(k),
            partials: self.partials.into_iter().map(|x| x.mul_f64(k)).collect(),
        }
    }

    fn unit_ratio(self, r: Self) -> Result<Self, EvalError> {
        if self.partials.is_empty() && r.partials.is_empty() {
            return Ok(Dual::constant_value(self.value.unit_ratio(r.value)?));
        }
        self.try_div(r)
    }

    fn approx(&self) -> f64 {
        self.value.approx()
    }

    /// `y = ‖x‖x` has `ẏ = ‖x‖ẋ + x (u·ẋ)` with `u = x/‖x‖`; the second term
    /// vanishes with `x`, so any `u` in the unit cube is a valid enclosure there.
    fn norm_scaled(v: &[Self]) -> Result<Vec<Self>, EvalError> {
        let values: Vec<T> = v.iter().map(|x| x.value.clone()).collect();
        let r = scalar::norm(&values)?;
        let nparts = v.iter().map(|x| x.partials.len()).max().unwrap_or(0);
        let u: Vec<T> = values
            .iter()
            .map(|x| x.clone().unit_ratio(r.clone()))
            .collect::<Result<_, _>>()?;
        let udot: Vec<T> = (0..nparts)
            .map(|k| {
                let mut acc = T::constant(0.0);
                for (ui, xi) in u.iter().zip(v) {
                    acc = acc + ui.clone() * xi.partial(k);
                }
                acc
            })
            .collect();
        Ok(v.iter()
            .zip(&values)
            .map(|(xi, val)| {
                let partials = if nparts == 0 {
                    Partials::new()
                } else {
                    (0..nparts)
                        .map(|k| r.clone() * xi.partial(k) + val.clone() * udot[k].clone())
                        .collect()
                };
                Dual {
                    value: val.clone() * r.clone(),
                    partials,
                }
            })
            .collect())
    }
}
