//! Planar circle-preserving insertion rule.
//!
//! The new point `X` between `B` and `C` lies on the circle through `B` and
//! `C` whose signed curvature is the mean of the curvatures of the circles
//! through `ABC` and `BCD`, at the point of the arc `BC` where
//! `|BX| / |CX| = sqrt(|AC| / |BD|)`.

use crate::error::EvalError;
use crate::scalar::{cross2, norm, sub, Scalar};

/// Signed curvature of the circle through `a`, `b`, `c` (zero for collinear points).
pub fn signed_curvature<T: Scalar>(a: &[T], b: &[T], c: &[T]) -> Result<T, EvalError> {
    let ab = sub(b, a);
    let bc = sub(c, b);
    let ac = sub(c, a);
    let denom = norm(&ab)? * norm(&bc)? * norm(&ac)?;
    (cross2(&ab, &bc).mul_f64(2.0)).try_div(denom)
}

/// Inserted point for the window `[A, B, C, D]` (flat, planar).
pub fn insert<T: Scalar>(w: &[T]) -> Result<Vec<T>, EvalError> {
    let (a, b, c, d) = (&w[0..2], &w[2..4], &w[4..6], &w[6..8]);
    let v = sub(c, b);
    let len = norm(&v)?;
    if len.approx() == 0.0 {
        return Err(EvalError::Degenerate("coincident middle points B = C"));
    }
    let k1 = signed_curvature(a, b, c)?;
    let k2 = signed_curvature(b, c, d)?;
    let k = (k1 + k2).mul_f64(0.5);
    let s = (k * len).mul_f64(0.5);
    let cos = (T::constant(1.0) - s.clone().square()).try_sqrt()?;
    let ratio = norm(&sub(c, a))?.try_div(norm(&sub(d, b))?)?.try_sqrt()?;
    let rho2 = T::constant(1.0) + ratio.clone().square() + (ratio.clone() * cos.clone()).mul_f64(2.0);
    let f = ratio.clone().try_div(rho2)?;
    let along = f.clone() * (ratio + cos);
    let across = f * s;
    // J v rotates v by +90 degrees
    let jv = [-v[1].clone(), v[0].clone()];
    Ok((0..2)
        .map(|i| b[i].clone() + along.clone() * v[i].clone() - across.clone() * jv[i].clone())
        .collect())
}
