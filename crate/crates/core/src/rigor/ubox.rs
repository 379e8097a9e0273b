use super::Interval;
use crate::error::{Error, Result};
use crate::scalar;

/// A box of second-difference coordinates `u ∈ R^{(n-2)×d}`, flat row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct UBox {
    coords: Vec<Interval>,
    depth: u32,
}

impl UBox {
    pub fn new(coords: Vec<Interval>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Domain("box must have at least one coordinate".into()));
        }
        if coords.iter().any(|c| !c.lo().is_finite() || !c.hi().is_finite()) {
            return Err(Error::Domain("box coordinates must be finite".into()));
        }
        Ok(UBox { coords, depth: 0 })
    }

    /// `[-r, r]^count`.
    pub fn cube(count: usize, r: f64) -> Self {
        UBox {
            coords: vec![Interval::symmetric(r); count],
            depth: 0,
        }
    }

    pub fn coords(&self) -> &[Interval] {
        &self.coords
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn volume(&self) -> f64 {
        self.coords.iter().map(Interval::width).product()
    }

    pub fn max_width(&self) -> f64 {
        self.coords.iter().map(Interval::width).fold(0.0, f64::max)
    }

    /// Bisects the widest coordinate (the first one on ties).
    pub fn split(&self) -> (UBox, UBox) {
        let mut widest = 0;
        for (i, c) in self.coords.iter().enumerate() {
            if c.width() > self.coords[widest].width() {
                widest = i;
            }
        }
        let (a, b) = self.coords[widest].bisect();
        let mut left = self.coords.clone();
        let mut right = self.coords.clone();
        left[widest] = a;
        right[widest] = b;
        (
            UBox {
                coords: left,
                depth: self.depth + 1,
            },
            UBox {
                coords: right,
                depth: self.depth + 1,
            },
        )
    }

    /// The smallest box containing this one and the origin, so that every
    /// segment from `0` to a point of the box stays inside.
    pub fn hull_with_origin(&self) -> UBox {
        UBox {
            coords: self.coords.iter().map(|c| c.hull(&Interval::point(0.0))).collect(),
            depth: self.depth,
        }
    }

    /// Enclosure of `|u|_0 = max_j ‖u_j‖` over the box, for points in `R^d`.
    pub fn point_norm_range(&self, d: usize) -> Interval {
        let mut lo = 0.0f64;
        let mut hi = 0.0f64;
        for p in self.coords.chunks_exact(d) {
            let r = scalar::norm(p).expect("sum of squares is nonnegative");
            lo = lo.max(r.lo());
            hi = hi.max(r.hi());
        }
        Interval::new(lo, hi)
    }
}
