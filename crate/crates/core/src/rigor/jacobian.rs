use nalgebra::DMatrix;

use super::{Dual, Interval};
use crate::chain::Chain;
use crate::error::{Error, Result};
use crate::schemes::{GlueScheme, IndexVector};

/// A dense row-major matrix of intervals.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Interval>,
}

impl IntervalMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Interval>) -> Self {
        assert_eq!(data.len(), rows * cols);
        IntervalMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Interval {
        self.data[i * self.cols + j]
    }

    pub fn mid(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).mid())
    }

    pub fn max_width(&self) -> f64 {
        self.data.iter().map(Interval::width).fold(0.0, f64::max)
    }

    pub fn contains(&self, m: &DMatrix<f64>) -> bool {
        m.shape() == (self.rows, self.cols)
            && (0..self.rows).all(|i| (0..self.cols).all(|j| self.get(i, j).contains(m[(i, j)])))
    }
}

/// Encloses `𝐠_Λ(q)` and `D𝐠_Λ(q)` for all `q` in an interval window.
///
/// The Jacobian is indexed by flat coordinates: entry `(i·d + c, j·d + c')`
/// is `∂ y_{i,c} / ∂ q_{j,c'}`.
pub fn eval_with_jacobian(
    scheme: &GlueScheme,
    lambda: &IndexVector,
    q: &Chain<Interval>,
) -> Result<(Chain<Interval>, IntervalMatrix)> {
    let nvars = q.coords().len();
    let seeded: Vec<Dual<Interval>> = q
        .coords()
        .iter()
        .enumerate()
        .map(|(i, x)| Dual::variable(*x, i, nvars))
        .collect();
    let seeded = Chain::from_flat(q.dim(), seeded)?;
    let out = scheme.compose_windows(lambda, &seeded)?;
    let value = out.map(|x| x.value);
    let mut data = Vec::with_capacity(nvars * nvars);
    for y in out.coords() {
        if y.partials.is_empty() {
            data.extend(std::iter::repeat_n(Interval::point(0.0), nvars));
        } else if y.partials.len() != nvars {
            return Err(Error::Structure("partials of unexpected length".into()));
        } else {
            data.extend(y.partials.iter().copied());
        }
    }
    Ok((value, IntervalMatrix::new(nvars, nvars, data)))
}
