//! Linear schemes, their window matrices, difference schemes and joint
//! spectral radius bounds.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::chain::row_sum_norm;
use crate::error::{Error, Result};
use crate::schemes::index::MAX_ENUMERATION_DEPTH;

pub const MASK_SUM_TOL: f64 = 1e-12;
pub const DIFFERENCE_RESIDUAL_TOL: f64 = 1e-10;

/// A linear rule `a_λ(p_i, …, p_{i+m}) = Σ_j a_{λ,j} p_{i+j}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearScheme {
    pub m: usize,
    pub tau: f64,
    pub a0: Vec<f64>,
    pub a1: Vec<f64>,
}

impl LinearScheme {
    pub fn new(m: usize, tau: f64, a0: Vec<f64>, a1: Vec<f64>) -> Result<Self> {
        if m == 0 {
            return Err(Error::Domain("mask half-width m must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&tau) {
            return Err(Error::Domain(format!("shift tau must lie in [0, 1), got {tau}")));
        }
        for (name, row) in [("a0", &a0), ("a1", &a1)] {
            if row.len() != m + 1 {
                return Err(Error::Domain(format!(
                    "mask {name} has {} weights, expected m + 1 = {}",
                    row.len(),
                    m + 1
                )));
            }
            if row.iter().any(|x| !x.is_finite()) {
                return Err(Error::Domain(format!("mask {name} has a non-finite weight")));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > MASK_SUM_TOL {
                return Err(Error::Domain(format!("mask {name} sums to {sum}, expected 1")));
            }
        }
        Ok(LinearScheme { m, tau, a0, a1 })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct MaskFile {
            m: usize,
            tau: f64,
            a0: Vec<f64>,
            a1: Vec<f64>,
        }
        let f: MaskFile = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        LinearScheme::new(f.m, f.tau, f.a0, f.a1)
    }

    pub fn spread(&self) -> usize {
        2 * self.m + 1
    }

    pub fn mask(&self, lambda: u8) -> &[f64] {
        if lambda == 0 {
            &self.a0
        } else {
            &self.a1
        }
    }

    /// The `n×n` matrices with `T^n_{2i+λ} A P = A_λ T^n_i P`.
    pub fn matrices(&self) -> MatrixPair {
        let n = self.spread();
        let build = |lambda: usize| {
            let mut a = DMatrix::zeros(n, n);
            for k in 0..n {
                let jj = lambda + k;
                let (i, mu) = (jj / 2, (jj % 2) as u8);
                for (j, w) in self.mask(mu).iter().enumerate() {
                    a[(k, i + j)] = *w;
                }
            }
            a
        };
        MatrixPair {
            m0: build(0),
            m1: build(1),
        }
    }
}

/// The two matrices `(A₀, A₁)` of a (difference) scheme on windows.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixPair {
    pub m0: DMatrix<f64>,
    pub m1: DMatrix<f64>,
}

impl MatrixPair {
    pub fn get(&self, lambda: u8) -> &DMatrix<f64> {
        if lambda == 0 {
            &self.m0
        } else {
            &self.m1
        }
    }

    pub fn size(&self) -> usize {
        self.m0.nrows()
    }

    /// `A_Λ = A_{λ_ℓ} ⋯ A_{λ₁}`.
    pub fn product(&self, bits: &[u8]) -> DMatrix<f64> {
        let mut acc = DMatrix::identity(self.size(), self.size());
        for &b in bits {
            acc = self.get(b) * acc;
        }
        acc
    }

    pub fn scaled(&self, k: f64) -> MatrixPair {
        MatrixPair {
            m0: &self.m0 * k,
            m1: &self.m1 * k,
        }
    }

    pub fn max_abs_diff(&self, other: &MatrixPair) -> f64 {
        if self.m0.shape() != other.m0.shape() || self.m1.shape() != other.m1.shape() {
            return f64::INFINITY;
        }
        let d0 = (&self.m0 - &other.m0).abs().max();
        let d1 = (&self.m1 - &other.m1).abs().max();
        d0.max(d1)
    }
}

/// The `(n-j)×n` matrix of `Δ^j`.
pub fn difference_matrix(n: usize, j: usize) -> DMatrix<f64> {
    let mut d = DMatrix::identity(n, n);
    for k in 0..j {
        let rows = n - k - 1;
        let step = DMatrix::from_fn(rows, n - k, |r, c| {
            if c == r + 1 {
                1.0
            } else if c == r {
                -1.0
            } else {
                0.0
            }
        });
        d = step * d;
    }
    d
}

/// Solves `X Δ^j = Δ^j A_λ` for both `λ`; fails if the identity cannot be
/// met to [`DIFFERENCE_RESIDUAL_TOL`].
pub fn difference_scheme(a: &MatrixPair, j: usize) -> Result<MatrixPair> {
    let n = a.size();
    if j == 0 {
        return Ok(a.clone());
    }
    if j >= n {
        return Err(Error::NoDifferenceScheme {
            order: j,
            residual: f64::INFINITY,
        });
    }
    let dj = difference_matrix(n, j);
    let gram = &dj * dj.transpose();
    let gram_inv = gram
        .try_inverse()
        .ok_or_else(|| Error::Domain("difference Gram matrix is singular".into()))?;
    let solve = |m: &DMatrix<f64>| -> Result<DMatrix<f64>> {
        let rhs = &dj * m;
        let x = &rhs * dj.transpose() * &gram_inv;
        let residual = (&x * &dj - &rhs).abs().max();
        if residual > DIFFERENCE_RESIDUAL_TOL {
            return Err(Error::NoDifferenceScheme { order: j, residual });
        }
        Ok(x)
    };
    Ok(MatrixPair {
        m0: solve(&a.m0)?,
        m1: solve(&a.m1)?,
    })
}

/// The highest order `j` (at most `n - 1`) for which a difference scheme exists.
pub fn max_difference_order(a: &MatrixPair) -> usize {
    (1..a.size())
        .take_while(|&j| difference_scheme(a, j).is_ok())
        .last()
        .unwrap_or(0)
}

/// `ϱ_ℓ = max_Λ |A_Λ|_∞^{1/ℓ}` by exhaustive enumeration.
pub fn jsr_upper(a: &MatrixPair, depth: usize) -> Result<f64> {
    if depth == 0 || depth > MAX_ENUMERATION_DEPTH {
        return Err(Error::DepthGuard(format!(
            "jsr depth {depth} outside 1..={MAX_ENUMERATION_DEPTH}"
        )));
    }
    fn walk(a: &MatrixPair, acc: &DMatrix<f64>, left: usize, best: &mut f64) {
        if left == 0 {
            *best = best.max(row_sum_norm(acc));
            return;
        }
        for b in 0..2u8 {
            walk(a, &(a.get(b) * acc), left - 1, best);
        }
    }
    let mut best = 0.0;
    let id = DMatrix::identity(a.size(), a.size());
    walk(a, &id, depth, &mut best);
    Ok(best.powf(1.0 / depth as f64))
}
