use nalgebra::DMatrix;

use crate::chain::Chain;
use crate::error::{Error, Result};
use crate::rigor::Dual;
use crate::schemes::{GlueScheme, MatrixPair};

/// Tolerance for the diagonal block structure of `D𝐠_λ(e)` and for local linearity.
pub const STRUCTURE_TOL: f64 = 1e-8;

/// Tangential (`A`) and normal (`B`) schemes read off `D𝐠_λ(e)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivativePair {
    pub a: MatrixPair,
    pub b: MatrixPair,
    pub locally_linear: bool,
    /// `max |A_λ - B_λ|` entrywise.
    pub deviation: f64,
}

impl DerivativePair {
    /// The linear companion, if the scheme is locally linear.
    pub fn companion(&self) -> Option<&MatrixPair> {
        self.locally_linear.then_some(&self.a)
    }
}

fn jacobian_at_e(scheme: &GlueScheme, lambda: u8, d: usize) -> Result<DMatrix<f64>> {
    let n = scheme.spread();
    let e = Chain::standard(n, d);
    let vars = n * d;
    let seeded: Vec<Dual<f64>> = e
        .coords()
        .iter()
        .enumerate()
        .map(|(i, &x)| Dual::variable(x, i, vars))
        .collect();
    let y = scheme
        .window_map_flat(lambda, &seeded, d)
        .map_err(|(index, source)| Error::RuleEval { index, source })?;
    Ok(DMatrix::from_fn(vars, vars, |r, c| y[r].partial(c)))
}

/// Computes the blocks `L^{i,j}_λ(e)`, checks that they are diagonal with
/// equal trailing entries, and splits them into the schemes `A` and `B`.
pub fn tangent_normal(scheme: &GlueScheme, d: usize) -> Result<DerivativePair> {
    scheme.check_dim(d)?;
    let n = scheme.spread();
    let mut a = Vec::with_capacity(2);
    let mut b = Vec::with_capacity(2);
    for lambda in 0..2u8 {
        let jac = jacobian_at_e(scheme, lambda, d)?;
        let mut am = DMatrix::zeros(n, n);
        let mut bm = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let block = |r: usize, c: usize| jac[(i * d + r, j * d + c)];
                for r in 0..d {
                    for c in 0..d {
                        if r != c && block(r, c).abs() > STRUCTURE_TOL {
                            return Err(Error::Structure(format!(
                                "L^({i},{j})_{lambda} has off-diagonal entry {:e} at ({r},{c})",
                                block(r, c)
                            )));
                        }
                    }
                }
                for r in 2..d {
                    if (block(r, r) - block(1, 1)).abs() > STRUCTURE_TOL {
                        return Err(Error::Structure(format!(
                            "L^({i},{j})_{lambda} has unequal normal entries {:e} and {:e}",
                            block(1, 1),
                            block(r, r)
                        )));
                    }
                }
                am[(i, j)] = block(0, 0);
                bm[(i, j)] = if d >= 2 { block(1, 1) } else { block(0, 0) };
            }
        }
        a.push(am);
        b.push(bm);
    }
    let (b1, b0) = (b.pop().expect("two"), b.pop().expect("two"));
    let (a1, a0) = (a.pop().expect("two"), a.pop().expect("two"));
    let a = MatrixPair { m0: a0, m1: a1 };
    let b = MatrixPair { m0: b0, m1: b1 };
    let deviation = a.max_abs_diff(&b);
    Ok(DerivativePair {
        locally_linear: deviation <= STRUCTURE_TOL,
        deviation,
        a,
        b,
    })
}
