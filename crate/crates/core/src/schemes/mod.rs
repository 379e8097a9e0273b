//! GLUE subdivision schemes: binary rules `p'_{2i+λ} = g_λ(p_i, …, p_{i+m})`
//! evaluated generically over [`Scalar`] types.

pub mod cps;
pub mod index;
pub mod linear;
pub mod registry;

pub use index::IndexVector;
pub use linear::{difference_matrix, difference_scheme, jsr_upper, max_difference_order, LinearScheme, MatrixPair};
pub use registry::{builtin, resolve, BUILTIN_NAMES};

use crate::chain::Chain;
use crate::error::{Error, EvalError, Result};
use crate::scalar::{self, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub enum Rule {
    Linear(LinearScheme),
    CirclePreserving,
    /// Quartic B-spline rules plus a `C^{1,1}` perturbation of `g₀`.
    Spoiler,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GlueScheme {
    pub id: String,
    pub m: usize,
    pub tau: f64,
    pub nu: f64,
    pub rule: Rule,
    /// Set when the rule only makes sense in one dimension (CPS is planar).
    pub required_dim: Option<usize>,
}

impl GlueScheme {
    pub fn linear(id: impl Into<String>, scheme: LinearScheme) -> Self {
        GlueScheme {
            id: id.into(),
            m: scheme.m,
            tau: scheme.tau,
            nu: 1.0,
            rule: Rule::Linear(scheme),
            required_dim: None,
        }
    }

    /// `n = 2m + 1`.
    pub fn spread(&self) -> usize {
        2 * self.m + 1
    }

    pub fn as_linear(&self) -> Option<&LinearScheme> {
        match &self.rule {
            Rule::Linear(l) => Some(l),
            _ => None,
        }
    }

    pub fn check_dim(&self, d: usize) -> Result<()> {
        match self.required_dim {
            Some(r) if r != d => Err(Error::Domain(format!(
                "scheme {} requires dimension {r}, got {d}",
                self.id
            ))),
            _ => Ok(()),
        }
    }

    /// `g_λ` on a flat window of `m + 1` points.
    pub fn eval_rule<T: Scalar>(&self, lambda: u8, w: &[T], d: usize) -> Result<Vec<T>, EvalError> {
        match &self.rule {
            Rule::Linear(l) => {
                let mask = l.mask(lambda);
                Ok((0..d)
                    .map(|c| {
                        let mut acc = T::constant(0.0);
                        for (j, a) in mask.iter().enumerate() {
                            if *a != 0.0 {
                                acc = acc + w[j * d + c].clone().mul_f64(*a);
                            }
                        }
                        acc
                    })
                    .collect())
            }
            Rule::CirclePreserving => {
                if lambda == 0 {
                    Ok(w[d..2 * d].to_vec())
                } else {
                    cps::insert(w)
                }
            }
            Rule::Spoiler => {
                let (p0, p1, p2) = (&w[0..d], &w[d..2 * d], &w[2 * d..3 * d]);
                if lambda == 1 {
                    return Ok((0..d)
                        .map(|c| {
                            p0[c].clone().mul_f64(1.0 / 16.0)
                                + p1[c].clone().mul_f64(10.0 / 16.0)
                                + p2[c].clone().mul_f64(5.0 / 16.0)
                        })
                        .collect());
                }
                let d2: Vec<T> = (0..d)
                    .map(|c| p2[c].clone() - p1[c].clone().mul_f64(2.0) + p0[c].clone())
                    .collect();
                let bent = T::norm_scaled(&d2)?;
                let span = scalar::norm(&scalar::sub(p2, p0))?;
                let mut out = Vec::with_capacity(d);
                for c in 0..d {
                    let lin = p0[c].clone().mul_f64(5.0 / 16.0)
                        + p1[c].clone().mul_f64(10.0 / 16.0)
                        + p2[c].clone().mul_f64(1.0 / 16.0);
                    out.push(lin + bent[c].clone().try_div(span.clone())?);
                }
                Ok(out)
            }
        }
    }

    /// `𝐠_λ`: maps a flat window of `n` points to the window `T^n_{2i+λ}` of the refined chain.
    pub fn window_map_flat<T: Scalar>(&self, lambda: u8, p: &[T], d: usize) -> Result<Vec<T>, (usize, EvalError)> {
        let n = self.spread();
        let mut out = Vec::with_capacity(n * d);
        for k in 0..n {
            let jj = lambda as usize + k;
            let (i, mu) = (jj / 2, (jj % 2) as u8);
            let w = &p[i * d..(i + self.m + 1) * d];
            out.extend(self.eval_rule(mu, w, d).map_err(|e| (k, e))?);
        }
        Ok(out)
    }

    pub fn subdivide<T: Scalar>(&self, p: &Chain<T>) -> Result<Chain<T>> {
        let n = self.spread();
        let d = p.dim();
        self.check_dim(d)?;
        if p.len() < n {
            return Err(Error::Domain(format!(
                "chain of length {} is shorter than the spread {n} of {}",
                p.len(),
                self.id
            )));
        }
        let out_len = 2 * p.len() - n + 1;
        let coords = p.coords();
        let mut out = Vec::with_capacity(out_len * d);
        for o in 0..out_len {
            let (i, mu) = (o / 2, (o % 2) as u8);
            let w = &coords[i * d..(i + self.m + 1) * d];
            let x = self
                .eval_rule(mu, w, d)
                .map_err(|source| Error::RuleEval { index: o, source })?;
            out.extend(x);
        }
        Chain::from_flat(d, out)
    }

    pub fn subdivide_rounds<T: Scalar>(&self, p: &Chain<T>, rounds: usize) -> Result<Chain<T>> {
        let mut q = p.clone();
        for _ in 0..rounds {
            q = self.subdivide(&q)?;
        }
        Ok(q)
    }

    pub fn window_map<T: Scalar>(&self, lambda: u8, p: &Chain<T>) -> Result<Chain<T>> {
        self.check_window(p)?;
        let out = self
            .window_map_flat(lambda, p.coords(), p.dim())
            .map_err(|(index, source)| Error::RuleEval { index, source })?;
        Chain::from_flat(p.dim(), out)
    }

    /// `𝐠_Λ = 𝐠_{λ_ℓ} ∘ ⋯ ∘ 𝐠_{λ₁}`.
    pub fn compose_windows<T: Scalar>(&self, lambda: &IndexVector, p: &Chain<T>) -> Result<Chain<T>> {
        self.check_window(p)?;
        let mut q = p.clone();
        for &b in lambda.bits() {
            q = self.window_map(b, &q)?;
        }
        Ok(q)
    }

    fn check_window<T: Clone>(&self, p: &Chain<T>) -> Result<()> {
        self.check_dim(p.dim())?;
        if p.len() != self.spread() {
            return Err(Error::Domain(format!(
                "window has {} points, spread of {} is {}",
                p.len(),
                self.id,
                self.spread()
            )));
        }
        Ok(())
    }
}

/// `N^ℓ = 2^ℓ (N - n + 1) + n - 1`.
pub fn refined_length(len: usize, spread: usize, rounds: u32) -> usize {
    (len - spread + 1) * (1usize << rounds) + spread - 1
}
