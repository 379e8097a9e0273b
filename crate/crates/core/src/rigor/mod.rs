//! Interval arithmetic, forward derivatives and boxes over the
//! second-difference parametrization `q = e + K u` of normalized windows.

mod centered;
mod dual;
mod interval;
mod jacobian;
mod ubox;

pub use centered::{for_each_word_centered, window_map_centered, Centered};
pub use dual::{Dual, Partials};
pub use interval::Interval;
pub use jacobian::{eval_with_jacobian, IntervalMatrix};
pub use ubox::UBox;

use crate::chain::Chain;
use crate::scalar::Scalar;

/// Rigorous enclosure of `K = M¹M²` (row-major, `n × (n-2)`).
pub fn lift_matrix_interval(n: usize) -> Vec<Interval> {
    assert!(n >= 3, "spread must be at least 3");
    let nf = n as f64;
    let m1 = |i: usize, j: usize| {
        let v = Interval::point(j as f64 + 1.0).try_div(Interval::point(nf)).expect("n > 0");
        if i <= j {
            v - Interval::point(1.0)
        } else {
            v
        }
    };
    let den = nf * (1.0 + nf) * (1.0 - nf);
    let m2 = |i: usize, j: usize| {
        let jf = j as f64;
        let num = (jf + 1.0) * (jf + 2.0) * (2.0 * jf + 3.0 - 3.0 * nf);
        let v = Interval::point(num).try_div(Interval::point(den)).expect("n > 1");
        if i <= j {
            v - Interval::point(1.0)
        } else {
            v
        }
    };
    let mut k = vec![Interval::point(0.0); n * (n - 2)];
    for i in 0..n {
        for j in 0..n - 2 {
            let mut acc = Interval::point(0.0);
            for r in 0..n - 1 {
                acc = acc + m1(i, r) * m2(r, j);
            }
            k[i * (n - 2) + j] = acc;
        }
    }
    k
}

/// Rigorous enclosures of the slope weights `(i - c) / Σ (i - c)²`.
pub fn slope_weights_interval(n: usize) -> Vec<Interval> {
    let c = (n as f64 - 1.0) / 2.0;
    let s: f64 = (0..n).map(|i| (i as f64 - c).powi(2)).sum();
    (0..n)
        .map(|i| Interval::point(i as f64 - c).try_div(Interval::point(s)).expect("s > 0"))
        .collect()
}

/// `e + K u` as an interval chain of length `n` in `R^d`.
pub fn embed_u(u: &UBox, n: usize, d: usize) -> Chain<Interval> {
    let k = lift_matrix_interval(n);
    embed_with(&k, u.coords(), n, d, |i, c, acc: Interval| {
        Interval::point(if c == 0 { (i + 1) as f64 } else { 0.0 }) + acc
    })
}

/// `e + K u` with partial derivatives with respect to `u` (index `j·d + c`).
pub fn embed_u_dual(u: &UBox, n: usize, d: usize) -> Chain<Dual<Interval>> {
    let k = lift_matrix_interval(n);
    let nvars = (n - 2) * d;
    let mut coords = Vec::with_capacity(n * d);
    for i in 0..n {
        for c in 0..d {
            let mut value = Interval::point(if c == 0 { (i + 1) as f64 } else { 0.0 });
            let mut partials = vec![Interval::point(0.0); nvars];
            for j in 0..n - 2 {
                let kij = k[i * (n - 2) + j];
                value = value + kij * u.coords()[j * d + c];
                partials[j * d + c] = kij;
            }
            coords.push(Dual::new(value, partials));
        }
    }
    Chain::from_flat(d, coords).expect("n * d coordinates")
}

/// `e + K u` with first and second partial derivatives with respect to `u`.
pub fn embed_u_dual2(u: &UBox, n: usize, d: usize) -> Chain<Dual<Dual<Interval>>> {
    let first = embed_u_dual(u, n, d);
    let coords = first
        .into_coords()
        .into_iter()
        .map(|x| {
            let partials: Vec<_> = x.partials.iter().map(|p| Dual::constant_value(*p)).collect();
            Dual::new(x, partials)
        })
        .collect();
    Chain::from_flat(d, coords).expect("n * d coordinates")
}

fn embed_with(
    k: &[Interval],
    u: &[Interval],
    n: usize,
    d: usize,
    finish: impl Fn(usize, usize, Interval) -> Interval,
) -> Chain<Interval> {
    let mut coords = Vec::with_capacity(n * d);
    for i in 0..n {
        for c in 0..d {
            let mut acc = Interval::point(0.0);
            for j in 0..n - 2 {
                acc = acc + k[i * (n - 2) + j] * u[j * d + c];
            }
            coords.push(finish(i, c, acc));
        }
    }
    Chain::from_flat(d, coords).expect("n * d coordinates")
}

/// Lower bound of `|Π y|_1 = ‖Σ w_i y_i‖` over an interval window.
pub fn linear_spacing_lower(y: &[Interval], weights: &[Interval], d: usize) -> f64 {
    let mut sq = Interval::point(0.0);
    for c in 0..d {
        let mut acc = Interval::point(0.0);
        for (i, w) in weights.iter().enumerate() {
            acc = acc + *w * y[i * d + c];
        }
        sq = sq + acc.sqr();
    }
    sq.try_sqrt().map(|r| r.lo()).unwrap_or(0.0)
}

/// Upper bound of `|y|_2 = max_i ‖Δ²y_i‖` over an interval window.
pub fn second_seminorm_upper(y: &[Interval], d: usize) -> f64 {
    let n = y.len() / d;
    let mut best = 0.0f64;
    for i in 0..n - 2 {
        let mut sq = Interval::point(0.0);
        for c in 0..d {
            let v = y[(i + 2) * d + c] - y[(i + 1) * d + c].mul_f64(2.0) + y[i * d + c];
            sq = sq + v.sqr();
        }
        best = best.max(sq.try_sqrt().map(|r| r.hi()).unwrap_or(f64::INFINITY));
    }
    best
}
