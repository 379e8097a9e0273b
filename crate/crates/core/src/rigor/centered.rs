//! Word evaluation in mean-value form.
//!
//! Each rule window is translated to its second point before the rule is
//! applied, and every intermediate window is intersected with its value at
//! the box center plus the enclosed derivative times `u - u_c`. Differences
//! of nearby points then keep widths proportional to their length instead of
//! to the absolute uncertainty of the window.

use super::{Dual, Interval};
use crate::error::EvalError;
use crate::scalar::Scalar;
use crate::schemes::GlueScheme;

/// A forward-derivative type whose value can be tightened around a center.
pub trait Centered: Scalar {
    /// Enclosure type at the box center, one derivative order lower.
    type Center: Scalar;

    /// Intersects with `center + D(box)·offsets`.
    fn tighten(self, center: &Self::Center, offsets: &[Interval]) -> Self;
}

fn mean_value(center: Interval, slopes: impl Fn(usize) -> Interval, offsets: &[Interval]) -> Interval {
    let mut acc = center;
    for (v, off) in offsets.iter().enumerate() {
        acc = acc + slopes(v) * *off;
    }
    acc
}

fn meet(a: Interval, b: Interval) -> Interval {
    a.intersect(&b).unwrap_or(a)
}

impl Centered for Dual<Interval> {
    type Center = Interval;

    fn tighten(mut self, center: &Interval, offsets: &[Interval]) -> Self {
        let mv = mean_value(*center, |v| self.partial(v), offsets);
        self.value = meet(self.value, mv);
        self
    }
}

impl Centered for Dual<Dual<Interval>> {
    type Center = Dual<Interval>;

    fn tighten(mut self, center: &Dual<Interval>, offsets: &[Interval]) -> Self {
        let mv = mean_value(center.value, |v| self.partial(v).value, offsets);
        self.value.value = meet(self.value.value, mv);
        let count = self.partials.len();
        for v in 0..count {
            let p = self.partials[v].clone();
            let mv = mean_value(center.partial(v), |w| p.partial(w), offsets);
            let tight = meet(p.value, mv);
            self.partials[v].value = tight;
            if v < self.value.partials.len() {
                self.value.partials[v] = tight;
            }
        }
        self
    }
}

/// One window map `𝐠_λ` applied to a center window and a box window.
pub fn window_map_centered<X: Centered>(
    scheme: &GlueScheme,
    lambda: u8,
    center: &[X::Center],
    window: &[X],
    d: usize,
    offsets: &[Interval],
) -> Result<(Vec<X::Center>, Vec<X>), EvalError> {
    let n = scheme.spread();
    let width = (scheme.m + 1) * d;
    let mut out_c = Vec::with_capacity(n * d);
    let mut out = Vec::with_capacity(n * d);
    let mut wc = Vec::with_capacity(width);
    let mut wb = Vec::with_capacity(width);
    for k in 0..n {
        let jj = lambda as usize + k;
        let (i, mu) = (jj / 2, (jj % 2) as u8);
        let (lo, anchor) = (i * d, (i + 1) * d);
        wc.clear();
        wb.clear();
        for t in 0..width {
            let a = anchor + t % d;
            let c = center[lo + t].clone() - center[a].clone();
            let b = (window[lo + t].clone() - window[a].clone()).tighten(&c, offsets);
            wc.push(c);
            wb.push(b);
        }
        let yc = scheme.eval_rule(mu, &wc, d)?;
        let yb = scheme.eval_rule(mu, &wb, d)?;
        for (c, (yc, yb)) in yc.into_iter().zip(yb).enumerate() {
            let vc = yc + center[anchor + c].clone();
            let vb = (yb + window[anchor + c].clone()).tighten(&vc, offsets);
            out_c.push(vc);
            out.push(vb);
        }
    }
    Ok((out_c, out))
}

/// Calls `f` on `(𝐠_Λ(center), 𝐠_Λ(window))` for every `|Λ| = depth`, in
/// lexicographic order of `Λ`.
pub fn for_each_word_centered<X: Centered>(
    scheme: &GlueScheme,
    d: usize,
    center: &[X::Center],
    window: &[X],
    offsets: &[Interval],
    depth: usize,
    f: &mut dyn FnMut(&[X::Center], &[X]),
) -> Result<(), EvalError> {
    if depth == 0 {
        f(center, window);
        return Ok(());
    }
    for b in 0..2u8 {
        let (c, w) = window_map_centered(scheme, b, center, window, d, offsets)?;
        for_each_word_centered(scheme, d, &c, &w, offsets, depth - 1, f)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rigor::{embed_u, embed_u_dual, UBox};
    use crate::schemes::builtin;

    #[test]
    fn centered_map_encloses_point_evaluations() {
        let s = builtin("cps2d").unwrap();
        let (n, d) = (s.spread(), 2);
        let r = 1e-3;
        let ubox = UBox::cube((n - 2) * d, r);
        let center = UBox::cube((n - 2) * d, 0.0);
        let offsets: Vec<Interval> = ubox.coords().to_vec();
        let qc = embed_u(&center, n, d);
        let q = embed_u_dual(&ubox, n, d);
        let mut encl = Vec::new();
        for_each_word_centered(&s, d, qc.coords(), q.coords(), &offsets, 3, &mut |_, y| {
            encl.push(y.iter().map(|x| x.value).collect::<Vec<_>>())
        })
        .unwrap();
        for corner in 0..8u32 {
            let u: Vec<f64> = (0..(n - 2) * d)
                .map(|j| if (corner >> (j % 3)) & 1 == 1 { r } else { -r * 0.5 })
                .collect();
            let pb = UBox::new(u.iter().map(|&x| Interval::point(x)).collect()).unwrap();
            let p: Vec<f64> = embed_u(&pb, n, d).coords().iter().map(|x| x.mid()).collect();
            let mut words = vec![p];
            for _ in 0..3 {
                words = words
                    .iter()
                    .flat_map(|w| (0..2u8).map(|b| s.window_map_flat(b, w, d).unwrap()))
                    .collect();
            }
            for (y, e) in words.iter().zip(&encl) {
                for (x, e) in y.iter().zip(e) {
                    assert!(e.contains(*x), "{x} not in {e:?}");
                }
            }
        }
    }
}
