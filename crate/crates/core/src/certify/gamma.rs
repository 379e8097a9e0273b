//! Certified upper bounds on distortion amplification over neighborhoods of
//! the standard linear window.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, EvalError, Result};
use crate::rigor::{
    embed_u, embed_u_dual, embed_u_dual2, for_each_word_centered, slope_weights_interval, Dual, Interval, UBox,
};
use crate::scalar::Scalar;
use crate::schemes::GlueScheme;

/// Deepest `ℓ` accepted by [`gamma_star_zero`].
pub const MAX_STAR_ZERO_DEPTH: usize = 12;

/// Boxes refined per parallel batch. Fixed so that results do not depend on
/// the number of worker threads.
const BATCH: usize = 32;

/// Boxes narrower than this are not split any further.
const MIN_WIDTH: f64 = 1e-15;

/// Result of a branch-and-bound query.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaOutcome {
    /// Certified upper bound (`inf` when nothing could be certified).
    #[serde(with = "crate::certify::inf_f64")]
    pub bound: f64,
    /// Whether `bound < target`.
    pub certified: bool,
    pub target: f64,
    pub boxes: usize,
    /// Volume fraction of boxes whose bound is not below the target.
    pub unresolved_fraction: f64,
}

/// Evaluates `f` on every `𝐠_Λ(window)` with `|Λ| = depth`, in lexicographic order of `Λ`.
pub(crate) fn for_each_word<T: Scalar>(
    scheme: &GlueScheme,
    d: usize,
    window: &[T],
    depth: usize,
    f: &mut dyn FnMut(&[T]),
) -> Result<(), EvalError> {
    if depth == 0 {
        f(window);
        return Ok(());
    }
    for b in 0..2u8 {
        let next = scheme.window_map_flat(b, window, d).map_err(|(_, e)| e)?;
        for_each_word(scheme, d, &next, depth - 1, f)?;
    }
    Ok(())
}

fn add_up(a: f64, b: f64) -> f64 {
    (Interval::point(a) + Interval::point(b)).hi()
}

fn mul_up(a: f64, b: f64) -> f64 {
    (Interval::point(a) * Interval::point(b)).hi()
}

fn div_up(a: f64, b: f64) -> f64 {
    if !(b > 0.0) {
        return f64::INFINITY;
    }
    Interval::point(a).try_div(Interval::point(b)).map(|x| x.hi()).unwrap_or(f64::INFINITY)
}

/// Upper bound on the operator norm of `u ↦ Δ² y'(u)` in `|·|_0`, where the
/// partials of `y` are taken with respect to `u` (index `j·d + c`).
///
/// Uses `|W|_{0→0} ≤ max_i Σ_j ‖B_ij‖₂` over the `d×d` blocks and
/// `‖B‖₂ ≤ sqrt(‖B‖₁ ‖B‖_∞)`.
pub fn mixed_norm_upper(y: &[Dual<Interval>], d: usize) -> f64 {
    let m = y.len() / d - 2;
    mixed_norm_entries(m, d, |r, v| {
        let (i, c) = (r / d, r % d);
        y[(i + 2) * d + c].partial(v) - y[(i + 1) * d + c].partial(v).mul_f64(2.0) + y[i * d + c].partial(v)
    })
}

/// Same bound for a matrix given entrywise: `entry(i·d + c, j·d + c')`.
fn mixed_norm_entries(m: usize, d: usize, entry: impl Fn(usize, usize) -> Interval) -> f64 {
    let mut best = 0.0f64;
    for i in 0..m {
        let mut row = 0.0f64;
        for j in 0..m {
            let mags: Vec<f64> = (0..d * d).map(|k| entry(i * d + k / d, j * d + k % d).mag()).collect();
            let block = if d == 1 {
                mags[0]
            } else {
                let mut max_row = 0.0f64;
                let mut max_col = 0.0f64;
                for r in 0..d {
                    let mut rs = 0.0;
                    let mut cs = 0.0;
                    for c in 0..d {
                        rs = add_up(rs, mags[r * d + c]);
                        cs = add_up(cs, mags[c * d + r]);
                    }
                    max_row = max_row.max(rs);
                    max_col = max_col.max(cs);
                }
                Interval::point(mul_up(max_row, max_col))
                    .try_sqrt()
                    .map(|x| x.hi())
                    .unwrap_or(f64::INFINITY)
            };
            row = add_up(row, block);
        }
        best = best.max(row);
    }
    best
}

/// Per-word bound data for a fixed scheme, dimension and depth.
pub(crate) struct Engine<'a> {
    pub scheme: &'a GlueScheme,
    pub d: usize,
    pub depth: usize,
    weights: Vec<Interval>,
}

impl<'a> Engine<'a> {
    pub fn new(scheme: &'a GlueScheme, d: usize, depth: usize) -> Result<Self> {
        scheme.check_dim(d)?;
        if depth == 0 {
            return Err(Error::Domain("depth must be at least 1".into()));
        }
        Ok(Engine {
            scheme,
            d,
            depth,
            weights: slope_weights_interval(scheme.spread()),
        })
    }

    pub fn n(&self) -> usize {
        self.scheme.spread()
    }

    pub fn vars(&self) -> usize {
        (self.n() - 2) * self.d
    }

    /// Upper bounds of `|Δ² D𝐠_Λ K|` over the box, one per word.
    ///
    /// The Jacobian is enclosed in mean-value form from its value at the box
    /// center and an enclosure of its derivative over the box. Where the
    /// second derivative is unavailable (e.g. `‖v‖v` at `v = 0`) the direct
    /// enclosure is used.
    pub fn numerators(&self, ubox: &UBox) -> Result<Vec<f64>, EvalError> {
        match self.numerators_centered(ubox) {
            Ok(v) => Ok(v),
            Err(_) => self.numerators_direct(ubox),
        }
    }

    fn numerators_direct(&self, ubox: &UBox) -> Result<Vec<f64>, EvalError> {
        let q = embed_u_dual(ubox, self.n(), self.d);
        let mut out = Vec::with_capacity(1 << self.depth);
        for_each_word(self.scheme, self.d, q.coords(), self.depth, &mut |y| {
            out.push(mixed_norm_upper(y, self.d))
        })?;
        Ok(out)
    }

    fn numerators_centered(&self, ubox: &UBox) -> Result<Vec<f64>, EvalError> {
        let (n, d) = (self.n(), self.d);
        let m = n - 2;
        let vars = self.vars();
        let (center_box, offsets) = center_and_offsets(ubox)?;
        let qc = embed_u_dual(&center_box, n, d);
        let q = embed_u_dual2(ubox, n, d);
        let mut out = Vec::with_capacity(1 << self.depth);
        for_each_word_centered(self.scheme, d, qc.coords(), q.coords(), &offsets, self.depth, &mut |yc, y| {
            let entries: Vec<Interval> = (0..m * d * vars)
                .map(|k| {
                    let (r, v) = (k / vars, k % vars);
                    let (i, c) = (r / d, r % d);
                    let (a, b, e) = ((i + 2) * d + c, (i + 1) * d + c, i * d + c);
                    let center = yc[a].partial(v) - yc[b].partial(v).mul_f64(2.0) + yc[e].partial(v);
                    let inner = y[a].partial(v) - y[b].partial(v).mul_f64(2.0) + y[e].partial(v);
                    let mut acc = center;
                    for (w, off) in offsets.iter().enumerate() {
                        acc = acc + inner.partial(w) * *off;
                    }
                    acc.intersect(&inner.value).unwrap_or(acc)
                })
                .collect();
            out.push(mixed_norm_entries(m, d, |r, v| entries[r * vars + v]));
        })?;
        Ok(out)
    }

    /// Per-word enclosures over the leaf in mean-value form: the slope
    /// `Σ w_i y_i` and the second differences `Δ²y` are enclosed by their
    /// value at the box center plus the enclosed Jacobian times `u - u_c`,
    /// intersected with the direct interval evaluation.
    pub fn leaf_data(&self, leaf: &UBox) -> Result<Vec<WordData>, EvalError> {
        let (n, d) = (self.n(), self.d);
        let (center_box, offsets) = center_and_offsets(leaf)?;
        let qc = embed_u(&center_box, n, d);
        let q = embed_u_dual(leaf, n, d);
        let mut out = Vec::with_capacity(1 << self.depth);
        for_each_word_centered(self.scheme, d, qc.coords(), q.coords(), &offsets, self.depth, &mut |yc, y| {
            let centered = |base: Vec<Interval>, partials: Vec<Vec<Interval>>, direct: Vec<Interval>| -> Vec<Interval> {
                (0..base.len())
                    .map(|c| {
                        let mut acc = base[c];
                        for (v, off) in offsets.iter().enumerate() {
                            acc = acc + partials[v][c] * *off;
                        }
                        acc.intersect(&direct[c]).unwrap_or(acc)
                    })
                    .collect()
            };
            let vars = offsets.len();
            let slope = centered(
                self.slope(yc, |x| *x),
                (0..vars).map(|v| self.slope(y, |x| x.partial(v))).collect(),
                self.slope(y, |x| x.value),
            );
            let d2 = centered(
                self.second_differences(yc, |x| *x),
                (0..vars).map(|v| self.second_differences(y, |x| x.partial(v))).collect(),
                self.second_differences(y, |x| x.value),
            );
            let den = crate::scalar::norm(&slope).map(|r| r.lo()).unwrap_or(0.0);
            let mut d2_upper = 0.0f64;
            for p in d2.chunks_exact(d) {
                d2_upper = d2_upper.max(crate::scalar::norm(p).map(|r| r.hi()).unwrap_or(f64::INFINITY));
            }
            out.push(WordData { den, d2_upper });
        })?;
        Ok(out)
    }

    fn slope<X>(&self, y: &[X], f: impl Fn(&X) -> Interval) -> Vec<Interval> {
        let d = self.d;
        (0..d)
            .map(|c| {
                let mut acc = Interval::point(0.0);
                for (i, w) in self.weights.iter().enumerate() {
                    acc = acc + *w * f(&y[i * d + c]);
                }
                acc
            })
            .collect()
    }

    fn second_differences<X>(&self, y: &[X], f: impl Fn(&X) -> Interval) -> Vec<Interval> {
        let (n, d) = (self.n(), self.d);
        (0..(n - 2) * d)
            .map(|k| {
                let (i, c) = (k / d, k % d);
                f(&y[(i + 2) * d + c]) - f(&y[(i + 1) * d + c]).mul_f64(2.0) + f(&y[i * d + c])
            })
            .collect()
    }

    /// `max_Λ N_Λ(hull(0, leaf)) / D_Λ(leaf)`: bounds `κ_ℓ(e + Ku) / |u|_0`
    /// for all `u` in the leaf by the mean value theorem along `[0, u]`.
    pub fn segment_bound(&self, leaf: &UBox, data: &[WordData]) -> f64 {
        let hull = leaf.hull_with_origin();
        let Ok(nums) = self.numerators(&hull) else {
            return f64::INFINITY;
        };
        nums.iter()
            .zip(data)
            .map(|(&a, w)| div_up(a, w.den))
            .fold(0.0, f64::max)
    }

    /// `max_Λ κ(𝐠_Λ(e + Ku)) / max(floor, min |u|_0)` over the leaf.
    pub fn direct_bound(&self, leaf: &UBox, data: &[WordData], floor: f64) -> f64 {
        let r = leaf.point_norm_range(self.d).lo().max(floor);
        data.iter()
            .map(|w| div_up(div_up(w.d2_upper, w.den), r))
            .fold(0.0, f64::max)
    }
}

fn center_and_offsets(ubox: &UBox) -> Result<(UBox, Vec<Interval>), EvalError> {
    let center: Vec<Interval> = ubox.coords().iter().map(|c| Interval::point(c.mid())).collect();
    let offsets = ubox.coords().iter().zip(&center).map(|(c, m)| *c - *m).collect();
    let center_box = UBox::new(center).map_err(|_| EvalError::Degenerate("non-finite box center"))?;
    Ok((center_box, offsets))
}

/// Enclosure data of one word `Λ` over a leaf box.
pub(crate) struct WordData {
    /// Lower bound of `|Π𝐠_Λ(q)|_1`.
    pub den: f64,
    /// Upper bound of `|𝐠_Λ(q)|_2`.
    pub d2_upper: f64,
}

struct Node {
    bound: f64,
    seq: u64,
    ubox: UBox,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Worst-first branch and bound. `eval` returns `None` for boxes outside the
/// region of interest and an upper bound otherwise.
pub(crate) fn branch_and_bound<F>(root: UBox, target: f64, budget: usize, eval: F) -> GammaOutcome
where
    F: Fn(&UBox) -> Option<f64> + Sync,
{
    let root_volume = root.volume();
    if budget == 0 {
        return GammaOutcome {
            bound: f64::INFINITY,
            certified: false,
            target,
            boxes: 0,
            unresolved_fraction: 1.0,
        };
    }
    let mut heap = BinaryHeap::new();
    let mut stuck: Vec<Node> = Vec::new();
    let mut seq = 0u64;
    let mut boxes = 1usize;
    if let Some(bound) = eval(&root) {
        heap.push(Node { bound, seq, ubox: root });
        seq += 1;
    }
    loop {
        let Some(top) = heap.peek() else { break };
        if top.bound < target || boxes + 2 > budget {
            break;
        }
        let mut parents = Vec::new();
        while parents.len() < BATCH && boxes + 2 * (parents.len() + 1) <= budget {
            match heap.peek() {
                Some(node) if node.bound >= target => {
                    let node = heap.pop().expect("peeked");
                    if node.ubox.max_width() < MIN_WIDTH {
                        stuck.push(node);
                    } else {
                        parents.push(node);
                    }
                }
                _ => break,
            }
        }
        if parents.is_empty() {
            if heap.peek().is_none_or(|n| n.bound < target) {
                break;
            }
            continue;
        }
        let children: Vec<UBox> = parents
            .iter()
            .flat_map(|p| {
                let (a, b) = p.ubox.split();
                [a, b]
            })
            .collect();
        boxes += children.len();
        #[cfg(feature = "parallel")]
        let bounds: Vec<Option<f64>> = children.par_iter().map(&eval).collect();
        #[cfg(not(feature = "parallel"))]
        let bounds: Vec<Option<f64>> = children.iter().map(&eval).collect();
        for (ubox, bound) in children.into_iter().zip(bounds) {
            if let Some(bound) = bound {
                heap.push(Node { bound, seq, ubox });
                seq += 1;
            }
        }
    }
    let mut bound = 0.0f64;
    let mut unresolved = 0.0;
    for node in heap.iter().chain(stuck.iter()) {
        bound = bound.max(node.bound);
        if node.bound >= target {
            unresolved += node.ubox.volume();
        }
    }
    let unresolved_fraction = if root_volume > 0.0 {
        (unresolved / root_volume).min(1.0)
    } else if bound >= target {
        1.0
    } else {
        0.0
    };
    GammaOutcome {
        bound,
        certified: bound < target,
        target,
        boxes,
        unresolved_fraction,
    }
}

/// `Γ*_ℓ[0] = 2^ℓ max_Λ |M_Λ|₂` with `M_Λ = D𝐠_Λ(e)`, using the mixed-norm bound.
pub fn gamma_star_zero(scheme: &GlueScheme, d: usize, depth: usize) -> Result<f64> {
    if depth > MAX_STAR_ZERO_DEPTH {
        return Err(Error::DepthGuard(format!(
            "gamma_star_zero depth {depth} exceeds {MAX_STAR_ZERO_DEPTH}"
        )));
    }
    let engine = Engine::new(scheme, d, depth)?;
    let zero = UBox::cube(engine.vars(), 0.0);
    let nums = engine
        .numerators(&zero)
        .map_err(|source| Error::RuleEval { index: 0, source })?;
    let max = nums.into_iter().fold(0.0, f64::max);
    Ok(max * (1u64 << depth) as f64)
}

/// Certified upper bound on `Γ*_ℓ[δ]` by branch and bound over `|u|_0 ≤ δ`.
pub fn gamma_star_delta(
    scheme: &GlueScheme,
    d: usize,
    depth: usize,
    delta: f64,
    target: f64,
    budget: usize,
) -> Result<GammaOutcome> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Domain(format!("delta must be positive, got {delta}")));
    }
    let engine = Engine::new(scheme, d, depth)?;
    let root = UBox::cube(engine.vars(), delta);
    Ok(branch_and_bound(root, target, budget, |leaf| {
        if leaf.point_norm_range(d).lo() > delta {
            return None;
        }
        match engine.leaf_data(leaf) {
            Ok(data) => Some(engine.segment_bound(leaf, &data)),
            Err(_) => Some(f64::INFINITY),
        }
    }))
}

/// Certified upper bound on `Γ_k[δ, γ] = max_{δ ≤ |d|₂ ≤ γ} κ_k(e + d) / |d|₂`.
pub fn gamma_annulus(
    scheme: &GlueScheme,
    d: usize,
    rounds: usize,
    delta: f64,
    gamma: f64,
    target: f64,
    budget: usize,
) -> Result<GammaOutcome> {
    if !(delta > 0.0 && delta < gamma && gamma.is_finite()) {
        return Err(Error::Domain(format!(
            "annulus needs 0 < delta < gamma, got delta = {delta}, gamma = {gamma}"
        )));
    }
    let engine = Engine::new(scheme, d, rounds)?;
    let root = UBox::cube(engine.vars(), gamma);
    Ok(branch_and_bound(root, target, budget, |leaf| {
        let r = leaf.point_norm_range(d);
        if r.lo() > gamma || r.hi() < delta {
            return None;
        }
        let Ok(data) = engine.leaf_data(leaf) else {
            return Some(f64::INFINITY);
        };
        let direct = engine.direct_bound(leaf, &data, delta);
        if direct < target {
            return Some(direct);
        }
        Some(direct.min(engine.segment_bound(leaf, &data)))
    }))
}
