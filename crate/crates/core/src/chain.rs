//! Chains of points, forward differences, seminorms, the projection onto
//! linear chains, relative distortion and similarities.

use std::fmt;
use std::path::Path;

use nalgebra::DMatrix;
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Below `DEGENERACY_REL * (1 + |p|_0)` the linear component of a window is
/// treated as constant and its relative distortion is infinite.
pub const DEGENERACY_REL: f64 = 1e-14;

/// Tolerance for `QᵀQ = Id` when constructing a [`Similarity`].
pub const ORTHOGONALITY_TOL: f64 = 1e-12;

/// An ordered list of points in `R^d`, stored as flat row-major coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Chain<T = f64> {
    dim: usize,
    coords: Vec<T>,
}

impl<T: Clone> Chain<T> {
    pub fn from_flat(dim: usize, coords: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("dimension must be at least 1".into()));
        }
        if coords.is_empty() || coords.len() % dim != 0 {
            return Err(Error::Domain(format!(
                "{} coordinates do not form a non-empty chain in dimension {dim}",
                coords.len()
            )));
        }
        Ok(Chain { dim, coords })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> std::slice::ChunksExact<'_, T> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<T> {
        self.coords
    }

    /// The subchain `T^len_start P`.
    pub fn window(&self, start: usize, len: usize) -> Result<Chain<T>> {
        if len == 0 || start + len > self.len() {
            return Err(Error::Domain(format!(
                "window [{start}, {}) outside chain of length {}",
                start + len,
                self.len()
            )));
        }
        Ok(Chain {
            dim: self.dim,
            coords: self.coords[start * self.dim..(start + len) * self.dim].to_vec(),
        })
    }

    pub fn map<U: Clone>(&self, f: impl FnMut(&T) -> U) -> Chain<U> {
        Chain {
            dim: self.dim,
            coords: self.coords.iter().map(f).collect(),
        }
    }
}

impl Chain<f64> {
    pub fn new(dim: usize, points: &[Vec<f64>]) -> Result<Self> {
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::Domain(format!(
                    "point {i} has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            if let Some(x) = p.iter().find(|x| !x.is_finite()) {
                return Err(Error::Domain(format!("point {i} has non-finite coordinate {x}")));
            }
            coords.extend_from_slice(p);
        }
        Chain::from_flat(dim, coords)
    }

    /// The standard linear chain `E_N = [e; 2e; …; Ne]` with `e` the first unit vector.
    pub fn standard(len: usize, dim: usize) -> Self {
        let mut coords = vec![0.0; len * dim];
        for i in 0..len {
            coords[i * dim] = (i + 1) as f64;
        }
        Chain { dim, coords }
    }

    pub fn scalar(values: &[f64]) -> Self {
        Chain {
            dim: 1,
            coords: values.to_vec(),
        }
    }

    pub fn to_points(&self) -> Vec<Vec<f64>> {
        self.points().map(|p| p.to_vec()).collect()
    }

    pub fn add(&self, other: &Chain) -> Result<Chain> {
        self.check_same_shape(other)?;
        Ok(Chain {
            dim: self.dim,
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Chain) -> Result<Chain> {
        self.check_same_shape(other)?;
        Ok(Chain {
            dim: self.dim,
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn scaled(&self, k: f64) -> Chain {
        self.map(|x| x * k)
    }

    /// `|P|_0`, the largest Euclidean point norm.
    pub fn max_norm(&self) -> f64 {
        self.points().map(point_norm).fold(0.0, f64::max)
    }

    /// The inner product `⟨P, R⟩_n = Σ ⟨p_i, r_i⟩`.
    pub fn inner(&self, other: &Chain) -> Result<f64> {
        self.check_same_shape(other)?;
        Ok(self.coords.iter().zip(&other.coords).map(|(a, b)| a * b).sum())
    }

    fn check_same_shape(&self, other: &Chain) -> Result<()> {
        if self.dim != other.dim || self.coords.len() != other.coords.len() {
            return Err(Error::Domain(format!(
                "shape mismatch: {}x{} vs {}x{}",
                self.len(),
                self.dim,
                other.len(),
                other.dim
            )));
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let dim = value
            .get("dim")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Parse("missing or invalid \"dim\"".into()))? as usize;
        if dim == 0 {
            return Err(Error::Parse("\"dim\" must be at least 1".into()));
        }
        let points = value
            .get("points")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("missing or invalid \"points\" array".into()))?;
        if points.is_empty() {
            return Err(Error::Parse("\"points\" is empty".into()));
        }
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (i, p) in points.iter().enumerate() {
            let arr = p
                .as_array()
                .ok_or_else(|| Error::Parse(format!("point {i} is not an array")))?;
            if arr.len() != dim {
                return Err(Error::Parse(format!(
                    "point {i} has {} coordinates, expected {dim}",
                    arr.len()
                )));
            }
            for (c, x) in arr.iter().enumerate() {
                let x = x
                    .as_f64()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::Parse(format!("point {i}, coordinate {c} is not a finite number")))?;
                coords.push(x);
            }
        }
        Chain::from_flat(dim, coords)
    }

    pub fn to_json_string(&self) -> String {
        #[derive(Serialize)]
        struct ChainFile {
            dim: usize,
            points: Vec<Vec<f64>>,
        }
        let file = ChainFile {
            dim: self.dim,
            points: self.to_points(),
        };
        serde_json::to_string_pretty(&file).expect("chain serialization cannot fail")
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Chain::from_json_str(&text)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string() + "\n")?;
        Ok(())
    }
}

pub fn point_norm(p: &[f64]) -> f64 {
    p.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `Δ^k P`.
pub fn diff<T: Scalar>(p: &Chain<T>, k: usize) -> Result<Chain<T>> {
    if k >= p.len() {
        return Err(Error::Domain(format!(
            "difference order {k} requires more than {} points",
            p.len()
        )));
    }
    let d = p.dim;
    let mut coords = p.coords.clone();
    for _ in 0..k {
        let len = coords.len() / d - 1;
        let next = (0..len * d)
            .map(|i| coords[i + d].clone() - coords[i].clone())
            .collect();
        coords = next;
    }
    Ok(Chain { dim: d, coords })
}

/// `|P|_j = |Δ^j P|_0`.
pub fn seminorm(p: &Chain, j: usize) -> Result<f64> {
    Ok(diff(p, j)?.max_norm())
}

/// Weights of the orthonormal ramp chain `(i - c) / sqrt(Σ (i - c)²)`.
fn ramp_basis(n: usize) -> Vec<f64> {
    let c = (n as f64 - 1.0) / 2.0;
    let raw: Vec<f64> = (0..n).map(|i| i as f64 - c).collect();
    let s = raw.iter().map(|x| x * x).sum::<f64>().sqrt();
    raw.into_iter().map(|x| x / s).collect()
}

/// Orthogonal projection `Π` onto linear chains, computed per coordinate from
/// the orthonormal basis {constant, ramp}.
pub fn project_linear(p: &Chain) -> Result<Chain> {
    let n = p.len();
    if n < 3 {
        return Err(Error::Domain(format!("projection needs at least 3 points, got {n}")));
    }
    let d = p.dim;
    let e0 = 1.0 / (n as f64).sqrt();
    let e1 = ramp_basis(n);
    let mut coords = vec![0.0; n * d];
    for c in 0..d {
        let mut c0 = 0.0;
        let mut c1 = 0.0;
        for i in 0..n {
            let x = p.coords[i * d + c];
            c0 += e0 * x;
            c1 += e1[i] * x;
        }
        for i in 0..n {
            coords[i * d + c] = c0 * e0 + c1 * e1[i];
        }
    }
    Ok(Chain { dim: d, coords })
}

/// Least-squares weights `w_i` such that the spacing of `Πp` is `Σ w_i p_i`.
pub fn slope_weights(n: usize) -> Vec<f64> {
    let c = (n as f64 - 1.0) / 2.0;
    let s: f64 = (0..n).map(|i| (i as f64 - c).powi(2)).sum();
    (0..n).map(|i| (i as f64 - c) / s).collect()
}

/// The matrices `M¹ ∈ R^{n×(n-1)}` and `M² ∈ R^{(n-1)×(n-2)}` with
/// `d = M¹Δd` and `Δd = M²Δ²d` for every `d` orthogonal to linear chains.
pub fn m_matrices(n: usize) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    if n < 3 {
        return Err(Error::Domain(format!("spread must be at least 3, got {n}")));
    }
    let nf = n as f64;
    let m1 = DMatrix::from_fn(n, n - 1, |i, j| {
        let base = (j as f64 + 1.0) / nf;
        if i <= j {
            base - 1.0
        } else {
            base
        }
    });
    let m2 = DMatrix::from_fn(n - 1, n - 2, |i, j| {
        let jf = j as f64;
        let base = (jf + 1.0) * (jf + 2.0) * (2.0 * jf + 3.0 - 3.0 * nf) / (nf * (1.0 + nf) * (1.0 - nf));
        if i <= j {
            base - 1.0
        } else {
            base
        }
    });
    Ok((m1, m2))
}

/// `K = M¹M²`, the inverse of `Δ²` restricted to the complement of linear chains.
pub fn lift_matrix(n: usize) -> Result<DMatrix<f64>> {
    let (m1, m2) = m_matrices(n)?;
    Ok(m1 * m2)
}

/// Maximum absolute row sum.
pub fn row_sum_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// A nonnegative real or infinity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtendedScalar {
    Finite(f64),
    Infinite,
}

impl ExtendedScalar {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtendedScalar::Finite(x) => Some(x),
            ExtendedScalar::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtendedScalar::Infinite)
    }

    pub fn le(self, bound: f64) -> bool {
        matches!(self, ExtendedScalar::Finite(x) if x <= bound)
    }

    pub fn max(self, other: ExtendedScalar) -> ExtendedScalar {
        match (self, other) {
            (ExtendedScalar::Finite(a), ExtendedScalar::Finite(b)) => ExtendedScalar::Finite(a.max(b)),
            _ => ExtendedScalar::Infinite,
        }
    }
}

impl PartialOrd for ExtendedScalar {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        use std::cmp::Ordering;
        match (self, other) {
            (ExtendedScalar::Finite(a), ExtendedScalar::Finite(b)) => a.partial_cmp(b),
            (ExtendedScalar::Finite(_), ExtendedScalar::Infinite) => Some(Ordering::Less),
            (ExtendedScalar::Infinite, ExtendedScalar::Finite(_)) => Some(Ordering::Greater),
            (ExtendedScalar::Infinite, ExtendedScalar::Infinite) => Some(Ordering::Equal),
        }
    }
}

impl fmt::Display for ExtendedScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedScalar::Finite(x) => write!(f, "{x:e}"),
            ExtendedScalar::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for ExtendedScalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtendedScalar::Finite(x) => s.serialize_f64(*x),
            ExtendedScalar::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedScalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = ExtendedScalar;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a nonnegative number or \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Self::Value, E> {
                Ok(ExtendedScalar::Finite(v))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Self::Value, E> {
                Ok(ExtendedScalar::Finite(v as f64))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Self::Value, E> {
                Ok(ExtendedScalar::Finite(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Self::Value, E> {
                match v {
                    "inf" | "infinity" => Ok(ExtendedScalar::Infinite),
                    _ => Err(E::custom(format!("unexpected string {v:?}"))),
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// Relative distortion `κ(p) = |p|_2 / |Πp|_1` of a window.
pub fn kappa(p: &Chain) -> ExtendedScalar {
    let n = p.len();
    if n < 3 {
        return ExtendedScalar::Infinite;
    }
    let w = slope_weights(n);
    let d = p.dim;
    let mut slope = vec![0.0; d];
    for (i, pt) in p.points().enumerate() {
        for c in 0..d {
            slope[c] += w[i] * pt[c];
        }
    }
    let lin = point_norm(&slope);
    if lin < DEGENERACY_REL * (1.0 + p.max_norm()) {
        return ExtendedScalar::Infinite;
    }
    let second = diff(p, 2).map(|c| c.max_norm()).unwrap_or(0.0);
    ExtendedScalar::Finite(second / lin)
}

/// `κ(P)`, the maximum of `κ` over all windows of length `n`.
pub fn kappa_chain(p: &Chain, n: usize) -> Result<ExtendedScalar> {
    if p.len() < n {
        return Err(Error::Domain(format!(
            "chain of length {} is shorter than the spread {n}",
            p.len()
        )));
    }
    let mut worst = ExtendedScalar::Finite(0.0);
    for i in 0..=p.len() - n {
        worst = worst.max(kappa(&p.window(i, n)?));
        if worst.is_infinite() {
            break;
        }
    }
    Ok(worst)
}

/// A similarity `p ↦ ϱ p Q + s` with `ϱ > 0` and `Q` orthogonal.
#[derive(Clone, Debug, PartialEq)]
pub struct Similarity {
    scale: f64,
    /// Row-major `d×d`.
    rotation: Vec<f64>,
    shift: Vec<f64>,
}

impl Similarity {
    pub fn new(scale: f64, rotation: Vec<f64>, shift: Vec<f64>) -> Result<Self> {
        let d = shift.len();
        if d == 0 || rotation.len() != d * d {
            return Err(Error::Domain(format!(
                "rotation has {} entries, shift has {d}",
                rotation.len()
            )));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Domain(format!("scale must be positive, got {scale}")));
        }
        for i in 0..d {
            for j in 0..d {
                let qtq: f64 = (0..d).map(|k| rotation[k * d + i] * rotation[k * d + j]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                if (qtq - target).abs() > ORTHOGONALITY_TOL {
                    return Err(Error::Domain(format!(
                        "matrix is not orthogonal: (QᵀQ)[{i}][{j}] = {qtq}"
                    )));
                }
            }
        }
        Ok(Similarity { scale, rotation, shift })
    }

    pub fn identity(dim: usize) -> Self {
        let mut rotation = vec![0.0; dim * dim];
        for i in 0..dim {
            rotation[i * dim + i] = 1.0;
        }
        Similarity {
            scale: 1.0,
            rotation,
            shift: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    /// `|S| = ϱ`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn rotation(&self) -> &[f64] {
        &self.rotation
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    pub fn apply_point(&self, p: &[f64]) -> Vec<f64> {
        let d = self.dim();
        (0..d)
            .map(|c| {
                let pq: f64 = (0..d).map(|r| p[r] * self.rotation[r * d + c]).sum();
                self.scale * pq + self.shift[c]
            })
            .collect()
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Similarity) -> Similarity {
        let d = self.dim();
        let mut rotation = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                rotation[i * d + j] = (0..d).map(|k| other.rotation[i * d + k] * self.rotation[k * d + j]).sum();
            }
        }
        let shift = self.apply_point(&other.shift);
        Similarity {
            scale: self.scale * other.scale,
            rotation,
            shift,
        }
    }

    pub fn inverse(&self) -> Similarity {
        let d = self.dim();
        let mut rotation = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                rotation[i * d + j] = self.rotation[j * d + i];
            }
        }
        let scale = 1.0 / self.scale;
        let shift = (0..d)
            .map(|c| -scale * (0..d).map(|r| self.shift[r] * rotation[r * d + c]).sum::<f64>())
            .collect();
        Similarity { scale, rotation, shift }
    }
}

pub fn apply_similarity(s: &Similarity, p: &Chain) -> Result<Chain> {
    if s.dim() != p.dim() {
        return Err(Error::Domain(format!(
            "similarity acts on dimension {}, chain has dimension {}",
            s.dim(),
            p.dim()
        )));
    }
    let coords = p.points().flat_map(|pt| s.apply_point(pt)).collect();
    Chain::from_flat(p.dim(), coords)
}

/// Maps a window with non-constant linear component to the normalized window
/// `q` with `Πq = e`, returning `q` and the similarity used.
///
/// The similarity translates, scales by the inverse spacing of `Πp`, and
/// rotates the spacing direction onto the first axis with a Householder
/// reflection.
pub fn normalize(p: &Chain) -> Result<(Chain, Similarity)> {
    let n = p.len();
    if n < 3 {
        return Err(Error::Domain(format!("normalization needs at least 3 points, got {n}")));
    }
    let d = p.dim();
    let lin = project_linear(p)?;
    let slope: Vec<f64> = (0..d).map(|c| lin.point(1)[c] - lin.point(0)[c]).collect();
    let spacing = point_norm(&slope);
    if spacing < DEGENERACY_REL * (1.0 + p.max_norm()) {
        return Err(Error::Degenerate("linear component of the window is constant".into()));
    }
    let dir: Vec<f64> = slope.iter().map(|x| x / spacing).collect();

    let mut w = dir.clone();
    w[0] -= 1.0;
    let ww: f64 = w.iter().map(|x| x * x).sum();
    let mut rotation = vec![0.0; d * d];
    for i in 0..d {
        rotation[i * d + i] = 1.0;
    }
    if ww > 1e-30 {
        for i in 0..d {
            for j in 0..d {
                rotation[i * d + j] -= 2.0 * w[i] * w[j] / ww;
            }
        }
    }
    let scale = 1.0 / spacing;
    let partial = Similarity::new(scale, rotation, vec![0.0; d])?;
    let image_of_first = partial.apply_point(lin.point(0));
    let shift = (0..d)
        .map(|c| if c == 0 { 1.0 } else { 0.0 } - image_of_first[c])
        .collect();
    let sim = Similarity::new(scale, partial.rotation, shift)?;
    let q = apply_similarity(&sim, p)?;
    Ok((q, sim))
}
