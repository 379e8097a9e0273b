use serde::{Deserialize, Serialize};

use super::sampling::parameter_interval;
use crate::chain::{kappa_chain, point_norm, Chain, ExtendedScalar};
use crate::error::{Error, Result};
use crate::schemes::GlueScheme;

/// Values at or below this are treated as exact zeros.
const ZERO: f64 = 1e-13;

/// Least-squares slope of `ys` against `xs`.
fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaDecay {
    /// `-slope` of `log2 κ_ℓ`; `inf` when `exact`.
    #[serde(with = "crate::certify::inf_f64")]
    pub alpha: f64,
    /// The tail distortions vanish, so there is nothing to regress.
    pub exact: bool,
    /// `κ_ℓ(P)` for `ℓ = 0..=ℓ_max`.
    pub kappas: Vec<ExtendedScalar>,
    /// Levels used in the regression.
    pub window: (usize, usize),
}

/// Regresses `log2 κ_ℓ(P)` over the second half of the finite levels.
pub fn empirical_kappa_decay(scheme: &GlueScheme, p: &Chain, max_level: usize) -> Result<KappaDecay> {
    let n = scheme.spread();
    let mut q = p.clone();
    let mut kappas = Vec::with_capacity(max_level + 1);
    for level in 0..=max_level {
        kappas.push(kappa_chain(&q, n)?);
        if level < max_level {
            q = scheme.subdivide(&q)?;
        }
    }
    let Some(first) = kappas.iter().position(|k| !k.is_infinite()) else {
        return Err(Error::Degenerate("distortion is infinite at every level".into()));
    };
    if kappas[first..].iter().any(|k| k.is_infinite()) {
        return Err(Error::Degenerate("distortion becomes infinite after subdivision".into()));
    }
    let lo = first + (max_level + 1 - first) / 2;
    let window = (lo, max_level);
    let tail: Vec<(f64, f64)> = (lo..=max_level)
        .map(|l| (l as f64, kappas[l].finite().expect("finite tail")))
        .collect();
    if tail.iter().all(|&(_, k)| k <= ZERO) {
        return Ok(KappaDecay {
            alpha: f64::INFINITY,
            exact: true,
            kappas,
            window,
        });
    }
    let positive: Vec<(f64, f64)> = tail.into_iter().filter(|&(_, k)| k > ZERO).collect();
    if positive.len() < 2 {
        return Err(Error::Domain(format!(
            "need at least two levels with nonzero distortion in {lo}..={max_level}; increase the level"
        )));
    }
    let xs: Vec<f64> = positive.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = positive.iter().map(|p| p.1.log2()).collect();
    Ok(KappaDecay {
        alpha: -slope(&xs, &ys),
        exact: false,
        kappas,
        window,
    })
}

/// Index range `i` with `2^-ℓ i ∈ I_z`.
fn level_indices(len0: usize, spread: usize, level: usize, z: f64) -> Result<(usize, usize)> {
    let (a, b) = parameter_interval(len0, spread, z)?;
    let s = (1u64 << level) as f64;
    Ok(((a * s).ceil() as usize, (b * s).floor() as usize))
}

/// `min_i ‖2^ℓ Δp^ℓ_i‖` over `i, i+1` inside `I^ℓ_z`.
pub fn derivative_floor(scheme: &GlueScheme, p: &Chain, level: usize, z: f64) -> Result<f64> {
    let (lo, hi) = level_indices(p.len(), scheme.spread(), level, z)?;
    let q = scheme.subdivide_rounds(p, level)?;
    let hi = hi.min(q.len() - 1);
    let s = (1u64 << level) as f64;
    let mut best = f64::INFINITY;
    for i in lo..hi {
        let d: Vec<f64> = q.point(i + 1).iter().zip(q.point(i)).map(|(a, b)| s * (a - b)).collect();
        best = best.min(point_norm(&d));
    }
    if best.is_infinite() {
        return Err(Error::Domain("no index pair inside I_z; increase the level".into()));
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderEstimate {
    pub order: usize,
    /// Regression slope, capped at 1; `inf` when `exact`.
    #[serde(with = "crate::certify::inf_f64")]
    pub alpha: f64,
    /// Slope before capping.
    pub raw_slope: f64,
    /// The modulus of continuity vanishes on the whole grid.
    pub exact: bool,
    /// `(h, ω_z(∂^kΦ, h))` for `h = 2^-j`, `j = 3..=ℓ-2`.
    pub omega: Vec<(f64, f64)>,
    /// Grid rows used in the regression.
    pub window: (usize, usize),
}

/// Estimates the Hölder exponent of `∂^kΦ` from divided differences of
/// `P^ℓ`, using `ω_z` on `h = 2^-j`, `j = 3..=ℓ-2`, regressed over the middle
/// third of the grid.
pub fn empirical_holder(scheme: &GlueScheme, p: &Chain, order: usize, level: usize, z: f64) -> Result<HolderEstimate> {
    if !(1..=2).contains(&order) {
        return Err(Error::Domain(format!("order must be 1 or 2, got {order}")));
    }
    if level < 11 {
        return Err(Error::Domain(format!(
            "level {level} is too small for a Hölder estimate; use at least 11"
        )));
    }
    let (lo, hi) = level_indices(p.len(), scheme.spread(), level, z)?;
    let q = scheme.subdivide_rounds(p, level)?;
    let d = q.dim();
    let s = (1u64 << level) as f64;
    let hi = hi.min(q.len() - 1);
    // D_i approximates ∂^kΦ at parameter 2^-ℓ (i + k/2)
    let derivs: Vec<Vec<f64>> = (lo..=hi - order)
        .map(|i| {
            (0..d)
                .map(|c| {
                    let x = |j: usize| q.point(j)[c];
                    match order {
                        1 => s * (x(i + 1) - x(i)),
                        _ => s * s * (x(i + 2) - 2.0 * x(i + 1) + x(i)),
                    }
                })
                .collect()
        })
        .collect();
    let mut omega = Vec::new();
    for j in 3..=level - 2 {
        let shift = 1usize << (level - j);
        if shift >= derivs.len() {
            continue;
        }
        let mut w = 0.0f64;
        for i in 0..derivs.len() - shift {
            let diff: Vec<f64> = derivs[i + shift].iter().zip(&derivs[i]).map(|(a, b)| a - b).collect();
            w = w.max(point_norm(&diff));
        }
        omega.push(((-(j as f64)).exp2(), w));
    }
    if omega.len() < 3 {
        return Err(Error::Domain("too few scales inside I_z; increase the level or decrease z".into()));
    }
    let scale = derivs.iter().map(|v| point_norm(v)).fold(0.0, f64::max).max(1.0);
    if omega.iter().all(|&(_, w)| w <= ZERO * scale) {
        return Ok(HolderEstimate {
            order,
            alpha: f64::INFINITY,
            raw_slope: f64::INFINITY,
            exact: true,
            omega,
            window: (0, 0),
        });
    }
    let third = omega.len() / 3;
    let (a, b) = (third, omega.len() - third);
    let rows: Vec<(f64, f64)> = omega[a..b].iter().filter(|r| r.1 > 0.0).copied().collect();
    if rows.len() < 2 {
        return Err(Error::Domain("modulus of continuity vanishes on most scales".into()));
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.0.log2()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.1.log2()).collect();
    let raw = slope(&xs, &ys);
    Ok(HolderEstimate {
        order,
        alpha: raw.min(1.0),
        raw_slope: raw,
        exact: false,
        omega,
        window: (a, b),
    })
}
