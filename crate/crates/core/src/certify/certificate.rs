use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::gamma::{gamma_annulus, gamma_star_delta, gamma_star_zero, MAX_STAR_ZERO_DEPTH};
use super::rate;
use super::verdict::{Justification, Level, Verdict};
use crate::chain::{kappa_chain, Chain, ExtendedScalar};
use crate::error::{Error, Result};
use crate::schemes::GlueScheme;

/// Search parameters for [`certify_rate`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    /// Ambient dimension; defaults to the scheme's required dimension, else 2.
    pub dim: Option<usize>,
    /// Largest inner depth `ℓ`.
    pub depth_max: usize,
    /// Largest annulus depth `k`.
    pub annulus_depth_max: usize,
    pub delta_grid: Vec<f64>,
    /// Factor by which `γ` grows while the annulus bound stays below 1.
    pub gamma_growth: f64,
    pub gamma_max: f64,
    pub bisection_steps: usize,
    /// Total number of boxes over the whole search.
    pub budget: usize,
    /// Cap on boxes for a single bound query.
    pub query_budget: usize,
    /// Relative difference in `α` below which the larger `δ` is preferred.
    pub alpha_tie: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            dim: None,
            depth_max: 5,
            annulus_depth_max: 3,
            delta_grid: vec![1e-1, 1e-2, 1e-3, 1e-4],
            gamma_growth: 2.0,
            gamma_max: 1.0,
            bisection_steps: 3,
            budget: 1_000_000,
            query_budget: 64,
            alpha_tie: 0.05,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.depth_max == 0 || self.depth_max > MAX_STAR_ZERO_DEPTH {
            return Err(Error::Domain(format!(
                "depth_max must lie in 1..={MAX_STAR_ZERO_DEPTH}, got {}",
                self.depth_max
            )));
        }
        if self.annulus_depth_max > MAX_STAR_ZERO_DEPTH {
            return Err(Error::Domain(format!(
                "annulus_depth_max must be at most {MAX_STAR_ZERO_DEPTH}"
            )));
        }
        if self.delta_grid.is_empty() || self.delta_grid.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
            return Err(Error::Domain("delta_grid must be a nonempty list of positive numbers".into()));
        }
        if !(self.alpha_tie >= 0.0 && self.alpha_tie < 1.0) {
            return Err(Error::Domain("alpha_tie must lie in [0, 1)".into()));
        }
        if !(self.gamma_growth > 1.0) || !(self.gamma_max > 0.0) {
            return Err(Error::Domain("gamma_growth must exceed 1 and gamma_max must be positive".into()));
        }
        Ok(())
    }

    pub fn resolve_dim(&self, scheme: &GlueScheme) -> usize {
        self.dim.or(scheme.required_dim).unwrap_or(2)
    }
}

/// Proof data that chains with `κ ≤ γ` are straightened at rate `α`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub scheme: String,
    pub dim: usize,
    pub delta: f64,
    /// Equal to `delta` when only the inner bound is certified.
    pub gamma: f64,
    /// Inner depth `ℓ`.
    pub depth: usize,
    /// `Γ ≥ Γ*_ℓ[δ]`, `Γ < 1`.
    pub gamma_bound: f64,
    /// Annulus depth `k`; 0 when there is no annulus bound.
    pub annulus_depth: usize,
    pub annulus_bound: Option<f64>,
    pub alpha: f64,
    pub boxes: usize,
    pub unresolved_fraction: f64,
    pub version: String,
    pub config: SearchConfig,
    pub wall_time_s: f64,
}

impl Certificate {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let c: Certificate = serde_json::from_str(s).map_err(|e| Error::Parse(format!("certificate: {e}")))?;
        if !(c.gamma_bound < 1.0 && c.alpha > 0.0 && c.delta > 0.0 && c.gamma >= c.delta) {
            return Err(Error::Parse("certificate fields are inconsistent".into()));
        }
        Ok(c)
    }
}

/// Best bounds seen by a search that did not produce a certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyFailure {
    pub scheme: String,
    pub message: String,
    /// `(ℓ, δ, bound)` of the smallest inner bound obtained.
    pub best_inner: Option<(usize, f64, f64)>,
    pub boxes: usize,
    pub unresolved_fraction: f64,
}

/// Searches `(δ, ℓ)` maximizing the certified rate, then grows `γ` while
/// the annulus bound stays below 1. The outer error is for invalid input;
/// the inner one means the search was inconclusive.
pub fn certify_rate(scheme: &GlueScheme, config: &SearchConfig) -> Result<Result<Certificate, CertifyFailure>> {
    config.validate()?;
    let start = Instant::now();
    let d = config.resolve_dim(scheme);
    scheme.check_dim(d)?;

    let mut deltas = config.delta_grid.clone();
    deltas.sort_by(f64::total_cmp);
    deltas.dedup();
    let mut used = 0usize;
    // (alpha, depth, delta, bound)
    let mut best: Option<(f64, usize, f64, f64)> = None;
    let mut best_inner: Option<(usize, f64, f64)> = None;
    let mut last_unresolved = 1.0;

    for depth in 1..=config.depth_max {
        if used >= config.budget {
            break;
        }
        used += 1;
        let Ok(zero) = gamma_star_zero(scheme, d, depth) else { continue };
        if zero >= 1.0 || best.is_some_and(|(a, ..)| rate(zero, depth) <= a) {
            continue;
        }
        // bounds grow with δ, so the first failure ends the scan for this depth
        for &delta in &deltas {
            let remaining = (config.budget - used).min(config.query_budget);
            if remaining == 0 {
                break;
            }
            let out = gamma_star_delta(scheme, d, depth, delta, 1.0, remaining)?;
            used += out.boxes;
            last_unresolved = out.unresolved_fraction;
            if best_inner.is_none_or(|(_, _, b)| out.bound < b) {
                best_inner = Some((depth, delta, out.bound));
            }
            if !out.certified {
                break;
            }
            let alpha = rate(out.bound, depth);
            let better = match best {
                None => true,
                Some((a, _, dl, _)) => {
                    let tie = config.alpha_tie * a.abs();
                    alpha > a + tie || (alpha >= a - tie && delta > dl)
                }
            };
            if better {
                best = Some((alpha, depth, delta, out.bound));
            }
        }
    }

    let Some((alpha, depth, delta, bound)) = best else {
        return Ok(Err(CertifyFailure {
            scheme: scheme.id.clone(),
            message: if used >= config.budget {
                "box budget exhausted before an inner bound below 1 was certified".into()
            } else {
                "no inner bound below 1 within the configured depths and radii".into()
            },
            best_inner,
            boxes: used,
            unresolved_fraction: last_unresolved,
        }));
    };

    // (gamma, k, bound)
    let mut outer: Option<(f64, usize, f64)> = None;
    for k in 1..=config.annulus_depth_max {
        if used >= config.budget {
            break;
        }
        used += 1;
        if gamma_star_zero(scheme, d, k).map(|g| g >= 1.0).unwrap_or(true) {
            continue;
        }
        let try_gamma = |gamma: f64, used: &mut usize| -> Result<Option<f64>> {
            let remaining = (config.budget - *used).min(config.query_budget);
            if remaining == 0 {
                return Ok(None);
            }
            let out = gamma_annulus(scheme, d, k, delta, gamma, 1.0, remaining)?;
            *used += out.boxes;
            Ok(out.certified.then_some(out.bound))
        };
        // only radii beyond the best one so far are worth trying
        let floor = outer.map_or(delta, |(g, _, _)| g);
        let mut ok: Option<(f64, f64)> = None;
        let mut failed: Option<f64> = None;
        let mut gamma = (floor * config.gamma_growth).min(config.gamma_max);
        while gamma > floor {
            match try_gamma(gamma, &mut used)? {
                Some(b) => {
                    ok = Some((gamma, b));
                    if gamma >= config.gamma_max {
                        break;
                    }
                    gamma = (gamma * config.gamma_growth).min(config.gamma_max);
                }
                None => {
                    failed = Some(gamma);
                    break;
                }
            }
        }
        if let Some(hi) = failed {
            let (mut lo, mut hi) = (ok.map_or(floor, |(g, _)| g), hi);
            for _ in 0..config.bisection_steps {
                let mid = (lo * hi).sqrt();
                match try_gamma(mid, &mut used)? {
                    Some(b) => {
                        ok = Some((mid, b));
                        lo = mid;
                    }
                    None => hi = mid,
                }
            }
        }
        if let Some((g, b)) = ok {
            if outer.is_none_or(|(og, _, _)| g > og) {
                outer = Some((g, k, b));
            }
        }
    }

    let (gamma, annulus_depth, annulus_bound) = match outer {
        Some((g, k, b)) => (g, k, Some(b)),
        None => (delta, 0, None),
    };
    Ok(Ok(Certificate {
        scheme: scheme.id.clone(),
        dim: d,
        delta,
        gamma,
        depth,
        gamma_bound: bound,
        annulus_depth,
        annulus_bound,
        alpha,
        boxes: used,
        unresolved_fraction: 0.0,
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        wall_time_s: start.elapsed().as_secs_f64(),
    }))
}

/// Subdivides `p` until its relative distortion is at most the certified `γ`.
pub fn check_chain(scheme: &GlueScheme, cert: &Certificate, p: &Chain, max_rounds: usize) -> Result<Verdict> {
    if cert.scheme != scheme.id {
        return Err(Error::Domain(format!(
            "certificate is for scheme '{}', not '{}'",
            cert.scheme, scheme.id
        )));
    }
    if p.dim() > cert.dim {
        return Err(Error::Domain(format!(
            "certificate covers dimension {}, chain has dimension {}",
            cert.dim,
            p.dim()
        )));
    }
    let n = scheme.spread();
    let mut q = p.clone();
    let mut just = Vec::new();
    for round in 0..=max_rounds {
        let k = kappa_chain(&q, n)?;
        let value = match k {
            ExtendedScalar::Finite(x) => x,
            ExtendedScalar::Infinite => f64::INFINITY,
        };
        just.push(Justification::new(format!("kappa_{round}"), value, "relative distortion of the iterate"));
        if k.le(cert.gamma) {
            just.push(Justification::new("gamma", cert.gamma, "certified radius: κ ≤ γ"));
            just.push(Justification::new(
                "alpha",
                cert.alpha,
                format!(
                    "Γ*_{}[{:e}] ≤ {} < 1: straightened at rate α, hence C^{{1,α}}",
                    cert.depth, cert.delta, cert.gamma_bound
                ),
            ));
            return Ok(Verdict {
                scheme: scheme.id.clone(),
                level: Level::C1Alpha {
                    alpha: cert.alpha.min(1.0),
                },
                round: Some(round),
                justification: just,
            });
        }
        if round < max_rounds {
            match scheme.subdivide(&q) {
                Ok(next) => q = next,
                Err(e) => {
                    just.push(Justification::new("round", round as f64, format!("subdivision failed: {e}")));
                    return Ok(Verdict::unknown(&scheme.id, just));
                }
            }
        }
    }
    Ok(Verdict::unknown(&scheme.id, just))
}
