use serde::{Deserialize, Serialize};

use super::certificate::Certificate;
use super::companion::DerivativePair;
use crate::error::Result;
use crate::schemes::{difference_scheme, jsr_upper, GlueScheme, MatrixPair};

/// Regularity level of a limit curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "level", rename_all = "snake_case")]
pub enum Level {
    Unknown,
    Convergent,
    C1,
    /// `C^{1,α}`.
    C1Alpha { alpha: f64 },
    /// `C^{1,α'}` for every `α' < α`.
    AlmostC1Alpha { alpha: f64 },
    /// `C^{2,β'}` for every `β' < β`.
    AlmostC2 { beta: f64 },
}

impl Level {
    /// Sort key: larger is smoother.
    pub fn strength(&self) -> f64 {
        match self {
            Level::Unknown => -1.0,
            Level::Convergent => 0.0,
            Level::C1 => 1.0,
            Level::C1Alpha { alpha } => 1.0 + alpha,
            Level::AlmostC1Alpha { alpha } => 1.0 + alpha - 1e-9,
            Level::AlmostC2 { beta } => 2.0 + beta - 1e-9,
        }
    }

    pub fn is_certified(&self) -> bool {
        !matches!(self, Level::Unknown)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Justification {
    pub name: String,
    #[serde(with = "crate::certify::inf_f64")]
    pub value: f64,
    pub reason: String,
}

impl Justification {
    pub fn new(name: impl Into<String>, value: f64, reason: impl Into<String>) -> Self {
        Justification {
            name: name.into(),
            value,
            reason: reason.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub scheme: String,
    #[serde(flatten)]
    pub level: Level,
    /// Subdivision round at which the chain met the certificate.
    pub round: Option<usize>,
    pub justification: Vec<Justification>,
}

impl Verdict {
    pub fn unknown(scheme: &str, justification: Vec<Justification>) -> Self {
        Verdict {
            scheme: scheme.to_string(),
            level: Level::Unknown,
            round: None,
            justification,
        }
    }
}

/// Hölder data of a linear scheme derived from its difference schemes.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CompanionExponents {
    /// `min_ℓ ϱ_ℓ(A_j)` for `j = 2, 3, 4` where the difference scheme exists.
    pub rho: [Option<f64>; 3],
    /// `A` is almost `C^{1,α}` with this `α`.
    pub almost_c1: Option<f64>,
    /// `A` is almost `C^{2,α}` with this `α`.
    pub almost_c2: Option<f64>,
}

/// Uses `ϱ(A_{k+1}) ≤ 2^{-k-α}` with `ϱ` bounded by `min_{ℓ ≤ depth} ϱ_ℓ`.
/// Exponents are capped at 1.
pub fn companion_exponents(a: &MatrixPair, depth: usize) -> Result<CompanionExponents> {
    let mut out = CompanionExponents::default();
    for (slot, j) in (2..=4).enumerate() {
        if let Ok(aj) = difference_scheme(a, j) {
            let mut best = f64::INFINITY;
            for l in 1..=depth {
                best = best.min(jsr_upper(&aj, l)?);
            }
            out.rho[slot] = Some(best);
        }
    }
    let exponent = |rho: Option<f64>, k: f64| rho.map(|r| -r.log2() - k).filter(|&a| a > 0.0);
    out.almost_c1 = exponent(out.rho[0], 1.0).map(|a| a.min(1.0));
    out.almost_c2 = exponent(out.rho[1], 2.0).map(|a| a.min(1.0));
    if exponent(out.rho[2], 3.0).is_some() {
        out.almost_c2 = Some(1.0);
    }
    Ok(out)
}

/// Composes a certificate with the companion analysis.
///
/// A nonlinear scheme needs a certificate (straightening); a linear scheme
/// is its own companion and is judged by its difference schemes alone.
pub fn regularity_verdict(
    scheme: &GlueScheme,
    cert: Option<&Certificate>,
    pair: &DerivativePair,
    jsr_depth: usize,
) -> Result<Verdict> {
    let linear = scheme.as_linear().is_some();
    let mut just = Vec::new();
    let mut level = Level::Unknown;
    if let Some(c) = cert {
        just.push(Justification::new(
            "gamma_star",
            c.gamma_bound,
            format!("Γ*_{}[{:e}] ≤ Γ < 1: straightened at rate α = -log2(Γ)/ℓ", c.depth, c.delta),
        ));
        if let Some(b) = c.annulus_bound {
            just.push(Justification::new(
                "gamma_annulus",
                b,
                format!("Γ_{}[{:e}, {:e}] < 1: rate extends to κ ≤ γ", c.annulus_depth, c.delta, c.gamma),
            ));
        }
        just.push(Justification::new("alpha", c.alpha, "straightened at rate α implies C^{1,α}"));
        level = Level::C1Alpha { alpha: c.alpha.min(1.0) };
    } else if !linear {
        just.push(Justification::new(
            "certificate",
            0.0,
            "no straightening certificate; nonlinear scheme cannot be judged",
        ));
        return Ok(Verdict::unknown(&scheme.id, just));
    }

    let ea = companion_exponents(&pair.a, jsr_depth)?;
    let eb = if pair.locally_linear {
        ea.clone()
    } else {
        companion_exponents(&pair.b, jsr_depth)?
    };
    if let Some(r) = ea.rho[0] {
        just.push(Justification::new("rho_A2", r, "ϱ(A_2) ≤ 2^{-1-α} gives A almost C^{1,α}"));
    }
    if !pair.locally_linear {
        if let Some(r) = eb.rho[0] {
            just.push(Justification::new("rho_B2", r, "ϱ(B_2) ≤ 2^{-1-α} gives B almost C^{1,α}"));
        }
    }
    if let (Some(a1), Some(b1)) = (ea.almost_c1, eb.almost_c1) {
        let alpha = a1.min(b1);
        let candidate = Level::AlmostC1Alpha { alpha };
        if candidate.strength() > level.strength() {
            just.push(Justification::new(
                "almost_c1_alpha",
                alpha,
                "A and B almost C^{1,α} and straightened: G almost C^{1,α}",
            ));
            level = candidate;
        }
    }
    if pair.locally_linear {
        if let Some(r) = ea.rho[1] {
            just.push(Justification::new("rho_A3", r, "ϱ(A_3) ≤ 2^{-2-α} gives A almost C^{2,α}"));
        }
        if let Some(r) = ea.rho[2] {
            just.push(Justification::new("rho_A4", r, "ϱ(A_4) < 2^{-3} gives A C^3, hence C^{2,1}"));
        }
        if let Some(a2) = ea.almost_c2 {
            let beta = if linear { a2 } else { a2.min(scheme.nu) };
            just.push(Justification::new(
                "beta",
                beta,
                format!("locally linear with companion almost C^{{2,{a2}}}, ν = {}: β = min(α, ν)", scheme.nu),
            ));
            let candidate = Level::AlmostC2 { beta };
            if candidate.strength() > level.strength() {
                level = candidate;
            }
        }
    }
    Ok(Verdict {
        scheme: scheme.id.clone(),
        level,
        round: None,
        justification: just,
    })
}
