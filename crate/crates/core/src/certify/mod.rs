//! Certified distortion bounds, straightening certificates, derivative
//! structure at the standard window, and regularity verdicts.

mod certificate;
mod companion;
mod gamma;
mod verdict;

pub use certificate::{certify_rate, check_chain, CertifyFailure, Certificate, SearchConfig};
pub use companion::{tangent_normal, DerivativePair, STRUCTURE_TOL};
pub use gamma::{gamma_annulus, gamma_star_delta, gamma_star_zero, mixed_norm_upper, GammaOutcome, MAX_STAR_ZERO_DEPTH};
pub use verdict::{companion_exponents, regularity_verdict, CompanionExponents, Justification, Level, Verdict};

/// `α = -log₂(Γ) / ℓ`.
pub fn rate(gamma: f64, depth: usize) -> f64 {
    -gamma.log2() / depth as f64
}

/// Serializes non-finite floats as the string `"inf"`.
pub(crate) mod inf_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::chain::ExtendedScalar;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_str("inf")
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(match ExtendedScalar::deserialize(d)? {
            ExtendedScalar::Finite(x) => x,
            ExtendedScalar::Infinite => f64::INFINITY,
        })
    }
}
