use std::fmt;

use crate::error::{Error, Result};

/// Largest depth for which all `2^ℓ` index vectors may be enumerated.
pub const MAX_ENUMERATION_DEPTH: usize = 20;

/// A word `Λ = [λ₁, …, λ_ℓ]` over `{0, 1}`; `λ₁` is applied first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IndexVector(Vec<u8>);

impl IndexVector {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::Domain("index vector must have length at least 1".into()));
        }
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(Error::Domain(format!("index vector entries must be 0 or 1, got {b}")));
        }
        Ok(IndexVector(bits))
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// All `2^ℓ` index vectors of length `ℓ`, in lexicographic order.
    pub fn all(len: usize) -> Result<Vec<IndexVector>> {
        if len == 0 || len > MAX_ENUMERATION_DEPTH {
            return Err(Error::DepthGuard(format!(
                "cannot enumerate index vectors of length {len} (allowed 1..={MAX_ENUMERATION_DEPTH})"
            )));
        }
        Ok((0..1u64 << len)
            .map(|code| {
                IndexVector((0..len).map(|i| ((code >> (len - 1 - i)) & 1) as u8).collect())
            })
            .collect())
    }
}

impl fmt::Display for IndexVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, b) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, "]")
    }
}
