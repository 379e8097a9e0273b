//! Analysis and rigorous regularity certification of geometric (GLUE)
//! subdivision schemes for curves.

pub mod certify;
pub mod chain;
pub mod commands;
pub mod error;
pub mod limits;
pub mod rigor;
pub mod scalar;
pub mod schemes;

pub use chain::{Chain, ExtendedScalar, Similarity};
pub use error::{Error, EvalError, Result};
pub use schemes::GlueScheme;
