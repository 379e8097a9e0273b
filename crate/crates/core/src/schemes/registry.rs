use std::path::Path;

use super::{GlueScheme, LinearScheme, Rule};
use crate::error::{Error, Result};

pub const BUILTIN_NAMES: &[&str] = &["chaikin", "fps", "cps2d", "bspline_tau:<tau>", "spoiler"];

/// The mask of `A^τ`: cubic B-spline for `τ = 0`, quartic for `τ = 1/2`.
pub fn bspline_tau(tau: f64) -> Result<LinearScheme> {
    LinearScheme::new(
        2,
        tau,
        vec![(4.0 - 3.0 * tau) / 8.0, (4.0 + 2.0 * tau) / 8.0, tau / 8.0],
        vec![(1.0 - tau) / 8.0, (6.0 - 2.0 * tau) / 8.0, (1.0 + 3.0 * tau) / 8.0],
    )
}

pub fn chaikin() -> LinearScheme {
    LinearScheme::new(1, 0.5, vec![0.75, 0.25], vec![0.25, 0.75]).expect("valid mask")
}

pub fn four_point() -> LinearScheme {
    LinearScheme::new(
        3,
        0.0,
        vec![0.0, 1.0, 0.0, 0.0],
        vec![-1.0 / 16.0, 9.0 / 16.0, 9.0 / 16.0, -1.0 / 16.0],
    )
    .expect("valid mask")
}

fn parse_tau(name: &str) -> Option<Result<f64>> {
    let rest = name
        .strip_prefix("bspline_tau:")
        .or_else(|| name.strip_prefix("bspline_tau(").and_then(|r| r.strip_suffix(')')))?;
    Some(
        rest.trim()
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("invalid tau in scheme id '{name}'"))),
    )
}

/// Looks up a built-in scheme by id.
pub fn builtin(name: &str) -> Result<GlueScheme> {
    match name {
        "chaikin" => Ok(GlueScheme::linear("chaikin", chaikin())),
        "fps" => Ok(GlueScheme::linear("fps", four_point())),
        "cps2d" => Ok(GlueScheme {
            id: "cps2d".into(),
            m: 3,
            tau: 0.0,
            nu: 1.0,
            rule: Rule::CirclePreserving,
            required_dim: Some(2),
        }),
        "spoiler" => Ok(GlueScheme {
            id: "spoiler".into(),
            m: 2,
            tau: 0.5,
            nu: 1.0,
            rule: Rule::Spoiler,
            required_dim: None,
        }),
        _ => match parse_tau(name) {
            Some(tau) => {
                let tau = tau?;
                Ok(GlueScheme::linear(format!("bspline_tau:{tau}"), bspline_tau(tau)?))
            }
            None => Err(Error::UnknownScheme(name.to_string())),
        },
    }
}

/// A built-in id, or the path of a JSON mask file `{"m", "tau", "a0", "a1"}`.
pub fn resolve(id: &str) -> Result<GlueScheme> {
    if id.ends_with(".json") {
        let path = Path::new(id);
        let text = std::fs::read_to_string(path)?;
        let scheme = LinearScheme::from_json_str(&text)?;
        return Ok(GlueScheme::linear(id, scheme));
    }
    builtin(id)
}
