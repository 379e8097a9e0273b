//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Chains cross the boundary as JSON strings in the `{"dim": 2, "points": [...]}`
//! format used by the command-line tool.

use glue_core::chain::{kappa_chain, Chain};
use glue_core::commands::cmd_companion;
use glue_core::schemes::resolve;
use serde_json::json;
use wasm_bindgen::prelude::*;

fn subdivide_impl(scheme: &str, chain: &str, rounds: usize) -> Result<String, String> {
    let s = resolve(scheme).map_err(|e| e.to_string())?;
    let mut p = Chain::from_json_str(chain).map_err(|e| e.to_string())?;
    for _ in 0..rounds {
        p = s.subdivide(&p).map_err(|e| e.to_string())?;
    }
    Ok(p.to_json_string())
}

fn kappa_impl(scheme: &str, chain: &str, rounds: usize) -> Result<String, String> {
    let s = resolve(scheme).map_err(|e| e.to_string())?;
    let mut p = Chain::from_json_str(chain).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(rounds + 1);
    for level in 0..=rounds {
        let k = kappa_chain(&p, s.spread()).map_err(|e| e.to_string())?;
        out.push(k.to_string());
        if level < rounds {
            p = s.subdivide(&p).map_err(|e| e.to_string())?;
        }
    }
    Ok(json!(out).to_string())
}

fn companion_impl(scheme: &str) -> Result<String, String> {
    let s = resolve(scheme).map_err(|e| e.to_string())?;
    cmd_companion(&s, None, 6).map(|o| o.report).map_err(|e| e.to_string())
}

/// Chain JSON after `rounds` subdivision steps.
#[wasm_bindgen]
pub fn subdivide(scheme: &str, chain: &str, rounds: usize) -> Result<String, JsError> {
    subdivide_impl(scheme, chain, rounds).map_err(|e| JsError::new(&e))
}

/// JSON array of the relative distortion at levels `0..=rounds`, as strings
/// so that `inf` survives.
#[wasm_bindgen]
pub fn kappa_decay(scheme: &str, chain: &str, rounds: usize) -> Result<String, JsError> {
    kappa_impl(scheme, chain, rounds).map_err(|e| JsError::new(&e))
}

/// Text report on the derivative at the standard chain.
#[wasm_bindgen]
pub fn companion(scheme: &str) -> Result<String, JsError> {
    companion_impl(scheme).map_err(|e| JsError::new(&e))
}
