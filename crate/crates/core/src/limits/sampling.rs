use std::fmt::Write as _;
use std::io::Write;

use super::generator::Generator;
use crate::chain::Chain;
use crate::error::{Error, Result};
use crate::schemes::GlueScheme;

/// Samples of `Φ^ℓ[P^ℓ, φ]` on `I_z`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledCurve {
    pub level: usize,
    pub t: Vec<f64>,
    pub points: Chain,
}

/// `I_z = [z, N - n + 1 - z]` for a chain of `len` points.
pub fn parameter_interval(len: usize, spread: usize, z: f64) -> Result<(f64, f64)> {
    if !(z > 0.0 && z.is_finite()) {
        return Err(Error::Domain(format!("z must be positive, got {z}")));
    }
    if len < spread {
        return Err(Error::Domain(format!("chain of length {len} is shorter than the spread {spread}")));
    }
    let end = (len + 1 - spread) as f64;
    if 2.0 * z >= end {
        return Err(Error::Domain(format!("z = {z} leaves an empty interval [z, {end} - z]")));
    }
    Ok((z, end - z))
}

/// Smallest `ℓ` with `2^-ℓ r ≤ z`.
pub fn min_level(generator: &dyn Generator, z: f64) -> usize {
    let mut level = 0;
    while generator.support() > z * (1u64 << level) as f64 && level < 63 {
        level += 1;
    }
    level
}

/// `Σ_j p_j φ(2^ℓ t - j)`.
pub fn eval_curve(p: &Chain, level: usize, generator: &dyn Generator, t: f64) -> Vec<f64> {
    let d = p.dim();
    let x = t * (1u64 << level) as f64;
    let r = generator.support();
    let lo = (x - r).ceil().max(0.0) as usize;
    let hi = ((x + r).floor() as i64).min(p.len() as i64 - 1);
    let mut out = vec![0.0; d];
    if hi < 0 {
        return out;
    }
    for j in lo..=hi as usize {
        let w = generator.eval(x - j as f64);
        if w != 0.0 {
            for (o, c) in out.iter_mut().zip(p.point(j)) {
                *o += w * c;
            }
        }
    }
    out
}

/// Subdivides `level` times and samples the curve at `grid` equispaced
/// parameters of `I_z`.
pub fn limit_samples(
    scheme: &GlueScheme,
    p: &Chain,
    level: usize,
    generator: &dyn Generator,
    z: f64,
    grid: usize,
) -> Result<SampledCurve> {
    let (a, b) = parameter_interval(p.len(), scheme.spread(), z)?;
    let needed = min_level(generator, z);
    if level < needed {
        return Err(Error::Domain(format!(
            "level {level} is too small for z = {z}: need at least {needed}"
        )));
    }
    if grid < 2 {
        return Err(Error::Domain("grid needs at least 2 samples".into()));
    }
    let q = scheme.subdivide_rounds(p, level)?;
    let t: Vec<f64> = (0..grid)
        .map(|i| a + (b - a) * i as f64 / (grid - 1) as f64)
        .collect();
    let coords = t
        .iter()
        .flat_map(|&ti| eval_curve(&q, level, generator, ti))
        .collect();
    Ok(SampledCurve {
        level,
        t,
        points: Chain::from_flat(p.dim(), coords)?,
    })
}

impl SampledCurve {
    /// Rows `t, x0, .., x{d-1}`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let d = self.points.dim();
        let mut header = vec!["t".to_string()];
        header.extend((0..d).map(|c| format!("x{c}")));
        w.write_record(&header).map_err(csv_error)?;
        for (t, p) in self.t.iter().zip(self.points.points()) {
            let mut row = vec![t.to_string()];
            row.extend(p.iter().map(f64::to_string));
            w.write_record(&row).map_err(csv_error)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Polyline of the first two coordinates.
    pub fn to_svg(&self, width: f64, height: f64) -> String {
        svg_polylines(&[&self.points], width, height)
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// SVG document drawing each chain as a polyline in the plane of its first
/// two coordinates, scaled uniformly to fit.
pub fn svg_polylines(chains: &[&Chain], width: f64, height: f64) -> String {
    let xy = |p: &[f64]| (p[0], p.get(1).copied().unwrap_or(0.0));
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for c in chains {
        for p in c.points() {
            let (x, y) = xy(p);
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
    }
    let margin = 10.0;
    let span = (x1 - x0).max(y1 - y0).max(1e-300);
    let scale = ((width - 2.0 * margin).min(height - 2.0 * margin) / span).max(0.0);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    const COLORS: [&str; 4] = ["#1f5fa8", "#c0392b", "#2e8b57", "#8e44ad"];
    for (k, c) in chains.iter().enumerate() {
        let pts: Vec<String> = c
            .points()
            .map(|p| {
                let (x, y) = xy(p);
                format!("{:.3},{:.3}", margin + (x - x0) * scale, height - margin - (y - y0) * scale)
            })
            .collect();
        let _ = writeln!(
            s,
            r#"  <polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
            COLORS[k % COLORS.len()],
            pts.join(" ")
        );
    }
    s.push_str("</svg>\n");
    s
}
