//! Command implementations shared by the `glue-cert` binary and tests.
//!
//! Each command returns an [`Outcome`] holding the text report and the exit
//! status; files are written only where an output path is given.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::certify::{
    certify_rate, check_chain, companion_exponents, regularity_verdict, tangent_normal, Certificate, DerivativePair,
    Level, SearchConfig,
};
use crate::chain::{kappa_chain, Chain};
use crate::error::{Error, Result};
use crate::limits::{empirical_holder, empirical_kappa_decay, limit_samples, BSpline, Generator, Hat};
use crate::schemes::registry::{bspline_tau, chaikin, four_point};
use crate::schemes::{difference_scheme, jsr_upper, refined_length, resolve, GlueScheme, MatrixPair};

/// Process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Error = 2,
    Inconclusive = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub status: ExitStatus,
    pub report: String,
}

impl Outcome {
    fn success(report: String) -> Self {
        Outcome {
            status: ExitStatus::Success,
            report,
        }
    }
}

/// Settings read from a TOML file; command-line flags override them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scheme: Option<String>,
    pub search: SearchConfig,
    /// Depth of the joint spectral radius bounds.
    pub jsr_depth: usize,
    /// Rounds allowed for `check`.
    pub max_rounds: usize,
    pub output: Option<PathBuf>,
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scheme: None,
            search: SearchConfig::default(),
            jsr_depth: 8,
            max_rounds: 10,
            output: None,
            threads: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let c: RunConfig = toml::from_str(s).map_err(|e| Error::Parse(format!("config: {e}")))?;
        c.validate()?;
        Ok(c)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.search.validate()?;
        if self.jsr_depth == 0 {
            return Err(Error::Domain("jsr_depth must be positive".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Domain("threads must be positive".into()));
        }
        Ok(())
    }
}

/// Sizes the global worker pool. Has no effect without the `parallel` feature.
pub fn configure_threads(threads: usize) -> Result<()> {
    if threads == 0 {
        return Err(Error::Domain("threads must be positive".into()));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
    Ok(())
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    if let Some(p) = path {
        std::fs::write(p, text)?;
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

pub fn cmd_subdivide(scheme: &GlueScheme, input: &Path, rounds: usize, output: Option<&Path>) -> Result<Outcome> {
    let p = Chain::read_json(input)?;
    scheme.check_dim(p.dim())?;
    let mut report = String::new();
    let _ = writeln!(report, "level 0: {} points", p.len());
    let mut q = p;
    for level in 1..=rounds {
        q = scheme.subdivide(&q)?;
        let _ = writeln!(report, "level {level}: {} points", q.len());
    }
    match output {
        Some(path) => q.write_json(path)?,
        None => report.push_str(&q.to_json_string()),
    }
    Ok(Outcome::success(report))
}

pub fn cmd_kappa(scheme: &GlueScheme, input: &Path, rounds: usize) -> Result<Outcome> {
    let p = Chain::read_json(input)?;
    scheme.check_dim(p.dim())?;
    let n = scheme.spread();
    let mut report = String::new();
    let mut q = p.clone();
    for level in 0..=rounds {
        let _ = writeln!(report, "kappa_{level} = {}", kappa_chain(&q, n)?);
        if level < rounds {
            q = scheme.subdivide(&q)?;
        }
    }
    if rounds >= 3 {
        match empirical_kappa_decay(scheme, &p, rounds) {
            Ok(k) if k.exact => report.push_str("decay: exact (distortion vanishes)\n"),
            Ok(k) => {
                let _ = writeln!(report, "decay rate over levels {}..={}: {:.4}", k.window.0, k.window.1, k.alpha);
            }
            Err(e) => {
                let _ = writeln!(report, "decay rate unavailable: {e}");
            }
        }
    }
    Ok(Outcome::success(report))
}

pub fn cmd_certify(scheme: &GlueScheme, config: &RunConfig, output: Option<&Path>) -> Result<Outcome> {
    config.validate()?;
    match certify_rate(scheme, &config.search)? {
        Ok(cert) => {
            let json = to_json(&cert)?;
            write_text(output, &json)?;
            let mut report = format!(
                "certified: Γ*_{}[{:e}] ≤ {} (α = {:.6}), γ = {:e}",
                cert.depth, cert.delta, cert.gamma_bound, cert.alpha, cert.gamma
            );
            if let Some(b) = cert.annulus_bound {
                let _ = write!(report, ", annulus bound {b} at depth {}", cert.annulus_depth);
            }
            let _ = writeln!(report, "; {} boxes", cert.boxes);
            if output.is_none() {
                report.push_str(&json);
            }
            Ok(Outcome::success(report))
        }
        Err(fail) => {
            let json = to_json(&fail)?;
            write_text(output, &json)?;
            let mut report = format!("inconclusive: {}\n", fail.message);
            if output.is_none() {
                report.push_str(&json);
            }
            Ok(Outcome {
                status: ExitStatus::Inconclusive,
                report,
            })
        }
    }
}

pub fn cmd_check(
    scheme: &GlueScheme,
    certificate: &Path,
    input: &Path,
    max_rounds: usize,
    output: Option<&Path>,
) -> Result<Outcome> {
    let cert = Certificate::from_json_str(&std::fs::read_to_string(certificate)?)?;
    let p = Chain::read_json(input)?;
    let verdict = check_chain(scheme, &cert, &p, max_rounds)?;
    let json = to_json(&verdict)?;
    write_text(output, &json)?;
    let status = if verdict.level.is_certified() {
        ExitStatus::Success
    } else {
        ExitStatus::Inconclusive
    };
    let mut report = match (&verdict.level, verdict.round) {
        (Level::C1Alpha { alpha }, Some(r)) => format!("certified C^{{1,{alpha:.6}}} at round {r}\n"),
        _ => format!("unknown after {max_rounds} rounds\n"),
    };
    if output.is_none() {
        report.push_str(&json);
    }
    Ok(Outcome { status, report })
}

/// Name of a known linear scheme with these matrices.
pub fn identify_linear(pair: &MatrixPair, tau: f64) -> Option<String> {
    let mut known = vec![
        ("Chaikin".to_string(), chaikin().matrices()),
        ("four-point".to_string(), four_point().matrices()),
    ];
    if let Ok(a) = bspline_tau(tau) {
        let name = if tau == 0.0 {
            "cubic B-spline A^0".to_string()
        } else if tau == 0.5 {
            "quartic B-spline A^{1/2}".to_string()
        } else {
            format!("A^{tau}")
        };
        known.push((name, a.matrices()));
    }
    known
        .into_iter()
        .find(|(_, m)| m.size() == pair.size() && m.max_abs_diff(pair) <= 1e-8)
        .map(|(name, _)| name)
}

fn write_matrix(report: &mut String, label: &str, m: &nalgebra::DMatrix<f64>) {
    let _ = writeln!(report, "{label} =");
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| format!("{:>9.5}", m[(r, c)])).collect();
        let _ = writeln!(report, "  [{}]", row.join(" "));
    }
}

fn jsr_table(report: &mut String, pair: &MatrixPair, depth: usize) -> Result<()> {
    let _ = writeln!(report, "{:>5} {:>14} {:>14} {:>14}", "ℓ", "ϱ_ℓ(A_2)", "ϱ_ℓ(A_3)", "ϱ_ℓ(A_4)");
    let diffs: Vec<Option<MatrixPair>> = (2..=4).map(|j| difference_scheme(pair, j).ok()).collect();
    for l in 1..=depth {
        let mut row = format!("{l:>5}");
        for d in &diffs {
            match d {
                Some(a) => {
                    let _ = write!(row, " {:>14.8}", jsr_upper(a, l)?);
                }
                None => {
                    let _ = write!(row, " {:>14}", "-");
                }
            }
        }
        let _ = writeln!(report, "{row}");
    }
    Ok(())
}

pub fn cmd_companion(scheme: &GlueScheme, dim: Option<usize>, jsr_depth: usize) -> Result<Outcome> {
    let d = dim.or(scheme.required_dim).unwrap_or(2);
    let pair: DerivativePair = tangent_normal(scheme, d)?;
    let mut report = String::new();
    write_matrix(&mut report, "A_0", &pair.a.m0);
    write_matrix(&mut report, "A_1", &pair.a.m1);
    if !pair.locally_linear {
        write_matrix(&mut report, "B_0", &pair.b.m0);
        write_matrix(&mut report, "B_1", &pair.b.m1);
    }
    if pair.locally_linear {
        let name = identify_linear(&pair.a, scheme.tau).unwrap_or_else(|| "unrecognized".into());
        let _ = writeln!(report, "locally linear; companion = {name}");
    } else {
        let _ = writeln!(report, "not locally linear (max |A - B| = {:e})", pair.deviation);
    }
    jsr_table(&mut report, &pair.a, jsr_depth)?;
    let ex = companion_exponents(&pair.a, jsr_depth)?;
    let verdict = regularity_verdict(scheme, None, &pair, jsr_depth)?;
    let _ = writeln!(report, "companion exponents: {}", serde_json::to_string(&ex)?);
    let _ = writeln!(report, "verdict without certificate: {}", serde_json::to_string(&verdict.level)?);
    Ok(Outcome::success(report))
}

pub fn cmd_jsr(scheme: &GlueScheme, order: usize, depth: usize) -> Result<Outcome> {
    let linear = scheme
        .as_linear()
        .ok_or_else(|| Error::Domain(format!("'{}' is not a linear scheme", scheme.id)))?;
    let a = difference_scheme(&linear.matrices(), order)?;
    let mut report = String::new();
    let mut best = f64::INFINITY;
    for l in 1..=depth {
        let r = jsr_upper(&a, l)?;
        best = best.min(r);
        let _ = writeln!(report, "ϱ_{l}(A_{order}) = {r:.12}");
    }
    let _ = writeln!(report, "min = {best:.12}");
    Ok(Outcome::success(report))
}

/// `hat` or `bspline:<degree>`.
pub fn parse_generator(name: &str) -> Result<Box<dyn Generator>> {
    if name == "hat" {
        return Ok(Box::new(Hat));
    }
    let degree = name
        .strip_prefix("bspline:")
        .and_then(|k| k.parse::<usize>().ok())
        .and_then(BSpline::new)
        .ok_or_else(|| Error::Parse(format!("unknown generator '{name}' (use hat or bspline:<degree>)")))?;
    Ok(Box::new(degree))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitFormat {
    Csv,
    Svg,
}

impl std::str::FromStr for LimitFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(LimitFormat::Csv),
            "svg" => Ok(LimitFormat::Svg),
            _ => Err(Error::Parse(format!("unknown format '{s}' (use csv or svg)"))),
        }
    }
}

#[derive(Clone)]
pub struct LimitArgs<'a> {
    pub level: usize,
    pub z: f64,
    pub grid: usize,
    pub generator: &'a dyn Generator,
    pub format: LimitFormat,
    pub holder: Option<usize>,
    pub output: Option<&'a Path>,
}

pub fn cmd_limit(scheme: &GlueScheme, input: &Path, args: &LimitArgs<'_>) -> Result<Outcome> {
    let p = Chain::read_json(input)?;
    scheme.check_dim(p.dim())?;
    let curve = limit_samples(scheme, &p, args.level, args.generator, args.z, args.grid)?;
    let body = match args.format {
        LimitFormat::Csv => {
            let mut buf = Vec::new();
            curve.write_csv(&mut buf)?;
            String::from_utf8(buf).expect("csv output is UTF-8")
        }
        LimitFormat::Svg => curve.to_svg(640.0, 480.0),
    };
    write_text(args.output, &body)?;
    let mut report = format!(
        "{} samples at level {} ({} control points)\n",
        curve.t.len(),
        args.level,
        refined_length(p.len(), scheme.spread(), args.level as u32)
    );
    if let Some(k) = args.holder {
        let h = empirical_holder(scheme, &p, k, args.level, args.z)?;
        if h.exact {
            let _ = writeln!(report, "holder order {k}: exact (modulus of continuity vanishes)");
        } else {
            let _ = writeln!(report, "holder order {k}: alpha = {:.4} (slope {:.4})", h.alpha, h.raw_slope);
        }
        for (hh, w) in &h.omega {
            let _ = writeln!(report, "  h = {hh:e}  omega = {w:e}");
        }
    }
    if args.output.is_none() {
        report.push_str(&body);
    }
    Ok(Outcome::success(report))
}

/// Resolves a scheme id and checks that it is given.
pub fn scheme_from(id: Option<&str>, config: &RunConfig) -> Result<GlueScheme> {
    let id = id
        .or(config.scheme.as_deref())
        .ok_or_else(|| Error::Domain("no scheme given".into()))?;
    resolve(id)
}
