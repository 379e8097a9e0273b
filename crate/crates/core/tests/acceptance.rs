//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use glue_core::certify::{tangent_normal, Certificate};
use glue_core::chain::{apply_similarity, diff, kappa, kappa_chain, m_matrices, project_linear, row_sum_norm, seminorm};
use glue_core::commands::{cmd_certify, cmd_check, ExitStatus, RunConfig};
use glue_core::limits::{empirical_holder, empirical_kappa_decay};
use glue_core::schemes::registry::{bspline_tau, four_point};
use glue_core::schemes::{builtin, difference_matrix, difference_scheme, jsr_upper, max_difference_order};
use glue_core::{Chain, GlueScheme, Similarity};
use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Check = Result<String, String>;

struct Report {
    failures: usize,
}

impl Report {
    fn run(&mut self, id: usize, name: &str, limit: Duration, f: impl FnOnce() -> Check) {
        let start = Instant::now();
        let out = f();
        let t = start.elapsed();
        let (ok, detail) = match out {
            Ok(d) if t <= limit => (true, d),
            Ok(d) => (false, format!("{d}; took {t:.2?}, limit {limit:?}")),
            Err(e) => (false, e),
        };
        if !ok {
            self.failures += 1;
        }
        println!(
            "criterion {id:>2} {} {name}: {detail} [{t:.2?}]",
            if ok { "PASS" } else { "FAIL" }
        );
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_chain(rng: &mut StdRng, len: usize, dim: usize, spread: f64) -> Chain {
    let pts: Vec<Vec<f64>> = (0..len)
        .map(|_| (0..dim).map(|_| rng.gen_range(-spread..spread)).collect())
        .collect();
    Chain::new(dim, &pts).unwrap()
}

/// `d - Πd` for a random `d`.
fn random_nonlinear(rng: &mut StdRng, n: usize, dim: usize) -> Chain {
    let p = random_chain(rng, n, dim, 1.0);
    p.sub(&project_linear(&p).unwrap()).unwrap()
}

fn random_orthogonal(rng: &mut StdRng, dim: usize) -> Vec<f64> {
    let m = DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0));
    let q = m.qr().q();
    (0..dim * dim).map(|k| q[(k / dim, k % dim)]).collect()
}

fn random_similarity(rng: &mut StdRng, dim: usize) -> Similarity {
    let scale = 10f64.powf(rng.gen_range(-3.0..3.0));
    // a shift of T loses log10(T / scale) digits of the input before κ is computed
    let shift = (0..dim).map(|_| scale * rng.gen_range(-100.0..100.0)).collect();
    Similarity::new(scale, random_orthogonal(rng, dim), shift).unwrap()
}

fn coordinate(p: &Chain, c: usize) -> Vec<f64> {
    p.points().map(|x| x[c]).collect()
}

fn criterion_1() -> Check {
    let mut worst = 0.0f64;
    for n in 3..=15 {
        let (m1, m2) = m_matrices(n).map_err(|e| e.to_string())?;
        let e1 = (row_sum_norm(&m1) - (n as f64 - 1.0) / 2.0).abs();
        let e2 = (row_sum_norm(&m2) - (n as f64 - 2.0) / 2.0).abs();
        worst = worst.max(e1).max(e2);
    }
    ensure(worst <= 1e-12, || format!("max error {worst:e}"))?;
    Ok(format!("n = 3..15, max error {worst:.1e}"))
}

fn criterion_2() -> Check {
    let mut rng = StdRng::seed_from_u64(2);
    let mut residual = 0.0f64;
    let mut equinorm_slack = f64::INFINITY;
    for k in 0..1000 {
        let n = 3 + k % 13;
        let dim = 1 + k % 3;
        let d = random_nonlinear(&mut rng, n, dim);
        let (m1, m2) = m_matrices(n).unwrap();
        let d1 = diff(&d, 1).unwrap();
        let d2 = diff(&d, 2).unwrap();
        for c in 0..dim {
            let x = nalgebra::DVector::from_vec(coordinate(&d, c));
            let x1 = nalgebra::DVector::from_vec(coordinate(&d1, c));
            let x2 = nalgebra::DVector::from_vec(coordinate(&d2, c));
            residual = residual.max((&m1 * &x1 - &x).amax()).max((&m2 * &x2 - &x1).amax());
        }
        let m = (n as f64 - 1.0) / 2.0;
        let s: Vec<f64> = (0..3).map(|j| seminorm(&d, j).unwrap()).collect();
        for (i, j) in [(0, 1), (1, 1), (0, 2)] {
            let rhs = m.powi(j as i32) * s[i + j];
            equinorm_slack = equinorm_slack.min(rhs - s[i] + 1e-12 * rhs);
        }
    }
    ensure(residual <= 1e-12, || format!("identity residual {residual:e}"))?;
    ensure(equinorm_slack >= 0.0, || format!("equinorm violated by {:e}", -equinorm_slack))?;
    Ok(format!("1000 samples, residual {residual:.1e}, equinorm holds"))
}

fn criterion_3() -> Check {
    let mut rng = StdRng::seed_from_u64(3);
    let mut worst_rel = 0.0f64;
    let mut worst_pi = 0.0f64;
    for k in 0..10_000 {
        let n = 3 + k % 9;
        let dim = 1 + k % 3;
        let p = random_chain(&mut rng, n, dim, 1.0);
        let s = random_similarity(&mut rng, dim);
        let q = apply_similarity(&s, &p).unwrap();
        match (kappa(&p).finite(), kappa(&q).finite()) {
            (Some(a), Some(b)) => {
                let rel = (a - b).abs() / a.max(1e-300);
                worst_rel = worst_rel.max(rel);
            }
            (None, None) => {}
            _ => return Err(format!("finiteness of κ changed under a similarity (sample {k})")),
        }
        let ratio = project_linear(&p).unwrap().max_norm() / (p.max_norm() * (n as f64).sqrt());
        worst_pi = worst_pi.max(ratio);
    }
    ensure(worst_rel <= 1e-9, || format!("relative error {worst_rel:e}"))?;
    ensure(worst_pi <= 1.0 + 1e-12, || format!("|Πp|_0 / (√n |p|_0) reached {worst_pi}"))?;
    Ok(format!("10⁴ pairs, κ rel. error {worst_rel:.1e}, max |Πp|_0/(√n|p|_0) = {worst_pi:.3}"))
}

fn all_builtins() -> Vec<GlueScheme> {
    ["chaikin", "fps", "cps2d", "spoiler", "bspline_tau:0", "bspline_tau:0.25", "bspline_tau:0.5"]
        .iter()
        .map(|id| builtin(id).unwrap())
        .collect()
}

fn criterion_4() -> Check {
    let mut worst = 0.0f64;
    for s in all_builtins() {
        let n = s.spread();
        let m = s.m as f64;
        for dim in [2, 3] {
            if s.check_dim(dim).is_err() {
                continue;
            }
            let e = Chain::standard(n, dim);
            let out = s.subdivide(&e).map_err(|e| e.to_string())?;
            for (i, pt) in out.points().enumerate() {
                for (c, x) in pt.iter().enumerate() {
                    let want = if c == 0 { ((i + 1) as f64 + m + s.tau) / 2.0 } else { 0.0 };
                    worst = worst.max((x - want).abs());
                }
            }
        }
    }
    ensure(worst <= 1e-10, || format!("max deviation {worst:e}"))?;
    Ok(format!("7 schemes, max deviation {worst:.1e}"))
}

fn circle_point(c: [f64; 2], r: f64, t: f64) -> Vec<f64> {
    vec![c[0] + r * t.cos(), c[1] + r * t.sin()]
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn criterion_5() -> Check {
    let s = builtin("cps2d").unwrap();
    let mut rng = StdRng::seed_from_u64(5);
    let mut worst_circle = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for _ in 0..20 {
        let c = [rng.gen_range(-10.0..10.0), rng.gen_range(-10.0..10.0)];
        let r = 10f64.powf(rng.gen_range(-2.0..2.0));
        let len = rng.gen_range(7..12);
        let start = rng.gen_range(0.0..2.0 * PI);
        let mut t: Vec<f64> = (0..len).map(|_| rng.gen_range(0.2..1.0)).collect();
        let total: f64 = t.iter().sum();
        let span = rng.gen_range(0.5..1.9) * PI;
        let mut acc = start;
        for x in &mut t {
            acc += *x / total * span;
            *x = acc;
        }
        let pts: Vec<Vec<f64>> = t.iter().map(|&a| circle_point(c, r, a)).collect();
        let mut p = Chain::new(2, &pts).unwrap();
        for _ in 0..3 {
            let q = s.subdivide(&p).map_err(|e| e.to_string())?;
            for pt in q.points() {
                worst_circle = worst_circle.max((dist(pt, &c) - r).abs() / r.max(1.0));
            }
            // q[2k + 1] is inserted between p[k + 1] and p[k + 2]
            for k in 0..p.len() - 3 {
                let (a, b, cc, d) = (p.point(k), p.point(k + 1), p.point(k + 2), p.point(k + 3));
                let x = q.point(2 * k + 1);
                let lhs = dist(b, x) / dist(cc, x);
                let rhs = (dist(a, cc) / dist(b, d)).sqrt();
                worst_ratio = worst_ratio.max((lhs - rhs).abs() / rhs);
            }
            p = q;
        }
    }
    ensure(worst_circle <= 1e-9, || format!("distance to circle {worst_circle:e}"))?;
    ensure(worst_ratio <= 1e-9, || format!("ratio locus error {worst_ratio:e}"))?;
    Ok(format!("20 circles, distance {worst_circle:.1e}, ratio error {worst_ratio:.1e}"))
}

fn criterion_6() -> Check {
    let mut worst = 0.0f64;
    let mut worst_exp = 0.0f64;
    for tau in [0.1, 0.25, 0.5, 0.75] {
        let a = bspline_tau(tau).unwrap().matrices();
        let a4 = difference_scheme(&a, 4).map_err(|e| e.to_string())?;
        let rho = jsr_upper(&a4, 1).unwrap();
        let want = f64::max(tau, 1.0 - tau) / 8.0;
        worst = worst.max((rho - want).abs());
        let exponent = -rho.log2() - 3.0;
        worst_exp = worst_exp.max((exponent + f64::max(tau, 1.0 - tau).log2()).abs());
    }
    ensure(worst <= 1e-12, || format!("ϱ₁ error {worst:e}"))?;
    ensure(worst_exp <= 1e-12, || format!("exponent error {worst_exp:e}"))?;
    Ok(format!("ϱ₁ error {worst:.1e}, exponent error {worst_exp:.1e}"))
}

fn criterion_7() -> Check {
    let cps = tangent_normal(&builtin("cps2d").unwrap(), 2).map_err(|e| e.to_string())?;
    ensure(cps.locally_linear, || "cps2d is not locally linear".into())?;
    let fps = four_point().matrices();
    let dev_cps = cps.a.max_abs_diff(&fps).max(cps.b.max_abs_diff(&fps));
    ensure(dev_cps <= 1e-8, || format!("cps2d deviates from four-point by {dev_cps:e}"))?;
    // the interpolating rows are unit vectors, the inserting rows carry -1/16, 9/16
    for m in [&fps.m0, &fps.m1] {
        for x in m.iter() {
            let ok = [0.0, 1.0, -1.0 / 16.0, 9.0 / 16.0].contains(x);
            ensure(ok, || format!("unexpected four-point entry {x}"))?;
        }
    }
    let spoiler = tangent_normal(&builtin("spoiler").unwrap(), 2).map_err(|e| e.to_string())?;
    let a_half = bspline_tau(0.5).unwrap().matrices();
    let dev_sp = spoiler.a.max_abs_diff(&a_half);
    ensure(dev_sp <= 1e-8, || format!("spoiler deviates from A^(1/2) by {dev_sp:e}"))?;
    Ok(format!("cps2d deviation {dev_cps:.1e}, spoiler deviation {dev_sp:.1e}"))
}

/// Largest `κ_depth(e + Ku) / |u|_0` over random `u` with `lo ≤ |u|_0 ≤ hi`.
fn sample_ratio(s: &GlueScheme, dim: usize, depth: usize, lo: f64, hi: f64, samples: usize, seed: u64) -> f64 {
    let mut rng = StdRng::seed_from_u64(seed);
    let n = s.spread();
    let e = Chain::standard(n, dim);
    let (m1, m2) = m_matrices(n).unwrap();
    let k = m1 * m2;
    let mut worst = 0.0f64;
    let mut taken = 0;
    while taken < samples {
        let mut u: Vec<Vec<f64>> = (0..n - 2)
            .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let norm = u.iter().map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt()).fold(0.0, f64::max);
        if norm == 0.0 {
            continue;
        }
        // half the samples on the outer sphere, the rest spread log-uniformly
        let r = if taken % 2 == 0 {
            hi
        } else {
            let l = lo.max(hi * 1e-6);
            (l.ln() + rng.gen::<f64>() * (hi.ln() - l.ln())).exp()
        };
        for v in &mut u {
            for x in v.iter_mut() {
                *x *= r / norm;
            }
        }
        let pts: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..dim)
                    .map(|c| e.point(i)[c] + (0..n - 2).map(|j| k[(i, j)] * u[j][c]).sum::<f64>())
                    .collect()
            })
            .collect();
        let q = Chain::new(dim, &pts).unwrap();
        let size = seminorm(&q, 2).unwrap();
        if size < lo {
            continue;
        }
        taken += 1;
        let refined = s.subdivide_rounds(&q, depth).unwrap();
        let kap = kappa_chain(&refined, n).unwrap().finite().unwrap_or(f64::INFINITY);
        worst = worst.max(kap / size);
    }
    worst
}

fn soundness(s: &GlueScheme, cert: &Certificate) -> Result<String, String> {
    let inner = sample_ratio(s, cert.dim, cert.depth, 0.0, cert.delta, 10_000, 8);
    ensure(inner <= cert.gamma_bound, || {
        format!("{}: sampled κ_ℓ/|d|₂ = {inner} exceeds Γ = {}", s.id, cert.gamma_bound)
    })?;
    let mut line = format!("{} {inner:.3} ≤ {:.3}", s.id, cert.gamma_bound);
    if let Some(b) = cert.annulus_bound {
        let outer = sample_ratio(s, cert.dim, cert.annulus_depth, cert.delta, cert.gamma, 10_000, 9);
        ensure(outer <= b, || {
            format!("{}: sampled annulus ratio {outer} exceeds {b}", s.id)
        })?;
        line += &format!(", annulus {outer:.3} ≤ {b:.3}");
    }
    Ok(line)
}

fn certify(id: &str, config: &RunConfig) -> Result<Certificate, String> {
    let s = builtin(id).unwrap();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("cert.json");
    let out = cmd_certify(&s, config, Some(&path)).map_err(|e| e.to_string())?;
    if out.status != ExitStatus::Success {
        return Err(format!("{id}: {}", out.report.lines().next().unwrap_or("")));
    }
    Certificate::from_json_str(&std::fs::read_to_string(&path).map_err(|e| e.to_string())?).map_err(|e| e.to_string())
}

fn criterion_8(cps: &Result<Certificate, String>) -> Check {
    let mut lines = Vec::new();
    for id in ["chaikin", "fps", "spoiler", "bspline_tau:0", "bspline_tau:0.5"] {
        let cert = certify(id, &RunConfig::default())?;
        lines.push(soundness(&builtin(id).unwrap(), &cert)?);
    }
    let cert = cps.as_ref().map_err(|e| format!("no cps2d certificate: {e}"))?;
    lines.push(soundness(&builtin("cps2d").unwrap(), cert)?);
    Ok(lines.join("; "))
}

fn heptagon() -> Chain {
    let pts: Vec<Vec<f64>> = (0..7)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / 7.0;
            vec![t.cos(), t.sin()]
        })
        .collect();
    Chain::new(2, &pts).unwrap()
}

fn criterion_9(cps: &Result<Certificate, String>) -> Check {
    let cert = cps.as_ref()?;
    ensure(cert.gamma_bound < 1.0 && cert.alpha > 0.0, || "certificate out of range".into())?;
    ensure(cert.boxes <= 1_000_000, || format!("{} boxes", cert.boxes))?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cert_path = dir.path().join("cps.json");
    let chain_path = dir.path().join("heptagon.json");
    std::fs::write(&cert_path, serde_json::to_string(cert).unwrap()).unwrap();
    heptagon().write_json(&chain_path).unwrap();
    let s = builtin("cps2d").unwrap();
    let out = cmd_check(&s, &cert_path, &chain_path, 10, None).map_err(|e| e.to_string())?;
    ensure(out.status == ExitStatus::Success, || {
        format!("heptagon not certified: {}", out.report.lines().next().unwrap_or(""))
    })?;
    Ok(format!(
        "Γ*_{}[{:e}] ≤ {:.4}, α = {:.4}, γ = {:.3e}, {} boxes, {:.1} s; heptagon {}",
        cert.depth,
        cert.delta,
        cert.gamma_bound,
        cert.alpha,
        cert.gamma,
        cert.boxes,
        cert.wall_time_s,
        out.report.lines().next().unwrap_or("").trim()
    ))
}

fn perturbed_line(rng: &mut StdRng, len: usize, noise: f64) -> Chain {
    let pts: Vec<Vec<f64>> = (0..len)
        .map(|i| vec![i as f64 + rng.gen_range(-noise..noise), rng.gen_range(-noise..noise)])
        .collect();
    Chain::new(2, &pts).unwrap()
}

fn criterion_10() -> Check {
    let mut rng = StdRng::seed_from_u64(10);
    let mut lines = Vec::new();
    for id in ["bspline_tau:0.5", "chaikin"] {
        let cert = certify(id, &RunConfig::default())?;
        let s = builtin(id).unwrap();
        let mut lowest = f64::INFINITY;
        for _ in 0..10 {
            let p = perturbed_line(&mut rng, 10, 0.4);
            let k = empirical_kappa_decay(&s, &p, 12).map_err(|e| e.to_string())?;
            lowest = lowest.min(k.alpha);
        }
        ensure(lowest >= cert.alpha - 0.1, || {
            format!("{id}: empirical {lowest:.4} < certified {:.4} - 0.1", cert.alpha)
        })?;
        lines.push(format!("{id} empirical {lowest:.3} vs certified {:.3}", cert.alpha));
    }
    let cubic = builtin("bspline_tau:0").unwrap();
    let p = perturbed_line(&mut rng, 12, 0.4);
    let h = empirical_holder(&cubic, &p, 2, 14, 1.0).map_err(|e| e.to_string())?;
    ensure((0.85..=1.0).contains(&h.alpha), || format!("cubic second-order α̂ = {}", h.alpha))?;
    lines.push(format!("cubic B-spline second-order α̂ = {:.3}", h.alpha));
    Ok(lines.join("; "))
}

fn criterion_11() -> Check {
    let mut rng = StdRng::seed_from_u64(11);
    let mut worst = 0.0f64;
    let mut checked = 0;
    for id in ["chaikin", "fps", "bspline_tau:0", "bspline_tau:0.25", "bspline_tau:0.5", "bspline_tau:0.75"] {
        let s = builtin(id).unwrap();
        let a = s.as_linear().unwrap().matrices();
        let n = s.spread();
        for j in 1..=max_difference_order(&a) {
            let aj = difference_scheme(&a, j).map_err(|e| e.to_string())?;
            let dj = difference_matrix(n, j);
            for _ in 0..100 {
                let p = random_chain(&mut rng, n + 4, 2, 1.0);
                let q = s.subdivide(&p).unwrap();
                for i in 0..=p.len() - n {
                    for lambda in 0..2u8 {
                        let o = 2 * i + lambda as usize;
                        if o + n > q.len() {
                            continue;
                        }
                        for c in 0..2 {
                            let w = nalgebra::DVector::from_vec(coordinate(&p.window(i, n).unwrap(), c));
                            let v = nalgebra::DVector::from_vec(coordinate(&q.window(o, n).unwrap(), c));
                            let r = (&dj * v - aj.get(lambda) * (&dj * w)).amax();
                            worst = worst.max(r);
                        }
                    }
                }
                checked += 1;
            }
        }
    }
    ensure(worst <= 1e-10, || format!("residual {worst:e}"))?;
    Ok(format!("{checked} chain/order pairs, residual {worst:.1e}"))
}

fn main() {
    let mut report = Report { failures: 0 };
    report.run(1, "M-matrix norms", Duration::from_secs(1), criterion_1);
    report.run(2, "identity suite", Duration::from_secs(5), criterion_2);
    report.run(3, "κ similarity invariance", Duration::from_secs(10), criterion_3);
    report.run(4, "property (E)", Duration::from_secs(1), criterion_4);
    report.run(5, "CPS circle preservation", Duration::from_secs(10), criterion_5);
    report.run(6, "ϱ₁ of A^τ_4", Duration::from_secs(1), criterion_6);
    report.run(7, "companion detection", Duration::from_secs(5), criterion_7);

    let start = Instant::now();
    let cps = certify("cps2d", &RunConfig::default());
    let cps_time = start.elapsed();
    report.run(9, "end-to-end CPS", Duration::from_secs(600).saturating_sub(cps_time), || {
        criterion_9(&cps)
    });
    report.run(8, "certification soundness", Duration::from_secs(120), || criterion_8(&cps));
    report.run(10, "empirical consistency", Duration::from_secs(120), criterion_10);
    report.run(11, "difference schemes", Duration::from_secs(5), criterion_11);

    if report.failures > 0 {
        println!("{} criteria failed", report.failures);
        std::process::exit(1);
    }
    println!("all criteria passed");
}
