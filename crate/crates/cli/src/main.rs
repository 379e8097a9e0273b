use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use glue_core::commands::{
    cmd_certify, cmd_check, cmd_companion, cmd_jsr, cmd_kappa, cmd_limit, cmd_subdivide, configure_threads,
    parse_generator, scheme_from, ExitStatus, LimitArgs, LimitFormat, Outcome, RunConfig,
};
use glue_core::error::Result;

#[derive(Parser)]
#[command(name = "glue-cert", version, about = "Subdivide chains and certify the regularity of GLUE subdivision limits")]
struct Cli {
    /// Worker threads for certification.
    #[arg(long, global = true, env = "GLUE_CERT_THREADS")]
    threads: Option<usize>,
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SchemeArg {
    /// chaikin, fps, cps2d, spoiler, bspline_tau:<tau>, or a linear scheme JSON file.
    #[arg(long, short)]
    scheme: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Apply the scheme a number of times.
    Subdivide {
        #[command(flatten)]
        scheme: SchemeArg,
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long, short, default_value_t = 1)]
        rounds: usize,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Relative distortion of each refinement level.
    Kappa {
        #[command(flatten)]
        scheme: SchemeArg,
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long, short, default_value_t = 8)]
        rounds: usize,
    },
    /// Search a straightening certificate for the scheme.
    Certify {
        #[command(flatten)]
        scheme: SchemeArg,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        depth_max: Option<usize>,
        #[arg(long)]
        annulus_depth_max: Option<usize>,
        /// Candidate inner radii, comma separated.
        #[arg(long, value_delimiter = ',')]
        delta: Option<Vec<f64>>,
        /// Total box budget.
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long)]
        query_budget: Option<usize>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Check a chain against a certificate.
    Check {
        #[command(flatten)]
        scheme: SchemeArg,
        #[arg(long, short)]
        certificate: PathBuf,
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long)]
        max_rounds: Option<usize>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Derivative at the standard chain and its linear companion.
    Companion {
        #[command(flatten)]
        scheme: SchemeArg,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        jsr_depth: Option<usize>,
    },
    /// Sample the limit curve.
    Limit {
        #[command(flatten)]
        scheme: SchemeArg,
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long, short, default_value_t = 10)]
        level: usize,
        /// Distance of the parameter interval from the chain ends.
        #[arg(long, default_value_t = 1.0)]
        z: f64,
        #[arg(long, default_value_t = 200)]
        grid: usize,
        /// hat or bspline:<degree>.
        #[arg(long, default_value = "hat")]
        generator: String,
        #[arg(long, default_value = "csv")]
        format: LimitFormat,
        /// Also estimate the Hölder exponent of this derivative order.
        #[arg(long)]
        holder: Option<usize>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Joint spectral radius bounds of a difference scheme.
    Jsr {
        #[command(flatten)]
        scheme: SchemeArg,
        #[arg(long, default_value_t = 2)]
        order: usize,
        #[arg(long, default_value_t = 8)]
        depth: usize,
    },
}

fn run(cli: Cli) -> Result<Outcome> {
    let mut config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(t) = cli.threads.or(config.threads) {
        configure_threads(t)?;
        config.threads = Some(t);
    }
    let out = |o: &Option<PathBuf>| o.clone().or_else(|| config.output.clone());
    match cli.command {
        Command::Subdivide {
            scheme,
            input,
            rounds,
            output,
        } => {
            let s = scheme_from(scheme.scheme.as_deref(), &config)?;
            cmd_subdivide(&s, &input, rounds, out(&output).as_deref())
        }
        Command::Kappa { scheme, input, rounds } => {
            let s = scheme_from(scheme.scheme.as_deref(), &config)?;
            cmd_kappa(&s, &input, rounds)
        }
        Command::Certify {
            scheme,
            dim,
            depth_max,
            annulus_depth_max,
            delta,
            budget,
            query_budget,
            output,
        } => {
            let s = scheme_from(scheme.scheme.as_deref(), &config)?;
            let output = out(&output);
            let search = &mut config.search;
            search.dim = dim.or(search.dim);
            search.depth_max = depth_max.unwrap_or(search.depth_max);
            search.annulus_depth_max = annulus_depth_max.unwrap_or(search.annulus_depth_max);
            if let Some(d) = delta {
                search.delta_grid = d;
            }
            search.budget = budget.unwrap_or(search.budget);
            search.query_budget = query_budget.unwrap_or(search.query_budget);
            cmd_certify(&s, &config, output.as_deref())
        }
        Command::Check {
            scheme,
            certificate,
            input,
            max_rounds,
            output,
        } => {
            let s = scheme_from(scheme.scheme.as_deref(), &config)?;
            let rounds = max_rounds.unwrap_or(config.max_rounds);
            cmd_check(&s, &certificate, &input, rounds, out(&output).as_deref())
        }
        Command::Companion { scheme, dim, jsr_depth } => {
            let s = scheme_from(scheme.scheme.as_deref(), &config)?;
            cmd_companion(&s, dim.or(config.search.dim), jsr_depth.unwrap_or(config.jsr_depth))
        }
        Command::Limit {
            scheme,
            input,
            level,
            z,
            grid,
            generator,
            format,
            holder,
            output,
        } => {
            let s = scheme_from(scheme.scheme.as_deref(), &config)?;
            let generator = parse_generator(&generator)?;
            let output = out(&output);
            let args = LimitArgs {
                level,
                z,
                grid,
                generator: generator.as_ref(),
                format,
                holder,
                output: output.as_deref().map(Path::new),
            };
            cmd_limit(&s, &input, &args)
        }
        Command::Jsr { scheme, order, depth } => {
            let s = scheme_from(scheme.scheme.as_deref(), &config)?;
            cmd_jsr(&s, order, depth)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => {
            print!("{}", outcome.report);
            ExitCode::from(outcome.status.code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(ExitStatus::Error.code() as u8)
        }
    }
}
