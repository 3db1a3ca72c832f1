//! Thin command-line front end; all behavior lives in the library.
//!
//! Exit codes: 0 on success, 1 on errors, 2 when an optimizer returned its
//! best iterate without meeting its convergence test.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use elastic_shape::cli::{
    bench, cmd_baseline, cmd_dist, cmd_gen, cmd_geodesic, cmd_lift, GenConfig, Quotient,
    RunConfig, SpaceSpec,
};
use elastic_shape::register::KOptimizer;

#[derive(Parser)]
#[command(
    name = "elastic-shape",
    about = "Elastic shape analysis of curves on spheres, SPD manifolds and flat space",
    version
)]
struct CliArgs {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Space: s2, sn:<n>, h2, pdsm:<n> or r:<n>
    #[arg(long)]
    space: String,
    /// Quotient: param, shape, mod-g or shape-mod-g
    #[arg(long, default_value = "shape")]
    quotient: String,
    /// K-optimizer: grad or eval (default: eval when K is one-dimensional)
    #[arg(long)]
    kopt: Option<String>,
    /// Lattice resolution of the reparametrization program
    #[arg(long = "dp-res", default_value_t = 100)]
    dp_res: usize,
    /// Random seed (where randomness is involved)
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write a JSON report (dist/baseline/lift) or use as output prefix
    /// (geodesic)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Horizontal lift of a curve file, with residual diagnostics
    Lift {
        file: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Distance between two curve files under the selected quotient
    Dist {
        file1: PathBuf,
        file2: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Geodesic between two curves: frame files, combined JSON, optional SVG
    Geodesic {
        file1: PathBuf,
        file2: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
        /// Number of geodesic steps (writes this many + 1 frames)
        #[arg(long, default_value_t = 10)]
        frames: usize,
        /// Also write an SVG rendering (an ellipsoid table for pdsm:3)
        #[arg(long, default_value_t = false)]
        svg: bool,
    },
    /// Classical flat-space comparison of planar curve files
    Baseline {
        file1: PathBuf,
        file2: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Timing table over random boundary value problems
    Bench {
        /// Problems per cell
        #[arg(long, default_value_t = 1225)]
        problems: usize,
        /// Comma-separated curve sizes
        #[arg(long, default_value = "100,300,500")]
        sizes: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Write the table as CSV
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a seeded synthetic curve (optionally with a reparametrized twin)
    Gen {
        /// Space: s2, sn:<n>, h2, pdsm:<n> or r:<n>
        #[arg(long)]
        space: String,
        /// Number of curve intervals (samples - 1)
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Geodesic arcs in the generated curve
        #[arg(long, default_value_t = 5)]
        knots: usize,
        /// Additive sample noise
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Also write <out>_reparam with a lattice reparametrization applied
        #[arg(long, default_value_t = false)]
        pair: bool,
    },
}

fn run_config(common: &CommonOpts) -> Result<RunConfig, elastic_shape::Error> {
    let space: SpaceSpec = common.space.parse()?;
    let quotient: Quotient = common.quotient.parse()?;
    let k_opt = match common.kopt.as_deref() {
        None => None,
        Some("grad") => Some(KOptimizer::Gradient),
        Some("eval") => Some(KOptimizer::Evaluation { steps: 360 }),
        Some(other) => {
            return Err(elastic_shape::Error::Parse {
                path: "--kopt".into(),
                line: 0,
                detail: format!("unknown optimizer {other:?}; expected grad or eval"),
            })
        }
    };
    let mut cfg = RunConfig::new(space);
    cfg.quotient = quotient;
    cfg.k_opt = k_opt;
    cfg.dp_resolution = common.dp_res;
    cfg.seed = common.seed;
    cfg.out = common.out.clone();
    Ok(cfg)
}

fn run(cli: CliArgs) -> Result<u8, elastic_shape::Error> {
    match cli.command {
        Command::Lift { file, common } => {
            let cfg = run_config(&common)?;
            let report = cmd_lift(&file, &cfg)?;
            println!("space:                {}", report.space);
            println!("samples:              {}", report.samples.len());
            println!("projection residual:  {:e}", report.max_projection_residual);
            println!("vertical component:   {:e}", report.max_vertical_component);
            Ok(0)
        }
        Command::Dist {
            file1,
            file2,
            common,
        } => {
            let cfg = run_config(&common)?;
            let report = cmd_dist(&file1, &file2, &cfg)?;
            print!("{}", report.render_text());
            Ok(if report.converged { 0 } else { 2 })
        }
        Command::Geodesic {
            file1,
            file2,
            common,
            frames,
            svg,
        } => {
            let mut cfg = run_config(&common)?;
            cfg.frames = frames;
            cfg.svg = svg;
            let report = cmd_geodesic(&file1, &file2, &cfg)?;
            println!("space:     {}", report.space);
            println!("distance:  {}", report.distance);
            println!("frames:    {}", report.frame_files.len());
            println!("combined:  {}", report.combined_file.display());
            if let Some(svg) = &report.svg_file {
                println!("rendering: {}", svg.display());
            }
            Ok(if report.converged { 0 } else { 2 })
        }
        Command::Baseline {
            file1,
            file2,
            common,
        } => {
            let cfg = run_config(&common)?;
            let report = cmd_baseline(&file1, &file2, &cfg)?;
            print!("{}", report.render_text());
            Ok(if report.converged { 0 } else { 2 })
        }
        Command::Bench {
            problems,
            sizes,
            seed,
            out,
        } => {
            let sizes: Result<Vec<usize>, _> = sizes.split(',').map(|s| s.trim().parse()).collect();
            let sizes = sizes.map_err(|_| elastic_shape::Error::Parse {
                path: "--sizes".into(),
                line: 0,
                detail: "expected comma-separated integers".into(),
            })?;
            let cfg = bench::BenchConfig {
                problems,
                sizes,
                seed,
            };
            let rows = bench::run(&cfg)?;
            print!("{}", bench::to_table(&rows));
            if let Some(path) = out {
                std::fs::write(path, bench::to_csv(&rows))?;
            }
            Ok(0)
        }
        Command::Gen {
            space,
            samples,
            knots,
            noise,
            seed,
            out,
            pair,
        } => {
            let cfg = GenConfig {
                space: space.parse()?,
                samples,
                knots,
                noise,
                seed,
                out,
                pair,
            };
            for path in cmd_gen(&cfg)? {
                println!("wrote {}", path.display());
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = CliArgs::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}
