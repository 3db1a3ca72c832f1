//! Command implementations behind the `elastic-shape` binary.
//!
//! Everything here is a thin layer: file ingestion and emission, option
//! plumbing into the alignment machinery, and report structures that render
//! both as text and as JSON. The binary itself only parses arguments.

pub mod bench;
pub mod io;
pub mod svg;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geo_path::geodesic_sweep;
use crate::homog::{DiscreteManifoldCurve, ManifoldPoint};
use crate::matgroup::group_log;
use crate::register::{
    align, align_mod_g, align_param, align_shape_mod_g, dp_reparametrize, flat_srvf,
    flat_srvf_inverse, AlignOptions, AlignmentResult, DpGrid, FlatSrv, KOptimizer,
};
use crate::srvf::{srvf_forward, Reparametrization};

pub use io::{emit, ingest, render, CurveData, Quotient, SpaceSpec};

/// Options shared by the distance/geodesic/baseline commands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub space: SpaceSpec,
    pub quotient: Quotient,
    /// None picks the space default (evaluation scan for one-dimensional K).
    pub k_opt: Option<KOptimizer>,
    pub dp_resolution: usize,
    pub frames: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub svg: bool,
}

impl RunConfig {
    pub fn new(space: SpaceSpec) -> Self {
        Self {
            space,
            quotient: Quotient::Shape,
            k_opt: None,
            dp_resolution: 100,
            frames: 10,
            seed: 0,
            out: None,
            svg: false,
        }
    }

    pub fn align_options(&self) -> AlignOptions {
        AlignOptions {
            k_opt: self.k_opt.unwrap_or(KOptimizer::Auto),
            dp_resolution: self.dp_resolution.max(2),
            ..Default::default()
        }
    }
}

fn quotient_label(q: Quotient) -> &'static str {
    match q {
        Quotient::Param => "param",
        Quotient::Shape => "shape",
        Quotient::ModG => "mod-g",
        Quotient::ShapeModG => "shape-mod-g",
    }
}

/// Result of the `dist` and `baseline` commands.
#[derive(Debug, Clone, Serialize)]
pub struct DistReport {
    pub space: String,
    pub quotient: String,
    pub distance: f64,
    /// Distance of the mirrored problem, when both directions were solved.
    pub distance_reverse: Option<f64>,
    /// Optimal isotropy element as a row-major matrix (curved spaces only).
    pub y_opt: Option<Vec<Vec<f64>>>,
    pub gamma_knots: Vec<(f64, f64)>,
    pub iterations: usize,
    pub converged: bool,
}

impl DistReport {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "space:      {}", self.space).unwrap();
        writeln!(out, "quotient:   {}", self.quotient).unwrap();
        writeln!(out, "distance:   {}", self.distance).unwrap();
        if let Some(rev) = self.distance_reverse {
            writeln!(out, "reverse:    {rev}").unwrap();
            writeln!(out, "asymmetry:  {:e}", (self.distance - rev).abs()).unwrap();
        }
        if let Some(y) = &self.y_opt {
            writeln!(out, "y_opt:").unwrap();
            for row in y {
                let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
                writeln!(out, "  [{}]", cells.join(", ")).unwrap();
            }
        }
        writeln!(out, "gamma knots ({}):", self.gamma_knots.len()).unwrap();
        for (s, g) in &self.gamma_knots {
            writeln!(out, "  {s} -> {g}").unwrap();
        }
        writeln!(out, "iterations: {}", self.iterations).unwrap();
        writeln!(out, "converged:  {}", self.converged).unwrap();
        out
    }
}

fn matrix_rows(m: &crate::matgroup::Matrix) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn report_from_alignment(
    cfg: &RunConfig,
    result: &AlignmentResult,
    reverse: Option<f64>,
) -> DistReport {
    DistReport {
        space: cfg.space.label(),
        quotient: quotient_label(cfg.quotient).into(),
        distance: result.distance,
        distance_reverse: reverse,
        y_opt: Some(matrix_rows(result.y_opt.matrix())),
        gamma_knots: result.gamma_opt.knots().to_vec(),
        iterations: result.iterations,
        converged: result.converged,
    }
}

/// Flat-space distance with the same quotient semantics as the curved case:
/// `param` keeps the start term, `mod-g` drops it (translations), the shape
/// variants add the reparametrization program.
fn flat_report(cfg: &RunConfig, c1: &[DVector<f64>], c2: &[DVector<f64>]) -> Result<DistReport> {
    let f1 = flat_srvf(c1)?;
    let f2 = flat_srvf(c2)?;
    let opts = cfg.align_options();
    let (use_gamma, include_start) = match cfg.quotient {
        Quotient::Param => (false, true),
        Quotient::Shape => (true, true),
        Quotient::ModG => (false, false),
        Quotient::ShapeModG => (true, false),
    };
    let (gamma, dq) = if use_gamma {
        let grid = DpGrid::new(opts.dp_resolution, opts.dp_max_step);
        dp_reparametrize(&f1.q, &f2.q, &grid)
    } else {
        (Reparametrization::identity(), f1.q.l2_dist(&f2.q)?)
    };
    let distance = if include_start {
        let ds = (&f1.start - &f2.start).norm();
        (ds * ds + dq * dq).sqrt()
    } else {
        dq
    };
    Ok(DistReport {
        space: cfg.space.label(),
        quotient: quotient_label(cfg.quotient).into(),
        distance,
        distance_reverse: None,
        y_opt: None,
        gamma_knots: gamma.knots().to_vec(),
        iterations: 1,
        converged: true,
    })
}

/// The `dist` command: distance between two curve files under the selected
/// quotient, with the optimizers' diagnostics.
pub fn cmd_dist(file1: &Path, file2: &Path, cfg: &RunConfig) -> Result<DistReport> {
    let d1 = ingest(file1, cfg.space)?;
    let d2 = ingest(file2, cfg.space)?;
    let report = match (&d1, &d2) {
        (CurveData::Planar(c1), CurveData::Planar(c2)) => flat_report(cfg, c1, c2)?,
        _ => {
            let space = cfg
                .space
                .homogeneous()
                .ok_or_else(|| Error::GroupMismatch("planar space with manifold data".into()))?;
            let b1 = d1.manifold()?;
            let b2 = d2.manifold()?;
            let opts = cfg.align_options();
            match cfg.quotient {
                Quotient::Param => {
                    let fwd = align_param(&space, b1, b2, &opts)?;
                    let bwd = align_param(&space, b2, b1, &opts)?;
                    let (best, other) = if bwd.distance < fwd.distance {
                        (bwd, fwd.distance)
                    } else {
                        (fwd, bwd.distance)
                    };
                    report_from_alignment(cfg, &best, Some(other))
                }
                Quotient::Shape => {
                    let result = align(&space, b1, b2, &opts)?;
                    report_from_alignment(cfg, &result, None)
                }
                Quotient::ModG => {
                    let fwd = align_mod_g(&space, b1, b2, &opts)?;
                    let bwd = align_mod_g(&space, b2, b1, &opts)?;
                    let (best, other) = if bwd.distance < fwd.distance {
                        (bwd, fwd.distance)
                    } else {
                        (fwd, bwd.distance)
                    };
                    report_from_alignment(cfg, &best, Some(other))
                }
                Quotient::ShapeModG => {
                    let result = align_shape_mod_g(&space, b1, b2, &opts)?;
                    report_from_alignment(cfg, &result, None)
                }
            }
        }
    };
    if let Some(out) = &cfg.out {
        std::fs::write(out, serde_json::to_string_pretty(&report)? + "\n")?;
    }
    Ok(report)
}

/// Result of the `geodesic` command.
#[derive(Debug, Serialize)]
pub struct GeodesicReport {
    pub space: String,
    pub distance: f64,
    pub iterations: usize,
    pub converged: bool,
    pub frame_files: Vec<PathBuf>,
    pub combined_file: PathBuf,
    pub svg_file: Option<PathBuf>,
}

#[derive(Serialize)]
struct CombinedSweep {
    space: String,
    distance: f64,
    y_opt: Option<Vec<Vec<f64>>>,
    gamma_knots: Vec<(f64, f64)>,
    /// One entry per frame; each sample is flattened coordinates
    /// (lat/lon, xy, or a row-major matrix depending on the space).
    frames: Vec<Vec<Vec<f64>>>,
}

fn frame_rows(frame: &DiscreteManifoldCurve, spec: SpaceSpec) -> Vec<Vec<f64>> {
    frame
        .samples()
        .iter()
        .map(|p| match (spec, p) {
            (SpaceSpec::Sphere(2), ManifoldPoint::Sphere(v)) => vec![
                v[2].clamp(-1.0, 1.0).asin().to_degrees(),
                v[1].atan2(v[0]).to_degrees(),
            ],
            (_, ManifoldPoint::Sphere(v)) => v.iter().copied().collect(),
            (SpaceSpec::H2, ManifoldPoint::Spd(m)) => {
                let (x, y) = io::spd_to_half_plane(m);
                vec![x, y]
            }
            (_, ManifoldPoint::Spd(m)) => m.transpose().as_slice().to_vec(),
        })
        .collect()
}

fn extension_for(spec: SpaceSpec) -> &'static str {
    match spec {
        SpaceSpec::Pdsm(_) => "json",
        _ => "csv",
    }
}

/// The `geodesic` command: aligns the curves in the shape quotient, walks
/// the product geodesic, and writes one curve file per frame plus a combined
/// JSON file; optionally an SVG rendering (or an ellipsoid-axes table for
/// 3x3 SPD spaces).
pub fn cmd_geodesic(file1: &Path, file2: &Path, cfg: &RunConfig) -> Result<GeodesicReport> {
    let d1 = ingest(file1, cfg.space)?;
    let d2 = ingest(file2, cfg.space)?;
    let prefix = cfg.out.clone().unwrap_or_else(|| PathBuf::from("sweep"));
    let prefix_str = prefix.display().to_string();
    let frames_requested = cfg.frames.max(1);

    // Euclidean sweeps interpolate the flat transform directly
    if let SpaceSpec::Euclidean(_) = cfg.space {
        return flat_geodesic(cfg, &prefix_str, d1.planar()?, d2.planar()?, frames_requested);
    }

    let space = cfg.space.homogeneous().expect("curved space");
    let b1 = d1.manifold()?;
    let b2 = d2.manifold()?;
    let opts = cfg.align_options();
    let sweep = geodesic_sweep(&space, b1, b2, frames_requested, &opts)?;

    let ext = extension_for(cfg.space);
    let mut frame_files = Vec::with_capacity(sweep.frames.len());
    for (j, frame) in sweep.frames.iter().enumerate() {
        let path = PathBuf::from(format!("{prefix_str}_f{j:02}.{ext}"));
        emit(&path, &CurveData::Manifold(frame.clone()), cfg.space)?;
        frame_files.push(path);
    }

    let combined = CombinedSweep {
        space: cfg.space.label(),
        distance: sweep.length,
        y_opt: Some(matrix_rows(sweep.alignment.y_opt.matrix())),
        gamma_knots: sweep.alignment.gamma_opt.knots().to_vec(),
        frames: sweep
            .frames
            .iter()
            .map(|f| frame_rows(f, cfg.space))
            .collect(),
    };
    let combined_file = PathBuf::from(format!("{prefix_str}_sweep.json"));
    std::fs::write(&combined_file, serde_json::to_string_pretty(&combined)? + "\n")?;

    let svg_file = if cfg.svg {
        Some(write_sweep_rendering(&prefix_str, cfg.space, &sweep.frames)?)
    } else {
        None
    };

    Ok(GeodesicReport {
        space: cfg.space.label(),
        distance: sweep.length,
        iterations: sweep.alignment.iterations,
        converged: sweep.alignment.converged,
        frame_files,
        combined_file,
        svg_file,
    })
}

fn write_sweep_rendering(
    prefix: &str,
    spec: SpaceSpec,
    frames: &[DiscreteManifoldCurve],
) -> Result<PathBuf> {
    match spec {
        SpaceSpec::Sphere(2) => {
            let path = PathBuf::from(format!("{prefix}.svg"));
            std::fs::write(&path, svg::sphere_sweep(frames)?)?;
            Ok(path)
        }
        SpaceSpec::H2 | SpaceSpec::Pdsm(2) => {
            let path = PathBuf::from(format!("{prefix}.svg"));
            std::fs::write(&path, svg::half_plane_sweep(frames)?)?;
            Ok(path)
        }
        SpaceSpec::Pdsm(3) => {
            // no faithful planar projection; tabulate the ellipsoids instead
            let path = PathBuf::from(format!("{prefix}_ellipsoids.csv"));
            std::fs::write(&path, svg::ellipsoid_axes_table(frames)?)?;
            Ok(path)
        }
        _ => Err(Error::GroupMismatch(format!(
            "no rendering for space {}",
            spec.label()
        ))),
    }
}

fn flat_geodesic(
    cfg: &RunConfig,
    prefix: &str,
    c1: &[DVector<f64>],
    c2: &[DVector<f64>],
    frames_requested: usize,
) -> Result<GeodesicReport> {
    let f1 = flat_srvf(c1)?;
    let f2 = flat_srvf(c2)?;
    let opts = cfg.align_options();
    let grid = DpGrid::new(opts.dp_resolution, opts.dp_max_step);
    let (gamma, _) = dp_reparametrize(&f1.q, &f2.q, &grid);
    let q2a = crate::srvf::gamma_act(&f2.q, &gamma)?;
    let dq = f1.q.l2_dist(&q2a)?;
    let ds = (&f1.start - &f2.start).norm();
    let distance = (ds * ds + dq * dq).sqrt();

    let mut frames = Vec::with_capacity(frames_requested + 1);
    for j in 0..=frames_requested {
        let s = j as f64 / frames_requested as f64;
        let q = f1.q.lerp(&q2a, s)?;
        let start = &f1.start * (1.0 - s) + &f2.start * s;
        frames.push(flat_srvf_inverse(&FlatSrv { start, q }));
    }

    let mut frame_files = Vec::with_capacity(frames.len());
    for (j, frame) in frames.iter().enumerate() {
        let path = PathBuf::from(format!("{prefix}_f{j:02}.csv"));
        emit(&path, &CurveData::Planar(frame.clone()), cfg.space)?;
        frame_files.push(path);
    }
    let combined = CombinedSweep {
        space: cfg.space.label(),
        distance,
        y_opt: None,
        gamma_knots: gamma.knots().to_vec(),
        frames: frames
            .iter()
            .map(|f| f.iter().map(|p| p.iter().copied().collect()).collect())
            .collect(),
    };
    let combined_file = PathBuf::from(format!("{prefix}_sweep.json"));
    std::fs::write(&combined_file, serde_json::to_string_pretty(&combined)? + "\n")?;
    let svg_file = if cfg.svg {
        let path = PathBuf::from(format!("{prefix}.svg"));
        std::fs::write(&path, svg::planar_sweep(&frames)?)?;
        Some(path)
    } else {
        None
    };
    Ok(GeodesicReport {
        space: cfg.space.label(),
        distance,
        iterations: 1,
        converged: true,
        frame_files,
        combined_file,
        svg_file,
    })
}

/// The `baseline` command: the flat comparison for planar data, regardless
/// of the curved interpretation other commands would use.
pub fn cmd_baseline(file1: &Path, file2: &Path, cfg: &RunConfig) -> Result<DistReport> {
    let spec = match cfg.space {
        SpaceSpec::Euclidean(n) => SpaceSpec::Euclidean(n),
        // baseline reads planar files; h2 data is already planar xy
        SpaceSpec::H2 => SpaceSpec::Euclidean(2),
        other => {
            return Err(Error::GroupMismatch(format!(
                "baseline expects planar data (r:<n> or h2), got {}",
                other.label()
            )))
        }
    };
    let c1 = ingest(file1, spec)?;
    let c2 = ingest(file2, spec)?;
    let mut flat_cfg = cfg.clone();
    flat_cfg.space = spec;
    let report = flat_report(&flat_cfg, c1.planar()?, c2.planar()?)?;
    if let Some(out) = &cfg.out {
        std::fs::write(out, serde_json::to_string_pretty(&report)? + "\n")?;
    }
    Ok(report)
}

/// Result of the `lift` command.
#[derive(Debug, Serialize)]
pub struct LiftReport {
    pub space: String,
    pub group_dim: usize,
    /// Row-major group matrices over the sample grid.
    pub samples: Vec<Vec<f64>>,
    pub max_projection_residual: f64,
    pub max_vertical_component: f64,
}

/// The `lift` command: horizontal lift of a curve file with its residual
/// diagnostics.
pub fn cmd_lift(file: &Path, cfg: &RunConfig) -> Result<LiftReport> {
    let space = cfg.space.homogeneous().ok_or_else(|| {
        Error::GroupMismatch("lift needs a curved space (s2, sn:<n>, h2 or pdsm:<n>)".into())
    })?;
    let data = ingest(file, cfg.space)?;
    let beta = data.manifold()?;
    let lift = space.lift(beta)?;

    let mut residual = 0.0f64;
    for (g, p) in lift.curve.samples().iter().zip(beta.samples()) {
        let projected = space.project_point(g)?;
        let gap = match (&projected, p) {
            (ManifoldPoint::Sphere(a), ManifoldPoint::Sphere(b)) => (a - b).norm(),
            (ManifoldPoint::Spd(a), ManifoldPoint::Spd(b)) => (a - b).norm(),
            _ => unreachable!(),
        };
        residual = residual.max(gap);
    }
    let mut vertical = 0.0f64;
    for w in lift.curve.samples().windows(2) {
        let inc = w[0].inverse().compose(&w[1])?;
        vertical = vertical.max(space.proj_k(&group_log(&inc)?).norm());
    }
    // the transform exists whenever the lift does; surface errors here
    let _ = srvf_forward(&lift.curve)?;

    let report = LiftReport {
        space: cfg.space.label(),
        group_dim: space.group_matrix_dim(),
        samples: lift
            .curve
            .samples()
            .iter()
            .map(|g| g.matrix().transpose().as_slice().to_vec())
            .collect(),
        max_projection_residual: residual,
        max_vertical_component: vertical,
    };
    if let Some(out) = &cfg.out {
        std::fs::write(out, serde_json::to_string_pretty(&report)? + "\n")?;
    }
    Ok(report)
}

/// Options of the `gen` command.
#[derive(Debug, Clone)]
pub struct GenConfig {
    pub space: SpaceSpec,
    pub samples: usize,
    pub knots: usize,
    pub noise: f64,
    pub seed: u64,
    pub out: PathBuf,
    /// Also write a reparametrized copy (same shape, different timing) next
    /// to the main file, for plant-and-recover experiments.
    pub pair: bool,
}

/// The `gen` command: writes a seeded synthetic curve (and optionally a
/// reparametrized partner).
pub fn cmd_gen(cfg: &GenConfig) -> Result<Vec<PathBuf>> {
    let mut rng = crate::synth::rng(cfg.seed);
    let samples = cfg.samples.max(2);
    let knots = cfg.knots.max(1);

    let mut written = vec![cfg.out.clone()];
    match cfg.space {
        SpaceSpec::Euclidean(n) => {
            let curve = crate::synth::random_euclidean_curve(&mut rng, n, samples);
            emit(&cfg.out, &CurveData::Planar(curve.clone()), cfg.space)?;
            if cfg.pair {
                let gamma = plant_gamma(&mut rng, samples, knots);
                let re: Vec<DVector<f64>> = (0..=samples)
                    .map(|i| {
                        let t = gamma.eval(i as f64 / samples as f64) * samples as f64;
                        let seg = (t.floor() as usize).min(samples - 1);
                        let local = t - seg as f64;
                        &curve[seg] * (1.0 - local) + &curve[seg + 1] * local
                    })
                    .collect();
                let path = pair_path(&cfg.out);
                emit(&path, &CurveData::Planar(re), cfg.space)?;
                written.push(path);
            }
        }
        _ => {
            let space = cfg.space.homogeneous().expect("curved space");
            let curve =
                crate::synth::random_manifold_curve(&mut rng, &space, samples, knots, cfg.noise);
            emit(&cfg.out, &CurveData::Manifold(curve.clone()), cfg.space)?;
            if cfg.pair {
                let gamma = plant_gamma(&mut rng, samples, knots);
                let re = crate::synth::reparametrize_curve(&space, &curve, &gamma);
                let path = pair_path(&cfg.out);
                emit(&path, &CurveData::Manifold(re), cfg.space)?;
                written.push(path);
            }
        }
    }
    Ok(written)
}

/// Reparametrizations for planted pairs stay aligned with the knot blocks
/// when possible, so that recovery is exact at matching DP resolution.
fn plant_gamma(rng: &mut rand::rngs::StdRng, samples: usize, knots: usize) -> Reparametrization {
    if samples.is_multiple_of(knots) && samples / knots >= 2 {
        crate::synth::block_lattice_gamma(rng, samples, knots, 3)
    } else {
        crate::synth::random_lattice_gamma(rng, samples, 3)
    }
}

fn pair_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "curve".into());
    let ext = out
        .extension()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_else(|| "csv".into());
    out.with_file_name(format!("{stem}_reparam.{ext}"))
}
