//! Timing harness: solves batches of random geodesic boundary value problems
//! on each supported space and reports mean wall-clock seconds per solve.

use std::fmt::Write as _;
use std::time::Instant;

use crate::error::Result;
use crate::homog::HomogeneousSpace;
use crate::register::{align, flat_distance, AlignOptions, KOptimizer};
use crate::synth;

#[derive(Debug, Clone)]
pub struct BenchConfig {
    /// Problems per table cell.
    pub problems: usize,
    /// Curve sample counts to sweep.
    pub sizes: Vec<usize>,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            problems: 1225,
            sizes: vec![100, 300, 500],
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct BenchRow {
    pub space: String,
    pub method: String,
    pub points: usize,
    pub problems: usize,
    pub mean_seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cell {
    Flat,
    H2Eval,
    H2Grad,
    S2Eval,
    S2Grad,
    Pdsm3,
}

impl Cell {
    fn all() -> [Cell; 6] {
        [
            Cell::Flat,
            Cell::H2Eval,
            Cell::H2Grad,
            Cell::S2Eval,
            Cell::S2Grad,
            Cell::Pdsm3,
        ]
    }

    fn labels(&self) -> (&'static str, &'static str) {
        match self {
            Cell::Flat => ("r2", "dp"),
            Cell::H2Eval => ("h2", "evaluation"),
            Cell::H2Grad => ("h2", "gradient"),
            Cell::S2Eval => ("s2", "evaluation"),
            Cell::S2Grad => ("s2", "gradient"),
            Cell::Pdsm3 => ("pdsm3", "gradient"),
        }
    }
}

/// Solves one full unparametrized matching problem on the given cell.
fn solve(cell: Cell, rng: &mut rand::rngs::StdRng, points: usize, opts: &AlignOptions) -> Result<f64> {
    match cell {
        Cell::Flat => {
            let a = synth::random_euclidean_curve(rng, 2, points);
            let b = synth::random_euclidean_curve(rng, 2, points);
            flat_distance(&a, &b, opts, true, true)
        }
        Cell::H2Eval | Cell::H2Grad => {
            let space = HomogeneousSpace::pdsm(2);
            let a = synth::random_manifold_curve(rng, &space, points, 5, 0.0);
            let b = synth::random_manifold_curve(rng, &space, points, 5, 0.0);
            Ok(align(&space, &a, &b, opts)?.distance)
        }
        Cell::S2Eval | Cell::S2Grad => {
            let space = HomogeneousSpace::sphere(2);
            let a = synth::random_manifold_curve(rng, &space, points, 5, 0.0);
            let b = synth::random_manifold_curve(rng, &space, points, 5, 0.0);
            Ok(align(&space, &a, &b, opts)?.distance)
        }
        Cell::Pdsm3 => {
            let space = HomogeneousSpace::pdsm(3);
            let a = synth::random_manifold_curve(rng, &space, points, 5, 0.0);
            let b = synth::random_manifold_curve(rng, &space, points, 5, 0.0);
            Ok(align(&space, &a, &b, opts)?.distance)
        }
    }
}

fn cell_options(cell: Cell, points: usize) -> AlignOptions {
    let k_opt = match cell {
        Cell::H2Eval | Cell::S2Eval => KOptimizer::Evaluation { steps: 360 },
        Cell::H2Grad | Cell::S2Grad | Cell::Pdsm3 => KOptimizer::Gradient,
        Cell::Flat => KOptimizer::Auto,
    };
    AlignOptions {
        k_opt,
        dp_resolution: points,
        ..Default::default()
    }
}

/// Runs the full table: each cell solves `problems` seeded random boundary
/// value problems at every size and reports the mean time per solve.
pub fn run(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for (cell_idx, cell) in Cell::all().iter().enumerate() {
        let (space, method) = cell.labels();
        for (size_idx, &points) in cfg.sizes.iter().enumerate() {
            let mut rng = synth::rng(
                cfg.seed
                    .wrapping_mul(1_000_003)
                    .wrapping_add((cell_idx * 97 + size_idx) as u64),
            );
            let opts = cell_options(*cell, points);
            let start = Instant::now();
            for _ in 0..cfg.problems {
                let d = solve(*cell, &mut rng, points, &opts)?;
                std::hint::black_box(d);
            }
            let mean_seconds = start.elapsed().as_secs_f64() / cfg.problems as f64;
            rows.push(BenchRow {
                space: space.into(),
                method: method.into(),
                points,
                problems: cfg.problems,
                mean_seconds,
            });
        }
    }
    Ok(rows)
}

pub fn to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("space,method,points,problems,mean_seconds\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.space, r.method, r.points, r.problems, r.mean_seconds
        )
        .unwrap();
    }
    out
}

pub fn to_table(rows: &[BenchRow]) -> String {
    let mut out = format!(
        "{:<8} {:<12} {:>8} {:>10} {:>14}\n",
        "space", "method", "points", "problems", "mean (s)"
    );
    for r in rows {
        writeln!(
            out,
            "{:<8} {:<12} {:>8} {:>10} {:>14.6}",
            r.space, r.method, r.points, r.problems, r.mean_seconds
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_bench_produces_full_grid() {
        let cfg = BenchConfig {
            problems: 1,
            sizes: vec![16],
            seed: 3,
        };
        let rows = run(&cfg).unwrap();
        assert_eq!(rows.len(), 6);
        for r in &rows {
            assert!(r.mean_seconds > 0.0);
        }
        let csv = to_csv(&rows);
        assert_eq!(csv.lines().count(), 7);
    }
}
