//! Geodesics between curves of 3x3 positive definite matrices.
//!
//! Each sample of such a curve is an ellipsoid (eigenvalues = axis lengths,
//! eigenvectors = principal directions); the sweep prints how the ellipsoids
//! morph along the geodesic between two random curves.
//!
//! Run with: cargo run --release --example spd_deformation

use elastic_shape::register::AlignOptions;
use elastic_shape::homog::ManifoldPoint;
use elastic_shape::{geodesic_sweep, synth, HomogeneousSpace};

fn main() {
    let space = HomogeneousSpace::pdsm(3);
    let mut rng = synth::rng(7);
    let n = 50;
    let a = synth::random_manifold_curve(&mut rng, &space, n, 4, 0.0);
    let b = synth::random_manifold_curve(&mut rng, &space, n, 4, 0.0);

    let opts = AlignOptions {
        dp_resolution: n,
        ..Default::default()
    };
    let sweep = geodesic_sweep(&space, &a, &b, 4, &opts).unwrap();
    println!(
        "aligned two SPD curves ({} samples each); geodesic length {:.5}",
        n + 1,
        sweep.length
    );
    println!(
        "alternation rounds: {}, converged: {}",
        sweep.alignment.iterations, sweep.alignment.converged
    );

    // middle sample of every frame, as an eigenvalue triple
    println!("\nellipsoid at the curve midpoint, along the geodesic:");
    println!("{:>7} {:>28} {:>12}", "frame", "axis lengths", "anisotropy");
    for (j, frame) in sweep.frames.iter().enumerate() {
        let ManifoldPoint::Spd(m) = &frame.samples()[n / 2] else {
            unreachable!()
        };
        let eig = nalgebra::SymmetricEigen::new(m.clone());
        let mut axes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        axes.sort_by(|a, b| b.partial_cmp(a).unwrap());
        println!(
            "{:>7} ({:>7.4}, {:>7.4}, {:>7.4}) {:>12.4}",
            j,
            axes[0],
            axes[1],
            axes[2],
            axes[0] / axes[2]
        );
    }

    // determinants stay pinned to one along the whole sweep
    let mut worst_det: f64 = 0.0;
    for frame in &sweep.frames {
        for p in frame.samples() {
            let ManifoldPoint::Spd(m) = p else { unreachable!() };
            worst_det = worst_det.max((m.determinant() - 1.0).abs());
        }
    }
    println!("\nlargest |det - 1| over all frames: {worst_det:.2e}");
}
