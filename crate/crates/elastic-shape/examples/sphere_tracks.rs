//! Matching storm-like tracks on the 2-sphere.
//!
//! Generates two synthetic tracks (piecewise great-circle arcs with noise),
//! compares them under every quotient, and walks the geodesic between their
//! shapes.
//!
//! Run with: cargo run --release --example sphere_tracks

use elastic_shape::register::{align, align_param, AlignOptions};
use elastic_shape::{geodesic_sweep, synth, HomogeneousSpace};

fn main() {
    let space = HomogeneousSpace::sphere(2);
    let mut rng = synth::rng(2024);
    let n = 100;

    let track_a = synth::random_manifold_curve(&mut rng, &space, n, 6, 0.002);
    let track_b = synth::random_manifold_curve(&mut rng, &space, n, 6, 0.002);

    let opts = AlignOptions {
        dp_resolution: n,
        ..Default::default()
    };

    let param = align_param(&space, &track_a, &track_b, &opts).unwrap();
    let shape = align(&space, &track_a, &track_b, &opts).unwrap();
    println!("two random tracks on S^2 with {n} intervals");
    println!("  distance between parametrized curves: {:.6}", param.distance);
    println!(
        "  distance between shapes:               {:.6}  ({} alternation rounds)",
        shape.distance, shape.iterations
    );
    println!(
        "  reparametrization gained {:.1}% of the distance",
        100.0 * (param.distance - shape.distance) / param.distance
    );
    println!("  optimal isotropy rotation:");
    for i in 0..3 {
        let row: Vec<String> = (0..3)
            .map(|j| format!("{:+.4}", shape.y_opt.matrix()[(i, j)]))
            .collect();
        println!("    [{}]", row.join(", "));
    }

    // a five-frame geodesic between the shapes
    let sweep = geodesic_sweep(&space, &track_a, &track_b, 5, &opts).unwrap();
    println!("\ngeodesic between the shapes ({} frames):", sweep.frames.len());
    for (j, frame) in sweep.frames.iter().enumerate() {
        // report how far each frame moved from the first one
        let gap = frame.max_pointwise_gap(&sweep.frames[0]).unwrap();
        println!("  frame {j}: max displacement from start {gap:.4}");
    }
    println!("geodesic length: {:.6}", sweep.length);

    // sanity: a rotated copy of a track is at (numerically) zero mod-G distance
    let g = synth::random_so_element(&mut rng, 3, 0.8);
    let rotated = track_a.left_translate(&g).unwrap();
    let d = elastic_shape::mod_g_distance(&space, &track_a, &rotated, &opts).unwrap();
    println!("\nmod-G distance between a track and a rotated copy: {d:.2e}");
}
