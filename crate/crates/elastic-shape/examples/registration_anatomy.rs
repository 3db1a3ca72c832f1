//! The pieces of the matching pipeline, one at a time: horizontal lifting,
//! the transform, the rotation scan, and the dynamic program over
//! reparametrizations.
//!
//! Run with: cargo run --release --example registration_anatomy

use elastic_shape::homog::k_act;
use elastic_shape::register::{dp_reparametrize, f_value, k_exhaustive, AlignOptions, DpGrid};
use elastic_shape::srvf::gamma_act;
use elastic_shape::{group_log, synth, HomogeneousSpace};

fn main() {
    let space = HomogeneousSpace::sphere(2);
    let mut rng = synth::rng(33);
    let n = 30;
    let beta1 = synth::random_manifold_curve(&mut rng, &space, n, 5, 0.0);
    let beta2 = synth::random_manifold_curve(&mut rng, &space, n, 5, 0.0);

    // step 1: horizontal lifts
    let lift1 = space.lift(&beta1).unwrap();
    let lift2 = space.lift(&beta2).unwrap();
    let mut vertical: f64 = 0.0;
    for w in lift1.curve.samples().windows(2) {
        let inc = w[0].inverse().compose(&w[1]).unwrap();
        vertical = vertical.max(space.proj_k(&group_log(&inc).unwrap()).norm());
    }
    println!("lifted both curves to SO(3); largest vertical increment component: {vertical:.2e}");

    // step 2: transforms
    let p1 = lift1.srv_pair().unwrap();
    let p2 = lift2.srv_pair().unwrap();
    println!(
        "velocity maps: |q1|^2 = {:.4}, |q2|^2 = {:.4} (the squared norms are the curve lengths)",
        p1.q.l2_norm().powi(2),
        p2.q.l2_norm().powi(2)
    );

    // step 3: the rotation scan on the one-dimensional isotropy group
    let before = f_value(
        &space,
        &p1.start,
        &p2.start,
        &p1.q,
        &p2.q,
        &space.embed_k(&nalgebra::DMatrix::identity(2, 2)).unwrap(),
    )
    .unwrap();
    let (y_opt, after) = k_exhaustive(&space, &p1.start, &p2.start, &p1.q, &p2.q, 360).unwrap();
    println!(
        "rotation scan over K = SO(2): objective {before:.5} -> {after:.5} at angle {:.4} rad",
        y_opt.matrix()[(1, 0)].atan2(y_opt.matrix()[(0, 0)])
    );

    // step 4: the dynamic program, on the rotated configuration
    let moved = k_act(&space, &p2, &y_opt).unwrap();
    let grid = DpGrid::new(n, 3);
    let (gamma, cost) = dp_reparametrize(&p1.q, &moved.q, &grid);
    println!(
        "dynamic program: velocity mismatch {:.5} -> {cost:.5} with {} knots",
        p1.q.l2_dist(&moved.q).unwrap(),
        gamma.knots().len()
    );
    println!("gamma (every 5th knot):");
    for (s, g) in gamma.knots().iter().step_by(5) {
        println!("  {s:.3} -> {g:.3}");
    }
    let warped = gamma_act(&moved.q, &gamma).unwrap();
    println!(
        "realized mismatch after warping: {:.5}",
        p1.q.l2_dist(&warped).unwrap()
    );

    // the full alternation does all of this until it stalls
    let opts = AlignOptions {
        dp_resolution: n,
        ..Default::default()
    };
    let result = elastic_shape::align(&space, &beta1, &beta2, &opts).unwrap();
    println!(
        "\nfull alternation: distance {:.5} in {} rounds (converged: {})",
        result.distance, result.iterations, result.converged
    );
}
