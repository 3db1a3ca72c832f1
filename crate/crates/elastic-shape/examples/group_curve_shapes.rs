//! Curves with values in a matrix group itself (no quotient): the transform
//! is a bijection onto start points plus step maps, the product distance is
//! invariant under left translation and reparametrization, and shapes are
//! compared with a single dynamic program.
//!
//! Run with: cargo run --release --example group_curve_shapes

use elastic_shape::register::{shape_distance_group, AlignOptions};
use elastic_shape::srvf::{ac_distance, g_act, gamma_act, srvf_forward, srvf_inverse, SrvPair};
use elastic_shape::{synth, Group};

fn main() {
    let mut rng = synth::rng(99);
    let n = 40;

    for group in [Group::SpecialOrthogonal, Group::SpecialLinear] {
        println!("== curves in {} ==", group.name());
        let curve = synth::random_group_curve(&mut rng, group, 3, n, 2.5);

        // transform and reconstruct
        let pair = srvf_forward(&curve).unwrap();
        let back = srvf_inverse(&pair);
        let mut worst: f64 = 0.0;
        for (a, b) in curve.samples().iter().zip(back.samples()) {
            worst = worst.max((a.matrix() - b.matrix()).norm());
        }
        println!("  transform roundtrip error: {worst:.2e}");

        // the distance ignores simultaneous reparametrization exactly
        let other = synth::random_group_curve(&mut rng, group, 3, n, 2.5);
        let q2 = srvf_forward(&other).unwrap();
        let gamma = synth::random_lattice_gamma(&mut rng, n, 3);
        let d = ac_distance(&pair, &q2).unwrap();
        let moved = |p: &SrvPair| SrvPair::new(p.start.clone(), gamma_act(&p.q, &gamma).unwrap()).unwrap();
        let d_moved = ac_distance(&moved(&pair), &moved(&q2)).unwrap();
        println!("  parametrized distance:     {d:.6}");
        println!("  after common lattice warp: {d_moved:.6} (difference {:.1e})", (d - d_moved).abs());

        // and under left translation
        let g = synth::random_group_element(&mut rng, group, 3, 0.8);
        let d_left = ac_distance(&g_act(&pair, &g).unwrap(), &g_act(&q2, &g).unwrap()).unwrap();
        println!("  after left translation:    {d_left:.6}");

        // the shape distance mods out the parametrization of the second curve
        let opts = AlignOptions {
            dp_resolution: n,
            ..Default::default()
        };
        let d_shape = shape_distance_group(&curve, &other, &opts).unwrap();
        println!("  shape distance:            {d_shape:.6} (<= parametrized)");

        // a reparametrized copy has (numerically) the same shape
        let re = srvf_inverse(&moved(&pair));
        let d_plant = shape_distance_group(&curve, &re, &opts).unwrap();
        println!("  distance to a warped copy: {d_plant:.2e}\n");
    }
}
