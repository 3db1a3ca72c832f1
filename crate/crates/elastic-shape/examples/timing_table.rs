//! A quick version of the timing table: mean seconds to solve one geodesic
//! boundary value problem per space and method. The full-size protocol
//! (1225 problems per cell at 100/300/500 points) runs via the binary:
//!
//!   elastic-shape bench --problems 1225 --sizes 100,300,500 --out table.csv
//!
//! Run with: cargo run --release --example timing_table

use elastic_shape::cli::bench::{run, to_table, BenchConfig};

fn main() {
    let cfg = BenchConfig {
        problems: 3,
        sizes: vec![50, 100],
        seed: 7,
    };
    println!(
        "solving {} random boundary value problems per cell...\n",
        cfg.problems
    );
    let rows = run(&cfg).unwrap();
    print!("{}", to_table(&rows));
    println!("\nflat matching is fastest; the hyperbolic evaluation method pays");
    println!("an iterative inverse-exponential per scanned rotation, and the");
    println!("SPD space pays it inside every gradient evaluation.");
}
