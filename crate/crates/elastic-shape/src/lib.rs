//! Elastic shape analysis of curves with values in homogeneous spaces.
//!
//! Curves on a quotient M = G/K of a matrix Lie group are lifted to
//! horizontal group curves, carried to a start point plus a square-root
//! velocity step map, and compared with a metric that is invariant under
//! reparametrization and under the isometries of M. Aligning over the
//! isotropy group and the reparametrization lattice yields quotient
//! distances and explicit geodesics between unparametrized curves.
//!
//! Supported spaces:
//!
//! * `S^n = SO(n+1)/SO(n)` - spherical tracks (storm paths, directions);
//! * `PDSM(n) = SL(n)/SO(n)` - unit-determinant SPD matrices (n = 2 is a
//!   model of the hyperbolic plane);
//! * flat `R^n` as a classical baseline for side-by-side comparison.
//!
//! Start with the `examples/` directory: each example is a runnable tour of
//! one capability (spherical matching, hyperbolic vs. flat geodesics, SPD
//! deformation strips, group-curve shape distance, registration internals).
//! The same functionality is scriptable through the thin `elastic-shape`
//! binary.

pub mod cli;
pub mod error;
pub mod geo_path;
pub mod homog;
pub mod matgroup;
pub mod register;
pub mod srvf;
pub mod synth;

pub use error::{Error, Result};
pub use geo_path::{geodesic_sweep, resample_curve, GeodesicSweep};
pub use homog::{
    efficient_rotation, k_act, pdsm_closest_orbit, pdsm_lift, pdsm_project, sphere_lift,
    sphere_project, DiscreteManifoldCurve, HomogeneousSpace, HorizontalLift, ManifoldPoint,
    SpaceKind,
};
pub use matgroup::{
    ad_transpose_apply, frob_inner, group_distance, group_log, mat_exp, real_log, riemannian_exp,
    riemannian_log, sl_riemannian_exp, sl_riemannian_log, so_distance_from_identity, so_log,
    so_rotation_angles, spd_log, spd_sqrt, AlgebraVector, Group, GroupElement, Matrix, Subspace,
};
pub use register::{
    ac_manifold_distance, align, dp_reparametrize, f_gradient, f_value, k_exhaustive,
    k_gradient_descent, mod_g_distance, shape_distance_group, shape_mod_g_distance, AlignOptions,
    AlignmentResult, DpGrid, KOptimizer,
};
pub use srvf::{
    ac_distance, g_act, gamma_act, product_geodesic, srvf_forward, srvf_inverse,
    DiscreteGroupCurve, Reparametrization, SrvPair, StepMap,
};
