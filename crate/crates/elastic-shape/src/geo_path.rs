//! Geodesic paths between aligned curves, projected back to the manifold.
//!
//! After alignment the two transforms sit in the flat product of the group
//! and the step maps, where the geodesic is explicit. Each intermediate
//! transform integrates back to a group curve and projects pointwise to a
//! curve on the manifold; those frames are the deformation strips shown by
//! the command-line `geodesic` verb.

use crate::error::{Error, Result};
use crate::homog::{k_act, DiscreteManifoldCurve, HomogeneousSpace, ManifoldPoint};
use crate::register::{align_lifted, AlignOptions, AlignmentResult};
use crate::srvf::{gamma_act, integrate_pair, product_geodesic, SrvPair};

/// A discrete geodesic between two curves: S+1 intermediate curves, the
/// alignment that produced them, and the geodesic length.
#[derive(Debug, Clone)]
pub struct GeodesicSweep {
    pub frames: Vec<DiscreteManifoldCurve>,
    pub alignment: AlignmentResult,
    pub length: f64,
}

/// Aligns the two curves, then walks the product-space geodesic between the
/// aligned transforms in S equal steps, reconstructing and projecting a
/// manifold curve at each step. Frames are resampled to the grid of `beta1`.
pub fn geodesic_sweep(
    space: &HomogeneousSpace,
    beta1: &DiscreteManifoldCurve,
    beta2: &DiscreteManifoldCurve,
    frame_count: usize,
    opts: &AlignOptions,
) -> Result<GeodesicSweep> {
    if frame_count == 0 {
        return Err(Error::DimMismatch("a sweep needs at least one step".into()));
    }
    let lift1 = space.lift(beta1)?;
    let lift2 = space.lift(beta2)?;
    let pair1 = lift1.srv_pair()?;
    let pair2 = lift2.srv_pair()?;
    let alignment = align_lifted(space, &pair1, &pair2, opts)?;

    let q2_aligned = gamma_act(&pair2.q, &alignment.gamma_opt)?;
    let pair2_aligned = k_act(
        space,
        &SrvPair::new(pair2.start.clone(), q2_aligned)?,
        &alignment.y_opt,
    )?;

    let n = beta1.intervals();
    let mut frames = Vec::with_capacity(frame_count + 1);
    for j in 0..=frame_count {
        let s = j as f64 / frame_count as f64;
        let pair_s = product_geodesic(&pair1, &pair2_aligned, s)?;
        frames.push(project_pair(space, &pair_s, n)?);
    }

    Ok(GeodesicSweep {
        frames,
        length: alignment.distance,
        alignment,
    })
}

/// Integrates a transform and projects it to a manifold curve sampled at
/// `intervals + 1` uniform parameters.
fn project_pair(
    space: &HomogeneousSpace,
    pair: &SrvPair,
    intervals: usize,
) -> Result<DiscreteManifoldCurve> {
    let (breaks, group_samples) = integrate_pair(pair);
    let mut points = Vec::with_capacity(group_samples.len());
    for g in &group_samples {
        points.push(space.project_point(g)?);
    }
    resample_breaks(space, &breaks, &points, intervals)
}

/// Re-samples the piecewise-geodesic interpolant of a curve at n+1 uniform
/// parameters. Sampling at the native interval count reproduces the curve.
pub fn resample_curve(beta: &DiscreteManifoldCurve, intervals: usize) -> Result<DiscreteManifoldCurve> {
    if intervals < 1 {
        return Err(Error::DimMismatch("resampling needs at least one interval".into()));
    }
    let breaks: Vec<f64> = (0..=beta.intervals())
        .map(|i| i as f64 / beta.intervals() as f64)
        .collect();
    resample_breaks(beta.space(), &breaks, beta.samples(), intervals)
}

fn resample_breaks(
    space: &HomogeneousSpace,
    breaks: &[f64],
    points: &[ManifoldPoint],
    intervals: usize,
) -> Result<DiscreteManifoldCurve> {
    let mut samples = Vec::with_capacity(intervals + 1);
    for i in 0..=intervals {
        let t = i as f64 / intervals as f64;
        // find the native segment containing t
        let seg = match breaks.binary_search_by(|b| b.partial_cmp(&t).unwrap()) {
            Ok(k) => {
                samples.push(points[k].clone());
                continue;
            }
            Err(k) => k - 1,
        };
        let local = (t - breaks[seg]) / (breaks[seg + 1] - breaks[seg]);
        samples.push(space.geodesic_point(&points[seg], &points[seg + 1], local)?);
    }
    DiscreteManifoldCurve::new(space.clone(), samples)
}
