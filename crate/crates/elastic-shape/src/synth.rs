//! Seeded synthetic data: random group elements, algebra vectors, step maps,
//! and piecewise-geodesic curves on the supported spaces.
//!
//! Everything here is deterministic given the seed, so tests, benchmarks and
//! the `gen` subcommand are reproducible.

use nalgebra::DVector;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::homog::{DiscreteManifoldCurve, HomogeneousSpace, ManifoldPoint};
use crate::matgroup::{mat_exp, AlgebraVector, Group, GroupElement, Matrix, Subspace};
use crate::srvf::{DiscreteGroupCurve, Reparametrization, SrvPair, StepMap};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

fn gauss(rng: &mut StdRng) -> f64 {
    // Box-Muller; two uniforms are cheap and this avoids a rand_distr dep
    let u1: f64 = rng.gen::<f64>().max(1e-12);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn random_matrix(rng: &mut StdRng, n: usize) -> Matrix {
    Matrix::from_fn(n, n, |_, _| gauss(rng))
}

pub fn random_skew(rng: &mut StdRng, n: usize, scale: f64) -> Matrix {
    let m = random_matrix(rng, n);
    (&m - m.transpose()) * (0.5 * scale)
}

/// Skew matrix whose largest rotation angle is exactly `angle`.
pub fn random_skew_with_angle(rng: &mut StdRng, n: usize, angle: f64) -> Matrix {
    let v = random_skew(rng, n, 1.0);
    let exp = mat_exp(&v);
    // largest rotation angle of exp(v) relates to the spectral radius of v;
    // rescale via the norm of the principal log of the normalized rotation
    let spectral = largest_rotation_angle(&exp);
    if spectral < 1e-12 {
        return v;
    }
    v * (angle / spectral)
}

fn largest_rotation_angle(r: &Matrix) -> f64 {
    // eigenvalues of a rotation lie on the unit circle; use the symmetric
    // part's smallest eigenvalue cos(theta_max)
    let sym = (r + r.transpose()) * 0.5;
    let eig = nalgebra::SymmetricEigen::new(sym);
    eig.eigenvalues.min().clamp(-1.0, 1.0).acos()
}

pub fn random_traceless(rng: &mut StdRng, n: usize, scale: f64) -> Matrix {
    let mut m = random_matrix(rng, n) * scale;
    let shift = m.trace() / n as f64;
    for i in 0..n {
        m[(i, i)] -= shift;
    }
    m
}

pub fn random_sym_traceless(rng: &mut StdRng, n: usize, scale: f64) -> Matrix {
    let m = random_traceless(rng, n, scale);
    (&m + m.transpose()) * 0.5
}

pub fn random_spd(rng: &mut StdRng, n: usize, scale: f64) -> Matrix {
    let s = random_sym_traceless(rng, n, scale) + Matrix::identity(n, n) * (gauss(rng) * 0.2);
    mat_exp(&((&s + s.transpose()) * 0.5))
}

/// Symmetric positive definite with determinant exactly one (up to roundoff).
pub fn random_spd_det1(rng: &mut StdRng, n: usize, scale: f64) -> Matrix {
    mat_exp(&random_sym_traceless(rng, n, scale))
}

pub fn random_rotation(rng: &mut StdRng, n: usize) -> Matrix {
    mat_exp(&random_skew(rng, n, 0.8))
}

pub fn random_so_element(rng: &mut StdRng, n: usize, scale: f64) -> GroupElement {
    GroupElement::new(Group::SpecialOrthogonal, mat_exp(&random_skew(rng, n, scale))).unwrap()
}

pub fn random_sl_element(rng: &mut StdRng, n: usize, scale: f64) -> GroupElement {
    GroupElement::new(Group::SpecialLinear, mat_exp(&random_traceless(rng, n, scale))).unwrap()
}

pub fn random_group_element(rng: &mut StdRng, group: Group, n: usize, scale: f64) -> GroupElement {
    match group {
        Group::SpecialOrthogonal => random_so_element(rng, n, scale),
        Group::SpecialLinear => random_sl_element(rng, n, scale),
    }
}

pub fn random_unit_vector(rng: &mut StdRng, dim: usize) -> DVector<f64> {
    loop {
        let v = DVector::from_fn(dim, |_, _| gauss(rng));
        let n = v.norm();
        if n > 1e-6 {
            return v / n;
        }
    }
}

pub fn random_algebra_vector(
    rng: &mut StdRng,
    group: Group,
    dim: usize,
    scale: f64,
) -> AlgebraVector {
    let m = match group {
        Group::SpecialOrthogonal => random_skew(rng, dim, scale),
        Group::SpecialLinear => random_traceless(rng, dim, scale),
    };
    AlgebraVector::new_unchecked(group, Subspace::Full, m)
}

/// Uniform step map with `n` random ambient-algebra values.
pub fn random_step_map(
    rng: &mut StdRng,
    group: Group,
    dim: usize,
    n: usize,
    scale: f64,
) -> StepMap {
    let values: Vec<Matrix> = (0..n)
        .map(|_| match group {
            Group::SpecialOrthogonal => random_skew(rng, dim, scale),
            Group::SpecialLinear => random_traceless(rng, dim, scale),
        })
        .collect();
    StepMap::uniform(group, Subspace::Full, values).unwrap()
}

/// Uniform step map with values in the horizontal subspace of `space`.
pub fn random_horizontal_step_map(
    rng: &mut StdRng,
    space: &HomogeneousSpace,
    n: usize,
    scale: f64,
) -> StepMap {
    let dim = space.group_matrix_dim();
    let group = space.group();
    let values: Vec<Matrix> = (0..n)
        .map(|_| {
            let raw = match group {
                Group::SpecialOrthogonal => random_skew(rng, dim, scale),
                Group::SpecialLinear => random_traceless(rng, dim, scale),
            };
            space.proj_k_perp_matrix(&raw)
        })
        .collect();
    StepMap::uniform(group, Subspace::KPerp, values).unwrap()
}

pub fn random_srv_pair(
    rng: &mut StdRng,
    group: Group,
    dim: usize,
    n: usize,
    scale: f64,
) -> SrvPair {
    SrvPair::new(
        random_group_element(rng, group, dim, scale),
        random_step_map(rng, group, dim, n, scale),
    )
    .unwrap()
}

/// Random element of the embedded isotropy group K of `space`.
pub fn random_k_element(rng: &mut StdRng, space: &HomogeneousSpace, scale: f64) -> GroupElement {
    let k = space.k_matrix_dim();
    space
        .embed_k(&mat_exp(&random_skew(rng, k, scale)))
        .unwrap()
}

/// Random generalized PL curve in a group: starts at a random element and
/// follows `n` random one-parameter-subgroup segments.
pub fn random_group_curve(
    rng: &mut StdRng,
    group: Group,
    dim: usize,
    n: usize,
    scale: f64,
) -> DiscreteGroupCurve {
    let mut samples = vec![random_group_element(rng, group, dim, 0.5)];
    for _ in 0..n {
        let v = match group {
            Group::SpecialOrthogonal => random_skew(rng, dim, scale / n as f64),
            Group::SpecialLinear => random_traceless(rng, dim, scale / n as f64),
        };
        let next = samples.last().unwrap().matrix() * mat_exp(&v);
        samples.push(GroupElement::new(group, next).unwrap());
    }
    DiscreteGroupCurve::new(samples).unwrap()
}

/// Piecewise-geodesic curve on a homogeneous space: `knots` random geodesic
/// arcs sampled at `n + 1` uniform parameters, with optional tangential noise.
pub fn random_manifold_curve(
    rng: &mut StdRng,
    space: &HomogeneousSpace,
    n: usize,
    knots: usize,
    noise: f64,
) -> DiscreteManifoldCurve {
    let knots = knots.max(1);
    let mut anchor_points = Vec::with_capacity(knots + 1);
    match space.kind() {
        crate::homog::SpaceKind::Sphere(sn) => {
            let mut p = random_unit_vector(rng, sn + 1);
            anchor_points.push(ManifoldPoint::Sphere(p.clone()));
            for _ in 0..knots {
                // step along a random tangent direction by a moderate angle
                let mut dir = random_unit_vector(rng, sn + 1);
                dir -= &p * p.dot(&dir);
                let dn = dir.norm();
                if dn < 1e-8 {
                    anchor_points.push(ManifoldPoint::Sphere(p.clone()));
                    continue;
                }
                let dir = dir / dn;
                let angle = 0.2 + 0.5 * rng.gen::<f64>();
                p = &p * angle.cos() + dir * angle.sin();
                p /= p.norm();
                anchor_points.push(ManifoldPoint::Sphere(p.clone()));
            }
        }
        crate::homog::SpaceKind::Pdsm(pn) => {
            let mut p = random_spd_det1(rng, pn, 0.4);
            anchor_points.push(ManifoldPoint::Spd(p.clone()));
            for _ in 0..knots {
                let step = random_sym_traceless(rng, pn, 0.35);
                // geodesic step from p in direction step (projected flow)
                let sqrt_p = crate::matgroup::spd_sqrt(&p).unwrap();
                p = &sqrt_p * mat_exp(&step) * &sqrt_p;
                p = (&p + p.transpose()) * 0.5;
                let det = p.determinant();
                p *= det.powf(-1.0 / pn as f64);
                anchor_points.push(ManifoldPoint::Spd(p.clone()));
            }
        }
    }

    // sample the piecewise geodesic through the anchors at n+1 uniform times
    let mut samples = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let t = i as f64 / n as f64 * knots as f64;
        let seg = (t.floor() as usize).min(knots - 1);
        let local = t - seg as f64;
        let p = space
            .geodesic_point(&anchor_points[seg], &anchor_points[seg + 1], local)
            .unwrap();
        samples.push(p);
    }

    if noise > 0.0 {
        for s in samples.iter_mut() {
            match s {
                ManifoldPoint::Sphere(v) => {
                    for x in v.iter_mut() {
                        *x += gauss(rng) * noise;
                    }
                    let n = v.norm();
                    *v /= n;
                }
                ManifoldPoint::Spd(m) => {
                    let nd = m.nrows();
                    let jitter = random_sym_traceless(rng, nd, noise);
                    *m = &*m + jitter;
                    *m = (&*m + m.transpose()) * 0.5;
                    let det = m.determinant();
                    if det > 0.0 {
                        *m *= det.powf(-1.0 / nd as f64);
                    }
                }
            }
        }
    }
    DiscreteManifoldCurve::new(space.clone(), samples).unwrap()
}

/// Smooth track on the 2-sphere: a great-circle flow whose direction
/// precesses slowly, like a storm track. Unlike the piecewise-geodesic
/// curves, these have no corners.
pub fn smooth_sphere_track(rng: &mut StdRng, n: usize) -> DiscreteManifoldCurve {
    let space = HomogeneousSpace::sphere(2);
    let mut p = random_unit_vector(rng, 3);
    let mut dir = {
        let d = random_unit_vector(rng, 3);
        let mut d = d.clone() - &p * p.dot(&d);
        let norm = d.norm();
        if norm < 1e-8 {
            d = DVector::from_vec(vec![p[1], -p[0], 0.0]);
        }
        d.normalize()
    };
    let mut samples = vec![ManifoldPoint::Sphere(p.clone())];
    let total = 0.8 + 0.8 * rng.gen::<f64>();
    let step = total / n as f64;
    let phase = rng.gen::<f64>() * std::f64::consts::TAU;
    let rate = 0.5 + rng.gen::<f64>();
    for k in 0..n {
        // precess the heading around the current point, then take a
        // geodesic step
        let turn = rate * (k as f64 / n as f64 * std::f64::consts::TAU + phase).sin() * step;
        let cross = DVector::from_vec(vec![
            p[1] * dir[2] - p[2] * dir[1],
            p[2] * dir[0] - p[0] * dir[2],
            p[0] * dir[1] - p[1] * dir[0],
        ]);
        dir = (&dir * turn.cos() + cross * turn.sin()).normalize();
        let new_p = (&p * step.cos() + &dir * step.sin()).normalize();
        dir = (&dir * step.cos() - &p * step.sin()).normalize();
        p = new_p;
        samples.push(ManifoldPoint::Sphere(p.clone()));
    }
    DiscreteManifoldCurve::new(space, samples).unwrap()
}

/// Euclidean curve for the flat baseline: smooth random walk in R^dim.
pub fn random_euclidean_curve(rng: &mut StdRng, dim: usize, n: usize) -> Vec<DVector<f64>> {
    let mut pts = Vec::with_capacity(n + 1);
    let mut p = DVector::from_fn(dim, |_, _| gauss(rng));
    let mut v = DVector::from_fn(dim, |_, _| gauss(rng) * 0.1);
    pts.push(p.clone());
    for _ in 0..n {
        v = &v * 0.9 + DVector::from_fn(dim, |_, _| gauss(rng) * 0.03);
        p += &v;
        pts.push(p.clone());
    }
    pts
}

/// Random monotone lattice path from (0,0) to (res,res) using coprime steps
/// with components at most `max_step`, returned as a PL reparametrization.
pub fn random_lattice_gamma(rng: &mut StdRng, res: usize, max_step: usize) -> Reparametrization {
    let steps = crate::register::lattice_steps(max_step);
    let mut i = 0usize;
    let mut j = 0usize;
    let mut knots = vec![(0.0, 0.0)];
    while i < res || j < res {
        let feasible: Vec<(usize, usize)> = steps
            .iter()
            .copied()
            .filter(|&(di, dj)| i + di <= res && j + dj <= res && remainder_ok(res, i + di, j + dj, max_step))
            .collect();
        let &(di, dj) = feasible
            .get(rng.gen_range(0..feasible.len()))
            .expect("the diagonal step keeps the remainder feasible");
        i += di;
        j += dj;
        knots.push((i as f64 / res as f64, j as f64 / res as f64));
    }
    Reparametrization::new(knots).unwrap()
}

/// After moving to (i, j), both remaining gaps must still be bridgeable with
/// slopes in [1/max_step, max_step].
fn remainder_ok(res: usize, i: usize, j: usize, max_step: usize) -> bool {
    let ri = res - i;
    let rj = res - j;
    ri * max_step >= rj && rj * max_step >= ri
}

/// Lattice reparametrization that is the identity at every block boundary
/// and wanders freely inside each of the `blocks` diagonal blocks. Composing
/// a piecewise-geodesic curve whose corners sit at the block boundaries with
/// such a map keeps its discrete samples on the original geodesic arcs, so
/// plant-and-recover tests are exact.
pub fn block_lattice_gamma(
    rng: &mut StdRng,
    res: usize,
    blocks: usize,
    max_step: usize,
) -> Reparametrization {
    assert!(res.is_multiple_of(blocks), "block boundaries must sit on the lattice");
    let size = res / blocks;
    let steps = crate::register::lattice_steps(max_step);
    let mut knots = vec![(0.0, 0.0)];
    for block in 0..blocks {
        let base = block * size;
        let mut i = 0usize;
        let mut j = 0usize;
        while i < size || j < size {
            let feasible: Vec<(usize, usize)> = steps
                .iter()
                .copied()
                .filter(|&(di, dj)| {
                    i + di <= size && j + dj <= size && remainder_ok(size, i + di, j + dj, max_step)
                })
                .collect();
            let &(di, dj) = feasible
                .get(rng.gen_range(0..feasible.len()))
                .expect("the diagonal step keeps the remainder feasible");
            i += di;
            j += dj;
            knots.push((
                (base + i) as f64 / res as f64,
                (base + j) as f64 / res as f64,
            ));
        }
    }
    Reparametrization::new(knots).unwrap()
}

/// Reparametrize a manifold curve by a PL map: samples the piecewise-geodesic
/// interpolant of `beta` at gamma(t_i).
pub fn reparametrize_curve(
    space: &HomogeneousSpace,
    beta: &DiscreteManifoldCurve,
    gamma: &Reparametrization,
) -> DiscreteManifoldCurve {
    let n = beta.len() - 1;
    let samples: Vec<ManifoldPoint> = (0..=n)
        .map(|i| {
            let t = gamma.eval(i as f64 / n as f64);
            beta.eval_piecewise_geodesic(t).unwrap()
        })
        .collect();
    DiscreteManifoldCurve::new(space.clone(), samples).unwrap()
}
