//! The homogeneous-space layer.
//!
//! Two quotients are supported:
//!
//! * the sphere S^n = SO(n+1)/SO(n), with SO(n) embedded in the upper-left
//!   block and the projection g -> g n (n the north pole, the last column);
//! * PDSM(n) = SL(n)/SO(n), the unit-determinant symmetric positive definite
//!   matrices, with the projection g -> sqrt(g g^t) (the polar factor).
//!
//! This module is the single place where the splitting g = k + k_perp is
//! defined: for the sphere, k is the upper-left so(n) block and k_perp the
//! skew matrices supported on the last row and column; for PDSM, k = so(n)
//! and k_perp the symmetric traceless matrices. Both splittings are
//! orthogonal for the trace inner product.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::matgroup::{
    mat_exp, spd_log, spd_sqrt, AlgebraVector, Group, GroupElement, Matrix, Subspace, TOL_GROUP,
};
use crate::srvf::{srvf_forward, DiscreteGroupCurve, SrvPair};

/// Which homogeneous space, with its intrinsic size parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    /// S^n as SO(n+1)/SO(n); points are unit vectors in R^{n+1}.
    Sphere(usize),
    /// PDSM(n) as SL(n)/SO(n); points are n x n SPD matrices with det 1.
    Pdsm(usize),
}

/// Descriptor of a homogeneous space M = G/K together with the projection
/// and lifting conventions of its quotient presentation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomogeneousSpace {
    kind: SpaceKind,
}

impl HomogeneousSpace {
    pub fn sphere(n: usize) -> Self {
        assert!(n >= 1, "the sphere S^n needs n >= 1");
        Self {
            kind: SpaceKind::Sphere(n),
        }
    }

    pub fn pdsm(n: usize) -> Self {
        assert!(n >= 2, "PDSM(n) needs n >= 2");
        Self {
            kind: SpaceKind::Pdsm(n),
        }
    }

    /// The hyperbolic plane, presented as PDSM(2).
    pub fn hyperbolic_plane() -> Self {
        Self::pdsm(2)
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn group(&self) -> Group {
        match self.kind {
            SpaceKind::Sphere(_) => Group::SpecialOrthogonal,
            SpaceKind::Pdsm(_) => Group::SpecialLinear,
        }
    }

    /// Matrix dimension of G.
    pub fn group_matrix_dim(&self) -> usize {
        match self.kind {
            SpaceKind::Sphere(n) => n + 1,
            SpaceKind::Pdsm(n) => n,
        }
    }

    /// Matrix dimension of K = SO(k).
    pub fn k_matrix_dim(&self) -> usize {
        match self.kind {
            SpaceKind::Sphere(n) => n,
            SpaceKind::Pdsm(n) => n,
        }
    }

    /// Dimension of the isotropy algebra k.
    pub fn k_dim(&self) -> usize {
        let k = self.k_matrix_dim();
        k * (k - 1) / 2
    }

    pub fn name(&self) -> String {
        match self.kind {
            SpaceKind::Sphere(n) => format!("S^{n}"),
            SpaceKind::Pdsm(n) => format!("PDSM({n})"),
        }
    }

    /// Embeds a K = SO(k) matrix into G.
    pub fn embed_k(&self, small: &Matrix) -> Result<GroupElement> {
        let k = self.k_matrix_dim();
        if small.nrows() != k || small.ncols() != k {
            return Err(Error::DimMismatch(format!(
                "K element must be {k}x{k}, got {}x{}",
                small.nrows(),
                small.ncols()
            )));
        }
        match self.kind {
            SpaceKind::Sphere(n) => {
                let mut m = Matrix::identity(n + 1, n + 1);
                m.view_mut((0, 0), (n, n)).copy_from(small);
                GroupElement::new(Group::SpecialOrthogonal, m)
            }
            SpaceKind::Pdsm(_) => {
                // SO(n) sits inside SL(n) directly
                let g = GroupElement::new(Group::SpecialOrthogonal, small.clone())?;
                Ok(GroupElement::new_unchecked(
                    Group::SpecialLinear,
                    g.into_matrix(),
                ))
            }
        }
    }

    /// Embeds a so(k) matrix into the ambient algebra of G.
    pub fn embed_k_algebra(&self, small: &Matrix) -> Matrix {
        match self.kind {
            SpaceKind::Sphere(n) => {
                let mut m = Matrix::zeros(n + 1, n + 1);
                m.view_mut((0, 0), (n, n)).copy_from(small);
                m
            }
            SpaceKind::Pdsm(_) => small.clone(),
        }
    }

    /// Extracts the so(k) block of an ambient k-element.
    pub fn extract_k_algebra(&self, ambient: &Matrix) -> Matrix {
        match self.kind {
            SpaceKind::Sphere(n) => ambient.view((0, 0), (n, n)).into_owned(),
            SpaceKind::Pdsm(_) => ambient.clone(),
        }
    }

    /// Checks that y is an element of the embedded isotropy group K.
    pub fn check_k_member(&self, y: &GroupElement) -> Result<()> {
        let d = self.group_matrix_dim();
        if y.dim() != d {
            return Err(Error::SubgroupMismatch(format!(
                "expected a {d}x{d} element of embedded K"
            )));
        }
        let m = y.matrix();
        let ortho = (m.transpose() * m - Matrix::identity(d, d)).norm();
        if ortho > TOL_GROUP {
            return Err(Error::SubgroupMismatch(format!(
                "orthogonality defect {ortho:.3e}"
            )));
        }
        if let SpaceKind::Sphere(n) = self.kind {
            // K fixes the north pole: last row and column must be e_n
            let mut defect = (m[(n, n)] - 1.0).abs();
            for i in 0..n {
                defect = defect.max(m[(i, n)].abs()).max(m[(n, i)].abs());
            }
            if defect > TOL_GROUP {
                return Err(Error::SubgroupMismatch(format!(
                    "element does not stabilize the north pole (defect {defect:.3e})"
                )));
            }
        }
        Ok(())
    }

    /// Orthogonal projection of an ambient algebra element onto k.
    pub fn proj_k(&self, v: &AlgebraVector) -> AlgebraVector {
        AlgebraVector::new_unchecked(self.group(), Subspace::K, self.proj_k_matrix(v.matrix()))
    }

    /// Orthogonal projection of an ambient algebra element onto k_perp.
    pub fn proj_k_perp(&self, v: &AlgebraVector) -> AlgebraVector {
        AlgebraVector::new_unchecked(
            self.group(),
            Subspace::KPerp,
            self.proj_k_perp_matrix(v.matrix()),
        )
    }

    pub fn proj_k_matrix(&self, v: &Matrix) -> Matrix {
        match self.kind {
            SpaceKind::Sphere(n) => {
                let skew = crate::matgroup::skew_part(v);
                let mut m = Matrix::zeros(n + 1, n + 1);
                m.view_mut((0, 0), (n, n))
                    .copy_from(&skew.view((0, 0), (n, n)));
                m
            }
            SpaceKind::Pdsm(_) => crate::matgroup::skew_part(v),
        }
    }

    pub fn proj_k_perp_matrix(&self, v: &Matrix) -> Matrix {
        match self.kind {
            SpaceKind::Sphere(n) => {
                let skew = crate::matgroup::skew_part(v);
                let mut m = Matrix::zeros(n + 1, n + 1);
                for i in 0..n {
                    m[(i, n)] = skew[(i, n)];
                    m[(n, i)] = skew[(n, i)];
                }
                m
            }
            SpaceKind::Pdsm(n) => {
                let mut s = crate::matgroup::sym_part(v);
                let shift = s.trace() / n as f64;
                for i in 0..n {
                    s[(i, i)] -= shift;
                }
                s
            }
        }
    }

    /// Orthonormal basis of k, embedded in the ambient algebra.
    pub fn k_basis(&self) -> Vec<Matrix> {
        crate::matgroup::so_basis(self.k_matrix_dim())
            .into_iter()
            .map(|b| self.embed_k_algebra(&b))
            .collect()
    }

    /// Quotient projection of a group element to a manifold point.
    pub fn project_point(&self, g: &GroupElement) -> Result<ManifoldPoint> {
        if g.group() != self.group() || g.dim() != self.group_matrix_dim() {
            return Err(Error::GroupMismatch(format!(
                "cannot project a {} element of size {} to {}",
                g.group().name(),
                g.dim(),
                self.name()
            )));
        }
        Ok(match self.kind {
            SpaceKind::Sphere(_) => ManifoldPoint::Sphere(sphere_project(g)),
            SpaceKind::Pdsm(_) => ManifoldPoint::Spd(pdsm_project(g.matrix())?),
        })
    }

    /// Horizontal lift of a discrete curve.
    pub fn lift(&self, beta: &DiscreteManifoldCurve) -> Result<HorizontalLift> {
        if beta.space() != self {
            return Err(Error::GroupMismatch(format!(
                "curve lives on {}, lift requested on {}",
                beta.space().name(),
                self.name()
            )));
        }
        match self.kind {
            SpaceKind::Sphere(_) => sphere_lift(beta),
            SpaceKind::Pdsm(_) => pdsm_lift(beta),
        }
    }

    /// Point on the geodesic from p to q at parameter t in `[0, 1]`.
    pub fn geodesic_point(
        &self,
        p: &ManifoldPoint,
        q: &ManifoldPoint,
        t: f64,
    ) -> Result<ManifoldPoint> {
        match (p, q) {
            (ManifoldPoint::Sphere(a), ManifoldPoint::Sphere(b)) => {
                let dot = a.dot(b).clamp(-1.0, 1.0);
                let omega = dot.acos();
                if omega < 1e-12 {
                    return Ok(ManifoldPoint::Sphere(a.clone()));
                }
                if std::f64::consts::PI - omega < 1e-8 {
                    return Err(Error::AntipodalPoints);
                }
                let s = omega.sin();
                let v = a * (((1.0 - t) * omega).sin() / s) + b * ((t * omega).sin() / s);
                let n = v.norm();
                Ok(ManifoldPoint::Sphere(v / n))
            }
            (ManifoldPoint::Spd(a), ManifoldPoint::Spd(b)) => {
                let rel = a.clone().try_inverse().ok_or_else(|| {
                    Error::NotSpd("singular SPD point in geodesic interpolation".into())
                })? * b;
                let m = spd_sqrt(&(&rel * rel.transpose()))?;
                let s = spd_log(&m)?;
                let g = a * mat_exp(&(s * t));
                Ok(ManifoldPoint::Spd(pdsm_project(&g)?))
            }
            _ => Err(Error::GroupMismatch(
                "cannot interpolate between points of different spaces".into(),
            )),
        }
    }

    /// Geodesic distance between two points in the metric induced by the
    /// trace metric upstairs. On the sphere this is sqrt(2) times the
    /// great-circle angle.
    pub fn point_distance(&self, p: &ManifoldPoint, q: &ManifoldPoint) -> Result<f64> {
        match (p, q) {
            (ManifoldPoint::Sphere(a), ManifoldPoint::Sphere(b)) => {
                let angle = a.dot(b).clamp(-1.0, 1.0).acos();
                Ok(2.0_f64.sqrt() * angle)
            }
            (ManifoldPoint::Spd(a), ManifoldPoint::Spd(b)) => {
                let rel = a.clone().try_inverse().ok_or_else(|| {
                    Error::NotSpd("singular SPD point in distance".into())
                })? * b;
                let m = spd_sqrt(&(&rel * rel.transpose()))?;
                Ok(spd_log(&m)?.norm())
            }
            _ => Err(Error::GroupMismatch(
                "cannot compare points of different spaces".into(),
            )),
        }
    }

    /// Left action of g in G on a manifold point (the isometry group action).
    pub fn act_on_point(&self, g: &GroupElement, p: &ManifoldPoint) -> Result<ManifoldPoint> {
        match (self.kind, p) {
            (SpaceKind::Sphere(_), ManifoldPoint::Sphere(v)) => {
                Ok(ManifoldPoint::Sphere(g.matrix() * v))
            }
            (SpaceKind::Pdsm(_), ManifoldPoint::Spd(m)) => {
                Ok(ManifoldPoint::Spd(pdsm_project(&(g.matrix() * m))?))
            }
            _ => Err(Error::GroupMismatch("point does not match space".into())),
        }
    }
}

/// A point of a homogeneous space: a unit vector on a sphere or a
/// unit-determinant SPD matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum ManifoldPoint {
    Sphere(DVector<f64>),
    Spd(Matrix),
}

impl ManifoldPoint {
    pub fn check(&self, space: &HomogeneousSpace, index: usize) -> Result<()> {
        match (space.kind(), self) {
            (SpaceKind::Sphere(n), ManifoldPoint::Sphere(v)) => {
                if v.len() != n + 1 {
                    return Err(Error::ConstraintViolation {
                        index,
                        detail: format!("expected a vector in R^{}, got R^{}", n + 1, v.len()),
                    });
                }
                let defect = (v.norm() - 1.0).abs();
                if defect > 1e-8 {
                    return Err(Error::ConstraintViolation {
                        index,
                        detail: format!("unit-norm defect {defect:.3e}"),
                    });
                }
                Ok(())
            }
            (SpaceKind::Pdsm(n), ManifoldPoint::Spd(m)) => {
                if m.nrows() != n || m.ncols() != n {
                    return Err(Error::ConstraintViolation {
                        index,
                        detail: format!("expected {n}x{n} matrices"),
                    });
                }
                let asym = (m - m.transpose()).norm();
                if asym > 1e-8 {
                    return Err(Error::ConstraintViolation {
                        index,
                        detail: format!("asymmetry {asym:.3e}"),
                    });
                }
                let det = m.determinant();
                if (det - 1.0).abs() > 1e-8 {
                    return Err(Error::ConstraintViolation {
                        index,
                        detail: format!("determinant {det} is not 1"),
                    });
                }
                let eig = nalgebra::SymmetricEigen::new(crate::matgroup::sym_part(m));
                if eig.eigenvalues.min() <= 0.0 {
                    return Err(Error::ConstraintViolation {
                        index,
                        detail: "matrix is not positive definite".into(),
                    });
                }
                Ok(())
            }
            _ => Err(Error::ConstraintViolation {
                index,
                detail: "point type does not match the space".into(),
            }),
        }
    }
}

/// N+1 points of a homogeneous space on the uniform grid, read as the
/// piecewise geodesic through them.
#[derive(Debug, Clone)]
pub struct DiscreteManifoldCurve {
    space: HomogeneousSpace,
    samples: Vec<ManifoldPoint>,
}

impl DiscreteManifoldCurve {
    pub fn new(space: HomogeneousSpace, samples: Vec<ManifoldPoint>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::ConstraintViolation {
                index: 0,
                detail: "a discrete curve needs at least two samples".into(),
            });
        }
        for (i, p) in samples.iter().enumerate() {
            p.check(&space, i)?;
        }
        // antipodal consecutive sphere samples admit no unique lift step
        if let SpaceKind::Sphere(_) = space.kind() {
            for w in samples.windows(2) {
                if let (ManifoldPoint::Sphere(a), ManifoldPoint::Sphere(b)) = (&w[0], &w[1]) {
                    if (a + b).norm() <= 1e-8 {
                        return Err(Error::AntipodalPoints);
                    }
                }
            }
        }
        Ok(Self { space, samples })
    }

    pub fn space(&self) -> &HomogeneousSpace {
        &self.space
    }

    pub fn samples(&self) -> &[ManifoldPoint] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn intervals(&self) -> usize {
        self.samples.len() - 1
    }

    /// Evaluates the piecewise-geodesic interpolant at t in `[0, 1]`.
    pub fn eval_piecewise_geodesic(&self, t: f64) -> Result<ManifoldPoint> {
        let n = self.intervals();
        let t = t.clamp(0.0, 1.0);
        let scaled = t * n as f64;
        let seg = (scaled.floor() as usize).min(n - 1);
        let local = scaled - seg as f64;
        self.space
            .geodesic_point(&self.samples[seg], &self.samples[seg + 1], local)
    }

    /// Applies the isometry g in G samplewise.
    pub fn left_translate(&self, g: &GroupElement) -> Result<Self> {
        let samples = self
            .samples
            .iter()
            .map(|p| self.space.act_on_point(g, p))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            space: self.space.clone(),
            samples,
        })
    }

    /// Largest pointwise discrepancy against another curve on the same grid,
    /// measured in the ambient norm.
    pub fn max_pointwise_gap(&self, other: &Self) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::DimMismatch(format!(
                "curves have {} and {} samples",
                self.len(),
                other.len()
            )));
        }
        let mut worst = 0.0f64;
        for (a, b) in self.samples.iter().zip(other.samples.iter()) {
            let gap = match (a, b) {
                (ManifoldPoint::Sphere(x), ManifoldPoint::Sphere(y)) => (x - y).norm(),
                (ManifoldPoint::Spd(x), ManifoldPoint::Spd(y)) => (x - y).norm(),
                _ => {
                    return Err(Error::GroupMismatch(
                        "curves live on different spaces".into(),
                    ))
                }
            };
            worst = worst.max(gap);
        }
        Ok(worst)
    }
}

/// A group curve lying over a manifold curve, horizontal segment by segment.
#[derive(Debug, Clone)]
pub struct HorizontalLift {
    pub curve: DiscreteGroupCurve,
    pub base: DiscreteManifoldCurve,
}

impl HorizontalLift {
    /// Square-root-velocity transform of the lift; values lie in k_perp.
    pub fn srv_pair(&self) -> Result<SrvPair> {
        let pair = srvf_forward(&self.curve)?;
        Ok(SrvPair {
            start: pair.start,
            q: pair.q.retag(Subspace::KPerp),
        })
    }
}

// ---------------------------------------------------------------------------
// Sphere: efficient rotations and lifting
// ---------------------------------------------------------------------------

/// The rotation closest to the identity (in the bi-invariant metric) taking
/// unit vector p to unit vector q: the composition of the reflection through
/// p's orthogonal complement and the reflection through (p+q)'s bisector.
pub fn efficient_rotation(p: &DVector<f64>, q: &DVector<f64>) -> Result<GroupElement> {
    if p.len() != q.len() {
        return Err(Error::DimMismatch(format!(
            "{} vs {}",
            p.len(),
            q.len()
        )));
    }
    if p == q {
        return Ok(GroupElement::identity(Group::SpecialOrthogonal, p.len()));
    }
    let sum = p + q;
    let s2 = sum.norm_squared();
    if s2.sqrt() <= 1e-8 {
        return Err(Error::AntipodalPoints);
    }
    let d = p.len();
    let id = Matrix::identity(d, d);
    let bisector = &id - (&sum * sum.transpose()) * (2.0 / s2);
    let through_p = &id - (p * p.transpose()) * 2.0;
    GroupElement::new(Group::SpecialOrthogonal, bisector * through_p)
}

/// North pole (0, ..., 0, 1) of S^n inside R^{n+1}.
pub fn north_pole(ambient_dim: usize) -> DVector<f64> {
    let mut v = DVector::zeros(ambient_dim);
    v[ambient_dim - 1] = 1.0;
    v
}

/// Quotient projection SO(n+1) -> S^n: the image of the north pole, i.e. the
/// last column.
pub fn sphere_project(g: &GroupElement) -> DVector<f64> {
    g.matrix().column(g.dim() - 1).into_owned()
}

/// Horizontal lift of a spherical curve: chain the efficient rotations
/// between consecutive samples, seeding at the rotation taking the north pole
/// to the first sample.
pub fn sphere_lift(beta: &DiscreteManifoldCurve) -> Result<HorizontalLift> {
    let n = match beta.space().kind() {
        SpaceKind::Sphere(n) => n,
        _ => {
            return Err(Error::GroupMismatch(
                "sphere_lift expects a spherical curve".into(),
            ))
        }
    };
    let d = n + 1;
    let pole = north_pole(d);
    let first = match &beta.samples()[0] {
        ManifoldPoint::Sphere(v) => v,
        _ => unreachable!("validated at construction"),
    };

    let start = if (first + &pole).norm() <= 1e-8 {
        // the antipode of the pole: no efficient rotation exists, use the
        // fixed diag(-1, I, -1) representative
        let mut m = Matrix::identity(d, d);
        m[(0, 0)] = -1.0;
        m[(d - 1, d - 1)] = -1.0;
        GroupElement::new(Group::SpecialOrthogonal, m)?
    } else {
        efficient_rotation(&pole, first)?
    };

    let mut samples = Vec::with_capacity(beta.len());
    samples.push(start);
    for w in beta.samples().windows(2) {
        let (a, b) = match (&w[0], &w[1]) {
            (ManifoldPoint::Sphere(a), ManifoldPoint::Sphere(b)) => (a, b),
            _ => unreachable!(),
        };
        let rot = efficient_rotation(a, b)?;
        let next = rot.compose(samples.last().unwrap())?;
        samples.push(next);
    }
    Ok(HorizontalLift {
        curve: DiscreteGroupCurve::new(samples)?,
        base: beta.clone(),
    })
}

// ---------------------------------------------------------------------------
// PDSM: polar projection and lifting
// ---------------------------------------------------------------------------

/// Quotient projection SL(n) -> PDSM(n): the SPD polar factor sqrt(B B^t).
pub fn pdsm_project(b: &Matrix) -> Result<Matrix> {
    spd_sqrt(&(b * b.transpose()))
}

/// The element of the orbit B2 SO(n) closest to B1:
/// B1 sqrt(B1^{-1} B2 (B1^{-1} B2)^t).
pub fn pdsm_closest_orbit(b1: &GroupElement, b2: &GroupElement) -> Result<GroupElement> {
    b1.check_same(b2)?;
    if b1.group() != Group::SpecialLinear {
        return Err(Error::GroupMismatch(
            "closest-orbit search expects SL(n) elements".into(),
        ));
    }
    let rel = b1.inverse().compose(b2)?;
    let factor = spd_sqrt(&(rel.matrix() * rel.matrix().transpose()))?;
    GroupElement::new(Group::SpecialLinear, b1.matrix() * factor)
}

/// Horizontal lift of a PDSM curve: start at the (SPD) first sample and step
/// to the closest point of each successive fiber.
pub fn pdsm_lift(beta: &DiscreteManifoldCurve) -> Result<HorizontalLift> {
    if !matches!(beta.space().kind(), SpaceKind::Pdsm(_)) {
        return Err(Error::GroupMismatch(
            "pdsm_lift expects a PDSM curve".into(),
        ));
    }
    let points: Vec<&Matrix> = beta
        .samples()
        .iter()
        .map(|p| match p {
            ManifoldPoint::Spd(m) => m,
            _ => unreachable!("validated at construction"),
        })
        .collect();

    let mut samples = Vec::with_capacity(points.len());
    samples.push(GroupElement::new(Group::SpecialLinear, points[0].clone())?);
    for target in &points[1..] {
        let current = samples.last().unwrap();
        let inv = current.inverse();
        let rel = inv.matrix() * *target;
        let factor = spd_sqrt(&(&rel * rel.transpose()))?;
        let next = GroupElement::new(Group::SpecialLinear, current.matrix() * factor)?;
        samples.push(next);
    }
    Ok(HorizontalLift {
        curve: DiscreteGroupCurve::new(samples)?,
        base: beta.clone(),
    })
}

// ---------------------------------------------------------------------------
// The K action on transforms
// ---------------------------------------------------------------------------

/// Right action of the isotropy group on a transform:
/// (a0, q) * y = (a0 y, y^{-1} q y).
pub fn k_act(space: &HomogeneousSpace, pair: &SrvPair, y: &GroupElement) -> Result<SrvPair> {
    space.check_k_member(y)?;
    let start = pair.start.compose(&GroupElement::new_unchecked(
        pair.start.group(),
        y.matrix().clone(),
    ))?;
    let q = pair.q.conjugate(y)?;
    Ok(SrvPair { start, q })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matgroup::{frob_inner, group_log};
    use crate::srvf::ac_distance;
    use crate::synth;

    #[test]
    fn efficient_rotation_maps_p_to_q_minimally() {
        let mut rng = synth::rng(51);
        for _ in 0..50 {
            let p = synth::random_unit_vector(&mut rng, 3);
            let q = synth::random_unit_vector(&mut rng, 3);
            if (&p + &q).norm() < 1e-3 {
                continue;
            }
            let r = efficient_rotation(&p, &q).unwrap();
            assert!((r.matrix() * &p - &q).norm() < 1e-12);
        }
    }

    #[test]
    fn efficient_rotation_identity_and_antipodal() {
        let p = north_pole(3);
        let r = efficient_rotation(&p, &p).unwrap();
        assert_eq!(r.matrix(), &Matrix::identity(3, 3));
        let minus = -&p;
        assert!(matches!(
            efficient_rotation(&p, &minus),
            Err(Error::AntipodalPoints)
        ));
    }

    #[test]
    fn efficient_rotation_quarter_turn_in_plane() {
        let p = DVector::from_vec(vec![1.0, 0.0]);
        let q = DVector::from_vec(vec![0.0, 1.0]);
        let r = efficient_rotation(&p, &q).unwrap();
        assert!((r.matrix() - Matrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0])).norm() < 1e-14);
    }

    #[test]
    fn sphere_projection_conventions() {
        let id = GroupElement::identity(Group::SpecialOrthogonal, 3);
        assert!((sphere_project(&id) - north_pole(3)).norm() < 1e-15);

        let mut rng = synth::rng(52);
        let p = synth::random_unit_vector(&mut rng, 3);
        let r = efficient_rotation(&north_pole(3), &p).unwrap();
        assert!((sphere_project(&r) - &p).norm() < 1e-12);

        // the embedded stabilizer fixes the pole
        let space = HomogeneousSpace::sphere(2);
        let y = synth::random_k_element(&mut rng, &space, 0.8);
        assert!((sphere_project(&y) - north_pole(3)).norm() < 1e-12);
    }

    #[test]
    fn sphere_lift_constant_at_pole() {
        let space = HomogeneousSpace::sphere(2);
        let pole = ManifoldPoint::Sphere(north_pole(3));
        let beta = DiscreteManifoldCurve::new(space, vec![pole; 6]).unwrap();
        let lift = sphere_lift(&beta).unwrap();
        for s in lift.curve.samples() {
            assert!((s.matrix() - Matrix::identity(3, 3)).norm() < 1e-13);
        }
    }

    #[test]
    fn sphere_lift_antipodal_start_uses_fixed_representative() {
        let space = HomogeneousSpace::sphere(2);
        let mut anti = north_pole(3);
        anti[2] = -1.0;
        let other = DVector::from_vec(vec![0.1, 0.0, -(1.0f64 - 0.01).sqrt()]);
        let beta = DiscreteManifoldCurve::new(
            space,
            vec![
                ManifoldPoint::Sphere(anti.clone()),
                ManifoldPoint::Sphere(other.clone() / other.norm()),
            ],
        )
        .unwrap();
        let lift = sphere_lift(&beta).unwrap();
        let start = lift.curve.samples()[0].matrix();
        let expect = Matrix::from_row_slice(3, 3, &[-1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, -1.0]);
        assert!((start - expect).norm() < 1e-14);
    }

    #[test]
    fn sphere_lift_projects_and_is_horizontal() {
        let mut rng = synth::rng(53);
        let space = HomogeneousSpace::sphere(2);
        for _ in 0..20 {
            let beta = synth::random_manifold_curve(&mut rng, &space, 15, 3, 0.0);
            let lift = space.lift(&beta).unwrap();
            for (g, p) in lift.curve.samples().iter().zip(beta.samples()) {
                let ManifoldPoint::Sphere(v) = p else { unreachable!() };
                assert!((sphere_project(g) - v).norm() < 1e-10);
            }
            for w in lift.curve.samples().windows(2) {
                let inc = w[0].inverse().compose(&w[1]).unwrap();
                let log = group_log(&inc).unwrap();
                let k_part = space.proj_k(&log);
                assert!(k_part.norm() < 1e-8, "k component {:.3e}", k_part.norm());
            }
        }
    }

    #[test]
    fn sphere_lift_of_horizontal_subgroup_is_subgroup() {
        // a great circle through the pole lifts to exp(t v) with v in k_perp
        let space = HomogeneousSpace::sphere(2);
        let mut v = Matrix::zeros(3, 3);
        v[(0, 2)] = -0.9;
        v[(2, 0)] = 0.9;
        let n = 12;
        let samples: Vec<ManifoldPoint> = (0..=n)
            .map(|i| {
                let g = mat_exp(&(&v * (i as f64 / n as f64)));
                ManifoldPoint::Sphere(g.column(2).into_owned())
            })
            .collect();
        let beta = DiscreteManifoldCurve::new(space.clone(), samples).unwrap();
        let lift = space.lift(&beta).unwrap();
        for (i, g) in lift.curve.samples().iter().enumerate() {
            let expect = mat_exp(&(&v * (i as f64 / n as f64)));
            assert!(
                (g.matrix() - expect).norm() < 1e-10,
                "lift deviates at sample {i}"
            );
        }
    }

    #[test]
    fn pdsm_projection_cases() {
        let mut rng = synth::rng(54);
        // rotations project to the identity
        let r = synth::random_rotation(&mut rng, 3);
        assert!((pdsm_project(&r).unwrap() - Matrix::identity(3, 3)).norm() < 1e-12);
        // SPD matrices are fixed
        let p = synth::random_spd_det1(&mut rng, 3, 0.6);
        assert!((pdsm_project(&p).unwrap() - &p).norm() < 1e-10);
        // right SO(n) invariance
        for _ in 0..20 {
            let b = synth::random_sl_element(&mut rng, 3, 0.7);
            let y = synth::random_rotation(&mut rng, 3);
            let br = pdsm_project(b.matrix()).unwrap();
            let byr = pdsm_project(&(b.matrix() * y)).unwrap();
            assert!((br - byr).norm() < 1e-10);
        }
    }

    #[test]
    fn closest_orbit_special_cases() {
        let mut rng = synth::rng(55);
        let id = GroupElement::identity(Group::SpecialLinear, 3);
        let rot = GroupElement::new_unchecked(Group::SpecialLinear, synth::random_rotation(&mut rng, 3));
        let c = pdsm_closest_orbit(&id, &rot).unwrap();
        assert!((c.matrix() - Matrix::identity(3, 3)).norm() < 1e-12);

        let spd = GroupElement::new(Group::SpecialLinear, synth::random_spd_det1(&mut rng, 3, 0.5))
            .unwrap();
        let c = pdsm_closest_orbit(&id, &spd).unwrap();
        assert!((c.matrix() - spd.matrix()).norm() < 1e-10);
    }

    #[test]
    fn closest_orbit_beats_random_orbit_points() {
        let mut rng = synth::rng(56);
        for _ in 0..10 {
            let b1 = synth::random_sl_element(&mut rng, 2, 0.5);
            let b2 = synth::random_sl_element(&mut rng, 2, 0.5);
            let best = pdsm_closest_orbit(&b1, &b2).unwrap();
            let d_best = crate::matgroup::group_distance(&b1, &best).unwrap();
            for _ in 0..200 {
                let y = synth::random_rotation(&mut rng, 2);
                let candidate =
                    GroupElement::new(Group::SpecialLinear, b2.matrix() * y).unwrap();
                let d = crate::matgroup::group_distance(&b1, &candidate).unwrap();
                assert!(d_best <= d + 1e-9, "found closer orbit point: {d} < {d_best}");
            }
        }
    }

    #[test]
    fn pdsm_lift_projects_and_is_horizontal() {
        let mut rng = synth::rng(57);
        let space = HomogeneousSpace::pdsm(3);
        for _ in 0..10 {
            let beta = synth::random_manifold_curve(&mut rng, &space, 12, 3, 0.0);
            let lift = space.lift(&beta).unwrap();
            for (g, p) in lift.curve.samples().iter().zip(beta.samples()) {
                let ManifoldPoint::Spd(m) = p else { unreachable!() };
                assert!((pdsm_project(g.matrix()).unwrap() - m).norm() < 1e-9);
            }
            for w in lift.curve.samples().windows(2) {
                let inc = w[0].inverse().compose(&w[1]).unwrap();
                let log = group_log(&inc).unwrap();
                assert!(space.proj_k(&log).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn pdsm_lift_of_symmetric_subgroup_is_itself() {
        let mut rng = synth::rng(58);
        let space = HomogeneousSpace::pdsm(3);
        let s = synth::random_sym_traceless(&mut rng, 3, 0.6);
        let n = 10;
        let samples: Vec<ManifoldPoint> = (0..=n)
            .map(|i| ManifoldPoint::Spd(mat_exp(&(&s * (i as f64 / n as f64)))))
            .collect();
        let beta = DiscreteManifoldCurve::new(space.clone(), samples.clone()).unwrap();
        let lift = space.lift(&beta).unwrap();
        for (g, p) in lift.curve.samples().iter().zip(&samples) {
            let ManifoldPoint::Spd(m) = p else { unreachable!() };
            assert!((g.matrix() - m).norm() < 1e-9);
        }
    }

    #[test]
    fn k_act_identity_preserves_pair_and_norm() {
        let mut rng = synth::rng(59);
        let space = HomogeneousSpace::sphere(2);
        let beta = synth::random_manifold_curve(&mut rng, &space, 10, 3, 0.0);
        let pair = space.lift(&beta).unwrap().srv_pair().unwrap();

        let id = space.embed_k(&Matrix::identity(2, 2)).unwrap();
        let same = k_act(&space, &pair, &id).unwrap();
        assert!((same.start.matrix() - pair.start.matrix()).norm() < 1e-14);
        assert!(same.q.l2_dist(&pair.q).unwrap() < 1e-14);

        let y = synth::random_k_element(&mut rng, &space, 0.9);
        let moved = k_act(&space, &pair, &y).unwrap();
        assert!((moved.q.l2_norm() - pair.q.l2_norm()).abs() < 1e-12);
    }

    #[test]
    fn k_act_is_isometric() {
        let mut rng = synth::rng(60);
        let space = HomogeneousSpace::sphere(2);
        for _ in 0..20 {
            let b1 = synth::random_manifold_curve(&mut rng, &space, 10, 3, 0.0);
            let b2 = synth::random_manifold_curve(&mut rng, &space, 10, 3, 0.0);
            let p1 = space.lift(&b1).unwrap().srv_pair().unwrap();
            let p2 = space.lift(&b2).unwrap().srv_pair().unwrap();
            let y = synth::random_k_element(&mut rng, &space, 1.0);
            let d = ac_distance(&p1, &p2).unwrap();
            let dy = ac_distance(
                &k_act(&space, &p1, &y).unwrap(),
                &k_act(&space, &p2, &y).unwrap(),
            )
            .unwrap();
            assert!((d - dy).abs() < 1e-10);
        }
    }

    #[test]
    fn k_act_rejects_outsiders() {
        let mut rng = synth::rng(61);
        let space = HomogeneousSpace::sphere(2);
        let beta = synth::random_manifold_curve(&mut rng, &space, 8, 2, 0.0);
        let pair = space.lift(&beta).unwrap().srv_pair().unwrap();
        // a generic rotation of SO(3) does not stabilize the pole
        let g = synth::random_so_element(&mut rng, 3, 1.0);
        assert!(matches!(
            k_act(&space, &pair, &g),
            Err(Error::SubgroupMismatch(_))
        ));
    }

    #[test]
    fn two_fiber_lifts_differ_by_k_action() {
        let mut rng = synth::rng(62);
        for space in [HomogeneousSpace::sphere(2), HomogeneousSpace::pdsm(3)] {
            let beta = synth::random_manifold_curve(&mut rng, &space, 10, 3, 0.0);
            let lift = space.lift(&beta).unwrap();
            let pair = lift.srv_pair().unwrap();
            let y = synth::random_k_element(&mut rng, &space, 0.8);

            // right-translating the whole lift gives the horizontal lift
            // through the other fiber point
            let translated: Vec<GroupElement> = lift
                .curve
                .samples()
                .iter()
                .map(|g| g.compose(&GroupElement::new_unchecked(g.group(), y.matrix().clone())).unwrap())
                .collect();
            let other = crate::srvf::srvf_forward(&DiscreteGroupCurve::new(translated).unwrap())
                .unwrap();
            let expected = k_act(&space, &pair, &y).unwrap();
            assert!((other.start.matrix() - expected.start.matrix()).norm() < 1e-10);
            assert!(other.q.l2_dist(&expected.q).unwrap() < 1e-8);
        }
    }

    #[test]
    fn projections_are_orthogonal_idempotent_splittings() {
        let mut rng = synth::rng(63);
        for space in [HomogeneousSpace::sphere(3), HomogeneousSpace::pdsm(3)] {
            for _ in 0..20 {
                let v = synth::random_algebra_vector(
                    &mut rng,
                    space.group(),
                    space.group_matrix_dim(),
                    1.0,
                );
                let k = space.proj_k(&v);
                let perp = space.proj_k_perp(&v);
                // idempotence
                assert!((space.proj_k(&k).matrix() - k.matrix()).norm() < 1e-14);
                assert!((space.proj_k_perp(&perp).matrix() - perp.matrix()).norm() < 1e-14);
                // complementarity on the skew part of the input
                assert!(space.proj_k_perp(&k).norm() < 1e-14);
                assert!(space.proj_k(&perp).norm() < 1e-14);
                // orthogonality and the projection property
                assert!(frob_inner(k.matrix(), perp.matrix()).unwrap().abs() < 1e-12);
                let residual = v.matrix() - k.matrix();
                for b in space.k_basis() {
                    assert!(frob_inner(&residual, &b).unwrap().abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn k_basis_is_orthonormal() {
        for space in [HomogeneousSpace::sphere(2), HomogeneousSpace::pdsm(3)] {
            let basis = space.k_basis();
            assert_eq!(basis.len(), space.k_dim());
            for (i, a) in basis.iter().enumerate() {
                for (j, b) in basis.iter().enumerate() {
                    let inner = frob_inner(a, b).unwrap();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((inner - expect).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn sphere_metric_scale_against_great_circle() {
        // projected endpoints of a horizontal one-parameter subgroup are
        // sqrt(2) x arc angle apart in the induced metric
        let space = HomogeneousSpace::sphere(2);
        let mut v = Matrix::zeros(3, 3);
        let angle = 0.73;
        v[(0, 2)] = -angle;
        v[(2, 0)] = angle;
        let g = GroupElement::new(Group::SpecialOrthogonal, mat_exp(&v)).unwrap();
        let p = ManifoldPoint::Sphere(north_pole(3));
        let q = ManifoldPoint::Sphere(sphere_project(&g));
        let d = space.point_distance(&p, &q).unwrap();
        let ManifoldPoint::Sphere(qv) = &q else { unreachable!() };
        let arc = north_pole(3).dot(qv).clamp(-1.0, 1.0).acos();
        assert!((arc - angle).abs() < 1e-12);
        assert!((d - 2.0_f64.sqrt() * angle).abs() < 1e-12);
        // and the group distance of the lift agrees
        let dg = crate::matgroup::group_distance(
            &GroupElement::identity(Group::SpecialOrthogonal, 3),
            &g,
        )
        .unwrap();
        assert!((dg - 2.0_f64.sqrt() * angle).abs() < 1e-12);
    }

    #[test]
    fn antipodal_consecutive_samples_are_rejected() {
        let space = HomogeneousSpace::sphere(2);
        let p = north_pole(3);
        let result = DiscreteManifoldCurve::new(
            space,
            vec![ManifoldPoint::Sphere(p.clone()), ManifoldPoint::Sphere(-p)],
        );
        assert!(matches!(result, Err(Error::AntipodalPoints)));
    }

    #[test]
    fn geodesic_point_interpolates() {
        let mut rng = synth::rng(64);
        let space = HomogeneousSpace::pdsm(2);
        let a = ManifoldPoint::Spd(synth::random_spd_det1(&mut rng, 2, 0.5));
        let b = ManifoldPoint::Spd(synth::random_spd_det1(&mut rng, 2, 0.5));
        let p0 = space.geodesic_point(&a, &b, 0.0).unwrap();
        let p1 = space.geodesic_point(&a, &b, 1.0).unwrap();
        let (ManifoldPoint::Spd(p0), ManifoldPoint::Spd(p1)) = (&p0, &p1) else {
            unreachable!()
        };
        let (ManifoldPoint::Spd(am), ManifoldPoint::Spd(bm)) = (&a, &b) else {
            unreachable!()
        };
        assert!((p0 - am).norm() < 1e-10);
        assert!((p1 - bm).norm() < 1e-9);
        // midpoint splits the distance
        let mid = space.geodesic_point(&a, &b, 0.5).unwrap();
        let d = space.point_distance(&a, &b).unwrap();
        let d1 = space.point_distance(&a, &mid).unwrap();
        let d2 = space.point_distance(&mid, &b).unwrap();
        assert!((d1 - d / 2.0).abs() < 1e-8);
        assert!((d2 - d / 2.0).abs() < 1e-8);
    }
}
