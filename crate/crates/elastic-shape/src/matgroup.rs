//! Matrix Lie-group primitives for SO(n) and SL(n).
//!
//! Everything here works on dense `f64` matrices: exponentials, principal
//! logarithms, symmetric square roots, the trace inner product, and geodesic
//! distances for the two metrics used by the rest of the crate (the
//! bi-invariant metric on SO(n) and the left-invariant, right-SO(n)-invariant
//! metric on SL(n)).

use nalgebra::{DMatrix, SymmetricEigen};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};

/// Dense square matrix used everywhere in this crate.
pub type Matrix = DMatrix<f64>;

/// Tolerance for group membership checks (orthogonality defect, determinant).
pub const TOL_GROUP: f64 = 1e-8;
/// Tolerance for Lie-algebra membership checks (skewness defect, trace).
pub const TOL_ALG: f64 = 1e-8;
/// Constructors repair membership defects below this threshold and reject
/// anything larger; long lift chains accumulate roundoff of this order.
pub const REPAIR_LIMIT: f64 = 1e-6;
/// A rotation angle within this distance of pi makes the principal log ambiguous.
pub const ANGLE_PI_TOL: f64 = 1e-8;
/// Velocities below this norm are treated as exactly zero by the transform.
pub const ZERO_VELOCITY_TOL: f64 = 1e-14;

/// Convergence tolerance on the fiber defect for the iterative inverse of the
/// Riemannian exponential on SL(n).
pub const SL_LOG_TOL: f64 = 1e-12;
/// Iteration cap for the same routine.
pub const SL_LOG_MAX_ITER: usize = 200;
/// Central finite-difference step for the fiber-defect Jacobian.
pub const SL_LOG_FD_STEP: f64 = 1e-6;

/// The two matrix groups supported by this crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Group {
    /// SO(n): real orthogonal matrices with determinant one.
    SpecialOrthogonal,
    /// SL(n): real matrices with determinant one.
    SpecialLinear,
}

impl Group {
    pub fn name(&self) -> &'static str {
        match self {
            Group::SpecialOrthogonal => "SO(n)",
            Group::SpecialLinear => "SL(n)",
        }
    }

    pub fn algebra_name(&self) -> &'static str {
        match self {
            Group::SpecialOrthogonal => "so(n)",
            Group::SpecialLinear => "sl(n)",
        }
    }
}

/// Which part of the splitting g = k + k_perp an algebra element lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subspace {
    /// The isotropy algebra k.
    K,
    /// The orthogonal complement of k under the trace inner product.
    KPerp,
    /// No subspace claim; anywhere in the ambient algebra.
    Full,
}

/// An element of SO(n) or SL(n), validated at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    group: Group,
    mat: Matrix,
}

impl GroupElement {
    /// Wraps a matrix as a group element, checking membership.
    ///
    /// Defects below [`REPAIR_LIMIT`] are repaired (polar projection for
    /// SO(n), determinant rescaling for SL(n)); larger ones are rejected.
    pub fn new(group: Group, mat: Matrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimMismatch(format!(
                "group element must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if mat.iter().any(|x| !x.is_finite()) {
            return Err(Error::NotInGroup {
                group: group.name().into(),
                detail: "matrix has non-finite entries".into(),
            });
        }
        let n = mat.nrows();
        match group {
            Group::SpecialOrthogonal => {
                let defect = (mat.transpose() * &mat - Matrix::identity(n, n)).norm();
                let det = mat.determinant();
                if det <= 0.0 {
                    return Err(Error::NotInGroup {
                        group: "SO(n)".into(),
                        detail: format!("determinant {det} is not +1"),
                    });
                }
                if defect < TOL_GROUP {
                    Ok(Self { group, mat })
                } else if defect < REPAIR_LIMIT {
                    let repaired = polar_rotation_factor(&mat)?;
                    Ok(Self {
                        group,
                        mat: repaired,
                    })
                } else {
                    Err(Error::NotInGroup {
                        group: "SO(n)".into(),
                        detail: format!("orthogonality defect {defect:.3e}"),
                    })
                }
            }
            Group::SpecialLinear => {
                let det = mat.determinant();
                let defect = (det - 1.0).abs();
                if defect < TOL_GROUP {
                    Ok(Self { group, mat })
                } else if det > 0.0 && defect < REPAIR_LIMIT {
                    let scale = det.powf(-1.0 / n as f64);
                    Ok(Self {
                        group,
                        mat: mat * scale,
                    })
                } else {
                    Err(Error::NotInGroup {
                        group: "SL(n)".into(),
                        detail: format!("determinant {det} is not 1"),
                    })
                }
            }
        }
    }

    /// Wraps a matrix that is known to satisfy the membership invariant.
    pub(crate) fn new_unchecked(group: Group, mat: Matrix) -> Self {
        Self { group, mat }
    }

    pub fn identity(group: Group, dim: usize) -> Self {
        Self {
            group,
            mat: Matrix::identity(dim, dim),
        }
    }

    pub fn group(&self) -> Group {
        self.group
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.mat
    }

    pub fn into_matrix(self) -> Matrix {
        self.mat
    }

    /// Group inverse; the transpose for SO(n), an LU solve for SL(n).
    pub fn inverse(&self) -> Self {
        let mat = match self.group {
            Group::SpecialOrthogonal => self.mat.transpose(),
            Group::SpecialLinear => self
                .mat
                .clone()
                .try_inverse()
                .expect("SL(n) elements have determinant one and are invertible"),
        };
        Self {
            group: self.group,
            mat,
        }
    }

    /// Group multiplication `self * rhs`.
    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        self.check_same(rhs)?;
        Ok(Self {
            group: self.group,
            mat: &self.mat * &rhs.mat,
        })
    }

    pub(crate) fn check_same(&self, rhs: &Self) -> Result<()> {
        if self.group != rhs.group {
            return Err(Error::GroupMismatch(format!(
                "{} vs {}",
                self.group.name(),
                rhs.group.name()
            )));
        }
        if self.dim() != rhs.dim() {
            return Err(Error::DimMismatch(format!(
                "{}x{} vs {}x{}",
                self.dim(),
                self.dim(),
                rhs.dim(),
                rhs.dim()
            )));
        }
        Ok(())
    }
}

/// A tangent vector at the identity: an element of so(n) or sl(n).
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraVector {
    group: Group,
    subspace: Subspace,
    mat: Matrix,
}

impl AlgebraVector {
    /// Wraps a matrix as an algebra element, checking membership
    /// (skew-symmetry for so(n), zero trace for sl(n)).
    pub fn new(group: Group, subspace: Subspace, mat: Matrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimMismatch(format!(
                "algebra element must be square, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let defect = match group {
            Group::SpecialOrthogonal => (&mat + mat.transpose()).norm(),
            Group::SpecialLinear => mat.trace().abs(),
        };
        if defect > TOL_ALG * (1.0 + mat.norm()) {
            return Err(Error::NotInGroup {
                group: group.algebra_name().into(),
                detail: format!("membership defect {defect:.3e}"),
            });
        }
        Ok(Self {
            group,
            subspace,
            mat,
        })
    }

    pub(crate) fn new_unchecked(group: Group, subspace: Subspace, mat: Matrix) -> Self {
        Self {
            group,
            subspace,
            mat,
        }
    }

    pub fn zero(group: Group, subspace: Subspace, dim: usize) -> Self {
        Self {
            group,
            subspace,
            mat: Matrix::zeros(dim, dim),
        }
    }

    pub fn group(&self) -> Group {
        self.group
    }

    pub fn subspace(&self) -> Subspace {
        self.subspace
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.mat
    }

    pub fn into_matrix(self) -> Matrix {
        self.mat
    }

    pub fn norm(&self) -> f64 {
        self.mat.norm()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            group: self.group,
            subspace: self.subspace,
            mat: &self.mat * s,
        }
    }
}

/// Trace inner product tr(u v^t); the bi-invariant metric used on so(n) and
/// at the identity of SL(n).
pub fn frob_inner(u: &Matrix, v: &Matrix) -> Result<f64> {
    if u.shape() != v.shape() {
        return Err(Error::DimMismatch(format!(
            "{:?} vs {:?}",
            u.shape(),
            v.shape()
        )));
    }
    Ok(u.dot(v))
}

/// Matrix realization of ad^T_{q2} q1 under the trace inner product:
/// q2^t q1 - q1 q2^t.
pub fn ad_transpose_apply(q2: &Matrix, q1: &Matrix) -> Result<Matrix> {
    if q1.shape() != q2.shape() {
        return Err(Error::DimMismatch(format!(
            "{:?} vs {:?}",
            q1.shape(),
            q2.shape()
        )));
    }
    Ok(q2.transpose() * q1 - q1 * q2.transpose())
}

/// Skew-symmetric part (m - m^t)/2.
pub fn skew_part(m: &Matrix) -> Matrix {
    (m - m.transpose()) * 0.5
}

/// Symmetric part (m + m^t)/2.
pub fn sym_part(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

/// Orthonormal basis of so(n) under the trace inner product:
/// (e_a e_b^t - e_b e_a^t)/sqrt(2) for a < b.
pub fn so_basis(n: usize) -> Vec<Matrix> {
    let s = 1.0 / 2.0_f64.sqrt();
    let mut basis = Vec::with_capacity(n * (n - 1) / 2);
    for a in 0..n {
        for b in (a + 1)..n {
            let mut m = Matrix::zeros(n, n);
            m[(a, b)] = -s;
            m[(b, a)] = s;
            basis.push(m);
        }
    }
    basis
}

// ---------------------------------------------------------------------------
// Exponentials
// ---------------------------------------------------------------------------

/// Matrix exponential by scaling and squaring with a degree-13 Pade
/// approximant. Total on finite inputs.
pub fn mat_exp(v: &Matrix) -> Matrix {
    assert_eq!(v.nrows(), v.ncols(), "mat_exp requires a square matrix");
    let n = v.nrows();
    let theta13 = 5.371920351148152;
    let norm = one_norm(v);
    let s = if norm > theta13 {
        (norm / theta13).log2().ceil() as i32
    } else {
        0
    };
    let a = v / 2f64.powi(s);

    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];

    let id = Matrix::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a2 * &a4;
    let u = &a
        * (&a6 * (&a6 * B[13] + &a4 * B[11] + &a2 * B[9])
            + &a6 * B[7]
            + &a4 * B[5]
            + &a2 * B[3]
            + &id * B[1]);
    let v_mat = &a6 * (&a6 * B[12] + &a4 * B[10] + &a2 * B[8])
        + &a6 * B[6]
        + &a4 * B[4]
        + &a2 * B[2]
        + &id * B[0];

    let mut r = (&v_mat - &u)
        .lu()
        .solve(&(&v_mat + &u))
        .expect("Pade denominator of the matrix exponential is invertible");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

fn one_norm(m: &Matrix) -> f64 {
    let mut best = 0.0;
    for j in 0..m.ncols() {
        let s: f64 = m.column(j).iter().map(|x| x.abs()).sum();
        if s > best {
            best = s;
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Logarithms
// ---------------------------------------------------------------------------

/// Principal logarithm of a rotation: the skew matrix of smallest Frobenius
/// norm with `mat_exp(result) = R`.
///
/// Closed forms for n <= 3, a real Schur reduction otherwise. If any rotation
/// angle equals pi within [`ANGLE_PI_TOL`] the branch is not unique and
/// [`Error::AmbiguousLog`] is returned.
pub fn so_log(r: &GroupElement) -> Result<AlgebraVector> {
    so_log_impl(r, false)
}

/// As [`so_log`], but at angle pi the +pi branch (with a deterministic axis
/// sign) is returned instead of an error. Iterative solvers that only need
/// *a* logarithm of a fiber defect use this.
pub(crate) fn so_log_any_branch(r: &GroupElement) -> Result<AlgebraVector> {
    so_log_impl(r, true)
}

fn so_log_impl(r: &GroupElement, allow_pi: bool) -> Result<AlgebraVector> {
    if r.group() != Group::SpecialOrthogonal {
        return Err(Error::GroupMismatch(format!(
            "so_log expects SO(n), got {}",
            r.group().name()
        )));
    }
    let n = r.dim();
    let m = r.matrix();
    let log = match n {
        1 => Matrix::zeros(1, 1),
        2 => {
            let theta = m[(1, 0)].atan2(m[(0, 0)]);
            if (std::f64::consts::PI - theta.abs()) < ANGLE_PI_TOL {
                if !allow_pi {
                    return Err(Error::AmbiguousLog);
                }
                let pi = std::f64::consts::PI;
                Matrix::from_row_slice(2, 2, &[0.0, -pi, pi, 0.0])
            } else {
                Matrix::from_row_slice(2, 2, &[0.0, -theta, theta, 0.0])
            }
        }
        3 => so3_log(m, allow_pi)?,
        _ => son_log_schur(m, allow_pi)?,
    };
    Ok(AlgebraVector::new_unchecked(
        Group::SpecialOrthogonal,
        Subspace::Full,
        log,
    ))
}

fn so3_log(m: &Matrix, allow_pi: bool) -> Result<Matrix> {
    let c = ((m.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let theta = c.acos();
    if std::f64::consts::PI - theta < ANGLE_PI_TOL && !allow_pi {
        return Err(Error::AmbiguousLog);
    }
    let skew = skew_part(m);
    if theta < 1e-4 {
        // theta/sin(theta) expanded to keep full precision near zero
        let t2 = theta * theta;
        let f = 1.0 + t2 / 6.0 + 7.0 * t2 * t2 / 360.0;
        return Ok(skew * f);
    }
    if theta < 3.0 * std::f64::consts::FRAC_PI_4 {
        return Ok(skew * (theta / theta.sin()));
    }
    // Near pi the skew part loses accuracy; recover the axis from the
    // symmetric part and the signs from the skew part.
    let one_minus_c = 1.0 - c;
    let b = sym_part(m);
    let mut axis = [0.0f64; 3];
    for (i, a) in axis.iter_mut().enumerate() {
        *a = ((b[(i, i)] - c) / one_minus_c).max(0.0).sqrt();
    }
    let j = (0..3)
        .max_by(|&p, &q| axis[p].partial_cmp(&axis[q]).unwrap())
        .unwrap();
    for i in 0..3 {
        if i != j {
            axis[i] = (b[(i, j)] - if i == j { c } else { 0.0 }) / (one_minus_c * axis[j]);
        }
    }
    // w holds sin(theta) * axis, read off the skew part
    let w = [skew[(2, 1)], skew[(0, 2)], skew[(1, 0)]];
    if w[0] * axis[0] + w[1] * axis[1] + w[2] * axis[2] < 0.0 {
        for a in axis.iter_mut() {
            *a = -*a;
        }
    }
    let norm = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let (x, y, z) = (axis[0] / norm, axis[1] / norm, axis[2] / norm);
    Ok(Matrix::from_row_slice(
        3,
        3,
        &[
            0.0,
            -theta * z,
            theta * y,
            theta * z,
            0.0,
            -theta * x,
            -theta * y,
            theta * x,
            0.0,
        ],
    ))
}

/// General-n rotation log through the real Schur form: an orthogonal matrix
/// reduces to a block diagonal of 2x2 rotation blocks and +-1 entries.
fn son_log_schur(m: &Matrix, allow_pi: bool) -> Result<Matrix> {
    let n = m.nrows();
    let schur = nalgebra::linalg::Schur::try_new(m.clone(), f64::EPSILON, 0).ok_or_else(|| {
        Error::NoConvergence {
            context: "real Schur reduction of a rotation".into(),
            iterations: 0,
            residual: f64::NAN,
        }
    })?;
    let (q, t) = schur.unpack();
    let mut s = Matrix::zeros(n, n);
    let mut minus_one_cols: Vec<usize> = Vec::new();
    let mut i = 0;
    while i < n {
        let is_block = i + 1 < n && t[(i + 1, i)].abs() > 1e-12;
        if is_block {
            let c = (t[(i, i)] + t[(i + 1, i + 1)]) * 0.5;
            let sn = (t[(i + 1, i)] - t[(i, i + 1)]) * 0.5;
            let theta = sn.atan2(c);
            if (std::f64::consts::PI - theta.abs()) < ANGLE_PI_TOL && !allow_pi {
                return Err(Error::AmbiguousLog);
            }
            s[(i, i + 1)] = -theta;
            s[(i + 1, i)] = theta;
            i += 2;
        } else {
            if t[(i, i)] < 0.0 {
                // a -1 eigenvalue pairs with another -1: a rotation by pi
                if !allow_pi {
                    return Err(Error::AmbiguousLog);
                }
                minus_one_cols.push(i);
            }
            i += 1;
        }
    }
    // pair up -1 eigenvalues into half-turn planes, in encounter order
    for pair in minus_one_cols.chunks(2) {
        if let [a, b] = pair {
            s[(*a, *b)] = -std::f64::consts::PI;
            s[(*b, *a)] = std::f64::consts::PI;
        }
    }
    Ok(skew_part(&(&q * s * q.transpose())))
}

/// Canonical-form rotation angles of an SO(n) element, each in [0, pi].
///
/// The Frobenius norm of any logarithm branch of R is sqrt(2 sum theta_i^2),
/// so this is total even where [`so_log`] reports an ambiguous branch.
pub fn so_rotation_angles(r: &GroupElement) -> Result<Vec<f64>> {
    if r.group() != Group::SpecialOrthogonal {
        return Err(Error::GroupMismatch(format!(
            "rotation angles expect SO(n), got {}",
            r.group().name()
        )));
    }
    let n = r.dim();
    let m = r.matrix();
    match n {
        1 => Ok(vec![]),
        2 => Ok(vec![m[(1, 0)].atan2(m[(0, 0)]).abs()]),
        3 => Ok(vec![((m.trace() - 1.0) * 0.5).clamp(-1.0, 1.0).acos()]),
        _ => {
            let schur = nalgebra::linalg::Schur::try_new(m.clone(), f64::EPSILON, 0)
                .ok_or_else(|| Error::NoConvergence {
                    context: "real Schur reduction of a rotation".into(),
                    iterations: 0,
                    residual: f64::NAN,
                })?;
            let (_, t) = schur.unpack();
            let mut angles = Vec::new();
            let mut minus_ones = 0usize;
            let mut i = 0;
            while i < n {
                if i + 1 < n && t[(i + 1, i)].abs() > 1e-12 {
                    let c = (t[(i, i)] + t[(i + 1, i + 1)]) * 0.5;
                    let s = (t[(i + 1, i)] - t[(i, i + 1)]) * 0.5;
                    angles.push(s.atan2(c).abs());
                    i += 2;
                } else {
                    if t[(i, i)] < 0.0 {
                        minus_ones += 1;
                    }
                    i += 1;
                }
            }
            // -1 eigenvalues of a rotation pair up into half-turn planes
            angles.extend(std::iter::repeat_n(std::f64::consts::PI, minus_ones / 2));
            Ok(angles)
        }
    }
}

/// Geodesic distance from the identity on SO(n): sqrt(2 sum theta_i^2).
/// Unlike the norm of [`so_log`], this is defined at angle pi as well.
pub fn so_distance_from_identity(r: &GroupElement) -> Result<f64> {
    let angles = so_rotation_angles(r)?;
    Ok((2.0 * angles.iter().map(|a| a * a).sum::<f64>()).sqrt())
}

/// Symmetric positive definite square root via eigendecomposition.
pub fn spd_sqrt(p: &Matrix) -> Result<Matrix> {
    spd_map(p, f64::sqrt, "spd_sqrt")
}

/// Symmetric logarithm of a symmetric positive definite matrix.
pub fn spd_log(p: &Matrix) -> Result<Matrix> {
    spd_map(p, f64::ln, "spd_log")
}

fn spd_map(p: &Matrix, f: fn(f64) -> f64, context: &str) -> Result<Matrix> {
    if p.nrows() != p.ncols() {
        return Err(Error::DimMismatch(format!(
            "{context} requires a square matrix"
        )));
    }
    let asym = (p - p.transpose()).norm();
    if asym > 1e-8 * (1.0 + p.norm()) {
        return Err(Error::NotSpd(format!(
            "asymmetry {asym:.3e} in input of {context}"
        )));
    }
    let eig = SymmetricEigen::new(sym_part(p));
    let min = eig.eigenvalues.min();
    if min <= 0.0 {
        return Err(Error::NotSpd(format!(
            "smallest eigenvalue {min:.3e} in input of {context}"
        )));
    }
    let mapped = Matrix::from_diagonal(&eig.eigenvalues.map(f));
    Ok(sym_part(
        &(&eig.eigenvectors * mapped * eig.eigenvectors.transpose()),
    ))
}

/// Principal real logarithm of a general matrix with no eigenvalues on the
/// closed negative real axis: inverse scaling and squaring with
/// Denman-Beavers square roots and a Gauss-Legendre Pade evaluation.
pub fn real_log(m: &Matrix) -> Result<Matrix> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::DimMismatch("real_log requires a square matrix".into()));
    }
    if n == 2 {
        return real_log_2x2(m);
    }
    // symmetric positive definite inputs get the exact eigendecomposition path
    if (m - m.transpose()).norm() <= 1e-12 * (1.0 + m.norm()) {
        let eig = SymmetricEigen::new(sym_part(m));
        if eig.eigenvalues.min() > 0.0 {
            let mapped = Matrix::from_diagonal(&eig.eigenvalues.map(f64::ln));
            return Ok(sym_part(
                &(&eig.eigenvectors * mapped * eig.eigenvectors.transpose()),
            ));
        }
    }

    let id = Matrix::identity(n, n);
    let mut y = m.clone();
    let mut halvings = 0u32;
    while (&y - &id).norm() > 0.15 {
        if halvings >= 40 {
            return Err(Error::NoConvergence {
                context: "matrix logarithm square-root stage".into(),
                iterations: halvings as usize,
                residual: (&y - &id).norm(),
            });
        }
        y = denman_beavers_sqrt(&y)?;
        halvings += 1;
    }

    // 8-point Gauss-Legendre nodes/weights on [0,1]; their Pade form of
    // log(1+x) is accurate to machine precision for ||x|| <= 0.15
    const NODES: [f64; 8] = [
        0.019855071751231884,
        0.10166676129318664,
        0.2372337950418355,
        0.40828267875217505,
        0.591717321247825,
        0.7627662049581645,
        0.8983332387068134,
        0.9801449282487681,
    ];
    const WEIGHTS: [f64; 8] = [
        0.05061426814518813,
        0.11119051722668723,
        0.15685332293894372,
        0.18134189168918097,
        0.18134189168918097,
        0.15685332293894372,
        0.11119051722668723,
        0.05061426814518813,
    ];

    let x = &y - &id;
    let mut log = Matrix::zeros(n, n);
    for (&node, &weight) in NODES.iter().zip(WEIGHTS.iter()) {
        let denom = &id + &x * node;
        let term = denom
            .lu()
            .solve(&x)
            .ok_or(Error::SingularJacobian)?;
        log += term * weight;
    }
    Ok(log * 2f64.powi(halvings as i32))
}

/// Closed-form principal log of a 2x2 real matrix, by its characteristic
/// polynomial: log A = c0 I + c1 A for scalars read off the spectrum.
fn real_log_2x2(m: &Matrix) -> Result<Matrix> {
    let tau = m.trace();
    let delta = m.determinant();
    if delta <= 0.0 {
        return Err(Error::NoConvergence {
            context: "2x2 logarithm of a matrix with nonpositive determinant".into(),
            iterations: 0,
            residual: delta,
        });
    }
    let half = tau * 0.5;
    let disc = half * half - delta;
    let id = Matrix::identity(2, 2);

    if disc > 1e-14 * delta.max(1.0) {
        // two real eigenvalues
        let root = disc.sqrt();
        let lo = half - root;
        let hi = half + root;
        if lo <= 0.0 {
            return Err(Error::NoConvergence {
                context: "2x2 logarithm with a negative real eigenvalue".into(),
                iterations: 0,
                residual: lo,
            });
        }
        let gap = hi - lo;
        // log(hi) - log(lo) evaluated stably as log1p(gap/lo)
        let c1 = (gap / lo).ln_1p() / gap;
        let c0 = hi.ln() - c1 * hi;
        Ok(&id * c0 + m * c1)
    } else if disc >= -1e-14 * delta.max(1.0) {
        // a repeated positive eigenvalue
        Ok(&id * (half.ln() - 1.0) + m * (1.0 / half))
    } else {
        // complex pair r exp(+-i theta)
        let mu = (-disc).sqrt();
        let r = delta.sqrt();
        let theta = mu.atan2(half);
        if std::f64::consts::PI - theta < 1e-12 {
            return Err(Error::NoConvergence {
                context: "2x2 logarithm at a half-turn spectrum".into(),
                iterations: 0,
                residual: std::f64::consts::PI - theta,
            });
        }
        let c1 = theta / mu;
        Ok(&id * (r.ln() - c1 * half) + m * c1)
    }
}

/// Principal square root of a real matrix with no eigenvalues on the closed
/// negative real axis, by the coupled Denman-Beavers iteration.
fn denman_beavers_sqrt(a: &Matrix) -> Result<Matrix> {
    let n = a.nrows();
    let mut y = a.clone();
    let mut z = Matrix::identity(n, n);
    for _ in 0..60 {
        let yi = y.clone().try_inverse().ok_or_else(|| Error::NoConvergence {
            context: "matrix square root: singular iterate".into(),
            iterations: 0,
            residual: f64::NAN,
        })?;
        let zi = z.clone().try_inverse().ok_or_else(|| Error::NoConvergence {
            context: "matrix square root: singular iterate".into(),
            iterations: 0,
            residual: f64::NAN,
        })?;
        let y_next = (&y + zi) * 0.5;
        let z_next = (&z + yi) * 0.5;
        let increment = (&y_next - &y).norm();
        y = y_next;
        z = z_next;
        if increment <= 1e-15 * (1.0 + y.norm()) {
            return Ok(y);
        }
    }
    let residual = (&y * &y - a).norm();
    if residual < 1e-10 * (1.0 + a.norm()) {
        Ok(y)
    } else {
        Err(Error::NoConvergence {
            context: "matrix square root".into(),
            iterations: 60,
            residual,
        })
    }
}

/// Lie-group logarithm of a group element: the skew log for SO(n), the
/// principal real matrix log for SL(n).
pub fn group_log(g: &GroupElement) -> Result<AlgebraVector> {
    match g.group() {
        Group::SpecialOrthogonal => so_log(g),
        Group::SpecialLinear => {
            let mut l = real_log(g.matrix())?;
            let n = l.nrows();
            let shift = l.trace() / n as f64;
            for i in 0..n {
                l[(i, i)] -= shift;
            }
            Ok(AlgebraVector::new_unchecked(
                Group::SpecialLinear,
                Subspace::Full,
                l,
            ))
        }
    }
}

// ---------------------------------------------------------------------------
// The Riemannian exponential on SL(n) and its iterative inverse
// ---------------------------------------------------------------------------

/// Riemannian exponential at the identity of SL(n) for the metric
/// tr(g^{-1}u (g^{-1}v)^t): v -> exp(v^t) exp(v - v^t).
pub fn sl_riemannian_exp(v: &AlgebraVector) -> Result<GroupElement> {
    if v.group() != Group::SpecialLinear {
        return Err(Error::GroupMismatch(format!(
            "sl_riemannian_exp expects sl(n), got {}",
            v.group().algebra_name()
        )));
    }
    let m = v.matrix();
    let b = mat_exp(&m.transpose()) * mat_exp(&(m - m.transpose()));
    GroupElement::new(Group::SpecialLinear, b)
}

/// Outcome of the iterative inverse exponential: the tangent vector plus the
/// number of Newton iterations that were needed.
#[derive(Debug, Clone)]
pub struct SlLog {
    pub vector: AlgebraVector,
    pub iterations: usize,
}

/// Inverse of [`sl_riemannian_exp`], solved iteratively.
///
/// Starting from the symmetric polar factor z = sqrt(B B^t), the fiber defect
/// v = log(F(z)^{-1} B) with F(z) = z exp(log(z^t) - log(z)) is driven to zero
/// by a Newton step in so(n), with the Jacobian of F approximated by central
/// finite differences and the step size chosen by backtracking. When the
/// Jacobian is numerically singular or no descent step exists, the iterate is
/// restarted from a small random rotation of z (at most five times) before
/// giving up.
pub fn sl_riemannian_log(b: &GroupElement) -> Result<SlLog> {
    if b.group() != Group::SpecialLinear {
        return Err(Error::GroupMismatch(format!(
            "sl_riemannian_log expects SL(n), got {}",
            b.group().name()
        )));
    }
    let n = b.dim();
    let bm = b.matrix();
    let basis = so_basis(n);

    let mut z = spd_sqrt(&(bm * bm.transpose()))?;
    let mut rng = StdRng::seed_from_u64(0x51_10);
    let mut restarts = 0usize;
    let mut iterations = 0usize;

    let mut defect = fiber_defect(&z, bm)?;
    loop {
        let dn = defect.norm();
        if dn < SL_LOG_TOL {
            let mut x = real_log(&z.transpose())?;
            let shift = x.trace() / n as f64;
            for i in 0..n {
                x[(i, i)] -= shift;
            }
            return Ok(SlLog {
                vector: AlgebraVector::new_unchecked(Group::SpecialLinear, Subspace::Full, x),
                iterations,
            });
        }
        if iterations >= SL_LOG_MAX_ITER {
            return Err(Error::NoConvergence {
                context: "inverse Riemannian exponential on SL(n)".into(),
                iterations,
                residual: dn,
            });
        }

        // Newton step from the finite-difference Jacobian of the fiber map
        // over an orthonormal so(n) basis; any numerical failure inside is a
        // reason to restart, not to abort
        let step_result = newton_step(&z, &defect, &basis);

        let mut stepped = false;
        let mut singular = false;
        match step_result {
            Ok(mut x) => {
                // trust region: oversized Newton steps rotate the iterate out
                // of the principal-log domain
                let xn = x.norm();
                if xn > 2.0 {
                    x *= 2.0 / xn;
                }
                let mut eps = 1.0;
                while eps > 1e-4 {
                    let z_try = &z * mat_exp(&(&x * eps));
                    // a trial point outside the log domain is a failed step,
                    // not a failure of the whole solve
                    if let Ok(d_try) = fiber_defect(&z_try, bm) {
                        if d_try.norm() < dn {
                            z = z_try;
                            defect = d_try;
                            stepped = true;
                            break;
                        }
                    }
                    eps *= 0.5;
                }
            }
            Err(Error::SingularJacobian) => singular = true,
            Err(_) => {}
        }

        if !stepped {
            if restarts >= 5 {
                if singular {
                    return Err(Error::SingularJacobian);
                }
                return Err(Error::NoConvergence {
                    context: "inverse Riemannian exponential on SL(n)".into(),
                    iterations,
                    residual: dn,
                });
            }
            // restart from a small random rotation of the iterate; retreat
            // towards the polar factor if even the defect fails there
            let mut recovered = false;
            for _ in 0..8 {
                let mut perturb = Matrix::zeros(n, n);
                for x_i in &basis {
                    perturb += x_i * (rng.gen::<f64>() - 0.5) * 0.1;
                }
                let z_try = &z * mat_exp(&perturb);
                if let Ok(d) = fiber_defect(&z_try, bm) {
                    z = z_try;
                    defect = d;
                    recovered = true;
                    break;
                }
            }
            if !recovered {
                z = spd_sqrt(&(bm * bm.transpose()))?;
                defect = fiber_defect(&z, bm)?;
            }
            restarts += 1;
        }
        iterations += 1;
    }
}

/// One Newton direction for the fiber solve: the Jacobian of the fiber map
/// by central finite differences in an orthonormal so(n) basis, applied to
/// the current defect.
fn newton_step(z: &Matrix, defect: &Matrix, basis: &[Matrix]) -> Result<Matrix> {
    let n = z.nrows();
    let k = basis.len();
    let fz = fiber_map(z)?;
    let fz_lu = fz.lu();
    let mut jac = Matrix::zeros(k, k);
    for (col, x_i) in basis.iter().enumerate() {
        let fp = fiber_map(&(z * mat_exp(&(x_i * SL_LOG_FD_STEP))))?;
        let fm = fiber_map(&(z * mat_exp(&(x_i * -SL_LOG_FD_STEP))))?;
        let diff = fz_lu
            .solve(&((fp - fm) / (2.0 * SL_LOG_FD_STEP)))
            .ok_or(Error::SingularJacobian)?;
        let d = skew_part(&diff);
        for (row, x_j) in basis.iter().enumerate() {
            jac[(row, col)] = d.dot(x_j);
        }
    }
    let rhs = nalgebra::DVector::from_iterator(k, basis.iter().map(|x_j| defect.dot(x_j)));
    let coords = jac.lu().solve(&rhs).ok_or(Error::SingularJacobian)?;
    if coords.iter().any(|c| !c.is_finite()) {
        return Err(Error::SingularJacobian);
    }
    let mut x = Matrix::zeros(n, n);
    for (c, x_i) in coords.iter().zip(basis.iter()) {
        x += x_i * *c;
    }
    Ok(x)
}

/// F(z) = z exp(log(z^t) - log(z)); maps the orbit B SO(n) to itself and
/// equals the Riemannian exponential of log(z^t).
fn fiber_map(z: &Matrix) -> Result<Matrix> {
    let lz = real_log(z)?;
    Ok(z * mat_exp(&(lz.transpose() - lz)))
}

/// Skew logarithm of the fiber mismatch between F(z) and the target. A
/// half-turn mismatch takes the +pi branch: any branch steers the iteration.
fn fiber_defect(z: &Matrix, target: &Matrix) -> Result<Matrix> {
    let fz = fiber_map(z)?;
    let c = fz.lu().solve(target).ok_or(Error::SingularJacobian)?;
    if c.iter().any(|x| !x.is_finite()) {
        return Err(Error::SingularJacobian);
    }
    // c is orthogonal up to roundoff; project onto SO(n) before taking the log
    let r = polar_rotation_factor(&c)?;
    let l = so_log_any_branch(&GroupElement::new_unchecked(Group::SpecialOrthogonal, r))?;
    Ok(l.into_matrix())
}

/// Rotation factor of the polar decomposition, via SVD.
pub(crate) fn polar_rotation_factor(m: &Matrix) -> Result<Matrix> {
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::NoConvergence {
            context: "polar projection of a non-finite matrix".into(),
            iterations: 0,
            residual: f64::NAN,
        });
    }
    let svd = nalgebra::SVD::new(m.clone(), true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => {
            return Err(Error::NoConvergence {
                context: "SVD in polar projection".into(),
                iterations: 0,
                residual: f64::NAN,
            })
        }
    };
    let mut r = &u * &v_t;
    if r.determinant() < 0.0 {
        // flip the smallest singular direction to land in SO(n)
        let n = m.nrows();
        let mut flip = Matrix::identity(n, n);
        flip[(n - 1, n - 1)] = -1.0;
        r = u * flip * v_t;
    }
    Ok(r)
}

// ---------------------------------------------------------------------------
// Riemannian exp/log dispatch and geodesic distance
// ---------------------------------------------------------------------------

/// Riemannian exponential at the identity for the group's metric.
pub fn riemannian_exp(v: &AlgebraVector) -> Result<GroupElement> {
    match v.group() {
        Group::SpecialOrthogonal => GroupElement::new(Group::SpecialOrthogonal, mat_exp(v.matrix())),
        Group::SpecialLinear => sl_riemannian_exp(v),
    }
}

/// Inverse Riemannian exponential at the identity: smallest-norm branch.
pub fn riemannian_log(g: &GroupElement) -> Result<AlgebraVector> {
    match g.group() {
        Group::SpecialOrthogonal => so_log(g),
        Group::SpecialLinear => Ok(sl_riemannian_log(g)?.vector),
    }
}

/// Geodesic distance on the group: by left invariance,
/// d(g1, g2) = || Log(g1^{-1} g2) ||.
pub fn group_distance(g1: &GroupElement, g2: &GroupElement) -> Result<f64> {
    g1.check_same(g2)?;
    let rel = g1.inverse().compose(g2)?;
    Ok(riemannian_log(&rel)?.norm())
}
