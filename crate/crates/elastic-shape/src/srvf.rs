//! The square-root-velocity transform on group-valued curves.
//!
//! Curves are generalized PL: a start element followed by one-parameter
//! subgroup segments on a uniform grid. Their transforms are step maps, and
//! every operation here (forward, inverse, reparametrization action) is
//! algebraically exact on that class, so roundtrips and invariances hold to
//! roundoff rather than quadrature accuracy.

use crate::error::{Error, Result};
use crate::matgroup::{
    group_log, mat_exp, riemannian_exp, riemannian_log, group_distance, Group, GroupElement,
    Matrix, Subspace, ZERO_VELOCITY_TOL,
};

/// N+1 group elements on the uniform grid t_i = i/N, read as the generalized
/// PL curve through them.
#[derive(Debug, Clone)]
pub struct DiscreteGroupCurve {
    samples: Vec<GroupElement>,
}

impl DiscreteGroupCurve {
    pub fn new(samples: Vec<GroupElement>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::DimMismatch(
                "a discrete curve needs at least two samples".into(),
            ));
        }
        for s in &samples[1..] {
            samples[0].check_same(s)?;
        }
        Ok(Self { samples })
    }

    pub fn group(&self) -> Group {
        self.samples[0].group()
    }

    pub fn dim(&self) -> usize {
        self.samples[0].dim()
    }

    /// Number of intervals N.
    pub fn intervals(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn samples(&self) -> &[GroupElement] {
        &self.samples
    }

    pub fn start(&self) -> &GroupElement {
        &self.samples[0]
    }

    /// Left translation g . alpha, applied samplewise.
    pub fn left_translate(&self, g: &GroupElement) -> Result<Self> {
        let samples = self
            .samples
            .iter()
            .map(|s| g.compose(s))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { samples })
    }
}

/// A map from `[0, 1]` into the Lie algebra that is constant on each interval of
/// a finite partition. The partition need not be uniform; exact
/// reparametrization pushforwards refine it.
#[derive(Debug, Clone)]
pub struct StepMap {
    group: Group,
    subspace: Subspace,
    breaks: Vec<f64>,
    values: Vec<Matrix>,
}

impl StepMap {
    pub fn new(
        group: Group,
        subspace: Subspace,
        breaks: Vec<f64>,
        values: Vec<Matrix>,
    ) -> Result<Self> {
        if breaks.len() != values.len() + 1 {
            return Err(Error::DimMismatch(format!(
                "{} breakpoints do not delimit {} values",
                breaks.len(),
                values.len()
            )));
        }
        if values.is_empty() {
            return Err(Error::DimMismatch("a step map needs at least one interval".into()));
        }
        if breaks[0] != 0.0 || *breaks.last().unwrap() != 1.0 {
            return Err(Error::DimMismatch(
                "step map breakpoints must start at 0 and end at 1".into(),
            ));
        }
        if breaks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::DimMismatch(
                "step map breakpoints must be strictly increasing".into(),
            ));
        }
        // group-valued transforms have square values; the flat baseline
        // stores column vectors, so only require one common shape
        let shape = values[0].shape();
        if values.iter().any(|v| v.shape() != shape) {
            return Err(Error::DimMismatch("step map values must share one shape".into()));
        }
        Ok(Self {
            group,
            subspace,
            breaks,
            values,
        })
    }

    /// Step map on the uniform partition with N = values.len() intervals.
    pub fn uniform(group: Group, subspace: Subspace, values: Vec<Matrix>) -> Result<Self> {
        let n = values.len();
        let breaks = (0..=n).map(|i| i as f64 / n as f64).collect();
        Self::new(group, subspace, breaks, values)
    }

    pub fn zero(group: Group, subspace: Subspace, dim: usize, intervals: usize) -> Self {
        let values = vec![Matrix::zeros(dim, dim); intervals];
        Self::uniform(group, subspace, values).unwrap()
    }

    pub fn group(&self) -> Group {
        self.group
    }

    pub fn subspace(&self) -> Subspace {
        self.subspace
    }

    pub fn dim(&self) -> usize {
        self.values[0].nrows()
    }

    pub fn value_shape(&self) -> (usize, usize) {
        self.values[0].shape()
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[Matrix] {
        &self.values
    }

    pub fn intervals(&self) -> usize {
        self.values.len()
    }

    pub fn is_uniform(&self) -> bool {
        let n = self.values.len();
        self.breaks
            .iter()
            .enumerate()
            .all(|(i, &b)| b == i as f64 / n as f64)
    }

    /// Value on the interval containing t (the right-open convention).
    pub fn value_at(&self, t: f64) -> &Matrix {
        let idx = match self
            .breaks
            .binary_search_by(|b| b.partial_cmp(&t).unwrap())
        {
            Ok(i) => i.min(self.values.len() - 1),
            Err(i) => i.saturating_sub(1).min(self.values.len() - 1),
        };
        &self.values[idx]
    }

    pub(crate) fn with_values(&self, values: Vec<Matrix>) -> Self {
        Self {
            group: self.group,
            subspace: self.subspace,
            breaks: self.breaks.clone(),
            values,
        }
    }

    pub(crate) fn retag(mut self, subspace: Subspace) -> Self {
        self.subspace = subspace;
        self
    }

    /// Conjugates every value: y^{-1} q y.
    pub fn conjugate(&self, y: &GroupElement) -> Result<Self> {
        if y.dim() != self.dim() {
            return Err(Error::DimMismatch(format!(
                "conjugator is {}x{}, step map values are {}x{}",
                y.dim(),
                y.dim(),
                self.dim(),
                self.dim()
            )));
        }
        let yinv = y.inverse();
        let values = self
            .values
            .iter()
            .map(|v| yinv.matrix() * v * y.matrix())
            .collect();
        Ok(self.with_values(values))
    }

    /// Refines this map onto a finer break list (which must contain all of
    /// this map's breakpoints).
    fn refined_values(&self, breaks: &[f64]) -> Vec<Matrix> {
        let mut out = Vec::with_capacity(breaks.len() - 1);
        let mut idx = 0usize;
        for w in breaks.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            while idx + 1 < self.values.len() && self.breaks[idx + 1] <= mid {
                idx += 1;
            }
            out.push(self.values[idx].clone());
        }
        out
    }

    /// L2 inner product, exact on the merged partition.
    pub fn l2_inner(&self, other: &Self) -> Result<f64> {
        if self.value_shape() != other.value_shape() {
            return Err(Error::DimMismatch(format!(
                "{} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        let breaks = merge_breaks(&self.breaks, &other.breaks);
        let a = self.refined_values(&breaks);
        let b = other.refined_values(&breaks);
        let mut acc = 0.0;
        for (k, w) in breaks.windows(2).enumerate() {
            acc += (w[1] - w[0]) * a[k].dot(&b[k]);
        }
        Ok(acc)
    }

    pub fn l2_norm(&self) -> f64 {
        let mut acc = 0.0;
        for (k, w) in self.breaks.windows(2).enumerate() {
            acc += (w[1] - w[0]) * self.values[k].dot(&self.values[k]);
        }
        acc.max(0.0).sqrt()
    }

    pub fn l2_dist(&self, other: &Self) -> Result<f64> {
        if self.value_shape() != other.value_shape() {
            return Err(Error::DimMismatch(format!(
                "{} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        let breaks = merge_breaks(&self.breaks, &other.breaks);
        let a = self.refined_values(&breaks);
        let b = other.refined_values(&breaks);
        let mut acc = 0.0;
        for (k, w) in breaks.windows(2).enumerate() {
            let d = &a[k] - &b[k];
            acc += (w[1] - w[0]) * d.dot(&d);
        }
        Ok(acc.max(0.0).sqrt())
    }

    /// L2-orthogonal projection onto the uniform partition with n intervals
    /// (interval averaging).
    pub fn resample_uniform(&self, n: usize) -> Self {
        let (rows, cols) = self.value_shape();
        let mut values = Vec::with_capacity(n);
        for i in 0..n {
            let lo = i as f64 / n as f64;
            let hi = (i + 1) as f64 / n as f64;
            let mut acc = Matrix::zeros(rows, cols);
            for (k, w) in self.breaks.windows(2).enumerate() {
                let a = w[0].max(lo);
                let b = w[1].min(hi);
                if b > a {
                    acc += &self.values[k] * (b - a);
                }
            }
            values.push(acc * n as f64);
        }
        Self::uniform(self.group, self.subspace, values).unwrap()
    }

    /// Pointwise convex combination (1-s) self + s other on the merged grid.
    pub fn lerp(&self, other: &Self, s: f64) -> Result<Self> {
        if self.value_shape() != other.value_shape() {
            return Err(Error::DimMismatch(format!(
                "{} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        let breaks = merge_breaks(&self.breaks, &other.breaks);
        let a = self.refined_values(&breaks);
        let b = other.refined_values(&breaks);
        let values = a
            .iter()
            .zip(b.iter())
            .map(|(x, y)| x * (1.0 - s) + y * s)
            .collect();
        Self::new(self.group, self.subspace, breaks, values)
    }
}

/// Refines two step maps onto their merged partition, returning the shared
/// breakpoints and both value lists.
pub(crate) fn common_refinement(
    a: &StepMap,
    b: &StepMap,
) -> crate::error::Result<(Vec<f64>, Vec<Matrix>, Vec<Matrix>)> {
    if a.value_shape() != b.value_shape() {
        return Err(Error::DimMismatch(format!("{} vs {}", a.dim(), b.dim())));
    }
    let breaks = merge_breaks(&a.breaks, &b.breaks);
    let va = a.refined_values(&breaks);
    let vb = b.refined_values(&breaks);
    Ok((breaks, va, vb))
}

/// Two breakpoints closer than this, relative to their position, are the
/// same mathematical point computed along different arithmetic routes.
/// Merging them removes integration slivers whose midpoint classification is
/// arbitrary, while keeping genuinely distinct breaks (which stay separated
/// on the scale of their position even after long pushforward cascades).
pub(crate) const BREAK_CLUSTER_REL: f64 = 1e-13;

/// Collapses clusters of nearly identical entries of a sorted list, keeping
/// the first element of each cluster and restoring the exact right endpoint.
pub(crate) fn dedup_clustered(sorted: &mut Vec<f64>) {
    if sorted.is_empty() {
        return;
    }
    let right = *sorted.last().unwrap();
    let mut out = 0usize;
    for i in 1..sorted.len() {
        let prev = sorted[out];
        let cur = sorted[i];
        if cur - prev > BREAK_CLUSTER_REL * cur.abs().max(prev.abs()) {
            out += 1;
            sorted[out] = cur;
        }
    }
    sorted.truncate(out + 1);
    *sorted.last_mut().unwrap() = right;
}

pub(crate) fn merge_breaks(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => {
                if x < y {
                    i += 1;
                    x
                } else if y < x {
                    j += 1;
                    y
                } else {
                    i += 1;
                    j += 1;
                    x
                }
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => break,
        };
        if out.last().is_none_or(|&l| next > l) {
            out.push(next);
        }
    }
    dedup_clustered(&mut out);
    out
}

/// The transform output: a start element plus a step map.
#[derive(Debug, Clone)]
pub struct SrvPair {
    pub start: GroupElement,
    pub q: StepMap,
}

impl SrvPair {
    pub fn new(start: GroupElement, q: StepMap) -> Result<Self> {
        if start.group() != q.group() {
            return Err(Error::GroupMismatch(format!(
                "start in {}, step map in {}",
                start.group().name(),
                q.group().algebra_name()
            )));
        }
        if start.dim() != q.dim() {
            return Err(Error::DimMismatch(format!(
                "start is {}x{}, step map values are {}x{}",
                start.dim(),
                start.dim(),
                q.dim(),
                q.dim()
            )));
        }
        Ok(Self { start, q })
    }
}

/// A piecewise-linear nondecreasing surjection of `[0, 1]` onto itself; slope
/// zero is allowed (an element of the monoid closure of the group of
/// reparametrizations).
#[derive(Debug, Clone)]
pub struct Reparametrization {
    knots: Vec<(f64, f64)>,
}

impl Reparametrization {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidGamma("need at least two knots".into()));
        }
        let first = knots[0];
        let last = *knots.last().unwrap();
        if first != (0.0, 0.0) || last != (1.0, 1.0) {
            return Err(Error::InvalidGamma(format!(
                "endpoints are {first:?} and {last:?}, expected (0,0) and (1,1)"
            )));
        }
        for w in knots.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidGamma(
                    "knot abscissae must be strictly increasing".into(),
                ));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::InvalidGamma("gamma must be nondecreasing".into()));
            }
        }
        Ok(Self { knots })
    }

    pub fn identity() -> Self {
        Self {
            knots: vec![(0.0, 0.0), (1.0, 1.0)],
        }
    }

    pub fn is_identity(&self) -> bool {
        self.knots.iter().all(|&(s, g)| s == g)
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn eval(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, 1.0);
        let mut lo = 0usize;
        let mut hi = self.knots.len() - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.knots[mid].0 <= s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (s0, g0) = self.knots[lo];
        let (s1, g1) = self.knots[hi];
        if s1 == s0 {
            return g0;
        }
        g0 + (g1 - g0) * (s - s0) / (s1 - s0)
    }

    /// Composition self(inner(s)); the knots are inner's knots together with
    /// the preimages of self's knots under inner.
    pub fn compose(&self, inner: &Self) -> Self {
        let mut abscissae: Vec<f64> = inner.knots.iter().map(|&(s, _)| s).collect();
        for seg in inner.knots.windows(2) {
            let (s0, g0) = seg[0];
            let (s1, g1) = seg[1];
            if g1 > g0 {
                for &(t, _) in &self.knots {
                    if t > g0 && t < g1 {
                        abscissae.push(s0 + (t - g0) * (s1 - s0) / (g1 - g0));
                    }
                }
            }
        }
        abscissae.sort_by(|a, b| a.partial_cmp(b).unwrap());
        dedup_clustered(&mut abscissae);
        let mut knots: Vec<(f64, f64)> = abscissae
            .into_iter()
            .map(|s| (s, self.eval(inner.eval(s))))
            .collect();
        // snap the endpoints exactly
        knots[0] = (0.0, 0.0);
        let n = knots.len();
        knots[n - 1] = (1.0, 1.0);
        Self { knots }
    }
}

// ---------------------------------------------------------------------------
// The transform and the actions on its image
// ---------------------------------------------------------------------------

/// Square-root-velocity transform of a discrete group curve.
///
/// Each interval contributes the left-trivialized PL velocity
/// v_i = N log(a_{i-1}^{-1} a_i), divided by the square root of its norm;
/// intervals with velocity below [`ZERO_VELOCITY_TOL`] map to zero.
pub fn srvf_forward(alpha: &DiscreteGroupCurve) -> Result<SrvPair> {
    let n = alpha.intervals();
    let mut values = Vec::with_capacity(n);
    for w in alpha.samples().windows(2) {
        let rel = w[0].inverse().compose(&w[1])?;
        let v = group_log(&rel)?.into_matrix() * n as f64;
        let norm = v.norm();
        if norm < ZERO_VELOCITY_TOL {
            values.push(Matrix::zeros(alpha.dim(), alpha.dim()));
        } else {
            values.push(v / norm.sqrt());
        }
    }
    SrvPair::new(
        alpha.start().clone(),
        StepMap::uniform(alpha.group(), Subspace::Full, values)?,
    )
}

/// Inverse transform: integrates the defining initial value problem, which is
/// exact for step maps.
pub fn srvf_inverse(pair: &SrvPair) -> DiscreteGroupCurve {
    let (breaks, samples) = integrate_pair(pair);
    debug_assert_eq!(breaks.len(), samples.len());
    DiscreteGroupCurve::new(samples).expect("integration preserves the group")
}

/// Integrates a (possibly non-uniform) pair, returning the curve samples at
/// the step map's breakpoints.
pub(crate) fn integrate_pair(pair: &SrvPair) -> (Vec<f64>, Vec<GroupElement>) {
    let group = pair.start.group();
    let mut samples = Vec::with_capacity(pair.q.intervals() + 1);
    samples.push(pair.start.clone());
    for (k, w) in pair.q.breaks().windows(2).enumerate() {
        let q = &pair.q.values()[k];
        let v = q * (q.norm() * (w[1] - w[0]));
        let next = samples.last().unwrap().matrix() * mat_exp(&v);
        samples.push(GroupElement::new_unchecked(group, next));
    }
    (pair.q.breaks().to_vec(), samples)
}

/// Reparametrization action (a0, q) * gamma = (a0, (q o gamma) sqrt(gamma')),
/// computed exactly on the refined partition.
pub fn gamma_act(q: &StepMap, gamma: &Reparametrization) -> Result<StepMap> {
    // output breakpoints: gamma's own knots plus preimages of q's breakpoints
    let mut breaks: Vec<f64> = gamma.knots().iter().map(|&(s, _)| s).collect();
    for seg in gamma.knots().windows(2) {
        let (s0, g0) = seg[0];
        let (s1, g1) = seg[1];
        if g1 > g0 {
            for &t in q.breaks() {
                if t > g0 && t < g1 {
                    breaks.push(s0 + (t - g0) * (s1 - s0) / (g1 - g0));
                }
            }
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    dedup_clustered(&mut breaks);

    let (rows, cols) = q.value_shape();
    let mut values = Vec::with_capacity(breaks.len() - 1);
    for w in breaks.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let g_lo = gamma.eval(w[0]);
        let g_hi = gamma.eval(w[1]);
        let slope = (g_hi - g_lo) / (w[1] - w[0]);
        if slope <= 0.0 {
            values.push(Matrix::zeros(rows, cols));
        } else {
            values.push(q.value_at(gamma.eval(mid)) * slope.sqrt());
        }
    }
    StepMap::new(q.group(), q.subspace(), breaks, values)
}

/// Left action of the group on the transform: g . (a0, q) = (g a0, q).
pub fn g_act(pair: &SrvPair, g: &GroupElement) -> Result<SrvPair> {
    pair.start.check_same(g)?;
    Ok(SrvPair {
        start: g.compose(&pair.start)?,
        q: pair.q.clone(),
    })
}

/// Geodesic distance on the product of the group and the space of step maps:
/// sqrt(d_G(a1(0), a2(0))^2 + ||q1 - q2||^2).
pub fn ac_distance(a1: &SrvPair, a2: &SrvPair) -> Result<f64> {
    a1.start.check_same(&a2.start)?;
    let dg = group_distance(&a1.start, &a2.start)?;
    let dq = a1.q.l2_dist(&a2.q)?;
    Ok((dg * dg + dq * dq).sqrt())
}

/// Point at parameter s on the product-space geodesic from a1 to a2: the
/// group geodesic between the starts paired with linear interpolation of the
/// step maps.
pub fn product_geodesic(a1: &SrvPair, a2: &SrvPair, s: f64) -> Result<SrvPair> {
    a1.start.check_same(&a2.start)?;
    let rel = a1.start.inverse().compose(&a2.start)?;
    let log = riemannian_log(&rel)?;
    let start = a1.start.compose(&riemannian_exp(&log.scale(s))?)?;
    let q = a1.q.lerp(&a2.q, s)?;
    SrvPair::new(start, q)
}
