//! Curve file formats: lat/lon CSV for the 2-sphere, coordinate CSV for
//! other spheres, half-plane and Euclidean data, and JSON for SPD sequences.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::homog::{DiscreteManifoldCurve, HomogeneousSpace, ManifoldPoint};
use crate::matgroup::Matrix;

/// The space a command operates on, as selected by `--space`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceSpec {
    /// S^n; n = 2 uses latitude/longitude files, other n coordinate files.
    Sphere(usize),
    /// The hyperbolic plane: planar upper-half-plane files carried on
    /// PDSM(2) internally.
    H2,
    /// PDSM(n) with JSON matrix files.
    Pdsm(usize),
    /// Flat R^n (the classical baseline).
    Euclidean(usize),
}

impl SpaceSpec {
    pub fn homogeneous(&self) -> Option<HomogeneousSpace> {
        match self {
            SpaceSpec::Sphere(n) => Some(HomogeneousSpace::sphere(*n)),
            SpaceSpec::H2 => Some(HomogeneousSpace::pdsm(2)),
            SpaceSpec::Pdsm(n) => Some(HomogeneousSpace::pdsm(*n)),
            SpaceSpec::Euclidean(_) => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            SpaceSpec::Sphere(2) => "s2".into(),
            SpaceSpec::Sphere(n) => format!("sn:{n}"),
            SpaceSpec::H2 => "h2".into(),
            SpaceSpec::Pdsm(n) => format!("pdsm:{n}"),
            SpaceSpec::Euclidean(n) => format!("r:{n}"),
        }
    }
}

impl FromStr for SpaceSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |s: &str| Error::Parse {
            path: "--space".into(),
            line: 0,
            detail: format!(
                "unknown space {s:?}; expected s2, sn:<n>, h2, pdsm:<n> or r:<n>"
            ),
        };
        if s == "s2" {
            return Ok(SpaceSpec::Sphere(2));
        }
        if s == "h2" {
            return Ok(SpaceSpec::H2);
        }
        if let Some(n) = s.strip_prefix("sn:") {
            let n: usize = n.parse().map_err(|_| bad(s))?;
            if n < 1 {
                return Err(bad(s));
            }
            return Ok(SpaceSpec::Sphere(n));
        }
        if let Some(n) = s.strip_prefix("pdsm:") {
            let n: usize = n.parse().map_err(|_| bad(s))?;
            if n < 2 {
                return Err(bad(s));
            }
            return Ok(SpaceSpec::Pdsm(n));
        }
        if let Some(n) = s.strip_prefix("r:") {
            let n: usize = n.parse().map_err(|_| bad(s))?;
            if n < 1 {
                return Err(bad(s));
            }
            return Ok(SpaceSpec::Euclidean(n));
        }
        Err(bad(s))
    }
}

/// Which quotient the `dist` command reports, per `--quotient`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quotient {
    /// Parametrized curves: optimize over K only.
    Param,
    /// Unparametrized curves: optimize over K and reparametrizations.
    Shape,
    /// Curves modulo the isometry group: the velocity term only.
    ModG,
    /// Shapes modulo the isometry group.
    ShapeModG,
}

impl FromStr for Quotient {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "param" => Ok(Quotient::Param),
            "shape" => Ok(Quotient::Shape),
            "mod-g" => Ok(Quotient::ModG),
            "shape-mod-g" => Ok(Quotient::ShapeModG),
            _ => Err(Error::Parse {
                path: "--quotient".into(),
                line: 0,
                detail: format!(
                    "unknown quotient {s:?}; expected param, shape, mod-g or shape-mod-g"
                ),
            }),
        }
    }
}

/// Curve payload of a file: points on a homogeneous space or a flat polyline.
#[derive(Debug, Clone)]
pub enum CurveData {
    Manifold(DiscreteManifoldCurve),
    Planar(Vec<DVector<f64>>),
}

impl CurveData {
    pub fn len(&self) -> usize {
        match self {
            CurveData::Manifold(c) => c.len(),
            CurveData::Planar(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn manifold(&self) -> Result<&DiscreteManifoldCurve> {
        match self {
            CurveData::Manifold(c) => Ok(c),
            CurveData::Planar(_) => Err(Error::GroupMismatch(
                "expected a curve on a homogeneous space, got planar data".into(),
            )),
        }
    }

    pub fn planar(&self) -> Result<&[DVector<f64>]> {
        match self {
            CurveData::Planar(p) => Ok(p),
            CurveData::Manifold(_) => Err(Error::GroupMismatch(
                "expected planar data, got a curve on a homogeneous space".into(),
            )),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct SpdFile {
    dim: usize,
    /// Row-major n*n entries per sample.
    matrices: Vec<Vec<f64>>,
}

/// Reads a curve file in the format implied by the space: lat/lon CSV for
/// s2, coordinate CSV for `sn:<n>`, upper-half-plane CSV for h2, JSON for
/// `pdsm:<n>`, plain CSV for `r:<n>`.
pub fn ingest(path: &Path, spec: SpaceSpec) -> Result<CurveData> {
    match spec {
        SpaceSpec::Sphere(2) => ingest_latlon(path),
        SpaceSpec::Sphere(n) => ingest_sphere_coords(path, n),
        SpaceSpec::H2 => ingest_half_plane(path),
        SpaceSpec::Pdsm(n) => ingest_spd(path, n),
        SpaceSpec::Euclidean(n) => Ok(CurveData::Planar(ingest_csv_rows(path, n)?)),
    }
}

fn parse_row(path: &Path, line_no: usize, line: &str, cols: usize) -> Result<Vec<f64>> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != cols {
        return Err(Error::Parse {
            path: path.display().to_string(),
            line: line_no,
            detail: format!("expected {cols} comma-separated values, got {}", fields.len()),
        });
    }
    fields
        .iter()
        .map(|f| {
            f.parse::<f64>().map_err(|_| Error::Parse {
                path: path.display().to_string(),
                line: line_no,
                detail: format!("not a number: {f:?}"),
            })
        })
        .collect()
}

fn read_csv(path: &Path, cols: usize) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        rows.push(parse_row(path, i + 1, trimmed, cols)?);
    }
    if rows.len() < 2 {
        return Err(Error::Parse {
            path: path.display().to_string(),
            line: 0,
            detail: "a curve file needs at least two samples".into(),
        });
    }
    Ok(rows)
}

fn ingest_csv_rows(path: &Path, cols: usize) -> Result<Vec<DVector<f64>>> {
    Ok(read_csv(path, cols)?
        .into_iter()
        .map(DVector::from_vec)
        .collect())
}

fn ingest_latlon(path: &Path) -> Result<CurveData> {
    let rows = read_csv(path, 2)?;
    let mut samples = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let (lat, lon) = (row[0], row[1]);
        if lat.abs() > 90.0 {
            return Err(Error::ConstraintViolation {
                index: i,
                detail: format!("latitude {lat} out of [-90, 90]"),
            });
        }
        let (lat_r, lon_r) = (lat.to_radians(), lon.to_radians());
        samples.push(ManifoldPoint::Sphere(DVector::from_vec(vec![
            lat_r.cos() * lon_r.cos(),
            lat_r.cos() * lon_r.sin(),
            lat_r.sin(),
        ])));
    }
    Ok(CurveData::Manifold(DiscreteManifoldCurve::new(
        HomogeneousSpace::sphere(2),
        samples,
    )?))
}

fn ingest_sphere_coords(path: &Path, n: usize) -> Result<CurveData> {
    let rows = read_csv(path, n + 1)?;
    let mut samples = Vec::with_capacity(rows.len());
    for (i, row) in rows.into_iter().enumerate() {
        let mut v = DVector::from_vec(row);
        let norm = v.norm();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(Error::ConstraintViolation {
                index: i,
                detail: format!("vector norm {norm} is not 1"),
            });
        }
        v /= norm;
        samples.push(ManifoldPoint::Sphere(v));
    }
    Ok(CurveData::Manifold(DiscreteManifoldCurve::new(
        HomogeneousSpace::sphere(n),
        samples,
    )?))
}

/// The identification of the upper half plane with PDSM(2) used throughout:
/// z = x + iy maps to (1/y) [[x^2 + y^2, x], [x, 1]].
pub fn half_plane_to_spd(x: f64, y: f64) -> Matrix {
    Matrix::from_row_slice(2, 2, &[(x * x + y * y) / y, x / y, x / y, 1.0 / y])
}

/// Inverse of [`half_plane_to_spd`]: x = P12 / P22, y = 1 / P22.
pub fn spd_to_half_plane(p: &Matrix) -> (f64, f64) {
    (p[(0, 1)] / p[(1, 1)], 1.0 / p[(1, 1)])
}

fn ingest_half_plane(path: &Path) -> Result<CurveData> {
    let rows = read_csv(path, 2)?;
    let mut samples = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let (x, y) = (row[0], row[1]);
        if y <= 0.0 {
            return Err(Error::ConstraintViolation {
                index: i,
                detail: format!("half-plane point needs y > 0, got y = {y}"),
            });
        }
        samples.push(ManifoldPoint::Spd(half_plane_to_spd(x, y)));
    }
    Ok(CurveData::Manifold(DiscreteManifoldCurve::new(
        HomogeneousSpace::pdsm(2),
        samples,
    )?))
}

fn ingest_spd(path: &Path, n: usize) -> Result<CurveData> {
    let text = std::fs::read_to_string(path)?;
    let file: SpdFile = serde_json::from_str(&text)?;
    if file.dim != n {
        return Err(Error::ConstraintViolation {
            index: 0,
            detail: format!("file holds {}x{} matrices, space wants {n}x{n}", file.dim, file.dim),
        });
    }
    let mut samples = Vec::with_capacity(file.matrices.len());
    for (i, entries) in file.matrices.iter().enumerate() {
        if entries.len() != n * n {
            return Err(Error::ConstraintViolation {
                index: i,
                detail: format!("expected {} entries, got {}", n * n, entries.len()),
            });
        }
        let mut m = Matrix::from_row_slice(n, n, entries);
        let asym = (&m - m.transpose()).norm();
        if asym > 1e-8 * (1.0 + m.norm()) {
            return Err(Error::ConstraintViolation {
                index: i,
                detail: format!("matrix is not symmetric (defect {asym:.3e})"),
            });
        }
        m = (&m + m.transpose()) * 0.5;
        let det = m.determinant();
        if det <= 0.0 {
            return Err(Error::ConstraintViolation {
                index: i,
                detail: format!("matrix determinant {det} is not positive"),
            });
        }
        // normalize to the unit-determinant leaf
        m *= det.powf(-1.0 / n as f64);
        samples.push(ManifoldPoint::Spd(m));
    }
    Ok(CurveData::Manifold(DiscreteManifoldCurve::new(
        HomogeneousSpace::pdsm(n),
        samples,
    )?))
}

/// Writes a curve back in the same format `ingest` reads for the space.
pub fn emit(path: &Path, data: &CurveData, spec: SpaceSpec) -> Result<()> {
    let text = render(data, spec)?;
    std::fs::write(path, text)?;
    Ok(())
}

/// Renders a curve in the format of the space; numbers use the shortest
/// representation that round-trips through f64.
pub fn render(data: &CurveData, spec: SpaceSpec) -> Result<String> {
    let mut out = String::new();
    match (spec, data) {
        (SpaceSpec::Sphere(2), CurveData::Manifold(c)) => {
            for p in c.samples() {
                let ManifoldPoint::Sphere(v) = p else { unreachable!() };
                let lat = v[2].clamp(-1.0, 1.0).asin().to_degrees();
                let lon = v[1].atan2(v[0]).to_degrees();
                writeln!(out, "{lat},{lon}").unwrap();
            }
        }
        (SpaceSpec::Sphere(_), CurveData::Manifold(c)) => {
            for p in c.samples() {
                let ManifoldPoint::Sphere(v) = p else { unreachable!() };
                let coords: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                writeln!(out, "{}", coords.join(",")).unwrap();
            }
        }
        (SpaceSpec::H2, CurveData::Manifold(c)) => {
            for p in c.samples() {
                let ManifoldPoint::Spd(m) = p else { unreachable!() };
                let (x, y) = spd_to_half_plane(m);
                writeln!(out, "{x},{y}").unwrap();
            }
        }
        (SpaceSpec::Pdsm(n), CurveData::Manifold(c)) => {
            let matrices: Vec<Vec<f64>> = c
                .samples()
                .iter()
                .map(|p| {
                    let ManifoldPoint::Spd(m) = p else { unreachable!() };
                    m.transpose().as_slice().to_vec()
                })
                .collect();
            out = serde_json::to_string_pretty(&SpdFile { dim: n, matrices })?;
            out.push('\n');
        }
        (SpaceSpec::Euclidean(_), CurveData::Planar(points)) => {
            for p in points {
                let coords: Vec<String> = p.iter().map(|x| x.to_string()).collect();
                writeln!(out, "{}", coords.join(",")).unwrap();
            }
        }
        _ => {
            return Err(Error::GroupMismatch(
                "curve payload does not match the output space".into(),
            ))
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn space_spec_parses() {
        assert_eq!("s2".parse::<SpaceSpec>().unwrap(), SpaceSpec::Sphere(2));
        assert_eq!("sn:4".parse::<SpaceSpec>().unwrap(), SpaceSpec::Sphere(4));
        assert_eq!("h2".parse::<SpaceSpec>().unwrap(), SpaceSpec::H2);
        assert_eq!("pdsm:3".parse::<SpaceSpec>().unwrap(), SpaceSpec::Pdsm(3));
        assert_eq!("r:2".parse::<SpaceSpec>().unwrap(), SpaceSpec::Euclidean(2));
        assert!("q:7".parse::<SpaceSpec>().is_err());
        assert!("pdsm:1".parse::<SpaceSpec>().is_err());
    }

    #[test]
    fn latlon_poles_and_origin() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("track.csv");
        std::fs::write(&path, "90,123\n0,0\n45,90\n").unwrap();
        let data = ingest(&path, SpaceSpec::Sphere(2)).unwrap();
        let curve = data.manifold().unwrap();
        let ManifoldPoint::Sphere(p0) = &curve.samples()[0] else { unreachable!() };
        assert!((p0 - DVector::from_vec(vec![0.0, 0.0, 1.0])).norm() < 1e-12);
        let ManifoldPoint::Sphere(p1) = &curve.samples()[1] else { unreachable!() };
        assert!((p1 - DVector::from_vec(vec![1.0, 0.0, 0.0])).norm() < 1e-12);
    }

    #[test]
    fn latlon_rejects_bad_latitude() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("track.csv");
        std::fs::write(&path, "91,0\n0,0\n").unwrap();
        assert!(matches!(
            ingest(&path, SpaceSpec::Sphere(2)),
            Err(Error::ConstraintViolation { index: 0, .. })
        ));
    }

    #[test]
    fn spd_normalizes_determinant() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("spd.json");
        // diag(2,2,2) has determinant 8 and is rescaled by 1/2
        let file = r#"{"dim":3,"matrices":[[2,0,0,0,2,0,0,0,2],[1,0,0,0,1,0,0,0,1]]}"#;
        std::fs::write(&path, file).unwrap();
        let data = ingest(&path, SpaceSpec::Pdsm(3)).unwrap();
        let curve = data.manifold().unwrap();
        let ManifoldPoint::Spd(m) = &curve.samples()[0] else { unreachable!() };
        assert!((m - Matrix::identity(3, 3)).norm() < 1e-12);
    }

    #[test]
    fn roundtrip_all_formats() {
        let mut rng = synth::rng(101);
        let dir = tempfile::tempdir().unwrap();

        for spec in [SpaceSpec::Sphere(2), SpaceSpec::H2, SpaceSpec::Pdsm(3)] {
            let space = spec.homogeneous().unwrap();
            let curve = synth::random_manifold_curve(&mut rng, &space, 12, 3, 0.0);
            let data = CurveData::Manifold(curve.clone());
            let path = dir.path().join(format!("c_{}.dat", spec.label().replace(':', "_")));
            emit(&path, &data, spec).unwrap();
            let back = ingest(&path, spec).unwrap();
            let gap = back.manifold().unwrap().max_pointwise_gap(&curve).unwrap();
            assert!(gap < 1e-12, "{} roundtrip gap {gap:.3e}", spec.label());
        }

        let planar = synth::random_euclidean_curve(&mut rng, 2, 10);
        let path = dir.path().join("flat.csv");
        emit(&path, &CurveData::Planar(planar.clone()), SpaceSpec::Euclidean(2)).unwrap();
        let back = ingest(&path, SpaceSpec::Euclidean(2)).unwrap();
        for (a, b) in planar.iter().zip(back.planar().unwrap()) {
            assert_eq!(a, b, "flat emission must round-trip exactly");
        }
    }

    #[test]
    fn half_plane_identification() {
        let p = half_plane_to_spd(0.0, 1.0);
        assert!((&p - Matrix::identity(2, 2)).norm() < 1e-15);
        let mut rng = synth::rng(102);
        for _ in 0..20 {
            let x = 2.0 * rand::Rng::gen::<f64>(&mut rng) - 1.0;
            let y = 0.1 + rand::Rng::gen::<f64>(&mut rng);
            let m = half_plane_to_spd(x, y);
            assert!((m.determinant() - 1.0).abs() < 1e-12);
            let (xb, yb) = spd_to_half_plane(&m);
            assert!((x - xb).abs() < 1e-12 && (y - yb).abs() < 1e-12);
        }
    }
}
