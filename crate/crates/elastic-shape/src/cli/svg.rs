//! Minimal SVG rendering of geodesic sweeps: an orthographic view for
//! spherical curves, the upper half plane for 2x2 SPD curves, plain axes for
//! planar curves. 3x3 SPD sweeps are tabulated as ellipsoid axes instead.

use nalgebra::DVector;

use crate::error::Result;
use crate::homog::{DiscreteManifoldCurve, ManifoldPoint};

use super::io::spd_to_half_plane;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 640.0;
const MARGIN: f64 = 40.0;

fn polyline(points: &[(f64, f64)], stroke: &str, width: f64) -> String {
    let coords: Vec<String> = points
        .iter()
        .map(|(x, y)| format!("{x:.3},{y:.3}"))
        .collect();
    format!(
        r#"<polyline fill="none" stroke="{stroke}" stroke-width="{width}" points="{}"/>"#,
        coords.join(" ")
    )
}

fn frame_color(index: usize, count: usize) -> String {
    if index == 0 {
        return "#d62728".into();
    }
    if index + 1 == count {
        return "#1f77b4".into();
    }
    let t = index as f64 / (count - 1) as f64;
    let g = (160.0 + 60.0 * t) as u8;
    format!("#{:02x}{:02x}{:02x}", g, g, g)
}

fn document(body: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{body}\n</svg>\n"
    )
}

/// Orthographic sphere view: points are rotated so the mean direction of the
/// endpoint curves faces the viewer, then the depth axis is dropped.
pub fn sphere_sweep(frames: &[DiscreteManifoldCurve]) -> Result<String> {
    let mut mean = DVector::zeros(3);
    for frame in [&frames[0], frames.last().unwrap()] {
        for p in frame.samples() {
            if let ManifoldPoint::Sphere(v) = p {
                mean += v;
            }
        }
    }
    let mean = if mean.norm() > 1e-9 {
        mean.normalize()
    } else {
        DVector::from_vec(vec![0.0, 0.0, 1.0])
    };
    // orthonormal basis with `mean` as the view axis
    let pick = if mean[0].abs() < 0.9 {
        DVector::from_vec(vec![1.0, 0.0, 0.0])
    } else {
        DVector::from_vec(vec![0.0, 1.0, 0.0])
    };
    let e1 = {
        let v = &pick - &mean * mean.dot(&pick);
        v.normalize()
    };
    let e2 = DVector::from_vec(vec![
        mean[1] * e1[2] - mean[2] * e1[1],
        mean[2] * e1[0] - mean[0] * e1[2],
        mean[0] * e1[1] - mean[1] * e1[0],
    ]);

    let scale = (WIDTH - 2.0 * MARGIN) / 2.0;
    let to_screen = |v: &DVector<f64>| {
        (
            WIDTH / 2.0 + scale * e1.dot(v),
            HEIGHT / 2.0 - scale * e2.dot(v),
        )
    };

    let mut body = format!(
        r##"<circle cx="{}" cy="{}" r="{scale}" fill="none" stroke="#cccccc"/>"##,
        WIDTH / 2.0,
        HEIGHT / 2.0
    );
    for (i, frame) in frames.iter().enumerate() {
        let pts: Vec<(f64, f64)> = frame
            .samples()
            .iter()
            .filter_map(|p| match p {
                ManifoldPoint::Sphere(v) if mean.dot(v) > -0.05 => Some(to_screen(v)),
                _ => None,
            })
            .collect();
        if pts.len() >= 2 {
            let w = if i == 0 || i + 1 == frames.len() { 2.5 } else { 1.0 };
            body.push('\n');
            body.push_str(&polyline(&pts, &frame_color(i, frames.len()), w));
        }
    }
    Ok(document(&body))
}

/// Upper-half-plane view of a sweep of 2x2 SPD curves.
pub fn half_plane_sweep(frames: &[DiscreteManifoldCurve]) -> Result<String> {
    let mut xs: Vec<Vec<(f64, f64)>> = Vec::with_capacity(frames.len());
    let (mut min_x, mut max_x, mut max_y) = (f64::MAX, f64::MIN, f64::MIN);
    for frame in frames {
        let mut row = Vec::with_capacity(frame.len());
        for p in frame.samples() {
            let ManifoldPoint::Spd(m) = p else { continue };
            let (x, y) = spd_to_half_plane(m);
            min_x = min_x.min(x);
            max_x = max_x.max(x);
            max_y = max_y.max(y);
            row.push((x, y));
        }
        xs.push(row);
    }
    let span_x = (max_x - min_x).max(1e-9);
    let scale = ((WIDTH - 2.0 * MARGIN) / span_x).min((HEIGHT - 2.0 * MARGIN) / max_y.max(1e-9));
    let to_screen =
        |&(x, y): &(f64, f64)| (MARGIN + (x - min_x) * scale, HEIGHT - MARGIN - y * scale);

    let mut body = format!(
        r##"<line x1="0" y1="{0}" x2="{WIDTH}" y2="{0}" stroke="#cccccc"/>"##,
        HEIGHT - MARGIN
    );
    for (i, row) in xs.iter().enumerate() {
        let pts: Vec<(f64, f64)> = row.iter().map(to_screen).collect();
        let w = if i == 0 || i + 1 == xs.len() { 2.5 } else { 1.0 };
        body.push('\n');
        body.push_str(&polyline(&pts, &frame_color(i, xs.len()), w));
    }
    Ok(document(&body))
}

/// Planar sweep (the Euclidean baseline).
pub fn planar_sweep(frames: &[Vec<DVector<f64>>]) -> Result<String> {
    let (mut min_x, mut max_x, mut min_y, mut max_y) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for frame in frames {
        for p in frame {
            min_x = min_x.min(p[0]);
            max_x = max_x.max(p[0]);
            min_y = min_y.min(p[1]);
            max_y = max_y.max(p[1]);
        }
    }
    let scale = ((WIDTH - 2.0 * MARGIN) / (max_x - min_x).max(1e-9))
        .min((HEIGHT - 2.0 * MARGIN) / (max_y - min_y).max(1e-9));
    let to_screen = |p: &DVector<f64>| {
        (
            MARGIN + (p[0] - min_x) * scale,
            HEIGHT - MARGIN - (p[1] - min_y) * scale,
        )
    };
    let mut body = String::new();
    for (i, frame) in frames.iter().enumerate() {
        let pts: Vec<(f64, f64)> = frame.iter().map(to_screen).collect();
        let w = if i == 0 || i + 1 == frames.len() { 2.5 } else { 1.0 };
        body.push('\n');
        body.push_str(&polyline(&pts, &frame_color(i, frames.len()), w));
    }
    Ok(document(&body))
}

/// Per-frame ellipsoid table for 3x3 SPD sweeps: eigenvalues and principal
/// axes of every sample, one CSV row per (frame, sample).
pub fn ellipsoid_axes_table(frames: &[DiscreteManifoldCurve]) -> Result<String> {
    let mut out = String::from(
        "frame,sample,lambda1,lambda2,lambda3,axis1x,axis1y,axis1z,axis2x,axis2y,axis2z,axis3x,axis3y,axis3z\n",
    );
    for (f, frame) in frames.iter().enumerate() {
        for (s, p) in frame.samples().iter().enumerate() {
            let ManifoldPoint::Spd(m) = p else { continue };
            let eig = nalgebra::SymmetricEigen::new(m.clone());
            let mut order: Vec<usize> = (0..3).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap());
            let mut row = format!("{f},{s}");
            for &i in &order {
                row.push_str(&format!(",{}", eig.eigenvalues[i]));
            }
            for &i in &order {
                let col = eig.eigenvectors.column(i);
                row.push_str(&format!(",{},{},{}", col[0], col[1], col[2]));
            }
            out.push_str(&row);
            out.push('\n');
        }
    }
    Ok(out)
}
