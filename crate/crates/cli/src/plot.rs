//! SVG scatter of the convexity samples, one panel per dimension.

use std::fmt::Write;

use monodromy::harness::checks::{ConvexitySample, Polytope};

const PANEL: f64 = 320.0;
const MARGIN: f64 = 20.0;

/// Orthonormal coordinates on the hyperplane of constant trace.
fn project(x: &[f64]) -> (f64, f64) {
    match x.len() {
        1 => (x[0], 0.0),
        2 => ((x[0] - x[1]) / 2f64.sqrt(), 0.0),
        _ => {
            let u = (x[0] - x[1]) / 2f64.sqrt();
            let v = (x[0] + x[1] - 2.0 * x[2]) / 6f64.sqrt();
            (u, v)
        }
    }
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Monotone-chain convex hull, counterclockwise.
fn hull(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

pub fn convexity_svg(samples: &[ConvexitySample], polys: &[Polytope]) -> String {
    let width = PANEL * polys.len().max(1) as f64;
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{h}" viewBox="0 0 {width} {h}">"#,
        h = PANEL + 20.0
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    for (k, poly) in polys.iter().enumerate() {
        let verts: Vec<(f64, f64)> = poly.vertices.iter().map(|v| project(v)).collect();
        let ext = verts.iter().map(|p| p.0.abs().max(p.1.abs())).fold(1e-12, f64::max);
        let scale = (PANEL / 2.0 - MARGIN) / ext;
        let x0 = PANEL * k as f64 + PANEL / 2.0;
        let y0 = PANEL / 2.0 + 20.0;
        let at = |p: (f64, f64)| (x0 + scale * p.0, y0 - scale * p.1);
        writeln!(s, r#"<text x="{}" y="16" font-family="sans-serif" font-size="13" text-anchor="middle">n = {}</text>"#, x0, poly.n).unwrap();
        let outline: Vec<String> = hull(verts.clone())
            .into_iter()
            .map(|p| {
                let (x, y) = at(p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        writeln!(s, r#"<polygon points="{}" fill="none" stroke="black" stroke-width="1"/>"#, outline.join(" ")).unwrap();
        for smp in samples.iter().filter(|smp| smp.n == poly.n) {
            let (x, y) = at(project(&smp.coords));
            let colour = if smp.kind == "linear" { "#1f77b4" } else { "#d62728" };
            writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="1.5" fill="{colour}" fill-opacity="0.6"/>"#).unwrap();
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hexagon_hull() {
        let mut pts = Vec::new();
        for k in 0..6 {
            let t = k as f64 * std::f64::consts::PI / 3.0;
            pts.push((t.cos(), t.sin()));
        }
        pts.push((0.0, 0.0));
        assert_eq!(hull(pts).len(), 6);
    }

    #[test]
    fn projection_kills_trace() {
        let (u, v) = project(&[1.0, 1.0, 1.0]);
        assert!(u.abs() < 1e-15 && v.abs() < 1e-15);
    }
}
