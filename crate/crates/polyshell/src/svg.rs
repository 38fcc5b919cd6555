//! Minimal SVG rendering of configurations: reference polygon (dashed),
//! deformed polygon (solid), the surface line, and optional circles
//! (fitted circle dashed, circumscribed circle dotted). Convenience
//! output only; not under bit-exact test.

use crate::analysis::CircleFit;
use crate::geometry::Vec2;
use std::fmt::Write as _;

pub struct Scene {
    pub reference: Vec<Vec2>,
    pub deformed: Vec<Vec<Vec2>>,
    pub fitted_circle: Option<CircleFit>,
    pub circumscribed: Option<(Vec2, f64)>,
}

pub fn render(scene: &Scene) -> String {
    let mut min = Vec2::new(f64::INFINITY, f64::INFINITY);
    let mut max = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut extend = |p: &Vec2| {
        min.x = min.x.min(p.x);
        min.y = min.y.min(p.y);
        max.x = max.x.max(p.x);
        max.y = max.y.max(p.y);
    };
    for p in &scene.reference {
        extend(p);
    }
    for chain in &scene.deformed {
        for p in chain {
            extend(p);
        }
    }
    if let Some(fit) = &scene.fitted_circle {
        extend(&Vec2::new(
            fit.center.x - fit.radius,
            fit.center.y - fit.radius,
        ));
        extend(&Vec2::new(
            fit.center.x + fit.radius,
            fit.center.y + fit.radius,
        ));
    }
    let pad = 0.1 * (max.x - min.x).max(max.y - min.y).max(1.0);
    min = min - Vec2::new(pad, pad);
    max = max + Vec2::new(pad, pad);
    let scale = 600.0 / (max.x - min.x).max(max.y - min.y);
    // SVG y grows downward; flip so the surface reads as a floor
    let tx = |p: Vec2| ((p.x - min.x) * scale, (max.y - p.y) * scale);

    let width = (max.x - min.x) * scale;
    let height = (max.y - min.y) * scale;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.2} {height:.2}">"##
    );

    // surface line y = 0
    let (x0, y0) = tx(Vec2::new(min.x, 0.0));
    let (x1, _) = tx(Vec2::new(max.x, 0.0));
    let _ = writeln!(
        out,
        r##"  <line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}" stroke="#444" stroke-width="2"/>"##
    );

    let polygon_points = |chain: &[Vec2]| {
        chain
            .iter()
            .map(|&p| {
                let (x, y) = tx(p);
                format!("{x:.2},{y:.2}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    };

    let _ = writeln!(
        out,
        r##"  <polygon points="{}" fill="none" stroke="#999" stroke-width="1.5" stroke-dasharray="6 4"/>"##,
        polygon_points(&scene.reference)
    );
    for chain in &scene.deformed {
        let _ = writeln!(
            out,
            r##"  <polygon points="{}" fill="none" stroke="#d2622d" stroke-width="2"/>"##,
            polygon_points(chain)
        );
    }
    if let Some(fit) = &scene.fitted_circle {
        let (cx, cy) = tx(fit.center);
        let _ = writeln!(
            out,
            r##"  <circle cx="{cx:.2}" cy="{cy:.2}" r="{:.2}" fill="none" stroke="#2d7dd2" stroke-width="1.5" stroke-dasharray="8 5"/>"##,
            fit.radius * scale
        );
    }
    if let Some((center, radius)) = &scene.circumscribed {
        let (cx, cy) = tx(*center);
        let _ = writeln!(
            out,
            r##"  <circle cx="{cx:.2}" cy="{cy:.2}" r="{:.2}" fill="none" stroke="#666" stroke-width="1" stroke-dasharray="2 4"/>"##,
            radius * scale
        );
    }
    out.push_str("</svg>\n");
    out
}
