//! Polar plot of the three phase-speed curves.

use std::fmt::Write as _;

const SIZE: f64 = 520.0;
const RADIUS: f64 = 220.0;

pub struct Curve<'a> {
    pub label: &'a str,
    pub color: &'a str,
    pub values: &'a [f64],
}

fn polyline(out: &mut String, theta: &[f64], curve: &Curve, scale: f64) {
    let c = SIZE / 2.0;
    let mut pts = String::new();
    for (t, r) in theta.iter().zip(curve.values) {
        let x = c + scale * r * t.cos();
        let y = c - scale * r * t.sin();
        let _ = write!(pts, "{x:.3},{y:.3} ");
    }
    let _ = writeln!(
        out,
        r#"  <polygon points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
        pts.trim_end(),
        curve.color
    );
}

/// `theta` is measured from the field direction, drawn along +x.
pub fn friedrichs_svg(theta: &[f64], curves: &[Curve]) -> String {
    let rmax = curves
        .iter()
        .flat_map(|c| c.values.iter().copied())
        .fold(0.0f64, f64::max);
    let scale = if rmax > 0.0 { RADIUS / rmax } else { 1.0 };
    let c = SIZE / 2.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(out, r#"  <rect width="100%" height="100%" fill="white"/>"#);
    for k in 1..=4 {
        let r = RADIUS * f64::from(k) / 4.0;
        let _ = writeln!(
            out,
            r##"  <circle cx="{c}" cy="{c}" r="{r}" fill="none" stroke="#dddddd" stroke-width="1"/>"##
        );
    }
    let _ = writeln!(
        out,
        r##"  <line x1="{}" y1="{c}" x2="{}" y2="{c}" stroke="#999999" stroke-width="1"/>"##,
        c - RADIUS,
        c + RADIUS
    );
    let _ = writeln!(
        out,
        r##"  <line x1="{c}" y1="{}" x2="{c}" y2="{}" stroke="#999999" stroke-width="1"/>"##,
        c - RADIUS,
        c + RADIUS
    );
    let _ = writeln!(
        out,
        r#"  <text x="{}" y="{}" font-family="sans-serif" font-size="11">H</text>"#,
        c + RADIUS + 6.0,
        c + 4.0
    );
    let _ = writeln!(
        out,
        r#"  <text x="{}" y="{}" font-family="sans-serif" font-size="11">{rmax:.4}</text>"#,
        c + RADIUS * std::f64::consts::FRAC_1_SQRT_2 + 4.0,
        c - RADIUS * std::f64::consts::FRAC_1_SQRT_2 - 4.0
    );
    for curve in curves {
        polyline(&mut out, theta, curve, scale);
    }
    for (i, curve) in curves.iter().enumerate() {
        let y = 20.0 + 16.0 * i as f64;
        let _ = writeln!(
            out,
            r#"  <line x1="12" y1="{y}" x2="32" y2="{y}" stroke="{}" stroke-width="2"/>"#,
            curve.color
        );
        let _ = writeln!(
            out,
            r#"  <text x="38" y="{}" font-family="sans-serif" font-size="12">{}</text>"#,
            y + 4.0,
            curve.label
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_polygon_per_curve() {
        let theta = [0.0, 1.0, 2.0];
        let a = [1.0, 2.0, 1.0];
        let svg = friedrichs_svg(
            &theta,
            &[
                Curve { label: "a", color: "red", values: &a },
                Curve { label: "b", color: "blue", values: &a },
            ],
        );
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polygon").count(), 2);
    }
}
