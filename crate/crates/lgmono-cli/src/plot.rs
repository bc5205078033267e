//! Minimal SVG scatter of critical points, one Re/Im panel per coordinate.

use std::fmt::Write as _;

use lgmono::C64;

const PANEL: f64 = 280.0;
const MARGIN: f64 = 36.0;

fn nice_bound(points: &[C64]) -> f64 {
    let m = points
        .iter()
        .map(|z| z.re.abs().max(z.im.abs()))
        .fold(0.0, f64::max);
    (m * 1.15).max(1.0)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

pub fn scatter_svg(title: &str, points: &[Vec<C64>], labels: &[String]) -> String {
    let dim = points.first().map_or(0, Vec::len);
    let width = dim as f64 * (PANEL + MARGIN) + MARGIN;
    let height = PANEL + 2.5 * MARGIN;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN}" y="16" font-size="13">{}</text>"#,
        escape(title)
    );
    for k in 0..dim {
        let column: Vec<C64> = points.iter().map(|p| p[k]).collect();
        let b = nice_bound(&column);
        let x0 = MARGIN + k as f64 * (PANEL + MARGIN);
        let y0 = 1.5 * MARGIN;
        let sx = |re: f64| x0 + (re + b) / (2.0 * b) * PANEL;
        let sy = |im: f64| y0 + (b - im) / (2.0 * b) * PANEL;
        let _ = writeln!(
            s,
            r#"<rect x="{x0}" y="{y0}" width="{PANEL}" height="{PANEL}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(
            s,
            r##"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#bbb"/><line x1="{}" y1="{}" x2="{}" y2="{}" stroke="#bbb"/>"##,
            sx(-b),
            sy(0.0),
            sx(b),
            sy(0.0),
            sx(0.0),
            sy(-b),
            sx(0.0),
            sy(b)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}">z{} (Re, Im), |axis| = {:.2}</text>"#,
            x0,
            y0 + PANEL + 16.0,
            k + 1,
            b
        );
        for (z, label) in column.iter().zip(labels) {
            let (cx, cy) = (sx(z.re), sy(z.im));
            let _ = writeln!(s, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="3.5"/>"#);
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
                cx + 5.0,
                cy - 5.0,
                escape(label)
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
