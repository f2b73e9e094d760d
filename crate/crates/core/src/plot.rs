//! SVG rendering of persistence diagrams.

use std::fmt::Write as _;

use crate::persistence::PersistenceDiagram;

const SIZE: f64 = 480.0;
const MARGIN: f64 = 56.0;
const BAND: f64 = 18.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

fn marker(out: &mut String, dim: usize, x: f64, y: f64) {
    let c = COLORS[dim % COLORS.len()];
    let r = 4.0;
    let _ = match dim % 4 {
        0 => writeln!(
            out,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r}" fill="{c}" fill-opacity="0.7"/>"#
        ),
        1 => writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="{}" height="{}" fill="{c}" fill-opacity="0.7"/>"#,
            x - r,
            y - r,
            2.0 * r,
            2.0 * r
        ),
        2 => writeln!(
            out,
            r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{c}" fill-opacity="0.7"/>"#,
            x,
            y - r,
            x - r,
            y + r,
            x + r,
            y + r
        ),
        _ => writeln!(
            out,
            r#"<polygon points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{c}" fill-opacity="0.7"/>"#,
            x,
            y - r,
            x + r,
            y,
            x,
            y + r,
            x - r,
            y
        ),
    };
}

/// Birth/death scatter on square axes with the diagonal drawn, essential
/// classes on a band above the plot, one marker shape per dimension.
pub fn diagram_svg(diag: &PersistenceDiagram, title: &str) -> String {
    let finite_max = diag
        .pairs
        .iter()
        .flat_map(|p| [p.birth, if p.is_infinite() { p.birth } else { p.death }])
        .fold(0.0f64, f64::max);
    let hi = if finite_max > 0.0 { finite_max * 1.05 } else { 1.0 };
    let plot = SIZE - 2.0 * MARGIN;
    let sx = |v: f64| MARGIN + v / hi * plot;
    let sy = |v: f64| SIZE - MARGIN - v / hi * plot;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(out, "<!-- generator: slacktopo {} -->", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        SIZE / 2.0,
        escape(title)
    );
    // axes box and diagonal
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{plot}" height="{plot}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        out,
        r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#888" stroke-dasharray="4 3"/>"##,
        sx(0.0),
        sy(0.0),
        sx(hi),
        sy(hi)
    );
    let band_y = MARGIN - BAND;
    let _ = writeln!(
        out,
        r##"<rect x="{MARGIN}" y="{:.2}" width="{plot}" height="{BAND}" fill="#f2f2f2" stroke="#bbb"/>"##,
        band_y
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10" text-anchor="end">∞</text>"#,
        MARGIN - 4.0,
        band_y + BAND / 2.0 + 3.0
    );
    for k in 0..=4 {
        let v = hi * k as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10" text-anchor="middle">{:.3}</text>"#,
            sx(v),
            SIZE - MARGIN + 14.0,
            v
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="10" text-anchor="end">{:.3}</text>"#,
            MARGIN - 4.0,
            sy(v) + 3.0,
            v
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">birth</text>"#,
        SIZE / 2.0,
        SIZE - 16.0
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 16 {})">death</text>"#,
        SIZE / 2.0,
        SIZE / 2.0
    );

    for p in &diag.pairs {
        let y = if p.is_infinite() {
            band_y + BAND / 2.0
        } else {
            sy(p.death)
        };
        marker(&mut out, p.dim, sx(p.birth), y);
    }

    let top = diag
        .pairs
        .iter()
        .map(|p| p.dim)
        .max()
        .unwrap_or(0)
        .max(diag.meta.max_dim);
    for dim in 0..=top {
        let y = MARGIN + 14.0 + 16.0 * dim as f64;
        let x = SIZE - MARGIN - 48.0;
        marker(&mut out, dim, x, y);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11">H{dim}</text>"#,
            x + 10.0,
            y + 4.0
        );
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
