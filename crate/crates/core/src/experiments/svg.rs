//! Minimal SVG renderings of the two experiment outputs.

use std::fmt::Write as _;

use crate::experiments::ResultRow;

const W: f64 = 480.0;
const H: f64 = 400.0;
const MARGIN: f64 = 60.0;

/// Blue (0) through white (0.5) to red (1).
fn diverging(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.5 };
    let (r, g, b) = if t < 0.5 {
        let s = t / 0.5;
        (s, s, 1.0)
    } else {
        let s = (1.0 - t) / 0.5;
        (1.0, s, s)
    };
    let c = |v: f64| (v * 255.0).round() as u8;
    format!("#{:02x}{:02x}{:02x}", c(r), c(g), c(b))
}

fn distinct(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Cells colored by mean AM risk; `a` on the horizontal axis, `b` vertical.
pub fn heatmap_svg(rows: &[ResultRow]) -> String {
    let a_vals = distinct(rows.iter().filter_map(|r| r.real("a")));
    let b_vals = distinct(rows.iter().filter_map(|r| r.real("b")));
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11">"#
    );
    if a_vals.is_empty() || b_vals.is_empty() {
        s.push_str("</svg>\n");
        return s;
    }
    let cw = (W - 2.0 * MARGIN) / a_vals.len() as f64;
    let ch = (H - 2.0 * MARGIN) / b_vals.len() as f64;
    for r in rows {
        let (Some(a), Some(b)) = (r.real("a"), r.real("b")) else {
            continue;
        };
        let i = a_vals.iter().position(|&v| v == a).unwrap_or(0);
        let j = b_vals.iter().position(|&v| v == b).unwrap_or(0);
        let risk = r.real("mean_am_risk").unwrap_or(f64::NAN);
        let x = MARGIN + i as f64 * cw;
        let y = H - MARGIN - (j + 1) as f64 * ch;
        let _ = writeln!(
            s,
            r##"<rect x="{x:.2}" y="{y:.2}" width="{cw:.2}" height="{ch:.2}" fill="{}" stroke="#888"/><text x="{:.2}" y="{:.2}" text-anchor="middle">{risk:.3}</text>"##,
            diverging(risk),
            x + cw / 2.0,
            y + ch / 2.0 + 4.0
        );
    }
    for (i, a) in a_vals.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{a:.3}</text>"#,
            MARGIN + (i as f64 + 0.5) * cw,
            H - MARGIN + 16.0
        );
    }
    for (j, b) in b_vals.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{b:.3}</text>"#,
            MARGIN - 6.0,
            H - MARGIN - (j as f64 + 0.5) * ch + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">a (p = n^-a)</text>"#,
        W / 2.0,
        H - 16.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" transform="rotate(-90 16 {:.2})" text-anchor="middle">b (k = n^b)</text>"#,
        H / 2.0,
        H / 2.0
    );
    s.push_str("</svg>\n");
    s
}

/// Mean excess (with q10–q90 whiskers) against `np` on log-log axes, one
/// series per `a`, plus a `1/np` reference through the first point.
pub fn excess_curve_svg(rows: &[ResultRow]) -> String {
    let pts: Vec<(f64, f64, f64, f64, f64)> = rows
        .iter()
        .filter_map(|r| {
            Some((
                r.real("a")?,
                r.real("np")?,
                r.real("mean_excess")?,
                r.real("q10")?,
                r.real("q90")?,
            ))
        })
        .filter(|p| p.1 > 0.0 && p.2 > 0.0)
        .collect();
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="11">"#
    );
    if pts.is_empty() {
        s.push_str("</svg>\n");
        return s;
    }
    let lx: Vec<f64> = pts.iter().map(|p| p.1.log10()).collect();
    let ly: Vec<f64> = pts
        .iter()
        .flat_map(|p| [p.2, p.3, p.4])
        .filter(|v| *v > 0.0)
        .map(f64::log10)
        .collect();
    let (x0, x1) = lx
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let (y0, y1) = ly
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let (x0, x1) = (x0 - 0.1, x1 + 0.1);
    let (y0, y1) = (y0 - 0.2, y1 + 0.2);
    let px = |v: f64| MARGIN + (v.log10() - x0) / (x1 - x0) * (W - 2.0 * MARGIN);
    let py = |v: f64| H - MARGIN - (v.max(10f64.powf(y0)).log10() - y0) / (y1 - y0) * (H - 2.0 * MARGIN);
    let _ = writeln!(
        s,
        r##"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="#444"/>"##,
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    );

    let palette = ["#1f77b4", "#2ca02c", "#9467bd", "#8c564b"];
    let series = distinct(pts.iter().map(|p| p.0));
    for (si, a) in series.iter().enumerate() {
        let color = palette[si % palette.len()];
        let mine: Vec<_> = pts.iter().filter(|p| p.0 == *a).collect();
        let path: Vec<String> = mine.iter().map(|p| format!("{:.2},{:.2}", px(p.1), py(p.2))).collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
            path.join(" ")
        );
        for p in &mine {
            let _ = writeln!(
                s,
                r#"<line x1="{x:.2}" x2="{x:.2}" y1="{:.2}" y2="{:.2}" stroke="{color}"/><circle cx="{x:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                py(p.3.max(1e-300)),
                py(p.4),
                py(p.2),
                x = px(p.1)
            );
        }
        let first = mine[0];
        let c = first.2 * first.1;
        let ref_path: Vec<String> = mine
            .iter()
            .map(|p| format!("{:.2},{:.2}", px(p.1), py(c / p.1)))
            .collect();
        let _ = writeln!(
            s,
            r##"<polyline points="{}" fill="none" stroke="#ff7f0e" stroke-dasharray="5,3"/>"##,
            ref_path.join(" ")
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" fill="{color}">a = {a:.3}</text>"#,
            W - MARGIN - 70.0,
            MARGIN + 16.0 * (si as f64 + 1.0)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">np (log scale)</text>"#,
        W / 2.0,
        H - 20.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" transform="rotate(-90 16 {:.2})" text-anchor="middle">excess risk (log scale)</text>"#,
        H / 2.0,
        H / 2.0
    );
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colormap_endpoints() {
        assert_eq!(diverging(0.0), "#0000ff");
        assert_eq!(diverging(0.5), "#ffffff");
        assert_eq!(diverging(1.0), "#ff0000");
    }

    #[test]
    fn renders_one_rect_per_cell() {
        let rows: Vec<ResultRow> = [(0.25, 0.25), (0.25, 0.75), (0.75, 0.25), (0.75, 0.75)]
            .iter()
            .map(|&(a, b)| ResultRow::new().with("a", a).with("b", b).with("mean_am_risk", 0.4))
            .collect();
        let svg = heatmap_svg(&rows);
        assert_eq!(svg.matches("<rect").count(), 4);
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn curve_has_series_and_reference() {
        let rows: Vec<ResultRow> = [10.0, 100.0]
            .iter()
            .map(|&np: &f64| {
                ResultRow::new()
                    .with("a", 0.5)
                    .with("np", np)
                    .with("mean_excess", 1.0 / np)
                    .with("q10", 0.5 / np)
                    .with("q90", 2.0 / np)
            })
            .collect();
        let svg = excess_curve_svg(&rows);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("<circle").count(), 2);
    }
}
