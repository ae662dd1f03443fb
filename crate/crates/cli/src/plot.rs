//! Minimal SVG line plots with logarithmic axes.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

/// One labelled polyline.
pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

/// Axis scaling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

impl Scale {
    fn map(self, x: f64) -> f64 {
        match self {
            Scale::Linear => x,
            Scale::Log => x.log10(),
        }
    }
}

fn usable(p: &(f64, f64), xs: Scale, ys: Scale) -> bool {
    let ok = |v: f64, s: Scale| v.is_finite() && (s == Scale::Linear || v > 0.0);
    ok(p.0, xs) && ok(p.1, ys)
}

fn ticks(lo: f64, hi: f64, scale: Scale) -> Vec<f64> {
    match scale {
        Scale::Log => (lo.floor() as i32..=hi.ceil() as i32).map(f64::from).filter(|t| *t >= lo && *t <= hi).collect(),
        Scale::Linear => {
            let span = (hi - lo).max(f64::MIN_POSITIVE);
            let raw = span / 5.0;
            let mag = 10f64.powf(raw.log10().floor());
            let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= 6.0).unwrap_or(mag * 10.0);
            let mut t = (lo / step).ceil() * step;
            let mut out = vec![];
            while t <= hi + 1e-12 * span {
                out.push(t);
                t += step;
            }
            out
        }
    }
}

fn label(t: f64, scale: Scale) -> String {
    match scale {
        Scale::Log => format!("1e{}", t as i32),
        Scale::Linear => format!("{t:.3}"),
    }
}

/// Renders the series to an SVG document.
pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[Series], xs: Scale, ys: Scale) -> String {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter().filter(|p| usable(p, xs, ys)).map(|p| (xs.map(p.0), ys.map(p.1))))
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = pts.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), &(x, y)| (a.min(x), b.max(x), c.min(y), d.max(y)),
    );
    if pts.is_empty() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 < 1e-12 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if y1 - y0 < 1e-12 * y0.abs().max(1.0) {
        let pad = 0.05 * y0.abs().max(1e-3);
        y0 -= pad;
        y1 += pad;
    }
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<path d="M{MARGIN},{} H{} M{MARGIN},{} V{MARGIN}" stroke="black" fill="none"/>"#,
        HEIGHT - MARGIN,
        WIDTH - MARGIN,
        HEIGHT - MARGIN
    );
    for t in ticks(x0, x1, xs) {
        let x = px(t);
        let _ = writeln!(
            s,
            r#"<path d="M{x:.2},{} v5" stroke="black"/><text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#,
            HEIGHT - MARGIN,
            HEIGHT - MARGIN + 18.0,
            label(t, xs)
        );
    }
    for t in ticks(y0, y1, ys) {
        let y = py(t);
        let _ = writeln!(
            s,
            r#"<path d="M{MARGIN},{y:.2} h-5" stroke="black"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"#,
            MARGIN - 8.0,
            y + 4.0,
            label(t, ys)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 16.0,
        escape(xlabel)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(ylabel)
    );
    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut d = String::new();
        for (j, p) in ser.points.iter().filter(|p| usable(p, xs, ys)).enumerate() {
            let _ = write!(d, "{}{:.2},{:.2} ", if j == 0 { "M" } else { "L" }, px(xs.map(p.0)), py(ys.map(p.1)));
        }
        let dash = if ser.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(s, r#"<path d="{}" stroke="{color}" fill="none" stroke-width="1.5"{dash}/>"#, d.trim_end());
        let ly = MARGIN + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<path d="M{},{ly} h20" stroke="{color}" stroke-width="1.5"{dash}/><text x="{}" y="{}">{}</text>"#,
            WIDTH - MARGIN - 130.0,
            WIDTH - MARGIN - 104.0,
            ly + 4.0,
            escape(ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plot_is_well_formed_and_skips_nonpositive_points() {
        let s = Series { label: "u", points: vec![(1e-3, 10.0), (1e-2, 1.0), (0.0, 5.0), (1e-1, -1.0)], dashed: false };
        let svg = line_plot("t", "d", "u", &[s], Scale::Log, Scale::Log);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches(" L").count(), 1);
        assert!(svg.contains("1e-3") && svg.contains(">1e1<"));
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }

    #[test]
    fn flat_series_gets_a_range() {
        let s = Series { label: "ratio", points: vec![(1e-3, 2.0), (1e-1, 2.0)], dashed: true };
        let svg = line_plot("t", "d", "r", &[s], Scale::Log, Scale::Linear);
        assert!(svg.contains("stroke-dasharray"));
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn rendering_is_deterministic() {
        let mk = || Series { label: "u", points: vec![(1e-4, 3.0), (1e-2, 2.0)], dashed: false };
        assert_eq!(
            line_plot("a", "b", "c", &[mk()], Scale::Log, Scale::Linear),
            line_plot("a", "b", "c", &[mk()], Scale::Log, Scale::Linear)
        );
    }
}
