//! Minimal hand-written SVG: line plots with a legend, and categorical heat
//! maps.

use std::fmt::Write as _;

use crate::table::fmt_g17;

const W: f64 = 720.0;
const H: f64 = 480.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

fn short(v: f64) -> String {
    if v == 0.0 || (1e-3..1e5).contains(&v.abs()) {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.2e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
}

fn axes(out: &mut String, x_label: &str, y_label: &str, x: (f64, f64), y: (f64, f64)) {
    let (l, r, t, b) = (MARGIN, W - MARGIN, MARGIN, H - MARGIN);
    let _ = writeln!(out, r#"<path d="M{l} {t} L{l} {b} L{r} {b}" stroke="black" fill="none"/>"#);
    let _ = writeln!(out, r#"<text x="{l}" y="{}" text-anchor="middle">{}</text>"#, b + 16.0, short(x.0));
    let _ = writeln!(out, r#"<text x="{r}" y="{}" text-anchor="middle">{}</text>"#, b + 16.0, short(x.1));
    let _ = writeln!(out, r#"<text x="{}" y="{b}" text-anchor="end">{}</text>"#, l - 4.0, short(y.0));
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, l - 4.0, t + 4.0, short(y.1));
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (l + r) / 2.0, b + 36.0, escape(x_label));
    let _ = writeln!(
        out,
        r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#,
        (t + b) / 2.0,
        escape(y_label)
    );
}

/// Symmetric log: `sign(v)·log10(1 + |v|)`, defined for negative values.
pub fn symlog(v: f64) -> f64 {
    v.signum() * v.abs().ln_1p() / std::f64::consts::LN_10
}

/// One polyline per series over a shared x axis. Non-finite points are
/// dropped; with `log_y` the y values pass through [`symlog`].
pub fn line_plot(title: &str, x_label: &str, xs: &[f64], series: &[(&str, Vec<f64>)], log_y: bool) -> String {
    let tf = |v: f64| if log_y { symlog(v) } else { v };
    let finite = series
        .iter()
        .flat_map(|(_, ys)| ys.iter().copied().map(tf))
        .filter(|v| v.is_finite());
    let (mut lo, mut hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let (x0, x1) = (xs.first().copied().unwrap_or(0.0), xs.last().copied().unwrap_or(1.0));
    let xspan = if x1 > x0 { x1 - x0 } else { 1.0 };
    let px = |x: f64| MARGIN + (x - x0) / xspan * (W - 2.0 * MARGIN);
    let py = |y: f64| H - MARGIN - (y - lo) / (hi - lo) * (H - 2.0 * MARGIN);

    let mut out = String::new();
    header(&mut out, title);
    let y_label = if log_y { "sign(v)·log10(1+|v|)" } else { "value" };
    axes(&mut out, x_label, y_label, (x0, x1), (lo, hi));
    for (k, (name, ys)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = xs
            .iter()
            .zip(ys)
            .map(|(&x, &y)| (x, tf(y)))
            .filter(|(_, y)| y.is_finite())
            .map(|(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
            .collect();
        let _ = writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        let ly = MARGIN + 16.0 * k as f64;
        let _ = writeln!(out, r#"<line x1="{0}" y1="{ly}" x2="{1}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, W - MARGIN - 50.0, W - MARGIN - 30.0);
        let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, W - MARGIN - 25.0, ly + 4.0, escape(name));
    }
    out.push_str("</svg>\n");
    out
}

/// Cells colored by category over a `nx × ny` grid; `cells[j * nx + i]`
/// indexes `categories`.
pub struct HeatMap<'a> {
    pub title: &'a str,
    pub axis_names: [&'a str; 2],
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub nx: usize,
    pub ny: usize,
    pub categories: &'a [(&'a str, &'a str)],
    pub cells: &'a [usize],
}

impl HeatMap<'_> {
    pub fn render(&self) -> String {
        let mut out = String::new();
        header(&mut out, self.title);
        let plot_w = W - 2.0 * MARGIN - 110.0;
        let plot_h = H - 2.0 * MARGIN;
        let cw = plot_w / self.nx as f64;
        let ch = plot_h / self.ny as f64;
        for (idx, &cat) in self.cells.iter().enumerate() {
            let (i, j) = (idx % self.nx, idx / self.nx);
            let x = MARGIN + i as f64 * cw;
            let y = H - MARGIN - (j + 1) as f64 * ch;
            let _ = writeln!(
                out,
                r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                cw + 0.05,
                ch + 0.05,
                self.categories[cat].1
            );
        }
        let (l, r, t, b) = (MARGIN, MARGIN + plot_w, MARGIN, H - MARGIN);
        let _ = writeln!(out, r#"<path d="M{l} {t} L{l} {b} L{r} {b}" stroke="black" fill="none"/>"#);
        let _ = writeln!(out, r#"<text x="{l}" y="{}" text-anchor="middle">{}</text>"#, b + 16.0, fmt_g17(self.x_range.0));
        let _ = writeln!(out, r#"<text x="{r}" y="{}" text-anchor="middle">{}</text>"#, b + 16.0, fmt_g17(self.x_range.1));
        let _ = writeln!(out, r#"<text x="{}" y="{b}" text-anchor="end">{}</text>"#, l - 4.0, fmt_g17(self.y_range.0));
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, l - 4.0, t + 4.0, fmt_g17(self.y_range.1));
        let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (l + r) / 2.0, b + 36.0, self.axis_names[0]);
        let _ = writeln!(out, r#"<text x="16" y="{0}" text-anchor="middle" transform="rotate(-90 16 {0})">{1}</text>"#, (t + b) / 2.0, self.axis_names[1]);
        for (k, (name, color)) in self.categories.iter().enumerate() {
            let ly = MARGIN + 18.0 * k as f64;
            let _ = writeln!(out, r#"<rect x="{}" y="{}" width="12" height="12" fill="{color}"/>"#, r + 20.0, ly - 10.0);
            let _ = writeln!(out, r#"<text x="{}" y="{ly}">{name}</text>"#, r + 38.0);
        }
        out.push_str("</svg>\n");
        out
    }
}
