//! Static SVG bar charts of count distributions.

use std::collections::BTreeMap;
use std::fmt::Write;

pub struct Panel {
    pub title: String,
    pub pmf: BTreeMap<u64, f64>,
}

const WIDTH: f64 = 640.0;
const PANEL_H: f64 = 200.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 40.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Panels stacked vertically on a shared `0..=x_max` axis and a shared
/// probability scale.
pub fn panels(panels: &[Panel], caption: &str, comment: &str) -> String {
    let x_max = panels
        .iter()
        .filter_map(|p| p.pmf.keys().next_back().copied())
        .max()
        .unwrap_or(0);
    let p_max = panels
        .iter()
        .flat_map(|p| p.pmf.values().copied())
        .fold(0.0f64, f64::max);
    let y_top = ((p_max / 0.05).ceil() * 0.05).max(0.05);
    let cell = PANEL_H + TOP + BOTTOM;
    let height = cell * panels.len() as f64 + 30.0;
    let plot_w = WIDTH - LEFT - RIGHT;
    let slot = plot_w / (x_max + 1) as f64;
    let tick_every = if x_max <= 30 { 1 } else { 5 };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="11">"#
    );
    if !comment.is_empty() {
        let _ = writeln!(s, "<!-- {} -->", comment.replace("--", "- -"));
    }
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, panel) in panels.iter().enumerate() {
        let y0 = i as f64 * cell + TOP;
        let base = y0 + PANEL_H;
        let _ = writeln!(s, r#"<g class="panel" id="panel-{i}">"#);
        let _ = writeln!(
            s,
            r#"<text class="title" x="{:.1}" y="{:.1}" text-anchor="middle" font-size="13">{}</text>"#,
            LEFT + plot_w / 2.0,
            y0 - 10.0,
            escape(&panel.title)
        );
        let _ = writeln!(
            s,
            r#"<line x1="{LEFT}" y1="{base:.1}" x2="{:.1}" y2="{base:.1}" stroke="black"/>"#,
            WIDTH - RIGHT
        );
        let _ = writeln!(
            s,
            r#"<line x1="{LEFT}" y1="{y0:.1}" x2="{LEFT}" y2="{base:.1}" stroke="black"/>"#
        );
        for j in 0..=2 {
            let v = y_top * j as f64 / 2.0;
            let y = base - PANEL_H * j as f64 / 2.0;
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{v:.2}</text>"#,
                LEFT - 6.0,
                y + 4.0
            );
        }
        for (&k, &p) in &panel.pmf {
            let h = PANEL_H * p / y_top;
            let x = LEFT + slot * (k as f64 + 0.1);
            let _ = writeln!(
                s,
                r#"<rect x="{x:.2}" y="{:.2}" width="{:.2}" height="{h:.2}" fill="steelblue"><title>{k}: {p:.6}</title></rect>"#,
                base - h,
                slot * 0.8
            );
        }
        for k in (0..=x_max).step_by(tick_every) {
            let _ = writeln!(
                s,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{k}</text>"#,
                LEFT + slot * (k as f64 + 0.5),
                base + 15.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">number of zeros</text>"#,
            LEFT + plot_w / 2.0,
            base + 32.0
        );
        let _ = writeln!(s, "</g>");
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="10">{}</text>"#,
        WIDTH / 2.0,
        height - 10.0,
        escape(caption)
    );
    s.push_str("</svg>\n");
    s
}
