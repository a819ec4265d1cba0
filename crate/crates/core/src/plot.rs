//! Static SVG line charts for episode scores.

use std::fmt::Write as _;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Per-episode scores plus their trailing moving average, one `<polyline>`
/// each.
pub fn reward_curve_svg(title: &str, scores: &[f64], window: usize) -> String {
    let ma = crate::drqn::RunLog::moving_average(scores, window);
    let n = scores.len();
    let y_max = scores.iter().copied().fold(0.0_f64, f64::max).max(1.0);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let x_of = |i: usize| {
        if n <= 1 {
            LEFT
        } else {
            LEFT + plot_w * i as f64 / (n - 1) as f64
        }
    };
    let y_of = |v: f64| TOP + plot_h * (1.0 - v / y_max);
    let points = |vals: &[f64]| {
        let mut s = String::new();
        for (i, &v) in vals.iter().enumerate() {
            if i > 0 {
                s.push(' ');
            }
            let _ = write!(s, "{:.2},{:.2}", x_of(i), y_of(v));
        }
        s
    };

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"  <rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"  <text x="{}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    // axes
    let _ = writeln!(
        svg,
        r##"  <path d="M{LEFT},{TOP} V{} H{}" fill="none" stroke="#333"/>"##,
        TOP + plot_h,
        LEFT + plot_w
    );
    for k in 0..=4 {
        let v = y_max * k as f64 / 4.0;
        let y = y_of(v);
        let _ = writeln!(
            svg,
            r##"  <line x1="{}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="#333"/><text x="{}" y="{:.2}" text-anchor="end">{v:.0}</text>"##,
            LEFT - 4.0,
            LEFT - 6.0,
            y + 4.0
        );
    }
    if n > 0 {
        for k in 0..=4 {
            let i = ((n - 1) as f64 * k as f64 / 4.0).round() as usize;
            let x = x_of(i);
            let _ = writeln!(
                svg,
                r#"  <text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                TOP + plot_h + 18.0,
                i + 1
            );
        }
    }
    let _ = writeln!(
        svg,
        r#"  <text x="{}" y="{}" text-anchor="middle">Episode</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        svg,
        r#"  <text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">Score</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );
    let _ = writeln!(
        svg,
        r##"  <polyline class="score" fill="none" stroke="#9ecae1" stroke-width="1" points="{}"/>"##,
        points(scores)
    );
    let _ = writeln!(
        svg,
        r##"  <polyline class="moving-average" fill="none" stroke="#08519c" stroke-width="2" points="{}"/>"##,
        points(&ma)
    );
    let _ = writeln!(
        svg,
        r##"  <text x="{}" y="{}" fill="#08519c" text-anchor="end">moving average ({window})</text>"##,
        WIDTH - RIGHT,
        TOP - 6.0
    );
    svg.push_str("</svg>\n");
    svg
}
