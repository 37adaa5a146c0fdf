//! Minimal static SVG plotting: line charts (linear or log y), grouped
//! bar charts and velocity-field heatmaps with direction arrows. No
//! interactivity, deterministic output.

use std::fmt::Write as _;

pub const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 540.0;
const MARGIN_L: f64 = 80.0;
const MARGIN_R: f64 = 210.0;
const MARGIN_T: f64 = 50.0;
const MARGIN_B: f64 = 60.0;

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Copy, PartialEq)]
pub enum YScale {
    Linear,
    Log,
}

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
    y_scale: YScale,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        let span = (self.x_max - self.x_min).max(1e-300);
        MARGIN_L + (v - self.x_min) / span * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn y(&self, v: f64) -> f64 {
        let (v, lo, hi) = match self.y_scale {
            YScale::Linear => (v, self.y_min, self.y_max),
            YScale::Log => (v.log10(), self.y_min.log10(), self.y_max.log10()),
        };
        let span = (hi - lo).max(1e-300);
        HEIGHT - MARGIN_B - (v - lo) / span * (HEIGHT - MARGIN_T - MARGIN_B)
    }
}

fn document(body: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"13\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n{body}</svg>\n"
    )
}

fn axes(out: &mut String, frame: &Frame, title: &str, x_label: &str, y_label: &str) {
    let x0 = MARGIN_L;
    let x1 = WIDTH - MARGIN_R;
    let y0 = HEIGHT - MARGIN_B;
    let y1 = MARGIN_T;
    writeln!(
        out,
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\
         <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>"
    )
    .unwrap();
    writeln!(
        out,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"16\">{}</text>",
        (x0 + x1) / 2.0,
        MARGIN_T - 20.0,
        escape(title)
    )
    .unwrap();
    writeln!(
        out,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
        (x0 + x1) / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    )
    .unwrap();
    writeln!(
        out,
        "<text x=\"18\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.1})\">{}</text>",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    )
    .unwrap();

    // x ticks
    for i in 0..=5 {
        let v = frame.x_min + (frame.x_max - frame.x_min) * i as f64 / 5.0;
        let px = frame.x(v);
        writeln!(
            out,
            "<line x1=\"{px:.1}\" y1=\"{y0}\" x2=\"{px:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\
             <text x=\"{px:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
            y0 + 5.0,
            y0 + 20.0,
            tick_label(v)
        )
        .unwrap();
    }
    // y ticks
    match frame.y_scale {
        YScale::Linear => {
            for i in 0..=5 {
                let v = frame.y_min + (frame.y_max - frame.y_min) * i as f64 / 5.0;
                let py = frame.y(v);
                writeln!(
                    out,
                    "<line x1=\"{:.1}\" y1=\"{py:.1}\" x2=\"{x0}\" y2=\"{py:.1}\" stroke=\"black\"/>\
                     <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>",
                    x0 - 5.0,
                    x0 - 8.0,
                    py + 4.0,
                    tick_label(v)
                )
                .unwrap();
            }
        }
        YScale::Log => {
            let lo = frame.y_min.log10().floor() as i32;
            let hi = frame.y_max.log10().ceil() as i32;
            for e in lo..=hi {
                let v = 10f64.powi(e);
                if v < frame.y_min / 1.001 || v > frame.y_max * 1.001 {
                    continue;
                }
                let py = frame.y(v);
                writeln!(
                    out,
                    "<line x1=\"{:.1}\" y1=\"{py:.1}\" x2=\"{x0}\" y2=\"{py:.1}\" stroke=\"black\"/>\
                     <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">1e{e}</text>",
                    x0 - 5.0,
                    x0 - 8.0,
                    py + 4.0
                )
                .unwrap();
            }
        }
    }
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if v.abs() >= 0.01 && v.abs() < 10000.0 {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.2e}")
    }
}

fn legend(out: &mut String, labels: &[String]) {
    let x = WIDTH - MARGIN_R + 15.0;
    for (i, label) in labels.iter().enumerate() {
        let y = MARGIN_T + 18.0 * i as f64 + 10.0;
        let color = PALETTE[i % PALETTE.len()];
        writeln!(
            out,
            "<rect x=\"{x:.1}\" y=\"{:.1}\" width=\"12\" height=\"12\" fill=\"{color}\"/>\
             <text x=\"{:.1}\" y=\"{:.1}\">{}</text>",
            y - 10.0,
            x + 18.0,
            y,
            escape(label)
        )
        .unwrap();
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Multi-series line chart. Log-scale y drops non-positive points.
pub fn line_chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    y_scale: YScale,
    series: &[Series],
) -> String {
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for s in series {
        for &(x, y) in &s.points {
            if y_scale == YScale::Log && y <= 0.0 {
                continue;
            }
            pts.push((x, y));
        }
    }
    assert!(!pts.is_empty(), "no plottable points");
    let x_min = pts.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let x_max = pts.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let y_min = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let y_max = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let pad = |lo: f64, hi: f64| {
        if lo == hi {
            (lo - 0.5 - lo.abs() * 0.1, hi + 0.5 + hi.abs() * 0.1)
        } else {
            (lo, hi)
        }
    };
    let (x_min, x_max) = pad(x_min, x_max);
    let (y_min, y_max) = match y_scale {
        YScale::Linear => pad(y_min, y_max),
        YScale::Log => (y_min / 1.5, y_max * 1.5),
    };
    let frame = Frame {
        x_min,
        x_max,
        y_min,
        y_max,
        y_scale,
    };
    let mut body = String::new();
    axes(&mut body, &frame, title, x_label, y_label);
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut path = String::new();
        for &(x, y) in &s.points {
            if y_scale == YScale::Log && y <= 0.0 {
                continue;
            }
            write!(path, "{:.1},{:.1} ", frame.x(x), frame.y(y)).unwrap();
            writeln!(
                body,
                "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"2.5\" fill=\"{color}\"/>",
                frame.x(x),
                frame.y(y)
            )
            .unwrap();
        }
        writeln!(
            body,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            path.trim_end()
        )
        .unwrap();
    }
    legend(
        &mut body,
        &series.iter().map(|s| s.label.clone()).collect::<Vec<_>>(),
    );
    document(&body)
}

/// Grouped bar chart over categorical x positions.
pub fn bar_chart(
    title: &str,
    x_label: &str,
    y_label: &str,
    categories: &[String],
    series: &[Series],
) -> String {
    assert!(
        !categories.is_empty() && !series.is_empty(),
        "empty bar chart"
    );
    let y_max = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.1))
        .fold(f64::NEG_INFINITY, f64::max)
        .max(1e-12);
    let frame = Frame {
        x_min: 0.0,
        x_max: categories.len() as f64,
        y_min: 0.0,
        y_max: y_max * 1.1,
        y_scale: YScale::Linear,
    };
    let mut body = String::new();
    axes(&mut body, &frame, title, x_label, y_label);
    let slot = frame.x(1.0) - frame.x(0.0);
    let bar = slot / (series.len() as f64 + 1.0);
    for (si, s) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        for &(ci, v) in &s.points {
            let x = frame.x(ci) + bar * (si as f64 + 0.5);
            let y = frame.y(v);
            let base = frame.y(0.0);
            writeln!(
                body,
                "<rect x=\"{x:.1}\" y=\"{y:.1}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"{color}\"/>",
                bar * 0.9,
                (base - y).max(0.0)
            )
            .unwrap();
        }
    }
    for (i, c) in categories.iter().enumerate() {
        writeln!(
            body,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
            frame.x(i as f64 + 0.5),
            HEIGHT - MARGIN_B + 20.0,
            escape(c)
        )
        .unwrap();
    }
    legend(
        &mut body,
        &series.iter().map(|s| s.label.clone()).collect::<Vec<_>>(),
    );
    document(&body)
}

/// Speed heatmap with velocity arrows on an nx x ny lattice.
pub fn velocity_heatmap(
    title: &str,
    nx: usize,
    ny: usize,
    speed: &[f64],
    velocity: &[[f64; 2]],
) -> String {
    assert_eq!(speed.len(), nx * ny);
    assert_eq!(velocity.len(), nx * ny);
    let v_max = speed.iter().cloned().fold(1e-12, f64::max);
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let cell = (plot_w / nx as f64).min(plot_h / ny as f64);
    let mut body = String::new();
    writeln!(
        body,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"16\">{}</text>",
        MARGIN_L + cell * nx as f64 / 2.0,
        MARGIN_T - 20.0,
        escape(title)
    )
    .unwrap();
    for y in 0..ny {
        for x in 0..nx {
            let s = speed[y * nx + x] / v_max;
            // blue -> red ramp
            let r = (255.0 * s) as u8;
            let b = (255.0 * (1.0 - s)) as u8;
            let g = (120.0 * (1.0 - (2.0 * s - 1.0).abs())) as u8;
            let px = MARGIN_L + x as f64 * cell;
            // flip so y grows upward
            let py = MARGIN_T + (ny - 1 - y) as f64 * cell;
            writeln!(
                body,
                "<rect x=\"{px:.1}\" y=\"{py:.1}\" width=\"{cell:.2}\" height=\"{cell:.2}\" \
                 fill=\"rgb({r},{g},{b})\"/>"
            )
            .unwrap();
        }
    }
    // arrows on a coarse sub-grid
    let stride = (nx / 16).max(1);
    for y in (0..ny).step_by(stride) {
        for x in (0..nx).step_by(stride) {
            let v = velocity[y * nx + x];
            let mag = (v[0] * v[0] + v[1] * v[1]).sqrt();
            if mag < v_max * 0.02 {
                continue;
            }
            let scale = cell * stride as f64 * 0.8 / v_max;
            let cx = MARGIN_L + (x as f64 + 0.5) * cell;
            let cy = MARGIN_T + (ny as f64 - y as f64 - 0.5) * cell;
            let dx = v[0] * scale;
            let dy = -v[1] * scale;
            writeln!(
                body,
                "<line x1=\"{:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" \
                 stroke=\"black\" stroke-width=\"1\"/>\
                 <circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"1.4\" fill=\"black\"/>",
                cx - dx / 2.0,
                cy - dy / 2.0,
                cx + dx / 2.0,
                cy + dy / 2.0,
                cx + dx / 2.0,
                cy + dy / 2.0
            )
            .unwrap();
        }
    }
    writeln!(
        body,
        "<text x=\"{:.1}\" y=\"{:.1}\">max speed = {v_max:.4}</text>",
        MARGIN_L,
        MARGIN_T + cell * ny as f64 + 25.0
    )
    .unwrap();
    document(&body)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_chart_renders_points() {
        let svg = line_chart(
            "t",
            "x",
            "y",
            YScale::Log,
            &[Series {
                label: "a".to_string(),
                points: vec![(0.0, 1e-3), (1.0, 1e-2), (2.0, 0.0)],
            }],
        );
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("polyline"));
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn heatmap_renders_cells() {
        let speed = vec![0.0, 0.5, 1.0, 0.25];
        let vel = vec![[0.0, 0.0], [0.5, 0.0], [0.0, 1.0], [0.2, 0.1]];
        let svg = velocity_heatmap("t", 2, 2, &speed, &vel);
        assert!(svg.matches("<rect").count() >= 4);
    }
}
