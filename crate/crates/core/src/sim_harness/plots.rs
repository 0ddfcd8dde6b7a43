//! Static SVG line charts for run diagnostics. Hand-rolled on purpose: the
//! three panels need nothing beyond polylines, axes, and a legend.

use std::path::Path;

use crate::error::Result;

use super::StepRecord;

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 50.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
}

struct Chart {
    title: String,
    x_label: String,
    y_label: String,
    /// Values are plotted as log10; tick labels show 10^k.
    log_y: bool,
    series: Vec<Series>,
}

fn fmt_tick(v: f64, log_y: bool) -> String {
    if log_y {
        return format!("1e{}", v.round() as i64);
    }
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if (1e-3..1e4).contains(&a) {
        format!("{v:.3}")
    } else {
        format!("{v:.1e}")
    }
}

impl Chart {
    fn render(&self) -> String {
        let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;

        let mut x_min = f64::INFINITY;
        let mut x_max = f64::NEG_INFINITY;
        let mut y_min = f64::INFINITY;
        let mut y_max = f64::NEG_INFINITY;
        for s in &self.series {
            for &(x, y) in &s.points {
                x_min = x_min.min(x);
                x_max = x_max.max(x);
                y_min = y_min.min(y);
                y_max = y_max.max(y);
            }
        }
        if !x_min.is_finite() {
            x_min = 0.0;
            x_max = 1.0;
            y_min = 0.0;
            y_max = 1.0;
        }
        if x_max - x_min < 1e-12 {
            x_max = x_min + 1.0;
        }
        if y_max - y_min < 1e-12 {
            y_max = y_min + 1.0;
            y_min -= 1.0;
        }
        let pad = 0.05 * (y_max - y_min);
        y_min -= pad;
        y_max += pad;

        let sx = |x: f64| MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w;
        let sy = |y: f64| MARGIN_TOP + (y_max - y) / (y_max - y_min) * plot_h;

        let mut svg = String::new();
        svg.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
             viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n"
        ));
        svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
            WIDTH / 2.0,
            self.title
        ));

        // Gridlines and tick labels, five per axis.
        for i in 0..=5 {
            let f = i as f64 / 5.0;
            let xv = x_min + f * (x_max - x_min);
            let yv = y_min + f * (y_max - y_min);
            let px = sx(xv);
            let py = sy(yv);
            svg.push_str(&format!(
                "<line x1=\"{px:.1}\" y1=\"{MARGIN_TOP}\" x2=\"{px:.1}\" y2=\"{:.1}\" \
                 stroke=\"#ddd\"/>\n",
                MARGIN_TOP + plot_h
            ));
            svg.push_str(&format!(
                "<line x1=\"{MARGIN_LEFT}\" y1=\"{py:.1}\" x2=\"{:.1}\" y2=\"{py:.1}\" \
                 stroke=\"#ddd\"/>\n",
                MARGIN_LEFT + plot_w
            ));
            svg.push_str(&format!(
                "<text x=\"{px:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
                MARGIN_TOP + plot_h + 18.0,
                fmt_tick(xv, false)
            ));
            svg.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>\n",
                MARGIN_LEFT - 6.0,
                py + 4.0,
                fmt_tick(yv, self.log_y)
            ));
        }
        svg.push_str(&format!(
            "<rect x=\"{MARGIN_LEFT}\" y=\"{MARGIN_TOP}\" width=\"{plot_w}\" height=\"{plot_h}\" \
             fill=\"none\" stroke=\"#444\"/>\n"
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\n",
            MARGIN_LEFT + plot_w / 2.0,
            HEIGHT - 12.0,
            self.x_label
        ));
        svg.push_str(&format!(
            "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" \
             transform=\"rotate(-90 16 {:.1})\">{}</text>\n",
            MARGIN_TOP + plot_h / 2.0,
            MARGIN_TOP + plot_h / 2.0,
            self.y_label
        ));

        for (idx, s) in self.series.iter().enumerate() {
            let color = PALETTE[idx % PALETTE.len()];
            let pts: Vec<String> = s
                .points
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            svg.push_str(&format!(
                "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.2\" points=\"{}\"/>\n",
                pts.join(" ")
            ));
            let lx = MARGIN_LEFT + 10.0 + 110.0 * (idx % 6) as f64;
            let ly = MARGIN_TOP + 14.0 + 16.0 * (idx / 6) as f64;
            svg.push_str(&format!(
                "<line x1=\"{lx:.1}\" y1=\"{:.1}\" x2=\"{:.1}\" y2=\"{:.1}\" \
                 stroke=\"{color}\" stroke-width=\"2\"/>\n",
                ly - 4.0,
                lx + 18.0,
                ly - 4.0
            ));
            svg.push_str(&format!(
                "<text x=\"{:.1}\" y=\"{ly:.1}\">{}</text>\n",
                lx + 24.0,
                s.label
            ));
        }
        svg.push_str("</svg>\n");
        svg
    }
}

/// Tracking-error components `x_i(t) - xm_i(t)` over time.
pub fn tracking_error_svg(steps: &[StepRecord]) -> String {
    let n = steps.first().map_or(0, |s| s.x.len());
    let series = (0..n)
        .map(|i| Series {
            label: format!("e_{}", i + 1),
            points: steps
                .iter()
                .map(|s| (s.t as f64, s.x[i] - s.xm[i]))
                .collect(),
        })
        .collect();
    Chart {
        title: "Tracking error".to_string(),
        x_label: "step".to_string(),
        y_label: "x - xm".to_string(),
        log_y: false,
        series,
    }
    .render()
}

/// Gain-matching error over time, log scale. Non-positive values are
/// clamped to the smallest positive one so the log is defined.
pub fn matching_error_svg(steps: &[StepRecord]) -> String {
    let floor = steps
        .iter()
        .map(|s| s.matching_error)
        .filter(|&v| v > 0.0)
        .fold(f64::INFINITY, f64::min)
        .min(1e-300);
    let points = steps
        .iter()
        .map(|s| (s.t as f64, s.matching_error.max(floor).log10()))
        .collect();
    Chart {
        title: "Matching error".to_string(),
        x_label: "step".to_string(),
        y_label: "matching error".to_string(),
        log_y: true,
        series: vec![Series {
            label: "||[A+BK-Am, BL-Bm]||_F".to_string(),
            points,
        }],
    }
    .render()
}

/// Applied input components over time.
pub fn input_svg(steps: &[StepRecord]) -> String {
    let m = steps.first().map_or(0, |s| s.u.len());
    let series = (0..m)
        .map(|i| Series {
            label: format!("u_{}", i + 1),
            points: steps.iter().map(|s| (s.t as f64, s.u[i])).collect(),
        })
        .collect();
    Chart {
        title: "Control input".to_string(),
        x_label: "step".to_string(),
        y_label: "u".to_string(),
        log_y: false,
        series,
    }
    .render()
}

/// Write the three diagnostic panels into `dir` as `tracking_error.svg`,
/// `matching_error.svg`, and `input.svg`.
pub fn export_all(steps: &[StepRecord], dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("tracking_error.svg"), tracking_error_svg(steps))?;
    std::fs::write(dir.join("matching_error.svg"), matching_error_svg(steps))?;
    std::fs::write(dir.join("input.svg"), input_svg(steps))?;
    Ok(())
}
