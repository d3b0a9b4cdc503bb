//! Self-contained SVG line charts, byte-deterministic for a given spec.

use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 160.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 55.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];
/// Floor applied to values drawn on a log axis.
const LOG_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSeries {
    pub label: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    #[serde(default)]
    pub log_x: bool,
    #[serde(default)]
    pub log_y: bool,
    pub series: Vec<PlotSeries>,
}

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn transform(v: f64, log: bool) -> f64 {
    if log {
        v.max(LOG_FLOOR).log10()
    } else {
        v
    }
}

fn fmt_tick(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        "0".to_string()
    } else if !(1e-3..1e4).contains(&a) {
        format!("{v:.2e}")
    } else {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    }
}

/// Renders the spec as a standalone SVG document with one polyline per
/// series, tick-labelled axes, and a legend.
pub fn emit_svg(spec: &PlotSpec) -> Result<String, HarnessError> {
    if spec.series.is_empty() {
        return Err(HarnessError::Plot("no series to plot".into()));
    }
    for s in &spec.series {
        if s.xs.is_empty() || s.xs.len() != s.ys.len() {
            return Err(HarnessError::Plot(format!(
                "series '{}' needs equal nonzero x/y lengths, got {}/{}",
                s.label,
                s.xs.len(),
                s.ys.len()
            )));
        }
    }

    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for s in &spec.series {
        for &x in &s.xs {
            let t = transform(x, spec.log_x);
            x_min = x_min.min(t);
            x_max = x_max.max(t);
        }
        for &y in &s.ys {
            let t = transform(y, spec.log_y);
            y_min = y_min.min(t);
            y_max = y_max.max(t);
        }
    }
    if x_min == x_max {
        x_min -= 0.5;
        x_max += 0.5;
    }
    if y_min == y_max {
        y_min -= 0.5;
        y_max += 0.5;
    }
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let px = |t: f64| MARGIN_LEFT + (t - x_min) / (x_max - x_min) * plot_w;
    let py = |t: f64| MARGIN_TOP + (y_max - t) / (y_max - y_min) * plot_h;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"16\">{}</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        escape_xml(&spec.title)
    ));

    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{l:.2}\" y1=\"{b:.2}\" x2=\"{r:.2}\" y2=\"{b:.2}\" stroke=\"black\"/>\n\
         <line x1=\"{l:.2}\" y1=\"{t:.2}\" x2=\"{l:.2}\" y2=\"{b:.2}\" stroke=\"black\"/>\n",
        l = MARGIN_LEFT,
        r = MARGIN_LEFT + plot_w,
        t = MARGIN_TOP,
        b = MARGIN_TOP + plot_h,
    ));

    let ticks = 5usize;
    for i in 0..ticks {
        let frac = i as f64 / (ticks - 1) as f64;
        let tx = x_min + frac * (x_max - x_min);
        let x_px = px(tx);
        let bottom = MARGIN_TOP + plot_h;
        let x_value = if spec.log_x { 10f64.powf(tx) } else { tx };
        svg.push_str(&format!(
            "<line x1=\"{x_px:.2}\" y1=\"{bottom:.2}\" x2=\"{x_px:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\n",
            bottom + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{x_px:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
             font-size=\"11\">{}</text>\n",
            bottom + 18.0,
            fmt_tick(x_value)
        ));

        let ty = y_min + frac * (y_max - y_min);
        let y_px = py(ty);
        let y_value = if spec.log_y { 10f64.powf(ty) } else { ty };
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{y_px:.2}\" x2=\"{:.2}\" y2=\"{y_px:.2}\" stroke=\"black\"/>\n",
            MARGIN_LEFT - 5.0,
            MARGIN_LEFT
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-family=\"sans-serif\" \
             font-size=\"11\">{}</text>\n",
            MARGIN_LEFT - 8.0,
            y_px + 4.0,
            fmt_tick(y_value)
        ));
    }

    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"13\">{}</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 12.0,
        escape_xml(&spec.x_label)
    ));
    svg.push_str(&format!(
        "<text x=\"18\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"13\" transform=\"rotate(-90 18 {:.2})\">{}</text>\n",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        escape_xml(&spec.y_label)
    ));

    // Series polylines and legend.
    for (i, s) in spec.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut points = String::new();
        for (x, y) in s.xs.iter().zip(&s.ys) {
            points.push_str(&format!(
                "{:.2},{:.2} ",
                px(transform(*x, spec.log_x)),
                py(transform(*y, spec.log_y))
            ));
        }
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            points.trim_end()
        ));
        let ly = MARGIN_TOP + 14.0 + 18.0 * i as f64;
        let lx = WIDTH - MARGIN_RIGHT + 16.0;
        svg.push_str(&format!(
            "<rect x=\"{lx:.2}\" y=\"{:.2}\" width=\"14\" height=\"4\" fill=\"{color}\"/>\n",
            ly - 4.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{ly:.2}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            lx + 20.0,
            escape_xml(&s.label)
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point_spec() -> PlotSpec {
        PlotSpec {
            title: "loss".into(),
            x_label: "iteration".into(),
            y_label: "value".into(),
            log_x: false,
            log_y: false,
            series: vec![PlotSeries {
                label: "adam".into(),
                xs: vec![1.0, 2.0],
                ys: vec![0.5, 0.25],
            }],
        }
    }

    #[test]
    fn one_series_yields_one_polyline() {
        let svg = emit_svg(&two_point_spec()).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 1);
    }

    #[test]
    fn identical_specs_yield_identical_bytes() {
        let a = emit_svg(&two_point_spec()).unwrap();
        let b = emit_svg(&two_point_spec()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_series_is_rejected() {
        let mut spec = two_point_spec();
        spec.series.clear();
        assert!(emit_svg(&spec).is_err());
        let mut ragged = two_point_spec();
        ragged.series[0].ys.pop();
        assert!(emit_svg(&ragged).is_err());
    }

    #[test]
    fn labels_are_escaped() {
        let mut spec = two_point_spec();
        spec.series[0].label = "a<b&c".into();
        let svg = emit_svg(&spec).unwrap();
        assert!(svg.contains("a&lt;b&amp;c"));
    }
}
