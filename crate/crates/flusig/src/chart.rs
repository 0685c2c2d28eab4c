//! Static SVG line and bar charts, emitted as plain strings with no
//! plotting dependency. Output is deterministic: same input, same bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::pipeline::PipelineError;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_TOP: f64 = 45.0;
const MARGIN_BOTTOM: f64 = 55.0;

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

/// One polyline of a line chart.
#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// A line chart over a shared numeric x axis.
#[derive(Debug, Clone)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Tick positions with captions; numeric ticks are derived when empty.
    pub x_ticks: Vec<(f64, String)>,
}

/// A bar chart over labeled categories.
#[derive(Debug, Clone)]
pub struct BarChart {
    pub title: String,
    pub y_label: String,
    pub bars: Vec<(String, f64)>,
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if a >= 1000.0 {
        format!("{v:.0}")
    } else if a >= 1.0 {
        format!("{v:.2}")
    } else {
        format!("{v:.4}")
    }
}

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        let span = (self.x_max - self.x_min).max(1e-12);
        MARGIN_LEFT + (v - self.x_min) / span * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        let span = (self.y_max - self.y_min).max(1e-12);
        HEIGHT - MARGIN_BOTTOM - (v - self.y_min) / span * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn open_svg(out: &mut String, title: &str) {
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{}</text>\n",
        WIDTH / 2.0,
        xml_escape(title)
    );
}

fn draw_axes(out: &mut String, frame: &Frame, x_label: &str, y_label: &str) {
    let x0 = MARGIN_LEFT;
    let x1 = WIDTH - MARGIN_RIGHT;
    let y0 = HEIGHT - MARGIN_BOTTOM;
    let y1 = MARGIN_TOP;
    let _ = write!(
        out,
        "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n\
         <line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>\n\
         <text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\">{}</text>\n\
         <text x=\"18\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\" \
         transform=\"rotate(-90 18 {})\">{}</text>\n",
        (x0 + x1) / 2.0,
        HEIGHT - 12.0,
        xml_escape(x_label),
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        xml_escape(y_label)
    );
    // horizontal grid and y tick captions
    for i in 0..=4 {
        let v = frame.y_min + (frame.y_max - frame.y_min) * i as f64 / 4.0;
        let y = frame.y(v);
        let _ = write!(
            out,
            "<line x1=\"{x0}\" y1=\"{y:.2}\" x2=\"{x1}\" y2=\"{y:.2}\" \
             stroke=\"#dddddd\" stroke-width=\"0.5\"/>\n\
             <text x=\"{}\" y=\"{:.2}\" text-anchor=\"end\" font-size=\"11\">{}</text>\n",
            x0 - 6.0,
            y + 4.0,
            fmt_num(v)
        );
    }
}

fn draw_x_ticks(out: &mut String, frame: &Frame, ticks: &[(f64, String)]) {
    let y0 = HEIGHT - MARGIN_BOTTOM;
    for (v, caption) in ticks {
        let x = frame.x(*v);
        let _ = write!(
            out,
            "<line x1=\"{x:.2}\" y1=\"{y0}\" x2=\"{x:.2}\" y2=\"{}\" stroke=\"black\"/>\n\
             <text x=\"{x:.2}\" y=\"{}\" text-anchor=\"middle\" font-size=\"10\">{}</text>\n",
            y0 + 5.0,
            y0 + 18.0,
            xml_escape(caption)
        );
    }
}

/// Renders a line chart to an SVG document string.
pub fn render_line_chart(chart: &LineChart) -> String {
    let points: Vec<(f64, f64)> = chart
        .series
        .iter()
        .flat_map(|s| s.points.iter().copied())
        .collect();
    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for (x, y) in &points {
        x_min = x_min.min(*x);
        x_max = x_max.max(*x);
        y_min = y_min.min(*y);
        y_max = y_max.max(*y);
    }
    if points.is_empty() {
        (x_min, x_max, y_min, y_max) = (0.0, 1.0, 0.0, 1.0);
    }
    if y_min == y_max {
        y_min -= 0.5;
        y_max += 0.5;
    }
    let pad = (y_max - y_min) * 0.05;
    let frame = Frame {
        x_min,
        x_max,
        y_min: y_min - pad,
        y_max: y_max + pad,
    };

    let mut out = String::new();
    open_svg(&mut out, &chart.title);
    draw_axes(&mut out, &frame, &chart.x_label, &chart.y_label);
    if chart.x_ticks.is_empty() {
        let derived: Vec<(f64, String)> = (0..=4)
            .map(|i| {
                let v = frame.x_min + (frame.x_max - frame.x_min) * i as f64 / 4.0;
                (v, fmt_num(v))
            })
            .collect();
        draw_x_ticks(&mut out, &frame, &derived);
    } else {
        draw_x_ticks(&mut out, &frame, &chart.x_ticks);
    }

    for (i, series) in chart.series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if !series.points.is_empty() {
            let coords: Vec<String> = series
                .points
                .iter()
                .map(|(x, y)| format!("{:.2},{:.2}", frame.x(*x), frame.y(*y)))
                .collect();
            let _ = writeln!(
                out,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
                coords.join(" ")
            );
        }
        // legend entry
        let ly = MARGIN_TOP + 16.0 * i as f64;
        let lx = WIDTH - MARGIN_RIGHT + 12.0;
        let _ = write!(
            out,
            "<line x1=\"{lx}\" y1=\"{ly}\" x2=\"{}\" y2=\"{ly}\" stroke=\"{color}\" \
             stroke-width=\"2\"/>\n\
             <text x=\"{}\" y=\"{}\" font-size=\"11\">{}</text>\n",
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            xml_escape(&series.name)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Renders a bar chart to an SVG document string.
pub fn render_bar_chart(chart: &BarChart) -> String {
    let y_top = chart.bars.iter().map(|(_, v)| *v).fold(0.0, f64::max);
    let y_bottom = chart.bars.iter().map(|(_, v)| *v).fold(0.0, f64::min);
    let frame = Frame {
        x_min: 0.0,
        x_max: chart.bars.len().max(1) as f64,
        y_min: y_bottom.min(0.0),
        y_max: if y_top == y_bottom {
            y_top + 1.0
        } else {
            y_top * 1.05
        },
    };

    let mut out = String::new();
    open_svg(&mut out, &chart.title);
    draw_axes(&mut out, &frame, "", &chart.y_label);

    let slot = (WIDTH - MARGIN_LEFT - MARGIN_RIGHT) / chart.bars.len().max(1) as f64;
    let bar_w = slot * 0.6;
    let base = frame.y(0.0_f64.max(frame.y_min));
    for (i, (label, value)) in chart.bars.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let x = MARGIN_LEFT + slot * i as f64 + (slot - bar_w) / 2.0;
        let y_val = frame.y(*value);
        let (top, height) = if y_val <= base {
            (y_val, base - y_val)
        } else {
            (base, y_val - base)
        };
        let _ = write!(
            out,
            "<rect x=\"{x:.2}\" y=\"{top:.2}\" width=\"{bar_w:.2}\" height=\"{height:.2}\" \
             fill=\"{color}\"/>\n\
             <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"10\">{}</text>\n\
             <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"10\">{}</text>\n",
            x + bar_w / 2.0,
            HEIGHT - MARGIN_BOTTOM + 14.0,
            xml_escape(label),
            x + bar_w / 2.0,
            top - 4.0,
            fmt_num(*value)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Renders and writes a line chart.
pub fn write_line_chart(chart: &LineChart, path: &Path) -> Result<(), PipelineError> {
    fs::write(path, render_line_chart(chart)).map_err(|source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Renders and writes a bar chart.
pub fn write_bar_chart(chart: &BarChart, path: &Path) -> Result<(), PipelineError> {
    fs::write(path, render_bar_chart(chart)).map_err(|source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Minimal XML well-formedness check: tag balance, attribute quoting,
    /// and entity validity. Good enough to catch escaping mistakes.
    fn assert_well_formed(xml: &str) {
        let mut stack: Vec<String> = Vec::new();
        let mut rest = xml;
        while let Some(start) = rest.find('<') {
            let text = &rest[..start];
            check_entities(text);
            let end = rest[start..].find('>').expect("unclosed tag") + start;
            let tag = &rest[start + 1..end];
            rest = &rest[end + 1..];
            if let Some(name) = tag.strip_prefix('/') {
                let open = stack.pop().unwrap_or_else(|| panic!("stray closer {name}"));
                assert_eq!(open, name, "mismatched tags");
            } else if let Some(body) = tag.strip_suffix('/') {
                check_attrs(body);
            } else if !tag.starts_with('?') && !tag.starts_with('!') {
                check_attrs(tag);
                let name = tag.split_whitespace().next().expect("named tag");
                stack.push(name.to_string());
            }
        }
        check_entities(rest);
        assert!(stack.is_empty(), "unclosed tags: {stack:?}");
    }

    fn check_entities(text: &str) {
        let mut rest = text;
        while let Some(i) = rest.find('&') {
            let tail = &rest[i + 1..];
            let semi = tail.find(';').expect("bare ampersand");
            let entity = &tail[..semi];
            assert!(
                matches!(entity, "amp" | "lt" | "gt" | "quot" | "apos"),
                "unknown entity &{entity};"
            );
            rest = &tail[semi + 1..];
        }
        assert!(!text.contains('<'), "unescaped angle bracket");
    }

    fn check_attrs(tag: &str) {
        let quotes = tag.chars().filter(|&c| c == '"').count();
        assert_eq!(quotes % 2, 0, "unbalanced quotes in <{tag}>");
    }

    fn sample_line() -> LineChart {
        LineChart {
            title: "weekly signal & response".to_string(),
            x_label: "week".to_string(),
            y_label: "value".to_string(),
            series: vec![
                Series {
                    name: "observed <raw>".to_string(),
                    points: (0..10).map(|i| (i as f64, (i * i) as f64)).collect(),
                },
                Series {
                    name: "fitted".to_string(),
                    points: (0..10).map(|i| (i as f64, (i * i) as f64 + 3.0)).collect(),
                },
            ],
            x_ticks: vec![(0.0, "2016-W01".to_string()), (9.0, "2016-W10".to_string())],
        }
    }

    #[test]
    fn line_chart_is_well_formed() {
        let svg = render_line_chart(&sample_line());
        assert_well_formed(&svg);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("polyline"));
        // markup in user strings is escaped
        assert!(svg.contains("observed &lt;raw&gt;"));
        assert!(svg.contains("weekly signal &amp; response"));
    }

    #[test]
    fn bar_chart_is_well_formed() {
        let chart = BarChart {
            title: "rates".to_string(),
            y_label: "ratio".to_string(),
            bars: vec![
                ("north".to_string(), 0.42),
                ("south".to_string(), 1.3),
                ("empty".to_string(), 0.0),
            ],
        };
        let svg = render_bar_chart(&chart);
        assert_well_formed(&svg);
        assert_eq!(svg.matches("<rect").count(), 4, "background + 3 bars");
    }

    #[test]
    fn empty_charts_still_render() {
        let svg = render_line_chart(&LineChart {
            title: "none".to_string(),
            x_label: "x".to_string(),
            y_label: "y".to_string(),
            series: Vec::new(),
            x_ticks: Vec::new(),
        });
        assert_well_formed(&svg);
        let svg = render_bar_chart(&BarChart {
            title: "none".to_string(),
            y_label: "y".to_string(),
            bars: Vec::new(),
        });
        assert_well_formed(&svg);
    }

    #[test]
    fn rendering_is_deterministic() {
        let chart = sample_line();
        assert_eq!(render_line_chart(&chart), render_line_chart(&chart));
    }

    #[test]
    fn numeric_captions_are_compact() {
        assert_eq!(fmt_num(0.0), "0");
        assert_eq!(fmt_num(1234.0), "1234");
        assert_eq!(fmt_num(3.14159), "3.14");
        assert_eq!(fmt_num(0.0625), "0.0625");
        assert_eq!(fmt_num(0.031254), "0.0313");
    }
}
