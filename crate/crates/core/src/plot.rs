//! Standalone SVG line charts of trace columns. A viewing aid only: fixed
//! size, time on the x axis, one polyline per requested column.

use crate::error::{Error, Result};
use crate::trace::SimTrace;
use std::path::Path;

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 540.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 42.0;
const MARGIN_B: f64 = 52.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
];

/// Tick positions at a "nice" spacing covering `[lo, hi]`.
fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = (hi - lo).max(f64::MIN_POSITIVE);
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let step = if norm < 1.5 {
        1.0
    } else if norm < 3.0 {
        2.0
    } else if norm < 7.0 {
        5.0
    } else {
        10.0
    } * mag;
    let first = (lo / step).ceil() * step;
    let mut ticks = Vec::new();
    let mut v = first;
    while v <= hi + step * 1e-9 {
        ticks.push(if v.abs() < step * 1e-9 { 0.0 } else { v });
        v += step;
    }
    ticks
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v.abs() >= 1000.0 || v.abs() < 0.001 {
        format!("{v:.1e}")
    } else {
        let s = format!("{v:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Render the given columns against time into an SVG string.
pub fn render_plot(trace: &SimTrace, columns: &[&str], title: &str) -> Result<String> {
    if trace.rows.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let t = trace.column("t")?;
    let series: Vec<(String, Vec<f64>)> = columns
        .iter()
        .map(|&name| Ok((name.to_string(), trace.column(name)?)))
        .collect::<Result<_>>()?;

    let (t_lo, t_hi) = (t[0], *t.last().unwrap());
    let mut y_lo = f64::INFINITY;
    let mut y_hi = f64::NEG_INFINITY;
    for (_, ys) in &series {
        for &y in ys {
            y_lo = y_lo.min(y);
            y_hi = y_hi.max(y);
        }
    }
    if !(y_lo.is_finite() && y_hi.is_finite()) {
        return Err(Error::Validation("non-finite values in plot data".into()));
    }
    if y_hi - y_lo < 1e-12 {
        y_lo -= 1.0;
        y_hi += 1.0;
    } else {
        let pad = 0.05 * (y_hi - y_lo);
        y_lo -= pad;
        y_hi += pad;
    }
    let t_span = (t_hi - t_lo).max(f64::MIN_POSITIVE);

    let px = |tv: f64| MARGIN_L + (tv - t_lo) / t_span * (WIDTH - MARGIN_L - MARGIN_R);
    let py = |yv: f64| HEIGHT - MARGIN_B - (yv - y_lo) / (y_hi - y_lo) * (HEIGHT - MARGIN_T - MARGIN_B);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" \
         text-anchor=\"middle\">{}</text>\n",
        WIDTH / 2.0,
        xml_escape(title)
    ));

    // gridlines and ticks
    for tick in nice_ticks(t_lo, t_hi, 8) {
        let x = px(tick);
        svg.push_str(&format!(
            "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#dddddd\"/>\n",
            MARGIN_T,
            HEIGHT - MARGIN_B
        ));
        svg.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"middle\">{}</text>\n",
            HEIGHT - MARGIN_B + 16.0,
            fmt_tick(tick)
        ));
    }
    for tick in nice_ticks(y_lo, y_hi, 6) {
        let y = py(tick);
        svg.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#dddddd\"/>\n",
            MARGIN_L,
            WIDTH - MARGIN_R
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"end\">{}</text>\n",
            MARGIN_L - 6.0,
            y + 4.0,
            fmt_tick(tick)
        ));
    }

    // axes
    svg.push_str(&format!(
        "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{:.2}\" height=\"{:.2}\" \
         fill=\"none\" stroke=\"#333333\"/>\n",
        WIDTH - MARGIN_L - MARGIN_R,
        HEIGHT - MARGIN_T - MARGIN_B
    ));
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" \
         text-anchor=\"middle\">t [s]</text>\n",
        WIDTH / 2.0,
        HEIGHT - 12.0
    ));

    // series
    for (i, (name, ys)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut points = String::new();
        for (tv, yv) in t.iter().zip(ys.iter()) {
            points.push_str(&format!("{:.2},{:.2} ", px(*tv), py(*yv)));
        }
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.4\" \
             points=\"{}\"/>\n",
            points.trim_end()
        ));
        // legend entry
        let lx = WIDTH - MARGIN_R - 130.0;
        let ly = MARGIN_T + 16.0 + 18.0 * i as f64;
        svg.push_str(&format!(
            "<line x1=\"{lx:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"{color}\" \
             stroke-width=\"2\"/>\n",
            ly - 4.0,
            lx + 22.0,
            ly - 4.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{ly:.2}\" font-family=\"sans-serif\" \
             font-size=\"12\">{}</text>\n",
            lx + 28.0,
            xml_escape(name)
        ));
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Render and write a chart of the given columns.
pub fn emit_plot(trace: &SimTrace, columns: &[&str], path: &Path, title: &str) -> Result<()> {
    let svg = render_plot(trace, columns, title)?;
    std::fs::write(path, svg)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::TraceRow;

    fn sample_trace() -> SimTrace {
        let mut trace = SimTrace::default();
        for k in 0..100 {
            let t = k as f64 * 0.01;
            trace.rows.push(TraceRow {
                t,
                r: (t * 3.0).sin() * 0.2,
                x1: (t * 3.0 - 0.1).sin() * 0.21,
                xm1: (t * 3.0 - 0.05).sin() * 0.2,
                ..Default::default()
            });
        }
        trace
    }

    /// Minimal well-formedness check: tags balance and attributes are quoted.
    fn assert_well_formed_xml(text: &str) {
        let mut stack: Vec<String> = Vec::new();
        let mut rest = text;
        while let Some(start) = rest.find('<') {
            let end = rest[start..].find('>').expect("unclosed tag") + start;
            let tag = &rest[start + 1..end];
            rest = &rest[end + 1..];
            if let Some(name) = tag.strip_prefix('/') {
                let open = stack.pop().unwrap_or_else(|| panic!("stray </{name}>"));
                assert_eq!(open, name, "mismatched close tag");
            } else if !tag.ends_with('/') && !tag.starts_with('?') && !tag.starts_with('!') {
                let name: String = tag
                    .chars()
                    .take_while(|c| !c.is_whitespace())
                    .collect();
                assert_eq!(tag.matches('"').count() % 2, 0, "unbalanced quotes");
                stack.push(name);
            }
        }
        assert!(stack.is_empty(), "unclosed tags: {stack:?}");
    }

    #[test]
    fn tracking_plot_is_well_formed_and_contains_series() {
        let svg = render_plot(&sample_trace(), &["r", "x1", "xm1"], "angle tracking").unwrap();
        assert_well_formed_xml(&svg);
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert!(svg.contains(">x1<"));
        assert!(svg.contains(">xm1<"));
        assert!(svg.contains("t [s]"));
    }

    #[test]
    fn unknown_column_is_rejected() {
        assert!(matches!(
            render_plot(&sample_trace(), &["nope"], "t"),
            Err(Error::UnknownColumn(_))
        ));
    }

    #[test]
    fn empty_trace_is_rejected() {
        assert!(matches!(
            render_plot(&SimTrace::default(), &["x1"], "t"),
            Err(Error::EmptyTrace)
        ));
    }

    #[test]
    fn flat_series_still_renders() {
        let mut trace = SimTrace::default();
        for k in 0..10 {
            trace.rows.push(TraceRow {
                t: k as f64,
                ..Default::default()
            });
        }
        let svg = render_plot(&trace, &["x1"], "flat").unwrap();
        assert_well_formed_xml(&svg);
    }
}
