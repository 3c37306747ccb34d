//! Self-contained SVG figures: speed-colored trajectories, metric curves and
//! reduction bars.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::ensemble::ComparisonTable;
use crate::io::TrajectoryRow;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 120.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 55.0;
const SPEED_BINS: usize = 24;

// viridis anchors, low to high
const GRADIENT: [(u8, u8, u8); 5] = [
    (68, 1, 84),
    (59, 82, 139),
    (33, 145, 140),
    (94, 201, 98),
    (253, 231, 37),
];

const PALETTE: [&str; 8] = [
    "#4d4d4d", "#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00", "#a65628", "#f781bf",
];

/// Perceptually ordered color for `speed` on `[0, max_speed]`.
pub fn speed_color(speed: f64, max_speed: f64) -> String {
    let u = if max_speed > 0.0 {
        (speed / max_speed).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let scaled = u * (GRADIENT.len() - 1) as f64;
    let i = (scaled.floor() as usize).min(GRADIENT.len() - 2);
    let f = scaled - i as f64;
    let lerp = |a: u8, b: u8| (a as f64 + f * (b as f64 - a as f64)).round() as u8;
    let (a, b) = (GRADIENT[i], GRADIENT[i + 1]);
    format!("#{:02x}{:02x}{:02x}", lerp(a.0, b.0), lerp(a.1, b.1), lerp(a.2, b.2))
}

/// Linear map from data ranges onto the plotting area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
}

impl Frame {
    fn new(x_range: (f64, f64), y_range: (f64, f64)) -> Self {
        let widen = |(lo, hi): (f64, f64)| {
            if hi > lo {
                (lo, hi)
            } else {
                (lo - 0.5, lo + 0.5)
            }
        };
        Self {
            x_range: widen(x_range),
            y_range: widen(y_range),
        }
    }

    pub fn px(&self, x: f64) -> f64 {
        let (lo, hi) = self.x_range;
        MARGIN_LEFT + (x - lo) / (hi - lo) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    pub fn py(&self, y: f64) -> f64 {
        let (lo, hi) = self.y_range;
        HEIGHT - MARGIN_BOTTOM - (y - lo) / (hi - lo) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    if span.is_nan() || span <= 0.0 {
        return vec![lo];
    }
    let raw = span / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn header(out: &mut String, title: &str) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="22" text-anchor="middle" font-size="15">{}</text>
"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, frame: &Frame, x_label: &str, y_label: &str) {
    let (x0, x1) = (frame.px(frame.x_range.0), frame.px(frame.x_range.1));
    let (y0, y1) = (frame.py(frame.y_range.0), frame.py(frame.y_range.1));
    let _ = writeln!(
        out,
        r#"<g class="axes" stroke="black" fill="none"><path d="M{x0:.2},{y1:.2} L{x0:.2},{y0:.2} L{x1:.2},{y0:.2}"/></g>"#
    );
    out.push_str("<g class=\"ticks\" fill=\"black\">\n");
    for t in ticks(frame.x_range.0, frame.x_range.1) {
        let x = frame.px(t);
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            y0 + 5.0,
            y0 + 19.0,
            tick_label(t)
        );
    }
    for t in ticks(frame.y_range.0, frame.y_range.1) {
        let y = frame.py(t);
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            y + 4.0,
            tick_label(t)
        );
    }
    let _ = writeln!(
        out,
        r#"</g>
<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>
<text transform="translate(18,{:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 12.0,
        escape(x_label),
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn tick_label(t: f64) -> String {
    let s = format!("{t:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn points_attr(frame: &Frame, pts: &[(f64, f64)]) -> String {
    let mut s = String::new();
    for (i, &(x, y)) in pts.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{:.2},{:.2}", frame.px(x), frame.py(y));
    }
    s
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Time-space diagram, each trajectory colored by speed.
///
/// With `ring_length`, positions are folded onto `[0, L)` and lines break
/// where a vehicle wraps around.
pub fn trajectory_svg(rows: &[TrajectoryRow], max_speed: f64, ring_length: Option<f64>, title: &str) -> String {
    let mut by_vehicle: BTreeMap<usize, Vec<&TrajectoryRow>> = BTreeMap::new();
    for row in rows {
        by_vehicle.entry(row.vehicle).or_default().push(row);
    }
    let fold = |x: f64| ring_length.map_or(x, |l| x.rem_euclid(l));
    let x_range = range(rows.iter().map(|r| r.t));
    let y_range = match ring_length {
        Some(l) => (0.0, l),
        None => range(rows.iter().map(|r| r.position)),
    };
    let frame = Frame::new(x_range, y_range);

    let mut out = String::new();
    header(&mut out, title);
    out.push_str("<g class=\"trajectories\" fill=\"none\" stroke-width=\"0.8\">\n");
    let bin = |v: f64| ((v / max_speed).clamp(0.0, 1.0) * (SPEED_BINS - 1) as f64).round() as usize;
    for (vehicle, mut samples) in by_vehicle {
        samples.sort_by(|a, b| a.t.total_cmp(&b.t));
        let mut run: Vec<(f64, f64)> = Vec::new();
        let mut run_bin = None;
        let flush = |out: &mut String, run: &mut Vec<(f64, f64)>, b: Option<usize>| {
            if run.len() >= 2 {
                let speed = b.unwrap_or(0) as f64 / (SPEED_BINS - 1) as f64 * max_speed;
                let _ = writeln!(
                    out,
                    r#"<polyline data-vehicle="{vehicle}" stroke="{}" points="{}"/>"#,
                    speed_color(speed, max_speed),
                    points_attr(&frame, run)
                );
            }
            run.clear();
        };
        for pair in samples.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let seg_bin = bin(0.5 * (a.speed + b.speed));
            let (ya, yb) = (fold(a.position), fold(b.position));
            if ring_length.is_some() && yb < ya {
                flush(&mut out, &mut run, run_bin);
                run.push((b.t, yb));
                run_bin = Some(seg_bin);
                continue;
            }
            if run_bin != Some(seg_bin) {
                let last = run.last().copied();
                flush(&mut out, &mut run, run_bin);
                run.extend(last);
                run_bin = Some(seg_bin);
            }
            if run.is_empty() {
                run.push((a.t, ya));
            }
            run.push((b.t, yb));
        }
        flush(&mut out, &mut run, run_bin);
    }
    out.push_str("</g>\n");
    axes(&mut out, &frame, "time [s]", "position [m]");
    colorbar(&mut out, max_speed);
    out.push_str("</svg>\n");
    out
}

fn colorbar(out: &mut String, max_speed: f64) {
    let x = WIDTH - MARGIN_RIGHT + 30.0;
    let top = MARGIN_TOP;
    let height = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let steps = 50;
    out.push_str("<g class=\"colorbar\">\n");
    for i in 0..steps {
        let v = (i as f64 + 0.5) / steps as f64 * max_speed;
        let y = top + height * (1.0 - (i + 1) as f64 / steps as f64);
        let _ = writeln!(
            out,
            r#"<rect x="{x:.2}" y="{y:.2}" width="16" height="{:.2}" fill="{}"/>"#,
            height / steps as f64 + 0.5,
            speed_color(v, max_speed)
        );
    }
    for t in ticks(0.0, max_speed) {
        let y = top + height * (1.0 - t / max_speed);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            x + 20.0,
            y + 4.0,
            tick_label(t)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}">speed [m/s]</text></g>"#,
        x - 10.0,
        top - 8.0
    );
}

/// A labelled line in a curve plot.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Line chart of one or more series sharing axes.
pub fn curves_svg(series: &[Series], title: &str, x_label: &str, y_label: &str) -> String {
    let all = || series.iter().flat_map(|s| s.points.iter());
    let (y_lo, y_hi) = range(all().map(|p| p.1));
    let frame = Frame::new(range(all().map(|p| p.0)), (y_lo.min(0.0), y_hi));
    let mut out = String::new();
    header(&mut out, title);
    out.push_str("<g class=\"series\" fill=\"none\" stroke-width=\"1.5\">\n");
    for (i, s) in series.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<polyline data-label="{}" stroke="{}" points="{}"/>"#,
            escape(&s.label),
            PALETTE[i % PALETTE.len()],
            points_attr(&frame, &s.points)
        );
    }
    out.push_str("</g>\n");
    axes(&mut out, &frame, x_label, y_label);
    legend(&mut out, series.iter().map(|s| s.label.as_str()));
    out.push_str("</svg>\n");
    out
}

fn legend<'a>(out: &mut String, labels: impl Iterator<Item = &'a str>) {
    let x = WIDTH - MARGIN_RIGHT + 15.0;
    out.push_str("<g class=\"legend\">\n");
    for (i, label) in labels.enumerate() {
        let y = MARGIN_TOP + 10.0 + 18.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            x + 20.0,
            PALETTE[i % PALETTE.len()],
            x + 25.0,
            y + 4.0,
            escape(label)
        );
    }
    out.push_str("</g>\n");
}

/// Bar chart of the reduction of each comparison row.
pub fn comparison_svg(table: &ComparisonTable, title: &str) -> String {
    let n = table.rows.len().max(1);
    let (lo, hi) = range(table.rows.iter().map(|r| r.reduction_pct));
    let frame = Frame::new((0.0, n as f64), (lo.min(0.0), hi.max(0.0)));
    let mut out = String::new();
    header(&mut out, title);
    out.push_str("<g class=\"bars\">\n");
    for (i, row) in table.rows.iter().enumerate() {
        let (x0, x1) = (frame.px(i as f64 + 0.15), frame.px(i as f64 + 0.85));
        let (ya, yb) = (frame.py(0.0), frame.py(row.reduction_pct));
        let label = format!("{} {}%", row.kind, tick_label(100.0 * row.mpr));
        let _ = writeln!(
            out,
            r#"<rect data-label="{}" x="{x0:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/><text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="10">{}</text>"#,
            escape(&label),
            ya.min(yb),
            x1 - x0,
            (ya - yb).abs(),
            PALETTE[i % PALETTE.len()],
            (x0 + x1) / 2.0,
            ya.min(yb) - 4.0,
            escape(&label)
        );
    }
    out.push_str("</g>\n");
    axes(&mut out, &frame, "configuration", "reduction vs HV baseline [%]");
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn colormap_endpoints_and_order() {
        assert_eq!(speed_color(0.0, 25.0), "#440154");
        assert_eq!(speed_color(25.0, 25.0), "#fde725");
        assert_eq!(speed_color(-3.0, 25.0), "#440154");
        assert_eq!(speed_color(40.0, 25.0), "#fde725");
        // green channel rises monotonically along the gradient
        let greens: Vec<u8> = (0..=20)
            .map(|i| {
                let c = speed_color(i as f64 * 1.25, 25.0);
                u8::from_str_radix(&c[3..5], 16).unwrap()
            })
            .collect();
        assert!(greens.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn ticks_are_round() {
        assert_eq!(ticks(0.0, 25.0), vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0]);
        assert_eq!(ticks(0.0, 1.0).len(), 6);
    }

    #[test]
    fn curve_points_map_to_frame() {
        let s = Series {
            label: "HV".into(),
            points: vec![(1.0, 0.0), (2.0, 2.0), (3.0, 4.0)],
        };
        let svg = curves_svg(&[s], "t", "x", "y");
        let frame = Frame::new((1.0, 3.0), (0.0, 4.0));
        let expected = format!(
            r#"data-label="HV" stroke="{}" points="{:.2},{:.2} {:.2},{:.2} {:.2},{:.2}""#,
            PALETTE[0],
            frame.px(1.0),
            frame.py(0.0),
            frame.px(2.0),
            frame.py(2.0),
            frame.px(3.0),
            frame.py(4.0)
        );
        assert!(svg.contains(&expected), "{svg}");
    }

    #[test]
    fn ring_trajectories_break_at_wrap() {
        let rows: Vec<TrajectoryRow> = (0..6)
            .map(|k| TrajectoryRow {
                t: k as f64,
                vehicle: 1,
                kind: "HV".into(),
                position: 40.0 * k as f64,
                speed: 10.0,
            })
            .collect();
        let svg = trajectory_svg(&rows, 25.0, Some(100.0), "ring");
        // folded: 0,40,80 | 20,60 | 0; the lone last point draws nothing
        assert_eq!(svg.matches("<polyline").count(), 2);
        let open = trajectory_svg(&rows, 25.0, None, "open");
        assert_eq!(open.matches("<polyline").count(), 1);
    }
}
