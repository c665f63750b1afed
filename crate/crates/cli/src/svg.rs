//! Hand-written SVG for report plots and Monte Carlo tables.

use spikegof::gof::{PlotData, SeriesKind};
use spikegof::harness::{CoverageRow, JointRow};
use std::fmt::Write;

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 360.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 16.0;
const TOP: f64 = 32.0;
const BOTTOM: f64 = 48.0;

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Option<Self> {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite() && (!log || *v > 0.0)) {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            return None;
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        let pad = 0.04 * (hi - lo);
        Some(Self { lo: lo - pad, hi: hi + pad, log })
    }

    fn unit(&self, v: f64) -> Option<f64> {
        let v = if self.log {
            if v <= 0.0 {
                return None;
            }
            v.log10()
        } else {
            v
        };
        v.is_finite().then(|| (v - self.lo) / (self.hi - self.lo))
    }

    fn ticks(&self) -> Vec<f64> {
        if self.log {
            // 1-2-5 ticks when the range spans fewer than three decades
            let mantissas: &[f64] = if self.hi - self.lo < 3.0 { &[1.0, 2.0, 5.0] } else { &[1.0] };
            let (a, b) = (self.lo.floor() as i32, self.hi.ceil() as i32);
            return (a..=b)
                .flat_map(|e| mantissas.iter().map(move |m| m * 10f64.powi(e)))
                .filter(|t| (self.lo..=self.hi).contains(&t.log10()))
                .collect();
        }
        let span = self.hi - self.lo;
        let raw = span / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| span / s <= 6.0).unwrap_or(10.0 * mag);
        let first = (self.lo / step).ceil() as i64;
        let last = (self.hi / step).floor() as i64;
        (first..=last).map(|k| k as f64 * step).collect()
    }
}

struct Canvas {
    x: Axis,
    y: Axis,
    body: String,
}

impl Canvas {
    fn new(x: Axis, y: Axis) -> Self {
        Self { x, y, body: String::new() }
    }

    fn px(&self, x: f64) -> Option<f64> {
        self.x.unit(x).map(|u| LEFT + u * (WIDTH - LEFT - RIGHT))
    }

    fn py(&self, y: f64) -> Option<f64> {
        self.y.unit(y).map(|u| HEIGHT - BOTTOM - u * (HEIGHT - TOP - BOTTOM))
    }

    fn point(&self, x: f64, y: f64) -> Option<(f64, f64)> {
        Some((self.px(x)?, self.py(y)?))
    }

    fn polyline(&mut self, xs: &[f64], ys: &[f64], step: bool, style: &str) {
        let mut d = String::new();
        let mut prev: Option<()> = None;
        for (&x, &y) in xs.iter().zip(ys) {
            let Some((px, py)) = self.point(x, y) else {
                prev = None;
                continue;
            };
            match prev {
                None => write!(d, "M{px:.2},{py:.2}").unwrap(),
                Some(()) if step => write!(d, " H{px:.2} V{py:.2}").unwrap(),
                Some(()) => write!(d, " L{px:.2},{py:.2}").unwrap(),
            }
            prev = Some(());
        }
        if !d.is_empty() {
            writeln!(self.body, r#"<path d="{d}" fill="none" {style}/>"#).unwrap();
        }
    }

    fn points(&mut self, xs: &[f64], ys: &[f64], style: &str) {
        for (&x, &y) in xs.iter().zip(ys) {
            if let Some((px, py)) = self.point(x, y) {
                writeln!(self.body, r#"<circle cx="{px:.2}" cy="{py:.2}" r="2.5" {style}/>"#).unwrap();
            }
        }
    }

    fn rect(&mut self, x0: f64, x1: f64, y0: f64, y1: f64, style: &str) {
        let (Some(a), Some(b), Some(c), Some(d)) = (self.px(x0), self.px(x1), self.py(y0), self.py(y1)) else {
            return;
        };
        let (left, top) = (a.min(b), c.min(d));
        writeln!(
            self.body,
            r#"<rect x="{left:.2}" y="{top:.2}" width="{:.2}" height="{:.2}" {style}/>"#,
            (a - b).abs(),
            (c - d).abs()
        )
        .unwrap();
    }

    fn finish(self, title: &str, x_label: &str, y_label: &str) -> String {
        let mut s = String::new();
        writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
        )
        .unwrap();
        writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
        writeln!(s, r#"<text x="{}" y="18" text-anchor="middle" font-size="13">{}</text>"#, WIDTH / 2.0, escape(title))
            .unwrap();
        let (x0, x1) = (LEFT, WIDTH - RIGHT);
        let (y0, y1) = (HEIGHT - BOTTOM, TOP);
        writeln!(s, r#"<path d="M{x0},{y1} V{y0} H{x1}" fill="none" stroke="black"/>"#).unwrap();
        for t in self.x.ticks() {
            if let Some(px) = self.px(t) {
                writeln!(s, r#"<line x1="{px:.2}" y1="{y0}" x2="{px:.2}" y2="{}" stroke="black"/>"#, y0 + 4.0).unwrap();
                writeln!(s, r#"<text x="{px:.2}" y="{}" text-anchor="middle">{}</text>"#, y0 + 16.0, label(t)).unwrap();
            }
        }
        for t in self.y.ticks() {
            if let Some(py) = self.py(t) {
                writeln!(s, r#"<line x1="{}" y1="{py:.2}" x2="{x0}" y2="{py:.2}" stroke="black"/>"#, x0 - 4.0).unwrap();
                writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, x0 - 6.0, py + 4.0, label(t)).unwrap();
            }
        }
        writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, (x0 + x1) / 2.0, HEIGHT - 10.0, escape(x_label))
            .unwrap();
        writeln!(
            s,
            r#"<text x="14" y="{0}" text-anchor="middle" transform="rotate(-90 14 {0})">{1}</text>"#,
            (y0 + y1) / 2.0,
            escape(y_label)
        )
        .unwrap();
        s.push_str("<g>\n");
        s.push_str(&self.body);
        s.push_str("</g>\n</svg>\n");
        s
    }
}

fn label(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-3) {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

const DATA: &str = r#"stroke="black" stroke-width="1.2""#;
const REFERENCE: &str = r#"stroke="gray" stroke-width="1""#;
const DOTTED: &str = r#"stroke="black" stroke-width="1" stroke-dasharray="2,3""#;
const MARK: &str = r#"fill="black""#;
const BAND: &str = r#"fill="lightgray" stroke="none""#;

/// One report's plot; `None` when there is nothing to draw.
pub fn render_plot(title: &str, plot: &PlotData) -> Option<String> {
    if plot.is_empty() {
        return None;
    }
    let xs = plot.series.iter().flat_map(|s| s.x.iter().copied());
    let ys = plot.series.iter().flat_map(|s| s.y.iter().copied());
    let mut canvas = Canvas::new(Axis::fit(xs, plot.log_scale)?, Axis::fit(ys, plot.log_scale)?);
    for series in &plot.series {
        match series.kind {
            SeriesKind::Step => canvas.polyline(&series.x, &series.y, true, DATA),
            SeriesKind::Line if series.name == "poisson" || series.name == "uniform" => {
                canvas.polyline(&series.x, &series.y, false, REFERENCE)
            }
            SeriesKind::Line => canvas.polyline(&series.x, &series.y, false, DATA),
            SeriesKind::Dotted => canvas.polyline(&series.x, &series.y, false, DOTTED),
            SeriesKind::Points => canvas.points(&series.x, &series.y, MARK),
        }
    }
    Some(canvas.finish(title, &plot.x_label, &plot.y_label))
}

/// Empirical coverage against n, one gray binomial band per level.
pub fn coverage_svg(rows: &[CoverageRow]) -> Option<String> {
    let xs = rows.iter().map(|r| r.n as f64);
    let ys = rows.iter().flat_map(|r| [r.empirical, r.binomial_band.0, r.binomial_band.1]);
    let x_axis = Axis::fit(xs, false)?;
    let mut canvas = Canvas::new(Axis { lo: x_axis.lo, hi: x_axis.hi, log: false }, Axis::fit(ys, false)?);
    let mut levels: Vec<f64> = rows.iter().map(|r| r.level).collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    for level in &levels {
        let row = rows.iter().find(|r| r.level == *level)?;
        let (lo, hi) = row.binomial_band;
        canvas.rect(x_axis.lo, x_axis.hi, lo, hi, BAND);
    }
    for level in &levels {
        let (x, y): (Vec<f64>, Vec<f64>) = rows.iter().filter(|r| r.level == *level).map(|r| (r.n as f64, r.empirical)).unzip();
        canvas.points(&x, &y, MARK);
    }
    Some(canvas.finish("Wiener test coverage", "sample size n", "empirical coverage"))
}

/// Joint rejection counts of each test pair against n, over the gray
/// independence band.
pub fn joint_svg(rows: &[JointRow]) -> Option<String> {
    let xs = rows.iter().map(|r| r.n as f64);
    let ys = rows.iter().flat_map(|r| {
        [r.berman_uniform, r.wiener_berman, r.wiener_uniform, r.independence_band.0, r.independence_band.1].map(|v| v as f64)
    });
    let x_axis = Axis::fit(xs, false)?;
    let mut canvas = Canvas::new(Axis { lo: x_axis.lo, hi: x_axis.hi, log: false }, Axis::fit(ys, false)?);
    let (lo, hi) = rows[0].independence_band;
    canvas.rect(x_axis.lo, x_axis.hi, lo as f64, hi as f64, BAND);
    let n: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    type Count = fn(&JointRow) -> usize;
    let pairs: [(Count, &str); 3] = [
        (|r| r.wiener_berman, r#"fill="white" stroke="black""#),
        (|r| r.wiener_uniform, r#"fill="black""#),
        (|r| r.berman_uniform, r#"fill="gray""#),
    ];
    for (count, style) in pairs {
        let y: Vec<f64> = rows.iter().map(|r| count(r) as f64).collect();
        canvas.polyline(&n, &y, false, DOTTED);
        canvas.points(&n, &y, style);
    }
    Some(canvas.finish("Joint rejections (open: Wiener×Berman, black: Wiener×Uniform, gray: Berman×Uniform)", "sample size n", "joint rejections"))
}
