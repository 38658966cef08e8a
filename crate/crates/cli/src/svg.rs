//! Static SVG figures. The CSV files carry the same data.

use std::fmt::Write;

use ptbreak::sweep::{EventKind, GridScan, NodeClass, Sample, SweepEvent};

const SIZE: f64 = 560.0;
const MARGIN: f64 = 48.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2",
];

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn fit(xs: impl Iterator<Item = f64>, ys: impl Iterator<Item = f64>) -> Frame {
        let (mut x0, mut x1) = bounds(xs);
        let (mut y0, mut y1) = bounds(ys);
        pad(&mut x0, &mut x1);
        pad(&mut y0, &mut y1);
        Frame { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (SIZE - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        SIZE - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (SIZE - 2.0 * MARGIN)
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        })
}

fn pad(lo: &mut f64, hi: &mut f64) {
    if !lo.is_finite() {
        (*lo, *hi) = (-1.0, 1.0);
    }
    let w = (*hi - *lo).max(1e-9 * (1.0 + lo.abs().max(hi.abs())));
    *lo -= 0.05 * w;
    *hi += 0.05 * w;
}

fn open(out: &mut String, title: &str, frame: &Frame, x_label: &str, y_label: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        out,
        r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        SIZE / 2.0,
        escape(title)
    );
    let (l, r, t, b) = (MARGIN, SIZE - MARGIN, MARGIN, SIZE - MARGIN);
    let _ = writeln!(
        out,
        r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        r - l,
        b - t
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        SIZE / 2.0,
        SIZE - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{0}" text-anchor="middle" transform="rotate(-90 14 {0})">{1}</text>"#,
        SIZE / 2.0,
        escape(y_label)
    );
    for (v, anchor, x, y) in [
        (frame.x0, "start", l, b + 16.0),
        (frame.x1, "end", r, b + 16.0),
    ] {
        let _ = writeln!(
            out,
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}">{}</text>"#,
            tick(v)
        );
    }
    for (v, y) in [(frame.y0, b), (frame.y1, t + 10.0)] {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{y:.2}" text-anchor="end">{}</text>"#,
            l - 4.0,
            tick(v)
        );
    }
}

fn tick(v: f64) -> String {
    format!("{v:.3}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Eigenvalue trajectories of `A` in the complex plane, with EPs marked.
pub fn trajectories(title: &str, samples: &[Sample], events: &[SweepEvent]) -> String {
    let n = samples.first().map_or(0, |s| s.eigenvalues.len());
    let frame = Frame::fit(
        samples
            .iter()
            .flat_map(|s| s.eigenvalues.iter().map(|z| z.re)),
        samples
            .iter()
            .flat_map(|s| s.eigenvalues.iter().map(|z| z.im)),
    );
    let mut out = String::new();
    open(&mut out, title, &frame, "Re λ", "Im λ");
    if frame.x0 < 0.0 && frame.x1 > 0.0 {
        let x = frame.px(0.0);
        let _ = writeln!(
            out,
            r##"<line x1="{x:.2}" y1="{MARGIN}" x2="{x:.2}" y2="{}" stroke="#999" stroke-dasharray="4 3"/>"##,
            SIZE - MARGIN
        );
    }
    for i in 0..n {
        let points: Vec<String> = samples
            .iter()
            .map(|s| s.eigenvalues[i])
            .filter(|z| z.re.is_finite() && z.im.is_finite())
            .map(|z| format!("{:.2},{:.2}", frame.px(z.re), frame.py(z.im)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
            points.join(" "),
            COLORS[i % COLORS.len()]
        );
        if let Some(start) = points.first() {
            let (x, y) = start.split_once(',').expect("formatted as x,y");
            let _ = writeln!(
                out,
                r#"<circle cx="{x}" cy="{y}" r="3" fill="{}"/>"#,
                COLORS[i % COLORS.len()]
            );
        }
    }
    for e in events.iter().filter(|e| e.kind == EventKind::EP) {
        let z = e.colliding_eigenvalue;
        if z.re.is_finite() && z.im.is_finite() {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.2}" cy="{:.2}" r="5" fill="none" stroke="black" stroke-width="1.5"/>"#,
                frame.px(z.re),
                frame.py(z.im)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Grid classification: complex pairs shaded, invalid nodes hatched grey.
pub fn regions(title: &str, scan: &GridScan) -> String {
    let xs = (0..scan.x.n).map(|k| scan.x.value(k));
    let ys = (0..scan.y.n).map(|k| scan.y.value(k));
    let (x0, x1) = bounds(xs);
    let (y0, y1) = bounds(ys);
    let hx = if scan.x.n > 1 {
        (x1 - x0) / (scan.x.n - 1) as f64
    } else {
        1.0
    };
    let hy = if scan.y.n > 1 {
        (y1 - y0) / (scan.y.n - 1) as f64
    } else {
        1.0
    };
    let frame = Frame {
        x0: x0 - hx / 2.0,
        x1: x1 + hx / 2.0,
        y0: y0 - hy / 2.0,
        y1: y1 + hy / 2.0,
    };
    let mut out = String::new();
    open(&mut out, title, &frame, &scan.x.param, &scan.y.param);
    let w = frame.px(frame.x0 + hx) - frame.px(frame.x0);
    let h = frame.py(frame.y0) - frame.py(frame.y0 + hy);
    for iy in 0..scan.y.n {
        for ix in 0..scan.x.n {
            let fill = match scan.class_at(ix, iy) {
                NodeClass::Real => continue,
                NodeClass::ComplexPair => "#9ecae1",
                NodeClass::Invalid => "#bbbbbb",
            };
            let (x, y) = (scan.x.value(ix), scan.y.value(iy));
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
                frame.px(x - hx / 2.0),
                frame.py(y + hy / 2.0),
                w + 0.05,
                h + 0.05
            );
        }
    }
    for &(ix, iy) in &scan.boundary {
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="1" fill="black"/>"#,
            frame.px(scan.x.value(ix)),
            frame.py(scan.y.value(iy))
        );
    }
    out.push_str("</svg>\n");
    out
}
