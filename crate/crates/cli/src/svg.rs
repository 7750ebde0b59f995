// SPDX-License-Identifier: Apache-2.0

//! Scatter of `log10 |G|` against `log10(1 + rho)` with the fitted line and
//! the `-6` reference line.

use std::collections::BTreeSet;
use std::fmt::Write;

use wavepacket::gram::{DecayReport, GramRecord, DECAY_EXPONENT};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
/// Points falling into the same cell of this size are drawn once.
const CELL: f64 = 2.0;

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }

    /// Segment of `y = a + b x` clipped to the plot box.
    fn line(&self, a: f64, b: f64) -> Option<[(f64, f64); 2]> {
        let mut pts = Vec::new();
        for x in [self.x.0, self.x.1] {
            let y = a + b * x;
            if (self.y.0..=self.y.1).contains(&y) {
                pts.push((x, y));
            }
        }
        if b != 0.0 {
            for y in [self.y.0, self.y.1] {
                let x = (y - a) / b;
                if (self.x.0..=self.x.1).contains(&x) {
                    pts.push((x, y));
                }
            }
        }
        pts.sort_by(|p, q| p.0.total_cmp(&q.0));
        pts.dedup();
        (pts.len() >= 2).then(|| [pts[0], pts[pts.len() - 1]])
    }
}

pub fn decay_plot(records: &[GramRecord], report: &DecayReport) -> String {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| r.modulus().filter(|m| *m > 0.0).map(|m| ((1.0 + r.rho.total).log10(), m.log10())))
        .collect();
    let xmax = pts.iter().map(|p| p.0).fold(0.0, f64::max).max(0.1);
    let ymin = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let ymax = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let (ymin, ymax) = if pts.is_empty() { (-1.0, 0.0) } else { (ymin.floor(), ymax.ceil().max(ymin.floor() + 1.0)) };
    let f = Frame { x: (0.0, (xmax * 10.0).ceil() / 10.0), y: (ymin, ymax) };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let (x0, x1, y0, y1) = (f.px(f.x.0), f.px(f.x.1), f.py(f.y.0), f.py(f.y.1));
    let _ = writeln!(
        s,
        r#"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );

    // ticks at decades on y, tenths on x
    let mut y = f.y.0;
    while y <= f.y.1 + 1e-9 {
        let py = f.py(y);
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{py:.2}" x2="{x0:.2}" y2="{py:.2}" stroke="black"/>"#, x0 - 5.0);
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">{y:.0}</text>"#,
            x0 - 8.0,
            py + 4.0
        );
        y += if f.y.1 - f.y.0 > 12.0 { 2.0 } else { 1.0 };
    }
    let ticks = (f.x.1 * 10.0).round() as i64;
    let every = (ticks / 10).max(1);
    for t in (0..=ticks).step_by(every as usize) {
        let x = t as f64 / 10.0;
        let px = f.px(x);
        let _ = writeln!(s, r#"<line x1="{px:.2}" y1="{y0:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#, y0 + 5.0);
        let _ =
            writeln!(s, r#"<text x="{px:.2}" y="{:.2}" font-size="11" text-anchor="middle">{x:.1}</text>"#, y0 + 18.0);
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">log10(1 + rho)</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{:.2}" font-size="12" text-anchor="middle" transform="rotate(-90 15 {:.2})">log10 |G|</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );

    let mut cells = BTreeSet::new();
    let _ = writeln!(s, r#"<g fill="steelblue" fill-opacity="0.6">"#);
    for (x, y) in &pts {
        let (px, py) = (f.px(*x), f.py(*y));
        if cells.insert(((px / CELL) as i64, (py / CELL) as i64)) {
            let _ = writeln!(s, r#"<circle cx="{px:.1}" cy="{py:.1}" r="1.2"/>"#);
        }
    }
    let _ = writeln!(s, "</g>");

    let ln10 = std::f64::consts::LN_10;
    let lines = [
        (report.intercept / ln10, report.slope, "firebrick", "", format!("fit, slope {:.2}", report.slope)),
        (
            report.c_emp.log10(),
            -DECAY_EXPONENT,
            "black",
            r#" stroke-dasharray="6 4""#,
            format!("C_emp (1 + rho)^-{DECAY_EXPONENT}"),
        ),
    ];
    for (k, (a, b, color, dash, label)) in lines.iter().enumerate() {
        if let Some([(ax, ay), (bx, by)]) = f.line(*a, *b) {
            let _ = writeln!(
                s,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="1.5"{dash}/>"#,
                f.px(ax),
                f.py(ay),
                f.px(bx),
                f.py(by)
            );
        }
        let ly = y1 + 16.0 + 16.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="1.5"{dash}/>"#,
            x1 - 190.0,
            x1 - 165.0
        );
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" font-size="11">{label}</text>"#, x1 - 160.0, ly + 4.0);
    }
    s.push_str("</svg>\n");
    s
}
