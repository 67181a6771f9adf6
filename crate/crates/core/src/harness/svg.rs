//! SVG rendering of complete layouts.

use super::HarnessError;
use crate::geometry::{Canvas, Layout};
use crate::layout_file::LayoutRecord;
use crate::reward::error_terms;
use std::fmt::Write as _;
use std::path::Path;

const MARGIN: f64 = 10.0;
const ANNOTATION: f64 = 14.0;
const PX_PER_UM: f64 = 4.0;

struct Frame {
    height: f64,
}

impl Frame {
    fn x(&self, x: f64) -> f64 {
        MARGIN + x
    }

    fn y(&self, y: f64) -> f64 {
        MARGIN + self.height - y
    }
}

/// Renders the canvas border, grid nodes, midline, ports, one polygon per
/// wire segment and, when the record carries metrics and a target, the
/// metrics normalized by the target.
pub fn render_svg(record: &LayoutRecord) -> Result<String, HarnessError> {
    let layout = record.to_layout()?;
    let canvas = *layout.canvas();
    Ok(render_layout(&layout, &canvas, record))
}

fn render_layout(layout: &Layout, c: &Canvas, record: &LayoutRecord) -> String {
    let f = Frame { height: c.height };
    let (w, h) = (c.width + 2.0 * MARGIN, c.height + 2.0 * MARGIN + ANNOTATION);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{:.0}" height="{:.0}" viewBox="0 0 {w:.3} {h:.3}">"##,
        w * PX_PER_UM,
        h * PX_PER_UM
    );
    let _ = writeln!(s, r##"<rect width="{w:.3}" height="{h:.3}" fill="white"/>"##);
    let _ = writeln!(
        s,
        r##"<rect class="canvas" x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="none" stroke="black" stroke-width="0.5"/>"##,
        f.x(0.0),
        f.y(c.height),
        c.width,
        c.height
    );
    let _ = writeln!(s, r##"<g class="grid" fill="#999">"##);
    for gy in 0..=c.rows() {
        for gx in 0..=c.columns() {
            let p = c.to_point(crate::geometry::GridPoint::new(gx, gy));
            let _ = writeln!(s, r##"<circle cx="{:.3}" cy="{:.3}" r="0.6"/>"##, f.x(p.x), f.y(p.y));
        }
    }
    let _ = writeln!(s, "</g>");
    let mid = c.width / 2.0;
    let _ = writeln!(
        s,
        r##"<line class="midline" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="#c33" stroke-width="0.4" stroke-dasharray="2,2"/>"##,
        f.x(mid),
        f.y(0.0),
        f.x(mid),
        f.y(c.height)
    );
    let _ = writeln!(s, r##"<g class="wires" fill="#b87333" fill-opacity="0.85" stroke="#5a3a1a" stroke-width="0.3">"##);
    for seg in layout.segments() {
        let pts: Vec<String> = seg
            .rect()
            .corners()
            .iter()
            .map(|p| format!("{:.3},{:.3}", f.x(p.x), f.y(p.y)))
            .collect();
        let _ = writeln!(s, r##"<polygon class="wire" points="{}"/>"##, pts.join(" "));
    }
    let _ = writeln!(s, "</g>");
    for (name, p) in [("in", c.input_port), ("out", c.output_port)] {
        let _ = writeln!(
            s,
            r##"<circle class="port" cx="{:.3}" cy="{:.3}" r="2" fill="#2a6fdb"/><text x="{:.3}" y="{:.3}" font-size="4" text-anchor="middle">{name}</text>"##,
            f.x(p.x),
            f.y(p.y),
            f.x(p.x),
            f.y(p.y) + 6.0
        );
    }
    if let (Some(m), Some(t)) = (&record.metrics, &record.target) {
        let e = error_terms(m, t);
        let text = format!(
            "L/LT={:.3}  R/RT={:.3}  SRF/SRFT={:.3}  A/Amax={:.3}",
            m.inductance / t.inductance,
            1.0 + e.e_r,
            m.srf / t.srf,
            1.0 + e.e_area
        );
        let _ = writeln!(
            s,
            r##"<text class="metrics" x="{:.3}" y="{:.3}" font-size="4" font-family="monospace">{text}</text>"##,
            MARGIN,
            c.height + 2.0 * MARGIN + ANNOTATION / 2.0
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn export_svg(layout_file: &Path, out: &Path) -> Result<(), HarnessError> {
    let record = LayoutRecord::read(layout_file)?;
    std::fs::write(out, render_svg(&record)?)?;
    Ok(())
}
