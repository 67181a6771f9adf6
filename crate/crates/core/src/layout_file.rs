//! JSON exchange record for complete inductors.
//!
//! ```json
//! {"mode":"symmetric","wire_width":5.0,"layer":0,"actions":[2,4],
//!  "nodes":[[40,0],[40,10],[50,10],[60,10],[60,0]]}
//! ```
//!
//! `nodes` always describes the full (mirrored) wire path. The optional
//! `canvas`, `metrics` and `target` blocks are written by the harness and
//! used for SVG annotation; readers fall back to the reference canvas.

use crate::geometry::{Action, Canvas, GeometryError, GridPoint, Layout, Mode, Point};
use crate::reward::TargetSpec;
use crate::simulator::Metrics;
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LayoutFileError {
    #[error("cannot parse layout file: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CanvasRecord {
    pub width: f64,
    pub height: f64,
    pub grid_pitch: f64,
    pub input_port: [f64; 2],
    pub output_port: [f64; 2],
    pub wire_thickness: f64,
}

impl CanvasRecord {
    pub fn from_canvas(c: &Canvas) -> Self {
        CanvasRecord {
            width: c.width,
            height: c.height,
            grid_pitch: c.grid_pitch,
            input_port: [c.input_port.x, c.input_port.y],
            output_port: [c.output_port.x, c.output_port.y],
            wire_thickness: c.wire_thickness,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutRecord {
    pub mode: Mode,
    pub wire_width: f64,
    pub layer: u32,
    pub actions: Vec<Action>,
    pub nodes: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub canvas: Option<CanvasRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<Metrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetSpec>,
}

impl LayoutRecord {
    /// Record for a complete layout; symmetric drawings are mirrored.
    pub fn from_layout(layout: &Layout) -> Result<Self, GeometryError> {
        let full = layout.full_inductor()?;
        let canvas = full.canvas();
        Ok(LayoutRecord {
            mode: full.mode(),
            wire_width: canvas.wire_width,
            layer: canvas.layer,
            actions: full.actions().to_vec(),
            nodes: full
                .nodes()
                .iter()
                .map(|&g| {
                    let p = canvas.to_point(g);
                    [p.x, p.y]
                })
                .collect(),
            canvas: Some(CanvasRecord::from_canvas(canvas)),
            metrics: None,
            target: None,
        })
    }

    pub fn canvas(&self) -> Result<Canvas, LayoutFileError> {
        let mut canvas = match &self.canvas {
            Some(c) => Canvas {
                width: c.width,
                height: c.height,
                input_port: Point::new(c.input_port[0], c.input_port[1]),
                output_port: Point::new(c.output_port[0], c.output_port[1]),
                grid_pitch: c.grid_pitch,
                wire_width: self.wire_width,
                wire_thickness: c.wire_thickness,
                layer: self.layer,
            },
            None => Canvas {
                wire_width: self.wire_width,
                layer: self.layer,
                ..Canvas::reference()
            },
        };
        canvas.layer = self.layer;
        canvas
            .validate()
            .map_err(|e| LayoutFileError::Parse(e.to_string()))?;
        Ok(canvas)
    }

    /// Rebuilds and validates the full inductor.
    pub fn to_layout(&self) -> Result<Layout, LayoutFileError> {
        let canvas = self.canvas()?;
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for &[x, y] in &self.nodes {
            let g = canvas.to_grid(Point::new(x, y));
            let back = canvas.to_point(g);
            if (back.x - x).abs() > 1e-6 || (back.y - y).abs() > 1e-6 {
                return Err(LayoutFileError::Parse(format!("node ({x}, {y}) is off the grid")));
            }
            nodes.push(g);
        }
        Layout::from_full_nodes(canvas, self.mode, nodes, self.actions.clone())
            .map_err(|e| LayoutFileError::Parse(e.to_string()))
    }

    pub fn grid_nodes(&self, canvas: &Canvas) -> Vec<GridPoint> {
        self.nodes
            .iter()
            .map(|&[x, y]| canvas.to_grid(Point::new(x, y)))
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("layout records always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, LayoutFileError> {
        serde_json::from_str(text).map_err(|e| LayoutFileError::Parse(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self, LayoutFileError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: &Path) -> Result<(), LayoutFileError> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_round_trip() {
        let acts: Vec<Action> = [2, 4].iter().map(|&v| Action::new(v).unwrap()).collect();
        let l = Layout::from_actions(Canvas::reference(), Mode::Symmetric, &acts).unwrap();
        let rec = LayoutRecord::from_layout(&l).unwrap();
        assert_eq!(rec.nodes.len(), 5);
        let parsed = LayoutRecord::from_json(&rec.to_json()).unwrap();
        assert_eq!(parsed, rec);
        let rebuilt = parsed.to_layout().unwrap();
        assert_eq!(rebuilt.segments(), l.mirror().unwrap().segments());
    }

    #[test]
    fn minimal_record_uses_reference_canvas() {
        let text = r#"{"mode":"symmetric","wire_width":5,"layer":0,"actions":[2,4],
            "nodes":[[40,0],[40,10],[50,10],[60,10],[60,0]]}"#;
        let rec = LayoutRecord::from_json(text).unwrap();
        assert_eq!(rec.to_layout().unwrap().segment_count(), 4);
    }

    #[test]
    fn incomplete_records_are_rejected() {
        let empty = r#"{"mode":"symmetric","wire_width":5,"layer":0,"actions":[],"nodes":[]}"#;
        let rec = LayoutRecord::from_json(empty).unwrap();
        assert!(matches!(rec.to_layout(), Err(LayoutFileError::Parse(_))));
        let off_grid = r#"{"mode":"symmetric","wire_width":5,"layer":0,"actions":[],
            "nodes":[[40,0],[45,10],[60,0]]}"#;
        let rec = LayoutRecord::from_json(off_grid).unwrap();
        assert!(rec.to_layout().is_err());
        assert!(LayoutRecord::from_json("{\"mode\":1}").is_err());
    }
}
