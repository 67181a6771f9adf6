//! Canvas, wire segments and the drawing head.
//!
//! A layout is a chain of unit grid steps starting at the input port. Each
//! step is one of the eight compass directions, so cardinal segments are one
//! `grid_pitch` long and diagonal ones `grid_pitch * sqrt(2)`. Wires are
//! modelled as rectangles of `wire_width` centred on the segment centerline,
//! with no end-cap extension.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Geometric slack used when deciding "positive area" overlaps and bounds.
const EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid canvas: {0}")]
    InvalidCanvas(String),
    #[error("segment leaves the canvas")]
    OutOfBounds,
    #[error("segment collides with segment {with}")]
    Collision { with: usize },
    #[error("layout is not in progress")]
    AlreadyTerminal,
    #[error("mirrored half overlaps the original half (segments {original} and {mirrored})")]
    MirrorCollision { original: usize, mirrored: usize },
    #[error("mirror requires a complete symmetric layout")]
    NotMirrorable,
    #[error("layout has no segments")]
    EmptyLayout,
    #[error("raster resolution {0} does not divide the grid pitch")]
    BadResolution(f64),
    #[error("invalid action value {0}")]
    InvalidAction(i64),
    #[error("invalid node chain: {0}")]
    InvalidChain(String),
}

/// A point in micrometres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

/// Integer lattice coordinates (multiples of the grid pitch).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GridPoint {
    pub x: i32,
    pub y: i32,
}

impl GridPoint {
    pub const fn new(x: i32, y: i32) -> Self {
        GridPoint { x, y }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "symmetric")]
    Symmetric,
    #[serde(rename = "non-symmetric")]
    NonSymmetric,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Symmetric => "symmetric",
            Mode::NonSymmetric => "non-symmetric",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "symmetric" | "sym" => Ok(Mode::Symmetric),
            "non-symmetric" | "nonsymmetric" | "asym" => Ok(Mode::NonSymmetric),
            other => Err(format!("unknown mode '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    InProgress,
    Complete,
    Invalid,
}

/// Eight compass headings, numbered clockwise from North.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Heading {
    N,
    NE,
    E,
    SE,
    S,
    SW,
    W,
    NW,
}

impl Heading {
    pub const ALL: [Heading; 8] = [
        Heading::N,
        Heading::NE,
        Heading::E,
        Heading::SE,
        Heading::S,
        Heading::SW,
        Heading::W,
        Heading::NW,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Heading {
        Heading::ALL[i % 8]
    }

    /// Lattice displacement of one step in this direction.
    pub fn delta(self) -> (i32, i32) {
        match self {
            Heading::N => (0, 1),
            Heading::NE => (1, 1),
            Heading::E => (1, 0),
            Heading::SE => (1, -1),
            Heading::S => (0, -1),
            Heading::SW => (-1, -1),
            Heading::W => (-1, 0),
            Heading::NW => (-1, 1),
        }
    }

    pub fn from_delta(dx: i32, dy: i32) -> Option<Heading> {
        Heading::ALL.iter().copied().find(|h| h.delta() == (dx, dy))
    }

    pub fn is_diagonal(self) -> bool {
        self.index() % 2 == 1
    }
}

/// Turn relative to the previous segment: 0..=4 map to -90, -45, 0, +45, +90
/// degrees. Positive angles turn clockwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "u8")]
pub struct Action(u8);

impl Action {
    pub const COUNT: usize = 5;
    pub const STRAIGHT: Action = Action(2);

    pub fn new(value: u8) -> Result<Action, GeometryError> {
        if (value as usize) < Self::COUNT {
            Ok(Action(value))
        } else {
            Err(GeometryError::InvalidAction(value as i64))
        }
    }

    pub fn all() -> impl Iterator<Item = Action> {
        (0..Self::COUNT as u8).map(Action)
    }

    pub fn value(self) -> u8 {
        self.0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn angle_degrees(self) -> i32 {
        (self.0 as i32 - 2) * 45
    }
}

impl TryFrom<i64> for Action {
    type Error = GeometryError;

    fn try_from(v: i64) -> Result<Self, Self::Error> {
        if (0..Self::COUNT as i64).contains(&v) {
            Ok(Action(v as u8))
        } else {
            Err(GeometryError::InvalidAction(v))
        }
    }
}

impl From<Action> for u8 {
    fn from(a: Action) -> u8 {
        a.0
    }
}

pub fn heading_after(heading: Heading, action: Action) -> Heading {
    Heading::from_index((heading.index() + action.index() + 6) % 8)
}

/// Drawing area and process constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Canvas {
    pub width: f64,
    pub height: f64,
    pub input_port: Point,
    pub output_port: Point,
    pub grid_pitch: f64,
    pub wire_width: f64,
    pub wire_thickness: f64,
    pub layer: u32,
}

impl Canvas {
    pub fn new(
        width: f64,
        height: f64,
        input_port: Point,
        output_port: Point,
        grid_pitch: f64,
        wire_width: f64,
        wire_thickness: f64,
    ) -> Result<Canvas, GeometryError> {
        let canvas = Canvas {
            width,
            height,
            input_port,
            output_port,
            grid_pitch,
            wire_width,
            wire_thickness,
            layer: 0,
        };
        canvas.validate()?;
        Ok(canvas)
    }

    /// 100 x 100 um canvas with ports at x = 40 and x = 60 on the bottom edge,
    /// a 10 um grid and 5 um wires.
    pub fn reference() -> Canvas {
        Canvas {
            width: 100.0,
            height: 100.0,
            input_port: Point::new(40.0, 0.0),
            output_port: Point::new(60.0, 0.0),
            grid_pitch: 10.0,
            wire_width: 5.0,
            wire_thickness: 1.0,
            layer: 0,
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let bad = |m: &str| Err(GeometryError::InvalidCanvas(m.to_string()));
        if !(self.width > 0.0 && self.height > 0.0) {
            return bad("width and height must be positive");
        }
        if !(self.grid_pitch > 0.0) {
            return bad("grid pitch must be positive");
        }
        if !is_multiple(self.width, self.grid_pitch) || !is_multiple(self.height, self.grid_pitch) {
            return bad("grid pitch must divide width and height");
        }
        if !(self.wire_width > 0.0 && self.wire_width < self.grid_pitch) {
            return bad("wire width must be positive and below the grid pitch");
        }
        if !(self.wire_thickness > 0.0) {
            return bad("wire thickness must be positive");
        }
        for (name, p) in [("input", self.input_port), ("output", self.output_port)] {
            if !is_multiple(p.x, self.grid_pitch) || !is_multiple(p.y, self.grid_pitch) {
                return bad(&format!("{name} port is not on a grid node"));
            }
            let on_edge = p.x.abs() < EPS
                || p.y.abs() < EPS
                || (p.x - self.width).abs() < EPS
                || (p.y - self.height).abs() < EPS;
            let inside = p.x > -EPS && p.x < self.width + EPS && p.y > -EPS && p.y < self.height + EPS;
            if !on_edge || !inside {
                return bad(&format!("{name} port must lie on the canvas boundary"));
            }
        }
        if self.input_port == self.output_port {
            return bad("ports coincide");
        }
        Ok(())
    }

    /// Whether the ports mirror each other across the vertical midline.
    pub fn supports_symmetric(&self) -> bool {
        (self.input_port.x + self.output_port.x - self.width).abs() < EPS
            && (self.input_port.y - self.output_port.y).abs() < EPS
    }

    pub fn columns(&self) -> i32 {
        (self.width / self.grid_pitch).round() as i32
    }

    pub fn rows(&self) -> i32 {
        (self.height / self.grid_pitch).round() as i32
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn to_grid(&self, p: Point) -> GridPoint {
        GridPoint::new(
            (p.x / self.grid_pitch).round() as i32,
            (p.y / self.grid_pitch).round() as i32,
        )
    }

    pub fn to_point(&self, g: GridPoint) -> Point {
        Point::new(g.x as f64 * self.grid_pitch, g.y as f64 * self.grid_pitch)
    }

    pub fn input_node(&self) -> GridPoint {
        self.to_grid(self.input_port)
    }

    pub fn output_node(&self) -> GridPoint {
        self.to_grid(self.output_port)
    }

    /// Doubled midline column; a node lies on the midline iff `2 * x == this`.
    fn midline_twice(&self) -> i32 {
        self.columns()
    }

    pub fn on_midline(&self, g: GridPoint) -> bool {
        2 * g.x == self.midline_twice()
    }

    pub fn reflect(&self, g: GridPoint) -> GridPoint {
        GridPoint::new(self.midline_twice() - g.x, g.y)
    }
}

fn is_multiple(value: f64, pitch: f64) -> bool {
    let q = value / pitch;
    (q - q.round()).abs() < 1e-9
}

/// One straight piece of wire.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub start: Point,
    pub end: Point,
    pub width: f64,
    pub layer: u32,
}

impl Segment {
    pub fn length(&self) -> f64 {
        (self.end.x - self.start.x).hypot(self.end.y - self.start.y)
    }

    pub fn direction(&self) -> (f64, f64) {
        let l = self.length();
        ((self.end.x - self.start.x) / l, (self.end.y - self.start.y) / l)
    }

    /// The inflated wire rectangle.
    pub fn rect(&self) -> WireRect {
        let (ux, uy) = self.direction();
        WireRect {
            cx: 0.5 * (self.start.x + self.end.x),
            cy: 0.5 * (self.start.y + self.end.y),
            ux,
            uy,
            half_length: 0.5 * self.length(),
            half_width: 0.5 * self.width,
        }
    }

    /// Same wire drawn in the opposite direction.
    pub fn reversed(&self) -> Segment {
        Segment {
            start: self.end,
            end: self.start,
            ..*self
        }
    }
}

/// Oriented rectangle: centre, unit axis along the wire, half extents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WireRect {
    pub cx: f64,
    pub cy: f64,
    pub ux: f64,
    pub uy: f64,
    pub half_length: f64,
    pub half_width: f64,
}

impl WireRect {
    fn radius_along(&self, ax: f64, ay: f64) -> f64 {
        self.half_length * (self.ux * ax + self.uy * ay).abs()
            + self.half_width * (-self.uy * ax + self.ux * ay).abs()
    }

    /// Separating-axis test; touching edges do not count as overlap.
    pub fn overlaps(&self, other: &WireRect) -> bool {
        let axes = [
            (self.ux, self.uy),
            (-self.uy, self.ux),
            (other.ux, other.uy),
            (-other.uy, other.ux),
        ];
        let (dx, dy) = (other.cx - self.cx, other.cy - self.cy);
        axes.iter().all(|&(ax, ay)| {
            let dist = (dx * ax + dy * ay).abs();
            dist < self.radius_along(ax, ay) + other.radius_along(ax, ay) - EPS
        })
    }

    /// Axis-aligned extent as `(min_x, min_y, max_x, max_y)`.
    pub fn extent(&self) -> (f64, f64, f64, f64) {
        let rx = self.radius_along(1.0, 0.0);
        let ry = self.radius_along(0.0, 1.0);
        (self.cx - rx, self.cy - ry, self.cx + rx, self.cy + ry)
    }

    pub fn corners(&self) -> [Point; 4] {
        let (lx, ly) = (self.ux * self.half_length, self.uy * self.half_length);
        let (wx, wy) = (-self.uy * self.half_width, self.ux * self.half_width);
        [
            Point::new(self.cx - lx - wx, self.cy - ly - wy),
            Point::new(self.cx + lx - wx, self.cy + ly - wy),
            Point::new(self.cx + lx + wx, self.cy + ly + wy),
            Point::new(self.cx - lx + wx, self.cy - ly + wy),
        ]
    }

    /// Strict interior test.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let (dx, dy) = (x - self.cx, y - self.cy);
        let along = dx * self.ux + dy * self.uy;
        let across = -dx * self.uy + dy * self.ux;
        along.abs() < self.half_length - EPS && across.abs() < self.half_width - EPS
    }
}

/// Row-major boolean raster; row 0 is the bottom edge of the canvas.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoolImage {
    pub cols: usize,
    pub rows: usize,
    pub data: Vec<bool>,
}

impl BoolImage {
    pub fn new(cols: usize, rows: usize) -> Self {
        BoolImage {
            cols,
            rows,
            data: vec![false; cols * rows],
        }
    }

    pub fn get(&self, col: usize, row: usize) -> bool {
        self.data[row * self.cols + col]
    }

    pub fn set(&mut self, col: usize, row: usize, value: bool) {
        self.data[row * self.cols + col] = value;
    }

    pub fn count_true(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn flipped_horizontal(&self) -> BoolImage {
        let mut out = BoolImage::new(self.cols, self.rows);
        for row in 0..self.rows {
            for col in 0..self.cols {
                out.set(self.cols - 1 - col, row, self.get(col, row));
            }
        }
        out
    }
}

/// Checks a raster resolution against the canvas and returns `(cols, rows)`.
pub fn raster_shape(canvas: &Canvas, resolution: f64) -> Result<(usize, usize), GeometryError> {
    if !(resolution > 0.0) || !is_multiple(canvas.grid_pitch, resolution) {
        return Err(GeometryError::BadResolution(resolution));
    }
    Ok((
        (canvas.width / resolution).round() as usize,
        (canvas.height / resolution).round() as usize,
    ))
}

/// Marks every pixel whose centre lies inside `seg`'s rectangle.
pub fn paint_segment(image: &mut BoolImage, seg: &Segment, resolution: f64) {
    let rect = seg.rect();
    let (x0, y0, x1, y1) = rect.extent();
    let col_lo = ((x0 / resolution).floor().max(0.0)) as usize;
    let row_lo = ((y0 / resolution).floor().max(0.0)) as usize;
    let col_hi = ((x1 / resolution).ceil() as usize).min(image.cols);
    let row_hi = ((y1 / resolution).ceil() as usize).min(image.rows);
    for row in row_lo..row_hi {
        let cy = (row as f64 + 0.5) * resolution;
        for col in col_lo..col_hi {
            let cx = (col as f64 + 0.5) * resolution;
            if rect.contains(cx, cy) {
                image.set(col, row, true);
            }
        }
    }
}

/// A drawing: the chain of lattice nodes visited from the input port.
///
/// Layout values are immutable; [`Layout::append`] returns a new value.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    canvas: Canvas,
    mode: Mode,
    nodes: Vec<GridPoint>,
    actions: Vec<Action>,
    heading: Heading,
    status: Status,
    mirrored: bool,
}

impl Layout {
    /// Empty drawing at the input port, heading North.
    pub fn new(canvas: Canvas, mode: Mode) -> Layout {
        Layout {
            canvas,
            mode,
            nodes: vec![canvas.input_node()],
            actions: Vec::new(),
            heading: Heading::N,
            status: Status::InProgress,
            mirrored: false,
        }
    }

    /// Replays `actions` from an empty layout, stopping at the first failure.
    pub fn from_actions(
        canvas: Canvas,
        mode: Mode,
        actions: &[Action],
    ) -> Result<Layout, (usize, GeometryError)> {
        let mut layout = Layout::new(canvas, mode);
        for (i, &a) in actions.iter().enumerate() {
            layout = layout.append(a).map_err(|e| (i, e))?;
        }
        Ok(layout)
    }

    pub fn canvas(&self) -> &Canvas {
        &self.canvas
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn nodes(&self) -> &[GridPoint] {
        &self.nodes
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn heading(&self) -> Heading {
        self.heading
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn is_mirrored(&self) -> bool {
        self.mirrored
    }

    pub fn head(&self) -> GridPoint {
        *self.nodes.last().expect("layout always has a start node")
    }

    pub fn head_point(&self) -> Point {
        self.canvas.to_point(self.head())
    }

    pub fn segment_count(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn segment(&self, i: usize) -> Segment {
        self.make_segment(self.nodes[i], self.nodes[i + 1])
    }

    pub fn segments(&self) -> Vec<Segment> {
        (0..self.segment_count()).map(|i| self.segment(i)).collect()
    }

    fn make_segment(&self, a: GridPoint, b: GridPoint) -> Segment {
        Segment {
            start: self.canvas.to_point(a),
            end: self.canvas.to_point(b),
            width: self.canvas.wire_width,
            layer: self.canvas.layer,
        }
    }

    /// Returns a copy with the given terminal status (used when an episode is
    /// abandoned).
    pub fn with_status(&self, status: Status) -> Layout {
        Layout {
            status,
            ..self.clone()
        }
    }

    fn in_bounds(&self, rect: &WireRect) -> bool {
        let (x0, y0, x1, y1) = rect.extent();
        x0 > -EPS && y0 > -EPS && x1 < self.canvas.width + EPS && y1 < self.canvas.height + EPS
    }

    fn is_complete_at(&self, node: GridPoint) -> bool {
        match self.mode {
            Mode::Symmetric => self.canvas.on_midline(node),
            Mode::NonSymmetric => node == self.canvas.output_node(),
        }
    }

    /// Draws one more segment.
    pub fn append(&self, action: Action) -> Result<Layout, GeometryError> {
        if self.status != Status::InProgress || self.mirrored {
            return Err(GeometryError::AlreadyTerminal);
        }
        let heading = heading_after(self.heading, action);
        let (dx, dy) = heading.delta();
        let head = self.head();
        let next = GridPoint::new(head.x + dx, head.y + dy);
        let seg = self.make_segment(head, next);
        let rect = seg.rect();
        if !self.in_bounds(&rect) {
            return Err(GeometryError::OutOfBounds);
        }
        // The last existing segment shares the joint and is exempt.
        let n = self.segment_count();
        for i in 0..n.saturating_sub(1) {
            if self.segment(i).rect().overlaps(&rect) {
                return Err(GeometryError::Collision { with: i });
            }
        }
        let mut nodes = self.nodes.clone();
        nodes.push(next);
        let mut actions = self.actions.clone();
        actions.push(action);
        let status = if self.is_complete_at(next) {
            Status::Complete
        } else {
            Status::InProgress
        };
        Ok(Layout {
            canvas: self.canvas,
            mode: self.mode,
            nodes,
            actions,
            heading,
            status,
            mirrored: false,
        })
    }

    /// `mask[a]` is true iff `append(a)` would succeed.
    pub fn legal_actions(&self) -> Result<[bool; Action::COUNT], GeometryError> {
        if self.status != Status::InProgress || self.mirrored {
            return Err(GeometryError::AlreadyTerminal);
        }
        let mut mask = [false; Action::COUNT];
        for a in Action::all() {
            mask[a.index()] = self.append(a).is_ok();
        }
        Ok(mask)
    }

    /// Completes a symmetric half by reflecting it across the vertical midline.
    ///
    /// The reflected chain is reversed so the result runs input -> midline ->
    /// output port. The midline node is shared by both halves.
    pub fn mirror(&self) -> Result<Layout, GeometryError> {
        if self.mode != Mode::Symmetric || self.status != Status::Complete || self.mirrored {
            return Err(GeometryError::NotMirrorable);
        }
        let half = self.nodes.len() - 1;
        let mut nodes = self.nodes.clone();
        nodes.extend(self.nodes[..half].iter().rev().map(|&g| self.canvas.reflect(g)));

        let full = Layout {
            canvas: self.canvas,
            mode: self.mode,
            nodes,
            actions: self.actions.clone(),
            heading: self.heading,
            status: Status::Complete,
            mirrored: true,
        };
        let k = half;
        let originals: Vec<WireRect> = (0..k).map(|i| full.segment(i).rect()).collect();
        for j in k..full.segment_count() {
            let mirrored = full.segment(j).rect();
            for (i, orig) in originals.iter().enumerate() {
                if i + 1 == j {
                    continue;
                }
                if orig.overlaps(&mirrored) {
                    return Err(GeometryError::MirrorCollision {
                        original: i,
                        mirrored: j,
                    });
                }
            }
        }
        let heading = match full.nodes.as_slice() {
            [.., a, b] => Heading::from_delta(b.x - a.x, b.y - a.y).unwrap_or(self.heading),
            _ => self.heading,
        };
        Ok(Layout { heading, ..full })
    }

    /// The drawing as a full inductor: mirrored when symmetric, as-is otherwise.
    pub fn full_inductor(&self) -> Result<Layout, GeometryError> {
        match (self.mode, self.mirrored) {
            (Mode::Symmetric, false) => self.mirror(),
            _ => Ok(self.clone()),
        }
    }

    /// Area of the axis-aligned box enclosing every wire rectangle.
    pub fn bounding_box_area(&self) -> Result<f64, GeometryError> {
        if self.segment_count() == 0 {
            return Err(GeometryError::EmptyLayout);
        }
        let (mut x0, mut y0) = (f64::INFINITY, f64::INFINITY);
        let (mut x1, mut y1) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for seg in self.segments() {
            let (a, b, c, d) = seg.rect().extent();
            x0 = x0.min(a);
            y0 = y0.min(b);
            x1 = x1.max(c);
            y1 = y1.max(d);
        }
        Ok((x1 - x0) * (y1 - y0))
    }

    pub fn rasterize(&self, resolution: f64) -> Result<BoolImage, GeometryError> {
        let (cols, rows) = raster_shape(&self.canvas, resolution)?;
        let mut image = BoolImage::new(cols, rows);
        for seg in self.segments() {
            paint_segment(&mut image, &seg, resolution);
        }
        Ok(image)
    }

    /// Rebuilds a full inductor from a node chain, validating every step.
    ///
    /// The chain must start at the input port, end at the output port and be
    /// collision free. `actions` is carried through untouched.
    pub fn from_full_nodes(
        canvas: Canvas,
        mode: Mode,
        nodes: Vec<GridPoint>,
        actions: Vec<Action>,
    ) -> Result<Layout, GeometryError> {
        let bad = |m: String| Err(GeometryError::InvalidChain(m));
        if nodes.len() < 2 {
            return bad("a complete inductor needs at least one segment".into());
        }
        if nodes[0] != canvas.input_node() {
            return bad("chain does not start at the input port".into());
        }
        if *nodes.last().unwrap() != canvas.output_node() {
            return bad("chain does not end at the output port".into());
        }
        let mut heading = Heading::N;
        for w in nodes.windows(2) {
            match Heading::from_delta(w[1].x - w[0].x, w[1].y - w[0].y) {
                Some(h) => heading = h,
                None => return bad(format!("non-unit step {:?} -> {:?}", w[0], w[1])),
            }
        }
        let layout = Layout {
            canvas,
            mode,
            nodes,
            actions,
            heading,
            status: Status::Complete,
            mirrored: mode == Mode::Symmetric,
        };
        let rects: Vec<WireRect> = layout.segments().iter().map(|s| s.rect()).collect();
        for (i, r) in rects.iter().enumerate() {
            if !layout.in_bounds(r) {
                return Err(GeometryError::OutOfBounds);
            }
            for (j, q) in rects.iter().enumerate().skip(i + 2) {
                if r.overlaps(q) {
                    return bad(format!("segments {i} and {j} overlap"));
                }
            }
        }
        Ok(layout)
    }
}
