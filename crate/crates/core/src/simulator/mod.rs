//! Analytic stand-in for a field solver.
//!
//! Inductance follows the Greenhouse decomposition: straight-bar partial self
//! inductances plus signed pairwise mutual terms, the latter from a
//! Gauss-Legendre evaluation of Neumann's double line integral over segment
//! centerlines. Resistance and parasitic capacitance are per-length sums.

pub mod external;

use crate::geometry::{GeometryError, Layout, Segment, Status};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

/// mu0 / (4 pi) in H/m.
pub const MU0_OVER_4PI: f64 = 1e-7;
const UM: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("degenerate segment of zero length")]
    DegenerateSegment,
    #[error("segment centerlines intersect")]
    Overlap,
    #[error("layout is not complete")]
    IncompleteLayout,
    #[error("total inductance {0:e} H is not positive")]
    NonPositiveInductance(f64),
    #[error("invalid material parameters: {0}")]
    InvalidParams(String),
    #[error("external simulator: {0}")]
    External(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Simulated performance of a complete inductor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    #[serde(rename = "L_h")]
    pub inductance: f64,
    #[serde(rename = "R_ohm")]
    pub resistance: f64,
    #[serde(rename = "SRF_hz")]
    pub srf: f64,
    #[serde(rename = "Q")]
    pub q_factor: f64,
    #[serde(rename = "area_um2")]
    pub area: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialParams {
    /// Ohms per square.
    pub sheet_resistance: f64,
    /// Farads per square micrometre of wire footprint.
    pub oxide_cap_density: f64,
    /// Hertz; used for Q.
    pub operating_frequency: f64,
    /// Gauss-Legendre points per segment in the mutual integral.
    pub quad_points: usize,
}

impl Default for MaterialParams {
    fn default() -> Self {
        MaterialParams {
            sheet_resistance: 0.01,
            oxide_cap_density: 2e-17,
            operating_frequency: 15e9,
            quad_points: 16,
        }
    }
}

impl MaterialParams {
    pub fn validate(&self) -> Result<(), SimError> {
        let positive = self.sheet_resistance > 0.0
            && self.oxide_cap_density > 0.0
            && self.operating_frequency > 0.0;
        if !positive {
            return Err(SimError::InvalidParams("all constants must be positive".into()));
        }
        if self.quad_points < 8 {
            return Err(SimError::InvalidParams("quad_points must be at least 8".into()));
        }
        Ok(())
    }
}

/// Gauss-Legendre rule mapped to [0, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..(n + 1) / 2 {
            // Chebyshev initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = 0.5 * (1.0 - x);
            nodes[n - 1 - i] = 0.5 * (1.0 + x);
            weights[i] = 0.5 * w;
            weights[n - 1 - i] = 0.5 * w;
        }
        GaussLegendre { nodes, weights }
    }
}

/// P_n(x) and P_n'(x) by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Partial self inductance of a straight rectangular bar, in henries.
pub fn self_inductance(segment: &Segment, thickness: f64) -> Result<f64, SimError> {
    let l = segment.length() * UM;
    if !(l > 0.0) {
        return Err(SimError::DegenerateSegment);
    }
    let wt = (segment.width + thickness) * UM;
    let value = 2.0 * MU0_OVER_4PI * l * ((2.0 * l / wt).ln() + 0.5 + wt / (3.0 * l));
    Ok(value.max(f64::MIN_POSITIVE))
}

fn cross(ax: f64, ay: f64, bx: f64, by: f64) -> f64 {
    ax * by - ay * bx
}

/// Whether two centerlines share any point.
fn centerlines_intersect(a: &Segment, b: &Segment) -> bool {
    let (p, r) = ((a.start.x, a.start.y), (a.end.x - a.start.x, a.end.y - a.start.y));
    let (q, s) = ((b.start.x, b.start.y), (b.end.x - b.start.x, b.end.y - b.start.y));
    let qp = (q.0 - p.0, q.1 - p.1);
    let denom = cross(r.0, r.1, s.0, s.1);
    let tol = 1e-12;
    if denom.abs() < tol {
        if cross(qp.0, qp.1, r.0, r.1).abs() > tol {
            return false;
        }
        // Collinear: overlap of the parameter intervals.
        let rr = r.0 * r.0 + r.1 * r.1;
        let t0 = (qp.0 * r.0 + qp.1 * r.1) / rr;
        let t1 = t0 + (s.0 * r.0 + s.1 * r.1) / rr;
        let (lo, hi) = (t0.min(t1), t0.max(t1));
        return hi >= -tol && lo <= 1.0 + tol;
    }
    let t = cross(qp.0, qp.1, s.0, s.1) / denom;
    let u = cross(qp.0, qp.1, r.0, r.1) / denom;
    (-tol..=1.0 + tol).contains(&t) && (-tol..=1.0 + tol).contains(&u)
}

/// Neumann mutual inductance between two straight filaments, signed by the
/// relative orientation of their currents.
pub fn mutual_inductance(a: &Segment, b: &Segment, params: &MaterialParams) -> Result<f64, SimError> {
    let rule = GaussLegendre::new(params.quad_points.max(1));
    mutual_inductance_with(a, b, &rule)
}

pub fn mutual_inductance_with(a: &Segment, b: &Segment, rule: &GaussLegendre) -> Result<f64, SimError> {
    if a.length() == 0.0 || b.length() == 0.0 {
        return Err(SimError::DegenerateSegment);
    }
    if centerlines_intersect(a, b) {
        return Err(SimError::Overlap);
    }
    // Fixed evaluation order makes the result exactly symmetric.
    let (a, b) = if key(a) <= key(b) { (a, b) } else { (b, a) };
    let pa = FilamentPoints::new(a, rule);
    let pb = FilamentPoints::new(b, rule);
    Ok(pa.mutual(&pb, rule))
}

fn key(s: &Segment) -> [u64; 4] {
    [s.start.x, s.start.y, s.end.x, s.end.y].map(f64::to_bits)
}

/// Quadrature points of one segment in metres.
struct FilamentPoints {
    xs: Vec<f64>,
    ys: Vec<f64>,
    dx: f64,
    dy: f64,
}

impl FilamentPoints {
    fn new(seg: &Segment, rule: &GaussLegendre) -> Self {
        let (x0, y0) = (seg.start.x * UM, seg.start.y * UM);
        let (dx, dy) = ((seg.end.x - seg.start.x) * UM, (seg.end.y - seg.start.y) * UM);
        FilamentPoints {
            xs: rule.nodes.iter().map(|t| x0 + t * dx).collect(),
            ys: rule.nodes.iter().map(|t| y0 + t * dy).collect(),
            dx,
            dy,
        }
    }

    fn mutual(&self, other: &FilamentPoints, rule: &GaussLegendre) -> f64 {
        let dot = self.dx * other.dx + self.dy * other.dy;
        if dot == 0.0 {
            return 0.0;
        }
        let mut sum = 0.0;
        for (i, wi) in rule.weights.iter().enumerate() {
            let (xi, yi) = (self.xs[i], self.ys[i]);
            let mut inner = 0.0;
            for (j, wj) in rule.weights.iter().enumerate() {
                let r = (xi - other.xs[j]).hypot(yi - other.ys[j]);
                inner += wj / r;
            }
            sum += wi * inner;
        }
        MU0_OVER_4PI * dot * sum
    }
}

/// Evaluates a complete layout. Symmetric drawings are mirrored first.
pub fn simulate(layout: &Layout, params: &MaterialParams) -> Result<Metrics, SimError> {
    if layout.status() != Status::Complete {
        return Err(SimError::IncompleteLayout);
    }
    params.validate()?;
    let full = layout.full_inductor()?;
    let thickness = full.canvas().wire_thickness;
    let segments = full.segments();
    let rule = GaussLegendre::new(params.quad_points);
    let points: Vec<FilamentPoints> = segments.iter().map(|s| FilamentPoints::new(s, &rule)).collect();

    let mut inductance = 0.0;
    let mut resistance = 0.0;
    let mut footprint = 0.0;
    for seg in &segments {
        inductance += self_inductance(seg, thickness)?;
        resistance += params.sheet_resistance * seg.length() / seg.width;
        footprint += seg.length() * seg.width;
    }
    for i in 0..segments.len() {
        for j in i + 2..segments.len() {
            if centerlines_intersect(&segments[i], &segments[j]) {
                return Err(SimError::Overlap);
            }
            inductance += 2.0 * points[i].mutual(&points[j], &rule);
        }
    }
    if !(inductance > 0.0) {
        return Err(SimError::NonPositiveInductance(inductance));
    }
    let capacitance = params.oxide_cap_density * footprint;
    let srf = 1.0 / (2.0 * PI * (inductance * capacitance).sqrt());
    let q_factor = 2.0 * PI * params.operating_frequency * inductance / resistance;
    let area = full.bounding_box_area()?;
    Ok(Metrics {
        inductance,
        resistance,
        srf,
        q_factor,
        area,
    })
}

/// Closed-form mutual inductance of two parallel, aligned filaments of equal
/// length `l` at distance `d` (both in metres).
pub fn parallel_filament_mutual(l: f64, d: f64) -> f64 {
    let ld = l / d;
    2.0 * MU0_OVER_4PI * l * ((ld + (1.0 + ld * ld).sqrt()).ln() - (1.0 + 1.0 / (ld * ld)).sqrt() + 1.0 / ld)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Action, Canvas, Mode, Point};

    fn seg(x0: f64, y0: f64, x1: f64, y1: f64) -> Segment {
        Segment {
            start: Point::new(x0, y0),
            end: Point::new(x1, y1),
            width: 5.0,
            layer: 0,
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let rule = GaussLegendre::new(8);
        let sum: f64 = rule.weights.iter().sum();
        assert!((sum - 1.0).abs() < 1e-14);
        // Exact for degree 15 on [0,1].
        let v: f64 = rule.nodes.iter().zip(&rule.weights).map(|(x, w)| w * x.powi(15)).sum();
        assert!((v - 1.0 / 16.0).abs() < 1e-14);
    }

    #[test]
    fn self_inductance_reference_value() {
        let l = self_inductance(&seg(40.0, 0.0, 40.0, 10.0), 1.0).unwrap();
        let expected = 2e-12 * ((10.0f64 / 3.0).ln() + 0.5 + 0.2);
        assert!((l - expected).abs() < 1e-24);
        assert!((l - 3.81e-12).abs() < 0.01e-12);
    }

    #[test]
    fn self_inductance_limits() {
        let long = self_inductance(&seg(0.0, 0.0, 0.0, 20.0), 1.0).unwrap();
        let short = self_inductance(&seg(0.0, 0.0, 0.0, 10.0), 1.0).unwrap();
        assert!(long > 2.0 * short);
        // w + t = 2 l: the log term vanishes.
        let s = Segment { width: 19.0, ..seg(0.0, 0.0, 0.0, 10.0) };
        let v = self_inductance(&s, 1.0).unwrap();
        assert!((v - 2e-12 * (0.5 + 2.0 / 3.0)).abs() < 1e-24);
        assert_eq!(
            self_inductance(&seg(1.0, 1.0, 1.0, 1.0), 1.0),
            Err(SimError::DegenerateSegment)
        );
    }

    #[test]
    fn mutual_signs_and_orthogonality() {
        let p = MaterialParams::default();
        let a = seg(0.0, 0.0, 0.0, 10.0);
        let b = seg(10.0, 0.0, 10.0, 10.0);
        let same = mutual_inductance(&a, &b, &p).unwrap();
        let opposite = mutual_inductance(&a, &b.reversed(), &p).unwrap();
        assert!(same > 0.0);
        assert_eq!(same, -opposite);
        assert!((same - 0.934e-12).abs() < 0.02 * 0.934e-12);
        let c = seg(20.0, 20.0, 30.0, 20.0);
        assert_eq!(mutual_inductance(&a, &c, &p).unwrap(), 0.0);
        assert_eq!(mutual_inductance(&a, &seg(-5.0, 5.0, 5.0, 5.0), &p), Err(SimError::Overlap));
    }

    #[test]
    fn simulate_requires_completion() {
        let c = Canvas::reference();
        let l = Layout::from_actions(c, Mode::Symmetric, &[Action::STRAIGHT]).unwrap();
        assert_eq!(simulate(&l, &MaterialParams::default()), Err(SimError::IncompleteLayout));
    }

    #[test]
    fn simulate_small_loop() {
        let c = Canvas::reference();
        let acts = [Action::STRAIGHT, Action::new(4).unwrap()];
        let l = Layout::from_actions(c, Mode::Symmetric, &acts).unwrap();
        let m = simulate(&l, &MaterialParams::default()).unwrap();
        assert!(m.inductance > 0.0);
        // 40 um of 5 um wide wire at 10 mOhm/sq.
        assert!((m.resistance - 0.08).abs() < 1e-12);
        assert!((m.area - 25.0 * 12.5).abs() < 1e-9);
        let q = 2.0 * PI * 15e9 * m.inductance / m.resistance;
        assert_eq!(m.q_factor, q);
    }

    #[test]
    fn srf_and_q_formulas() {
        let srf = 1.0 / (2.0 * PI * (1e-10f64 * 1e-13).sqrt());
        assert!((srf - 50.3e9).abs() < 0.05e9);
        let q = 2.0 * PI * 15e9 * 116.5e-12 / 0.925;
        assert!((q - 11.9).abs() < 0.05);
    }

    #[test]
    fn params_validation() {
        let p = MaterialParams { quad_points: 4, ..Default::default() };
        assert!(p.validate().is_err());
        let p = MaterialParams { sheet_resistance: 0.0, ..Default::default() };
        assert!(p.validate().is_err());
    }
}
