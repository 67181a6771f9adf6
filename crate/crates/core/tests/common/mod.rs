//! Independent oracles shared by the integration suites.
#![allow(dead_code)]

use inductor_draw::geometry::{Action, Canvas, GridPoint, Heading, Layout, Mode, Segment, Status};
use inductor_draw::harness::config::{reference_target, RunConfig};
use inductor_draw::reward::TargetSpec;
use inductor_draw::simulator::MaterialParams;

pub const MU0: f64 = 4.0e-7 * std::f64::consts::PI;

pub fn actions(values: &[u8]) -> Vec<Action> {
    values.iter().map(|&v| Action::new(v).unwrap()).collect()
}

pub fn reference_spec() -> TargetSpec {
    reference_target(&Canvas::reference(), &MaterialParams::default()).unwrap()
}

pub fn config(json: &str) -> RunConfig {
    RunConfig::from_json(json).unwrap()
}

/// Action sequence tracing absolute headings from the initial North heading;
/// consecutive headings must differ by at most 90 degrees.
pub fn path(headings: &[Heading]) -> Vec<Action> {
    let mut prev = Heading::N;
    headings
        .iter()
        .map(|&h| {
            let value = (h.index() + 10 - prev.index()) % 8;
            prev = h;
            Action::new(value as u8).unwrap()
        })
        .collect()
}

/// Every sequence of legal actions up to `depth` from the empty layout,
/// including terminal layouts; `f` sees each reachable layout once.
pub fn walk(mode: Mode, depth: usize, f: &mut dyn FnMut(&Layout)) {
    fn go(l: &Layout, depth: usize, f: &mut dyn FnMut(&Layout)) {
        f(l);
        if depth == 0 || l.status() != Status::InProgress {
            return;
        }
        for a in Action::all() {
            if let Ok(next) = l.append(a) {
                go(&next, depth - 1, f);
            }
        }
    }
    go(&Layout::new(Canvas::reference(), mode), depth, f);
}

// ---------------------------------------------------------------- polygons

pub type Poly = Vec<(f64, f64)>;

/// Corners of the inflated wire, built from the end points directly.
pub fn wire_polygon(s: &Segment) -> Poly {
    let (dx, dy) = (s.end.x - s.start.x, s.end.y - s.start.y);
    let len = (dx * dx + dy * dy).sqrt();
    let (nx, ny) = (-dy / len * s.width / 2.0, dx / len * s.width / 2.0);
    vec![
        (s.start.x + nx, s.start.y + ny),
        (s.start.x - nx, s.start.y - ny),
        (s.end.x - nx, s.end.y - ny),
        (s.end.x + nx, s.end.y + ny),
    ]
}

fn signed_area(p: &Poly) -> f64 {
    let n = p.len();
    (0..n)
        .map(|i| {
            let (a, b) = (p[i], p[(i + 1) % n]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum::<f64>()
        / 2.0
}

fn ccw(mut p: Poly) -> Poly {
    if signed_area(&p) < 0.0 {
        p.reverse();
    }
    p
}

/// Sutherland-Hodgman clip of `subject` by the convex `clip`.
pub fn intersection_area(subject: &Poly, clip: &Poly) -> f64 {
    let clip = ccw(clip.clone());
    let mut out = ccw(subject.clone());
    let n = clip.len();
    for i in 0..n {
        if out.is_empty() {
            return 0.0;
        }
        let (a, b) = (clip[i], clip[(i + 1) % n]);
        let side = |p: (f64, f64)| (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
        let input = std::mem::take(&mut out);
        for j in 0..input.len() {
            let (p, q) = (input[j], input[(j + 1) % input.len()]);
            let (sp, sq) = (side(p), side(q));
            if sp >= 0.0 {
                out.push(p);
            }
            if (sp >= 0.0) != (sq >= 0.0) {
                let t = sp / (sp - sq);
                out.push((p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1)));
            }
        }
    }
    if out.len() < 3 {
        0.0
    } else {
        signed_area(&out).abs()
    }
}

/// Positive-area overlap of two wires.
pub fn wires_overlap(a: &Segment, b: &Segment) -> bool {
    intersection_area(&wire_polygon(a), &wire_polygon(b)) > 1e-6
}

/// Indices of non-consecutive overlapping wire pairs.
pub fn overlapping_pairs(segs: &[Segment]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..segs.len() {
        for j in i + 2..segs.len() {
            if wires_overlap(&segs[i], &segs[j]) {
                out.push((i, j));
            }
        }
    }
    out
}

pub fn in_canvas(segs: &[Segment], c: &Canvas) -> bool {
    segs.iter().all(|s| {
        wire_polygon(s)
            .iter()
            .all(|&(x, y)| x > -1e-9 && y > -1e-9 && x < c.width + 1e-9 && y < c.height + 1e-9)
    })
}

const DELTAS: [(i32, i32); 8] = [(0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1)];

/// Legality of `a` from `l`, recomputed from lattice arithmetic and the
/// polygon-clipping overlap oracle.
pub fn oracle_legal(l: &Layout, a: u8) -> bool {
    let c = l.canvas();
    let h = (l.heading().index() as i32 + a as i32 - 2).rem_euclid(8) as usize;
    let head = l.head();
    let next = GridPoint::new(head.x + DELTAS[h].0, head.y + DELTAS[h].1);
    let seg = Segment {
        start: c.to_point(head),
        end: c.to_point(next),
        width: c.wire_width,
        layer: 0,
    };
    if !in_canvas(&[seg], c) {
        return false;
    }
    let segs = l.segments();
    let n = segs.len();
    !segs.iter().take(n.saturating_sub(1)).any(|s| wires_overlap(s, &seg))
}

// ---------------------------------------------------------------- inductance

/// Mutual inductance of two coaxially aligned parallel filaments of length
/// `l` at distance `d`, same current direction.
pub fn parallel_filaments(l: f64, d: f64) -> f64 {
    let r = l / d;
    MU0 * l / (2.0 * std::f64::consts::PI) * ((r + (1.0 + r * r).sqrt()).ln() - (1.0 + 1.0 / (r * r)).sqrt() + 1.0 / r)
}

/// Partial self-inductance of a `w x t` bar of length `l` as the mean
/// mutual inductance between `n x n` sub-filaments. The diagonal terms use
/// the geometric mean distance of a rectangle, 0.2235 (a + b).
pub fn bar_self_inductance(l: f64, w: f64, t: f64, n: usize) -> f64 {
    let (dw, dt) = (w / n as f64, t / n as f64);
    let centres: Vec<(f64, f64)> = (0..n)
        .flat_map(|i| (0..n).map(move |j| ((i as f64 + 0.5) * dw, (j as f64 + 0.5) * dt)))
        .collect();
    let gmd_cell = 0.2235 * (dw + dt);
    let mut sum = 0.0;
    for a in &centres {
        for b in &centres {
            let d = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
            sum += parallel_filaments(l, if d == 0.0 { gmd_cell } else { d });
        }
    }
    sum / (centres.len() * centres.len()) as f64
}

// ---------------------------------------------------------------- reward

/// Piecewise costs written straight from their definitions.
pub fn oracle_costs(e_l: f64, e_r: f64, e_srf: f64, e_area: f64) -> [f64; 4] {
    let tight = e_l < 0.05;
    let c_l = if tight { e_l } else { 2.0 * e_l - 0.05 };
    let c_r = match (e_r >= 0.0, tight) {
        (true, _) => f64::min(2.0 * e_r, 1.0),
        (false, true) => e_r,
        (false, false) => 0.0,
    };
    let c_srf = match (e_srf >= 0.0, tight) {
        (true, _) => f64::min(2.0 * e_srf, 1.0),
        (false, true) => f64::max(2.0 * e_srf, -1.0),
        (false, false) => 0.0,
    };
    let c_area = if tight { e_area } else { 0.0 };
    [c_l, c_r, c_srf, c_area]
}

pub fn oracle_reward(costs: [f64; 4], w: [f64; 4]) -> f64 {
    let num: f64 = costs.iter().zip(w).map(|(c, w)| c * w).sum();
    1.0 - num / w.iter().sum::<f64>()
}

// ---------------------------------------------------------------- stats

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}
