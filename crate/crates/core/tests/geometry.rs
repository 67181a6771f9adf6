mod common;

use common::{actions, in_canvas, oracle_legal, overlapping_pairs, walk, wire_polygon};
use inductor_draw::geometry::{heading_after, Action, Canvas, GeometryError, GridPoint, Heading, Layout, Mode, Point, Status};
use proptest::prelude::*;

fn exhaustive(mode: Mode, depth: usize) -> usize {
    let mut visited = 0;
    walk(mode, depth, &mut |l| {
        visited += 1;
        let segs = l.segments();
        assert!(overlapping_pairs(&segs).is_empty(), "{:?}", l.actions());
        assert!(in_canvas(&segs, l.canvas()));
        for w in segs.windows(2) {
            assert_eq!(w[0].end, w[1].start);
        }
        for s in &segs {
            for p in [s.start, s.end] {
                assert_eq!(p.x % 10.0, 0.0);
                assert_eq!(p.y % 10.0, 0.0);
            }
        }
        if l.status() != Status::InProgress {
            assert!(matches!(l.legal_actions(), Err(GeometryError::AlreadyTerminal)));
            return;
        }
        let mask = l.legal_actions().unwrap();
        for a in Action::all() {
            let appended = l.append(a);
            assert_eq!(mask[a.index()], appended.is_ok(), "{:?} + {a:?}", l.actions());
            assert_eq!(mask[a.index()], oracle_legal(l, a.value()), "{:?} + {a:?}", l.actions());
        }
    });
    visited
}

#[test]
fn exhaustive_depth_six_symmetric() {
    assert!(exhaustive(Mode::Symmetric, 6) > 800);
}

#[test]
fn exhaustive_depth_six_non_symmetric() {
    assert!(exhaustive(Mode::NonSymmetric, 6) > 1000);
}

#[test]
fn append_examples() {
    let c = Canvas::reference();
    let l = Layout::new(c, Mode::Symmetric).append(Action::new(2).unwrap()).unwrap();
    assert_eq!(l.segment(0).start, Point::new(40.0, 0.0));
    assert_eq!(l.head_point(), Point::new(40.0, 10.0));
    let done = l.append(Action::new(4).unwrap()).unwrap();
    assert_eq!(done.head_point(), Point::new(50.0, 10.0));
    assert_eq!(done.status(), Status::Complete);
    assert!(matches!(done.append(Action::STRAIGHT), Err(GeometryError::AlreadyTerminal)));
    // Turning west from the first node leaves through the bottom edge.
    let west = Layout::new(c, Mode::Symmetric).append(Action::new(0).unwrap()).unwrap_err();
    assert_eq!(west, GeometryError::OutOfBounds);
}

#[test]
fn append_failure_leaves_layout_untouched() {
    let l = Layout::from_actions(Canvas::reference(), Mode::NonSymmetric, &actions(&[2, 0, 0])).unwrap();
    let before = l.clone();
    assert!(l.append(Action::new(0).unwrap()).is_err());
    assert_eq!(l, before);
}

/// Searches depth-first for a reachable in-progress layout with no legal action.
fn find_boxed_in(l: &Layout, depth: usize) -> Option<Layout> {
    if l.status() != Status::InProgress {
        return None;
    }
    let mask = l.legal_actions().unwrap();
    if !mask.contains(&true) {
        return Some(l.clone());
    }
    if depth == 0 {
        return None;
    }
    Action::all()
        .filter(|a| mask[a.index()])
        .find_map(|a| find_boxed_in(&l.append(a).unwrap(), depth - 1))
}

#[test]
fn a_spiral_can_box_itself_in() {
    let start = Layout::new(Canvas::reference(), Mode::NonSymmetric);
    let boxed = find_boxed_in(&start, 9).expect("some layout within 9 steps is boxed in");
    for a in Action::all() {
        assert!(!oracle_legal(&boxed, a.value()));
    }
}

fn complete_symmetric(depth: usize) -> Vec<Layout> {
    let mut out = Vec::new();
    walk(Mode::Symmetric, depth, &mut |l| {
        if l.status() == Status::Complete {
            out.push(l.clone());
        }
    });
    out
}

fn segment_set(l: &Layout) -> Vec<[i64; 4]> {
    let mut v: Vec<[i64; 4]> = l
        .segments()
        .iter()
        .map(|s| {
            let (a, b) = ((s.start.x as i64, s.start.y as i64), (s.end.x as i64, s.end.y as i64));
            let (a, b) = if a <= b { (a, b) } else { (b, a) };
            [a.0, a.1, b.0, b.1]
        })
        .collect();
    v.sort();
    v
}

#[test]
fn mirror_reflects_and_connects() {
    let layouts = complete_symmetric(7);
    assert!(layouts.len() > 50);
    for half in layouts {
        let Ok(full) = half.mirror() else { continue };
        let c = *full.canvas();
        assert_eq!(full.segment_count(), 2 * half.segment_count());
        assert_eq!(full.nodes()[0], c.input_node());
        assert_eq!(*full.nodes().last().unwrap(), c.output_node());
        // Reflecting every wire reproduces the same set.
        let reflected: Layout = {
            let nodes: Vec<GridPoint> = full.nodes().iter().rev().map(|&g| c.reflect(g)).collect();
            Layout::from_full_nodes(c, Mode::Symmetric, nodes, Vec::new()).unwrap()
        };
        assert_eq!(segment_set(&reflected), segment_set(&full));
        assert!(overlapping_pairs(&full.segments()).is_empty());
        let img = full.rasterize(2.5).unwrap();
        assert_eq!(img, img.flipped_horizontal());
    }
}

#[test]
fn mirror_example_single_pair() {
    let half = Layout::from_actions(Canvas::reference(), Mode::Symmetric, &actions(&[2, 4])).unwrap();
    let full = half.mirror().unwrap();
    let segs = full.segments();
    assert_eq!(segs.len(), 4);
    assert_eq!((segs[3].start, segs[3].end), (Point::new(60.0, 10.0), Point::new(60.0, 0.0)));
    // x spans 37.5..62.5; the top wire at y=10 reaches 12.5.
    assert!((full.bounding_box_area().unwrap() - 25.0 * 12.5).abs() < 1e-9);
    // The two vertical wires alone span 25 x 10.
    let (l, r) = (segs[0].rect().extent(), segs[3].rect().extent());
    let area = (l.2.max(r.2) - l.0.min(r.0)) * (l.3.max(r.3) - l.1.min(r.1));
    assert!((area - 250.0).abs() < 1e-9);
}

#[test]
fn bounding_box_single_segment() {
    let l = Layout::from_actions(Canvas::reference(), Mode::NonSymmetric, &actions(&[2])).unwrap();
    assert!((l.bounding_box_area().unwrap() - 50.0).abs() < 1e-9);
    let empty = Layout::new(Canvas::reference(), Mode::NonSymmetric);
    assert_eq!(empty.bounding_box_area(), Err(GeometryError::EmptyLayout));
}

#[test]
fn raster_matches_point_in_polygon_oracle() {
    let l = Layout::from_actions(Canvas::reference(), Mode::NonSymmetric, &actions(&[2, 1, 3, 4])).unwrap();
    let img = l.rasterize(2.5).unwrap();
    assert_eq!((img.cols, img.rows), (40, 40));
    let polys: Vec<_> = l.segments().iter().map(wire_polygon).collect();
    for row in 0..40 {
        for col in 0..40 {
            let (x, y) = ((col as f64 + 0.5) * 2.5, (row as f64 + 0.5) * 2.5);
            let inside = polys.iter().any(|p| strictly_inside(p, x, y));
            assert_eq!(img.get(col, row), inside, "pixel ({col},{row})");
        }
    }
    let first = Layout::from_actions(Canvas::reference(), Mode::NonSymmetric, &actions(&[2])).unwrap();
    let img = first.rasterize(2.5).unwrap();
    for row in 0..40 {
        for col in 0..40 {
            let (x, y) = ((col as f64 + 0.5) * 2.5, (row as f64 + 0.5) * 2.5);
            let want = x > 37.5 && x < 42.5 && y > 0.0 && y < 10.0;
            assert_eq!(img.get(col, row), want);
        }
    }
    assert_eq!(Layout::new(Canvas::reference(), Mode::Symmetric).rasterize(2.5).unwrap().count_true(), 0);
    assert!(matches!(first.rasterize(3.0), Err(GeometryError::BadResolution(_))));
}

fn strictly_inside(p: &[(f64, f64)], x: f64, y: f64) -> bool {
    let n = p.len();
    let sides: Vec<f64> = (0..n)
        .map(|i| {
            let (a, b) = (p[i], p[(i + 1) % n]);
            (b.0 - a.0) * (y - a.1) - (b.1 - a.1) * (x - a.0)
        })
        .collect();
    sides.iter().all(|&s| s > 1e-9) || sides.iter().all(|&s| s < -1e-9)
}

fn heading() -> impl Strategy<Value = Heading> {
    (0usize..8).prop_map(Heading::from_index)
}

proptest! {
    #[test]
    fn straight_keeps_heading(h in heading()) {
        prop_assert_eq!(heading_after(h, Action::STRAIGHT), h);
    }

    #[test]
    fn opposite_turns_cancel(h in heading(), pair in prop::sample::select(vec![(0u8, 4u8), (1, 3), (4, 0), (3, 1)])) {
        let (a, b) = (Action::new(pair.0).unwrap(), Action::new(pair.1).unwrap());
        prop_assert_eq!(heading_after(heading_after(h, a), b), h);
    }

    #[test]
    fn random_walks_stay_valid(seq in prop::collection::vec(0u8..5, 0..30), sym in any::<bool>()) {
        let mode = if sym { Mode::Symmetric } else { Mode::NonSymmetric };
        let mut l = Layout::new(Canvas::reference(), mode);
        for v in seq {
            if l.status() != Status::InProgress {
                break;
            }
            let mask = l.legal_actions().unwrap();
            let a = (0..5).map(|k| Action::new((v + k) % 5).unwrap()).find(|a| mask[a.index()]);
            let Some(a) = a else { break };
            l = l.append(a).unwrap();
        }
        prop_assert!(overlapping_pairs(&l.segments()).is_empty());
        prop_assert!(in_canvas(&l.segments(), l.canvas()));
    }
}

#[test]
fn heading_examples() {
    let act = |v| Action::new(v).unwrap();
    assert_eq!(heading_after(Heading::N, act(2)), Heading::N);
    assert_eq!(heading_after(Heading::N, act(4)), Heading::E);
    assert_eq!(heading_after(Heading::E, act(0)), Heading::N);
    assert!(Action::new(5).is_err());
}
