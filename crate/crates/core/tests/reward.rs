mod common;

use common::{oracle_costs, oracle_reward};
use inductor_draw::reward::{costs, error_terms, reward, reward_from_costs, Costs, ErrorTerms, RewardError, TargetSpec};
use inductor_draw::simulator::Metrics;
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn target() -> TargetSpec {
    TargetSpec::new(116.5e-12, 0.925, 155e9, 10_000.0)
}

fn metrics(l: f64, r: f64, srf: f64, area: f64) -> Metrics {
    let t = target();
    Metrics {
        inductance: l * t.inductance,
        resistance: r * t.resistance,
        srf: srf * t.srf,
        q_factor: 1.0,
        area: area * t.area_max,
    }
}

fn e(e_l: f64, e_r: f64, e_srf: f64, e_area: f64) -> ErrorTerms {
    ErrorTerms { e_l, e_r, e_srf, e_area }
}

fn close(a: [f64; 4], b: [f64; 4]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= TOL)
}

#[test]
fn error_terms_follow_ratios() {
    let t = target();
    let exact = error_terms(&metrics(1.0, 1.0, 1.0, 1.0), &t);
    assert!(close([exact.e_l, exact.e_r, exact.e_srf, exact.e_area], [0.0; 4]));
    let hi = error_terms(&metrics(1.1, 1.0, 1.1, 1.0), &t);
    assert!((hi.e_l - 0.1).abs() < TOL && (hi.e_srf + 0.1).abs() < TOL);
    let lo = error_terms(&metrics(0.9, 1.0, 1.0, 1.0), &t);
    assert!((lo.e_l - 0.1).abs() < TOL);
}

#[test]
fn cost_branch_examples() {
    let c = costs(&e(0.0, -0.1, -0.1, -0.2)).as_array();
    assert!(close(c, [0.0, -0.1, -0.2, -0.2]), "{c:?}");
    let c = costs(&e(0.1, 0.2, 0.3, -0.2)).as_array();
    assert!(close(c, [0.15, 0.4, 0.6, 0.0]), "{c:?}");
    let c = costs(&e(0.05, 0.0, 0.0, 0.0));
    assert!((c.l - 0.05).abs() < TOL);
}

#[test]
fn reward_examples() {
    let t = target();
    let cases = [
        ((1.0, 1.0, 1.0, 1.0), 1.0),
        ((1.0, 0.9, 1.1, 0.8), 1.125),
        ((1.1, 1.2, 0.7, 1.0), 0.7125),
    ];
    for ((l, r, s, a), want) in cases {
        let got = reward(&metrics(l, r, s, a), &t).unwrap();
        assert!((got - want).abs() < TOL, "{got} vs {want}");
    }
}

#[test]
fn zero_weights_are_rejected() {
    let c = Costs { l: 0.0, r: 0.0, srf: 0.0, area: 0.0 };
    assert_eq!(reward_from_costs(&c, &[0.0; 4]), Err(RewardError::ZeroWeightSum));
}

/// Breakpoints where the costs are continuous, probed at +-1e-9. Slopes
/// are at most 2, so the two probes differ by at most 4e-9.
#[test]
fn continuity_at_breakpoints() {
    let h = 1e-9;
    // C_L at e_l = 0.05.
    let below = costs(&e(0.05 - h, 0.0, 0.0, 0.0)).l;
    let above = costs(&e(0.05 + h, 0.0, 0.0, 0.0)).l;
    assert!((below - above).abs() < 5.0 * h);
    for e_l in [0.0, 0.02, 0.2] {
        // C_R at e_r = 0 and C_SRF at e_srf = 0, in both regimes.
        let r = (costs(&e(e_l, -h, 0.0, 0.0)).r, costs(&e(e_l, h, 0.0, 0.0)).r);
        assert!((r.0 - r.1).abs() < 5.0 * h, "{r:?}");
        let s = (costs(&e(e_l, 0.0, -h, 0.0)).srf, costs(&e(e_l, 0.0, h, 0.0)).srf);
        assert!((s.0 - s.1).abs() < 5.0 * h, "{s:?}");
    }
    // Clamps: C_R at e_r = 0.5, C_SRF at +-0.5.
    let r = (costs(&e(0.0, 0.5 - h, 0.0, 0.0)).r, costs(&e(0.0, 0.5 + h, 0.0, 0.0)).r);
    assert!((r.0 - r.1).abs() < 5.0 * h);
    for b in [-0.5, 0.5] {
        let s = (costs(&e(0.0, 0.0, b - h, 0.0)).srf, costs(&e(0.0, 0.0, b + h, 0.0)).srf);
        assert!((s.0 - s.1).abs() < 5.0 * h);
    }
    // C_Area is continuous across the e_l switch only when e_area = 0.
    let a = (costs(&e(0.05 - h, 0.0, 0.0, 0.0)).area, costs(&e(0.05 + h, 0.0, 0.0, 0.0)).area);
    assert_eq!(a, (0.0, 0.0));
}

/// The regime switch at e_l = 0.05 drops the credit branches: the jump in
/// C_R, C_SRF and C_Area equals the credit-branch value just below.
#[test]
fn regime_switch_jump_matches_branch_difference() {
    let h = 1e-9;
    let (e_r, e_srf, e_area) = (-0.1, -0.3, -0.4);
    let below = costs(&e(0.05 - h, e_r, e_srf, e_area));
    let above = costs(&e(0.05 + h, e_r, e_srf, e_area));
    assert!((below.r - above.r - e_r).abs() < TOL);
    assert!((below.srf - above.srf - (2.0 * e_srf).max(-1.0)).abs() < TOL);
    assert!((below.area - above.area - e_area).abs() < TOL);
}

fn errors() -> impl Strategy<Value = ErrorTerms> {
    (0.0..2.0f64, -1.0..3.0f64, -2.0..1.0f64, -1.0..0.0f64).prop_map(|(a, b, c, d)| e(a, b, c, d))
}

fn weights() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(0.0..5.0f64).prop_filter("nonzero sum", |w| w.iter().sum::<f64>() > 1e-3)
}

proptest! {
    #[test]
    fn costs_match_oracle(t in errors()) {
        let c = costs(&t).as_array();
        prop_assert!(close(c, oracle_costs(t.e_l, t.e_r, t.e_srf, t.e_area)));
    }

    #[test]
    fn cost_bounds(t in errors()) {
        let c = costs(&t);
        prop_assert!(c.r <= 1.0 && c.srf.abs() <= 1.0 && c.l >= 0.0);
    }

    #[test]
    fn reward_matches_oracle(t in errors(), w in weights()) {
        let got = reward_from_costs(&costs(&t), &w).unwrap();
        let want = oracle_reward(oracle_costs(t.e_l, t.e_r, t.e_srf, t.e_area), w);
        prop_assert!((got - want).abs() < TOL);
    }

    #[test]
    fn weight_scaling_is_neutral(t in errors(), w in weights(), k in 0.01..100.0f64) {
        let c = costs(&t);
        let a = reward_from_costs(&c, &w).unwrap();
        let b = reward_from_costs(&c, &w.map(|x| x * k)).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn reward_decreases_in_each_cost(t in errors(), w in weights(), i in 0usize..4, d in 1e-3..1.0f64) {
        let c = costs(&t);
        let mut arr = c.as_array();
        arr[i] += d;
        let bumped = Costs { l: arr[0], r: arr[1], srf: arr[2], area: arr[3] };
        let (a, b) = (reward_from_costs(&c, &w).unwrap(), reward_from_costs(&bumped, &w).unwrap());
        if w[i] > 0.0 {
            prop_assert!(b < a);
        } else {
            prop_assert!(b <= a);
        }
    }

    #[test]
    fn unit_reward_iff_zero_weighted_cost(t in errors(), w in weights()) {
        let c = costs(&t);
        let sum: f64 = c.as_array().iter().zip(w).map(|(c, w)| c * w).sum();
        let r = reward_from_costs(&c, &w).unwrap();
        prop_assert_eq!(r == 1.0, sum == 0.0);
    }
}
