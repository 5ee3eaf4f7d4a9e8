//! Predictions checked against brute-force enumeration of overlapping
//! connection-event pairs.

use std::collections::BTreeSet;

use cyclesim::skip::oracle::joint_period_h;
use cyclesim::skip::{oracle_next_overlap, predict, Skip};
use proptest::prelude::*;

const GRID: u64 = 1_250;

/// All `(a, b)` with `a, b >= 0`, `b <= max_h` and `|φ + a·T_l − b·T_h| <= d`.
fn brute_overlaps(phi: i64, t_l: i64, t_h: i64, d: i64, max_h: i64) -> BTreeSet<(i64, i64)> {
    let mut out = BTreeSet::new();
    for b in 0..=max_h {
        let lo = (-d - phi + b * t_h).div_euclid(t_l) - 1;
        for a in lo.max(0)..lo.max(0) + 4 {
            let x = phi + a * t_l - b * t_h;
            if -d <= x && x <= d {
                out.insert((a, b));
            }
        }
    }
    out
}

/// Follows predictions from `(0, 0)` and returns every visited point with
/// `b <= max_h`.
fn walk(phi0: i64, t_l: u64, t_h: u64, d: i64, max_h: i64) -> BTreeSet<(i64, i64)> {
    let (mut a, mut b) = (0i64, 0i64);
    let mut seen = BTreeSet::new();
    seen.insert((0, 0));
    loop {
        let phi = phi0 + a * t_l as i64 - b * t_h as i64;
        let (_, p) = predict(phi, t_l, t_h, d);
        let Skip::Finite { k_l, k_h } = p.skip else { break };
        assert!(k_l + k_h > 0, "prediction does not advance");
        a += k_l as i64;
        b += k_h as i64;
        if b > max_h {
            break;
        }
        seen.insert((a, b));
    }
    seen
}

fn intervals() -> impl Strategy<Value = (u64, u64)> {
    (6u64..=3_200, 6u64..=3_200).prop_map(|(x, y)| {
        let (l, h) = if x <= y { (x, y) } else { (y, x) };
        (l * GRID, h * GRID)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20_000))]

    #[test]
    fn prediction_never_skips_an_overlap(
        (t_l, t_h) in intervals(),
        phi_frac in -2.0f64..2.0,
        d in prop::sample::select(vec![446i64, 742, 1_000, 2_120]),
    ) {
        prop_assume!(t_l as i64 > 2 * d);
        let phi = (phi_frac * t_h as f64) as i64;
        let (_, p) = predict(phi, t_l, t_h, d);
        let max_h = match p.skip {
            Skip::Finite { k_h, .. } => k_h,
            Skip::Never => joint_period_h(t_l, t_h) + 1,
        };
        let first = oracle_next_overlap(phi, t_l as i64, t_h as i64, d, max_h);
        match (p.skip, first) {
            (_, None) => {}
            (Skip::Never, Some(o)) => prop_assert!(false, "never predicted, overlap at {o:?}"),
            (Skip::Finite { k_l, k_h }, Some((a, b))) => {
                prop_assert!(a >= k_l && b >= k_h,
                    "phi={phi} tl={t_l} th={t_h} d={d} case={} predicted ({k_l},{k_h}) first overlap ({a},{b})",
                    p.case);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(3_000))]

    #[test]
    fn walk_visits_every_overlap(
        (t_l, t_h) in intervals(),
        phi_frac in -1.5f64..1.5,
    ) {
        let d = 742;
        let phi = (phi_frac * t_h as f64) as i64;
        let max_h = (joint_period_h(t_l, t_h) as i64 + 2).min(400);
        let overlaps = brute_overlaps(phi, t_l as i64, t_h as i64, d, max_h);
        let visited = walk(phi, t_l, t_h, d, max_h);
        for o in &overlaps {
            prop_assert!(visited.contains(o),
                "phi={phi} tl={t_l} th={t_h}: overlap {o:?} not visited");
        }
    }
}

#[test]
fn equal_intervals_are_constant() {
    let (g, p) = predict(300, 7_500, 7_500, 742);
    assert_eq!(g.gamma, 0);
    assert_eq!(p.counts(), Some((1, 1)));
    let (_, p) = predict(3_000, 7_500, 7_500, 742);
    assert_eq!(p.skip, Skip::Never);
}
