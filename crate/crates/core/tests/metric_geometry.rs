//! The overlap score against a direct geometric computation, and TSP
//! monotonicity.

use proptest::prelude::*;
use sparse_track_core::bbox::BoundingBox;
use sparse_track_core::eval::{overlap_score, tsp, TspParams};

fn boxes() -> impl Strategy<Value = BoundingBox> {
    (-50i32..50, 1i32..60, -50i32..50, 1i32..60)
        .prop_map(|(l, w, t, h)| BoundingBox::new(l, l + w, t, t + h))
}

/// A box plus a nearby second box, so overlapping pairs are common.
fn near_pairs() -> impl Strategy<Value = (BoundingBox, BoundingBox)> {
    (boxes(), -20i32..20, -20i32..20, 1i32..50, 1i32..50).prop_map(|(a, dx, dy, w, h)| {
        let b = BoundingBox::new(a.l + dx, a.l + dx + w, a.t + dy, a.t + dy + h);
        (a, b)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn overlap_is_symmetric(a in boxes(), b in boxes()) {
        prop_assert_eq!(overlap_score(&a, &b).unwrap(), overlap_score(&b, &a).unwrap());
    }

    /// For overlapping boxes the score equals intersection area over the
    /// area of the smallest covering rectangle.
    #[test]
    fn overlap_matches_direct_geometry((a, b) in near_pairs()) {
        let inter_w = a.r.min(b.r) - a.l.max(b.l);
        let inter_h = a.b.min(b.b) - a.t.max(b.t);
        prop_assume!(inter_w > 0 && inter_h > 0);
        let cover_w = a.r.max(b.r) - a.l.min(b.l);
        let cover_h = a.b.max(b.b) - a.t.min(b.t);
        let direct = (inter_w as f64 * inter_h as f64) / (cover_w as f64 * cover_h as f64);
        let score = overlap_score(&a, &b).unwrap();
        prop_assert!((score - direct).abs() < 1e-12, "score {score} direct {direct}");
    }

    #[test]
    fn overlap_sign_tracks_separation((a, b) in near_pairs()) {
        let separate = a.r < b.l || b.r < a.l || a.b < b.t || b.b < a.t;
        let touching = a.r.min(b.r) == a.l.max(b.l) || a.b.min(b.b) == a.t.max(b.t);
        let score = overlap_score(&a, &b).unwrap();
        if separate && !touching {
            prop_assert!(score < 0.0);
        } else if !separate {
            prop_assert!(score >= 0.0);
        } else {
            // Separated in one axis but edge-aligned in the other: the
            // min distance is zero and so is the score.
            prop_assert!(score == 0.0);
        }
        prop_assert!((-1.0..=1.0).contains(&score));
    }

    #[test]
    fn tsp_increases_with_overlap(a in boxes(), b in boxes(), c in boxes()) {
        let params = TspParams::default();
        let sab = overlap_score(&a, &b).unwrap();
        let sac = overlap_score(&a, &c).unwrap();
        let tab = tsp(&a, &b, &params).unwrap();
        let tac = tsp(&a, &c, &params).unwrap();
        if sab > sac {
            prop_assert!(tab > tac);
        }
        prop_assert!(tab > 0.0 && tab < 1.0);
    }
}
