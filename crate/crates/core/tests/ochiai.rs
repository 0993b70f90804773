use std::collections::BTreeSet;

use bytefix_core::faultloc::{ochiai_score, CoverageMatrix, Location, Outcome, Tally};
use proptest::prelude::*;

proptest! {
    #[test]
    fn bounded(ef in 0u32..500, nf in 0u32..500, ep in 0u32..500) {
        let s = ochiai_score(ef, nf, ep);
        prop_assert!((0.0..=1.0).contains(&s));
        prop_assert_eq!(s == 0.0, ef == 0);
        prop_assert_eq!(s == 1.0, ef > 0 && nf == 0 && ep == 0);
    }

    #[test]
    fn more_failing_coverage_never_lowers(ef in 0u32..500, nf in 1u32..500, ep in 0u32..500) {
        // one more failing test executes the line, same number of failing tests overall
        prop_assert!(ochiai_score(ef + 1, nf - 1, ep) >= ochiai_score(ef, nf, ep));
    }

    #[test]
    fn more_passing_coverage_never_raises(ef in 0u32..500, nf in 0u32..500, ep in 0u32..500) {
        prop_assert!(ochiai_score(ef, nf, ep + 1) <= ochiai_score(ef, nf, ep));
    }

    #[test]
    fn uncovered_failures_never_raise(ef in 0u32..500, nf in 0u32..500, ep in 0u32..500) {
        prop_assert!(ochiai_score(ef, nf + 1, ep) <= ochiai_score(ef, nf, ep));
    }
}

#[test]
fn worked_example() {
    // one failing test covers a and b, one passing test covers b
    let a = Location { class: "p/C".into(), line: 1 };
    let b = Location { class: "p/C".into(), line: 2 };
    let m = CoverageMatrix {
        tests: vec![
            ("f".into(), Outcome::Fail, BTreeSet::from([a.clone(), b.clone()])),
            ("p".into(), Outcome::Pass, BTreeSet::from([b.clone()])),
        ],
        tallies: [(a.clone(), Tally { e_f: 1, e_p: 0, n_f: 0, n_p: 1 }), (b.clone(), Tally { e_f: 1, e_p: 1, n_f: 0, n_p: 0 })]
            .into_iter()
            .collect(),
        warnings: vec![],
    };
    let t = &m.tallies;
    assert_eq!(ochiai_score(t[&a].e_f, t[&a].n_f, t[&a].e_p), 1.0);
    assert!((ochiai_score(t[&b].e_f, t[&b].n_f, t[&b].e_p) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
}
