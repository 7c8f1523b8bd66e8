mod common;

use common::*;
use facework_core::scoring::merit;
use facework_core::{concordant_pairs, distance, Ranking};
use proptest::prelude::*;

#[test]
fn metrics_match_oracles_on_every_small_pair() {
    for (n, slots) in [(5usize, 3u8), (4, 2), (6, 2)] {
        let all = complete_rankings(n, slots);
        let lib: Vec<Ranking> = all
            .iter()
            .map(|r| Ranking::with_slots(slots, r).unwrap())
            .collect();
        for (a, ra) in all.iter().zip(&lib) {
            for (b, rb) in all.iter().zip(&lib) {
                assert_eq!(
                    distance(ra, rb).unwrap(),
                    oracle_distance(a, b),
                    "{a:?} vs {b:?}"
                );
                assert_eq!(
                    concordant_pairs(ra, rb).unwrap(),
                    oracle_concordant(a, b),
                    "{a:?} vs {b:?}"
                );
            }
        }
    }
}

#[test]
fn footrule_is_a_metric_on_complete_rankings() {
    let all: Vec<Ranking> = complete_rankings(5, 3)
        .iter()
        .map(|r| Ranking::with_slots(3, r).unwrap())
        .collect();
    for a in &all {
        assert_eq!(distance(a, a).unwrap(), 0);
        for b in &all {
            let ab = distance(a, b).unwrap();
            assert_eq!(ab, distance(b, a).unwrap());
            assert_eq!(ab == 0, a == b);
            for c in &all {
                assert!(distance(a, c).unwrap() <= ab + distance(b, c).unwrap());
            }
        }
    }
}

#[test]
fn concordance_peaks_at_the_preference() {
    // Every pair except the pool ties is concordant with itself.
    for (n, slots) in [(5usize, 3u8), (8, 5)] {
        let pool_ties = {
            let k = n - slots as usize;
            (k * (k - 1) / 2) as u32
        };
        let max_c = (n * (n - 1) / 2) as u32 - pool_ties;
        let all = complete_rankings(n, slots);
        let pref = Ranking::with_slots(slots, &all[all.len() / 3]).unwrap();
        assert_eq!(concordant_pairs(&pref, &pref).unwrap(), max_c);
        for r in &all {
            let r = Ranking::with_slots(slots, r).unwrap();
            let c = concordant_pairs(&r, &pref).unwrap();
            assert!(c <= max_c);
            assert_eq!(c == max_c, r == pref);
        }
    }
}

fn task_ranking() -> impl Strategy<Value = Vec<u8>> {
    Just((1u8..=8).collect::<Vec<u8>>())
        .prop_shuffle()
        .prop_map(|order| {
            let mut r = vec![6u8; 8];
            for (k, obj) in order.iter().take(5).enumerate() {
                r[*obj as usize - 1] = k as u8 + 1;
            }
            r
        })
}

proptest! {
    #[test]
    fn task_metrics_match_oracles(a in task_ranking(), b in task_ranking()) {
        let ra = Ranking::task(&a).unwrap();
        let rb = Ranking::task(&b).unwrap();
        prop_assert_eq!(distance(&ra, &rb).unwrap(), oracle_distance(&a, &b));
        prop_assert_eq!(concordant_pairs(&ra, &rb).unwrap(), oracle_concordant(&a, &b));
        prop_assert_eq!(concordant_pairs(&ra, &rb).unwrap(), concordant_pairs(&rb, &ra).unwrap());
        let m = merit(&ra, &rb).unwrap();
        prop_assert!(m <= 25);
        prop_assert_eq!(m == 25, ra == rb);
    }
}
