mod common;

use common::{all_labelings, ari_pairs, canonical_labelings, nmi_direct};
use triplex::embed::RowsView;
use triplex::metrics::{ari, nmi, silhouette};

const TOL: f64 = 1e-12;

fn check(a: &[usize], b: &[usize]) {
    let (got, want) = (ari(a, b).unwrap(), ari_pairs(a, b));
    assert!((got - want).abs() <= TOL, "ARI {a:?} {b:?}: {got} vs {want}");
    let (got, want) = (nmi(a, b).unwrap(), nmi_direct(a, b));
    assert!((got - want).abs() <= TOL, "NMI {a:?} {b:?}: {got} vs {want}");
}

#[test]
fn every_partition_pair_up_to_seven_points() {
    let mut pairs = 0;
    for n in 2..=7 {
        let parts = canonical_labelings(n, 3);
        for a in &parts {
            for b in &parts {
                check(a, b);
                pairs += 1;
            }
        }
    }
    assert_eq!(pairs, 2 * 2 + 5 * 5 + 14 * 14 + 41 * 41 + 122 * 122 + 365 * 365);
}

#[test]
fn every_raw_labeling_up_to_four_points() {
    for n in 2..=4 {
        let all = all_labelings(n, 3);
        for a in &all {
            for b in &all {
                check(a, b);
            }
        }
    }
}

#[test]
fn silhouette_hand_fixtures() {
    let x = [0.0, 1.0, 2.0, 3.0];
    let s = silhouette(RowsView::new(&x, 1), &[0, 0, 1, 1]).unwrap();
    assert!((s - 7.0 / 15.0).abs() <= TOL, "{s}");
    // two tight pairs far apart: a = 1, b = 10 and 11 or 9 and 10
    let x = [0.0, 1.0, 10.0, 11.0];
    let s = silhouette(RowsView::new(&x, 1), &[0, 0, 1, 1]).unwrap();
    let want = ((1.0 - 1.0 / 10.5) + (1.0 - 1.0 / 9.5) * 2.0 + (1.0 - 1.0 / 10.5)) / 4.0;
    assert!((s - want).abs() <= TOL, "{s} vs {want}");
}
