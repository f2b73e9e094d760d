mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use slacktopo::filtration::{build_vr_filtration, enclosing_radius};
use slacktopo::persistence::{
    betti_summary, compute_persistence, compute_persistence_standard, reduce_twist, rips_persistence,
    BoundaryMatrix,
};
use slacktopo::seed;
use slacktopo::slack::DissimilarityMatrix;

use common::{bars, bottleneck, circle_matrix, dim_bars, grid_matrix, relabel, uniform_matrix};

#[test]
fn clearing_agrees_with_plain_reduction() {
    let mut rng = seed::rng(50);
    for case in 0..50 {
        let n = rng.random_range(6..=25);
        let d = if case % 3 == 0 {
            grid_matrix(&mut rng, n, 5)
        } else {
            uniform_matrix(&mut rng, n)
        };
        let r_max = if case % 3 == 0 {
            5.0
        } else {
            rng.random_range(0.3..0.9)
        };
        let f = build_vr_filtration(&d, 2, r_max).unwrap();
        assert_eq!(
            bars(&compute_persistence(&f)),
            bars(&compute_persistence_standard(&f)),
            "case {case}, n = {n}"
        );
    }
}

#[test]
fn implicit_engine_agrees_with_explicit_filtration() {
    let mut rng = seed::rng(51);
    for case in 0..40 {
        let n = rng.random_range(4..=22);
        let d = if case % 2 == 0 {
            grid_matrix(&mut rng, n, 4)
        } else {
            uniform_matrix(&mut rng, n)
        };
        for r_max in [0.45, 0.7, enclosing_radius(&d).unwrap()] {
            for max_dim in 0..=2 {
                let f = build_vr_filtration(&d, max_dim, r_max).unwrap();
                let implicit = rips_persistence(&d, max_dim, r_max).unwrap();
                assert_eq!(
                    bars(&compute_persistence(&f)),
                    bars(&implicit.diagram),
                    "case {case}, r_max {r_max}, max_dim {max_dim}"
                );
                let mut counts = f.counts_by_dim();
                counts.truncate(max_dim + 1);
                assert_eq!(counts, implicit.simplices_by_dim);
            }
        }
    }
}

#[test]
fn evenly_spaced_circle_has_one_loop() {
    let d = circle_matrix(20);
    let r = enclosing_radius(&d).unwrap();
    let explicit = compute_persistence(&build_vr_filtration(&d, 1, r).unwrap());
    let implicit = rips_persistence(&d, 1, r).unwrap().diagram;
    assert_eq!(bars(&explicit), bars(&implicit));

    let h1 = dim_bars(&explicit, 1);
    assert_eq!(h1.len(), 1);
    let chord = |k: f64| 2.0 * (std::f64::consts::PI * k / 20.0).sin();
    assert!((h1[0].0 - chord(1.0)).abs() < 1e-12);
    assert!(h1[0].1 >= chord(6.0) - 1e-12);

    let first = betti_summary(&explicit, 0.3).unwrap();
    assert_eq!(first.betti, vec![1, 1]);
    assert_eq!(betti_summary(&implicit, 0.3).unwrap(), first);
}

#[test]
fn circle_loop_dominates_at_max_dim_two() {
    let d = circle_matrix(20);
    let f = build_vr_filtration(&d, 2, 1.5).unwrap();
    let diag = compute_persistence_standard(&f);
    let mut h1: Vec<f64> = diag.dim(1).map(|p| p.persistence()).collect();
    h1.sort_by(|a, b| b.total_cmp(a));
    assert!(h1.len() == 1 || h1[0] >= 5.0 * h1[1]);
}

#[test]
fn vertex_relabeling_leaves_diagram_unchanged() {
    let mut rng = seed::rng(52);
    for _ in 0..20 {
        let n = rng.random_range(6..=18);
        let d = grid_matrix(&mut rng, n, 3);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let e = relabel(&d, &perm);
        let r = 3.0;
        assert_eq!(
            bars(&compute_persistence(&build_vr_filtration(&d, 2, r).unwrap())),
            bars(&compute_persistence(&build_vr_filtration(&e, 2, r).unwrap()))
        );
        assert_eq!(
            bars(&rips_persistence(&d, 2, r).unwrap().diagram),
            bars(&rips_persistence(&e, 2, r).unwrap().diagram)
        );
    }
}

#[test]
fn euler_characteristic_bookkeeping() {
    let mut rng = seed::rng(53);
    for _ in 0..20 {
        let n = rng.random_range(5..=20);
        let d = uniform_matrix(&mut rng, n);
        let f = build_vr_filtration(&d, 2, rng.random_range(0.3..1.0)).unwrap();
        let pairing = reduce_twist(&BoundaryMatrix::from_filtration(&f));
        let sign = |dim: usize| if dim % 2 == 0 { 1i64 } else { -1 };
        let chi: i64 = f.simplices().iter().map(|s| sign(s.dim())).sum();
        let essential: i64 = pairing
            .essential
            .iter()
            .map(|&k| sign(f.simplices()[k as usize].dim()))
            .sum();
        assert_eq!(chi, essential);
        let mut seen = vec![0u8; f.len()];
        for &(b, k) in &pairing.pairs {
            assert_eq!(
                f.simplices()[k as usize].dim(),
                f.simplices()[b as usize].dim() + 1
            );
            seen[b as usize] += 1;
            seen[k as usize] += 1;
        }
        for &k in &pairing.essential {
            seen[k as usize] += 1;
        }
        assert!(seen.iter().all(|&c| c == 1));
    }
}

#[test]
fn perturbation_moves_diagram_by_at_most_eta() {
    let mut rng = seed::rng(54);
    let eta = 1e-3;
    for _ in 0..10 {
        let n = 30;
        let d = uniform_matrix(&mut rng, n);
        let mut data = d.as_slice().to_vec();
        for a in 0..n {
            for b in a + 1..n {
                let v = (d.get(a, b) + rng.random_range(-eta..=eta)).max(0.0);
                data[a * n + b] = v;
                data[b * n + a] = v;
            }
        }
        let e = DissimilarityMatrix::from_dense(n, data, 0, 0).unwrap();
        let p = rips_persistence(&d, 1, f64::INFINITY).unwrap().diagram;
        let q = rips_persistence(&e, 1, f64::INFINITY).unwrap().diagram;
        for dim in 0..=1 {
            let dist = bottleneck(&dim_bars(&p, dim), &dim_bars(&q, dim));
            assert!(dist <= eta + 1e-12, "dim {dim}: bottleneck {dist}");
        }
    }
}

#[test]
fn bottleneck_matcher_sanity() {
    let a = [(0.0, 1.0), (0.2, 0.3)];
    let b = [(0.0, 1.1)];
    // (0.2, 0.3) goes to the diagonal at cost 0.05; the long bars pair at 0.1
    assert!((bottleneck(&a, &b) - 0.1).abs() < 1e-15);
    assert_eq!(bottleneck(&[], &[]), 0.0);
    assert_eq!(bottleneck(&[(0.0, f64::INFINITY)], &[(0.5, f64::INFINITY)]), 0.5);
}

#[test]
fn all_components_alive_at_zero() {
    let mut rng = seed::rng(55);
    let d = uniform_matrix(&mut rng, 17);
    let tiny = rips_persistence(&d, 1, 0.0).unwrap().diagram;
    assert_eq!(tiny.dim(0).filter(|p| p.is_infinite()).count(), 17);
    let full = rips_persistence(&d, 1, f64::INFINITY).unwrap().diagram;
    assert_eq!(full.dim(0).filter(|p| p.is_infinite()).count(), 1);
    assert_eq!(full.dim(0).count(), 17);
}

#[test]
fn bars_start_at_simplex_values() {
    let mut rng = seed::rng(56);
    let d = uniform_matrix(&mut rng, 15);
    let mut values: Vec<f64> = d.as_slice().to_vec();
    values.push(0.0);
    let diag = rips_persistence(&d, 2, f64::INFINITY).unwrap().diagram;
    for p in &diag.pairs {
        assert!(p.birth < p.death);
        assert!(values.contains(&p.birth));
        assert!(p.is_infinite() || values.contains(&p.death));
    }
}

proptest! {
    #[test]
    fn reductions_agree_on_small_filtrations(
        entries in proptest::collection::vec(1u8..8, 28),
        r in 1u8..9,
    ) {
        let n = 8;
        let mut data = vec![0.0; n * n];
        let mut it = entries.into_iter();
        for a in 0..n {
            for b in a + 1..n {
                let v = f64::from(it.next().unwrap());
                data[a * n + b] = v;
                data[b * n + a] = v;
            }
        }
        let d = DissimilarityMatrix::from_dense(n, data, 0, 0).unwrap();
        let f = build_vr_filtration(&d, 2, f64::from(r)).unwrap();
        prop_assume!(f.len() <= 300);
        let twist = bars(&compute_persistence(&f));
        prop_assert_eq!(&twist, &bars(&compute_persistence_standard(&f)));
        prop_assert_eq!(&twist, &bars(&rips_persistence(&d, 2, f64::from(r)).unwrap().diagram));
    }
}
