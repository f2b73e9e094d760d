use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;
use slacktopo::observation::ObservationSeries;
use slacktopo::seed;
use slacktopo::slack::{
    dissimilarity_matrix, match_profile, match_profile_bruteforce, slack_distance, ProfileTable,
};

fn gaussian_series(rng: &mut impl Rng, n: usize, d: usize) -> ObservationSeries {
    let values = (0..n * d).map(|_| rng.sample(StandardNormal)).collect();
    ObservationSeries::new(values, d).unwrap()
}

#[test]
fn fast_profile_equals_bruteforce_on_gaussian_series() {
    let mut rng = seed::rng(20);
    for case in 0..200 {
        let n = rng.random_range(8..=40);
        let d = if case % 2 == 0 { 1 } else { 3 };
        let a = gaussian_series(&mut rng, n, d);
        let b = gaussian_series(&mut rng, n, d);
        assert_eq!(
            match_profile(&a, &b).unwrap(),
            match_profile_bruteforce(&a, &b).unwrap(),
            "case {case}, n = {n}, d = {d}"
        );
    }
}

#[test]
fn hand_checked_profile() {
    let a = ObservationSeries::scalar(vec![0.0, 1.0, 2.0, 3.0]).unwrap();
    let b = ObservationSeries::scalar(vec![10.0, 0.0, 1.0, 11.0]).unwrap();
    let p = match_profile(&a, &b).unwrap();
    assert_eq!(p.as_slice(), &[0.0, 0.0, 8.0, 10.0]);
    assert_eq!(slack_distance(&p, 2).unwrap(), 0.0);
    assert_eq!(slack_distance(&p, 0).unwrap(), 10.0);
    assert!(slack_distance(&p, 4).is_err());
}

#[test]
fn triangle_with_combined_slack() {
    let mut rng = seed::rng(21);
    let n = 30;
    let mut violations = 0;
    for _ in 0..100 {
        let y: Vec<_> = (0..3).map(|_| gaussian_series(&mut rng, n, 2)).collect();
        let p12 = match_profile(&y[0], &y[1]).unwrap();
        let p23 = match_profile(&y[1], &y[2]).unwrap();
        let p13 = match_profile(&y[0], &y[2]).unwrap();
        for s in 0..n {
            for s2 in 0..n - s {
                if s + s2 >= n {
                    continue;
                }
                let lhs = p13.eps(n - s - s2);
                let rhs = p12.eps(n - s) + p23.eps(n - s2);
                if lhs > rhs + 1e-12 {
                    violations += 1;
                }
            }
        }
    }
    assert_eq!(violations, 0);
}

#[test]
fn shifted_copy_is_absorbed_by_slack() {
    let mut rng = seed::rng(22);
    let n = 25;
    let base = gaussian_series(&mut rng, n + 6, 3);
    let window = |start: usize| {
        let rows: Vec<&[f64]> = (start..start + n).map(|i| base.row(i)).collect();
        ObservationSeries::from_rows(&rows).unwrap()
    };
    let a = window(0);
    for k in 1..=6 {
        let p = match_profile(&a, &window(k)).unwrap();
        assert_eq!(slack_distance(&p, k).unwrap(), 0.0, "shift {k}");
        assert!(slack_distance(&p, k - 1).unwrap() > 0.0, "shift {k}");
    }
}

#[test]
fn matrix_entries_match_pairwise_profiles() {
    let mut rng = seed::rng(23);
    let series: Vec<_> = (0..7).map(|_| gaussian_series(&mut rng, 12, 2)).collect();
    let table = ProfileTable::compute(&series).unwrap();
    for t in [0, 3, 11] {
        let m = dissimilarity_matrix(&series, t).unwrap();
        assert_eq!(m, table.matrix(t).unwrap());
        for a in 0..7 {
            assert_eq!(m.get(a, a), 0.0);
            for b in 0..7 {
                let expected = if a == b {
                    0.0
                } else {
                    slack_distance(&match_profile_bruteforce(&series[a], &series[b]).unwrap(), t).unwrap()
                };
                assert_eq!(m.get(a, b), expected);
            }
        }
    }
}

#[test]
fn bruteforce_refuses_long_series() {
    let a = ObservationSeries::scalar(vec![0.0; 201]).unwrap();
    assert!(match_profile_bruteforce(&a, &a).is_err());
    assert!(match_profile(&a, &a).is_ok());
}

fn series_strategy(
    max_len: usize,
    dim: usize,
    levels: i32,
) -> impl Strategy<Value = (ObservationSeries, ObservationSeries)> {
    (1..=max_len).prop_flat_map(move |n| {
        let v = proptest::collection::vec(-levels..=levels, n * dim);
        (v.clone(), v).prop_map(move |(a, b)| {
            let f =
                |v: Vec<i32>| ObservationSeries::new(v.into_iter().map(f64::from).collect(), dim).unwrap();
            (f(a), f(b))
        })
    })
}

proptest! {
    // Small integer grids make distance ties common.
    #[test]
    fn profile_matches_oracle_with_ties((a, b) in series_strategy(24, 1, 3)) {
        prop_assert_eq!(match_profile(&a, &b).unwrap(), match_profile_bruteforce(&a, &b).unwrap());
    }

    #[test]
    fn profile_matches_oracle_multivariate((a, b) in series_strategy(20, 3, 2)) {
        prop_assert_eq!(match_profile(&a, &b).unwrap(), match_profile_bruteforce(&a, &b).unwrap());
    }

    #[test]
    fn profile_is_monotone_and_symmetric((a, b) in series_strategy(30, 2, 4)) {
        let p = match_profile(&a, &b).unwrap();
        prop_assert!(p.as_slice().windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(&p, &match_profile(&b, &a).unwrap());
        prop_assert!(p.as_slice().iter().all(|e| *e >= 0.0));
    }

    #[test]
    fn self_profile_is_zero((a, _b) in series_strategy(30, 2, 4)) {
        prop_assert!(match_profile(&a, &a).unwrap().as_slice().iter().all(|e| *e == 0.0));
    }

    #[test]
    fn slack_distance_nonincreasing_in_t((a, b) in series_strategy(30, 1, 5)) {
        let p = match_profile(&a, &b).unwrap();
        let d: Vec<f64> = (0..p.len()).map(|t| slack_distance(&p, t).unwrap()).collect();
        prop_assert!(d.windows(2).all(|w| w[1] <= w[0]));
    }
}

#[test]
fn matrix_json_and_csv_round_trip_exactly() {
    let mut rng = seed::rng(24);
    let series: Vec<_> = (0..30).map(|_| gaussian_series(&mut rng, 20, 3)).collect();
    let m = dissimilarity_matrix(&series, 4).unwrap();
    let doc: slacktopo::slack::MatrixDocument = serde_json::from_str(&m.to_json("test", 1).unwrap()).unwrap();
    assert_eq!(doc.into_matrix().unwrap(), m);
    assert_eq!(
        slacktopo::slack::DissimilarityMatrix::from_csv(&m.to_csv())
            .unwrap()
            .as_slice(),
        m.as_slice()
    );
}
