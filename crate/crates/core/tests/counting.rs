use nls_qi::counting::{census_e, census_s, enumerate_e, enumerate_s, sup_e, Adjacency, CountingQuery, Region};
use nls_qi::stats::log_log_slope;
use nls_qi::{Dyadic, LatticeIndex};
use proptest::prelude::*;

fn d(n: u32) -> Dyadic {
    Dyadic::new(n).unwrap()
}

fn query(m: LatticeIndex, kappa: i64, shells: [u32; 3], signs: [i8; 3]) -> CountingQuery {
    CountingQuery::new(m, kappa, shells.map(d), signs)
}

fn small_dyadic() -> impl Strategy<Value = u32> {
    prop::sample::select(vec![1u32, 2, 4])
}

fn sign() -> impl Strategy<Value = i8> {
    prop::sample::select(vec![1i8, -1])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn counts_are_symmetric_under_relabeling(
        shells in prop::array::uniform3(small_dyadic()),
        signs in prop::array::uniform3(sign()),
        m in (-2i32..=2, -2i32..=2),
        kappa in -12i64..=12,
        perm in prop::sample::select(vec![[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]]),
    ) {
        let m = LatticeIndex::new(m.0, m.1);
        let base = enumerate_s(&query(m, kappa, shells, signs)).unwrap();
        let permuted = query(m, kappa, perm.map(|j| shells[j]), perm.map(|j| signs[j]));
        prop_assert_eq!(enumerate_s(&permuted).unwrap(), base);
    }

    #[test]
    fn widening_a_shell_to_a_ball_never_loses_solutions(
        shells in prop::array::uniform3(small_dyadic()),
        signs in prop::array::uniform3(sign()),
        kappa in -12i64..=12,
    ) {
        let mut q = query(LatticeIndex::new(1, 0), kappa, shells, signs);
        let shell = enumerate_s(&q).unwrap();
        q.region = Region::Ball;
        prop_assert!(enumerate_s(&q).unwrap() >= shell);
    }
}

/// Every solution of the linear constraint, counted by a triple loop.
fn linear_solutions(q: &CountingQuery) -> u64 {
    let pts: Vec<Vec<LatticeIndex>> = q
        .shells
        .iter()
        .map(|n| match q.region {
            Region::Shell => n.shell_points(),
            Region::Ball => LatticeIndex::ball(n.get()),
        })
        .collect();
    let s: Vec<i32> = q.signs.iter().map(|&x| x as i32).collect();
    let mut count = 0;
    for &a in &pts[0] {
        for &b in &pts[1] {
            for &c in &pts[2] {
                if s[0] * a + s[1] * b + s[2] * c == q.m {
                    count += 1;
                }
            }
        }
    }
    count
}

#[test]
fn census_partitions_the_linear_solutions() {
    for adjacency in [Adjacency::Cyclic, Adjacency::Linear] {
        for region in [Region::Shell, Region::Ball] {
            for (shells, signs) in [([2, 2, 2], [1, -1, 1]), ([4, 2, 1], [1, 1, -1]), ([4, 4, 2], [1, 1, 1])] {
                let mut q = query(LatticeIndex::new(1, 1), 0, shells, signs);
                q.region = region;
                q.adjacency = adjacency;
                let census = census_s(&q).unwrap();
                let kept: u64 = census.by_kappa.values().sum();
                assert_eq!(kept + census.excluded, census.total);
                assert_eq!(census.total, linear_solutions(&q), "{shells:?} {signs:?} {region:?}");
                for (&kappa, &count) in &census.by_kappa {
                    q.kappa = kappa;
                    assert_eq!(enumerate_s(&q).unwrap(), count);
                }
            }
        }
    }
}

#[test]
fn e_census_agrees_with_single_kappa_counts() {
    let shells: Vec<Dyadic> = [2, 4, 2, 1].map(d).to_vec();
    let census = census_e(&shells).unwrap();
    for kappa in -40..=40 {
        assert_eq!(enumerate_e(kappa, &shells).unwrap(), census.get(&kappa).copied().unwrap_or(0));
    }
    assert_eq!(sup_e(&shells).unwrap(), census.values().copied().max().unwrap());
}

#[test]
fn e_count_grows_slowly_in_the_large_shells() {
    let scales = [4u32, 8, 16];
    let sups: Vec<f64> = scales
        .iter()
        .map(|&n| sup_e(&[d(n), d(n), d(2), d(2)]).unwrap() as f64)
        .collect();
    let xs: Vec<f64> = scales.iter().map(|&n| n as f64).collect();
    let slope = log_log_slope(&xs, &sups);
    println!("E-count sups {sups:?}, slope {slope:.3}");
    assert!(slope <= 1.3, "slope {slope}");
}
