use dyncover_oracle::*;
use num_bigint::BigInt;
use num_rational::BigRational;

fn r(a: i64, b: i64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

#[test]
fn shortest_path_oracles_agree() {
    let edges = vec![(0, 1, 3), (1, 2, 1), (0, 2, 5), (2, 3, 2), (4, 5, 1)];
    let ap = all_pairs(6, &edges);
    for s in 0..6 {
        assert_eq!(dijkstra(6, &edges, s), bellman_ford(6, &edges, s));
        assert_eq!(dijkstra(6, &edges, s), ap[s]);
    }
    assert_eq!(ap[0][3], Some(6));
    assert_eq!(ap[0][4], None);
    assert_eq!(ball(6, &edges, 0, 4), vec![0, 1, 2]);
}

#[test]
fn expansion_of_small_graphs() {
    let k4: Vec<_> = (0..4).flat_map(|a| (a + 1..4).map(move |b| (a, b))).collect();
    assert_eq!(expansion(4, &k4).unwrap(), Some((4, 2)));
    let path = vec![(0, 1), (1, 2), (2, 3)];
    assert_eq!(expansion(4, &path).unwrap(), Some((1, 2)));
    assert_eq!(expansion(2, &[(0, 1)]).unwrap(), Some((1, 1)));
    assert_eq!(expansion(3, &[(0, 1)]).unwrap(), Some((0, 1)));
}

#[test]
fn lp_small() {
    // max x + y, x + 2y <= 4, 3x + y <= 6
    let res = lp_max(
        &[r(1, 1), r(1, 1)],
        &[vec![r(1, 1), r(2, 1)], vec![r(3, 1), r(1, 1)]],
        &[r(4, 1), r(6, 1)],
    )
    .unwrap();
    assert_eq!(res.value, r(14, 5));
    assert_eq!(res.x, vec![r(8, 5), r(6, 5)]);
}

#[test]
fn mcf_star_and_cycle() {
    // star centre 0, leaves 1..4, pairs between leaves: each path uses 2 edges
    let star = vec![(0, 1), (0, 2), (0, 3)];
    let v = frac_mcf(4, &star, &[(1, 2), (2, 3), (1, 3)], 1000).unwrap();
    assert_eq!(v, r(3, 2));
    assert_eq!(brute_multicut(4, &star, &[(1, 2), (2, 3), (1, 3)]).unwrap(), 2);
    // 4-cycle, one pair of opposite corners: two disjoint routes
    let c4 = vec![(0, 1), (1, 2), (2, 3), (3, 0)];
    assert_eq!(frac_mcf(4, &c4, &[(0, 2)], 1000).unwrap(), r(2, 1));
    assert_eq!(brute_multicut(4, &c4, &[(0, 2)]).unwrap(), 2);
}

#[test]
fn simple_path_count_on_k4() {
    let k4: Vec<_> = (0..4).flat_map(|a| (a + 1..4).map(move |b| (a, b))).collect();
    assert_eq!(simple_paths(4, &k4, 0, 3, 100).unwrap().len(), 5);
    assert!(simple_paths(4, &k4, 0, 3, 2).is_err());
}

#[test]
fn bounded_balls_match_bellman_ford() {
    let edges = [(0, 1, 2), (1, 2, 1), (2, 3, 3), (0, 3, 7), (3, 4, 1), (5, 6, 1)];
    let src = [0, 2, 4, 5];
    for r in 0..8 {
        let got = balls(7, &edges, &src, r);
        for (i, &s) in src.iter().enumerate() {
            assert_eq!(got[i], ball(7, &edges, s, r), "source {s} radius {r}");
        }
    }
}
