//! Edge-polytope checks against independent oracles: unique solves on line
//! skeletons, brute-force bipartiteness, and relabeling invariance.

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use hprop::conditions::{classify, has_odd_cycle, line_inequalities, polytope_membership, polytope_rank, MembershipStatus, Verdict};
use hprop::graphon::incidence_matrix;
use hprop::rational::q;
use hprop::{Rational, SkeletonGraph, StepGraphon};

fn line_skeleton(k: usize) -> SkeletonGraph {
    let edges: Vec<(usize, usize)> = (1..k).map(|i| (i - 1, i)).collect();
    SkeletonGraph::new(k, &[k - 1], &edges)
}

/// Solves `Z α = x` for the line skeleton by hand: node 1 sees only the
/// first edge, node `i` sees edges `i−1` and `i`, and the loop column ends
/// the system. Columns: edges in path order, then the loop.
fn line_alpha(x: &[Rational]) -> Vec<Rational> {
    let k = x.len();
    let two = Rational::from_integer(2);
    let mut alpha = Vec::with_capacity(k);
    let mut carried = Rational::zero(); // α_{i−1}/2
    for i in 0..k - 1 {
        let a = &two * &(&x[i] - &carried);
        carried = &a / &two;
        alpha.push(a);
    }
    alpha.push(&x[k - 1] - &carried);
    alpha
}

fn oracle_status(alpha: &[Rational]) -> MembershipStatus {
    if alpha.iter().any(Rational::is_negative) {
        MembershipStatus::Outside
    } else if alpha.iter().any(Rational::is_zero) {
        MembershipStatus::Boundary
    } else {
        MembershipStatus::RelativeInterior
    }
}

fn random_simplex_point(rng: &mut StdRng, k: usize) -> Vec<Rational> {
    let raw: Vec<i64> = (0..k).map(|_| rng.random_range(1..=40)).collect();
    let total: i64 = raw.iter().sum();
    raw.into_iter().map(|r| q(r, total)).collect()
}

/// `x = Z α` for nonnegative integer weights with some forced zeros, so
/// boundary points show up often.
fn random_boundary_point(rng: &mut StdRng, k: usize) -> Vec<Rational> {
    let z = incidence_matrix(&line_skeleton(k));
    let mut w: Vec<i64> = (0..k).map(|_| rng.random_range(0..=6)).collect();
    let j = rng.random_range(0..k);
    w[j] = 0;
    if w.iter().all(|&v| v == 0) {
        w[(j + 1) % k] = 1;
    }
    let total: i64 = w.iter().sum();
    let alpha: Vec<Rational> = w.into_iter().map(|v| q(v, total)).collect();
    z.apply(&alpha)
}

#[test]
fn alternating_sums_match_lp_on_line_skeletons() {
    let mut rng = StdRng::seed_from_u64(44);
    let mut tally = [0usize; 3];
    for i in 0..1000 {
        let k = rng.random_range(2..=8);
        let x = if i % 3 == 0 { random_boundary_point(&mut rng, k) } else { random_simplex_point(&mut rng, k) };
        let z = incidence_matrix(&line_skeleton(k));
        let lp = polytope_membership(&z, &x).unwrap();
        let oracle = oracle_status(&line_alpha(&x));
        assert_eq!(lp.status, oracle, "x = {x:?}");
        let sums_positive = line_inequalities(&x).iter().all(Rational::is_positive);
        assert_eq!(sums_positive, lp.status == MembershipStatus::RelativeInterior, "x = {x:?}");
        if let Some(alpha) = &lp.certificate {
            assert_eq!(alpha, &line_alpha(&x));
        }
        tally[lp.status as usize] += 1;
    }
    assert!(tally.iter().all(|&c| c >= 50), "{tally:?}");
}

fn random_connected_skeleton(rng: &mut StdRng) -> SkeletonGraph {
    let k = rng.random_range(1..=8);
    let mut edges = Vec::new();
    for v in 1..k {
        edges.push((rng.random_range(0..v), v));
    }
    let extra = rng.random_range(0..=k);
    for _ in 0..extra {
        let a = rng.random_range(0..k);
        let b = rng.random_range(0..k);
        if a != b {
            edges.push((a, b));
        }
    }
    let loops: Vec<usize> = (0..k).filter(|_| rng.random_bool(0.15)).collect();
    // Keep a healthy share of bipartite skeletons.
    let loops = if rng.random_bool(0.5) { loops } else { vec![] };
    SkeletonGraph::new(k, &loops, &edges)
}

fn two_colorable(s: &SkeletonGraph) -> bool {
    let k = s.node_count();
    s.self_loops().next().is_none()
        && (0u32..1 << k).any(|mask| s.edges().all(|(a, b)| (mask >> a & 1) != (mask >> b & 1)))
}

#[test]
fn rank_is_full_exactly_with_an_odd_cycle() {
    let mut rng = StdRng::seed_from_u64(8);
    let mut odd = 0;
    for _ in 0..200 {
        let s = random_connected_skeleton(&mut rng);
        let k = s.node_count() as i64;
        let has_odd = !two_colorable(&s);
        assert_eq!(has_odd_cycle(&s).unwrap(), has_odd);
        let expected = if has_odd { k - 1 } else { k - 2 };
        assert_eq!(polytope_rank(&incidence_matrix(&s)), expected, "{s:?}");
        odd += has_odd as usize;
    }
    assert!((40..=160).contains(&odd), "{odd}");
}

#[test]
fn column_order_does_not_change_membership() {
    let mut rng = StdRng::seed_from_u64(21);
    for _ in 0..150 {
        let s = random_connected_skeleton(&mut rng);
        let z = incidence_matrix(&s);
        let x = random_simplex_point(&mut rng, s.node_count());
        let base = polytope_membership(&z, &x).unwrap();
        let mut perm: Vec<usize> = (0..z.column_count()).collect();
        perm.shuffle(&mut rng);
        let zp = z.permuted(&perm);
        let shuffled = polytope_membership(&zp, &x).unwrap();
        assert_eq!(base.status, shuffled.status);
        assert_eq!(base.margin, shuffled.margin);
        if let Some(alpha) = shuffled.certificate {
            assert_eq!(zp.apply(&alpha), x);
        }
    }
}

#[test]
fn relabeled_line_graphon_keeps_its_verdict() {
    // Four-block line with blocks listed in the order (u3, u1, u4, u2).
    let widths = [q(1, 4), q(1, 5), q(1, 4), q(3, 10)];
    let mut partition = vec![Rational::zero()];
    for w in &widths {
        let next = partition.last().unwrap() + w;
        partition.push(next);
    }
    let h = q(1, 2);
    let z = Rational::zero();
    let values = vec![
        vec![z.clone(), z.clone(), h.clone(), h.clone()],
        vec![z.clone(), z.clone(), z.clone(), h.clone()],
        vec![h.clone(), z.clone(), h.clone(), z.clone()],
        vec![h.clone(), h.clone(), z.clone(), z.clone()],
    ];
    let g = StepGraphon::new(partition, values).unwrap();
    let r = classify(&g).unwrap();
    assert_eq!(r.verdict, Verdict::HProperty);
    assert_eq!(r.line_order, Some(vec![1, 3, 0, 2]));
    assert_eq!(r.line_inequalities, Some(vec![q(1, 5), q(1, 10), q(3, 20), q(1, 10)]));
}

proptest! {
    #[test]
    fn certificates_reproduce_x(weights in proptest::collection::vec(1i64..30, 2..7), loops in any::<u8>()) {
        let k = weights.len();
        let total: i64 = weights.iter().sum();
        let x: Vec<Rational> = weights.iter().map(|&w| q(w, total)).collect();
        let edges: Vec<(usize, usize)> = (1..k).map(|i| (i - 1, i)).chain([(0, k - 1)]).collect();
        let loop_nodes: Vec<usize> = (0..k).filter(|i| loops >> i & 1 == 1).collect();
        let s = SkeletonGraph::new(k, &loop_nodes, &edges);
        let z = incidence_matrix(&s);
        let m = polytope_membership(&z, &x).unwrap();
        match m.certificate {
            Some(alpha) => {
                prop_assert!(alpha.iter().all(|a| !a.is_negative()));
                prop_assert_eq!(alpha.iter().sum::<Rational>(), Rational::one());
                prop_assert_eq!(z.apply(&alpha), x);
            }
            None => prop_assert_eq!(m.status, MembershipStatus::Outside),
        }
    }
}
