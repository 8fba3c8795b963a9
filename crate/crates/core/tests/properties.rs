use epibound::bounds::lower_bound;
use epibound::graph::{bfs_distances, extract_ball, tree_like_radius, Graph, SeedSet};
use epibound::oracle::exact_mean_bruteforce;
use proptest::prelude::*;

fn arb_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n).prop_flat_map(|n| {
        let pairs = prop::collection::vec((0..n, 0..n), 0..=2 * n);
        pairs.prop_map(move |raw| {
            let edges: Vec<_> = raw.into_iter().filter(|(u, v)| u != v).collect();
            Graph::from_edges(n, &edges).unwrap()
        })
    })
}

fn arb_graph_with_seeds(max_n: usize) -> impl Strategy<Value = (Graph, Vec<usize>)> {
    arb_graph(max_n).prop_flat_map(|g| {
        let n = g.n();
        (Just(g), prop::collection::vec(0..n, 1..=n.min(4)))
    })
}

proptest! {
    #[test]
    fn bfs_distances_respect_edges((g, ids) in arb_graph_with_seeds(30)) {
        let seeds = SeedSet::new(ids, g.n()).unwrap();
        let dist = bfs_distances(&g, &seeds);
        for &(u, v) in g.edges() {
            match (dist.get(u), dist.get(v)) {
                (Some(a), Some(b)) => prop_assert!(a.abs_diff(b) <= 1),
                (None, None) => {}
                _ => prop_assert!(false, "edge {u}-{v} crosses the reachable set"),
            }
        }
        for s in seeds.iter() {
            prop_assert_eq!(dist.get(s), Some(0));
        }
    }

    #[test]
    fn multi_seed_distance_is_min_over_seeds((g, ids) in arb_graph_with_seeds(30)) {
        let seeds = SeedSet::new(ids, g.n()).unwrap();
        let joint = bfs_distances(&g, &seeds);
        let singles: Vec<_> = seeds
            .iter()
            .map(|s| bfs_distances(&g, &SeedSet::single(s, g.n()).unwrap()))
            .collect();
        for v in 0..g.n() {
            let best = singles.iter().filter_map(|d| d.get(v)).min();
            prop_assert_eq!(joint.get(v), best);
        }
    }

    #[test]
    fn balls_are_nested(g in arb_graph(25), c in 0usize..25, r in 0usize..5) {
        let c = c % g.n();
        let inner = extract_ball(&g, c, r);
        let outer = extract_ball(&g, c, r + 1);
        for v in &inner.vertices {
            prop_assert!(outer.vertices.contains(v));
        }
        prop_assert!(inner.edges.len() <= outer.edges.len());
    }

    #[test]
    fn tree_radius_grows_when_edges_are_removed(
        g in arb_graph(20),
        c in 0usize..20,
        pick in any::<prop::sample::Index>(),
    ) {
        prop_assume!(g.m() > 0);
        let c = c % g.n();
        let e = pick.index(g.m());
        let before = tree_like_radius(&g, c, 20);
        let after = tree_like_radius(&g.without_edge(e), c, 20);
        prop_assert!(after >= before);
    }

    #[test]
    fn lower_bound_ignores_labels(
        (g, ids) in arb_graph_with_seeds(25),
        shuffle in any::<u64>(),
        beta in 0.01f64..0.99,
    ) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let n = g.n();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(shuffle));
        let seeds = SeedSet::new(ids.clone(), n).unwrap();
        let moved = SeedSet::new(ids.iter().map(|&s| perm[s]).collect(), n).unwrap();
        let a = lower_bound(&g, &seeds, beta).unwrap();
        let b = lower_bound(&g.relabel(&perm).unwrap(), &moved, beta).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn adding_edges_never_lowers_the_mean(
        (g, ids) in arb_graph_with_seeds(7),
        pick in any::<prop::sample::Index>(),
        beta in 0.05f64..0.95,
    ) {
        prop_assume!(g.m() > 0 && g.m() <= 16);
        let seeds = SeedSet::new(ids, g.n()).unwrap();
        let sub = g.without_edge(pick.index(g.m()));
        let full_exact = exact_mean_bruteforce(&g, &seeds, beta).unwrap();
        let sub_exact = exact_mean_bruteforce(&sub, &seeds, beta).unwrap();
        prop_assert!(sub_exact <= full_exact + 1e-12);
        let full_lb = lower_bound(&g, &seeds, beta).unwrap();
        let sub_lb = lower_bound(&sub, &seeds, beta).unwrap();
        prop_assert!(sub_lb <= full_lb + 1e-12);
        prop_assert!(full_lb <= full_exact + 1e-9);
    }
}
