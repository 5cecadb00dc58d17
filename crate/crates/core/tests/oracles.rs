//! Library results against small, independent reference computations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use diskroute_core::emst::build_emst;
use diskroute_core::geom::{build_udg, graph_diameter, shortest_paths, DistanceMatrix, Point, Site};
use diskroute_core::middle::compute_middle_sites_fast;
use diskroute_core::router::route;
use diskroute_core::scheme::{build_scheme, BuildParams};

fn random_sites(n: usize, side: f64, seed: u64) -> Vec<Site> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| Site::new(i, rng.gen::<f64>() * side, rng.gen::<f64>() * side))
        .collect()
}

fn connected_sites(n: usize, side: f64, seed: u64) -> Vec<Site> {
    (seed..)
        .map(|s| random_sites(n, side, s))
        .find(|s| build_udg(s).unwrap().is_connected())
        .unwrap()
}

fn euclid(a: &Site, b: &Site) -> f64 {
    let (dx, dy) = (a.pos.x - b.pos.x, a.pos.y - b.pos.y);
    (dx * dx + dy * dy).sqrt()
}

/// All-pairs distances by relaxing every edge until nothing changes.
fn relaxation_oracle(sites: &[Site]) -> Vec<Vec<f64>> {
    let n = sites.len();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && euclid(&sites[a], &sites[b]) <= 1.0 {
                edges.push((a, b, euclid(&sites[a], &sites[b])));
            }
        }
    }
    (0..n)
        .map(|s| {
            let mut d = vec![f64::INFINITY; n];
            d[s] = 0.0;
            loop {
                let mut changed = false;
                for &(a, b, w) in &edges {
                    if d[a] + w < d[b] {
                        d[b] = d[a] + w;
                        changed = true;
                    }
                }
                if !changed {
                    break d;
                }
            }
        })
        .collect()
}

#[test]
fn dijkstra_matches_relaxation() {
    for seed in 0..12 {
        let sites = random_sites(10 + 3 * seed as usize, 3.0, seed);
        let g = build_udg(&sites).unwrap();
        let oracle = relaxation_oracle(&sites);
        for (s, row) in oracle.iter().enumerate() {
            let spt = shortest_paths(&g, s);
            for (t, &b) in row.iter().enumerate() {
                let a = spt.dist[t];
                assert!(a == b || (a - b).abs() <= 1e-12, "seed {seed} {s}->{t}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn diameter_matches_all_pairs_max() {
    for seed in 0..8 {
        let sites = connected_sites(20, 3.0, seed * 100);
        let oracle = relaxation_oracle(&sites);
        let want = oracle.iter().flatten().copied().fold(0.0, f64::max);
        let got = graph_diameter(&build_udg(&sites).unwrap());
        assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
    }
}

/// Prim's algorithm over the dense unit-disk adjacency.
fn prim_weight(sites: &[Site]) -> f64 {
    let n = sites.len();
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    best[0] = 0.0;
    let mut total = 0.0;
    for _ in 0..n {
        let u = (0..n)
            .filter(|&i| !in_tree[i])
            .min_by(|&a, &b| best[a].total_cmp(&best[b]))
            .unwrap();
        in_tree[u] = true;
        total += best[u];
        for v in 0..n {
            let d = euclid(&sites[u], &sites[v]);
            if !in_tree[v] && d <= 1.0 && d < best[v] {
                best[v] = d;
            }
        }
    }
    total
}

#[test]
fn spanning_tree_weight_matches_prim() {
    for seed in 0..10 {
        let sites = connected_sites(40 + 10 * seed as usize, 3.5, seed * 1000);
        let emst = build_emst(&build_udg(&sites).unwrap()).unwrap();
        assert_eq!(emst.edges().len(), sites.len() - 1);
        let want = prim_weight(&sites);
        assert!(
            (emst.total_weight() - want).abs() <= 1e-9,
            "{} vs {want}",
            emst.total_weight()
        );
        assert!((0..sites.len()).all(|s| emst.degree(s) <= 6));
    }
}

#[test]
fn wspd_covers_every_ordered_pair_once() {
    for (seed, c) in [(1, 13.0), (2, 20.0), (3, 13.0)] {
        let sites = (seed * 50..)
            .map(|k| {
                let mut rng = ChaCha8Rng::seed_from_u64(k);
                (0..150)
                    .map(|i| Site::new(i, rng.gen::<f64>() * 25.0, rng.gen::<f64>() * 1.5))
                    .collect::<Vec<_>>()
            })
            .find(|s| build_udg(s).unwrap().is_connected())
            .unwrap();
        let built = build_scheme(&sites, &BuildParams::new(1.0).with_c(c)).unwrap();
        assert!(built.wspd.pairs().iter().any(|p| built.hierarchy.node(p.u).size > 1));
        let h = &built.hierarchy;
        let n = sites.len();
        let mut count = vec![0u32; n * n];
        for p in built.wspd.pairs() {
            let (su, sv): (Vec<usize>, Vec<usize>) = (h.sites_of(p.u).collect(), h.sites_of(p.v).collect());
            for &s in &su {
                for &t in &sv {
                    count[s * n + t] += 1;
                    count[t * n + s] += 1;
                }
            }
            let lhs = (c + 2.0) * (su.len().max(sv.len()) - 1) as f64;
            let rep_of = |set: &[usize]| *set.iter().min_by_key(|&&s| h.label(s)).unwrap();
            let rep = euclid(&sites[rep_of(&su)], &sites[rep_of(&sv)]);
            assert!(
                lhs <= rep,
                "pair of sizes {} and {} is not separated",
                su.len(),
                sv.len()
            );
        }
        for s in 0..n {
            for t in 0..n {
                assert_eq!(count[s * n + t], u32::from(s != t), "pair ({s}, {t})");
            }
        }
    }
}

/// Walks the parent chain from `t` back to the source and keeps the vertex
/// nearest the source among those minimizing `max(d(s,m), d(m,t))`.
fn middle_by_walk(dist: &[f64], parent: &[Option<usize>], t: usize) -> usize {
    let mut path = vec![t];
    while let Some(p) = parent[*path.last().unwrap()] {
        path.push(p);
    }
    path.reverse();
    let value = |m: usize| dist[m].max(dist[t] - dist[m]);
    let mut best = path[0];
    for &m in &path {
        if value(m) < value(best) {
            best = m;
        }
    }
    best
}

#[test]
fn heap_middle_sites_match_path_walk() {
    for seed in 0..10 {
        let sites = connected_sites(100, 5.0, seed * 7);
        let g = build_udg(&sites).unwrap();
        for s in (0..100).step_by(7) {
            let spt = shortest_paths(&g, s);
            let fast = compute_middle_sites_fast(&g, s);
            for t in 0..100 {
                assert_eq!(
                    fast.middle[t],
                    Some(middle_by_walk(&spt.dist, &spt.parent, t)),
                    "{s}->{t}"
                );
            }
        }
    }
}

#[test]
fn chain_routes_are_exact_and_match_oracle() {
    let sites: Vec<Site> = (0..40).map(|i| Site::new(i, i as f64 * 0.9, 0.0)).collect();
    let built = build_scheme(&sites, &BuildParams::new(1.0)).unwrap();
    let dist = DistanceMatrix::new(&built.graph);
    for s in 0..40 {
        for t in 0..40 {
            if s != t {
                let trace = route(&built.scheme, s, t, None).unwrap();
                assert!((trace.distance - dist.get(s, t)).abs() <= 1e-9);
                assert!((trace.distance - 0.9 * (s as f64 - t as f64).abs()).abs() <= 1e-9);
            }
        }
    }
}

#[test]
fn closed_disk_boundary() {
    let at = |x: f64| {
        vec![
            Site {
                id: 0,
                pos: Point::new(0.0, 0.0),
            },
            Site {
                id: 1,
                pos: Point::new(x, 0.0),
            },
        ]
    };
    assert!(build_udg(&at(1.0)).unwrap().are_adjacent(0, 1));
    assert!(!build_udg(&at(1.0 + 1e-9)).unwrap().are_adjacent(0, 1));
}
