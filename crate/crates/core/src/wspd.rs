//! Well-separated pair decomposition over the hierarchy `H`, built by the
//! greedy pair-refinement recursion.

use serde::{Deserialize, Serialize};

use crate::error::WspdError;
use crate::geom::Site;
use crate::hierarchy::Hierarchy;

/// An unordered pair of hierarchy nodes with their representatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WspdPair {
    pub u: usize,
    pub v: usize,
    pub rep_u: usize,
    pub rep_v: usize,
}

/// A stored pair read in one direction: `(from, to)` is `(u, v)` unless
/// `reversed`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrientedPair {
    pub pair: usize,
    pub reversed: bool,
}

impl OrientedPair {
    pub fn from_node(&self, w: &Wspd) -> usize {
        let p = &w.pairs[self.pair];
        if self.reversed {
            p.v
        } else {
            p.u
        }
    }

    pub fn to_node(&self, w: &Wspd) -> usize {
        let p = &w.pairs[self.pair];
        if self.reversed {
            p.u
        } else {
            p.v
        }
    }

    pub fn to_rep(&self, w: &Wspd) -> usize {
        let p = &w.pairs[self.pair];
        if self.reversed {
            p.rep_u
        } else {
            p.rep_v
        }
    }
}

#[derive(Debug, Clone)]
pub struct Wspd {
    pairs: Vec<WspdPair>,
    c: f64,
    per_node_count: Vec<usize>,
}

/// Left side of the separation inequality, `(c+2) * max(|S_u|-1, |S_v|-1)`.
pub fn separation_lhs(size_u: usize, size_v: usize, c: f64) -> f64 {
    (c + 2.0) * (size_u.max(size_v) - 1) as f64
}

/// `(c+2) * max(|S_u|-1, |S_v|-1) <= |σ(u)σ(v)|`, evaluated as written.
pub fn well_separated(size_u: usize, size_v: usize, rep_distance: f64, c: f64) -> bool {
    separation_lhs(size_u, size_v, c) <= rep_distance
}

/// Separation test for two hierarchy nodes using their representatives.
pub fn is_well_separated(h: &Hierarchy, sites: &[Site], u: usize, v: usize, c: f64) -> bool {
    let d = sites[h.representative(u)].pos.dist(&sites[h.representative(v)].pos);
    well_separated(h.node(u).size, h.node(v).size, d, c)
}

/// Greedy construction starting from `(root, root)`:
///
/// * `(u, u)` with `|S_u| > 1` is replaced by its two self pairs and the cross pair;
/// * a separated `(u, v)` with `u != v` is emitted;
/// * otherwise the node with more sites (ties toward `u`) is replaced by its children.
///
/// Diagonal pairs `(s, s)` are never represented.
pub fn build_wspd(h: &Hierarchy, sites: &[Site], c: f64) -> Wspd {
    assert!(c >= 1.0, "separation parameter must be at least 1");
    let mut pairs = Vec::new();
    let mut per_node_count = vec![0; h.nodes().len()];
    let mut work = vec![(Hierarchy::ROOT, Hierarchy::ROOT)];
    while let Some((u, v)) = work.pop() {
        if u == v {
            if let Some([a, b]) = h.node(u).children {
                work.push((b, b));
                work.push((a, a));
                work.push((a, b));
            }
            continue;
        }
        if is_well_separated(h, sites, u, v, c) {
            per_node_count[u] += 1;
            per_node_count[v] += 1;
            pairs.push(WspdPair {
                u,
                v,
                rep_u: h.representative(u),
                rep_v: h.representative(v),
            });
            continue;
        }
        if h.node(u).size >= h.node(v).size {
            let [a, b] = h.node(u).children.expect("a non-separated pair has a non-leaf");
            work.push((b, v));
            work.push((a, v));
        } else {
            let [a, b] = h.node(v).children.expect("a non-separated pair has a non-leaf");
            work.push((u, b));
            work.push((u, a));
        }
    }
    Wspd {
        pairs,
        c,
        per_node_count,
    }
}

impl Wspd {
    pub fn pairs(&self) -> &[WspdPair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Number of stored pairs with `node` on either side.
    pub fn per_node_count(&self, node: usize) -> usize {
        self.per_node_count[node]
    }

    /// Both readings of every stored pair.
    pub fn oriented(&self) -> impl Iterator<Item = OrientedPair> + '_ {
        (0..self.pairs.len()).flat_map(|pair| {
            [false, true]
                .into_iter()
                .map(move |reversed| OrientedPair { pair, reversed })
        })
    }

    /// The unique pair with `s ∈ S_u` and `t ∈ S_v`, with the orientation in
    /// which it reads that way. Linear scan; meant for tests and audits.
    pub fn find_representing_pair(&self, h: &Hierarchy, s: usize, t: usize) -> Result<OrientedPair, WspdError> {
        if s == t {
            return Err(WspdError::Diagonal);
        }
        let mut found = None;
        let mut count = 0;
        for o in self.oriented() {
            if h.contains(o.from_node(self), s) && h.contains(o.to_node(self), t) {
                count += 1;
                found = Some(o);
            }
        }
        match (count, found) {
            (1, Some(o)) => Ok(o),
            (0, _) => Err(WspdError::NotRepresented { s, t }),
            _ => Err(WspdError::MultiplyRepresented { s, t, count }),
        }
    }

    /// One line per pair: `|S_u| |S_v| rep_u rep_v sep_lhs sep_rhs`.
    pub fn dump(&self, h: &Hierarchy, sites: &[Site]) -> String {
        let mut out = String::new();
        for p in &self.pairs {
            let (su, sv) = (h.node(p.u).size, h.node(p.v).size);
            let rhs = sites[p.rep_u].pos.dist(&sites[p.rep_v].pos);
            out.push_str(&format!(
                "{su} {sv} {} {} {} {rhs}\n",
                p.rep_u,
                p.rep_v,
                separation_lhs(su, sv, self.c)
            ));
        }
        out
    }
}

/// A violation found by [`audit_partition`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionWitness {
    pub s: usize,
    pub t: usize,
    pub count: usize,
}

/// Counts, for every ordered distinct `(s, t)`, how many oriented pairs
/// represent it, and returns every pair whose count is not exactly one.
pub fn audit_partition(w: &Wspd, h: &Hierarchy) -> Vec<PartitionWitness> {
    let n = h.len();
    let mut count = vec![0u32; n * n];
    for p in w.pairs() {
        for s in h.sites_of(p.u) {
            for t in h.sites_of(p.v) {
                count[s * n + t] += 1;
                count[t * n + s] += 1;
            }
        }
    }
    let mut bad = Vec::new();
    for s in 0..n {
        for t in 0..n {
            let k = count[s * n + t] as usize;
            if (s == t && k != 0) || (s != t && k != 1) {
                bad.push(PartitionWitness { s, t, count: k });
            }
        }
    }
    bad
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emst::build_emst;
    use crate::geom::build_udg;
    use crate::hierarchy::build_hierarchy;

    fn setup(sites: &[Site]) -> Hierarchy {
        build_hierarchy(build_emst(&build_udg(sites).unwrap()).unwrap())
    }

    #[test]
    fn separation_arithmetic() {
        assert!(well_separated(1, 1, 0.0, 5.0));
        assert!(well_separated(1, 1, 1e-9, 1e9));
        assert!(well_separated(3, 2, 6.0, 1.0));
        assert!(!well_separated(3, 2, 5.9, 1.0));
    }

    #[test]
    fn two_sites_give_one_singleton_pair() {
        let sites = [Site::new(0, 0.0, 0.0), Site::new(1, 1.0, 0.0)];
        let h = setup(&sites);
        let w = build_wspd(&h, &sites, 13.0);
        assert_eq!(w.len(), 1);
        let p = w.pairs()[0];
        assert_eq!((h.node(p.u).size, h.node(p.v).size), (1, 1));
        let a = w.find_representing_pair(&h, 0, 1).unwrap();
        let b = w.find_representing_pair(&h, 1, 0).unwrap();
        assert_eq!(a.pair, b.pair);
        assert_ne!(a.reversed, b.reversed);
        assert!(matches!(w.find_representing_pair(&h, 0, 0), Err(WspdError::Diagonal)));
    }

    #[test]
    fn huge_c_gives_all_singletons() {
        let sites: Vec<Site> = (0..12)
            .map(|i| Site::new(i, 0.7 * i as f64, 0.1 * (i % 3) as f64))
            .collect();
        let h = setup(&sites);
        let w = build_wspd(&h, &sites, 1000.0);
        assert_eq!(w.len(), 12 * 11 / 2);
        assert!(w.pairs().iter().all(|p| h.node(p.u).size == 1 && h.node(p.v).size == 1));
        assert!(audit_partition(&w, &h).is_empty());
    }

    #[test]
    fn small_c_on_chain_partitions_and_separates() {
        let sites: Vec<Site> = (0..40).map(|i| Site::new(i, i as f64, 0.0)).collect();
        let h = setup(&sites);
        let w = build_wspd(&h, &sites, 1.0);
        assert!(w.len() < 40 * 39 / 2, "coarse pairs expected");
        assert!(audit_partition(&w, &h).is_empty());
        for p in w.pairs() {
            assert!(is_well_separated(&h, &sites, p.u, p.v, 1.0));
        }
        let total: usize = (0..h.nodes().len()).map(|v| w.per_node_count(v)).sum();
        assert_eq!(total, 2 * w.len());
    }

    #[test]
    fn dump_format() {
        let sites = [Site::new(0, 0.0, 0.0), Site::new(1, 0.5, 0.0)];
        let h = setup(&sites);
        let w = build_wspd(&h, &sites, 13.0);
        let line = w.dump(&h, &sites);
        let fields: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(fields.len(), 6);
        assert_eq!(&fields[..2], &["1", "1"]);
        assert_eq!(fields[4], "0");
        assert_eq!(fields[5], "0.5");
    }
}
