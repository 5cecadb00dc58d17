//! Euclidean minimum spanning tree of a connected unit disk graph and the
//! balanced-edge search used to decompose it.

use serde::{Deserialize, Serialize};

use crate::error::GeomError;
use crate::geom::{Point, UnitDiskGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeArc {
    pub to: usize,
    pub edge: usize,
}

/// Spanning tree with neighbor lists in counterclockwise order around each site.
///
/// Edges are stored as `(u, v)` with `u < v`; an edge's id is its index in
/// [`Emst::edges`], which follows the order in which the greedy construction
/// accepted it (length, then smaller endpoint, then larger endpoint).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Emst {
    edges: Vec<(usize, usize)>,
    lengths: Vec<f64>,
    arcs: Vec<Vec<TreeArc>>,
}

struct DisjointSets {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

/// Greedy minimum spanning tree over the unit disk edges. When the graph is
/// connected this is a Euclidean minimum spanning tree of the sites.
pub fn build_emst(g: &UnitDiskGraph) -> Result<Emst, GeomError> {
    let n = g.len();
    let mut candidates: Vec<(f64, usize, usize)> = Vec::with_capacity(g.edge_count());
    for s in 0..n {
        for &(t, len) in g.neighbors(s) {
            if s < t {
                candidates.push((len, s, t));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut sets = DisjointSets::new(n);
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    let mut lengths = Vec::with_capacity(n.saturating_sub(1));
    for (len, s, t) in candidates {
        if sets.union(s, t) {
            edges.push((s, t));
            lengths.push(len);
            if edges.len() + 1 == n {
                break;
            }
        }
    }
    if edges.len() + 1 != n {
        let root = sets.find(0);
        let b = (1..n).find(|&v| sets.find(v) != root).unwrap_or(0);
        return Err(GeomError::Disconnected { a: 0, b });
    }

    let mut arcs = vec![Vec::new(); n];
    for (edge, &(u, v)) in edges.iter().enumerate() {
        arcs[u].push(TreeArc { to: v, edge });
        arcs[v].push(TreeArc { to: u, edge });
    }
    for (s, list) in arcs.iter_mut().enumerate() {
        let origin = g.pos(s);
        list.sort_by(|a, b| {
            angle(&origin, &g.pos(a.to))
                .total_cmp(&angle(&origin, &g.pos(b.to)))
                .then(a.to.cmp(&b.to))
        });
    }
    Ok(Emst { edges, lengths, arcs })
}

fn angle(origin: &Point, p: &Point) -> f64 {
    (p.y - origin.y).atan2(p.x - origin.x)
}

impl Emst {
    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> (usize, usize) {
        self.edges[id]
    }

    pub fn edge_length(&self, id: usize) -> f64 {
        self.lengths[id]
    }

    pub fn total_weight(&self) -> f64 {
        self.lengths.iter().sum()
    }

    /// Tree neighbors of `s`, counterclockwise by angle, ties by id.
    pub fn arcs(&self, s: usize) -> &[TreeArc] {
        &self.arcs[s]
    }

    pub fn degree(&self, s: usize) -> usize {
        self.arcs[s].len()
    }

    pub fn max_degree(&self) -> usize {
        self.arcs.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// An edge whose removal splits a subtree into two sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Split {
    pub edge: usize,
    /// Side sizes; `.0` holds the smaller endpoint of the edge.
    pub sides: (usize, usize),
}

impl Split {
    pub fn smaller_side(&self) -> usize {
        self.sides.0.min(self.sides.1)
    }
}

/// Scratch state for repeated subtree queries on one tree.
pub(crate) struct SubtreeScratch {
    mark: Vec<u32>,
    stamp: u32,
    parent: Vec<usize>,
    size: Vec<usize>,
    order: Vec<usize>,
}

impl SubtreeScratch {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            mark: vec![0; n],
            stamp: 0,
            parent: vec![usize::MAX; n],
            size: vec![0; n],
            order: Vec::new(),
        }
    }

    fn enter(&mut self, vertices: &[usize]) {
        self.stamp += 1;
        for &v in vertices {
            self.mark[v] = self.stamp;
        }
    }

    fn member(&self, v: usize) -> bool {
        self.mark[v] == self.stamp
    }
}

/// Most balanced edge of the subtree of `tree` spanned by `vertices`.
///
/// Among edges whose removal leaves two sides of at least
/// `ceil((|V|-1)/6)` sites each, returns the one maximizing the smaller side,
/// ties toward the smaller edge id. If no edge qualifies (only possible when
/// some degree exceeds 6), the most balanced edge overall is returned.
/// `vertices` must induce a connected subtree with at least two sites.
pub fn balanced_edge(tree: &Emst, vertices: &[usize]) -> Split {
    let mut scratch = SubtreeScratch::new(tree.len());
    balanced_edge_with(tree, vertices, &mut scratch)
}

pub(crate) fn balanced_edge_with(tree: &Emst, vertices: &[usize], scratch: &mut SubtreeScratch) -> Split {
    assert!(vertices.len() >= 2, "a split needs at least two sites");
    scratch.enter(vertices);
    let root = vertices[0];
    scratch.order.clear();
    scratch.parent[root] = usize::MAX;
    let mut stack = vec![root];
    while let Some(v) = stack.pop() {
        scratch.order.push(v);
        for arc in &tree.arcs[v] {
            if arc.to != scratch.parent[v] && scratch.member(arc.to) {
                scratch.parent[arc.to] = v;
                stack.push(arc.to);
            }
        }
    }
    debug_assert_eq!(scratch.order.len(), vertices.len(), "subtree not connected");

    let total = vertices.len();
    for &v in scratch.order.iter().rev() {
        let mut size = 1;
        for arc in &tree.arcs[v] {
            if scratch.member(arc.to) && scratch.parent[arc.to] == v {
                size += scratch.size[arc.to];
            }
        }
        scratch.size[v] = size;
    }

    let mut best: Option<Split> = None;
    for &v in &scratch.order[1..] {
        let p = scratch.parent[v];
        let edge = tree.arcs[v]
            .iter()
            .find(|a| a.to == p)
            .expect("parent is a tree neighbor")
            .edge;
        let below = scratch.size[v];
        let (u, _) = tree.edges[edge];
        let sides = if u == v {
            (below, total - below)
        } else {
            (total - below, below)
        };
        let candidate = Split { edge, sides };
        best = match best {
            None => Some(candidate),
            Some(b) => {
                let better = candidate.smaller_side() > b.smaller_side()
                    || (candidate.smaller_side() == b.smaller_side() && candidate.edge < b.edge);
                Some(if better { candidate } else { b })
            }
        };
    }
    best.expect("two or more sites have an edge")
}

/// Sites of `vertices` on the side of `split` holding `side_root`, once the
/// split edge is removed.
pub(crate) fn side_of(
    tree: &Emst,
    vertices: &[usize],
    split_edge: usize,
    side_root: usize,
    scratch: &mut SubtreeScratch,
) -> Vec<usize> {
    scratch.enter(vertices);
    let mut out = Vec::new();
    let mut stack = vec![(side_root, usize::MAX)];
    while let Some((v, from)) = stack.pop() {
        out.push(v);
        for arc in &tree.arcs[v] {
            if arc.to != from && arc.edge != split_edge && scratch.member(arc.to) {
                stack.push((arc.to, v));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{build_udg, Site};

    fn path(n: usize) -> Emst {
        let sites: Vec<Site> = (0..n).map(|i| Site::new(i, i as f64, 0.0)).collect();
        build_emst(&build_udg(&sites).unwrap()).unwrap()
    }

    #[test]
    fn triangle_keeps_two_shortest_edges() {
        // |01| = 0.6, |02| = 0.8, |12| = 1.0 (a 3-4-5 right triangle scaled by 0.2)
        let sites = [Site::new(0, 0.0, 0.0), Site::new(1, 0.6, 0.0), Site::new(2, 0.0, 0.8)];
        let t = build_emst(&build_udg(&sites).unwrap()).unwrap();
        assert_eq!(t.edges(), &[(0, 1), (0, 2)]);
        assert!((t.total_weight() - 1.4).abs() < 1e-12);
    }

    #[test]
    fn chain_is_its_own_tree() {
        let t = path(6);
        let mut e = t.edges().to_vec();
        e.sort();
        assert_eq!(e, vec![(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)]);
        assert_eq!(t.max_degree(), 2);
    }

    #[test]
    fn disconnected_input_is_rejected() {
        let sites = [Site::new(0, 0.0, 0.0), Site::new(1, 3.0, 0.0)];
        let err = build_emst(&build_udg(&sites).unwrap()).unwrap_err();
        assert_eq!(err, GeomError::Disconnected { a: 0, b: 1 });
    }

    #[test]
    fn neighbors_are_counterclockwise() {
        let sites = [
            Site::new(0, 0.0, 0.0),
            Site::new(1, 0.0, -0.5),
            Site::new(2, -0.5, 0.0),
            Site::new(3, 0.0, 0.5),
            Site::new(4, 0.5, 0.0),
        ];
        let t = build_emst(&build_udg(&sites).unwrap()).unwrap();
        let order: Vec<usize> = t.arcs(0).iter().map(|a| a.to).collect();
        // angles: 1 -> -pi/2, 4 -> 0, 3 -> pi/2, 2 -> pi
        assert_eq!(order, vec![1, 4, 3, 2]);
    }

    #[test]
    fn two_site_split() {
        let t = path(2);
        let s = balanced_edge(&t, &[0, 1]);
        assert_eq!(s.edge, 0);
        assert_eq!(s.sides, (1, 1));
    }

    fn sides_sorted(s: Split) -> (usize, usize) {
        (s.sides.0.min(s.sides.1), s.sides.0.max(s.sides.1))
    }

    #[test]
    fn path_of_seven_splits_three_four() {
        let t = path(7);
        let s = balanced_edge(&t, &(0..7).collect::<Vec<_>>());
        assert_eq!(sides_sorted(s), (3, 4));
    }

    #[test]
    fn path_of_thirteen_splits_six_seven() {
        let t = path(13);
        let s = balanced_edge(&t, &(0..13).collect::<Vec<_>>());
        assert_eq!(sides_sorted(s), (6, 7));
        assert!(s.smaller_side() >= 2);
    }

    #[test]
    fn split_matches_exhaustive_scan_on_paths() {
        // oracle: remove each edge in turn and count the side sizes directly
        for n in 2..20 {
            let t = path(n);
            let all: Vec<usize> = (0..n).collect();
            let got = balanced_edge(&t, &all);
            let mut best = (0, usize::MAX);
            for (id, &(u, v)) in t.edges().iter().enumerate() {
                let left = u.min(v) + 1;
                let m = left.min(n - left);
                if m > best.0 || (m == best.0 && id < best.1) {
                    best = (m, id);
                }
            }
            assert_eq!(got.edge, best.1, "n = {n}");
            assert!(got.smaller_side() >= (n - 1).div_ceil(6));
        }
    }

    #[test]
    fn side_of_collects_component() {
        let t = path(5);
        let all: Vec<usize> = (0..5).collect();
        let split = balanced_edge(&t, &all);
        let (u, v) = t.edge(split.edge);
        let mut scratch = SubtreeScratch::new(5);
        let mut left = side_of(&t, &all, split.edge, u, &mut scratch);
        let right = side_of(&t, &all, split.edge, v, &mut scratch);
        left.sort();
        assert_eq!(left.len(), split.sides.0);
        assert_eq!(right.len(), split.sides.1);
        assert!(left.contains(&u) && !left.contains(&v));
    }
}
