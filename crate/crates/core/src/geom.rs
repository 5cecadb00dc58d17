//! Planar sites, the unit disk graph over them, and shortest-path machinery.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::GeomError;

/// A point in the Euclidean plane. The unit of length is the disk radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Euclidean distance. Every edge-weight and adjacency decision in the
    /// crate goes through this one expression so that they agree bit for bit.
    #[inline]
    pub fn dist(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Site {
    pub id: usize,
    pub pos: Point,
}

impl Site {
    pub const fn new(id: usize, x: f64, y: f64) -> Self {
        Self {
            id,
            pos: Point::new(x, y),
        }
    }
}

/// Builds sites with ids `0..points.len()`.
pub fn sites_from_points(points: &[Point]) -> Vec<Site> {
    points.iter().enumerate().map(|(id, &pos)| Site { id, pos }).collect()
}

pub(crate) fn validate_sites(sites: &[Site]) -> Result<(), GeomError> {
    if sites.is_empty() {
        return Err(GeomError::Empty);
    }
    for (index, site) in sites.iter().enumerate() {
        if site.id != index {
            return Err(GeomError::NonContiguousIds { index, id: site.id });
        }
        if !site.pos.is_finite() {
            return Err(GeomError::NonFinite { id: site.id });
        }
    }
    Ok(())
}

/// Bucket grid with square cells, used for every neighborhood query.
#[derive(Debug, Clone)]
pub struct UniformGrid {
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
}

impl UniformGrid {
    pub fn new(cell: f64) -> Self {
        assert!(cell > 0.0 && cell.is_finite(), "grid cell must be positive");
        Self {
            cell,
            buckets: HashMap::new(),
        }
    }

    pub fn key(&self, p: &Point) -> (i64, i64) {
        ((p.x / self.cell).floor() as i64, (p.y / self.cell).floor() as i64)
    }

    pub fn insert(&mut self, id: usize, p: &Point) {
        let key = self.key(p);
        self.buckets.entry(key).or_default().push(id);
    }

    /// Ids stored in cells that may hold a point within `radius` of `p`.
    /// Callers filter by exact distance; order is unspecified.
    pub fn candidates(&self, p: &Point, radius: f64) -> Vec<usize> {
        let (cx, cy) = self.key(p);
        let reach = (radius / self.cell).ceil() as i64;
        let mut out = Vec::new();
        for gx in cx - reach..=cx + reach {
            for gy in cy - reach..=cy + reach {
                if let Some(ids) = self.buckets.get(&(gx, gy)) {
                    out.extend_from_slice(ids);
                }
            }
        }
        out
    }

    pub fn occupied(&self) -> impl Iterator<Item = (&(i64, i64), &Vec<usize>)> {
        self.buckets.iter()
    }
}

/// `UD(S)`: an edge between distinct sites at Euclidean distance at most one,
/// weighted by that distance.
#[derive(Debug, Clone)]
pub struct UnitDiskGraph {
    sites: Vec<Site>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

/// Builds the unit disk graph. Coincident sites are adjacent with weight zero.
pub fn build_udg(sites: &[Site]) -> Result<UnitDiskGraph, GeomError> {
    UnitDiskGraph::new(sites.to_vec())
}

impl UnitDiskGraph {
    pub fn new(sites: Vec<Site>) -> Result<Self, GeomError> {
        validate_sites(&sites)?;
        let mut grid = UniformGrid::new(1.0);
        for s in &sites {
            grid.insert(s.id, &s.pos);
        }
        let adjacency = sites
            .iter()
            .map(|s| {
                let mut nbrs: Vec<(usize, f64)> = grid
                    .candidates(&s.pos, 1.0)
                    .into_iter()
                    .filter(|&t| t != s.id)
                    .filter_map(|t| {
                        let d = s.pos.dist(&sites[t].pos);
                        (d <= 1.0).then_some((t, d))
                    })
                    .collect();
                nbrs.sort_by_key(|&(t, _)| t);
                nbrs
            })
            .collect();
        Ok(Self { sites, adjacency })
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn pos(&self, id: usize) -> Point {
        self.sites[id].pos
    }

    /// Neighbors of `id` sorted by neighbor id, with edge lengths.
    pub fn neighbors(&self, id: usize) -> &[(usize, f64)] {
        &self.adjacency[id]
    }

    pub fn are_adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search_by_key(&b, |&(t, _)| t).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Component index per site; components are numbered by their smallest site id.
    pub fn components(&self) -> Vec<usize> {
        let n = self.len();
        let mut comp = vec![usize::MAX; n];
        let mut next = 0;
        let mut stack = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            comp[start] = next;
            stack.push(start);
            while let Some(v) = stack.pop() {
                for &(w, _) in &self.adjacency[v] {
                    if comp[w] == usize::MAX {
                        comp[w] = next;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    pub fn is_connected(&self) -> bool {
        self.components().iter().all(|&c| c == 0)
    }

    /// Errors with a witness site from two different components.
    pub fn require_connected(&self) -> Result<(), GeomError> {
        let comp = self.components();
        match comp.iter().position(|&c| c != 0) {
            None => Ok(()),
            Some(b) => Err(GeomError::Disconnected { a: 0, b }),
        }
    }

    /// Induced unit disk graph on a subset of sites, reindexed `0..subset.len()`
    /// in the order given.
    pub fn induced(&self, subset: &[usize]) -> UnitDiskGraph {
        let sites: Vec<Site> = subset
            .iter()
            .enumerate()
            .map(|(id, &s)| Site {
                id,
                pos: self.sites[s].pos,
            })
            .collect();
        UnitDiskGraph::new(sites).expect("subset of valid sites is valid")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShortestPathTree {
    pub source: usize,
    pub dist: Vec<f64>,
    pub parent: Vec<Option<usize>>,
}

impl ShortestPathTree {
    pub fn is_reachable(&self, t: usize) -> bool {
        self.dist[t].is_finite()
    }

    /// Vertices of the tree path from the source to `t`, both ends included.
    pub fn path_to(&self, t: usize) -> Option<Vec<usize>> {
        if !self.is_reachable(t) {
            return None;
        }
        let mut path = vec![t];
        let mut v = t;
        while let Some(p) = self.parent[v] {
            path.push(p);
            v = p;
        }
        path.reverse();
        Some(path)
    }

    /// First hop from the source toward `t`.
    pub fn first_hop(&self, t: usize) -> Option<usize> {
        if t == self.source || !self.is_reachable(t) {
            return None;
        }
        let mut v = t;
        while let Some(p) = self.parent[v] {
            if p == self.source {
                return Some(v);
            }
            v = p;
        }
        None
    }

    /// Children lists of the tree, each sorted by id.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut children = vec![Vec::new(); self.parent.len()];
        for (v, p) in self.parent.iter().enumerate() {
            if let Some(p) = *p {
                children[p].push(v);
            }
        }
        children
    }
}

#[derive(PartialEq)]
struct QueueEntry {
    dist: f64,
    id: usize,
}

impl Eq for QueueEntry {}

impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (dist, id)
        other.dist.total_cmp(&self.dist).then_with(|| other.id.cmp(&self.id))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra from `source`. Ties in the queue are broken by site id, and a
/// parent is replaced only on strict improvement, so trees are reproducible.
pub fn shortest_paths(g: &UnitDiskGraph, source: usize) -> ShortestPathTree {
    let n = g.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut parent = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(QueueEntry { dist: 0.0, id: source });
    while let Some(QueueEntry { dist: d, id: v }) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        for &(w, len) in g.neighbors(v) {
            let nd = d + len;
            if nd < dist[w] {
                dist[w] = nd;
                parent[w] = Some(v);
                heap.push(QueueEntry { dist: nd, id: w });
            }
        }
    }
    ShortestPathTree { source, dist, parent }
}

/// Dense all-pairs distance matrix, one Dijkstra per source.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn new(g: &UnitDiskGraph) -> Self {
        let n = g.len();
        let rows: Vec<Vec<f64>> = (0..n).into_par_iter().map(|s| shortest_paths(g, s).dist).collect();
        Self {
            n,
            data: rows.into_iter().flatten().collect(),
        }
    }

    #[inline]
    pub fn get(&self, s: usize, t: usize) -> f64 {
        self.data[s * self.n + t]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

/// Shortest-path diameter of every connected component, indexed as in
/// [`UnitDiskGraph::components`].
pub fn component_diameters(g: &UnitDiskGraph) -> Vec<f64> {
    let comp = g.components();
    let ncomp = comp.iter().copied().max().map_or(0, |c| c + 1);
    let ecc: Vec<f64> = (0..g.len())
        .into_par_iter()
        .map(|s| {
            shortest_paths(g, s)
                .dist
                .into_iter()
                .filter(|d| d.is_finite())
                .fold(0.0, f64::max)
        })
        .collect();
    let mut diam = vec![0.0; ncomp];
    for (s, e) in ecc.into_iter().enumerate() {
        diam[comp[s]] = f64::max(diam[comp[s]], e);
    }
    diam
}

/// Largest component diameter; for a connected graph this is `D`.
pub fn graph_diameter(g: &UnitDiskGraph) -> f64 {
    component_diameters(g).into_iter().fold(0.0, f64::max)
}

/// Upper bound on the number of sites in any closed unit disk: the largest
/// site count over any 3x3 block of unit grid cells.
pub fn density_upper_bound(sites: &[Site]) -> usize {
    let mut counts: HashMap<(i64, i64), usize> = HashMap::new();
    for s in sites {
        let key = (s.pos.x.floor() as i64, s.pos.y.floor() as i64);
        *counts.entry(key).or_default() += 1;
    }
    let mut best = 0;
    for &(cx, cy) in counts.keys() {
        for bx in cx - 1..=cx + 1 {
            for by in cy - 1..=cy + 1 {
                let mut total = 0;
                for gx in bx - 1..=bx + 1 {
                    for gy in by - 1..=by + 1 {
                        total += counts.get(&(gx, gy)).copied().unwrap_or(0);
                    }
                }
                best = best.max(total);
            }
        }
    }
    best
}
