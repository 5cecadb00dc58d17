//! Middle sites: the vertex of a shortest path that minimizes the larger of
//! its distances to the two endpoints.
//!
//! Along a path from `s` the objective `max(d(s,m), d(m,t))` is unimodal. Both
//! routines below return the minimizer closest to `s`.

use std::cmp::Ordering;

use crate::error::SchemeError;
use crate::geom::ShortestPathTree;
use crate::heap::LeftistHeap;

#[inline]
fn spread(dist: &[f64], m: usize, t: usize) -> f64 {
    f64::max(dist[m], dist[t] - dist[m])
}

/// Scans the tree path from the source to `target` and returns its first
/// vertex attaining the minimum of `max(d(s,m), d(m,target))`.
pub fn middle_site(spt: &ShortestPathTree, target: usize) -> Result<usize, SchemeError> {
    let path = spt.path_to(target).ok_or(SchemeError::Unreachable {
        from: spt.source,
        to: target,
    })?;
    let mut best = path[0];
    let mut best_value = spread(&spt.dist, best, target);
    for &m in &path[1..] {
        let value = spread(&spt.dist, m, target);
        if value < best_value {
            best = m;
            best_value = value;
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct HeapStats {
    pub inserts: usize,
    pub extracts: usize,
    pub melds: usize,
}

#[derive(Debug, Clone)]
pub struct MiddleSites {
    pub source: usize,
    /// Middle site per target; `None` for unreachable targets.
    pub middle: Vec<Option<usize>>,
    pub stats: HeapStats,
}

struct Candidate {
    dist: f64,
    site: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist
            .total_cmp(&other.dist)
            .then_with(|| other.site.cmp(&self.site))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Middle sites for every target of a shortest path tree in one postorder
/// pass with meldable max-heaps keyed by distance from the source.
///
/// At vertex `m` the heaps of its children are melded and `m` is inserted.
/// The heap then holds exactly the descendants still lacking a middle site.
/// Candidates are extracted farthest first while the parent of `m` is
/// strictly worse for them; those receive `m`. The first candidate for which
/// the parent is at least as good stops the extraction, as does every
/// remaining candidate (their set is a prefix in distance order).
pub fn middle_sites_from_tree(spt: &ShortestPathTree) -> MiddleSites {
    let n = spt.dist.len();
    let children = spt.children();
    let mut middle = vec![None; n];
    let mut heaps: Vec<Option<LeftistHeap<Candidate>>> = (0..n).map(|_| None).collect();
    let mut stats = HeapStats::default();

    let mut stack = vec![(spt.source, false)];
    while let Some((m, expanded)) = stack.pop() {
        if !expanded {
            stack.push((m, true));
            stack.extend(children[m].iter().rev().map(|&c| (c, false)));
            continue;
        }
        let mut heap = LeftistHeap::new();
        for &c in &children[m] {
            if let Some(h) = heaps[c].take() {
                if !h.is_empty() {
                    heap.meld(h);
                    stats.melds += 1;
                }
            }
        }
        heap.push(Candidate {
            dist: spt.dist[m],
            site: m,
        });
        stats.inserts += 1;

        match spt.parent[m] {
            None => {
                while let Some(c) = heap.pop() {
                    stats.extracts += 1;
                    middle[c.site] = Some(m);
                }
            }
            Some(up) => {
                while let Some(top) = heap.peek() {
                    let t = top.site;
                    if spread(&spt.dist, up, t) > spread(&spt.dist, m, t) {
                        heap.pop();
                        stats.extracts += 1;
                        middle[t] = Some(m);
                    } else {
                        break;
                    }
                }
                heaps[m] = Some(heap);
            }
        }
    }
    MiddleSites {
        source: spt.source,
        middle,
        stats,
    }
}

/// Runs Dijkstra from `s` and computes all of its middle sites.
pub fn compute_middle_sites_fast(g: &crate::geom::UnitDiskGraph, s: usize) -> MiddleSites {
    middle_sites_from_tree(&crate::geom::shortest_paths(g, s))
}
