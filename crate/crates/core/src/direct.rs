//! Next-hop tables for networks of diameter below 2, where the separation
//! parameter formula is undefined. Every site stores the first hop of a
//! shortest path to every other site, so routing is exact.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{RouteError, SchemeError};
use crate::geom::{graph_diameter, shortest_paths, Point, ShortestPathTree, Site, UnitDiskGraph};
use crate::hierarchy::bits_for;
use crate::router::{default_step_limit, RouteTrace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectScheme {
    pub diameter: f64,
    pub positions: Vec<Point>,
    /// `next_hop[s][t]`; equal to `s` on the diagonal.
    pub next_hop: Vec<Vec<u32>>,
}

fn first_hops(spt: &ShortestPathTree) -> Vec<u32> {
    let n = spt.dist.len();
    let mut hop = vec![u32::MAX; n];
    hop[spt.source] = spt.source as u32;
    // memoized walk toward the source
    for t in (0..n).filter(|&t| spt.is_reachable(t)) {
        let mut chain = Vec::new();
        let mut v = t;
        while hop[v] == u32::MAX {
            chain.push(v);
            match spt.parent[v] {
                Some(p) if p == spt.source => {
                    hop[v] = v as u32;
                    chain.pop();
                    break;
                }
                Some(p) => v = p,
                None => unreachable!("reachable vertex without parent"),
            }
        }
        let h = hop[v];
        for u in chain {
            hop[u] = h;
        }
    }
    hop
}

pub fn build_direct(sites: &[Site]) -> Result<DirectScheme, SchemeError> {
    let g = UnitDiskGraph::new(sites.to_vec())?;
    g.require_connected()?;
    let next_hop = (0..g.len())
        .into_par_iter()
        .map(|s| first_hops(&shortest_paths(&g, s)))
        .collect();
    Ok(DirectScheme {
        diameter: graph_diameter(&g),
        positions: g.sites().iter().map(|s| s.pos).collect(),
        next_hop,
    })
}

impl DirectScheme {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn label_bits(&self) -> u32 {
        bits_for(self.len() as u64)
    }

    pub fn max_table_bits(&self) -> u64 {
        self.len() as u64 * self.label_bits() as u64
    }

    pub fn route(&self, s: usize, t: usize, step_limit: Option<usize>) -> Result<RouteTrace, RouteError> {
        let n = self.len();
        for v in [s, t] {
            if v >= n {
                return Err(RouteError::UnknownSite(v));
            }
        }
        let limit = step_limit.unwrap_or_else(|| default_step_limit(n, self.diameter));
        let mut trace = RouteTrace::start(s, t);
        let mut current = s;
        loop {
            if trace.step_count >= limit {
                return Err(RouteError::StepLimit {
                    limit,
                    trace: Box::new(trace),
                });
            }
            trace.step_count += 1;
            if current == t {
                return Ok(trace);
            }
            let next = self.next_hop[current][t] as usize;
            if next >= n {
                return Err(RouteError::UnknownSite(next));
            }
            let length = self.positions[current].dist(&self.positions[next]);
            if length > 1.0 || next == current {
                return Err(RouteError::IllegalHop {
                    from: current,
                    to: next,
                });
            }
            trace.hop(next, length);
            current = next;
        }
    }
}
