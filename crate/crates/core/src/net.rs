//! Arbitrary-density inputs: route over a sparse subset `Z` built from an
//! `ε₁`-net `R` and one bridge per pair of nearby net sites.

use serde::{Deserialize, Serialize};

use crate::error::{RouteError, SchemeError};
use crate::geom::{build_udg, Point, Site, UniformGrid};
use crate::router::RouteTrace;
use crate::scheme::BuildParams;
use crate::strategy::{build_connected, Envelope, Registry, Router, SchemeSummary};

pub const EPS1_DIVISOR: f64 = 103.0;

pub fn epsilon1(epsilon: f64) -> f64 {
    epsilon / EPS1_DIVISOR
}

fn site_grid(sites: &[Site], ids: impl IntoIterator<Item = usize>, cell: f64) -> UniformGrid {
    let mut grid = UniformGrid::new(cell);
    for id in ids {
        grid.insert(id, &sites[id].pos);
    }
    grid
}

/// Greedy net in id order: a site is admitted unless an admitted site lies
/// strictly closer than `eps1`.
pub fn build_net(sites: &[Site], eps1: f64) -> Vec<usize> {
    assert!(eps1 > 0.0, "net radius must be positive");
    let mut grid = UniformGrid::new(eps1);
    let mut net = Vec::new();
    for s in sites {
        let blocked = grid
            .candidates(&s.pos, eps1)
            .into_iter()
            .any(|r| sites[r].pos.dist(&s.pos) < eps1);
        if !blocked {
            grid.insert(s.id, &s.pos);
            net.push(s.id);
        }
    }
    net
}

/// Nearest net site of every site, ties toward the smaller id.
pub fn closest_net(sites: &[Site], net: &[usize], eps1: f64) -> Vec<usize> {
    let grid = site_grid(sites, net.iter().copied(), eps1);
    sites
        .iter()
        .map(|s| {
            grid.candidates(&s.pos, eps1)
                .into_iter()
                .map(|r| (sites[r].pos.dist(&s.pos), r))
                .filter(|&(d, _)| d <= eps1)
                .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
                .map(|(_, r)| r)
                .expect("net covers every site")
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bridge {
    pub s: usize,
    pub t: usize,
    pub p: usize,
    pub q: usize,
}

/// For every pair of net sites `s < t` with `|st| > 1` that has a bridge,
/// the lexicographically smallest `(p, q)` with `|sp| <= eps1`, `|pq| <= 1`
/// and `|qt| <= eps1`.
pub fn find_bridges(sites: &[Site], net: &[usize], eps1: f64) -> Vec<Bridge> {
    let reach = 1.0 + 2.0 * eps1;
    let net_grid = site_grid(sites, net.iter().copied(), reach);
    let all_grid = site_grid(sites, 0..sites.len(), eps1);
    let near = |c: usize| -> Vec<usize> {
        let mut v: Vec<usize> = all_grid
            .candidates(&sites[c].pos, eps1)
            .into_iter()
            .filter(|&x| sites[x].pos.dist(&sites[c].pos) <= eps1)
            .collect();
        v.sort_unstable();
        v
    };
    let mut bridges = Vec::new();
    for &s in net {
        let mut partners: Vec<usize> = net_grid
            .candidates(&sites[s].pos, reach)
            .into_iter()
            .filter(|&t| t > s)
            .filter(|&t| {
                let d = sites[s].pos.dist(&sites[t].pos);
                d > 1.0 && d <= reach
            })
            .collect();
        if partners.is_empty() {
            continue;
        }
        partners.sort_unstable();
        let ps = near(s);
        for t in partners {
            let qs = near(t);
            let found = ps.iter().find_map(|&p| {
                qs.iter()
                    .find(|&&q| sites[p].pos.dist(&sites[q].pos) <= 1.0)
                    .map(|&q| (p, q))
            });
            if let Some((p, q)) = found {
                bridges.push(Bridge { s, t, p, q });
            }
        }
    }
    bridges
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetSets {
    pub r: Vec<usize>,
    pub bridges: Vec<Bridge>,
    /// `R` plus all bridge endpoints, sorted.
    pub z: Vec<usize>,
}

pub fn build_net_sets(sites: &[Site], eps1: f64) -> NetSets {
    let r = build_net(sites, eps1);
    let bridges = find_bridges(sites, &r, eps1);
    let mut z: Vec<usize> = r
        .iter()
        .copied()
        .chain(bridges.iter().flat_map(|b| [b.p, b.q]))
        .collect();
    z.sort_unstable();
    z.dedup();
    NetSets { r, bridges, z }
}

impl NetSets {
    /// `R: ids...` followed by one `s t p q` line per bridge.
    pub fn dump(&self) -> String {
        let mut out = String::from("R:");
        for r in &self.r {
            out.push_str(&format!(" {r}"));
        }
        out.push('\n');
        for b in &self.bridges {
            out.push_str(&format!("{} {} {} {}\n", b.s, b.t, b.p, b.q));
        }
        out
    }
}

/// Routing over `S` through an inner scheme over `Z`.
#[derive(Debug)]
pub struct ExtendedScheme {
    pub epsilon: f64,
    pub epsilon1: f64,
    pub positions: Vec<Point>,
    pub net: NetSets,
    /// Inner site index of a nearest net site, per site of `S`.
    pub closest_net: Vec<usize>,
    /// Unit disk neighbors of every site, sorted.
    pub ud_neighbors: Vec<Vec<usize>>,
    pub inner: Box<dyn Router>,
}

#[derive(Serialize, Deserialize)]
struct ExtendedBody {
    epsilon: f64,
    epsilon1: f64,
    positions: Vec<Point>,
    net: NetSets,
    closest_net: Vec<usize>,
    ud_neighbors: Vec<Vec<usize>>,
    inner: Envelope,
}

/// Builds `Z` with `ε₁ = ε/103` and an inner scheme over `UD(Z)` with `ε₁`
/// as its stretch parameter.
pub fn build_extended_scheme(sites: &[Site], epsilon: f64, registry: &Registry) -> Result<ExtendedScheme, SchemeError> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(SchemeError::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let g = build_udg(sites)?;
    let eps1 = epsilon1(epsilon);
    let net = build_net_sets(sites, eps1);
    let inner_sites: Vec<Site> = net
        .z
        .iter()
        .enumerate()
        .map(|(i, &s)| Site {
            id: i,
            pos: sites[s].pos,
        })
        .collect();
    let inner = build_connected(&inner_sites, &BuildParams::new(eps1), registry)?;
    let closest_net = closest_net(sites, &net.r, eps1)
        .into_iter()
        .map(|r| net.z.binary_search(&r).expect("net sites lie in Z"))
        .collect();
    Ok(ExtendedScheme {
        epsilon,
        epsilon1: eps1,
        positions: sites.iter().map(|s| s.pos).collect(),
        ud_neighbors: (0..g.len())
            .map(|s| g.neighbors(s).iter().map(|&(t, _)| t).collect())
            .collect(),
        net,
        closest_net,
        inner,
    })
}

impl ExtendedScheme {
    pub fn closest_net_site(&self, s: usize) -> usize {
        self.net.z[self.closest_net[s]]
    }

    /// Direct hop when `t` is a neighbor; otherwise `s -> s'`, the inner
    /// route `s' -> t'` and `t' -> t`.
    pub fn route_extended(&self, s: usize, t: usize, step_limit: Option<usize>) -> Result<RouteTrace, RouteError> {
        let n = self.positions.len();
        for v in [s, t] {
            if v >= n {
                return Err(RouteError::UnknownSite(v));
            }
        }
        let mut trace = RouteTrace::start(s, t);
        trace.step_count = 1;
        if s == t {
            return Ok(trace);
        }
        let dist = |a: usize, b: usize| self.positions[a].dist(&self.positions[b]);
        if self.ud_neighbors[s].binary_search(&t).is_ok() {
            trace.hop(t, dist(s, t));
            return Ok(trace);
        }

        let inner = self
            .inner
            .route(self.closest_net[s], self.closest_net[t], step_limit)
            .map_err(|e| match e {
                RouteError::CrossComponent { .. } => RouteError::CrossComponent { s, t },
                other => other,
            })?
            .remap(&self.net.z);
        let (s1, t1) = (inner.source, inner.target);
        if s1 != s {
            trace.hop(s1, dist(s, s1));
            trace.step_count += 1;
        }
        for w in inner.path.windows(2) {
            trace.hop(w[1], dist(w[0], w[1]));
        }
        trace.step_count += inner.step_count;
        trace.max_header_bits = inner.max_header_bits;
        trace.max_stack_depth = inner.max_stack_depth;
        trace.phases = inner.phases;
        trace.stack_audit = inner.stack_audit;
        if t1 != t {
            trace.hop(t, dist(t1, t));
            trace.step_count += 1;
        }
        Ok(trace)
    }

    pub(crate) fn to_body(&self) -> Result<serde_json::Value, SchemeError> {
        Ok(serde_json::to_value(ExtendedBody {
            epsilon: self.epsilon,
            epsilon1: self.epsilon1,
            positions: self.positions.clone(),
            net: self.net.clone(),
            closest_net: self.closest_net.clone(),
            ud_neighbors: self.ud_neighbors.clone(),
            inner: self.inner.envelope()?,
        })?)
    }

    pub(crate) fn from_body(body: serde_json::Value, registry: &Registry) -> Result<Self, SchemeError> {
        let b: ExtendedBody = serde_json::from_value(body)?;
        Ok(Self {
            epsilon: b.epsilon,
            epsilon1: b.epsilon1,
            positions: b.positions,
            net: b.net,
            closest_net: b.closest_net,
            ud_neighbors: b.ud_neighbors,
            inner: registry.load(b.inner)?,
        })
    }

    pub(crate) fn summary(&self) -> SchemeSummary {
        let inner = self.inner.summary();
        let id_bits = crate::hierarchy::bits_for(self.positions.len() as u64);
        let max_degree = self.ud_neighbors.iter().map(Vec::len).max().unwrap_or(0) as u64;
        SchemeSummary {
            kind: "extended".into(),
            sites: self.positions.len(),
            diameter: inner.diameter,
            c: inner.c,
            pairs: inner.pairs,
            label_bits: id_bits + inner.label_bits,
            max_table_bits: inner.max_table_bits + inner.label_bits as u64 + max_degree * id_bits as u64,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tight_cluster_collapses_to_one_net_site() {
        let eps1 = 0.01;
        let sites: Vec<Site> = (0..8)
            .map(|i| Site::new(i, 0.001 * i as f64, 0.0005 * (i % 3) as f64))
            .collect();
        assert_eq!(build_net(&sites, eps1), vec![0]);
    }

    #[test]
    fn spacing_exactly_eps1_admits_all() {
        let eps1 = 0.25;
        let sites: Vec<Site> = (0..6).map(|i| Site::new(i, 0.25 * i as f64, 0.0)).collect();
        // 0.25 * i is exact in binary
        assert_eq!(build_net(&sites, eps1), (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn constructed_bridge_is_found() {
        let eps1 = 0.1;
        let sites = vec![
            Site::new(0, 0.0, 0.0),
            Site::new(1, 1.05, 0.0),
            Site::new(2, 0.05, 0.0),
            Site::new(3, 1.0, 0.0),
        ];
        let net = build_net(&sites, eps1);
        assert_eq!(net, vec![0, 1]);
        let b = find_bridges(&sites, &net, eps1);
        assert_eq!(b, vec![Bridge { s: 0, t: 1, p: 0, q: 3 }]);
        let sets = build_net_sets(&sites, eps1);
        assert_eq!(sets.z, vec![0, 1, 3]);
        assert_eq!(sets.dump(), "R: 0 1\n0 1 0 3\n");
    }

    #[test]
    fn adjacent_net_sites_need_no_bridge() {
        let sites = vec![Site::new(0, 0.0, 0.0), Site::new(1, 0.9, 0.0)];
        let net = build_net(&sites, 0.05);
        assert!(find_bridges(&sites, &net, 0.05).is_empty());
    }

    #[test]
    fn eps1_arithmetic() {
        assert_eq!(epsilon1(1.0), 1.0 / 103.0);
    }
}
