//! Invariant suites. Each suite counts the checks it made and keeps the first
//! few failures as human readable witnesses.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use diskroute_core::direct::build_direct;
use diskroute_core::error::{RouteError, SchemeError};
use diskroute_core::geom::{build_udg, shortest_paths, DistanceMatrix, Site, UnitDiskGraph};
use diskroute_core::hierarchy::Label;
use diskroute_core::middle::{middle_site, middle_sites_from_tree};
use diskroute_core::net::{build_extended_scheme, build_net_sets, epsilon1};
use diskroute_core::router::{route, RouteTrace};
use diskroute_core::scheme::{build_scheme, BuildParams, BuiltScheme};
use diskroute_core::strategy::{Registry, Router};
use diskroute_core::wspd::{audit_partition, is_well_separated, separation_lhs};

use crate::pairs::PairSpec;
use crate::HarnessError;

pub const MAX_WITNESSES: usize = 8;
const EXACT_TOL: f64 = 1e-9;
const LOCAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub checked: u64,
    pub failures: u64,
    pub witnesses: Vec<String>,
}

impl SuiteResult {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            checked: 0,
            failures: 0,
            witnesses: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }

    pub fn check(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures += 1;
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(witness());
            }
        }
    }

    fn absorb(&mut self, other: SuiteResult, prefix: &str) {
        self.checked += other.checked;
        self.failures += other.failures;
        for w in other.witnesses {
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(format!("{prefix}{w}"));
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }

    pub fn failed(&self) -> usize {
        self.suites.iter().filter(|s| !s.passed()).count()
    }

    pub fn suite(&self, name: &str) -> Option<&SuiteResult> {
        self.suites.iter().find(|s| s.name == name)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for s in &self.suites {
            if s.passed() {
                let _ = writeln!(out, "PASS {} ({} checks)", s.name, s.checked);
            } else {
                let _ = writeln!(out, "FAIL {} ({} of {} checks)", s.name, s.failures, s.checked);
                for w in &s.witnesses {
                    let _ = writeln!(out, "  {w}");
                }
            }
        }
        out
    }
}

/// WSPD pairs against the hierarchy, and the global tables against both:
/// every ordered distinct pair must be covered by exactly one stored entry,
/// reading the source side from the pair and the target side from the table.
pub fn partition_suite(built: &BuiltScheme) -> SuiteResult {
    let mut suite = SuiteResult::new("wspd-partition");
    let h = &built.hierarchy;
    let n = h.len();
    for w in audit_partition(&built.wspd, h) {
        suite.check(false, || {
            format!(
                "pair ({}, {}) represented {} times by the decomposition",
                w.s, w.t, w.count
            )
        });
    }
    let mut count = vec![0u32; n * n];
    for (x, entries) in built.scheme.tables.iter().enumerate() {
        for (i, entry) in entries.global.iter().enumerate() {
            let from = built.assignment[x][i].from_node(&built.wspd);
            suite.check(h.contains(from, x), || {
                format!("site {x} stores a pair of a node not containing it")
            });
            let iv = entry.target_interval;
            if iv.lo.0 < 1 || iv.hi.0 as usize > n || iv.lo > iv.hi {
                suite.check(false, || {
                    format!("site {x} entry {i} has interval [{}, {}] out of range", iv.lo, iv.hi)
                });
                continue;
            }
            for s in h.sites_of(from) {
                for l in iv.lo.0..=iv.hi.0 {
                    let t = h.site_of_label(Label(l));
                    count[s * n + t] += 1;
                }
            }
        }
    }
    for s in 0..n {
        for t in 0..n {
            let k = count[s * n + t];
            let want = u32::from(s != t);
            suite.check(k == want, || format!("tables cover ({s}, {t}) {k} times"));
        }
    }
    suite
}

pub fn separation_suite(built: &BuiltScheme, sites: &[Site]) -> SuiteResult {
    let mut suite = SuiteResult::new("separation");
    let h = &built.hierarchy;
    let c = built.wspd.c();
    for p in built.wspd.pairs() {
        suite.check(is_well_separated(h, sites, p.u, p.v, c), || {
            let d = sites[p.rep_u].pos.dist(&sites[p.rep_v].pos);
            format!(
                "pair of sizes {} and {}: (c+2)max(...) = {} > |σσ'| = {d}",
                h.node(p.u).size,
                h.node(p.v).size,
                separation_lhs(h.node(p.u).size, h.node(p.v).size, c)
            )
        });
    }
    suite
}

/// Pairs of sites closer than `c` must be represented by singleton pairs.
pub fn singleton_suite(built: &BuiltScheme, dist: &DistanceMatrix) -> SuiteResult {
    let mut suite = SuiteResult::new("singleton");
    let h = &built.hierarchy;
    let c = built.wspd.c();
    for p in built.wspd.pairs() {
        if h.node(p.u).size == 1 && h.node(p.v).size == 1 {
            continue;
        }
        for s in h.sites_of(p.u) {
            for t in h.sites_of(p.v) {
                let d = dist.get(s, t);
                suite.check(d >= c, || {
                    format!(
                        "d({s}, {t}) = {d} < c = {c} but represented by sizes {} and {}",
                        h.node(p.u).size,
                        h.node(p.v).size
                    )
                });
            }
        }
    }
    suite
}

/// Heap-based middle sites against the path scan, for every source.
pub fn middle_agreement_suite(g: &UnitDiskGraph) -> SuiteResult {
    let per_source: Vec<SuiteResult> = (0..g.len())
        .into_par_iter()
        .map(|s| {
            let mut suite = SuiteResult::new("middle-agreement");
            let spt = shortest_paths(g, s);
            let fast = middle_sites_from_tree(&spt);
            for t in 0..g.len() {
                let brute = middle_site(&spt, t).ok();
                suite.check(fast.middle[t] == brute, || {
                    format!(
                        "source {s} target {t}: heap gives {:?}, scan gives {brute:?}",
                        fast.middle[t]
                    )
                });
            }
            suite
        })
        .collect();
    let mut suite = SuiteResult::new("middle-agreement");
    for r in per_source {
        suite.absorb(r, "");
    }
    suite
}

/// For every stored middle site `m` at `r` and every `t` on the far side
/// with `d(r,t) >= c`: `d(r,m) + d(m,t) <= (1+2/c) d(r,t)` and both parts are
/// at most `5/8 d(r,t)`.
pub fn middle_bounds_suite(built: &BuiltScheme, dist: &DistanceMatrix) -> SuiteResult {
    let mut suite = SuiteResult::new("middle-bounds");
    let h = &built.hierarchy;
    let c = built.wspd.c();
    for (r, list) in built.middles.iter().enumerate() {
        for (i, m) in list.iter().enumerate() {
            let Some(m) = *m else { continue };
            let v = built.assignment[r][i].to_node(&built.wspd);
            for t in h.sites_of(v) {
                let d = dist.get(r, t);
                if d < c {
                    continue;
                }
                let (a, b) = (dist.get(r, m), dist.get(m, t));
                suite.check(a + b <= (1.0 + 2.0 / c) * d + EXACT_TOL, || {
                    format!(
                        "r={r} m={m} t={t}: d(r,m)+d(m,t) = {} > (1+2/c) d = {}",
                        a + b,
                        (1.0 + 2.0 / c) * d
                    )
                });
                suite.check(a.max(b) <= 0.625 * d + EXACT_TOL, || {
                    format!(
                        "r={r} m={m} t={t}: max(d(r,m), d(m,t)) = {} > 5/8 d = {}",
                        a.max(b),
                        0.625 * d
                    )
                });
            }
        }
    }
    suite
}

/// Hierarchy balance and tree degree.
pub fn balance_suites(built: &BuiltScheme) -> Vec<SuiteResult> {
    let h = &built.hierarchy;
    let mut degree = SuiteResult::new("emst-degree");
    let max_degree = h.emst().max_degree();
    degree.check(max_degree <= 6, || {
        format!("spanning tree has a site of degree {max_degree}")
    });
    let mut balance = SuiteResult::new("hierarchy-balance");
    for (id, node) in h.nodes().iter().enumerate() {
        if let Some([a, b]) = node.children {
            let need = (node.size - 1).div_ceil(6);
            let small = h.node(a).size.min(h.node(b).size);
            balance.check(small >= need, || {
                format!("node {id} of size {} split off only {small} < {need}", node.size)
            });
        }
    }
    vec![degree, balance]
}

fn route_all<F>(pairs: &[(usize, usize)], f: F) -> Vec<(usize, usize, Result<RouteTrace, RouteError>)>
where
    F: Fn(usize, usize) -> Result<RouteTrace, RouteError> + Sync,
{
    pairs.par_iter().map(|&(s, t)| (s, t, f(s, t))).collect()
}

fn path_checks(suite: &mut SuiteResult, g: &UnitDiskGraph, trace: &RouteTrace) {
    let mut sum = 0.0;
    for w in trace.path.windows(2) {
        suite.check(g.are_adjacent(w[0], w[1]), || {
            format!(
                "route {}->{} hops {} -> {} which are not adjacent",
                trace.source, trace.target, w[0], w[1]
            )
        });
        sum += g.pos(w[0]).dist(&g.pos(w[1]));
    }
    suite.check((sum - trace.distance).abs() <= EXACT_TOL, || {
        format!(
            "route {}->{} reports length {} but its path measures {sum}",
            trace.source, trace.target, trace.distance
        )
    });
}

/// Routes every pair on the compact scheme and checks delivery, stack
/// restoration, legality, exactness below `c`, local-search cost and stretch.
pub fn routing_suites(built: &BuiltScheme, dist: &DistanceMatrix, pairs: &[(usize, usize)]) -> Vec<SuiteResult> {
    let scheme = &built.scheme;
    let g = &built.graph;
    let c = scheme.c;
    let bound = 1.0 + scheme.alpha / c * scheme.diameter.max(1.0).log2();
    let mut delivery = SuiteResult::new("delivery");
    let mut stack = SuiteResult::new("stack-restoration");
    let mut legal = SuiteResult::new("step-legality");
    let mut exact = SuiteResult::new("exactness-below-c");
    let mut local = SuiteResult::new("local-routing-cost");
    let mut stretch = SuiteResult::new("stretch-bound");
    for (s, t, result) in route_all(pairs, |s, t| route(scheme, s, t, None)) {
        let trace = match result {
            Ok(trace) => trace,
            Err(e) => {
                delivery.check(false, || format!("route {s}->{t}: {e}"));
                continue;
            }
        };
        delivery.check(trace.path.last() == Some(&t), || {
            format!("route {s}->{t} ended at {:?}", trace.path.last())
        });
        let a = &trace.stack_audit;
        stack.check(a.mismatches == 0 && a.pushes == a.pops, || {
            format!(
                "route {s}->{t}: {} pushes, {} pops, {} mismatches",
                a.pushes, a.pops, a.mismatches
            )
        });
        path_checks(&mut legal, g, &trace);
        let d = dist.get(s, t);
        if d < c {
            exact.check((trace.distance - d).abs() <= EXACT_TOL, || {
                format!("route {s}->{t}: d = {d} < c but routed {}", trace.distance)
            });
        }
        for p in &trace.phases {
            let dp = dist.get(p.origin, p.target);
            local.check(p.distance <= 48.0 / c * dp + LOCAL_TOL, || {
                format!(
                    "route {s}->{t}: search from {} for {} walked {} > 48/c * {dp}",
                    p.origin, p.target, p.distance
                )
            });
        }
        let ratio = diskroute_core::router::stretch_ratio(trace.distance, d);
        stretch.check(ratio <= bound + EXACT_TOL, || {
            format!("route {s}->{t}: ratio {ratio} > 1 + (alpha/c) log2 D = {bound}")
        });
    }
    vec![delivery, stack, legal, exact, local, stretch]
}

/// All compact-scheme suites for a connected instance.
pub fn verify_built(
    built: &BuiltScheme,
    sites: &[Site],
    dist: &DistanceMatrix,
    pairs: &[(usize, usize)],
) -> Vec<SuiteResult> {
    let mut out = vec![
        partition_suite(built),
        separation_suite(built, sites),
        singleton_suite(built, dist),
        middle_agreement_suite(&built.graph),
        middle_bounds_suite(built, dist),
    ];
    out.extend(balance_suites(built));
    out.extend(routing_suites(built, dist, pairs));
    out
}

/// Exact routing with next-hop tables, for diameter below 2.
pub fn direct_suites(
    sites: &[Site],
    dist: &DistanceMatrix,
    pairs: &[(usize, usize)],
) -> Result<Vec<SuiteResult>, HarnessError> {
    let scheme = build_direct(sites)?;
    let g = build_udg(sites)?;
    let mut delivery = SuiteResult::new("delivery");
    let mut legal = SuiteResult::new("step-legality");
    let mut exact = SuiteResult::new("exactness-below-c");
    for (s, t, result) in route_all(pairs, |s, t| scheme.route(s, t, None)) {
        match result {
            Ok(trace) => {
                delivery.check(trace.path.last() == Some(&t), || format!("route {s}->{t} misdelivered"));
                path_checks(&mut legal, &g, &trace);
                let d = dist.get(s, t);
                exact.check((trace.distance - d).abs() <= EXACT_TOL, || {
                    format!("route {s}->{t}: d = {d}, routed {}", trace.distance)
                });
            }
            Err(e) => delivery.check(false, || format!("route {s}->{t}: {e}")),
        }
    }
    Ok(vec![delivery, legal, exact])
}

/// Net packing and covering, bridge validity and completeness, distance
/// preservation over `Z`, and end-to-end stretch of the extended scheme.
pub fn net_suites(
    sites: &[Site],
    dist: &DistanceMatrix,
    epsilon: f64,
    pairs: &[(usize, usize)],
    registry: &Registry,
) -> Result<Vec<SuiteResult>, HarnessError> {
    let eps1 = epsilon1(epsilon);
    let sets = build_net_sets(sites, eps1);
    let pos = |i: usize| sites[i].pos;

    let mut net = SuiteResult::new("net-packing-covering");
    for (i, &a) in sets.r.iter().enumerate() {
        for &b in &sets.r[i + 1..] {
            let d = pos(a).dist(&pos(b));
            net.check(d >= eps1, || format!("net sites {a} and {b} at distance {d} < {eps1}"));
        }
    }
    for s in sites {
        let covered = sets.r.iter().any(|&r| pos(r).dist(&s.pos) <= eps1);
        net.check(covered, || format!("site {} has no net site within {eps1}", s.id));
    }

    let mut bridges = SuiteResult::new("bridges");
    let mut bridged = std::collections::HashSet::new();
    for b in &sets.bridges {
        bridged.insert((b.s, b.t));
        let ok = pos(b.s).dist(&pos(b.t)) > 1.0
            && pos(b.s).dist(&pos(b.p)) <= eps1
            && pos(b.p).dist(&pos(b.q)) <= 1.0
            && pos(b.q).dist(&pos(b.t)) <= eps1;
        bridges.check(ok, || format!("bridge {b:?} violates the definition"));
    }
    let near = |c: usize| -> Vec<usize> { (0..sites.len()).filter(|&x| pos(x).dist(&pos(c)) <= eps1).collect() };
    for (i, &a) in sets.r.iter().enumerate() {
        for &b in &sets.r[i + 1..] {
            let d = pos(a).dist(&pos(b));
            if d <= 1.0 || d > 1.0 + 2.0 * eps1 || bridged.contains(&(a.min(b), a.max(b))) {
                continue;
            }
            let (ps, qs) = (near(a), near(b));
            let exists = ps.iter().any(|&p| qs.iter().any(|&q| pos(p).dist(&pos(q)) <= 1.0));
            bridges.check(!exists, || {
                format!("net sites {a} and {b} have a bridge but none was recorded")
            });
        }
    }

    let mut preserve = SuiteResult::new("net-distance");
    let z_sites: Vec<Site> = sets
        .z
        .iter()
        .enumerate()
        .map(|(i, &s)| Site { id: i, pos: pos(s) })
        .collect();
    let gz = build_udg(&z_sites)?;
    let r_in_z: Vec<usize> = sets
        .r
        .iter()
        .map(|r| sets.z.binary_search(r).expect("R within Z"))
        .collect();
    let rows: Vec<(usize, Vec<f64>)> = r_in_z
        .par_iter()
        .map(|&zi| (zi, shortest_paths(&gz, zi).dist))
        .collect();
    for (zi, dz) in rows {
        for &zj in &r_in_z {
            if zj == zi {
                continue;
            }
            let (a, b) = (sets.z[zi], sets.z[zj]);
            let d = dist.get(a, b);
            let lhs = dz[zj];
            let rhs = (1.0 + 12.0 * eps1) * d + 12.0 * eps1 + EXACT_TOL;
            preserve.check(lhs <= rhs, || {
                format!("net sites {a}, {b}: d_Z = {lhs} > {rhs} (d = {d})")
            });
        }
    }

    let mut stretch = SuiteResult::new("extended-stretch");
    let ext = build_extended_scheme(sites, epsilon, registry)?;
    for (s, t, result) in route_all(pairs, |s, t| ext.route(s, t, None)) {
        let d = dist.get(s, t);
        match result {
            Ok(trace) => {
                let ok = if d > 1.0 {
                    trace.distance <= (1.0 + epsilon) * d + EXACT_TOL
                } else {
                    (trace.distance - d).abs() <= EXACT_TOL
                };
                stretch.check(ok && trace.path.last() == Some(&t), || {
                    format!("route {s}->{t}: routed {} against d = {d}", trace.distance)
                });
            }
            Err(e) => stretch.check(false, || format!("route {s}->{t}: {e}")),
        }
    }
    Ok(vec![net, bridges, preserve, stretch])
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub params: BuildParams,
    pub pairs: PairSpec,
    pub seed: u64,
    /// Skip the net suites.
    pub skip_net: bool,
}

/// Runs every applicable suite on each connected component with at least
/// two sites and merges the results by suite name.
pub fn verify_instance(sites: &[Site], opts: &VerifyOptions) -> Result<VerifyReport, HarnessError> {
    let registry = Registry::standard();
    let g = build_udg(sites)?;
    let comp = g.components();
    let count = comp.iter().copied().max().map_or(0, |c| c + 1);
    let mut members = vec![Vec::new(); count];
    for (s, &c) in comp.iter().enumerate() {
        members[c].push(s);
    }
    let mut merged: BTreeMap<String, SuiteResult> = BTreeMap::new();
    let mut order: Vec<String> = Vec::new();
    for (ci, list) in members.iter().enumerate() {
        if list.len() < 2 {
            continue;
        }
        let local: Vec<Site> = list
            .iter()
            .enumerate()
            .map(|(i, &s)| Site {
                id: i,
                pos: sites[s].pos,
            })
            .collect();
        let lg = build_udg(&local)?;
        let dist = DistanceMatrix::new(&lg);
        let pairs = opts.pairs.select(&vec![0; local.len()], opts.seed);
        let mut results = match build_scheme(&local, &opts.params) {
            Ok(built) => verify_built(&built, &local, &dist, &pairs),
            Err(SchemeError::SmallDiameter { .. }) => direct_suites(&local, &dist, &pairs)?,
            Err(e) => return Err(e.into()),
        };
        if !opts.skip_net {
            results.extend(net_suites(&local, &dist, opts.params.epsilon, &pairs, &registry)?);
        }
        let prefix = if count > 1 {
            format!("component {ci}: ")
        } else {
            String::new()
        };
        for r in results {
            let name = r.name.clone();
            if !merged.contains_key(&name) {
                order.push(name.clone());
                merged.insert(name.clone(), SuiteResult::new(&name));
            }
            merged.get_mut(&name).expect("inserted").absorb(r, &prefix);
        }
    }
    Ok(VerifyReport {
        suites: order.into_iter().map(|n| merged.remove(&n).expect("present")).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize) -> Vec<Site> {
        (0..n).map(|i| Site::new(i, i as f64, 0.0)).collect()
    }

    #[test]
    fn witness_list_is_capped() {
        let mut s = SuiteResult::new("x");
        for i in 0..20 {
            s.check(i % 2 == 0, || format!("w{i}"));
        }
        assert_eq!((s.checked, s.failures, s.witnesses.len()), (20, 10, MAX_WITNESSES));
        assert!(!s.passed());
    }

    #[test]
    fn chain_of_thirty_passes_with_defaults() {
        let opts = VerifyOptions {
            params: BuildParams::new(1.0),
            pairs: PairSpec::All,
            seed: 0,
            skip_net: false,
        };
        let report = verify_instance(&chain(30), &opts).unwrap();
        assert!(report.passed(), "{}", report.render());
        assert!(report.suite("wspd-partition").is_some());
        assert!(report.suite("extended-stretch").is_some());
    }
}
