//! Preprocessing: labels, local tables (tree neighbors with edge levels) and
//! global tables (WSPD pairs with middle sites) for every site.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::emst::build_emst;
use crate::error::SchemeError;
use crate::geom::{graph_diameter, shortest_paths, Point, Site, UnitDiskGraph};
use crate::hierarchy::{bits_for, build_hierarchy, Hierarchy, Interval, Label};
use crate::middle::middle_sites_from_tree;
use crate::wspd::{build_wspd, OrientedPair, Wspd};

pub const DEFAULT_ALPHA: f64 = 200.0;
/// Smallest separation parameter the middle-site bounds are stated for.
pub const MIN_C: f64 = 13.0;
pub const SCHEME_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeNeighbor {
    pub label: Label,
    pub level: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalTable {
    /// Spanning-tree neighbors in counterclockwise order.
    pub tree_neighbors: Vec<TreeNeighbor>,
    /// Labels of all unit disk neighbors, sorted.
    pub ud_neighbors: Vec<Label>,
    /// Depth of the site's leaf in the hierarchy.
    pub own_depth: u32,
}

impl LocalTable {
    pub fn is_ud_neighbor(&self, label: Label) -> bool {
        self.ud_neighbors.binary_search(&label).is_ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalEntry {
    pub target_interval: Interval,
    /// Present iff the pair's far representative is not a unit disk neighbor.
    pub middle_label: Option<Label>,
}

/// Everything the routing function may read at one site.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteTable {
    pub label: Label,
    pub local: LocalTable,
    /// Sorted by interval start; intervals at one site are disjoint.
    pub global: Vec<GlobalEntry>,
}

impl SiteTable {
    /// The stored pair whose far side contains `target`, if any.
    pub fn lookup(&self, target: Label) -> Option<&GlobalEntry> {
        let idx = self.global.partition_point(|e| e.target_interval.lo <= target);
        idx.checked_sub(1)
            .map(|i| &self.global[i])
            .filter(|e| e.target_interval.contains(target))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SizeStats {
    pub sites: usize,
    pub pairs: usize,
    pub height: u32,
    pub label_bits: u32,
    pub level_bits: u32,
    pub max_local_bits: u64,
    pub max_global_bits: u64,
    pub max_table_bits: u64,
    pub max_global_entries: usize,
    pub total_global_entries: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutingScheme {
    pub version: u32,
    pub c: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub diameter: f64,
    /// Site coordinates, used to measure routed distance; never read by the
    /// routing function.
    pub positions: Vec<Point>,
    /// Label of each site.
    pub labels: Vec<Label>,
    /// Site of each label, indexed by `label - 1`.
    pub site_by_label: Vec<usize>,
    /// Table of each site.
    pub tables: Vec<SiteTable>,
    pub stats: SizeStats,
}

impl RoutingScheme {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, site: usize) -> Label {
        self.labels[site]
    }

    /// Site named by `label`, if any.
    pub fn site_of(&self, label: Label) -> Option<usize> {
        let idx = (label.0 as usize).checked_sub(1)?;
        self.site_by_label.get(idx).copied()
    }

    pub fn table(&self, site: usize) -> &SiteTable {
        &self.tables[site]
    }

    pub fn to_json(&self) -> Result<String, SchemeError> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, SchemeError> {
        let scheme: RoutingScheme = serde_json::from_str(text)?;
        scheme.check_version()?;
        Ok(scheme)
    }

    pub(crate) fn check_version(&self) -> Result<(), SchemeError> {
        if self.version != SCHEME_FORMAT_VERSION {
            return Err(SchemeError::Format(format!(
                "unsupported scheme version {}",
                self.version
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildParams {
    pub epsilon: f64,
    pub c_override: Option<f64>,
    pub alpha: f64,
}

impl BuildParams {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            c_override: None,
            alpha: DEFAULT_ALPHA,
        }
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c_override = Some(c);
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }
}

/// `c = max(13, (α/ε) log2 D)`.
pub fn choose_c(epsilon: f64, diameter: f64, alpha: f64) -> Result<f64, SchemeError> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(SchemeError::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(SchemeError::InvalidParameter(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    if diameter.is_nan() || diameter < 2.0 {
        return Err(SchemeError::SmallDiameter { diameter });
    }
    Ok(f64::max(MIN_C, alpha / epsilon * diameter.log2()))
}

/// Distributes every oriented pair `(u, v)` to one site of `S_u`, round robin
/// over `S_u` in label order, so no site holds more than
/// `ceil(count(u) / |S_u|)` pairs of node `u`.
pub fn assign_pairs(w: &Wspd, h: &Hierarchy) -> Vec<Vec<OrientedPair>> {
    let mut next = vec![0usize; h.nodes().len()];
    let mut out = vec![Vec::new(); h.len()];
    for o in w.oriented() {
        let u = o.from_node(w);
        let node = h.node(u);
        let k = next[u] % node.size;
        next[u] += 1;
        let site = h.site_of_label(Label(node.interval.lo.0 + k as u32));
        out[site].push(o);
    }
    out
}

/// A finished scheme together with the intermediate structures, for audits.
#[derive(Debug, Clone)]
pub struct BuiltScheme {
    pub scheme: RoutingScheme,
    pub graph: UnitDiskGraph,
    pub hierarchy: Hierarchy,
    pub wspd: Wspd,
    /// Provenance of each global entry, parallel to `scheme.tables[s].global`.
    pub assignment: Vec<Vec<OrientedPair>>,
    /// Middle site of each global entry, parallel to `assignment`.
    pub middles: Vec<Vec<Option<usize>>>,
}

/// Full preprocessing pipeline for a connected point set.
pub fn build_scheme(sites: &[Site], params: &BuildParams) -> Result<BuiltScheme, SchemeError> {
    let graph = UnitDiskGraph::new(sites.to_vec())?;
    graph.require_connected()?;
    let hierarchy = build_hierarchy(build_emst(&graph)?);
    let diameter = graph_diameter(&graph);
    let c = match params.c_override {
        Some(c) if c >= MIN_C && c.is_finite() => c,
        Some(c) => {
            return Err(SchemeError::InvalidParameter(format!(
                "c override must be at least {MIN_C}, got {c}"
            )))
        }
        None => choose_c(params.epsilon, diameter, params.alpha)?,
    };
    let wspd = build_wspd(&hierarchy, sites, c);
    let assignment = assign_pairs(&wspd, &hierarchy);
    Ok(assemble(graph, hierarchy, wspd, assignment, params, c, diameter))
}

fn assemble(
    graph: UnitDiskGraph,
    hierarchy: Hierarchy,
    wspd: Wspd,
    assignment: Vec<Vec<OrientedPair>>,
    params: &BuildParams,
    c: f64,
    diameter: f64,
) -> BuiltScheme {
    let n = graph.len();
    let h = &hierarchy;

    let per_site: Vec<(SiteTable, Vec<OrientedPair>, Vec<Option<usize>>)> = (0..n)
        .into_par_iter()
        .map(|s| {
            let needs_middle = assignment[s].iter().any(|o| !graph.are_adjacent(s, o.to_rep(&wspd)));
            let middles_from_s = needs_middle.then(|| middle_sites_from_tree(&shortest_paths(&graph, s)).middle);

            let mut rows: Vec<(GlobalEntry, OrientedPair, Option<usize>)> = assignment[s]
                .iter()
                .map(|&o| {
                    let rep = o.to_rep(&wspd);
                    let middle = if graph.are_adjacent(s, rep) {
                        None
                    } else {
                        let m = middles_from_s.as_ref().expect("computed above")[rep];
                        Some(m.expect("connected graph reaches every site"))
                    };
                    let entry = GlobalEntry {
                        target_interval: h.interval(o.to_node(&wspd)),
                        middle_label: middle.map(|m| h.label(m)),
                    };
                    (entry, o, middle)
                })
                .collect();
            rows.sort_by_key(|(e, _, _)| e.target_interval.lo);

            let local = LocalTable {
                tree_neighbors: h
                    .emst()
                    .arcs(s)
                    .iter()
                    .map(|a| TreeNeighbor {
                        label: h.label(a.to),
                        level: h.edge_level(a.edge),
                    })
                    .collect(),
                ud_neighbors: {
                    let mut v: Vec<Label> = graph.neighbors(s).iter().map(|&(t, _)| h.label(t)).collect();
                    v.sort();
                    v
                },
                own_depth: h.site_depth(s),
            };
            let table = SiteTable {
                label: h.label(s),
                local,
                global: rows.iter().map(|r| r.0).collect(),
            };
            (
                table,
                rows.iter().map(|r| r.1).collect(),
                rows.iter().map(|r| r.2).collect(),
            )
        })
        .collect();

    let mut tables = Vec::with_capacity(n);
    let mut sorted_assignment = Vec::with_capacity(n);
    let mut middles = Vec::with_capacity(n);
    for (t, a, m) in per_site {
        tables.push(t);
        sorted_assignment.push(a);
        middles.push(m);
    }

    let stats = size_stats(&tables, h, wspd.len());
    let scheme = RoutingScheme {
        version: SCHEME_FORMAT_VERSION,
        c,
        epsilon: params.epsilon,
        alpha: params.alpha,
        diameter,
        positions: graph.sites().iter().map(|s| s.pos).collect(),
        labels: h.labels().to_vec(),
        site_by_label: (1..=n as u32).map(|l| h.site_of_label(Label(l))).collect(),
        tables,
        stats,
    };
    BuiltScheme {
        scheme,
        graph,
        hierarchy,
        wspd,
        assignment: sorted_assignment,
        middles,
    }
}

/// Measured sizes. Labels take `ceil(log2(n+1))` bits, levels
/// `ceil(log2(height+1))`, an interval two labels, and a global entry a
/// presence bit plus the optional middle label.
pub fn size_stats(tables: &[SiteTable], h: &Hierarchy, pairs: usize) -> SizeStats {
    let label_bits = bits_for(tables.len() as u64);
    let level_bits = h.level_bits();
    let (lb, vb) = (label_bits as u64, level_bits as u64);
    let mut stats = SizeStats {
        sites: tables.len(),
        pairs,
        height: h.height(),
        label_bits,
        level_bits,
        max_local_bits: 0,
        max_global_bits: 0,
        max_table_bits: 0,
        max_global_entries: 0,
        total_global_entries: 0,
    };
    for t in tables {
        let local = vb + t.local.tree_neighbors.len() as u64 * (lb + vb) + t.local.ud_neighbors.len() as u64 * lb;
        let global: u64 = t
            .global
            .iter()
            .map(|e| 2 * lb + 1 + if e.middle_label.is_some() { lb } else { 0 })
            .sum();
        stats.max_local_bits = stats.max_local_bits.max(local);
        stats.max_global_bits = stats.max_global_bits.max(global);
        stats.max_table_bits = stats.max_table_bits.max(lb + local + global);
        stats.max_global_entries = stats.max_global_entries.max(t.global.len());
        stats.total_global_entries += t.global.len();
    }
    stats
}
