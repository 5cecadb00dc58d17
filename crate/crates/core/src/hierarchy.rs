//! Balanced hierarchical decomposition of the spanning tree, edge levels, and
//! the postorder interval labeling of its leaves.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::emst::{balanced_edge_with, side_of, Emst, SubtreeScratch};

/// Routing label of a site: its position `1..=n` in postorder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(pub u32);

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Inclusive label range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Interval {
    pub lo: Label,
    pub hi: Label,
}

impl Interval {
    pub fn contains(&self, label: Label) -> bool {
        self.lo <= label && label <= self.hi
    }

    pub fn len(&self) -> usize {
        (self.hi.0 - self.lo.0 + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyNode {
    pub interval: Interval,
    /// Tree edge removed at this node; `None` at leaves.
    pub associated_edge: Option<usize>,
    pub depth: u32,
    pub parent: Option<usize>,
    pub children: Option<[usize; 2]>,
    /// The site of a leaf.
    pub site: Option<usize>,
    pub size: usize,
}

impl HierarchyNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }
}

/// Binary decomposition tree `H` over the spanning tree. Node `0` is the root.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    emst: Emst,
    edge_level: Vec<u32>,
    nodes: Vec<HierarchyNode>,
    leaf_of: Vec<usize>,
    labels: Vec<Label>,
    site_of_label: Vec<usize>,
    height: u32,
}

/// Recursively removes balanced edges. Each edge's level is the depth of the
/// node that removed it. Labels and intervals are assigned before returning.
pub fn build_hierarchy(emst: Emst) -> Hierarchy {
    let n = emst.len();
    let placeholder = Interval {
        lo: Label(0),
        hi: Label(0),
    };
    let mut nodes = vec![HierarchyNode {
        interval: placeholder,
        associated_edge: None,
        depth: 0,
        parent: None,
        children: None,
        site: None,
        size: n,
    }];
    let mut edge_level = vec![u32::MAX; emst.edges().len()];
    let mut leaf_of = vec![usize::MAX; n];
    let mut scratch = SubtreeScratch::new(n);

    let mut work: Vec<(usize, Vec<usize>)> = vec![(0, (0..n).collect())];
    while let Some((node, vertices)) = work.pop() {
        if vertices.len() == 1 {
            nodes[node].site = Some(vertices[0]);
            leaf_of[vertices[0]] = node;
            continue;
        }
        let split = balanced_edge_with(&emst, &vertices, &mut scratch);
        let (u, v) = emst.edge(split.edge);
        let first = side_of(&emst, &vertices, split.edge, u, &mut scratch);
        let second = side_of(&emst, &vertices, split.edge, v, &mut scratch);
        debug_assert_eq!(first.len() + second.len(), vertices.len());

        let depth = nodes[node].depth;
        edge_level[split.edge] = depth;
        let mut ids = [0; 2];
        for (slot, side) in [&first, &second].into_iter().enumerate() {
            ids[slot] = nodes.len();
            nodes.push(HierarchyNode {
                interval: placeholder,
                associated_edge: None,
                depth: depth + 1,
                parent: Some(node),
                children: None,
                site: None,
                size: side.len(),
            });
        }
        nodes[node].associated_edge = Some(split.edge);
        nodes[node].children = Some(ids);
        // second pushed first so the first child is expanded first
        work.push((ids[1], second));
        work.push((ids[0], first));
    }

    let height = nodes.iter().map(|v| v.depth).max().unwrap_or(0);
    let mut h = Hierarchy {
        emst,
        edge_level,
        nodes,
        leaf_of,
        labels: vec![Label(0); n],
        site_of_label: vec![usize::MAX; n],
        height,
    };
    assign_labels(&mut h);
    h
}

/// Postorder pass over `H`: leaves are numbered `1..=n` in the order they are
/// met, and every node gets the interval of its leaves' labels, so that
/// `label(s) ∈ interval(u)` exactly when `s ∈ S_u`.
pub fn assign_labels(h: &mut Hierarchy) {
    let mut next = 1u32;
    let mut stack: Vec<(usize, bool)> = vec![(0, false)];
    while let Some((node, expanded)) = stack.pop() {
        match h.nodes[node].children {
            None => {
                let site = h.nodes[node].site.expect("leaf has a site");
                let label = Label(next);
                next += 1;
                h.labels[site] = label;
                h.site_of_label[(label.0 - 1) as usize] = site;
                h.nodes[node].interval = Interval { lo: label, hi: label };
            }
            Some([a, b]) if expanded => {
                h.nodes[node].interval = Interval {
                    lo: h.nodes[a].interval.lo,
                    hi: h.nodes[b].interval.hi,
                };
            }
            Some([a, b]) => {
                stack.push((node, true));
                stack.push((b, false));
                stack.push((a, false));
            }
        }
    }
}

impl Hierarchy {
    pub const ROOT: usize = 0;

    pub fn emst(&self) -> &Emst {
        &self.emst
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn nodes(&self) -> &[HierarchyNode] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &HierarchyNode {
        &self.nodes[id]
    }

    pub fn root(&self) -> &HierarchyNode {
        &self.nodes[Self::ROOT]
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn edge_level(&self, edge: usize) -> u32 {
        self.edge_level[edge]
    }

    pub fn edge_levels(&self) -> &[u32] {
        &self.edge_level
    }

    pub fn leaf_of(&self, site: usize) -> usize {
        self.leaf_of[site]
    }

    /// `δ(s)`: depth of the leaf holding `site`.
    pub fn site_depth(&self, site: usize) -> u32 {
        self.nodes[self.leaf_of[site]].depth
    }

    pub fn label(&self, site: usize) -> Label {
        self.labels[site]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn site_of_label(&self, label: Label) -> usize {
        self.site_of_label[(label.0 - 1) as usize]
    }

    pub fn interval(&self, node: usize) -> Interval {
        self.nodes[node].interval
    }

    pub fn contains(&self, node: usize, site: usize) -> bool {
        self.nodes[node].interval.contains(self.labels[site])
    }

    /// `σ(u)`: the minimum-label site of the node.
    pub fn representative(&self, node: usize) -> usize {
        self.site_of_label(self.nodes[node].interval.lo)
    }

    /// Sites of `S_u` in label order.
    pub fn sites_of(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        let iv = self.nodes[node].interval;
        (iv.lo.0..=iv.hi.0).map(move |l| self.site_of_label[(l - 1) as usize])
    }

    /// Nodes from the leaf of `site` up to the root.
    pub fn ancestors(&self, site: usize) -> impl Iterator<Item = usize> + '_ {
        std::iter::successors(Some(self.leaf_of[site]), move |&v| self.nodes[v].parent)
    }

    /// Bits needed for one label, `ceil(log2(n+1))`.
    pub fn label_bits(&self) -> u32 {
        bits_for(self.len() as u64)
    }

    /// Bits needed for one level or depth value, `ceil(log2(height+1))`.
    pub fn level_bits(&self) -> u32 {
        bits_for(self.height as u64).max(1)
    }

    /// One line per node in node order:
    /// `depth size interval_lo interval_hi edge_u edge_v`, with `-` for the
    /// edge of a leaf.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for v in &self.nodes {
            let edge = match v.associated_edge {
                Some(e) => {
                    let (a, b) = self.emst.edge(e);
                    format!("{a} {b}")
                }
                None => "- -".to_string(),
            };
            out.push_str(&format!(
                "{} {} {} {} {}\n",
                v.depth, v.size, v.interval.lo, v.interval.hi, edge
            ));
        }
        out
    }
}

/// `ceil(log2(x + 1))`, the width of an unsigned field holding values `0..=x`.
pub fn bits_for(x: u64) -> u32 {
    u64::BITS - x.leading_zeros()
}
