//! The routing function and the driver that runs it hop by hop.
//!
//! [`step`] sees only the current site's table, the target label and the
//! header. It has no access to other sites or to coordinates; forwarding
//! decisions name the next site by label.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::RouteError;
use crate::geom::{DistanceMatrix, Point};
use crate::hierarchy::Label;
use crate::scheme::{RoutingScheme, SiteTable};

/// Per-packet state carried between invocations of the routing function.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Header {
    /// Targets to resume after intermediate targets, top last.
    pub stack: Vec<Label>,
    /// Level of the subtree currently being toured.
    pub level: Option<u32>,
    /// Directed tree edge the current tour started with.
    pub start_edge: Option<(Label, Label)>,
    pub prev_vertex: Option<Label>,
}

impl Header {
    pub fn is_local(&self) -> bool {
        self.start_edge.is_some()
    }

    fn clear_local(&mut self) {
        self.level = None;
        self.start_edge = None;
        self.prev_vertex = None;
    }

    fn validate(&self) -> Result<(), RouteError> {
        match (self.start_edge, self.level, self.prev_vertex) {
            (None, None, None) | (Some(_), Some(_), Some(_)) => Ok(()),
            (None, _, _) => Err(RouteError::MalformedHeader(
                "level or previous vertex set without a start edge".into(),
            )),
            (Some(_), _, _) => Err(RouteError::MalformedHeader(
                "start edge set without level and previous vertex".into(),
            )),
        }
    }

    /// Encoded size: the stack, plus a presence bit and payload for each of
    /// the three optional fields.
    pub fn bit_size(&self, label_bits: u32, level_bits: u32) -> u64 {
        let (lb, vb) = (label_bits as u64, level_bits as u64);
        let mut bits = 3 + self.stack.len() as u64 * lb;
        if self.level.is_some() {
            bits += vb;
        }
        if self.start_edge.is_some() {
            bits += 2 * lb;
        }
        if self.prev_vertex.is_some() {
            bits += lb;
        }
        bits
    }
}

/// Where the packet goes next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hop {
    Stay,
    Forward(Label),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub next: Hop,
    /// `None` exactly on final delivery.
    pub next_target: Option<Label>,
    pub header: Header,
}

/// One invocation of the routing function at the site owning `table`.
///
/// 1. Target reached: pop the next target, or deliver if the stack is empty.
/// 2. A stored pair covers the target: leave local search; forward directly
///    to a unit disk neighbor, otherwise push the target and aim for the
///    pair's middle site.
/// 3. Otherwise continue the Euler tour: start along the tree edge of level
///    `depth - 1`, or take the first edge of level at least the current one
///    clockwise after the edge we arrived on. Coming back to the start edge
///    means the subtree is exhausted, so the level drops by one and the tour
///    continues over the next larger subtree.
pub fn step(table: &SiteTable, target: Label, mut h: Header) -> Result<Step, RouteError> {
    h.validate()?;

    if table.label == target {
        h.clear_local();
        return Ok(match h.stack.pop() {
            None => Step {
                next: Hop::Stay,
                next_target: None,
                header: Header::default(),
            },
            Some(resume) => Step {
                next: Hop::Stay,
                next_target: Some(resume),
                header: h,
            },
        });
    }

    if let Some(entry) = table.lookup(target) {
        h.clear_local();
        if table.local.is_ud_neighbor(target) {
            return Ok(Step {
                next: Hop::Forward(target),
                next_target: Some(target),
                header: h,
            });
        }
        let middle = entry.middle_label.ok_or(RouteError::MissingMiddle {
            site: table.label,
            target,
        })?;
        h.stack.push(target);
        return Ok(Step {
            next: Hop::Stay,
            next_target: Some(middle),
            header: h,
        });
    }

    let neighbors = &table.local.tree_neighbors;
    let next = match (h.start_edge, h.level, h.prev_vertex) {
        (Some(start), Some(level), Some(prev)) => {
            let k = neighbors.len();
            let at = neighbors.iter().position(|nb| nb.label == prev).ok_or_else(|| {
                RouteError::MalformedHeader(format!(
                    "previous vertex {prev} is not a tree neighbor of {}",
                    table.label
                ))
            })?;
            let chosen = (1..=k)
                .map(|i| &neighbors[(at + k - i) % k])
                .find(|nb| nb.level >= level)
                .ok_or_else(|| {
                    RouteError::MalformedHeader(format!("no tree edge of level >= {level} at {}", table.label))
                })?;
            if (table.label, chosen.label) == start {
                let lower = level
                    .checked_sub(1)
                    .ok_or(RouteError::TourExhausted { site: table.label })?;
                h.level = Some(lower);
            }
            chosen.label
        }
        _ => {
            let level = table
                .local
                .own_depth
                .checked_sub(1)
                .ok_or(RouteError::TourExhausted { site: table.label })?;
            let first = neighbors
                .iter()
                .find(|nb| nb.level == level)
                .ok_or(RouteError::TourExhausted { site: table.label })?;
            h.level = Some(level);
            h.start_edge = Some((table.label, first.label));
            first.label
        }
    };
    h.prev_vertex = Some(table.label);
    Ok(Step {
        next: Hop::Forward(next),
        next_target: Some(target),
        header: h,
    })
}

/// Result of one routing-function call, with the next hop resolved to a site.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepResult {
    pub next_site: usize,
    pub next_target: Option<Label>,
    pub header: Header,
}

impl RoutingScheme {
    pub fn route_step(&self, s: usize, target: Label, h: Header) -> Result<StepResult, RouteError> {
        let table = self.tables.get(s).ok_or(RouteError::UnknownSite(s))?;
        if self.site_of(target).is_none() {
            return Err(RouteError::UnknownLabel(target));
        }
        let out = step(table, target, h)?;
        let next_site = match out.next {
            Hop::Stay => s,
            Hop::Forward(label) => self.site_of(label).ok_or(RouteError::UnknownLabel(label))?,
        };
        Ok(StepResult {
            next_site,
            next_target: out.next_target,
            header: out.header,
        })
    }

    /// `50 * n * (ceil(log_{8/5} D) + 2)`.
    pub fn default_step_limit(&self) -> usize {
        default_step_limit(self.len(), self.diameter)
    }
}

pub fn stack_capacity(diameter: f64) -> usize {
    let depth = if diameter > 1.0 {
        (diameter.ln() / 1.6f64.ln()).ceil() as usize
    } else {
        0
    };
    depth + 2
}

pub fn default_step_limit(n: usize, diameter: f64) -> usize {
    50 * n.max(1) * stack_capacity(diameter)
}

/// Distance covered by one local search, from the site where it started until
/// a stored pair covering the target was found.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalPhase {
    pub origin: usize,
    pub target: usize,
    pub distance: f64,
    pub hops: usize,
}

/// Push/pop bookkeeping: each pop must happen at the intermediate target of
/// the matching push and restore the stack to its state before that push.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StackAudit {
    pub pushes: usize,
    pub pops: usize,
    pub mismatches: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteTrace {
    pub source: usize,
    pub target: usize,
    pub path: Vec<usize>,
    pub distance: f64,
    /// Routing-function invocations, including stationary ones.
    pub step_count: usize,
    pub max_header_bits: u64,
    pub max_stack_depth: usize,
    pub phases: Vec<LocalPhase>,
    pub stack_audit: StackAudit,
}

impl RouteTrace {
    pub(crate) fn start(source: usize, target: usize) -> Self {
        Self {
            source,
            target,
            path: vec![source],
            distance: 0.0,
            step_count: 0,
            max_header_bits: 0,
            max_stack_depth: 0,
            phases: Vec::new(),
            stack_audit: StackAudit::default(),
        }
    }

    pub(crate) fn hop(&mut self, to: usize, length: f64) {
        self.path.push(to);
        self.distance += length;
    }

    /// Renames sites through `map`, for traces computed on a subnetwork.
    pub fn remap(mut self, map: &[usize]) -> Self {
        self.source = map[self.source];
        self.target = map[self.target];
        for v in &mut self.path {
            *v = map[*v];
        }
        for p in &mut self.phases {
            p.origin = map[p.origin];
            p.target = map[p.target];
        }
        self
    }
}

struct PushFrame {
    before: Vec<Label>,
    pushed: Label,
    intermediate: Label,
}

/// Runs the routing function from `s` until it reports delivery at `t`.
pub fn route(scheme: &RoutingScheme, s: usize, t: usize, step_limit: Option<usize>) -> Result<RouteTrace, RouteError> {
    let n = scheme.len();
    if s >= n {
        return Err(RouteError::UnknownSite(s));
    }
    if t >= n {
        return Err(RouteError::UnknownSite(t));
    }
    let limit = step_limit.unwrap_or_else(|| scheme.default_step_limit());
    let label_bits = scheme.stats.label_bits;
    let level_bits = scheme.stats.level_bits;
    let pos = |v: usize| -> Point { scheme.positions[v] };

    let mut trace = RouteTrace::start(s, t);
    let mut frames: Vec<PushFrame> = Vec::new();
    let mut current = s;
    let mut target = scheme.label(t);
    let mut header = Header::default();
    let mut phase: Option<LocalPhase> = None;

    loop {
        if trace.step_count >= limit {
            return Err(RouteError::StepLimit {
                limit,
                trace: Box::new(trace),
            });
        }
        let before = header.clone();
        let out = scheme.route_step(current, target, header)?;
        trace.step_count += 1;

        let here = scheme.label(current);
        match out.header.stack.len().cmp(&before.stack.len()) {
            std::cmp::Ordering::Greater => {
                trace.stack_audit.pushes += 1;
                frames.push(PushFrame {
                    before: before.stack.clone(),
                    pushed: *out.header.stack.last().expect("grew"),
                    intermediate: out.next_target.expect("push retargets"),
                });
            }
            std::cmp::Ordering::Less => {
                trace.stack_audit.pops += 1;
                let ok = frames.pop().is_some_and(|f| {
                    f.intermediate == here && f.before == out.header.stack && before.stack.last() == Some(&f.pushed)
                });
                if !ok {
                    trace.stack_audit.mismatches += 1;
                }
            }
            std::cmp::Ordering::Equal => {}
        }

        if out.header.is_local() && phase.is_none() {
            phase = Some(LocalPhase {
                origin: current,
                target: scheme.site_of(target).ok_or(RouteError::UnknownLabel(target))?,
                distance: 0.0,
                hops: 0,
            });
        }
        if out.next_site != current {
            let length = pos(current).dist(&pos(out.next_site));
            if length > 1.0 {
                return Err(RouteError::IllegalHop {
                    from: current,
                    to: out.next_site,
                });
            }
            if out.header.is_local() {
                if let Some(p) = phase.as_mut() {
                    p.distance += length;
                    p.hops += 1;
                }
            }
            trace.hop(out.next_site, length);
        }
        if !out.header.is_local() {
            if let Some(p) = phase.take() {
                trace.phases.push(p);
            }
        }

        trace.max_header_bits = trace.max_header_bits.max(out.header.bit_size(label_bits, level_bits));
        trace.max_stack_depth = trace.max_stack_depth.max(out.header.stack.len());
        current = out.next_site;
        header = out.header;
        match out.next_target {
            Some(next) => target = next,
            None => {
                if current != t {
                    return Err(RouteError::MalformedHeader(format!(
                        "delivered at site {current} instead of {t}"
                    )));
                }
                if let Some(p) = phase.take() {
                    trace.phases.push(p);
                }
                trace.stack_audit.mismatches += frames.len();
                return Ok(trace);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StretchRecord {
    pub src: usize,
    pub dst: usize,
    pub d_rho: f64,
    pub d_opt: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StretchSummary {
    pub pairs: usize,
    pub max_ratio: f64,
    pub mean_ratio: f64,
}

/// `d_rho / d`, with `0/0` read as 1.
pub fn stretch_ratio(d_rho: f64, d_opt: f64) -> f64 {
    if d_opt > 0.0 {
        d_rho / d_opt
    } else if d_rho == 0.0 {
        1.0
    } else {
        f64::INFINITY
    }
}

/// Routes every pair with `route_fn` and compares against `oracle`. Output
/// order follows `pairs`.
pub fn measure_stretch<F>(
    route_fn: F,
    oracle: &DistanceMatrix,
    pairs: &[(usize, usize)],
) -> Result<Vec<StretchRecord>, RouteError>
where
    F: Fn(usize, usize) -> Result<RouteTrace, RouteError> + Sync,
{
    pairs
        .par_iter()
        .map(|&(s, t)| {
            let trace = route_fn(s, t)?;
            let d_opt = oracle.get(s, t);
            Ok(StretchRecord {
                src: s,
                dst: t,
                d_rho: trace.distance,
                d_opt,
                ratio: stretch_ratio(trace.distance, d_opt),
            })
        })
        .collect()
}

pub fn summarize(records: &[StretchRecord]) -> StretchSummary {
    let max_ratio = records.iter().map(|r| r.ratio).fold(1.0, f64::max);
    let mean_ratio = if records.is_empty() {
        1.0
    } else {
        records.iter().map(|r| r.ratio).sum::<f64>() / records.len() as f64
    };
    StretchSummary {
        pairs: records.len(),
        max_ratio,
        mean_ratio,
    }
}
