//! Scheme kinds behind one routing interface, and a registry that builds and
//! reloads them by name.
//!
//! Kinds: `compact` (the labeled table scheme), `direct` (next-hop tables for
//! diameter below 2), `extended` (net-based wrapper for dense inputs) and
//! `components` (one part per connected component).

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::direct::{build_direct, DirectScheme};
use crate::error::{RouteError, SchemeError};
use crate::geom::{build_udg, density_upper_bound, Site};
use crate::net::{build_extended_scheme, ExtendedScheme};
use crate::router::{route, RouteTrace};
use crate::scheme::{build_scheme, BuildParams, RoutingScheme};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSummary {
    pub kind: String,
    pub sites: usize,
    pub diameter: f64,
    /// Separation parameter, when the kind has one.
    pub c: Option<f64>,
    pub pairs: usize,
    pub label_bits: u32,
    pub max_table_bits: u64,
}

/// A serialized scheme tagged with its kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub kind: String,
    pub body: Value,
}

pub trait Router: Send + Sync + fmt::Debug {
    fn kind(&self) -> &'static str;
    fn len(&self) -> usize;
    fn route(&self, s: usize, t: usize, step_limit: Option<usize>) -> Result<RouteTrace, RouteError>;
    fn summary(&self) -> SchemeSummary;
    fn body(&self) -> Result<Value, SchemeError>;

    fn envelope(&self) -> Result<Envelope, SchemeError> {
        Ok(Envelope {
            kind: self.kind().to_string(),
            body: self.body()?,
        })
    }

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Router for RoutingScheme {
    fn kind(&self) -> &'static str {
        "compact"
    }

    fn len(&self) -> usize {
        RoutingScheme::len(self)
    }

    fn route(&self, s: usize, t: usize, step_limit: Option<usize>) -> Result<RouteTrace, RouteError> {
        route(self, s, t, step_limit)
    }

    fn summary(&self) -> SchemeSummary {
        SchemeSummary {
            kind: "compact".into(),
            sites: self.len(),
            diameter: self.diameter,
            c: Some(self.c),
            pairs: self.stats.pairs,
            label_bits: self.stats.label_bits,
            max_table_bits: self.stats.max_table_bits,
        }
    }

    fn body(&self) -> Result<Value, SchemeError> {
        Ok(serde_json::to_value(self)?)
    }
}

impl Router for DirectScheme {
    fn kind(&self) -> &'static str {
        "direct"
    }

    fn len(&self) -> usize {
        DirectScheme::len(self)
    }

    fn route(&self, s: usize, t: usize, step_limit: Option<usize>) -> Result<RouteTrace, RouteError> {
        DirectScheme::route(self, s, t, step_limit)
    }

    fn summary(&self) -> SchemeSummary {
        SchemeSummary {
            kind: "direct".into(),
            sites: self.len(),
            diameter: self.diameter,
            c: None,
            pairs: 0,
            label_bits: self.label_bits(),
            max_table_bits: self.max_table_bits(),
        }
    }

    fn body(&self) -> Result<Value, SchemeError> {
        Ok(serde_json::to_value(self)?)
    }
}

impl Router for ExtendedScheme {
    fn kind(&self) -> &'static str {
        "extended"
    }

    fn len(&self) -> usize {
        self.positions.len()
    }

    fn route(&self, s: usize, t: usize, step_limit: Option<usize>) -> Result<RouteTrace, RouteError> {
        self.route_extended(s, t, step_limit)
    }

    fn summary(&self) -> SchemeSummary {
        ExtendedScheme::summary(self)
    }

    fn body(&self) -> Result<Value, SchemeError> {
        self.to_body()
    }
}

/// One independent scheme per connected component.
#[derive(Debug)]
pub struct ComponentScheme {
    component_of: Vec<usize>,
    local_index: Vec<usize>,
    members: Vec<Vec<usize>>,
    parts: Vec<Box<dyn Router>>,
}

#[derive(Serialize, Deserialize)]
struct ComponentBody {
    members: Vec<Vec<usize>>,
    parts: Vec<Envelope>,
}

impl ComponentScheme {
    fn from_parts(members: Vec<Vec<usize>>, parts: Vec<Box<dyn Router>>) -> Result<Self, SchemeError> {
        let n: usize = members.iter().map(Vec::len).sum();
        let mut component_of = vec![usize::MAX; n];
        let mut local_index = vec![usize::MAX; n];
        for (c, list) in members.iter().enumerate() {
            if parts.get(c).map(|p| p.len()) != Some(list.len()) {
                return Err(SchemeError::Format(format!("component {c} size mismatch")));
            }
            for (i, &s) in list.iter().enumerate() {
                if s >= n || component_of[s] != usize::MAX {
                    return Err(SchemeError::Format(format!("site {s} listed twice or out of range")));
                }
                component_of[s] = c;
                local_index[s] = i;
            }
        }
        Ok(Self {
            component_of,
            local_index,
            members,
            parts,
        })
    }

    pub fn components(&self) -> usize {
        self.parts.len()
    }

    pub fn members(&self, component: usize) -> &[usize] {
        &self.members[component]
    }

    pub fn part(&self, component: usize) -> &dyn Router {
        self.parts[component].as_ref()
    }
}

impl Router for ComponentScheme {
    fn kind(&self) -> &'static str {
        "components"
    }

    fn len(&self) -> usize {
        self.component_of.len()
    }

    fn route(&self, s: usize, t: usize, step_limit: Option<usize>) -> Result<RouteTrace, RouteError> {
        let n = self.len();
        for v in [s, t] {
            if v >= n {
                return Err(RouteError::UnknownSite(v));
            }
        }
        let c = self.component_of[s];
        if self.component_of[t] != c {
            return Err(RouteError::CrossComponent { s, t });
        }
        Ok(self.parts[c]
            .route(self.local_index[s], self.local_index[t], step_limit)?
            .remap(&self.members[c]))
    }

    fn summary(&self) -> SchemeSummary {
        let parts: Vec<SchemeSummary> = self.parts.iter().map(|p| p.summary()).collect();
        SchemeSummary {
            kind: "components".into(),
            sites: self.len(),
            diameter: parts.iter().map(|p| p.diameter).fold(0.0, f64::max),
            c: parts.iter().filter_map(|p| p.c).reduce(f64::max),
            pairs: parts.iter().map(|p| p.pairs).sum(),
            label_bits: parts.iter().map(|p| p.label_bits).max().unwrap_or(0)
                + crate::hierarchy::bits_for(self.parts.len() as u64),
            max_table_bits: parts.iter().map(|p| p.max_table_bits).max().unwrap_or(0),
        }
    }

    fn body(&self) -> Result<Value, SchemeError> {
        let parts = self.parts.iter().map(|p| p.envelope()).collect::<Result<Vec<_>, _>>()?;
        Ok(serde_json::to_value(ComponentBody {
            members: self.members.clone(),
            parts,
        })?)
    }
}

pub trait SchemeStrategy: Send + Sync {
    fn name(&self) -> &'static str;
    fn build(&self, sites: &[Site], params: &BuildParams, registry: &Registry) -> Result<Box<dyn Router>, SchemeError>;
    fn load(&self, body: Value, registry: &Registry) -> Result<Box<dyn Router>, SchemeError>;
}

struct CompactStrategy;

impl SchemeStrategy for CompactStrategy {
    fn name(&self) -> &'static str {
        "compact"
    }

    fn build(&self, sites: &[Site], params: &BuildParams, _: &Registry) -> Result<Box<dyn Router>, SchemeError> {
        Ok(Box::new(build_scheme(sites, params)?.scheme))
    }

    fn load(&self, body: Value, _: &Registry) -> Result<Box<dyn Router>, SchemeError> {
        let scheme: RoutingScheme = serde_json::from_value(body)?;
        scheme.check_version()?;
        Ok(Box::new(scheme))
    }
}

struct DirectStrategy;

impl SchemeStrategy for DirectStrategy {
    fn name(&self) -> &'static str {
        "direct"
    }

    fn build(&self, sites: &[Site], _: &BuildParams, _: &Registry) -> Result<Box<dyn Router>, SchemeError> {
        Ok(Box::new(build_direct(sites)?))
    }

    fn load(&self, body: Value, _: &Registry) -> Result<Box<dyn Router>, SchemeError> {
        Ok(Box::new(serde_json::from_value::<DirectScheme>(body)?))
    }
}

struct ExtendedStrategy;

impl SchemeStrategy for ExtendedStrategy {
    fn name(&self) -> &'static str {
        "extended"
    }

    fn build(&self, sites: &[Site], params: &BuildParams, registry: &Registry) -> Result<Box<dyn Router>, SchemeError> {
        Ok(Box::new(build_extended_scheme(sites, params.epsilon, registry)?))
    }

    fn load(&self, body: Value, registry: &Registry) -> Result<Box<dyn Router>, SchemeError> {
        Ok(Box::new(ExtendedScheme::from_body(body, registry)?))
    }
}

struct ComponentStrategy;

impl SchemeStrategy for ComponentStrategy {
    fn name(&self) -> &'static str {
        "components"
    }

    fn build(&self, sites: &[Site], params: &BuildParams, registry: &Registry) -> Result<Box<dyn Router>, SchemeError> {
        Ok(Box::new(build_components(
            sites,
            params,
            &AutoPolicy::default(),
            registry,
        )?))
    }

    fn load(&self, body: Value, registry: &Registry) -> Result<Box<dyn Router>, SchemeError> {
        let b: ComponentBody = serde_json::from_value(body)?;
        let parts = b
            .parts
            .into_iter()
            .map(|e| registry.load(e))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Box::new(ComponentScheme::from_parts(b.members, parts)?))
    }
}

pub struct Registry {
    strategies: BTreeMap<&'static str, Box<dyn SchemeStrategy>>,
}

impl Default for Registry {
    fn default() -> Self {
        Self::standard()
    }
}

impl Registry {
    pub fn empty() -> Self {
        Self {
            strategies: BTreeMap::new(),
        }
    }

    pub fn standard() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(CompactStrategy));
        r.register(Box::new(DirectStrategy));
        r.register(Box::new(ExtendedStrategy));
        r.register(Box::new(ComponentStrategy));
        r
    }

    /// Adds a strategy, returning the one it replaces.
    pub fn register(&mut self, strategy: Box<dyn SchemeStrategy>) -> Option<Box<dyn SchemeStrategy>> {
        self.strategies.insert(strategy.name(), strategy)
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.strategies.keys().copied()
    }

    pub fn get(&self, name: &str) -> Result<&dyn SchemeStrategy, SchemeError> {
        self.strategies
            .get(name)
            .map(|s| s.as_ref())
            .ok_or_else(|| SchemeError::UnknownKind(name.to_string()))
    }

    pub fn build(&self, name: &str, sites: &[Site], params: &BuildParams) -> Result<Box<dyn Router>, SchemeError> {
        self.get(name)?.build(sites, params, self)
    }

    pub fn load(&self, envelope: Envelope) -> Result<Box<dyn Router>, SchemeError> {
        self.get(&envelope.kind)?.load(envelope.body, self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AutoPolicy {
    /// The extended scheme is used when the density bound exceeds this.
    pub density_threshold: usize,
}

impl Default for AutoPolicy {
    fn default() -> Self {
        Self { density_threshold: 64 }
    }
}

/// `compact` for a connected input, or `direct` when its diameter is below 2.
pub fn build_connected(
    sites: &[Site],
    params: &BuildParams,
    registry: &Registry,
) -> Result<Box<dyn Router>, SchemeError> {
    match registry.build("compact", sites, params) {
        Err(SchemeError::SmallDiameter { .. }) => registry.build("direct", sites, params),
        other => other,
    }
}

fn build_one(
    sites: &[Site],
    params: &BuildParams,
    policy: &AutoPolicy,
    registry: &Registry,
) -> Result<Box<dyn Router>, SchemeError> {
    if density_upper_bound(sites) > policy.density_threshold {
        registry.build("extended", sites, params)
    } else {
        build_connected(sites, params, registry)
    }
}

fn build_components(
    sites: &[Site],
    params: &BuildParams,
    policy: &AutoPolicy,
    registry: &Registry,
) -> Result<ComponentScheme, SchemeError> {
    let g = build_udg(sites)?;
    let comp = g.components();
    let count = comp.iter().copied().max().map_or(0, |c| c + 1);
    let mut members = vec![Vec::new(); count];
    for (s, &c) in comp.iter().enumerate() {
        members[c].push(s);
    }
    let parts = members
        .iter()
        .map(|list| {
            let local: Vec<Site> = list
                .iter()
                .enumerate()
                .map(|(i, &s)| Site {
                    id: i,
                    pos: sites[s].pos,
                })
                .collect();
            build_one(&local, params, policy, registry)
        })
        .collect::<Result<Vec<_>, _>>()?;
    ComponentScheme::from_parts(members, parts)
}

/// Picks a kind per the policy; disconnected inputs get one part per component.
pub fn build_auto(
    sites: &[Site],
    params: &BuildParams,
    policy: &AutoPolicy,
    registry: &Registry,
) -> Result<Box<dyn Router>, SchemeError> {
    if build_udg(sites)?.is_connected() {
        build_one(sites, params, policy, registry)
    } else {
        Ok(Box::new(build_components(sites, params, policy, registry)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize, spacing: f64) -> Vec<Site> {
        (0..n).map(|i| Site::new(i, i as f64 * spacing, 0.0)).collect()
    }

    #[test]
    fn registry_lists_standard_kinds() {
        let r = Registry::standard();
        assert_eq!(
            r.names().collect::<Vec<_>>(),
            vec!["compact", "components", "direct", "extended"]
        );
        assert!(matches!(r.get("nope"), Err(SchemeError::UnknownKind(_))));
    }

    #[test]
    fn small_diameter_falls_back_to_direct() {
        let r = Registry::standard();
        let s = build_auto(&chain(3, 0.5), &BuildParams::new(1.0), &AutoPolicy::default(), &r).unwrap();
        assert_eq!(s.kind(), "direct");
        assert_eq!(s.route(0, 2, None).unwrap().distance, 1.0);
    }

    #[test]
    fn disconnected_input_gets_components() {
        let mut sites = chain(5, 1.0);
        sites.extend((0..4).map(|i| Site::new(5 + i, 100.0 + i as f64, 0.0)));
        let r = Registry::standard();
        let s = build_auto(&sites, &BuildParams::new(1.0), &AutoPolicy::default(), &r).unwrap();
        assert_eq!(s.kind(), "components");
        let trace = s.route(5, 8, None).unwrap();
        assert_eq!(trace.path, vec![5, 6, 7, 8]);
        assert!(matches!(
            s.route(0, 8, None),
            Err(RouteError::CrossComponent { s: 0, t: 8 })
        ));
    }

    #[test]
    fn envelopes_round_trip_every_kind() {
        let r = Registry::standard();
        let mut dense: Vec<Site> = Vec::new();
        for c in 0..3 {
            for k in 0..30 {
                let id = dense.len();
                dense.push(Site::new(id, 0.9 * c as f64 + 0.0001 * k as f64, 0.0));
            }
        }
        let policy = AutoPolicy { density_threshold: 40 };
        let mut far = chain(4, 1.0);
        far.push(Site::new(4, 50.0, 0.0));
        let schemes = vec![
            build_auto(&chain(12, 1.0), &BuildParams::new(1.0), &policy, &r).unwrap(),
            build_auto(&chain(3, 0.4), &BuildParams::new(1.0), &policy, &r).unwrap(),
            build_auto(&dense, &BuildParams::new(1.0), &policy, &r).unwrap(),
            build_auto(&far, &BuildParams::new(1.0), &policy, &r).unwrap(),
        ];
        let kinds: Vec<&str> = schemes.iter().map(|s| s.kind()).collect();
        assert_eq!(kinds, vec!["compact", "direct", "extended", "components"]);
        for s in schemes {
            let env = s.envelope().unwrap();
            let text = serde_json::to_string(&env).unwrap();
            let back = r.load(serde_json::from_str(&text).unwrap()).unwrap();
            assert_eq!(serde_json::to_string(&back.envelope().unwrap()).unwrap(), text);
            assert_eq!(back.summary(), s.summary());
        }
    }
}
