//! The four subcommands as library functions; `main` only parses arguments
//! and moves bytes.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use diskroute_core::geom::{build_udg, density_upper_bound, DistanceMatrix, Site};
use diskroute_core::instance::{format_instance, instance_hash, parse_instance};
use diskroute_core::scheme::BuildParams;
use diskroute_core::strategy::{build_auto, AutoPolicy, Envelope, Registry, Router};

use crate::generators::GeneratorRegistry;
use crate::pairs::PairSpec;
use crate::report::{ReportRow, RouteReport, TraceRecord};
use crate::verify::{verify_instance, VerifyOptions, VerifyReport};
use crate::HarnessError;

pub const SCHEME_FILE_FORMAT: &str = "diskroute-scheme";
pub const SCHEME_FILE_VERSION: u32 = 1;

/// Where sites come from: an instance file, or a generator run.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSource {
    pub instance: Option<PathBuf>,
    pub generator: String,
    pub n: Option<usize>,
    pub seed: u64,
}

pub fn read_text(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|e| HarnessError::io(path.display().to_string(), e))
}

/// Writes to `path`, or to stdout when it is `None`.
pub fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), HarnessError> {
    use std::io::Write;
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| HarnessError::io(p.display().to_string(), e)),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| HarnessError::io("<stdout>", e)),
    }
}

pub fn load_sites(src: &InputSource) -> Result<Vec<Site>, HarnessError> {
    match (&src.instance, src.n) {
        (Some(path), _) => Ok(parse_instance(&read_text(path)?)?),
        (None, Some(n)) => GeneratorRegistry::default().generate(&src.generator, n, src.seed),
        (None, None) => Err(HarnessError::Usage("give --instance PATH or --n N".into())),
    }
}

pub fn cmd_gen(generator: &str, n: usize, seed: u64) -> Result<String, HarnessError> {
    Ok(format_instance(
        &GeneratorRegistry::default().generate(generator, n, seed)?,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildConfig<'a> {
    pub params: BuildParams,
    /// `auto` or a registered scheme kind.
    pub kind: &'a str,
    pub policy: AutoPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeFile {
    pub format: String,
    pub version: u32,
    pub instance_hash: String,
    pub scheme: Envelope,
}

impl SchemeFile {
    pub fn to_json(&self) -> Result<String, HarnessError> {
        let mut text = serde_json::to_string(self)?;
        text.push('\n');
        Ok(text)
    }
}

pub struct Built {
    pub router: Box<dyn Router>,
    pub file: SchemeFile,
    pub report: ReportRow,
}

pub fn build_router(sites: &[Site], cfg: &BuildConfig, registry: &Registry) -> Result<Box<dyn Router>, HarnessError> {
    let disconnected = !build_udg(sites)?.is_connected();
    if disconnected {
        log::warn!("instance is disconnected; building one scheme per component");
    }
    Ok(match cfg.kind {
        "auto" => build_auto(sites, &cfg.params, &cfg.policy, registry)?,
        kind => registry.build(kind, sites, &cfg.params)?,
    })
}

fn summary_row(sites: &[Site], router: &dyn Router) -> ReportRow {
    let s = router.summary();
    ReportRow {
        instance: instance_hash(sites)[..16].to_string(),
        kind: s.kind,
        n: sites.len(),
        diameter: s.diameter,
        density: density_upper_bound(sites),
        c: s.c,
        wspd_pairs: s.pairs,
        routed: 0,
        max_stretch: None,
        mean_stretch: None,
        max_table_bits: s.max_table_bits,
        max_label_bits: s.label_bits,
        max_header_bits: None,
        prep_ms: None,
    }
}

pub fn cmd_build(sites: &[Site], cfg: &BuildConfig) -> Result<Built, HarnessError> {
    let registry = Registry::standard();
    let started = Instant::now();
    let router = build_router(sites, cfg, &registry)?;
    let prep_ms = started.elapsed().as_secs_f64() * 1e3;
    let file = SchemeFile {
        format: SCHEME_FILE_FORMAT.into(),
        version: SCHEME_FILE_VERSION,
        instance_hash: instance_hash(sites),
        scheme: router.envelope()?,
    };
    let mut report = summary_row(sites, router.as_ref());
    report.prep_ms = Some(prep_ms);
    Ok(Built { router, file, report })
}

/// Parses a scheme file and checks it was built for `sites`.
pub fn load_scheme(text: &str, sites: &[Site]) -> Result<Box<dyn Router>, HarnessError> {
    let file: SchemeFile = serde_json::from_str(text)?;
    if file.format != SCHEME_FILE_FORMAT || file.version != SCHEME_FILE_VERSION {
        return Err(HarnessError::Usage(format!(
            "not a scheme file (format {} version {})",
            file.format, file.version
        )));
    }
    let found = instance_hash(sites);
    if file.instance_hash != found {
        return Err(HarnessError::HashMismatch {
            expected: file.instance_hash,
            found,
        });
    }
    let router = Registry::standard().load(file.scheme)?;
    if router.len() != sites.len() {
        return Err(HarnessError::Usage("scheme and instance sizes differ".into()));
    }
    Ok(router)
}

/// Routes each pair and compares against Dijkstra distances. Records keep
/// the order of `pairs`.
pub fn cmd_route(
    router: &dyn Router,
    sites: &[Site],
    pairs: &[(usize, usize)],
    step_limit: Option<usize>,
) -> Result<RouteReport, HarnessError> {
    let g = build_udg(sites)?;
    let dist = DistanceMatrix::new(&g);
    let records = pairs
        .par_iter()
        .map(|&(s, t)| {
            let trace = router.route(s, t, step_limit)?;
            Ok(TraceRecord::from_trace(&trace, dist.get(s, t)))
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    let mut summary = summary_row(sites, router);
    summary.routed = records.len();
    if !records.is_empty() {
        summary.max_stretch = Some(records.iter().map(|r| r.ratio).fold(1.0, f64::max));
        summary.mean_stretch = Some(records.iter().map(|r| r.ratio).sum::<f64>() / records.len() as f64);
        summary.max_header_bits = records.iter().map(|r| r.max_header_bits).max();
    }
    Ok(RouteReport { summary, records })
}

/// Pairs for `route`: explicit pairs win over the spec.
pub fn route_pairs(
    sites: &[Site],
    spec: PairSpec,
    explicit: &[(usize, usize)],
    seed: u64,
) -> Result<Vec<(usize, usize)>, HarnessError> {
    if !explicit.is_empty() {
        if let Some(&(s, t)) = explicit.iter().find(|&&(s, t)| s >= sites.len() || t >= sites.len()) {
            return Err(HarnessError::Usage(format!("pair ({s}, {t}) names a missing site")));
        }
        return Ok(explicit.to_vec());
    }
    Ok(spec.select(&build_udg(sites)?.components(), seed))
}

pub fn cmd_verify(sites: &[Site], opts: &VerifyOptions) -> Result<VerifyReport, HarnessError> {
    verify_instance(sites, opts)
}

/// One flat row per suite, for CSV output of `verify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteRow {
    pub suite: String,
    pub passed: bool,
    pub checked: u64,
    pub failures: u64,
    pub witness: String,
}

pub fn suite_rows(report: &VerifyReport) -> Vec<SuiteRow> {
    report
        .suites
        .iter()
        .map(|s| SuiteRow {
            suite: s.name.clone(),
            passed: s.passed(),
            checked: s.checked,
            failures: s.failures,
            witness: s.witnesses.first().cloned().unwrap_or_default(),
        })
        .collect()
}
