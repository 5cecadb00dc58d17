//! Corrupted schemes must be caught by the suites, with a witness.

use diskroute_core::geom::{build_udg, DistanceMatrix};
use diskroute_core::hierarchy::Label;
use diskroute_core::scheme::{build_scheme, BuildParams};
use diskroute_harness::generators::generate;
use diskroute_harness::pairs::PairSpec;
use diskroute_harness::verify::{partition_suite, routing_suites};

#[test]
fn shifted_table_interval_breaks_the_partition() {
    let sites = generate("strip", 120, 4).unwrap();
    let mut built = build_scheme(&sites, &BuildParams::new(1.0).with_c(13.0)).unwrap();
    assert!(partition_suite(&built).passed());
    let (x, i) = built
        .scheme
        .tables
        .iter()
        .enumerate()
        .find_map(|(x, t)| {
            t.global
                .iter()
                .position(|e| e.target_interval.hi.0 < 120)
                .map(|i| (x, i))
        })
        .unwrap();
    built.scheme.tables[x].global[i].target_interval.hi =
        Label(built.scheme.tables[x].global[i].target_interval.hi.0 + 1);
    let suite = partition_suite(&built);
    assert!(!suite.passed());
    assert!(!suite.witnesses.is_empty());
    assert!(suite.witnesses[0].contains("times"), "{:?}", suite.witnesses);
}

#[test]
fn dropped_middle_site_fails_routing() {
    let sites = generate("chain", 80, 0).unwrap();
    let mut built = build_scheme(&sites, &BuildParams::new(1.0).with_c(13.0)).unwrap();
    let dist = DistanceMatrix::new(&build_udg(&sites).unwrap());
    let (x, i) = built
        .scheme
        .tables
        .iter()
        .enumerate()
        .find_map(|(x, t)| t.global.iter().position(|e| e.middle_label.is_some()).map(|i| (x, i)))
        .unwrap();
    let far = built.scheme.tables[x].global[i].target_interval.lo;
    // point the middle site back at the source itself
    built.scheme.tables[x].global[i].middle_label = Some(built.scheme.tables[x].label);
    let pairs: Vec<(usize, usize)> = PairSpec::All
        .select(&vec![0; 80], 0)
        .into_iter()
        .filter(|&(s, _)| s == x)
        .collect();
    let suites = routing_suites(&built, &dist, &pairs);
    let delivery = suites.iter().find(|s| s.name == "delivery").unwrap();
    assert!(!delivery.passed(), "route from {x} towards label {far} still delivered");
    assert!(!delivery.witnesses.is_empty());
}
