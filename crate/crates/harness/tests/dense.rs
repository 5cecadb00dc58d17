use diskroute_core::geom::{build_udg, density_upper_bound, DistanceMatrix};
use diskroute_core::strategy::Registry;
use diskroute_harness::generators::generate;
use diskroute_harness::pairs::PairSpec;
use diskroute_harness::verify::net_suites;

#[test]
fn clustered_instance_passes_net_suites() {
    let sites = generate("clustered", 150, 11).unwrap();
    assert!(density_upper_bound(&sites) >= 30);
    let dist = DistanceMatrix::new(&build_udg(&sites).unwrap());
    let pairs = PairSpec::Sample(2000).select(&vec![0; sites.len()], 11);
    let suites = net_suites(&sites, &dist, 1.0, &pairs, &Registry::standard()).unwrap();
    let names: Vec<&str> = suites.iter().map(|s| s.name.as_str()).collect();
    assert_eq!(
        names,
        ["net-packing-covering", "bridges", "net-distance", "extended-stretch"]
    );
    for s in &suites {
        assert!(s.passed(), "{}: {:?}", s.name, s.witnesses);
    }
    assert!(suites[3].checked == 2000);
}
