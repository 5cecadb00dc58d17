//! Line-oriented instance files: a header line holding `n`, then `n` lines
//! `id x y` with decimal coordinates.

use sha2::{Digest, Sha256};

use crate::error::InstanceError;
use crate::geom::{validate_sites, Site};

pub fn parse_instance(text: &str) -> Result<Vec<Site>, InstanceError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (header_line, header) = lines.next().ok_or(InstanceError::Parse {
        line: 1,
        message: "missing site count".into(),
    })?;
    let n: usize = header.parse().map_err(|_| InstanceError::Parse {
        line: header_line,
        message: format!("expected a site count, found `{header}`"),
    })?;

    let mut sites = Vec::with_capacity(n);
    for (line, text) in lines {
        let bad = |message: String| InstanceError::Parse { line, message };
        let fields: Vec<&str> = text.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(bad(format!("expected `id x y`, found `{text}`")));
        }
        let id: usize = fields[0].parse().map_err(|_| bad(format!("bad id `{}`", fields[0])))?;
        let x: f64 = fields[1]
            .parse()
            .map_err(|_| bad(format!("bad x coordinate `{}`", fields[1])))?;
        let y: f64 = fields[2]
            .parse()
            .map_err(|_| bad(format!("bad y coordinate `{}`", fields[2])))?;
        if sites.len() == n {
            return Err(bad(format!("more than {n} site lines")));
        }
        sites.push(Site::new(id, x, y));
    }
    if sites.len() != n {
        return Err(InstanceError::Parse {
            line: header_line,
            message: format!("header announces {n} sites, found {}", sites.len()),
        });
    }
    validate_sites(&sites)?;
    Ok(sites)
}

/// Canonical text form. Coordinates use the shortest decimal that parses back
/// to the same double, so `parse_instance(format_instance(s)) == s`.
pub fn format_instance(sites: &[Site]) -> String {
    let mut out = format!("{}\n", sites.len());
    for s in sites {
        out.push_str(&format!("{} {} {}\n", s.id, s.pos.x, s.pos.y));
    }
    out
}

/// SHA-256 of the canonical text form, hex encoded.
pub fn instance_hash(sites: &[Site]) -> String {
    hex::encode(Sha256::digest(format_instance(sites).as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_simple_file() {
        let sites = parse_instance("3\n0 0 0\n1 0.5 0\n\n2 1 -2.25\n").unwrap();
        assert_eq!(sites.len(), 3);
        assert_eq!(sites[2], Site::new(2, 1.0, -2.25));
    }

    #[test]
    fn rejects_count_mismatch_and_garbage() {
        assert!(parse_instance("2\n0 0 0\n").is_err());
        assert!(parse_instance("1\n0 0 0\n1 1 1\n").is_err());
        assert!(parse_instance("1\n0 zero 0\n").is_err());
        assert!(parse_instance("").is_err());
        assert!(matches!(
            parse_instance("2\n1 0 0\n0 1 1\n"),
            Err(InstanceError::Geom(_))
        ));
    }

    #[test]
    fn hash_tracks_content() {
        let a = vec![Site::new(0, 0.0, 0.0)];
        let b = vec![Site::new(0, 0.0, 1e-300)];
        assert_eq!(instance_hash(&a).len(), 64);
        assert_ne!(instance_hash(&a), instance_hash(&b));
    }

    proptest! {
        #[test]
        fn text_form_round_trips(coords in prop::collection::vec((-1e6f64..1e6, -1e6f64..1e6), 1..40)) {
            let sites: Vec<Site> = coords
                .iter()
                .enumerate()
                .map(|(i, &(x, y))| Site::new(i, x, y))
                .collect();
            let back = parse_instance(&format_instance(&sites)).unwrap();
            prop_assert_eq!(back, sites);
        }
    }
}
