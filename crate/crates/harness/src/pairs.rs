use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::HarnessError;

/// Which ordered site pairs to route.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairSpec {
    All,
    Sample(usize),
}

impl FromStr for PairSpec {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, HarnessError> {
        if s == "all" {
            return Ok(PairSpec::All);
        }
        s.parse()
            .map(PairSpec::Sample)
            .map_err(|_| HarnessError::Usage(format!("--pairs expects `all` or a count, got `{s}`")))
    }
}

impl PairSpec {
    /// Ordered pairs `s != t` within one component, given the component index
    /// of every site. `All` lists them by source, then target; samples are
    /// drawn with replacement from the seeded stream.
    pub fn select(&self, comp: &[usize], seed: u64) -> Vec<(usize, usize)> {
        let count = comp.iter().copied().max().map_or(0, |c| c + 1);
        let mut members = vec![Vec::new(); count];
        for (s, &c) in comp.iter().enumerate() {
            members[c].push(s);
        }
        match *self {
            PairSpec::All => (0..comp.len())
                .flat_map(|s| members[comp[s]].iter().filter(move |&&t| t != s).map(move |&t| (s, t)))
                .collect(),
            PairSpec::Sample(k) => {
                let sources: Vec<usize> = (0..comp.len()).filter(|&s| members[comp[s]].len() > 1).collect();
                if sources.is_empty() {
                    return Vec::new();
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(1);
                (0..k)
                    .map(|_| {
                        let s = sources[rng.gen_range(0..sources.len())];
                        let list = &members[comp[s]];
                        let at = list.binary_search(&s).expect("member of own component");
                        let t = list[(at + rng.gen_range(1..list.len())) % list.len()];
                        (s, t)
                    })
                    .collect()
            }
        }
    }
}

/// Parses `S,T`.
pub fn parse_pair(text: &str) -> Result<(usize, usize), HarnessError> {
    let bad = || HarnessError::Usage(format!("--pair expects `S,T`, got `{text}`"));
    let (a, b) = text.split_once(',').ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_pairs_are_ordered_and_distinct() {
        let p = PairSpec::All.select(&[0, 0, 0], 0);
        assert_eq!(p, vec![(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)]);
        // two components: {0, 2} and {1}
        assert_eq!(PairSpec::All.select(&[0, 1, 0], 0), vec![(0, 2), (2, 0)]);
    }

    #[test]
    fn samples_are_seeded() {
        let comp: Vec<usize> = (0..50).map(|i| i % 3).collect();
        let a = PairSpec::Sample(200).select(&comp, 9);
        assert_eq!(a, PairSpec::Sample(200).select(&comp, 9));
        assert!(a.iter().all(|&(s, t)| s != t && comp[s] == comp[t]));
    }

    #[test]
    fn parses() {
        assert_eq!("all".parse::<PairSpec>().unwrap(), PairSpec::All);
        assert_eq!("12".parse::<PairSpec>().unwrap(), PairSpec::Sample(12));
        assert!("x".parse::<PairSpec>().is_err());
        assert_eq!(parse_pair("3, 7").unwrap(), (3, 7));
        assert!(parse_pair("3").is_err());
    }
}
