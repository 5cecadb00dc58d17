//! Seeded instance generators. Every generator is resampled until the unit
//! disk graph is connected, up to a fixed number of attempts.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use diskroute_core::geom::{build_udg, sites_from_points, Point, Site};

use crate::HarnessError;

pub const MAX_ATTEMPTS: usize = 64;

pub trait Generator: Send + Sync {
    fn name(&self) -> &'static str;
    fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<Point>;
}

/// Uniform in a square of side `sqrt(n)/2`, about four sites per unit area.
pub struct UniformSquare;

impl Generator for UniformSquare {
    fn name(&self) -> &'static str {
        "uniform-square"
    }

    fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
        let side = (n as f64).sqrt() / 2.0;
        (0..n)
            .map(|_| Point::new(rng.gen::<f64>() * side, rng.gen::<f64>() * side))
            .collect()
    }
}

/// Uniform in a 1.5-wide strip of length `n/6`, about four sites per unit
/// area with diameter growing linearly in `n`.
pub struct UniformStrip;

impl Generator for UniformStrip {
    fn name(&self) -> &'static str {
        "strip"
    }

    fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
        let length = n as f64 / 6.0;
        (0..n)
            .map(|_| Point::new(rng.gen::<f64>() * length, rng.gen::<f64>() * 1.5))
            .collect()
    }
}

/// Collinear, unit spaced.
pub struct Chain;

impl Generator for Chain {
    fn name(&self) -> &'static str {
        "chain"
    }

    fn sample(&self, n: usize, _: &mut ChaCha8Rng) -> Vec<Point> {
        (0..n).map(|i| Point::new(i as f64, 0.0)).collect()
    }
}

/// Square lattice with spacing 0.7, each site jittered by up to 0.1 per axis.
pub struct JitteredGrid;

impl Generator for JitteredGrid {
    fn name(&self) -> &'static str {
        "grid"
    }

    fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
        let side = (n as f64).sqrt().ceil().max(1.0) as usize;
        (0..n)
            .map(|i| {
                let (gx, gy) = ((i % side) as f64, (i / side) as f64);
                Point::new(
                    0.7 * gx + rng.gen_range(-0.1..=0.1),
                    0.7 * gy + rng.gen_range(-0.1..=0.1),
                )
            })
            .collect()
    }
}

/// Tight clusters of 30 sites (radius 0.004) whose centers form a random walk
/// with step 0.995, heading within 45 degrees of the x axis.
pub struct Clustered {
    pub per_cluster: usize,
    pub step: f64,
    pub radius: f64,
}

impl Default for Clustered {
    fn default() -> Self {
        Self {
            per_cluster: 30,
            step: 0.995,
            radius: 0.004,
        }
    }
}

impl Generator for Clustered {
    fn name(&self) -> &'static str {
        "clustered"
    }

    fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
        let clusters = n.div_ceil(self.per_cluster).max(1);
        let mut centers = vec![Point::new(0.0, 0.0)];
        for k in 1..clusters {
            let a = rng.gen_range(-std::f64::consts::FRAC_PI_4..=std::f64::consts::FRAC_PI_4);
            let prev = centers[k - 1];
            centers.push(Point::new(prev.x + self.step * a.cos(), prev.y + self.step * a.sin()));
        }
        (0..n)
            .map(|i| {
                let c = centers[i / self.per_cluster];
                let r = self.radius * rng.gen::<f64>().sqrt();
                let a = rng.gen_range(0.0..std::f64::consts::TAU);
                Point::new(c.x + r * a.cos(), c.y + r * a.sin())
            })
            .collect()
    }
}

pub struct GeneratorRegistry {
    generators: BTreeMap<&'static str, Box<dyn Generator>>,
}

impl Default for GeneratorRegistry {
    fn default() -> Self {
        let mut r = Self {
            generators: BTreeMap::new(),
        };
        r.register(Box::new(UniformSquare));
        r.register(Box::new(UniformStrip));
        r.register(Box::new(Chain));
        r.register(Box::new(JitteredGrid));
        r.register(Box::new(Clustered::default()));
        r
    }
}

impl GeneratorRegistry {
    pub fn register(&mut self, g: Box<dyn Generator>) {
        self.generators.insert(g.name(), g);
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.generators.keys().copied()
    }

    pub fn get(&self, name: &str) -> Result<&dyn Generator, HarnessError> {
        self.generators
            .get(name)
            .map(|g| g.as_ref())
            .ok_or_else(|| HarnessError::Usage(format!("unknown generator `{name}`")))
    }

    /// Connected instance of `n` sites, determined by `(name, n, seed)`.
    pub fn generate(&self, name: &str, n: usize, seed: u64) -> Result<Vec<Site>, HarnessError> {
        if n == 0 {
            return Err(HarnessError::Usage("n must be positive".into()));
        }
        let g = self.get(name)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..MAX_ATTEMPTS {
            let sites = sites_from_points(&g.sample(n, &mut rng));
            if build_udg(&sites)?.is_connected() {
                return Ok(sites);
            }
        }
        Err(HarnessError::Disconnected {
            generator: name.to_string(),
            attempts: MAX_ATTEMPTS,
        })
    }
}

pub fn generate(name: &str, n: usize, seed: u64) -> Result<Vec<Site>, HarnessError> {
    GeneratorRegistry::default().generate(name, n, seed)
}
