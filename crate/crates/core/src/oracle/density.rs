use rand::Rng as _;

use crate::domain::{DiscreteDistribution, Domain, LatticeBox, Point, Sampler, MAX_DIM};
use crate::error::{CoreError, Result};
use crate::Rng;

/// A distribution over a (possibly huge) lattice domain that can be sampled and
/// conditioned on boxes or explicit point sets.
pub trait Density: Send + Sync {
    fn domain(&self) -> &Domain;
    fn sample(&self, rng: &mut Rng) -> Point;
    fn mass_in_box(&self, b: &LatticeBox) -> f64;
    /// Draw from the density conditioned on `b`; `None` if `b` has zero mass.
    fn sample_in_box(&self, b: &LatticeBox, rng: &mut Rng) -> Option<Point>;
    fn mass_of_points(&self, pts: &[Point]) -> f64;
    fn sample_in_points(&self, pts: &[Point], rng: &mut Rng) -> Option<Point>;
    /// Explicit probability vector when the domain is enumerable.
    fn as_discrete(&self) -> Option<&DiscreteDistribution> {
        None
    }
}

/// Explicit distribution over an enumerable domain.
pub struct GridDensity {
    domain: Domain,
    dist: DiscreteDistribution,
    sampler: Sampler,
}

impl GridDensity {
    pub fn new(domain: Domain, dist: DiscreteDistribution) -> Result<GridDensity> {
        let size = domain.enumerable_size()?;
        if dist.len() != size {
            return Err(CoreError::DomainMismatch(format!("{} weights for {size} points", dist.len())));
        }
        let sampler = dist.sampler();
        Ok(GridDensity { domain, dist, sampler })
    }

    pub fn uniform(domain: Domain) -> Result<GridDensity> {
        let size = domain.enumerable_size()?;
        GridDensity::new(domain, DiscreteDistribution::uniform(size))
    }

    pub fn dist(&self) -> &DiscreteDistribution {
        &self.dist
    }
}

fn pick_weighted(weights: &[f64], rng: &mut Rng) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return None;
    }
    let mut u = rng.gen::<f64>() * total;
    let mut last = None;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last = Some(i);
            if u < w {
                return Some(i);
            }
            u -= w;
        }
    }
    last
}

impl Density for GridDensity {
    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn sample(&self, rng: &mut Rng) -> Point {
        self.domain.point(self.sampler.sample(rng))
    }

    fn mass_in_box(&self, b: &LatticeBox) -> f64 {
        b.points().map(|p| self.dist.weight(self.domain.index(&p))).sum()
    }

    fn sample_in_box(&self, b: &LatticeBox, rng: &mut Rng) -> Option<Point> {
        let pts: Vec<Point> = b.points().collect();
        self.sample_in_points(&pts, rng)
    }

    fn mass_of_points(&self, pts: &[Point]) -> f64 {
        pts.iter().map(|p| self.dist.weight(self.domain.index(p))).sum()
    }

    fn sample_in_points(&self, pts: &[Point], rng: &mut Rng) -> Option<Point> {
        let w: Vec<f64> = pts.iter().map(|p| self.dist.weight(self.domain.index(p))).collect();
        pick_weighted(&w, rng).map(|i| pts[i])
    }

    fn as_discrete(&self) -> Option<&DiscreteDistribution> {
        Some(&self.dist)
    }
}

/// Piecewise-uniform density on a cube lattice: `g^d` equal blocks, each spread
/// uniformly over its lattice points.
pub struct BlockDensity {
    domain: Domain,
    blocks: u32,
    weights: DiscreteDistribution,
    sampler: Sampler,
}

impl BlockDensity {
    pub fn new(domain: Domain, blocks: u32, weights: DiscreteDistribution) -> Result<BlockDensity> {
        let d = domain.dim();
        if blocks == 0 || blocks > domain.side() {
            return Err(CoreError::InvalidParameter(format!("{blocks} blocks per axis")));
        }
        if weights.len() != (blocks as usize).pow(d as u32) {
            return Err(CoreError::DomainMismatch(format!("{} block weights for {}^{d} blocks", weights.len(), blocks)));
        }
        let sampler = weights.sampler();
        Ok(BlockDensity { domain, blocks, weights, sampler })
    }

    pub fn uniform(domain: Domain) -> BlockDensity {
        BlockDensity::new(domain, 1, DiscreteDistribution::uniform(1)).expect("one block")
    }

    pub fn blocks(&self) -> u32 {
        self.blocks
    }

    pub fn block_weights(&self) -> &DiscreteDistribution {
        &self.weights
    }

    /// Lattice range `[lo, hi]` of block `b` along one axis.
    fn block_range(&self, b: u32) -> (u32, u32) {
        let side = self.domain.side() as u64;
        let g = self.blocks as u64;
        let lo = (b as u64 * side / g) as u32;
        let hi = (((b as u64 + 1) * side / g) - 1) as u32;
        (lo, hi)
    }

    fn block_box(&self, mut k: usize) -> LatticeBox {
        let d = self.domain.dim();
        let mut lo = [0u32; MAX_DIM];
        let mut hi = [0u32; MAX_DIM];
        for i in 0..d {
            let b = (k % self.blocks as usize) as u32;
            k /= self.blocks as usize;
            let (l, h) = self.block_range(b);
            lo[i] = l;
            hi[i] = h;
        }
        LatticeBox::new(Point::new(&lo[..d]), Point::new(&hi[..d]))
    }

    fn block_of(&self, p: &Point) -> usize {
        let side = self.domain.side() as u64;
        let g = self.blocks as u64;
        let mut k = 0usize;
        for &c in p.coords().iter().rev() {
            // Smallest b with c < (b+1)·side/g.
            let mut b = (c as u64 * g / side) as u32;
            while self.block_range(b).1 < c {
                b += 1;
            }
            while self.block_range(b).0 > c {
                b -= 1;
            }
            k = k * self.blocks as usize + b as usize;
        }
        k
    }

    fn uniform_in(b: &LatticeBox, rng: &mut Rng) -> Point {
        let d = b.dim();
        let mut c = [0u32; MAX_DIM];
        for (i, slot) in c.iter_mut().enumerate().take(d) {
            *slot = rng.gen_range(b.lo.get(i)..=b.hi.get(i));
        }
        Point::new(&c[..d])
    }

    fn overlap_weights(&self, b: &LatticeBox) -> Vec<(LatticeBox, f64)> {
        (0..self.weights.len())
            .filter(|&k| self.weights.weight(k) > 0.0)
            .filter_map(|k| {
                let bb = self.block_box(k);
                bb.intersect(b).map(|ov| {
                    let w = self.weights.weight(k) * ov.count() as f64 / bb.count() as f64;
                    (ov, w)
                })
            })
            .collect()
    }
}

impl Density for BlockDensity {
    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn sample(&self, rng: &mut Rng) -> Point {
        let k = self.sampler.sample(rng);
        BlockDensity::uniform_in(&self.block_box(k), rng)
    }

    fn mass_in_box(&self, b: &LatticeBox) -> f64 {
        self.overlap_weights(b).iter().map(|(_, w)| w).sum()
    }

    fn sample_in_box(&self, b: &LatticeBox, rng: &mut Rng) -> Option<Point> {
        let ov = self.overlap_weights(b);
        let w: Vec<f64> = ov.iter().map(|(_, w)| *w).collect();
        pick_weighted(&w, rng).map(|i| BlockDensity::uniform_in(&ov[i].0, rng))
    }

    fn mass_of_points(&self, pts: &[Point]) -> f64 {
        pts.iter()
            .map(|p| {
                let k = self.block_of(p);
                self.weights.weight(k) / self.block_box(k).count() as f64
            })
            .sum()
    }

    fn sample_in_points(&self, pts: &[Point], rng: &mut Rng) -> Option<Point> {
        let w: Vec<f64> = pts
            .iter()
            .map(|p| {
                let k = self.block_of(p);
                self.weights.weight(k) / self.block_box(k).count() as f64
            })
            .collect();
        pick_weighted(&w, rng).map(|i| pts[i])
    }
}
