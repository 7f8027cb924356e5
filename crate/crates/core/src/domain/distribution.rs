use std::io::{BufRead, Read, Write};

use rand::distributions::{Distribution, WeightedIndex};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Per-entry slack on the unit-mass check.
pub const MASS_TOL: f64 = 1e-12;

/// Probability vector indexed by linear domain index (or by cell index for
/// induced distributions).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDistribution {
    weights: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(weights: Vec<f64>) -> Result<DiscreteDistribution> {
        if weights.is_empty() {
            return Err(CoreError::InvalidDistribution("empty support".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(CoreError::InvalidDistribution(format!("negative or non-finite weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        let tol = MASS_TOL * (weights.len() as f64).max(1.0);
        if (total - 1.0).abs() > tol {
            return Err(CoreError::InvalidDistribution(format!("total mass {total} != 1")));
        }
        Ok(DiscreteDistribution { weights })
    }

    /// Normalizes nonnegative weights.
    pub fn from_unnormalized(weights: Vec<f64>) -> Result<DiscreteDistribution> {
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(CoreError::InvalidDistribution(format!("negative or non-finite weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(CoreError::InvalidDistribution("zero total mass".into()));
        }
        DiscreteDistribution::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(k: usize) -> DiscreteDistribution {
        assert!(k > 0);
        DiscreteDistribution { weights: vec![1.0 / k as f64; k] }
    }

    pub fn point_mass(k: usize, at: usize) -> DiscreteDistribution {
        assert!(at < k);
        let mut w = vec![0.0; k];
        w[at] = 1.0;
        DiscreteDistribution { weights: w }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.weights[i] > 0.0).collect()
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().cloned().fold(0.0, f64::max)
    }

    pub fn l2_squared(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum()
    }

    pub fn mass_of(&self, idx: impl IntoIterator<Item = usize>) -> f64 {
        idx.into_iter().map(|i| self.weights[i]).sum()
    }

    /// Reusable sampler over indices.
    pub fn sampler(&self) -> Sampler {
        Sampler { index: WeightedIndex::new(&self.weights).expect("validated weights") }
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> usize {
        // Linear scan is fine for one-off draws.
        let mut u: f64 = rng.gen();
        for (i, w) in self.weights.iter().enumerate() {
            if u < *w {
                return i;
            }
            u -= w;
        }
        self.support().last().copied().unwrap_or(0)
    }

    pub fn to_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "index,weight")?;
        for (i, x) in self.weights.iter().enumerate() {
            writeln!(w, "{i},{x:e}")?;
        }
        Ok(())
    }

    pub fn from_csv<R: BufRead>(r: R) -> Result<DiscreteDistribution> {
        let mut weights: Vec<f64> = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line.map_err(|e| CoreError::Parse(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() || (lineno == 0 && line.starts_with("index")) {
                continue;
            }
            let (a, b) = line
                .split_once(',')
                .ok_or_else(|| CoreError::Parse(format!("line {}: expected index,weight", lineno + 1)))?;
            let i: usize = a.trim().parse().map_err(|_| CoreError::Parse(format!("line {}: bad index", lineno + 1)))?;
            let x: f64 = b.trim().parse().map_err(|_| CoreError::Parse(format!("line {}: bad weight", lineno + 1)))?;
            if i >= weights.len() {
                weights.resize(i + 1, 0.0);
            }
            weights[i] = x;
        }
        DiscreteDistribution::new(weights)
    }

    /// Little-endian: u64 length followed by f64 weights.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + 8 * self.len());
        out.extend_from_slice(&(self.len() as u64).to_le_bytes());
        for w in &self.weights {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<DiscreteDistribution> {
        let mut r = bytes;
        let mut len = [0u8; 8];
        r.read_exact(&mut len).map_err(|e| CoreError::Parse(e.to_string()))?;
        let len = u64::from_le_bytes(len) as usize;
        if r.len() != 8 * len {
            return Err(CoreError::Parse(format!("expected {} payload bytes, got {}", 8 * len, r.len())));
        }
        let weights = r.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
        DiscreteDistribution::new(weights)
    }
}

pub struct Sampler {
    index: WeightedIndex<f64>,
}

impl Sampler {
    #[inline]
    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.index.sample(rng)
    }
}

/// `½‖a−b‖₁`.
pub fn tv_distance(a: &DiscreteDistribution, b: &DiscreteDistribution) -> Result<f64> {
    if a.len() != b.len() {
        return Err(CoreError::DomainMismatch(format!("{} vs {} points", a.len(), b.len())));
    }
    let s: f64 = a.weights.iter().zip(&b.weights).map(|(x, y)| (x - y).abs()).sum();
    Ok((0.5 * s).min(1.0))
}
