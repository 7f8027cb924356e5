use std::io::{BufRead, Write};

use crate::domain::{DiscreteDistribution, Domain, MetricSpace, Point};
use crate::error::{CoreError, Result};

/// Anything that maps domain points to cells with one representative each.
pub trait Partition: Send + Sync {
    fn domain(&self) -> &Domain;
    fn num_cells(&self) -> usize;
    /// Cell index of an in-domain point.
    fn cell_of(&self, p: &Point) -> usize;
    fn rep(&self, cell: usize) -> Point;
}

/// Explicit clustering of an enumerable domain: `gamma[index(x)]` is the cell of `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct Clustering {
    domain: Domain,
    gamma: Vec<u32>,
    reps: Vec<Point>,
}

impl Clustering {
    pub fn new(domain: Domain, gamma: Vec<u32>, reps: Vec<Point>) -> Result<Clustering> {
        let size = domain.enumerable_size()?;
        if gamma.len() != size {
            return Err(CoreError::DomainMismatch(format!("gamma has {} entries, domain {size}", gamma.len())));
        }
        let k = reps.len();
        let mut seen = vec![false; k];
        for &g in &gamma {
            let g = g as usize;
            if g >= k {
                return Err(CoreError::InvalidParameter(format!("cell index {g} without representative")));
            }
            seen[g] = true;
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(CoreError::InvalidParameter(format!("cell {i} is empty")));
        }
        for (i, r) in reps.iter().enumerate() {
            domain.check(r)?;
            if gamma[domain.index(r)] as usize != i {
                return Err(CoreError::InvalidParameter(format!("rep {r} is not in cell {i}")));
            }
        }
        Ok(Clustering { domain, gamma, reps })
    }

    /// Relabels cells in order of first appearance and uses the lexicographically
    /// smallest point of each cell as its representative.
    pub fn with_lex_min_reps(domain: Domain, labels: &[usize]) -> Result<Clustering> {
        let size = domain.enumerable_size()?;
        if labels.len() != size {
            return Err(CoreError::DomainMismatch(format!("{} labels for {size} points", labels.len())));
        }
        let mut remap = std::collections::HashMap::new();
        let mut gamma = Vec::with_capacity(size);
        for &l in labels {
            let next = remap.len() as u32;
            gamma.push(*remap.entry(l).or_insert(next));
        }
        let k = remap.len();
        let mut reps: Vec<Option<Point>> = vec![None; k];
        for (i, &g) in gamma.iter().enumerate() {
            let p = domain.point(i);
            let slot = &mut reps[g as usize];
            if slot.map_or(true, |q| lex_key(&p) < lex_key(&q)) {
                *slot = Some(p);
            }
        }
        Clustering::new(domain, gamma, reps.into_iter().map(|r| r.unwrap()).collect())
    }

    pub fn singletons(domain: Domain) -> Result<Clustering> {
        let size = domain.enumerable_size()?;
        let labels: Vec<usize> = (0..size).collect();
        Clustering::with_lex_min_reps(domain, &labels)
    }

    pub fn single_cell(domain: Domain) -> Result<Clustering> {
        let size = domain.enumerable_size()?;
        Clustering::with_lex_min_reps(domain, &vec![0; size])
    }

    /// Interval cells of `[n]` starting at 0 and at each breakpoint.
    pub fn from_breakpoints(n: u32, breakpoints: &[u32]) -> Result<Clustering> {
        let domain = Domain::line(n)?;
        let mut bps: Vec<u32> = breakpoints.to_vec();
        bps.sort_unstable();
        bps.dedup();
        if bps.iter().any(|&b| b == 0 || b >= n) {
            return Err(CoreError::InvalidParameter("breakpoints must lie in 1..n".into()));
        }
        let mut labels = vec![0usize; n as usize];
        let mut cell = 0;
        let mut next = 0;
        for (x, l) in labels.iter_mut().enumerate() {
            if next < bps.len() && bps[next] as usize == x {
                cell += 1;
                next += 1;
            }
            *l = cell;
        }
        Clustering::with_lex_min_reps(domain, &labels)
    }

    /// Inverse of [`Clustering::from_breakpoints`] for interval clusterings of `[n]`.
    pub fn breakpoints(&self) -> Option<Vec<u32>> {
        if self.domain.dim() != 1 {
            return None;
        }
        let mut out = Vec::new();
        for x in 1..self.gamma.len() {
            if self.gamma[x] != self.gamma[x - 1] {
                out.push(x as u32);
            }
        }
        Some(out)
    }

    pub fn gamma(&self) -> &[u32] {
        &self.gamma
    }

    pub fn reps(&self) -> &[Point] {
        &self.reps
    }

    pub fn cell_of_index(&self, idx: usize) -> usize {
        self.gamma[idx] as usize
    }

    /// Point indices of every cell.
    pub fn cells(&self) -> Vec<Vec<usize>> {
        let mut cells = vec![Vec::new(); self.reps.len()];
        for (i, &g) in self.gamma.iter().enumerate() {
            cells[g as usize].push(i);
        }
        cells
    }

    pub fn cell_points(&self, cell: usize) -> Vec<Point> {
        self.gamma
            .iter()
            .enumerate()
            .filter(|(_, &g)| g as usize == cell)
            .map(|(i, _)| self.domain.point(i))
            .collect()
    }

    pub fn cell_sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.reps.len()];
        for &g in &self.gamma {
            s[g as usize] += 1;
        }
        s
    }

    pub fn cell_diameters(&self, m: &MetricSpace) -> Vec<f64> {
        self.cells()
            .iter()
            .map(|c| {
                let pts: Vec<Point> = c.iter().map(|&i| self.domain.point(i)).collect();
                m.set_diameter(&pts)
            })
            .collect()
    }

    /// `E_{x∼μ}[diam(Γ_{γ(x)})]`.
    pub fn expected_diameter(&self, mu: &DiscreteDistribution, m: &MetricSpace) -> Result<f64> {
        let induced = induced_distribution(mu, self)?;
        Ok(self.cell_diameters(m).iter().zip(induced.weights()).map(|(d, w)| d * w).sum())
    }

    /// `Pr_{x∼μ}[diam(Γ_{γ(x)}) > delta]`.
    pub fn mass_above_diameter(&self, mu: &DiscreteDistribution, m: &MetricSpace, delta: f64) -> Result<f64> {
        let induced = induced_distribution(mu, self)?;
        Ok(self
            .cell_diameters(m)
            .iter()
            .zip(induced.weights())
            .filter(|(d, _)| **d > delta + 1e-12)
            .map(|(_, w)| w)
            .sum())
    }

    /// Cell-index array as CSV: `index,cell`.
    pub fn to_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "index,cell")?;
        for (i, g) in self.gamma.iter().enumerate() {
            writeln!(w, "{i},{g}")?;
        }
        Ok(())
    }

    pub fn from_csv<R: BufRead>(domain: Domain, r: R) -> Result<Clustering> {
        let size = domain.enumerable_size()?;
        let mut labels = vec![usize::MAX; size];
        for (lineno, line) in r.lines().enumerate() {
            let line = line.map_err(|e| CoreError::Parse(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with("index") {
                continue;
            }
            let (a, b) = line.split_once(',').ok_or_else(|| CoreError::Parse(format!("line {}", lineno + 1)))?;
            let i: usize = a.trim().parse().map_err(|_| CoreError::Parse(format!("line {}: index", lineno + 1)))?;
            let g: usize = b.trim().parse().map_err(|_| CoreError::Parse(format!("line {}: cell", lineno + 1)))?;
            if i >= size {
                return Err(CoreError::OutOfDomain(i.to_string()));
            }
            labels[i] = g;
        }
        if labels.contains(&usize::MAX) {
            return Err(CoreError::Parse("missing points".into()));
        }
        Clustering::with_lex_min_reps(domain, &labels)
    }
}

fn lex_key(p: &Point) -> Vec<u32> {
    p.coords().to_vec()
}

impl Partition for Clustering {
    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn num_cells(&self) -> usize {
        self.reps.len()
    }

    #[inline]
    fn cell_of(&self, p: &Point) -> usize {
        self.gamma[self.domain.index(p)] as usize
    }

    fn rep(&self, cell: usize) -> Point {
        self.reps[cell]
    }
}

/// `μ|Γ`: the distribution over cell indices with mass `μ[Γ_i]`.
pub fn induced_distribution(mu: &DiscreteDistribution, g: &Clustering) -> Result<DiscreteDistribution> {
    if mu.len() != g.gamma.len() {
        return Err(CoreError::DomainMismatch(format!("{} weights, {} points", mu.len(), g.gamma.len())));
    }
    let mut w = vec![0.0; g.num_cells()];
    for (i, &c) in g.gamma.iter().enumerate() {
        w[c as usize] += mu.weight(i);
    }
    DiscreteDistribution::new(w)
}
