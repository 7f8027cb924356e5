//! Nested partitions of a lattice into axis-aligned blocks, with per-level
//! diameter bounds.

use serde::{Deserialize, Serialize};

use crate::domain::{Domain, LatticeBox, MetricKind, MetricSpace, Point};
use crate::error::{CoreError, Result};
use crate::oracle::{Clustering, Density};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Level {
    /// `2^i` equal slabs per axis (cell of `x` is `⌊x·2^i/side⌋` on each axis).
    Dyadic(u32),
    /// Blocks of `w` consecutive lattice points per axis.
    Blocks(u32),
}

#[derive(Clone, Debug, PartialEq)]
pub struct HierarchicalClustering {
    domain: Domain,
    levels: Vec<Level>,
    /// `deltas[i]` bounds the diameter of level `i+1` cells; the domain itself has diameter 1.
    deltas: Vec<f64>,
}

impl HierarchicalClustering {
    /// Dyadic levels `1..=t`, `t = ⌈log₂(2/ε)⌉`, with `δ_i = 2^{-i}` under a normalized ℓp metric.
    pub fn dyadic(domain: Domain, eps: f64) -> Result<HierarchicalClustering> {
        if !(eps > 0.0 && eps < 2.0) {
            return Err(CoreError::InvalidParameter(format!("eps {eps}")));
        }
        let t = (2.0 / eps).log2().ceil().max(1.0) as u32;
        let levels = (1..=t).map(Level::Dyadic).collect();
        let deltas = (1..=t).map(|i| 0.5f64.powi(i as i32)).collect();
        Ok(HierarchicalClustering { domain, levels, deltas })
    }

    /// One level of width-`w` blocks with diameter bound `delta`.
    pub fn blocks(domain: Domain, w: u32, delta: f64) -> Result<HierarchicalClustering> {
        if w == 0 {
            return Err(CoreError::InvalidParameter("block width 0".into()));
        }
        Ok(HierarchicalClustering { domain, levels: vec![Level::Blocks(w)], deltas: vec![delta] })
    }

    /// Single block level whose cells have diameter ≤ `eps/2` under `metric`.
    pub fn for_metric(metric: &MetricSpace, eps: f64) -> Result<HierarchicalClustering> {
        match metric.kind {
            MetricKind::Lp { .. } => HierarchicalClustering::dyadic(metric.domain, eps),
            MetricKind::Threshold { r } => {
                if metric.domain.dim() != 1 {
                    return Err(CoreError::Unsupported("threshold hierarchy on a non-line domain".into()));
                }
                let w = (eps * r / 2.0).floor() as u32 + 1;
                let delta = ((w - 1) as f64).min(r) / r;
                HierarchicalClustering::blocks(metric.domain, w, delta)
            }
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn t(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    /// `δ_{i−1}` for level index `i` (0-based), with `δ_0 = 1`.
    pub fn delta_before(&self, i: usize) -> f64 {
        if i == 0 {
            1.0
        } else {
            self.deltas[i - 1]
        }
    }

    fn per_axis(&self, i: usize) -> u64 {
        let side = self.domain.side() as u64;
        match self.levels[i] {
            Level::Dyadic(l) => 1u64 << l,
            Level::Blocks(w) => side.div_ceil(w as u64),
        }
    }

    /// Cell slots at level `i` (some may be empty when slabs outnumber lattice points).
    pub fn num_cells(&self, i: usize) -> usize {
        (self.per_axis(i) as usize).pow(self.domain.dim() as u32)
    }

    fn axis_cell(&self, i: usize, x: u32) -> u64 {
        let side = self.domain.side() as u64;
        match self.levels[i] {
            Level::Dyadic(l) => ((x as u64) << l) / side,
            Level::Blocks(w) => x as u64 / w as u64,
        }
    }

    fn axis_range(&self, i: usize, a: u64) -> Option<(u32, u32)> {
        let side = self.domain.side() as u64;
        let (lo, hi) = match self.levels[i] {
            Level::Dyadic(l) => ((a * side).div_ceil(1 << l), ((a + 1) * side).div_ceil(1 << l)),
            Level::Blocks(w) => (a * w as u64, ((a + 1) * w as u64).min(side)),
        };
        (lo < hi).then(|| (lo as u32, (hi - 1) as u32))
    }

    pub fn cell_of(&self, i: usize, p: &Point) -> usize {
        let per = self.per_axis(i);
        let mut idx = 0u64;
        for &c in p.coords().iter().rev() {
            idx = idx * per + self.axis_cell(i, c);
        }
        idx as usize
    }

    /// Lattice box of cell `idx` at level `i`, or `None` if it holds no points.
    pub fn cell_box(&self, i: usize, mut idx: usize) -> Option<LatticeBox> {
        let per = self.per_axis(i) as usize;
        let d = self.domain.dim();
        let mut lo = [0u32; crate::domain::MAX_DIM];
        let mut hi = [0u32; crate::domain::MAX_DIM];
        for a in 0..d {
            let (l, h) = self.axis_range(i, (idx % per) as u64)?;
            lo[a] = l;
            hi[a] = h;
            idx /= per;
        }
        Some(LatticeBox::new(Point::new(&lo[..d]), Point::new(&hi[..d])))
    }

    /// Number of cells holding at least one lattice point.
    pub fn nonempty_cells(&self, i: usize) -> usize {
        let per = self.per_axis(i);
        let filled = (0..per).filter(|&a| self.axis_range(i, a).is_some()).count();
        filled.pow(self.domain.dim() as u32)
    }

    /// `ν|Γ^(i)` as a weight per cell slot.
    pub fn induced(&self, i: usize, nu: &dyn Density) -> Vec<f64> {
        (0..self.num_cells(i)).map(|c| self.cell_box(i, c).map_or(0.0, |b| nu.mass_in_box(&b))).collect()
    }

    /// Explicit clusterings of every level (enumerable domains only).
    pub fn as_clusterings(&self) -> Result<Vec<Clustering>> {
        (0..self.t())
            .map(|i| {
                let labels: Vec<usize> = self.domain.points()?.map(|p| self.cell_of(i, &p)).collect();
                Clustering::with_lex_min_reps(self.domain, &labels)
            })
            .collect()
    }
}
