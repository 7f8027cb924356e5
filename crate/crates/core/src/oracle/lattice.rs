//! Implicit partitions of large lattices (the `[0,1]^d` cube at dyadic resolution).

use super::clustering::{Clustering, Partition};
use crate::domain::{Domain, LatticeBox, Point};
use crate::error::{CoreError, Result};

/// Voronoi cells of integer seeds; equidistant points go to the lowest seed index.
/// Each cell is a lattice set cut out by half-spaces around its seed.
#[derive(Clone, Debug, PartialEq)]
pub struct VoronoiPartition {
    domain: Domain,
    seeds: Vec<Point>,
}

impl VoronoiPartition {
    pub fn new(domain: Domain, seeds: Vec<Point>) -> Result<VoronoiPartition> {
        if seeds.is_empty() {
            return Err(CoreError::InvalidParameter("no seeds".into()));
        }
        for s in &seeds {
            domain.check(s)?;
        }
        let mut sorted = seeds.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != seeds.len() {
            return Err(CoreError::InvalidParameter("duplicate seeds".into()));
        }
        Ok(VoronoiPartition { domain, seeds })
    }

    pub fn seeds(&self) -> &[Point] {
        &self.seeds
    }

    #[inline]
    fn sq(a: &Point, b: &Point) -> i64 {
        a.coords()
            .iter()
            .zip(b.coords())
            .map(|(&x, &y)| {
                let t = x as i64 - y as i64;
                t * t
            })
            .sum()
    }

    /// Exact bounding box of the lattice points of `cell`.
    pub fn cell_bounding_box(&self, cell: usize) -> Result<LatticeBox> {
        if self.domain.dim() != 2 {
            return brute_bounding_box(self, cell);
        }
        let side = self.domain.side() as i64;
        let (mut xlo, mut xhi, mut ylo, mut yhi) = (i64::MAX, i64::MIN, i64::MAX, i64::MIN);
        for y in 0..side {
            if let Some((a, b)) = self.row_interval(cell, y) {
                xlo = xlo.min(a);
                xhi = xhi.max(b);
                ylo = ylo.min(y);
                yhi = yhi.max(y);
            }
        }
        if xlo > xhi {
            return Err(CoreError::InvalidParameter(format!("cell {cell} is empty")));
        }
        Ok(LatticeBox::new(Point::new(&[xlo as u32, ylo as u32]), Point::new(&[xhi as u32, yhi as u32])))
    }

    /// Lattice x-range of `cell` on row `y` (2-D only).
    pub fn row_interval(&self, cell: usize, y: i64) -> Option<(i64, i64)> {
        let s = &self.seeds[cell];
        let (sx, sy) = (s.get(0) as i64, s.get(1) as i64);
        let mut lo = 0i64;
        let mut hi = self.domain.side() as i64 - 1;
        for (j, t) in self.seeds.iter().enumerate() {
            if j == cell {
                continue;
            }
            let (tx, ty) = (t.get(0) as i64, t.get(1) as i64);
            // Point p is at least as close to s as to t iff a·x <= c (strict when j < cell).
            let a = 2 * (tx - sx);
            let c = (tx * tx + ty * ty) - (sx * sx + sy * sy) - 2 * y * (ty - sy);
            let strict = j < cell;
            if a == 0 {
                if (strict && c <= 0) || (!strict && c < 0) {
                    return None;
                }
                continue;
            }
            if a > 0 {
                let bound = if strict { ceil_div(c, a) - 1 } else { floor_div(c, a) };
                hi = hi.min(bound);
            } else {
                let bound = if strict { floor_div(c, a) + 1 } else { ceil_div(c, a) };
                lo = lo.max(bound);
            }
            if lo > hi {
                return None;
            }
        }
        Some((lo, hi))
    }
}

fn floor_div(a: i64, b: i64) -> i64 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn ceil_div(a: i64, b: i64) -> i64 {
    -floor_div(-a, b)
}

fn brute_bounding_box(p: &dyn Partition, cell: usize) -> Result<LatticeBox> {
    let dom = *p.domain();
    let d = dom.dim();
    let mut lo = vec![u32::MAX; d];
    let mut hi = vec![0u32; d];
    let mut any = false;
    for q in dom.points()? {
        if p.cell_of(&q) == cell {
            any = true;
            for i in 0..d {
                lo[i] = lo[i].min(q.get(i));
                hi[i] = hi[i].max(q.get(i));
            }
        }
    }
    if !any {
        return Err(CoreError::InvalidParameter(format!("cell {cell} is empty")));
    }
    Ok(LatticeBox::new(Point::new(&lo), Point::new(&hi)))
}

impl Partition for VoronoiPartition {
    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn num_cells(&self) -> usize {
        self.seeds.len()
    }

    fn cell_of(&self, p: &Point) -> usize {
        let mut best = 0;
        let mut best_d = i64::MAX;
        for (i, s) in self.seeds.iter().enumerate() {
            let d = VoronoiPartition::sq(p, s);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    fn rep(&self, cell: usize) -> Point {
        self.seeds[cell]
    }
}

/// Disjoint lattice boxes covering the domain.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxPartition {
    domain: Domain,
    boxes: Vec<LatticeBox>,
    reps: Vec<Point>,
}

impl BoxPartition {
    pub fn new(domain: Domain, boxes: Vec<LatticeBox>, reps: Vec<Point>) -> Result<BoxPartition> {
        if boxes.len() != reps.len() || boxes.is_empty() {
            return Err(CoreError::InvalidParameter("one representative per box required".into()));
        }
        let total: u64 = boxes.iter().map(|b| b.count()).sum();
        if total != domain.size() {
            return Err(CoreError::InvalidParameter(format!("boxes cover {total} of {} points", domain.size())));
        }
        for (b, r) in boxes.iter().zip(&reps) {
            if !b.contains(r) {
                return Err(CoreError::InvalidParameter(format!("rep {r} outside its box")));
            }
        }
        for i in 0..boxes.len() {
            for j in i + 1..boxes.len() {
                if boxes[i].intersect(&boxes[j]).is_some() {
                    return Err(CoreError::InvalidParameter("boxes overlap".into()));
                }
            }
        }
        Ok(BoxPartition { domain, boxes, reps })
    }

    pub fn boxes(&self) -> &[LatticeBox] {
        &self.boxes
    }
}

impl Partition for BoxPartition {
    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn num_cells(&self) -> usize {
        self.boxes.len()
    }

    fn cell_of(&self, p: &Point) -> usize {
        self.boxes.iter().position(|b| b.contains(p)).expect("boxes cover the domain")
    }

    fn rep(&self, cell: usize) -> Point {
        self.reps[cell]
    }
}

/// Generated lattice partitions.
#[derive(Clone, Debug, PartialEq)]
pub enum LatticePartition {
    Voronoi(VoronoiPartition),
    Boxes(BoxPartition),
}

impl LatticePartition {
    pub fn cell_bounding_box(&self, cell: usize) -> Result<LatticeBox> {
        match self {
            LatticePartition::Voronoi(v) => v.cell_bounding_box(cell),
            LatticePartition::Boxes(b) => Ok(b.boxes[cell]),
        }
    }

    /// Explicit clustering, keeping representatives; only for enumerable lattices.
    pub fn materialize(&self) -> Result<Clustering> {
        let dom = *self.domain();
        let gamma: Vec<u32> = dom.points()?.map(|p| self.cell_of(&p) as u32).collect();
        let reps = (0..self.num_cells()).map(|i| self.rep(i)).collect();
        Clustering::new(dom, gamma, reps)
    }

    fn inner(&self) -> &dyn Partition {
        match self {
            LatticePartition::Voronoi(v) => v,
            LatticePartition::Boxes(b) => b,
        }
    }
}

impl Partition for LatticePartition {
    fn domain(&self) -> &Domain {
        self.inner().domain()
    }

    fn num_cells(&self) -> usize {
        self.inner().num_cells()
    }

    fn cell_of(&self, p: &Point) -> usize {
        self.inner().cell_of(p)
    }

    fn rep(&self, cell: usize) -> Point {
        self.inner().rep(cell)
    }
}
