use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

pub const MAX_DIM: usize = 4;

/// Lattice point. Cube domains store coordinates in units of the dyadic resolution.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    coords: [u32; MAX_DIM],
    dim: u8,
}

impl Point {
    pub fn new(coords: &[u32]) -> Point {
        assert!(
            !coords.is_empty() && coords.len() <= MAX_DIM,
            "dimension must be in 1..={MAX_DIM}"
        );
        let mut c = [0u32; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Point { coords: c, dim: coords.len() as u8 }
    }

    pub fn scalar(x: u32) -> Point {
        Point::new(&[x])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn coords(&self) -> &[u32] {
        &self.coords[..self.dim as usize]
    }

    #[inline]
    pub fn get(&self, axis: usize) -> u32 {
        self.coords[axis]
    }

    pub fn with(&self, axis: usize, value: u32) -> Point {
        let mut p = *self;
        p.coords[axis] = value;
        p
    }

    pub fn to_i64(&self) -> Vec<i64> {
        self.coords().iter().map(|&c| c as i64).collect()
    }
}

impl Serialize for Point {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.coords().serialize(s)
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords())
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords().iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// `[n]^d` grid, or `[0,1]^d` sampled on the dyadic lattice `{k/2^bits}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Grid { n: u32, d: usize },
    Cube { d: usize, bits: u32 },
}

impl Domain {
    pub fn grid(n: u32, d: usize) -> Result<Domain> {
        if n < 2 || d == 0 || d > MAX_DIM {
            return Err(CoreError::InvalidParameter(format!("grid needs n >= 2 and 1 <= d <= {MAX_DIM}, got n={n} d={d}")));
        }
        Ok(Domain::Grid { n, d })
    }

    pub fn line(n: u32) -> Result<Domain> {
        Domain::grid(n, 1)
    }

    pub fn cube(d: usize, bits: u32) -> Result<Domain> {
        if d == 0 || d > MAX_DIM || bits == 0 || bits > 20 {
            return Err(CoreError::InvalidParameter(format!("cube needs 1 <= d <= {MAX_DIM} and 1 <= bits <= 20, got d={d} bits={bits}")));
        }
        Ok(Domain::Cube { d, bits })
    }

    pub fn dim(&self) -> usize {
        match *self {
            Domain::Grid { d, .. } | Domain::Cube { d, .. } => d,
        }
    }

    /// Number of lattice points per axis.
    pub fn side(&self) -> u32 {
        match *self {
            Domain::Grid { n, .. } => n,
            Domain::Cube { bits, .. } => (1u32 << bits) + 1,
        }
    }

    /// Lattice steps across one axis; the metric divides by this.
    pub fn span(&self) -> u32 {
        self.side() - 1
    }

    pub fn size(&self) -> u64 {
        (self.side() as u64).pow(self.dim() as u32)
    }

    /// Size as `usize`, refusing domains too large to enumerate.
    pub fn enumerable_size(&self) -> Result<usize> {
        let s = self.size();
        if s > 50_000_000 {
            return Err(CoreError::TooLarge(format!("domain has {s} points")));
        }
        Ok(s as usize)
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.dim() == self.dim() && p.coords().iter().all(|&c| c < self.side())
    }

    pub fn check(&self, p: &Point) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(CoreError::OutOfDomain(p.to_string()))
        }
    }

    pub fn point_from_i64(&self, c: &[i64]) -> Option<Point> {
        if c.len() != self.dim() {
            return None;
        }
        let side = self.side() as i64;
        let mut out = [0u32; MAX_DIM];
        for (o, &x) in out.iter_mut().zip(c) {
            if x < 0 || x >= side {
                return None;
            }
            *o = x as u32;
        }
        Some(Point::new(&out[..c.len()]))
    }

    /// Linear index with axis 0 varying fastest.
    #[inline]
    pub fn index(&self, p: &Point) -> usize {
        let side = self.side() as usize;
        let mut idx = 0usize;
        for &c in p.coords().iter().rev() {
            idx = idx * side + c as usize;
        }
        idx
    }

    #[inline]
    pub fn point(&self, mut idx: usize) -> Point {
        let side = self.side() as usize;
        let d = self.dim();
        let mut c = [0u32; MAX_DIM];
        for slot in c.iter_mut().take(d) {
            *slot = (idx % side) as u32;
            idx /= side;
        }
        Point::new(&c[..d])
    }

    pub fn points(&self) -> Result<impl Iterator<Item = Point> + '_> {
        let size = self.enumerable_size()?;
        Ok((0..size).map(move |i| self.point(i)))
    }

    /// Lattice units per unit of real length (cube only; grids use `span`).
    pub fn resolution(&self) -> u32 {
        self.span()
    }
}

/// Closed lattice box `lo..=hi` per axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LatticeBox {
    pub lo: Point,
    pub hi: Point,
}

impl LatticeBox {
    pub fn new(lo: Point, hi: Point) -> LatticeBox {
        debug_assert!(lo.coords().iter().zip(hi.coords()).all(|(a, b)| a <= b));
        LatticeBox { lo, hi }
    }

    pub fn whole(domain: &Domain) -> LatticeBox {
        let d = domain.dim();
        let lo = Point::new(&vec![0; d]);
        let hi = Point::new(&vec![domain.span(); d]);
        LatticeBox { lo, hi }
    }

    pub fn dim(&self) -> usize {
        self.lo.dim()
    }

    pub fn contains(&self, p: &Point) -> bool {
        (0..self.dim()).all(|i| self.lo.get(i) <= p.get(i) && p.get(i) <= self.hi.get(i))
    }

    pub fn side(&self, axis: usize) -> u32 {
        self.hi.get(axis) - self.lo.get(axis) + 1
    }

    pub fn count(&self) -> u64 {
        (0..self.dim()).map(|i| self.side(i) as u64).product()
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        let d = self.dim();
        let total = self.count() as usize;
        (0..total).map(move |mut k| {
            let mut c = [0u32; MAX_DIM];
            for (i, slot) in c.iter_mut().enumerate().take(d) {
                let s = self.side(i) as usize;
                *slot = self.lo.get(i) + (k % s) as u32;
                k /= s;
            }
            Point::new(&c[..d])
        })
    }

    pub fn intersect(&self, other: &LatticeBox) -> Option<LatticeBox> {
        let d = self.dim();
        let mut lo = [0u32; MAX_DIM];
        let mut hi = [0u32; MAX_DIM];
        for i in 0..d {
            lo[i] = self.lo.get(i).max(other.lo.get(i));
            hi[i] = self.hi.get(i).min(other.hi.get(i));
            if lo[i] > hi[i] {
                return None;
            }
        }
        Some(LatticeBox::new(Point::new(&lo[..d]), Point::new(&hi[..d])))
    }
}
