use serde::{Deserialize, Serialize};

use super::point::{Domain, LatticeBox, Point};
use crate::error::{CoreError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricKind {
    /// `‖x−y‖_p / (d^{1/p} · span)`.
    Lp { p: f64 },
    /// `min(‖x−y‖_1, R) / R`.
    Threshold { r: f64 },
}

/// A domain with a unit-diameter metric.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSpace {
    pub domain: Domain,
    pub kind: MetricKind,
}

impl MetricSpace {
    pub fn new(domain: Domain, kind: MetricKind) -> Result<MetricSpace> {
        match kind {
            MetricKind::Lp { p } => {
                if !(p >= 1.0) || !p.is_finite() {
                    return Err(CoreError::InvalidParameter(format!("p must be finite and >= 1, got {p}")));
                }
            }
            MetricKind::Threshold { r } => {
                let max = (domain.span() as f64) * domain.dim() as f64;
                if !(r > 0.0) || r > max {
                    return Err(CoreError::InvalidParameter(format!(
                        "threshold R must be in (0, {max}] for unit diameter, got {r}"
                    )));
                }
            }
        }
        Ok(MetricSpace { domain, kind })
    }

    pub fn lp(domain: Domain, p: f64) -> Result<MetricSpace> {
        MetricSpace::new(domain, MetricKind::Lp { p })
    }

    pub fn threshold(domain: Domain, r: f64) -> Result<MetricSpace> {
        MetricSpace::new(domain, MetricKind::Threshold { r })
    }

    pub fn diameter(&self) -> f64 {
        1.0
    }

    /// Distance between real-valued lattice coordinates.
    pub fn dist_coords(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.kind {
            MetricKind::Lp { p } => {
                let d = a.len() as f64;
                let norm = if p == 1.0 {
                    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
                } else if p == 2.0 {
                    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
                } else {
                    a.iter().zip(b).map(|(x, y)| (x - y).abs().powf(p)).sum::<f64>().powf(1.0 / p)
                };
                norm / (d.powf(1.0 / p) * self.domain.span() as f64)
            }
            MetricKind::Threshold { r } => {
                let l1: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum();
                l1.min(r) / r
            }
        }
    }

    pub fn dist(&self, a: &Point, b: &Point) -> f64 {
        let x: Vec<f64> = a.coords().iter().map(|&c| c as f64).collect();
        let y: Vec<f64> = b.coords().iter().map(|&c| c as f64).collect();
        self.dist_coords(&x, &y)
    }

    /// Diameter of an axis-aligned box with real corners (lattice units).
    pub fn box_diameter(&self, lo: &[f64], hi: &[f64]) -> f64 {
        self.dist_coords(lo, hi)
    }

    pub fn lattice_box_diameter(&self, b: &LatticeBox) -> f64 {
        self.dist(&b.lo, &b.hi)
    }

    /// Diameter of a finite point set.
    pub fn set_diameter(&self, pts: &[Point]) -> f64 {
        if pts.len() < 2 {
            return 0.0;
        }
        let d = pts[0].dim();
        let candidates: Vec<Point> = match d {
            1 => {
                let lo = pts.iter().min().copied().unwrap();
                let hi = pts.iter().max().copied().unwrap();
                vec![lo, hi]
            }
            2 => convex_hull_2d(pts),
            _ => pts.to_vec(),
        };
        let mut best = 0.0f64;
        for i in 0..candidates.len() {
            for j in i + 1..candidates.len() {
                best = best.max(self.dist(&candidates[i], &candidates[j]));
            }
        }
        best
    }
}

/// Vertices of the convex hull of planar lattice points (monotone chain).
/// Distances under any norm are maximised at hull vertices.
pub fn convex_hull_2d(pts: &[Point]) -> Vec<Point> {
    let mut v: Vec<(i64, i64)> = pts.iter().map(|p| (p.get(0) as i64, p.get(1) as i64)).collect();
    v.sort_unstable();
    v.dedup();
    if v.len() <= 2 {
        return v.iter().map(|&(x, y)| Point::new(&[x as u32, y as u32])).collect();
    }
    let cross = |o: (i64, i64), a: (i64, i64), b: (i64, i64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut lower: Vec<(i64, i64)> = Vec::new();
    for &p in &v {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(i64, i64)> = Vec::new();
    for &p in v.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower.into_iter().map(|(x, y)| Point::new(&[x as u32, y as u32])).collect()
}
