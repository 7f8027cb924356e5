//! Cell discovery and cell rejection procedures. Every procedure takes the cell's
//! representative `h` and compares label answers against it directly, so `h`
//! itself is never queried.

pub mod bounding;
pub mod convex2d;
pub mod line;
pub mod shell;

use serde::Serialize;

use crate::domain::{LatticeBox, MetricSpace, Point};
use crate::error::Result;
use crate::oracle::OracleSession;

pub use bounding::{bounding_box, qcell_conv_box, qreject_conv_box, qreject_conv_conv, BoundingBoxPair, BoxOutcome, BoxParams};
pub use convex2d::{cc_vs_box_reject_2d, discover_convex_grid_cell_2d};
pub use line::{discover_box_cell, discover_interval_cell};
pub use shell::reject_connected_cell;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Container {
    Points(Vec<Point>),
    Box(LatticeBox),
}

impl Container {
    pub fn contains(&self, p: &Point) -> bool {
        match self {
            Container::Points(v) => v.binary_search(p).is_ok(),
            Container::Box(b) => b.contains(p),
        }
    }

    pub fn count(&self) -> u64 {
        match self {
            Container::Points(v) => v.len() as u64,
            Container::Box(b) => b.count(),
        }
    }

    /// Sorted points; boxes are expanded.
    pub fn points(&self) -> Vec<Point> {
        match self {
            Container::Points(v) => v.clone(),
            Container::Box(b) => {
                let mut v: Vec<Point> = b.points().collect();
                v.sort();
                v
            }
        }
    }

    pub fn diameter(&self, m: &MetricSpace) -> f64 {
        match self {
            Container::Points(v) => m.set_diameter(v),
            Container::Box(b) => m.lattice_box_diameter(b),
        }
    }

    pub(crate) fn from_points(mut v: Vec<Point>) -> Container {
        v.sort();
        v.dedup();
        Container::Points(v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Discovery {
    Container(Container),
    ClusterReject,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscoveryResult {
    pub outcome: Discovery,
    pub queries_used: u64,
}

impl DiscoveryResult {
    pub fn container(&self) -> Option<&Container> {
        match &self.outcome {
            Discovery::Container(c) => Some(c),
            Discovery::ClusterReject => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectOutcome {
    Accept,
    Reject,
    Bot,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RejectVerdict {
    pub outcome: RejectOutcome,
    pub queries_used: u64,
}

/// `(α, ν)`-cell discovery.
pub trait CellDiscoverer: Send + Sync {
    fn alpha(&self) -> f64;
    fn discover(&self, s: &mut OracleSession<'_>, h: &Point) -> Result<DiscoveryResult>;
}

/// `(t1, t2)`-cell rejection.
pub trait CellRejector: Send + Sync {
    fn reject(&self, s: &mut OracleSession<'_>, h: &Point, t1: f64, t2: f64) -> Result<RejectVerdict>;
}

/// Rejection from exact discovery: accept iff the discovered cell has diameter ≤ t1.
pub struct RejectViaDiscovery<D> {
    pub discoverer: D,
    pub metric: MetricSpace,
}

impl<D: CellDiscoverer> CellRejector for RejectViaDiscovery<D> {
    fn reject(&self, s: &mut OracleSession<'_>, h: &Point, t1: f64, _t2: f64) -> Result<RejectVerdict> {
        let r = self.discoverer.discover(s, h)?;
        let outcome = match &r.outcome {
            Discovery::ClusterReject => RejectOutcome::Bot,
            Discovery::Container(c) => {
                if c.diameter(&self.metric) <= t1 + 1e-12 {
                    RejectOutcome::Accept
                } else {
                    RejectOutcome::Reject
                }
            }
        };
        Ok(RejectVerdict { outcome, queries_used: r.queries_used })
    }
}

pub struct IntervalDiscovery;

impl CellDiscoverer for IntervalDiscovery {
    fn alpha(&self) -> f64 {
        1.0
    }
    fn discover(&self, s: &mut OracleSession<'_>, h: &Point) -> Result<DiscoveryResult> {
        discover_interval_cell(s, h)
    }
}

pub struct BoxDiscovery;

impl CellDiscoverer for BoxDiscovery {
    fn alpha(&self) -> f64 {
        1.0
    }
    fn discover(&self, s: &mut OracleSession<'_>, h: &Point) -> Result<DiscoveryResult> {
        discover_box_cell(s, h)
    }
}

pub struct ConvexGridDiscovery;

impl CellDiscoverer for ConvexGridDiscovery {
    fn alpha(&self) -> f64 {
        1.0
    }
    fn discover(&self, s: &mut OracleSession<'_>, h: &Point) -> Result<DiscoveryResult> {
        discover_convex_grid_cell_2d(s, h)
    }
}

pub struct ShellRejection {
    pub metric: MetricSpace,
}

impl CellRejector for ShellRejection {
    fn reject(&self, s: &mut OracleSession<'_>, h: &Point, t1: f64, t2: f64) -> Result<RejectVerdict> {
        reject_connected_cell(s, h, t1, t2, &self.metric)
    }
}

pub struct ConvexVsBoxRejection {
    pub metric: MetricSpace,
}

impl CellRejector for ConvexVsBoxRejection {
    fn reject(&self, s: &mut OracleSession<'_>, h: &Point, t1: f64, t2: f64) -> Result<RejectVerdict> {
        cc_vs_box_reject_2d(s, h, t1, t2, &self.metric)
    }
}

/// Bounding-box based discovery for convex cells with an inner ball (`α = 2^{-d}`).
pub struct ConvexBoxDiscovery {
    pub params: BoxParams,
}

impl CellDiscoverer for ConvexBoxDiscovery {
    fn alpha(&self) -> f64 {
        0.5f64.powi(self.params.dim as i32)
    }
    fn discover(&self, s: &mut OracleSession<'_>, h: &Point) -> Result<DiscoveryResult> {
        qcell_conv_box(s, h, &self.params)
    }
}

/// Rejection for convex cells against box cells; ignores `t2` (fixed at `2·t1`).
pub struct ConvexBoxRejection {
    pub params: BoxParams,
    pub metric: MetricSpace,
}

impl CellRejector for ConvexBoxRejection {
    fn reject(&self, s: &mut OracleSession<'_>, h: &Point, t1: f64, _t2: f64) -> Result<RejectVerdict> {
        qreject_conv_box(s, h, t1, &self.params, &self.metric)
    }
}

/// Rejection for convex cells; thresholds `(t/d^{1/p}, 2t)` with `t = t1·d^{1/p}`.
pub struct ConvexConvexRejection {
    pub params: BoxParams,
    pub metric: MetricSpace,
}

impl CellRejector for ConvexConvexRejection {
    fn reject(&self, s: &mut OracleSession<'_>, h: &Point, t1: f64, _t2: f64) -> Result<RejectVerdict> {
        let d = self.params.dim as f64;
        let scale = match self.metric.kind {
            crate::domain::MetricKind::Lp { p } => d.powf(1.0 / p),
            crate::domain::MetricKind::Threshold { .. } => 1.0,
        };
        qreject_conv_conv(s, h, t1 * scale, &self.params, &self.metric)
    }
}
