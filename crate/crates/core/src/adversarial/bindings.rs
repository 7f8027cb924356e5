//! Named universe presets: which cell procedures, metric and default Δ a tester uses.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::hierarchy::HierarchicalClustering;
use super::GuardParams;
use crate::cells::{
    BoxDiscovery, BoxParams, CellDiscoverer, CellRejector, ConvexBoxDiscovery, ConvexBoxRejection,
    ConvexConvexRejection, ConvexGridDiscovery, ConvexVsBoxRejection, IntervalDiscovery, RejectViaDiscovery,
    ShellRejection,
};
use crate::domain::{Domain, MetricKind, MetricSpace};
use crate::error::{CoreError, Result};
use crate::oracle::UniverseTag;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preset {
    #[serde(rename = "c-c")]
    CC,
    #[serde(rename = "cc-cc")]
    CcCc,
    #[serde(rename = "b-b")]
    BB,
    #[serde(rename = "cc-b-2d")]
    CcB2d,
    #[serde(rename = "cv-b-cube")]
    CvBCube,
    #[serde(rename = "cv-cv-cube")]
    CvCvCube,
    #[serde(rename = "intervals-threshold")]
    IntervalsThreshold,
}

impl Preset {
    pub const ALL: [Preset; 7] = [
        Preset::CC,
        Preset::CcCc,
        Preset::BB,
        Preset::CcB2d,
        Preset::CvBCube,
        Preset::CvCvCube,
        Preset::IntervalsThreshold,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Preset::CC => "c-c",
            Preset::CcCc => "cc-cc",
            Preset::BB => "b-b",
            Preset::CcB2d => "cc-b-2d",
            Preset::CvBCube => "cv-b-cube",
            Preset::CvCvCube => "cv-cv-cube",
            Preset::IntervalsThreshold => "intervals-threshold",
        }
    }

    /// The promise class `𝒢` that instances are drawn from.
    pub fn good_universe(&self, inner_ball: f64) -> UniverseTag {
        match self {
            Preset::CC => UniverseTag::Connected,
            Preset::CcCc => UniverseTag::ConnectedConvex,
            Preset::BB | Preset::CcB2d => UniverseTag::Boxes,
            Preset::CvBCube => UniverseTag::BoxInnerBall { delta: inner_ball },
            Preset::CvCvCube => UniverseTag::ConvexInnerBall { delta: inner_ball },
            Preset::IntervalsThreshold => UniverseTag::Intervals,
        }
    }

    /// Whether instances live on `Domain::cube` rather than `Domain::grid`.
    pub fn uses_cube(&self) -> bool {
        matches!(self, Preset::CvBCube | Preset::CvCvCube)
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Preset> {
        Preset::ALL
            .iter()
            .find(|p| p.name() == s)
            .copied()
            .ok_or_else(|| CoreError::Parse(format!("unknown preset {s:?}")))
    }
}

/// How the identity tester gets samples of `ν` cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IdentityMode {
    /// Container sampling through cell discovery.
    Containers,
    /// Equivalence tester with `ν` simulated by local draws plus LABEL.
    SimulatedEquivalence,
    Unsupported,
}

/// A preset instantiated on a concrete metric space.
pub struct Binding {
    pub preset: Preset,
    pub metric: MetricSpace,
    rejector: Box<dyn CellRejector>,
    discoverer: Option<Box<dyn CellDiscoverer>>,
}

fn need_dim(preset: Preset, domain: &Domain, ok: bool) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(CoreError::DomainMismatch(format!("preset {preset} does not run on a {}-dimensional domain", domain.dim())))
    }
}

impl Binding {
    /// `inner_ball` is the promised inner-ball radius for the convex-cube presets.
    pub fn new(preset: Preset, metric: MetricSpace, inner_ball: Option<f64>) -> Result<Binding> {
        let dom = metric.domain;
        let lp = matches!(metric.kind, MetricKind::Lp { .. });
        let ball = || {
            inner_ball
                .filter(|&b| b > 0.0)
                .ok_or_else(|| CoreError::InvalidParameter(format!("preset {preset} needs an inner-ball radius")))
        };
        let (rejector, discoverer): (Box<dyn CellRejector>, Option<Box<dyn CellDiscoverer>>) = match preset {
            Preset::CC => {
                need_dim(preset, &dom, lp)?;
                (Box::new(ShellRejection { metric }), None)
            }
            Preset::CcCc => {
                need_dim(preset, &dom, dom.dim() == 2)?;
                (Box::new(RejectViaDiscovery { discoverer: ConvexGridDiscovery, metric }), Some(Box::new(ConvexGridDiscovery)))
            }
            Preset::BB => (Box::new(RejectViaDiscovery { discoverer: BoxDiscovery, metric }), Some(Box::new(BoxDiscovery))),
            Preset::CcB2d => {
                need_dim(preset, &dom, dom.dim() == 2)?;
                (Box::new(ConvexVsBoxRejection { metric }), Some(Box::new(ConvexGridDiscovery)))
            }
            Preset::CvBCube => {
                need_dim(preset, &dom, dom.dim() <= 2 && matches!(dom, Domain::Cube { .. }))?;
                let params = BoxParams::new(dom.dim(), ball()?);
                (Box::new(ConvexBoxRejection { params, metric }), Some(Box::new(ConvexBoxDiscovery { params })))
            }
            Preset::CvCvCube => {
                need_dim(preset, &dom, dom.dim() <= 2 && matches!(dom, Domain::Cube { .. }))?;
                let params = BoxParams::new(dom.dim(), ball()?);
                (Box::new(ConvexConvexRejection { params, metric }), None)
            }
            Preset::IntervalsThreshold => {
                need_dim(preset, &dom, dom.dim() == 1)?;
                (Box::new(RejectViaDiscovery { discoverer: IntervalDiscovery, metric }), Some(Box::new(IntervalDiscovery)))
            }
        };
        Ok(Binding { preset, metric, rejector, discoverer })
    }

    pub fn rejector(&self) -> &dyn CellRejector {
        self.rejector.as_ref()
    }

    pub fn discoverer(&self) -> Option<&dyn CellDiscoverer> {
        self.discoverer.as_deref()
    }

    pub fn identity_mode(&self) -> IdentityMode {
        match self.preset {
            Preset::CC => IdentityMode::SimulatedEquivalence,
            Preset::CvCvCube => IdentityMode::Unsupported,
            _ => IdentityMode::Containers,
        }
    }

    fn root_d(&self) -> f64 {
        match self.metric.kind {
            MetricKind::Lp { p } => (self.metric.domain.dim() as f64).powf(1.0 / p),
            MetricKind::Threshold { .. } => 1.0,
        }
    }

    /// Largest Δ the preset's rejection procedure is comfortable with at this ε.
    pub fn default_diam(&self, eps: f64) -> f64 {
        match self.preset {
            // shell rejection needs βε/2 > 2·d^{1/p}·Δ
            Preset::CC => eps / (32.0 * self.root_d()),
            // leaves room for the 8/span slack
            Preset::CcB2d => eps / 16.0,
            Preset::CvBCube => eps / 16.0,
            Preset::CvCvCube => eps / (16.0 * self.root_d()),
            _ => eps / 8.0,
        }
    }

    pub fn guard_params(&self, eps: f64) -> Result<GuardParams> {
        GuardParams::new(eps, self.default_diam(eps))
    }

    pub fn hierarchy(&self, eps: f64) -> Result<HierarchicalClustering> {
        HierarchicalClustering::for_metric(&self.metric, eps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_roundtrip() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
            let json = serde_json::to_string(&p).unwrap();
            assert_eq!(json, format!("\"{}\"", p.name()));
        }
        assert!("boxes".parse::<Preset>().is_err());
    }

    #[test]
    fn bindings_check_dimension() {
        let line = MetricSpace::threshold(Domain::line(64).unwrap(), 8.0).unwrap();
        assert!(Binding::new(Preset::IntervalsThreshold, line, None).is_ok());
        assert!(Binding::new(Preset::CcCc, line, None).is_err());
        assert!(Binding::new(Preset::CC, line, None).is_err());
        let cube = MetricSpace::lp(Domain::cube(2, 8).unwrap(), 2.0).unwrap();
        assert!(Binding::new(Preset::CvBCube, cube, None).is_err());
        let b = Binding::new(Preset::CvBCube, cube, Some(0.02)).unwrap();
        assert!((b.discoverer().unwrap().alpha() - 0.25).abs() < 1e-12);
        assert_eq!(Binding::new(Preset::CvCvCube, cube, Some(0.02)).unwrap().identity_mode(), IdentityMode::Unsupported);
    }

    #[test]
    fn default_diams_are_valid_guards() {
        let grid = MetricSpace::lp(Domain::grid(32, 2).unwrap(), 1.0).unwrap();
        for p in [Preset::CC, Preset::CcCc, Preset::BB, Preset::CcB2d] {
            let b = Binding::new(p, grid, None).unwrap();
            let g = b.guard_params(0.3).unwrap();
            assert!(g.diam <= g.eps / 8.0);
        }
        let b = Binding::new(Preset::CC, grid, None).unwrap();
        let g = b.guard_params(0.3).unwrap();
        let (t1, t2) = g.reject_thresholds();
        assert!(t2 > 2.0 * 2.0 * t1);
    }
}
