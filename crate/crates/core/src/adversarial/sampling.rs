//! The clustering test and rejection sampling from discovered containers.

use std::collections::HashMap;

use super::GuardParams;
use crate::cells::{CellDiscoverer, CellRejector, Container, Discovery, RejectOutcome};
use crate::domain::Point;
use crate::error::Result;
use crate::oracle::{Density, OracleSession};

/// Where representatives come from.
#[derive(Clone, Copy)]
pub enum SampleSource<'a> {
    /// SAMP on session input `which`.
    Samp(usize),
    /// `x ∼ ν` drawn locally, then one LABEL query.
    Simulated(&'a dyn Density),
}

impl SampleSource<'_> {
    pub fn draw(&self, s: &mut OracleSession<'_>) -> Result<Point> {
        match *self {
            SampleSource::Samp(which) => s.samp(which),
            SampleSource::Simulated(nu) => {
                let x = nu.sample(s.rng());
                s.label(&x)
            }
        }
    }
}

/// One base run: `s` representatives, each cell run through rejection with
/// thresholds `(Δ, βε/2)`. Any reject or ⊥ rejects. `true` = accept.
fn clustering_run(
    s: &mut OracleSession<'_>,
    source: SampleSource<'_>,
    gp: &GuardParams,
    rejector: &dyn CellRejector,
) -> Result<bool> {
    let (t1, t2) = gp.reject_thresholds();
    for _ in 0..gp.s() {
        let h = source.draw(s)?;
        if rejector.reject(s, &h, t1, t2)?.outcome != RejectOutcome::Accept {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Clustering test boosted by majority vote to failure `fail` (base 1/12).
pub fn test_clustering(
    s: &mut OracleSession<'_>,
    source: SampleSource<'_>,
    gp: &GuardParams,
    rejector: &dyn CellRejector,
    fail: f64,
) -> Result<bool> {
    let runs = crate::stats::majority_runs(fail);
    let mut yes = 0;
    for _ in 0..runs {
        yes += clustering_run(s, source, gp, rejector)? as usize;
    }
    Ok(2 * yes > runs)
}

#[derive(Clone, Debug, PartialEq)]
pub enum ContainerOutcome {
    Samples(Vec<Point>),
    Reject,
    ClusterReject,
}

/// Draws `m` samples of `μ•` (a cell drawn by `μ`, then a point of it drawn by
/// `ν`). Each SAMP answer's container is found by discovery, then points
/// `x ∼ ν|C` are proposed until LABEL puts one in the same cell. One counter
/// is shared by all `m` draws and aborts past `24m/α` proposals. Containers are
/// memoized per representative within a call.
pub fn container_sample(
    s: &mut OracleSession<'_>,
    m: usize,
    discoverer: &dyn CellDiscoverer,
    nu: &dyn Density,
) -> Result<ContainerOutcome> {
    let limit = (24.0 * m as f64 / discoverer.alpha()).floor() as u64;
    let mut counter = 0u64;
    let mut memo: HashMap<Point, Option<Container>> = HashMap::new();
    let mut out = Vec::with_capacity(m);
    for _ in 0..m {
        let h = s.samp(0)?;
        if !memo.contains_key(&h) {
            let found = match discoverer.discover(s, &h)?.outcome {
                Discovery::Container(c) => Some(c),
                Discovery::ClusterReject => None,
            };
            memo.insert(h, found);
        }
        let Some(c) = memo[&h].as_ref() else {
            return Ok(ContainerOutcome::ClusterReject);
        };
        let mass = match c {
            Container::Box(b) => nu.mass_in_box(b),
            Container::Points(p) => nu.mass_of_points(p),
        };
        if mass <= 0.0 {
            return Ok(ContainerOutcome::Reject);
        }
        loop {
            counter += 1;
            if counter > limit {
                return Ok(ContainerOutcome::ClusterReject);
            }
            let x = match c {
                Container::Box(b) => nu.sample_in_box(b, s.rng()),
                Container::Points(p) => nu.sample_in_points(p, s.rng()),
            };
            let Some(x) = x else {
                return Ok(ContainerOutcome::Reject);
            };
            if s.label(&x)? == h {
                out.push(x);
                break;
            }
        }
    }
    Ok(ContainerOutcome::Samples(out))
}
