//! Builds the metric, binding and hidden clustering for a guarded grid point.

use rand::Rng as _;

use super::config::{ClusteringSpec, Fixed, GridPoint};
use crate::adversarial::{Binding, Preset};
use crate::domain::{Domain, MetricSpace};
use crate::error::{CoreError, Result};
use crate::oracle::{generate_adversarial_clustering, generate_lattice_partition, Clustering, GenParams, Partition, UniverseTag};

pub fn domain_for(pt: &GridPoint, fixed: &Fixed) -> Result<Domain> {
    if pt.preset.uses_cube() {
        Domain::cube(pt.d, fixed.bits)
    } else if pt.preset == Preset::IntervalsThreshold {
        Domain::line(pt.n)
    } else {
        Domain::grid(pt.n, pt.d)
    }
}

pub fn metric_for(pt: &GridPoint, fixed: &Fixed) -> Result<MetricSpace> {
    let dom = domain_for(pt, fixed)?;
    if pt.preset == Preset::IntervalsThreshold {
        MetricSpace::threshold(dom, fixed.r)
    } else {
        MetricSpace::lp(dom, fixed.p)
    }
}

pub fn binding_for(pt: &GridPoint, fixed: &Fixed) -> Result<Binding> {
    Binding::new(pt.preset, metric_for(pt, fixed)?, Some(fixed.inner_ball))
}

/// Random tiling of an `n × n` grid by horizontal dominoes, vertical dominoes
/// and single points, each chosen with probability 1/3 where it fits.
pub fn random_dominoes(n: u32, seed: u64) -> Result<Clustering> {
    let dom = Domain::grid(n, 2)?;
    let size = dom.enumerable_size()?;
    let mut labels = vec![usize::MAX; size];
    let mut rng = crate::rng_from_seed(seed);
    let mut next = 0;
    for p in dom.points()? {
        let i = dom.index(&p);
        if labels[i] != usize::MAX {
            continue;
        }
        labels[i] = next;
        let (x, y) = (p.get(0), p.get(1));
        match rng.gen_range(0..3) {
            0 if x + 1 < n => {
                let j = dom.index(&p.with(0, x + 1));
                if labels[j] == usize::MAX {
                    labels[j] = next;
                }
            }
            1 if y + 1 < n => {
                let j = dom.index(&p.with(1, y + 1));
                if labels[j] == usize::MAX {
                    labels[j] = next;
                }
            }
            _ => {}
        }
        next += 1;
    }
    Clustering::with_lex_min_reps(dom, &labels)
}

/// Hidden clustering for a trial; `seed` fixes the generator.
pub fn clustering_for(pt: &GridPoint, fixed: &Fixed, seed: u64) -> Result<Box<dyn Partition>> {
    let dom = domain_for(pt, fixed)?;
    Ok(match pt.clustering {
        ClusteringSpec::SingleCell => Box::new(Clustering::single_cell(dom)?),
        ClusteringSpec::Singletons => Box::new(Clustering::singletons(dom)?),
        ClusteringSpec::Dominoes => {
            if dom.dim() != 2 || pt.preset.uses_cube() {
                return Err(CoreError::InvalidParameter("dominoes need a 2D grid".into()));
            }
            Box::new(random_dominoes(pt.n, seed)?)
        }
        ClusteringSpec::Generated => {
            let tag = pt.preset.good_universe(fixed.inner_ball);
            let params = GenParams { n: dom.side(), d: pt.d, cells: fixed.cells, bits: fixed.bits };
            match tag {
                UniverseTag::ConvexInnerBall { .. } | UniverseTag::BoxInnerBall { .. } => {
                    Box::new(generate_lattice_partition(&tag, &params, seed)?)
                }
                _ => Box::new(generate_adversarial_clustering(&tag, &params, seed)?),
            }
        }
    })
}
