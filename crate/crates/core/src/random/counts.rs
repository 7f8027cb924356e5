use serde::Serialize;

use crate::domain::DiscreteDistribution;
use crate::error::{CoreError, Result};
use crate::oracle::{Partition, RandomClusterDraw};
use crate::Rng;

/// Poissonized per-cell counts `X_i = Σ_{γ(j)=i} T_j`, with the element counts
/// `T_j ∼ Poi(m·μ_j)` kept for checks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClusteredSampleCounts {
    pub cells: Vec<u64>,
    pub total: u64,
    pub elements: Vec<u64>,
}

pub fn clustered_poisson_counts(
    mu: &DiscreteDistribution,
    draw: &RandomClusterDraw,
    m: f64,
    rng: &mut Rng,
) -> Result<ClusteredSampleCounts> {
    let g = draw.clustering();
    if mu.len() != draw.n as usize {
        return Err(CoreError::DomainMismatch(format!("{} weights for n={}", mu.len(), draw.n)));
    }
    if !(m >= 0.0) {
        return Err(CoreError::InvalidParameter(format!("m={m}")));
    }
    let elements: Vec<u64> = mu.weights().iter().map(|&w| crate::stats::poisson(m * w, rng)).collect();
    let mut cells = vec![0u64; g.num_cells()];
    for (j, &t) in elements.iter().enumerate() {
        cells[g.cell_of_index(j)] += t;
    }
    Ok(ClusteredSampleCounts { total: elements.iter().sum(), cells, elements })
}

/// `Y = (1/m²) Σ X_i(X_i − 1)`.
pub fn y_statistic(cells: &[u64], m: f64) -> f64 {
    let s: u128 = cells.iter().map(|&x| x as u128 * x.saturating_sub(1) as u128).sum();
    s as f64 / (m * m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::join_matrix;
    use crate::oracle::{draw_random_clustering, GraphKind};

    #[test]
    fn y_from_cells_equals_element_form() {
        let mut rng = crate::rng_from_seed(1);
        for seed in 0..30 {
            let d = draw_random_clustering(GraphKind::Cycle, 40, 0.3, seed).unwrap();
            let mu = DiscreteDistribution::uniform(40);
            let c = clustered_poisson_counts(&mu, &d, 200.0, &mut rng).unwrap();
            let phi = join_matrix(&d);
            let lhs: u128 = c.cells.iter().map(|&x| x as u128 * x.saturating_sub(1) as u128).sum();
            assert_eq!(lhs, phi.quadratic(&c.elements) - c.total as u128);
        }
    }

    #[test]
    fn degenerate_counts() {
        let mut rng = crate::rng_from_seed(2);
        let d = draw_random_clustering(GraphKind::Path, 10, 0.5, 0).unwrap();
        let c = clustered_poisson_counts(&DiscreteDistribution::uniform(10), &d, 0.0, &mut rng).unwrap();
        assert!(c.cells.iter().all(|&x| x == 0));
        let one = RandomClusterDraw::from_kept(GraphKind::Path, 10, 0.5, vec![true; 10], 0).unwrap();
        let xs: Vec<f64> = (0..4000)
            .map(|_| clustered_poisson_counts(&DiscreteDistribution::uniform(10), &one, 7.0, &mut rng).unwrap().cells[0] as f64)
            .collect();
        assert!((crate::stats::mean(&xs) - 7.0).abs() < 0.2);
        assert!((crate::stats::variance(&xs) - 7.0).abs() < 0.7);
    }
}
