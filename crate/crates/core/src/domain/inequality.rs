use super::distribution::{tv_distance, DiscreteDistribution};
use super::emd::emd_exact;
use super::metric::MetricSpace;
use crate::error::{CoreError, Result};
use crate::oracle::clustering::{induced_distribution, Clustering};

pub const DIST_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct EmdTvReport {
    pub emd: f64,
    pub bound: f64,
    pub holds: bool,
}

/// `EMD(μ,ν) ≤ TV(μ|Γ, ν|Γ) + E_μ[diam(Γ_{γ(x)})]`, evaluated exactly.
pub fn emd_tv_diameter_check(
    mu: &DiscreteDistribution,
    nu: &DiscreteDistribution,
    g: &Clustering,
    m: &MetricSpace,
) -> Result<bool> {
    Ok(emd_tv_diameter_report(mu, nu, g, m)?.holds)
}

pub fn emd_tv_diameter_report(
    mu: &DiscreteDistribution,
    nu: &DiscreteDistribution,
    g: &Clustering,
    m: &MetricSpace,
) -> Result<EmdTvReport> {
    if crate::oracle::Partition::domain(g) != &m.domain {
        return Err(CoreError::DomainMismatch("clustering and metric differ".into()));
    }
    let (emd, _) = emd_exact(mu, nu, m)?;
    let tv = tv_distance(&induced_distribution(mu, g)?, &induced_distribution(nu, g)?)?;
    let bound = m.diameter() * tv + g.expected_diameter(mu, m)?;
    Ok(EmdTvReport { emd, bound, holds: emd <= bound + DIST_TOL })
}

/// `Σ_{i=1..t} δ_{i−1}·TV(μ|Γ^(i), ν|Γ^(i)) + E_μ[diam(Γ^(t))]` with `δ_0 = 1`.
/// `deltas[i]` bounds the cell diameters of `levels[i]` (level `i+1`).
pub fn hierarchical_bound(
    mu: &DiscreteDistribution,
    nu: &DiscreteDistribution,
    levels: &[Clustering],
    deltas: &[f64],
    m: &MetricSpace,
) -> Result<f64> {
    if levels.is_empty() || levels.len() != deltas.len() {
        return Err(CoreError::InvalidParameter("one diameter bound per level required".into()));
    }
    let mut total = 0.0;
    let mut prev = m.diameter();
    for (g, &d) in levels.iter().zip(deltas) {
        total += prev * tv_distance(&induced_distribution(mu, g)?, &induced_distribution(nu, g)?)?;
        prev = d;
    }
    total += levels.last().unwrap().expected_diameter(mu, m)?;
    Ok(total)
}

pub fn hierarchical_check(
    mu: &DiscreteDistribution,
    nu: &DiscreteDistribution,
    levels: &[Clustering],
    deltas: &[f64],
    m: &MetricSpace,
) -> Result<EmdTvReport> {
    let (emd, _) = emd_exact(mu, nu, m)?;
    let bound = hierarchical_bound(mu, nu, levels, deltas, m)?;
    Ok(EmdTvReport { emd, bound, holds: emd <= bound + DIST_TOL })
}
