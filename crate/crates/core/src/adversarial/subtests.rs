//! TV identity/equivalence statistics and the hierarchical EMD testers built on them.

use serde::{Deserialize, Serialize};

use super::hierarchy::HierarchicalClustering;
use crate::domain::{DiscreteDistribution, Point};
use crate::error::{CoreError, Result};
use crate::oracle::Density;

/// Sample-size constants: identity uses `c_id·√k/ε²`, equivalence
/// `c_eq·max(√k/ε², k^{2/3}/ε^{4/3})`. Set by calibration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubtestConstants {
    pub c_id: f64,
    pub c_eq: f64,
}

impl Default for SubtestConstants {
    fn default() -> Self {
        SubtestConstants { c_id: 1.0, c_eq: 1.0 }
    }
}

pub fn identity_budget(k: usize, eps_tv: f64, c: &SubtestConstants) -> usize {
    (c.c_id * (k as f64).sqrt() / (eps_tv * eps_tv)).ceil().max(1.0) as usize
}

pub fn equivalence_budget(k: usize, eps_tv: f64, c: &SubtestConstants) -> usize {
    let k = k as f64;
    let a = k.sqrt() / (eps_tv * eps_tv);
    let b = k.powf(2.0 / 3.0) / eps_tv.powf(4.0 / 3.0);
    (c.c_eq * a.max(b)).ceil().max(1.0) as usize
}

/// Majority runs taking a 1/12-error test to `fail` (Hoeffding: `e^{-2r(5/12)²}`).
pub fn subtest_runs(fail: f64) -> usize {
    if fail >= 1.0 / 12.0 {
        return 1;
    }
    let r = ((1.0 / fail).ln() / (2.0 * (5.0f64 / 12.0).powi(2))).ceil() as usize;
    r | 1
}

/// Chi-square style identity statistic on counts; `true` = accept. Cells with
/// `ν_i < ε/(50k)` are left out of the sum; any sample on a `ν = 0` cell rejects.
pub fn identity_statistic_accepts(counts: &[u64], nu: &[f64], eps_tv: f64) -> bool {
    let m: u64 = counts.iter().sum();
    let m = m as f64;
    let k = nu.iter().filter(|&&p| p > 0.0).count().max(1) as f64;
    let cut = eps_tv / (50.0 * k);
    let mut z = 0.0;
    for (&x, &p) in counts.iter().zip(nu) {
        if p <= 0.0 {
            if x > 0 {
                return false;
            }
            continue;
        }
        if p < cut {
            continue;
        }
        let x = x as f64;
        z += ((x - m * p).powi(2) - x) / (m * p);
    }
    z <= m * eps_tv * eps_tv / 2.0
}

/// Closeness statistic `Σ((X−Y)² − X − Y)/(X+Y)`; `true` = accept.
pub fn equivalence_statistic_accepts(x: &[u64], y: &[u64], eps_tv: f64) -> bool {
    let m = (x.iter().sum::<u64>() + y.iter().sum::<u64>()) as f64 / 2.0;
    let mut z = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        if a + b == 0 {
            continue;
        }
        let (a, b) = (a as f64, b as f64);
        z += ((a - b).powi(2) - a - b) / (a + b);
    }
    z <= m * eps_tv * eps_tv
}

fn counts_of(samples: &[usize], k: usize) -> Result<Vec<u64>> {
    let mut c = vec![0u64; k];
    for &s in samples {
        *c.get_mut(s).ok_or_else(|| CoreError::OutOfDomain(format!("sample index {s} ≥ {k}")))? += 1;
    }
    Ok(c)
}

fn majority(votes: impl Iterator<Item = bool>) -> bool {
    let (mut yes, mut n) = (0, 0);
    for v in votes {
        n += 1;
        yes += v as usize;
    }
    2 * yes > n
}

/// Identity test of sampled indices against `nu` at TV distance `eps_tv` with
/// failure `fail`. Needs `runs·m` samples; fewer is an error.
pub fn tv_identity_subtest(
    samples: &[usize],
    nu: &DiscreteDistribution,
    eps_tv: f64,
    fail: f64,
    c: &SubtestConstants,
) -> Result<bool> {
    let k = nu.support().len().max(1);
    let m = identity_budget(k, eps_tv, c);
    let r = subtest_runs(fail);
    if samples.len() < r * m {
        return Err(CoreError::InsufficientSamples { have: samples.len(), need: r * m });
    }
    let mut votes = Vec::with_capacity(r);
    for chunk in samples.chunks(m).take(r) {
        votes.push(identity_statistic_accepts(&counts_of(chunk, nu.len())?, nu.weights(), eps_tv));
    }
    Ok(majority(votes.into_iter()))
}

pub fn tv_equivalence_subtest(
    xs: &[usize],
    ys: &[usize],
    k: usize,
    eps_tv: f64,
    fail: f64,
    c: &SubtestConstants,
) -> Result<bool> {
    let m = equivalence_budget(k, eps_tv, c);
    let r = subtest_runs(fail);
    let have = xs.len().min(ys.len());
    if have < r * m {
        return Err(CoreError::InsufficientSamples { have, need: r * m });
    }
    let mut votes = Vec::with_capacity(r);
    for (a, b) in xs.chunks(m).zip(ys.chunks(m)).take(r) {
        votes.push(equivalence_statistic_accepts(&counts_of(a, k)?, &counts_of(b, k)?, eps_tv));
    }
    Ok(majority(votes.into_iter()))
}

/// Per-level TV parameters and sample sizes of a hierarchical EMD test.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmdPlan {
    /// `(level, cells, eps_tv, m)` for levels that can witness a far pair.
    pub levels: Vec<(usize, usize, f64, usize)>,
    pub runs: usize,
    /// Samples needed per input: `runs · max m`.
    pub total: usize,
}

impl EmdPlan {
    pub fn new(h: &HierarchicalClustering, eps_emd: f64, c: &SubtestConstants, equivalence: bool) -> EmdPlan {
        let t = h.t();
        let runs = subtest_runs(1.0 / (3.0 * t as f64));
        let mut levels = Vec::new();
        for i in 0..t {
            let eps_tv = eps_emd / (2.0 * t as f64 * h.delta_before(i));
            if eps_tv >= 1.0 {
                // TV never exceeds 1, so this level cannot witness
                continue;
            }
            let k = h.nonempty_cells(i);
            let m = if equivalence { equivalence_budget(k, eps_tv, c) } else { identity_budget(k, eps_tv, c) };
            levels.push((i, k, eps_tv, m));
        }
        let max_m = levels.iter().map(|l| l.3).max().unwrap_or(0);
        EmdPlan { levels, runs, total: runs * max_m }
    }
}

/// EMD identity tester over a hierarchy: level `i` runs a TV identity test at
/// `ε/(2tδ_{i−1})`, boosted to failure `1/(3t)`; any rejecting level rejects.
/// All levels read the same sample pool. `true` = accept.
pub fn emd_identity_tester(
    samples: &[Point],
    nu: &dyn Density,
    h: &HierarchicalClustering,
    eps_emd: f64,
    c: &SubtestConstants,
) -> Result<bool> {
    let plan = EmdPlan::new(h, eps_emd, c, false);
    if samples.len() < plan.total {
        return Err(CoreError::InsufficientSamples { have: samples.len(), need: plan.total });
    }
    for &(i, _, eps_tv, m) in &plan.levels {
        let nu_i = h.induced(i, nu);
        let idx: Vec<usize> = samples.iter().map(|p| h.cell_of(i, p)).collect();
        let votes = idx
            .chunks(m)
            .take(plan.runs)
            .map(|chunk| counts_of(chunk, nu_i.len()).map(|cnt| identity_statistic_accepts(&cnt, &nu_i, eps_tv)))
            .collect::<Result<Vec<bool>>>()?;
        if !majority(votes.into_iter()) {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn emd_equivalence_tester(
    xs: &[Point],
    ys: &[Point],
    h: &HierarchicalClustering,
    eps_emd: f64,
    c: &SubtestConstants,
) -> Result<bool> {
    let plan = EmdPlan::new(h, eps_emd, c, true);
    let have = xs.len().min(ys.len());
    if have < plan.total {
        return Err(CoreError::InsufficientSamples { have, need: plan.total });
    }
    for &(i, _, eps_tv, m) in &plan.levels {
        let k = h.num_cells(i);
        let a: Vec<usize> = xs.iter().map(|p| h.cell_of(i, p)).collect();
        let b: Vec<usize> = ys.iter().map(|p| h.cell_of(i, p)).collect();
        let mut votes = Vec::with_capacity(plan.runs);
        for (ca, cb) in a.chunks(m).zip(b.chunks(m)).take(plan.runs) {
            votes.push(equivalence_statistic_accepts(&counts_of(ca, k)?, &counts_of(cb, k)?, eps_tv));
        }
        if !majority(votes.into_iter()) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Identity tester with the dyadic hierarchy of the sample domain.
pub fn emd_identity_tester_hypergrid(
    samples: &[Point],
    nu: &dyn Density,
    eps_emd: f64,
    c: &SubtestConstants,
) -> Result<bool> {
    let h = HierarchicalClustering::dyadic(*nu.domain(), eps_emd)?;
    emd_identity_tester(samples, nu, &h, eps_emd, c)
}

pub fn emd_equivalence_tester_hypergrid(
    xs: &[Point],
    ys: &[Point],
    domain: crate::domain::Domain,
    eps_emd: f64,
    c: &SubtestConstants,
) -> Result<bool> {
    let h = HierarchicalClustering::dyadic(domain, eps_emd)?;
    emd_equivalence_tester(xs, ys, &h, eps_emd, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn draw(nu: &DiscreteDistribution, m: usize, rng: &mut crate::Rng) -> Vec<usize> {
        let s = nu.sampler();
        (0..m).map(|_| s.sample(rng)).collect()
    }

    #[test]
    fn identity_accepts_null_rejects_far() {
        let mut rng = crate::rng_from_seed(4);
        let c = SubtestConstants { c_id: 4.0, c_eq: 4.0 };
        let nu = DiscreteDistribution::uniform(64);
        // TV 0.4: half the elements get 1.8/64, half 0.2/64
        let far = DiscreteDistribution::from_unnormalized((0..64).map(|i| if i % 2 == 0 { 1.8 } else { 0.2 }).collect())
            .unwrap();
        let m = identity_budget(64, 0.2, &c);
        let (mut acc, mut rej) = (0, 0);
        for _ in 0..200 {
            acc += tv_identity_subtest(&draw(&nu, m, &mut rng), &nu, 0.2, 0.1, &c).unwrap() as usize;
            rej += !tv_identity_subtest(&draw(&far, m, &mut rng), &nu, 0.2, 0.1, &c).unwrap() as usize;
        }
        assert!(acc >= 180 && rej >= 180, "acc {acc} rej {rej}");
        assert!(tv_identity_subtest(&[0, 1], &nu, 0.2, 0.1, &c).is_err());
        let pm = DiscreteDistribution::point_mass(8, 3);
        assert!(tv_identity_subtest(&vec![3; 10_000], &pm, 0.2, 0.1, &c).unwrap());
    }

    #[test]
    fn equivalence_accepts_null_rejects_far() {
        let mut rng = crate::rng_from_seed(5);
        let c = SubtestConstants { c_id: 4.0, c_eq: 4.0 };
        let nu = DiscreteDistribution::uniform(64);
        let far = DiscreteDistribution::from_unnormalized((0..64).map(|i| if i % 2 == 0 { 1.8 } else { 0.2 }).collect())
            .unwrap();
        let m = equivalence_budget(64, 0.2, &c);
        let (mut acc, mut rej) = (0, 0);
        for _ in 0..100 {
            acc += tv_equivalence_subtest(&draw(&nu, m, &mut rng), &draw(&nu, m, &mut rng), 64, 0.2, 0.1, &c).unwrap()
                as usize;
            rej += !tv_equivalence_subtest(&draw(&far, m, &mut rng), &draw(&nu, m, &mut rng), 64, 0.2, 0.1, &c).unwrap()
                as usize;
        }
        assert!(acc >= 90 && rej >= 90, "acc {acc} rej {rej}");
    }

    #[test]
    fn runs_are_odd_and_grow() {
        assert_eq!(subtest_runs(0.1), 1);
        assert!(subtest_runs(0.001) > subtest_runs(0.01));
        assert_eq!(subtest_runs(0.01) % 2, 1);
    }
}
