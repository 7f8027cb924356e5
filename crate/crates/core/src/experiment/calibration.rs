//! Empirical search for the free constants of the testers. Candidates are scored
//! on held-out seeds (`seed + 1_000_000 + i`) so calibration never reuses the
//! seeds of a later `run`.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Op};
use super::families::DistributionFamily;
use super::runner::{alg1_trial, singleton_trial, sub_seed};
use crate::adversarial::{equivalence_budget, identity_budget, tv_equivalence_subtest, tv_identity_subtest, SubtestConstants};
use crate::domain::{DiscreteDistribution, Domain};
use crate::error::{CoreError, Result};
use crate::oracle::{GraphKind, GridDensity};
use crate::random::{Alg1Config, SingletonTesterConfig};

pub const HELD_OUT_OFFSET: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Alg1Entry {
    pub kind: GraphKind,
    pub n: u32,
    pub rho: f64,
    pub eps: f64,
    pub c: f64,
    pub l: f64,
    /// Empirical accept rate on uniform and reject rate on the ε-far zigzag.
    pub accept_rate: f64,
    pub reject_rate: f64,
    pub trials: usize,
    /// Whether both error rates reached the target.
    pub met_target: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingletonEntry {
    pub kind: GraphKind,
    pub n: u32,
    pub rho: f64,
    pub eps: f64,
    pub c_io: f64,
    pub l: f64,
    pub accept_rate: f64,
    pub reject_rate: f64,
    pub trials: usize,
    /// Whether both error rates reached the target.
    pub met_target: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubtestEntry {
    pub c_id: f64,
    pub c_eq: f64,
    pub k: usize,
    pub eps_tv: f64,
    pub target: f64,
    pub id_errors: (f64, f64),
    pub eq_errors: (f64, f64),
    pub trials: usize,
}

impl SubtestEntry {
    pub fn constants(&self) -> SubtestConstants {
        SubtestConstants { c_id: self.c_id, c_eq: self.c_eq }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    #[serde(default)]
    pub alg1: Vec<Alg1Entry>,
    #[serde(default)]
    pub singleton: Vec<SingletonEntry>,
    pub subtests: Option<SubtestEntry>,
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

impl Calibration {
    pub fn from_toml(text: &str) -> Result<Calibration> {
        toml::from_str(text).map_err(|e| CoreError::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("calibration serializes")
    }

    /// Missing file is `CalibrationMissing`; unreadable contents are config errors.
    pub fn load(path: &Path) -> Result<Calibration> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CoreError::CalibrationMissing(format!("{}: {e}", path.display())))?;
        Calibration::from_toml(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml())?;
        Ok(())
    }

    pub fn alg1_for(&self, kind: GraphKind, n: u32, rho: f64, eps: f64) -> Option<&Alg1Entry> {
        self.alg1.iter().find(|e| e.kind == kind && e.n == n && same(e.rho, rho) && same(e.eps, eps))
    }

    pub fn singleton_for(&self, kind: GraphKind, n: u32, rho: f64, eps: f64) -> Option<&SingletonEntry> {
        self.singleton.iter().find(|e| e.kind == kind && e.n == n && same(e.rho, rho) && same(e.eps, eps))
    }
}

/// Fraction of held-out trials where `f(seed)` is true.
fn rate(seed: u64, trials: usize, f: impl Fn(u64) -> Result<bool> + Sync) -> Result<f64> {
    let hits = (0..trials)
        .into_par_iter()
        .map(|i| f(seed.wrapping_add(HELD_OUT_OFFSET + i as u64)))
        .collect::<Result<Vec<bool>>>()?;
    Ok(hits.iter().filter(|&&h| h).count() as f64 / trials.max(1) as f64)
}

fn line_inputs(n: u32, eps: f64) -> Result<(GridDensity, GridDensity)> {
    let dom = Domain::line(n)?;
    let uni = GridDensity::new(dom, DiscreteDistribution::uniform(n as usize))?;
    let far = GridDensity::new(dom, DistributionFamily::Zigzag { eps }.build(&dom)?)?;
    Ok((uni, far))
}

/// Largest `L ∈ {1, 1/2, 1/4, …}` whose ρ floor admits `rho`.
fn admissible_l(floor_at_one: f64, rho: f64) -> f64 {
    let mut l = 1.0;
    while l * floor_at_one > rho && l > 1e-9 {
        l *= 0.5;
    }
    l
}

/// Scans `c = 0.001·2^{k/2}` and keeps the value that maximizes
/// `min(accept rate on uniform, reject rate on zigzag)`; ties keep the smaller c.
pub fn calibrate_alg1(
    kind: GraphKind,
    n: u32,
    rho: f64,
    eps: f64,
    target: f64,
    seed: u64,
    trials: usize,
) -> Result<Alg1Entry> {
    let l = admissible_l(Alg1Config::new(kind, n, eps, rho, 1.0, 1.0).rho_floor(), rho);
    let (uni, far) = line_inputs(n, eps)?;
    let mut best: Option<Alg1Entry> = None;
    for k in 0..40 {
        let c = 0.001 * 2f64.powf(k as f64 / 2.0);
        let cfg = Alg1Config::new(kind, n, eps, rho, c, l);
        cfg.validate()?;
        if cfg.m() > 5e7 {
            break;
        }
        let acc = rate(seed, trials, |s| Ok(alg1_trial(&cfg, &uni, s)?.accept))?;
        let rej = rate(sub_seed(seed, 7), trials, |s| Ok(!alg1_trial(&cfg, &far, s)?.accept))?;
        let met_target = 1.0 - acc <= target && 1.0 - rej <= target;
        let e = Alg1Entry { kind, n, rho, eps, c, l, accept_rate: acc, reject_rate: rej, trials, met_target };
        if best.map_or(true, |b| acc.min(rej) > b.accept_rate.min(b.reject_rate)) {
            best = Some(e);
        }
    }
    best.ok_or_else(|| CoreError::InvalidParameter("no admissible alg1 constant".into()))
}

/// First `c_io = 2^k/256` with both error rates at most `target`; otherwise the
/// best candidate with `met_target = false`.
pub fn calibrate_singleton(
    kind: GraphKind,
    n: u32,
    rho: f64,
    eps: f64,
    target: f64,
    seed: u64,
    trials: usize,
) -> Result<SingletonEntry> {
    let floor = SingletonTesterConfig::new(kind, n, eps, rho, 1.0).rho_floor();
    let l = admissible_l(floor, rho);
    let (uni, far) = line_inputs(n, eps)?;
    let mut best: Option<SingletonEntry> = None;
    for k in 0..=16 {
        let mut cfg = SingletonTesterConfig::new(kind, n, eps, rho, 2f64.powi(k) / 256.0);
        cfg.l = l;
        let acc = rate(seed, trials, |s| Ok(singleton_trial(&cfg, &uni, s)?.accept))?;
        let rej = rate(sub_seed(seed, 7), trials, |s| Ok(!singleton_trial(&cfg, &far, s)?.accept))?;
        let met = 1.0 - acc <= target && 1.0 - rej <= target;
        let e = SingletonEntry { kind, n, rho, eps, c_io: cfg.c_io, l, accept_rate: acc, reject_rate: rej, trials, met_target: met };
        if met {
            return Ok(e);
        }
        if best.map_or(true, |b| acc.min(rej) > b.accept_rate.min(b.reject_rate)) {
            best = Some(e);
        }
    }
    Ok(best.expect("at least one candidate"))
}

/// Validation family for the TV subtests: uniform on `k` elements against a
/// zigzag at distance exactly `eps_tv`.
pub const SUBTEST_K: usize = 64;
pub const SUBTEST_EPS: f64 = 0.2;

fn draw_indices(d: &DiscreteDistribution, m: usize, seed: u64) -> Vec<usize> {
    let mut rng = crate::rng_from_seed(seed);
    let s = d.sampler();
    (0..m).map(|_| s.sample(&mut rng)).collect()
}

fn subtest_errors(c: &SubtestConstants, equivalence: bool, seed: u64, trials: usize) -> Result<(f64, f64)> {
    let k = SUBTEST_K;
    let nu = DiscreteDistribution::uniform(k);
    let far = DistributionFamily::Zigzag { eps: SUBTEST_EPS }.build(&Domain::line(k as u32)?)?;
    let fail = 1.0 / 12.0;
    let run = |mu: &DiscreteDistribution, s: u64| -> Result<bool> {
        if equivalence {
            let m = equivalence_budget(k, SUBTEST_EPS, c);
            let xs = draw_indices(mu, m, sub_seed(s, 1));
            let ys = draw_indices(&nu, m, sub_seed(s, 2));
            tv_equivalence_subtest(&xs, &ys, k, SUBTEST_EPS, fail, c)
        } else {
            let m = identity_budget(k, SUBTEST_EPS, c);
            tv_identity_subtest(&draw_indices(mu, m, sub_seed(s, 1)), &nu, SUBTEST_EPS, fail, c)
        }
    };
    let null_err = rate(seed, trials, |s| Ok(!run(&nu, s)?))?;
    let alt_err = rate(sub_seed(seed, 7), trials, |s| run(&far, s))?;
    Ok((null_err, alt_err))
}

/// Smallest `c = 2^{j/2}/4` per subtest whose null and alternative errors are both
/// at most `target`; falls back to the largest candidate.
pub fn calibrate_subtests(target: f64, seed: u64, trials: usize) -> Result<SubtestEntry> {
    let grid: Vec<f64> = (0..=16).map(|j| 0.25 * 2f64.powf(j as f64 / 2.0)).collect();
    let search = |equivalence: bool| -> Result<(f64, (f64, f64))> {
        let mut last = (0.0, (1.0, 1.0));
        for &c in &grid {
            let consts = SubtestConstants { c_id: c, c_eq: c };
            let errs = subtest_errors(&consts, equivalence, seed, trials)?;
            last = (c, errs);
            if errs.0 <= target && errs.1 <= target {
                break;
            }
        }
        Ok(last)
    };
    let (c_id, id_errors) = search(false)?;
    let (c_eq, eq_errors) = search(true)?;
    Ok(SubtestEntry { c_id, c_eq, k: SUBTEST_K, eps_tv: SUBTEST_EPS, target, id_errors, eq_errors, trials })
}

/// Fills in whatever `cfg` needs and `existing` lacks.
pub fn calibrate(cfg: &ExperimentConfig, existing: Option<Calibration>, trials: usize) -> Result<Calibration> {
    cfg.validate()?;
    let mut cal = existing.unwrap_or_default();
    let target = cfg.target_error;
    for pt in cfg.points() {
        match cfg.op {
            Op::Part2Zeroq => {
                if cal.alg1_for(pt.kind, pt.n, pt.rho, pt.eps).is_none() {
                    cal.alg1.push(calibrate_alg1(pt.kind, pt.n, pt.rho, pt.eps, target, cfg.seed, trials)?);
                }
            }
            Op::Part2Query => {
                if cal.singleton_for(pt.kind, pt.n, pt.rho, pt.eps).is_none() {
                    cal.singleton.push(calibrate_singleton(pt.kind, pt.n, pt.rho, pt.eps, target, cfg.seed, trials)?);
                }
            }
            _ => {
                if cal.subtests.is_none() {
                    cal.subtests = Some(calibrate_subtests(1.0 / 12.0, cfg.seed, trials)?);
                }
            }
        }
    }
    Ok(cal)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_roundtrip_and_lookup() {
        let cal = Calibration {
            alg1: vec![Alg1Entry {
                kind: GraphKind::Cycle,
                n: 100,
                rho: 0.5,
                eps: 0.3,
                c: 0.01,
                l: 1.0,
                accept_rate: 0.9,
                reject_rate: 0.8,
                trials: 10,
                met_target: false,
            }],
            singleton: vec![],
            subtests: Some(SubtestEntry {
                c_id: 4.0,
                c_eq: 2.0,
                k: 64,
                eps_tv: 0.2,
                target: 1.0 / 12.0,
                id_errors: (0.0, 0.05),
                eq_errors: (0.01, 0.0),
                trials: 10,
            }),
        };
        let back = Calibration::from_toml(&cal.to_toml()).unwrap();
        assert_eq!(back, cal);
        assert!(back.alg1_for(GraphKind::Cycle, 100, 0.5, 0.3).is_some());
        assert!(back.alg1_for(GraphKind::Path, 100, 0.5, 0.3).is_none());
        assert_eq!(back.subtests.unwrap().constants().c_eq, 2.0);
    }

    #[test]
    fn missing_file_is_calibration_missing() {
        let e = Calibration::load(Path::new("/nonexistent/cal.toml")).unwrap_err();
        assert!(matches!(e, CoreError::CalibrationMissing(_)));
    }

    #[test]
    fn l_halves_until_admissible() {
        assert_eq!(admissible_l(0.3, 0.5), 1.0);
        assert_eq!(admissible_l(1.6, 0.5), 0.25);
    }

    #[test]
    fn large_subtest_constant_separates() {
        let c = SubtestConstants { c_id: 16.0, c_eq: 16.0 };
        let (a, b) = subtest_errors(&c, false, 3, 40).unwrap();
        assert!(a <= 0.1 && b <= 0.1, "{a} {b}");
    }
}
