use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::calibration::Calibration;
use super::config::{ExperimentConfig, GridPoint, Op};
use super::instances::{binding_for, clustering_for, domain_for};
use super::records::{ExperimentRecord, TimingRecord};
use crate::adversarial::{
    diameter_guarded_equivalence, diameter_guarded_identity, emd_identity_tester, EmdPlan, GuardParams,
};
use crate::domain::{emd_exact, tv_distance, DiscreteDistribution, Domain};
use crate::error::{CoreError, Result};
use crate::oracle::{draw_random_clustering, Density, GraphKind, GridDensity, OracleSession};
use crate::random::{algorithm1, singleton_tester, Alg1Config, Alg1Outcome, SingletonOutcome, SingletonTesterConfig};
use crate::stats::wilson_interval;

/// Independent sub-seed `tag` of a trial seed (splitmix64 finalizer).
pub fn sub_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed.wrapping_add(tag.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One run of the zero-query tester on a fresh clustering.
pub fn alg1_trial(cfg: &Alg1Config, mu: &GridDensity, seed: u64) -> Result<Alg1Outcome> {
    let draw = draw_random_clustering(cfg.kind, cfg.n, cfg.rho, sub_seed(seed, 1))?;
    let mut s = OracleSession::new(draw.clustering(), vec![mu], sub_seed(seed, 2))?;
    let o = algorithm1(&mut s, cfg)?;
    assert_eq!(s.label_count(), 0, "the zero-query tester issued label queries");
    Ok(o)
}

pub fn singleton_trial(cfg: &SingletonTesterConfig, mu: &GridDensity, seed: u64) -> Result<SingletonOutcome> {
    let draw = draw_random_clustering(cfg.kind, cfg.n, cfg.rho, sub_seed(seed, 1))?;
    let mut s = OracleSession::new(draw.clustering(), vec![mu], sub_seed(seed, 2))?;
    singleton_tester(&mut s, cfg)
}

/// Per-point inputs shared by all trials.
struct Prepared {
    mu: GridDensity,
    nu: GridDensity,
    tv: Option<f64>,
    emd: Option<f64>,
}

fn prepare(cfg: &ExperimentConfig, pt: &GridPoint) -> Result<Prepared> {
    let dom = match cfg.op {
        Op::Part2Zeroq | Op::Part2Query => Domain::line(pt.n)?,
        _ => domain_for(pt, &cfg.fixed)?,
    };
    let mu_dist = pt.family.build(&dom)?;
    let nu_dist = DiscreteDistribution::uniform(mu_dist.len());
    let tv = Some(tv_distance(&mu_dist, &nu_dist)?);
    let emd = match cfg.op {
        Op::Part2Zeroq | Op::Part2Query => None,
        _ if mu_dist.len() <= 256 => {
            let m = super::instances::metric_for(pt, &cfg.fixed)?;
            Some(emd_exact(&mu_dist, &nu_dist, &m)?.0)
        }
        _ => None,
    };
    Ok(Prepared { mu: GridDensity::new(dom, mu_dist)?, nu: GridDensity::new(dom, nu_dist)?, tv, emd })
}

fn guard_params(cfg: &ExperimentConfig, pt: &GridPoint, default_diam: f64) -> Result<GuardParams> {
    let gp = GuardParams {
        eps: pt.eps,
        diam: cfg.fixed.diam.unwrap_or(default_diam),
        fail: cfg.fixed.fail,
        beta: 0.25,
        b: 1.0 / 24.0,
    };
    gp.validate()?;
    Ok(gp)
}

/// Fails with `CalibrationMissing` unless every point has the constants its op needs.
pub fn check_calibration(cfg: &ExperimentConfig, calib: Option<&Calibration>) -> Result<()> {
    let missing = |what: String| Err(CoreError::CalibrationMissing(what));
    for pt in cfg.points() {
        match cfg.op {
            Op::Part2Zeroq => {
                if calib.and_then(|c| c.alg1_for(pt.kind, pt.n, pt.rho, pt.eps)).is_none() {
                    return missing(format!("alg1 constants for {:?} n={} rho={} eps={}", pt.kind, pt.n, pt.rho, pt.eps));
                }
            }
            Op::Part2Query => {
                if calib.and_then(|c| c.singleton_for(pt.kind, pt.n, pt.rho, pt.eps)).is_none() {
                    return missing(format!("singleton constants for {:?} n={} rho={} eps={}", pt.kind, pt.n, pt.rho, pt.eps));
                }
            }
            _ => {
                if calib.and_then(|c| c.subtests.as_ref()).is_none() {
                    return missing("subtest sample constants".into());
                }
            }
        }
    }
    Ok(())
}

fn record(cfg: &ExperimentConfig, hash: &str, idx: usize, pt: &GridPoint, trial: usize, seed: u64) -> ExperimentRecord {
    ExperimentRecord {
        config_hash: hash.to_string(),
        point: idx,
        trial,
        seed,
        op: cfg.op.name().into(),
        n: pt.n,
        d: pt.d,
        eps: pt.eps,
        rho: pt.rho,
        kind: match pt.kind {
            GraphKind::Path => "path".into(),
            GraphKind::Cycle => "cycle".into(),
        },
        preset: pt.preset.name().into(),
        family: pt.family.label(),
        clustering: pt.clustering.name().into(),
        verdict: String::new(),
        stat: None,
        threshold: None,
        tv: None,
        emd: None,
        samples: 0,
        labels: 0,
    }
}

fn run_trial(
    cfg: &ExperimentConfig,
    calib: Option<&Calibration>,
    pt: &GridPoint,
    prep: &Prepared,
    mut rec: ExperimentRecord,
) -> Result<ExperimentRecord> {
    let seed = rec.seed;
    rec.tv = prep.tv;
    rec.emd = prep.emd;
    let consts = || calib.and_then(|c| c.subtests.as_ref()).map(|s| s.constants());
    match cfg.op {
        Op::Part2Zeroq => {
            let cal = calib.and_then(|c| c.alg1_for(pt.kind, pt.n, pt.rho, pt.eps)).expect("checked");
            let acfg = Alg1Config::new(pt.kind, pt.n, pt.eps, pt.rho, cal.c, cal.l);
            let o = alg1_trial(&acfg, &prep.mu, seed)?;
            rec.verdict = if o.accept { "ACCEPT" } else { "REJECT" }.into();
            rec.stat = Some(o.y);
            rec.threshold = Some(o.threshold);
            rec.samples = o.samples;
        }
        Op::Part2Query => {
            let cal = calib.and_then(|c| c.singleton_for(pt.kind, pt.n, pt.rho, pt.eps)).expect("checked");
            let mut scfg = SingletonTesterConfig::new(pt.kind, pt.n, pt.eps, pt.rho, cal.c_io);
            scfg.l = cal.l;
            let o = singleton_trial(&scfg, &prep.mu, seed)?;
            rec.verdict = if o.accept { "ACCEPT" } else { "REJECT" }.into();
            rec.stat = Some(o.singletons as f64);
            rec.threshold = Some(scfg.singleton_cap());
            rec.samples = o.samples;
            rec.labels = o.labels;
        }
        Op::GuardedIdentity | Op::GuardedEquivalence => {
            let binding = binding_for(pt, &cfg.fixed)?;
            let gp = guard_params(cfg, pt, binding.default_diam(pt.eps))?;
            let part = clustering_for(pt, &cfg.fixed, sub_seed(seed, 1))?;
            let c = consts().expect("checked");
            let v = if cfg.op == Op::GuardedIdentity {
                let mut s = OracleSession::new(part.as_ref(), vec![&prep.mu], sub_seed(seed, 2))?;
                diameter_guarded_identity(&mut s, &prep.nu, &gp, &binding, &c)?
            } else {
                let mut s = OracleSession::new(part.as_ref(), vec![&prep.mu, &prep.nu], sub_seed(seed, 2))?;
                diameter_guarded_equivalence(&mut s, &gp, &binding, &c)?
            };
            rec.verdict = v.verdict.to_string();
            rec.samples = v.resources.total_samples();
            rec.labels = v.resources.labels;
        }
        Op::EmdIdentity => {
            let metric = super::instances::metric_for(pt, &cfg.fixed)?;
            let h = crate::adversarial::HierarchicalClustering::for_metric(&metric, pt.eps)?;
            let c = consts().expect("checked");
            let m = EmdPlan::new(&h, pt.eps, &c, false).total;
            let mut rng = crate::rng_from_seed(sub_seed(seed, 2));
            let xs: Vec<_> = (0..m).map(|_| prep.mu.sample(&mut rng)).collect();
            let ok = emd_identity_tester(&xs, &prep.nu, &h, pt.eps, &c)?;
            rec.verdict = if ok { "ACCEPT" } else { "REJECT" }.into();
            rec.samples = m as u64;
        }
    }
    Ok(rec)
}

/// Runs the grid × trials, handing each finished grid point to `sink` in
/// order. Trial `i` of every point uses seed `cfg.seed + i`.
pub fn run_experiment_with(
    cfg: &ExperimentConfig,
    calib: Option<&Calibration>,
    jobs: usize,
    mut sink: impl FnMut(&[ExperimentRecord], &[TimingRecord]) -> Result<()>,
) -> Result<()> {
    cfg.validate()?;
    // Zero trials never touch the constants, so an empty run needs no calibration.
    if cfg.trials > 0 {
        check_calibration(cfg, calib)?;
    }
    let hash = cfg.hash();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CoreError::InvalidParameter(e.to_string()))?;
    for (idx, pt) in cfg.points().iter().enumerate() {
        let prep = prepare(cfg, pt)?;
        let results: Vec<Result<(ExperimentRecord, TimingRecord)>> = pool.install(|| {
            (0..cfg.trials)
                .into_par_iter()
                .map(|trial| {
                    let seed = cfg.seed.wrapping_add(trial as u64);
                    let start = Instant::now();
                    let rec = run_trial(cfg, calib, pt, &prep, record(cfg, &hash, idx, pt, trial, seed))?;
                    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
                    Ok((rec, TimingRecord { point: idx, trial, wall_ms }))
                })
                .collect()
        });
        let (recs, times): (Vec<_>, Vec<_>) = results.into_iter().collect::<Result<Vec<_>>>()?.into_iter().unzip();
        sink(&recs, &times)?;
    }
    Ok(())
}

pub fn run_experiment(cfg: &ExperimentConfig, calib: Option<&Calibration>, jobs: usize) -> Result<Vec<ExperimentRecord>> {
    let mut all = Vec::new();
    run_experiment_with(cfg, calib, jobs, |r, _| {
        all.extend_from_slice(r);
        Ok(())
    })?;
    Ok(all)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub point: usize,
    pub label: String,
    pub trials: u64,
    pub accept: u64,
    pub reject: u64,
    pub cluster_reject: u64,
    pub mean_samples: f64,
    pub mean_labels: f64,
}

impl SummaryRow {
    pub fn rate(&self, count: u64) -> (f64, f64, f64) {
        let p = if self.trials == 0 { f64::NAN } else { count as f64 / self.trials as f64 };
        let (lo, hi) = wilson_interval(count, self.trials);
        (p, lo, hi)
    }
}

pub struct Summary(pub Vec<SummaryRow>);

pub fn summarize(records: &[ExperimentRecord]) -> Summary {
    let mut rows: Vec<SummaryRow> = Vec::new();
    for r in records {
        if rows.last().map_or(true, |x| x.point != r.point) {
            rows.push(SummaryRow {
                point: r.point,
                label: format!("{} n={} d={} eps={} rho={} {} {} {} {}", r.op, r.n, r.d, r.eps, r.rho, r.kind, r.preset, r.family, r.clustering),
                trials: 0,
                accept: 0,
                reject: 0,
                cluster_reject: 0,
                mean_samples: 0.0,
                mean_labels: 0.0,
            });
        }
        let row = rows.last_mut().unwrap();
        row.trials += 1;
        match r.verdict.as_str() {
            "ACCEPT" => row.accept += 1,
            "REJECT" => row.reject += 1,
            _ => row.cluster_reject += 1,
        }
        row.mean_samples += r.samples as f64;
        row.mean_labels += r.labels as f64;
    }
    for row in &mut rows {
        row.mean_samples /= row.trials as f64;
        row.mean_labels /= row.trials as f64;
    }
    Summary(rows)
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.0 {
            writeln!(f, "[{}] {}", r.point, r.label)?;
            for (name, c) in [("accept", r.accept), ("reject", r.reject), ("cluster_reject", r.cluster_reject)] {
                let (p, lo, hi) = r.rate(c);
                writeln!(f, "    {name:<15} {c:>5}/{:<5} {p:.3}  [{lo:.3}, {hi:.3}]", r.trials)?;
            }
            writeln!(f, "    mean samples {:.1}, mean labels {:.1}", r.mean_samples, r.mean_labels)?;
        }
        Ok(())
    }
}
