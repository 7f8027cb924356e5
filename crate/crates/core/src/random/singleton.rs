use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::learn::learn_cells_by_binary_search;
use crate::adversarial::subtest_runs;
use crate::error::{CoreError, Result};
use crate::oracle::{GraphKind, OracleSession};

/// Parameters of the query-based tester.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingletonTesterConfig {
    pub kind: GraphKind,
    pub n: u32,
    pub eps: f64,
    pub rho: f64,
    /// Cell-count cap `c1·ρn`.
    pub c1: f64,
    /// Proximity `c2·ρ²ε` of the identity step.
    pub c2: f64,
    /// Constant in the lower limit `L·(nε)^{-1/4}` on ρ.
    pub l: f64,
    /// Sample constant of the identity step.
    pub c_io: f64,
    pub fail: f64,
}

impl SingletonTesterConfig {
    pub fn new(kind: GraphKind, n: u32, eps: f64, rho: f64, c_io: f64) -> SingletonTesterConfig {
        SingletonTesterConfig { kind, n, eps, rho, c1: 200.0, c2: 1.0 / 16.0, l: 1.0, c_io, fail: 1.0 / 12.0 }
    }

    pub fn rho_floor(&self) -> f64 {
        self.l * (self.n as f64 * self.eps).powf(-0.25)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || !(self.eps > 0.0 && self.eps <= 1.0) || !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(CoreError::InvalidParameter(format!("n={}, eps={}, rho={}", self.n, self.eps, self.rho)));
        }
        if !(self.c1 > 0.0 && self.c2 > 0.0 && self.c_io > 0.0 && self.fail > 0.0 && self.fail < 0.5) {
            return Err(CoreError::InvalidParameter("constants must be positive".into()));
        }
        if self.rho < self.rho_floor() {
            return Err(CoreError::Precondition(format!("rho {} below floor {}", self.rho, self.rho_floor())));
        }
        Ok(())
    }

    pub fn cell_cap(&self) -> usize {
        (self.c1 * self.rho * self.n as f64).ceil() as usize
    }

    pub fn singleton_cap(&self) -> f64 {
        3.0 * self.rho * self.rho * self.n as f64
    }

    pub fn proximity(&self) -> f64 {
        self.c2 * self.rho * self.rho * self.eps
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SingletonStep {
    CellCap,
    SingletonCap,
    Identity,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SingletonOutcome {
    pub accept: bool,
    /// Step that decided.
    pub step: SingletonStep,
    pub cells: usize,
    pub singletons: usize,
    pub samples: u64,
    pub labels: u64,
}

/// Support split used by the identity statistic: the heaviest element and a
/// light tail of mass at most `δ/8` are set aside.
struct Split {
    max: usize,
    tail: Vec<usize>,
    body: Vec<usize>,
}

fn split(p: &[f64], delta: f64) -> Split {
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| p[a].partial_cmp(&p[b]).unwrap().then(a.cmp(&b)));
    let max = *order.last().unwrap();
    let mut tail = Vec::new();
    let mut mass = 0.0;
    for &i in &order[..order.len() - 1] {
        if mass + p[i] > delta / 8.0 {
            break;
        }
        mass += p[i];
        tail.push(i);
    }
    let body = order[tail.len()..order.len() - 1].to_vec();
    Split { max, tail, body }
}

/// `c·max{1/δ, ‖p_body‖_{2/3}/δ²}`.
pub fn instance_optimal_budget(p: &[f64], delta: f64, c: f64) -> f64 {
    if p.len() <= 1 {
        return 0.0;
    }
    let sp = split(p, delta);
    let norm = sp.body.iter().map(|&i| p[i].powf(2.0 / 3.0)).sum::<f64>().powf(1.5);
    c * (1.0 / delta).max(norm / (delta * delta))
}

/// One Poissonized run at mean `m`: rejects on a heavy tail (`X_tail ≥ mδ/4`)
/// or when `Σ_body ((X−mp)² − X)/p^{2/3}` exceeds `m²δ²/(8Σ_body p^{2/3})`.
pub fn io_statistic_accepts(counts: &[u64], m: f64, p: &[f64], delta: f64) -> bool {
    if p.len() <= 1 {
        return true;
    }
    let sp = split(p, delta);
    let _ = sp.max;
    let tail: u64 = sp.tail.iter().map(|&i| counts[i]).sum();
    if tail as f64 >= m * delta / 4.0 {
        return false;
    }
    let s: f64 = sp.body.iter().map(|&i| p[i].powf(2.0 / 3.0)).sum();
    if s == 0.0 {
        return true;
    }
    let z: f64 = sp
        .body
        .iter()
        .map(|&i| {
            let x = counts[i] as f64;
            ((x - m * p[i]).powi(2) - x) / p[i].powf(2.0 / 3.0)
        })
        .sum();
    z <= m * m * delta * delta / (8.0 * s)
}

/// Identity test against explicit `p` at proximity `δ`: majority of
/// Poissonized runs, each drawing counts through `draw(m)`.
pub fn instance_optimal_identity(
    mut draw: impl FnMut(f64) -> Result<Vec<u64>>,
    p: &[f64],
    delta: f64,
    fail: f64,
    c: f64,
) -> Result<bool> {
    if p.len() <= 1 {
        return Ok(true);
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(CoreError::InvalidParameter(format!("proximity {delta}")));
    }
    let m = instance_optimal_budget(p, delta, c);
    let runs = subtest_runs(fail);
    let mut yes = 0;
    for _ in 0..runs {
        let counts = draw(m)?;
        if counts.len() != p.len() {
            return Err(CoreError::DomainMismatch(format!("{} counts for {} elements", counts.len(), p.len())));
        }
        yes += io_statistic_accepts(&counts, m, p, delta) as usize;
    }
    Ok(2 * yes > runs)
}

/// Learns all cells with LABEL, then tests input 0 against uniform on the
/// coarsening that keeps singleton cells and merges everything else.
pub fn singleton_tester(s: &mut OracleSession<'_>, cfg: &SingletonTesterConfig) -> Result<SingletonOutcome> {
    cfg.validate()?;
    if s.domain().size() != cfg.n as u64 || s.domain().dim() != 1 {
        return Err(CoreError::DomainMismatch(format!("session domain is not [{}]", cfg.n)));
    }
    let (samp0, lab0) = (s.samp_count(0), s.label_count());
    let finish = |s: &OracleSession<'_>, accept, step, cells, singletons| SingletonOutcome {
        accept,
        step,
        cells,
        singletons,
        samples: s.samp_count(0) - samp0,
        labels: s.label_count() - lab0,
    };
    let Some(learned) = learn_cells_by_binary_search(s, cfg.kind, cfg.cell_cap()) else {
        return Ok(finish(s, false, SingletonStep::CellCap, cfg.cell_cap() + 1, 0));
    };
    let singles: Vec<_> = learned.runs.iter().filter(|r| r.1 == 1).map(|r| r.2).collect();
    if singles.len() as f64 > cfg.singleton_cap() {
        return Ok(finish(s, false, SingletonStep::SingletonCap, learned.len(), singles.len()));
    }
    let n = cfg.n as f64;
    let rest = n - singles.len() as f64;
    let mut p = vec![1.0 / n; singles.len()];
    if rest > 0.0 {
        p.push(rest / n);
    }
    let index: HashMap<_, _> = singles.iter().enumerate().map(|(i, r)| (*r, i)).collect();
    let other = singles.len();
    let k = p.len();
    let accept = instance_optimal_identity(
        |m| {
            let mut counts = vec![0u64; k];
            for (rep, c) in s.samp_poissonized(0, m)? {
                counts[index.get(&rep).copied().unwrap_or(other)] += c;
            }
            Ok(counts)
        },
        &p,
        cfg.proximity(),
        cfg.fail,
        cfg.c_io,
    )?;
    Ok(finish(s, accept, SingletonStep::Identity, learned.len(), singles.len()))
}
