use serde::Serialize;

use super::clustering::Partition;
use super::density::Density;
use crate::domain::Point;
use crate::error::{CoreError, Result};
use crate::{rng_from_seed, Rng};

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum TraceEvent {
    Samp { which: usize, answer: Vec<u32> },
    Label { query: Vec<u32>, answer: Vec<u32> },
}

/// Counters snapshot.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Resources {
    pub samples: Vec<u64>,
    pub labels: u64,
}

impl Resources {
    pub fn total_samples(&self) -> u64 {
        self.samples.iter().sum()
    }
}

/// SAMP/LABEL access to a hidden clustering with exact call accounting.
/// Testers also draw their own coin flips from the session RNG so that a run is
/// a function of the seed.
pub struct OracleSession<'a> {
    partition: &'a dyn Partition,
    inputs: Vec<&'a dyn Density>,
    rng: Rng,
    samp_counts: Vec<u64>,
    label_count: u64,
    trace: Option<Vec<TraceEvent>>,
}

impl<'a> OracleSession<'a> {
    pub fn new(partition: &'a dyn Partition, inputs: Vec<&'a dyn Density>, seed: u64) -> Result<OracleSession<'a>> {
        if inputs.is_empty() || inputs.len() > 2 {
            return Err(CoreError::InvalidParameter(format!("{} inputs; expected one or two", inputs.len())));
        }
        for d in &inputs {
            if d.domain() != partition.domain() {
                return Err(CoreError::DomainMismatch("input density and clustering differ".into()));
            }
        }
        let k = inputs.len();
        Ok(OracleSession {
            partition,
            inputs,
            rng: rng_from_seed(seed),
            samp_counts: vec![0; k],
            label_count: 0,
            trace: None,
        })
    }

    pub fn enable_trace(&mut self) {
        self.trace = Some(Vec::new());
    }

    pub fn trace(&self) -> Option<&[TraceEvent]> {
        self.trace.as_deref()
    }

    pub fn trace_json_lines(&self) -> String {
        let mut out = String::new();
        for ev in self.trace.iter().flatten() {
            out.push_str(&serde_json::to_string(ev).expect("trace serializes"));
            out.push('\n');
        }
        out
    }

    pub fn partition(&self) -> &'a dyn Partition {
        self.partition
    }

    pub fn domain(&self) -> &crate::domain::Domain {
        self.partition.domain()
    }

    pub fn num_inputs(&self) -> usize {
        self.inputs.len()
    }

    pub fn input(&self, which: usize) -> Result<&'a dyn Density> {
        self.inputs.get(which).copied().ok_or(CoreError::InvalidDistributionId(which))
    }

    pub fn rng(&mut self) -> &mut Rng {
        &mut self.rng
    }

    pub fn samp_count(&self, which: usize) -> u64 {
        self.samp_counts.get(which).copied().unwrap_or(0)
    }

    pub fn label_count(&self) -> u64 {
        self.label_count
    }

    pub fn resources(&self) -> Resources {
        Resources { samples: self.samp_counts.clone(), labels: self.label_count }
    }

    /// Returns `rep(γ(x))` for a fresh `x ∼ μ_which`.
    pub fn samp(&mut self, which: usize) -> Result<Point> {
        let density = self.input(which)?;
        let x = density.sample(&mut self.rng);
        let r = self.partition.rep(self.partition.cell_of(&x));
        self.samp_counts[which] += 1;
        if let Some(t) = self.trace.as_mut() {
            t.push(TraceEvent::Samp { which, answer: r.coords().to_vec() });
        }
        Ok(r)
    }

    /// Returns `rep(γ(x))`.
    pub fn label(&mut self, x: &Point) -> Result<Point> {
        self.partition.domain().check(x)?;
        let r = self.partition.rep(self.partition.cell_of(x));
        self.label_count += 1;
        if let Some(t) = self.trace.as_mut() {
            t.push(TraceEvent::Label { query: x.coords().to_vec(), answer: r.coords().to_vec() });
        }
        Ok(r)
    }

    /// Label query on integer coordinates; `None` (and no charge) outside the domain.
    pub fn label_i64(&mut self, c: &[i64]) -> Option<Point> {
        let p = self.partition.domain().point_from_i64(c)?;
        self.label(&p).ok()
    }

    /// Poissonized SAMP: every domain element `j` contributes `Poi(m·μ_j)` draws,
    /// reported as `(representative, count)` pairs; charged as that many calls.
    pub fn samp_poissonized(&mut self, which: usize, m: f64) -> Result<Vec<(Point, u64)>> {
        let density = self.input(which)?;
        let dist = density
            .as_discrete()
            .ok_or_else(|| CoreError::Unsupported("Poissonized sampling needs an enumerable domain".into()))?;
        let domain = *self.partition.domain();
        let mut per_cell: std::collections::BTreeMap<usize, u64> = std::collections::BTreeMap::new();
        let mut total = 0u64;
        for (j, &w) in dist.weights().iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            let t = crate::stats::poisson(m * w, &mut self.rng);
            if t > 0 {
                *per_cell.entry(self.partition.cell_of(&domain.point(j))).or_insert(0) += t;
                total += t;
            }
        }
        self.samp_counts[which] += total;
        let out: Vec<(Point, u64)> = per_cell.into_iter().map(|(c, t)| (self.partition.rep(c), t)).collect();
        if let Some(tr) = self.trace.as_mut() {
            for (r, t) in &out {
                for _ in 0..*t {
                    tr.push(TraceEvent::Samp { which, answer: r.coords().to_vec() });
                }
            }
        }
        Ok(out)
    }
}
