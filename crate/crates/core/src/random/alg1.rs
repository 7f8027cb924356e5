use serde::{Deserialize, Serialize};

use crate::analysis::expected_join_matrix;
use crate::error::{CoreError, Result};
use crate::oracle::{GraphKind, OracleSession};

use super::counts::y_statistic;

/// Parameters of the zero-query uniformity tester. Logarithms are natural.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Alg1Config {
    pub kind: GraphKind,
    pub n: u32,
    pub eps: f64,
    pub rho: f64,
    /// Max-count cutoff multiplier.
    pub alpha: f64,
    /// Threshold slack multiplier.
    pub beta: f64,
    /// Sample-size constant.
    pub c: f64,
    /// Constant in the lower limit on ρ.
    pub l: f64,
}

impl Alg1Config {
    pub fn new(kind: GraphKind, n: u32, eps: f64, rho: f64, c: f64, l: f64) -> Alg1Config {
        Alg1Config { kind, n, eps, rho, alpha: 24.0, beta: 0.25, c, l }
    }

    fn ln_n(&self) -> f64 {
        (self.n as f64).ln()
    }

    /// Smallest ρ allowed: `L·log^{4/5}n / (n^{1/5} ε^{4/5})`.
    pub fn rho_floor(&self) -> f64 {
        self.l * self.ln_n().powf(0.8) / ((self.n as f64).powf(0.2) * self.eps.powf(0.8))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || !(self.eps > 0.0 && self.eps <= 1.0) || !(self.rho > 0.0 && self.rho <= 1.0) {
            return Err(CoreError::InvalidParameter(format!("n={}, eps={}, rho={}", self.n, self.eps, self.rho)));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0 / 3.0) || !(self.alpha > 0.0) || !(self.c > 0.0) {
            return Err(CoreError::InvalidParameter(format!("alpha={}, beta={}, c={}", self.alpha, self.beta, self.c)));
        }
        if self.rho < self.rho_floor() {
            return Err(CoreError::Precondition(format!("rho {} below floor {}", self.rho, self.rho_floor())));
        }
        Ok(())
    }

    /// `m = c·(√n/ε²)·(log²n/ρ^{3/2})`.
    pub fn m(&self) -> f64 {
        self.c * (self.n as f64).sqrt() / (self.eps * self.eps) * self.ln_n().powi(2) / self.rho.powf(1.5)
    }

    pub fn cutoff(&self) -> f64 {
        self.alpha * self.ln_n()
    }

    /// `(1/n²)Σφ_{i,j} + β·ε²ρ/n`.
    pub fn threshold(&self) -> Result<f64> {
        let n = self.n as f64;
        let phi = expected_join_matrix(self.kind, self.n as usize, self.rho)?;
        Ok(phi.total() / (n * n) + self.beta * self.eps * self.eps * self.rho / n)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Alg1Outcome {
    pub accept: bool,
    /// 1 if the max-count step rejected, 2 if the statistic did, 0 on accept.
    pub step: u8,
    pub y: f64,
    pub threshold: f64,
    pub max_count: u64,
    pub samples: u64,
}

/// Draws `Poi(m)` clustered samples from input 0 and never queries LABEL.
pub fn algorithm1(s: &mut OracleSession<'_>, cfg: &Alg1Config) -> Result<Alg1Outcome> {
    cfg.validate()?;
    if s.domain().size() != cfg.n as u64 || s.domain().dim() != 1 {
        return Err(CoreError::DomainMismatch(format!("session domain is not [{}]", cfg.n)));
    }
    let m = cfg.m();
    let threshold = cfg.threshold()?;
    let before = s.samp_count(0);
    let cells = s.samp_poissonized(0, m)?;
    let samples = s.samp_count(0) - before;
    let counts: Vec<u64> = cells.iter().map(|&(_, c)| c).collect();
    let max_count = counts.iter().copied().max().unwrap_or(0);
    let y = y_statistic(&counts, m);
    let (accept, step) = if max_count as f64 >= cfg.cutoff() {
        (false, 1)
    } else if y >= threshold {
        (false, 2)
    } else {
        (true, 0)
    };
    Ok(Alg1Outcome { accept, step, y, threshold, max_count, samples })
}
