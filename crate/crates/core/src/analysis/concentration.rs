use serde::Serialize;

use super::intervals::{large_interval, CircularInterval};
use crate::error::{CoreError, Result};
use crate::oracle::GraphKind;

/// `Λ_t(μ)` with a maximizing interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RelativeConcentration {
    pub t: f64,
    pub value: f64,
    pub argmax: CircularInterval,
    pub mass: f64,
}

/// Calls `f(interval, mass)` for every interval of `kind` (forward intervals only;
/// backward ones repeat the same sets). Path intervals never use edge `n−1`.
fn scan(mu: &[f64], kind: GraphKind, mut f: impl FnMut(CircularInterval, f64)) {
    let n = mu.len();
    for start in 0..n {
        let mut mass = 0.0;
        for len in 1..=n {
            let x = start + len - 1;
            if kind == GraphKind::Path && x >= n {
                break;
            }
            mass += mu[x % n];
            f(CircularInterval::new(n, start as i64, len as i64), mass);
        }
    }
}

fn check(mu: &[f64], rho: f64, t: f64) -> Result<()> {
    if mu.is_empty() || mu.len() > 4096 {
        return Err(CoreError::TooLarge(format!("scan over n={}", mu.len())));
    }
    if !(rho > 0.0 && rho <= 1.0) || !(t > 0.0) {
        return Err(CoreError::InvalidParameter(format!("rho={rho}, t={t}")));
    }
    Ok(())
}

/// `max_I μ[I] / max{ρ|I*|, t}` by exhaustive scan, `O(n²)`.
pub fn relative_concentration(mu: &[f64], kind: GraphKind, rho: f64, t: f64) -> Result<RelativeConcentration> {
    check(mu, rho, t)?;
    let mut best = RelativeConcentration { t, value: f64::NEG_INFINITY, argmax: CircularInterval::new(mu.len(), 0, 1), mass: 0.0 };
    scan(mu, kind, |iv, mass| {
        let v = mass / (rho * iv.edge_count() as f64).max(t);
        if v > best.value {
            best = RelativeConcentration { t, value: v, argmax: iv, mass };
        }
    });
    Ok(best)
}

/// Heaviest interval among those with `ρ|I*| ≤ t`, returned with its mass.
pub fn structural_witness(mu: &[f64], kind: GraphKind, rho: f64, t: f64) -> Result<(CircularInterval, f64)> {
    check(mu, rho, t)?;
    let mut best = (CircularInterval::new(mu.len(), 0, 1), f64::NEG_INFINITY);
    scan(mu, kind, |iv, mass| {
        if rho * iv.edge_count() as f64 <= t && mass > best.1 {
            best = (iv, mass);
        }
    });
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ZetaCheck {
    pub zeta: f64,
    pub bound: f64,
    pub holds: bool,
}

/// `ζ = max_{i≠j} E[J[largeinterval(i,j)]] = max η^{|largeinterval*|}`, checked
/// against `(1−ρ)^{n/2}` (and 0 on the path).
pub fn zeta_bound_check(kind: GraphKind, n: usize, rho: f64) -> Result<ZetaCheck> {
    if n < 2 || !(rho > 0.0 && rho <= 1.0) {
        return Err(CoreError::InvalidParameter(format!("n={n}, rho={rho}")));
    }
    let eta = 1.0 - rho;
    let mut zeta = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            if let Some(l) = large_interval(kind, n, i, j) {
                zeta = zeta.max(eta.powi(l.edge_count() as i32));
            }
        }
    }
    let bound = match kind {
        GraphKind::Path => 0.0,
        GraphKind::Cycle => eta.powf(n as f64 / 2.0),
    };
    Ok(ZetaCheck { zeta, bound, holds: zeta <= bound * (1.0 + 1e-12) })
}
