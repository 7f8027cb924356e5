//! Rejection for connected cells: walk the ℓ∞ shell of radius `k` around `h`.

use super::line::member;
use super::{RejectOutcome, RejectVerdict};
use crate::domain::{MetricKind, MetricSpace, Point};
use crate::error::{CoreError, Result};
use crate::oracle::OracleSession;

/// Shell radius in lattice units for threshold `t2`.
pub fn shell_radius(t2: f64, span: u32) -> i64 {
    (t2 * span as f64 / 2.0).ceil() as i64
}

/// In-domain points at ℓ∞ distance exactly `k` from `h`, ordered with the last
/// axis outermost and axis 0 innermost.
pub fn shell_points(h: &Point, k: i64, side: u32) -> Vec<Vec<i64>> {
    let d = h.dim();
    let c = h.to_i64();
    let side = side as i64;
    let mut out = Vec::new();
    let mut cur = vec![0i64; d];
    fn rec(axis: usize, on: bool, c: &[i64], k: i64, side: i64, cur: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
        let lo = (c[axis] - k).max(0);
        let hi = (c[axis] + k).min(side - 1);
        for x in lo..=hi {
            let here = (x - c[axis]).abs() == k;
            if axis == 0 {
                if on || here {
                    cur[0] = x;
                    out.push(cur.clone());
                }
            } else {
                cur[axis] = x;
                rec(axis - 1, on || here, c, k, side, cur, out);
            }
        }
    }
    if k == 0 {
        return vec![c];
    }
    rec(d - 1, false, &c, k, side, &mut cur, &mut out);
    out
}

/// `(ε₁, ε₂)`-cell rejection for connected cells under an ℓp metric. Accepts iff
/// no point on the shell of radius `⌈ε₂(n−1)/2⌉` around `h` shares its label.
/// Stops at the first hit. Needs `ε₂ > 2·d^{1/p}·ε₁`.
pub fn reject_connected_cell(
    s: &mut OracleSession<'_>,
    h: &Point,
    eps1: f64,
    eps2: f64,
    metric: &MetricSpace,
) -> Result<RejectVerdict> {
    let MetricKind::Lp { p } = metric.kind else {
        return Err(CoreError::Unsupported("shell rejection needs an lp metric".into()));
    };
    if metric.domain != *s.domain() {
        return Err(CoreError::DomainMismatch("metric and oracle domains differ".into()));
    }
    s.domain().check(h)?;
    let d = h.dim() as f64;
    if !(eps1 > 0.0 && eps2 > 2.0 * d.powf(1.0 / p) * eps1) {
        return Err(CoreError::Precondition(format!(
            "shell rejection needs eps2 > 2 d^(1/p) eps1, got eps1={eps1}, eps2={eps2}"
        )));
    }
    let start = s.label_count();
    let k = shell_radius(eps2, s.domain().span());
    let mut outcome = RejectOutcome::Accept;
    for c in shell_points(h, k, s.domain().side()) {
        if member(s, h, &c) {
            outcome = RejectOutcome::Reject;
            break;
        }
    }
    Ok(RejectVerdict { outcome, queries_used: s.label_count() - start })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Domain;
    use crate::oracle::{Clustering, GridDensity, Partition};

    #[test]
    fn shell_size_matches_formula() {
        let h = Point::new(&[20, 20]);
        for k in 1..6i64 {
            let got = shell_points(&h, k, 64).len() as i64;
            assert_eq!(got, (2 * k + 1).pow(2) - (2 * k - 1).pow(2));
        }
        let h3 = Point::new(&[10, 10, 10]);
        assert_eq!(shell_points(&h3, 2, 32).len(), 125 - 27);
        // clipped at a corner
        assert_eq!(shell_points(&Point::new(&[0, 0]), 2, 10).len(), 5);
    }

    #[test]
    fn small_cells_accept_long_cells_reject() {
        let dom = Domain::grid(33, 2).unwrap();
        let m = MetricSpace::lp(dom, 2.0).unwrap();
        // a 2x2 block at the origin and one long row, everything else singletons
        let mut labels: Vec<usize> = (0..dom.size() as usize).map(|i| i + 10).collect();
        for p in [[0u32, 0], [1, 0], [0, 1], [1, 1]] {
            labels[dom.index(&Point::new(&p))] = 0;
        }
        for x in 0..33u32 {
            labels[dom.index(&Point::new(&[x, 20]))] = 1;
        }
        let c = Clustering::with_lex_min_reps(dom, &labels).unwrap();
        let mu = GridDensity::uniform(dom).unwrap();
        let mut s = OracleSession::new(&c, vec![&mu], 3).unwrap();
        let small = c.rep(c.cell_of(&Point::new(&[0, 0])));
        let long = c.rep(c.cell_of(&Point::new(&[5, 20])));
        let (e1, e2) = (0.05, 0.5);
        let v = reject_connected_cell(&mut s, &small, e1, e2, &m).unwrap();
        assert_eq!(v.outcome, RejectOutcome::Accept);
        let v = reject_connected_cell(&mut s, &long, e1, e2, &m).unwrap();
        assert_eq!(v.outcome, RejectOutcome::Reject);
        assert!(reject_connected_cell(&mut s, &small, 0.3, 0.5, &m).is_err());
    }
}
