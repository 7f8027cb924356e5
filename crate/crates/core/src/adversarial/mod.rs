//! Diameter-guarded identity and equivalence testing against an adversarial
//! clustering: the clustering test, container sampling, hierarchical EMD testers
//! and the universe bindings that plug cell procedures into them.

pub mod bindings;
pub mod guarded;
pub mod hierarchy;
pub mod sampling;
pub mod subtests;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::oracle::Resources;

pub use bindings::{Binding, Preset};
pub use guarded::{diameter_guarded_equivalence, diameter_guarded_identity};
pub use hierarchy::{HierarchicalClustering, Level};
pub use sampling::{container_sample, test_clustering, ContainerOutcome, SampleSource};
pub use subtests::{
    emd_equivalence_tester, emd_equivalence_tester_hypergrid, emd_identity_tester, emd_identity_tester_hypergrid,
    equivalence_budget, identity_budget, subtest_runs, tv_equivalence_subtest, tv_identity_subtest, EmdPlan,
    SubtestConstants,
};

/// Parameters of a diameter-guarded test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GuardParams {
    pub eps: f64,
    /// Diameter threshold Δ.
    pub diam: f64,
    /// Overall failure probability; 1/6 runs the base algorithm once.
    pub fail: f64,
    pub beta: f64,
    /// Constant in the cell-procedure failure budgets `b/m` and `b·ε`.
    pub b: f64,
}

impl GuardParams {
    pub fn new(eps: f64, diam: f64) -> Result<GuardParams> {
        let g = GuardParams { eps, diam, fail: 1.0 / 6.0, beta: 0.25, b: 1.0 / 24.0 };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let GuardParams { eps, diam, fail, beta, b } = *self;
        if !(0.0 < 2.0 * diam && 2.0 * diam < eps && eps < 0.5) {
            return Err(CoreError::InvalidParameter(format!("need 0 < 2Δ < ε < 1/2, got ε={eps}, Δ={diam}")));
        }
        if !(beta > 0.0 && beta < 1.0) || diam > beta * eps / 2.0 + 1e-15 {
            return Err(CoreError::InvalidParameter(format!("need β in (0,1) and Δ ≤ βε/2, got β={beta}, Δ={diam}")));
        }
        if !(fail > 0.0 && fail < 0.5) || !(b > 0.0 && b <= 1.0) {
            return Err(CoreError::InvalidParameter(format!("fail={fail}, b={b}")));
        }
        Ok(())
    }

    pub fn c_beta(&self) -> f64 {
        self.beta / (96.0 * 24f64.ln())
    }

    /// The HPLD constant `c_{1/4}`.
    pub fn c() -> f64 {
        1.0 / (384.0 * 24f64.ln())
    }

    pub fn k(&self) -> f64 {
        2.0 / self.beta * 24f64.ln()
    }

    /// Samples drawn by one run of the clustering test.
    pub fn s(&self) -> usize {
        (self.k() / self.eps).ceil() as usize
    }

    /// Diameter thresholds handed to cell rejection: `(Δ, βε/2)`.
    pub fn reject_thresholds(&self) -> (f64, f64) {
        (self.diam, self.beta * self.eps / 2.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Accept,
    Reject,
    ClusterReject,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Accept => "ACCEPT",
            Verdict::Reject => "REJECT",
            Verdict::ClusterReject => "CLUSTER_REJECT",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TesterVerdict {
    pub verdict: Verdict,
    pub resources: Resources,
    /// Base runs behind a boosted verdict.
    pub runs: usize,
}

/// Runs needed to take a base failure of 1/6 down to `fail`.
pub fn tester_runs(fail: f64) -> usize {
    if fail >= 1.0 / 6.0 {
        1
    } else {
        crate::stats::majority_runs(fail)
    }
}

/// Combines base verdicts: CLUSTER_REJECT needs a strict majority, otherwise
/// ACCEPT beats REJECT on ties.
pub fn combine(verdicts: &[Verdict]) -> Verdict {
    let count = |v: Verdict| verdicts.iter().filter(|&&x| x == v).count();
    if 2 * count(Verdict::ClusterReject) > verdicts.len() {
        Verdict::ClusterReject
    } else if count(Verdict::Accept) >= count(Verdict::Reject) {
        Verdict::Accept
    } else {
        Verdict::Reject
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn guard_constants() {
        let g = GuardParams::new(0.3, 0.3 / 8.0).unwrap();
        let ln24 = 24f64.ln();
        assert!((g.c_beta() - 0.25 / (96.0 * ln24)).abs() < 1e-12);
        assert!((g.c_beta() - GuardParams::c()).abs() < 1e-12);
        assert!((g.k() - 8.0 * ln24).abs() < 1e-12);
        assert_eq!(g.s(), (8.0 * ln24 / 0.3).ceil() as usize);
        // the union bound in the accept case: s·c_β·ε ≤ 1/24
        assert!(g.s() as f64 * g.c_beta() * g.eps <= 1.0 / 24.0 + 1e-12);
        assert!(GuardParams::new(0.3, 0.2).is_err());
        assert!(GuardParams::new(0.6, 0.01).is_err());
        assert!(GuardParams::new(0.3, 0.04).is_err());
    }

    #[test]
    fn combine_rule() {
        use Verdict::*;
        assert_eq!(combine(&[ClusterReject, ClusterReject, Accept]), ClusterReject);
        assert_eq!(combine(&[ClusterReject, Reject, Accept]), Accept);
        assert_eq!(combine(&[Reject, Reject, ClusterReject]), Reject);
        assert_eq!(tester_runs(1.0 / 6.0), 1);
        assert_eq!(tester_runs(0.01) % 2, 1);
    }
}
