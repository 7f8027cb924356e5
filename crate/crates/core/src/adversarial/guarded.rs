//! Diameter-guarded identity and equivalence testers.

use super::bindings::{Binding, IdentityMode};
use super::sampling::{container_sample, test_clustering, ContainerOutcome, SampleSource};
use super::subtests::{emd_equivalence_tester, emd_identity_tester, EmdPlan, SubtestConstants};
use super::{combine, tester_runs, GuardParams, TesterVerdict, Verdict};
use crate::error::{CoreError, Result};
use crate::oracle::{Density, OracleSession};

const BASE_FAIL: f64 = 1.0 / 12.0;

fn verdict(accept: bool) -> Verdict {
    if accept {
        Verdict::Accept
    } else {
        Verdict::Reject
    }
}

fn identity_once(
    s: &mut OracleSession<'_>,
    nu: &dyn Density,
    gp: &GuardParams,
    binding: &Binding,
    c: &SubtestConstants,
) -> Result<Verdict> {
    let Some(disc) = binding.discoverer() else {
        return Err(CoreError::Unsupported(format!("preset {} has no cell discovery", binding.preset)));
    };
    if !test_clustering(s, SampleSource::Samp(0), gp, binding.rejector(), BASE_FAIL)? {
        return Ok(Verdict::ClusterReject);
    }
    let eps = gp.eps / 2.0;
    let h = binding.hierarchy(eps)?;
    let m = EmdPlan::new(&h, eps, c, false).total;
    match container_sample(s, m, disc, nu)? {
        ContainerOutcome::ClusterReject => Ok(Verdict::ClusterReject),
        ContainerOutcome::Reject => Ok(Verdict::Reject),
        ContainerOutcome::Samples(xs) => Ok(verdict(emd_identity_tester(&xs, nu, &h, eps, c)?)),
    }
}

fn equivalence_once(
    s: &mut OracleSession<'_>,
    a: SampleSource<'_>,
    b: SampleSource<'_>,
    gp: &GuardParams,
    binding: &Binding,
    c: &SubtestConstants,
) -> Result<Verdict> {
    // the clustering guarantee is needed for both inputs
    for src in [a, b] {
        if !test_clustering(s, src, gp, binding.rejector(), BASE_FAIL)? {
            return Ok(Verdict::ClusterReject);
        }
    }
    let eps = gp.eps / 2.0;
    let h = binding.hierarchy(eps)?;
    let m = EmdPlan::new(&h, eps, c, true).total;
    let xs = (0..m).map(|_| a.draw(s)).collect::<Result<Vec<_>>>()?;
    let ys = (0..m).map(|_| b.draw(s)).collect::<Result<Vec<_>>>()?;
    Ok(verdict(emd_equivalence_tester(&xs, &ys, &h, eps, c)?))
}

/// Identity testing of SAMP input 0 against the known `nu`. Presets without
/// discovery but with a simulable `ν` fall back to the equivalence tester with
/// `ν`-cells produced by one LABEL query per draw.
pub fn diameter_guarded_identity(
    s: &mut OracleSession<'_>,
    nu: &dyn Density,
    gp: &GuardParams,
    binding: &Binding,
    c: &SubtestConstants,
) -> Result<TesterVerdict> {
    gp.validate()?;
    if nu.domain() != s.domain() {
        return Err(CoreError::DomainMismatch("ν and the session live on different domains".into()));
    }
    let runs = tester_runs(gp.fail);
    let mut vs = Vec::with_capacity(runs);
    for _ in 0..runs {
        vs.push(match binding.identity_mode() {
            IdentityMode::Containers => identity_once(s, nu, gp, binding, c)?,
            IdentityMode::SimulatedEquivalence => {
                equivalence_once(s, SampleSource::Samp(0), SampleSource::Simulated(nu), gp, binding, c)?
            }
            IdentityMode::Unsupported => {
                return Err(CoreError::Unsupported(format!("preset {} supports equivalence only", binding.preset)))
            }
        });
    }
    Ok(TesterVerdict { verdict: combine(&vs), resources: s.resources(), runs })
}

/// Equivalence testing of SAMP inputs 0 and 1.
pub fn diameter_guarded_equivalence(
    s: &mut OracleSession<'_>,
    gp: &GuardParams,
    binding: &Binding,
    c: &SubtestConstants,
) -> Result<TesterVerdict> {
    gp.validate()?;
    if s.num_inputs() != 2 {
        return Err(CoreError::InvalidParameter("equivalence needs two session inputs".into()));
    }
    let runs = tester_runs(gp.fail);
    let mut vs = Vec::with_capacity(runs);
    for _ in 0..runs {
        vs.push(equivalence_once(s, SampleSource::Samp(0), SampleSource::Samp(1), gp, binding, c)?);
    }
    Ok(TesterVerdict { verdict: combine(&vs), resources: s.resources(), runs })
}
