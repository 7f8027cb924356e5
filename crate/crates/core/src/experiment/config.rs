use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::families::DistributionFamily;
use crate::adversarial::Preset;
use crate::error::{CoreError, Result};
use crate::oracle::GraphKind;

/// What a trial runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Op {
    /// Zero-query uniformity tester on a random path/cycle clustering.
    Part2Zeroq,
    /// Query-based singleton tester on a random path/cycle clustering.
    Part2Query,
    /// Diameter-guarded identity against uniform ν.
    GuardedIdentity,
    /// Diameter-guarded equivalence with uniform ν as the second input.
    GuardedEquivalence,
    /// Hierarchical EMD identity tester on unclustered samples.
    EmdIdentity,
}

impl Op {
    pub fn name(&self) -> &'static str {
        match self {
            Op::Part2Zeroq => "part2-zeroq",
            Op::Part2Query => "part2-query",
            Op::GuardedIdentity => "guarded-identity",
            Op::GuardedEquivalence => "guarded-equivalence",
            Op::EmdIdentity => "emd-identity",
        }
    }
}

/// Hidden clustering used by the guarded ops.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClusteringSpec {
    /// Drawn from the preset's promise class.
    Generated,
    SingleCell,
    Singletons,
    /// Random tiling of a 2D grid by dominoes and single points.
    Dominoes,
}

impl ClusteringSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ClusteringSpec::Generated => "generated",
            ClusteringSpec::SingleCell => "single-cell",
            ClusteringSpec::Singletons => "singletons",
            ClusteringSpec::Dominoes => "dominoes",
        }
    }
}

/// Swept parameters; the run covers their Cartesian product.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    #[serde(default = "default_n")]
    pub n: Vec<u32>,
    #[serde(default = "default_d")]
    pub d: Vec<usize>,
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
    #[serde(default = "default_rho")]
    pub rho: Vec<f64>,
    #[serde(default = "default_kind")]
    pub kind: Vec<GraphKind>,
    #[serde(default = "default_preset")]
    pub preset: Vec<Preset>,
    #[serde(default = "default_family")]
    pub family: Vec<DistributionFamily>,
    #[serde(default = "default_clustering")]
    pub clustering: Vec<ClusteringSpec>,
}

fn default_n() -> Vec<u32> {
    vec![16]
}
fn default_d() -> Vec<usize> {
    vec![1]
}
fn default_eps() -> Vec<f64> {
    vec![0.3]
}
fn default_rho() -> Vec<f64> {
    vec![0.5]
}
fn default_kind() -> Vec<GraphKind> {
    vec![GraphKind::Cycle]
}
fn default_preset() -> Vec<Preset> {
    vec![Preset::BB]
}
fn default_family() -> Vec<DistributionFamily> {
    vec![DistributionFamily::Uniform]
}
fn default_clustering() -> Vec<ClusteringSpec> {
    vec![ClusteringSpec::Generated]
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            n: default_n(),
            d: default_d(),
            eps: default_eps(),
            rho: default_rho(),
            kind: default_kind(),
            preset: default_preset(),
            family: default_family(),
            clustering: default_clustering(),
        }
    }
}

/// Parameters held fixed across the grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fixed {
    /// ℓp exponent for grid and cube metrics.
    #[serde(default = "default_p")]
    pub p: f64,
    /// Threshold `R` for the interval preset.
    #[serde(default = "default_r")]
    pub r: f64,
    /// Cube resolution for the convex-cube presets.
    #[serde(default = "default_bits")]
    pub bits: u32,
    /// Inner-ball radius promised by the convex-cube presets.
    #[serde(default = "default_ball")]
    pub inner_ball: f64,
    /// Cells requested from the generator.
    #[serde(default = "default_cells")]
    pub cells: usize,
    /// Δ; the preset's default when absent.
    #[serde(default)]
    pub diam: Option<f64>,
    /// Overall failure probability of the guarded testers.
    #[serde(default = "default_fail")]
    pub fail: f64,
}

fn default_p() -> f64 {
    1.0
}
fn default_r() -> f64 {
    8.0
}
fn default_bits() -> u32 {
    6
}
fn default_ball() -> f64 {
    1.0 / 32.0
}
fn default_cells() -> usize {
    8
}
fn default_fail() -> f64 {
    1.0 / 6.0
}

impl Default for Fixed {
    fn default() -> Self {
        Fixed {
            p: default_p(),
            r: default_r(),
            bits: default_bits(),
            inner_ball: default_ball(),
            cells: default_cells(),
            diam: None,
            fail: default_fail(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub op: Op,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Trial `i` uses seed `seed + i`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub calibration: Option<PathBuf>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Target error for calibration searches.
    #[serde(default = "default_target")]
    pub target_error: f64,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default)]
    pub fixed: Fixed,
}

fn default_trials() -> usize {
    100
}
fn default_target() -> f64 {
    0.1
}

/// One grid cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridPoint {
    pub n: u32,
    pub d: usize,
    pub eps: f64,
    pub rho: f64,
    pub kind: GraphKind,
    pub preset: Preset,
    pub family: DistributionFamily,
    pub clustering: ClusteringSpec,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| CoreError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| CoreError::Parse(format!("{}: {e}", path.display())))?;
        ExperimentConfig::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        if g.n.is_empty()
            || g.d.is_empty()
            || g.eps.is_empty()
            || g.rho.is_empty()
            || g.kind.is_empty()
            || g.preset.is_empty()
            || g.family.is_empty()
            || g.clustering.is_empty()
        {
            return Err(CoreError::InvalidParameter("every grid axis needs at least one value".into()));
        }
        if !(self.target_error > 0.0 && self.target_error < 0.5) {
            return Err(CoreError::InvalidParameter(format!("target_error {}", self.target_error)));
        }
        Ok(())
    }

    /// First 16 hex digits of SHA-256 over the canonical TOML form, with the
    /// output path blanked so it only covers what determines the records.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = None;
        let digest = Sha256::digest(c.to_toml().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn points(&self) -> Vec<GridPoint> {
        let g = &self.grid;
        let mut out = Vec::new();
        for &n in &g.n {
            for &d in &g.d {
                for &eps in &g.eps {
                    for &rho in &g.rho {
                        for &kind in &g.kind {
                            for &preset in &g.preset {
                                for family in &g.family {
                                    for &clustering in &g.clustering {
                                        out.push(GridPoint {
                                            n,
                                            d,
                                            eps,
                                            rho,
                                            kind,
                                            preset,
                                            family: family.clone(),
                                            clustering,
                                        });
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
name = "alg1"
op = "part2-zeroq"
trials = 10
seed = 7
[grid]
n = [2000]
eps = [0.25]
rho = [0.5]
family = [{ kind = "uniform" }, { kind = "zigzag", eps = 0.25 }]
"#;

    #[test]
    fn parse_and_expand() {
        let c = ExperimentConfig::from_toml(EXAMPLE).unwrap();
        assert_eq!(c.op, Op::Part2Zeroq);
        assert_eq!(c.points().len(), 2);
        assert_eq!(c.hash(), ExperimentConfig::from_toml(&c.to_toml()).unwrap().hash());
        assert_eq!(c.hash().len(), 16);
    }

    #[test]
    fn bad_configs() {
        assert!(ExperimentConfig::from_toml("name = 1").is_err());
        assert!(ExperimentConfig::from_toml("name = \"x\"\nop = \"nope\"").is_err());
        assert!(ExperimentConfig::from_toml("name = \"x\"\nop = \"part2-zeroq\"\nbogus = 3").is_err());
        assert!(ExperimentConfig::from_toml("name = \"x\"\nop = \"part2-zeroq\"\n[grid]\nn = []").is_err());
    }
}
