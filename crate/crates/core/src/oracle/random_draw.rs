use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::clustering::Clustering;
use crate::domain::{Domain, Point};
use crate::error::{CoreError, Result};
use crate::{rng_from_seed, Rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    Path,
    Cycle,
}

impl std::str::FromStr for GraphKind {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<GraphKind> {
        match s {
            "path" => Ok(GraphKind::Path),
            "cycle" => Ok(GraphKind::Cycle),
            _ => Err(CoreError::Parse(format!("unknown graph kind {s:?}"))),
        }
    }
}

/// Random clustering of `[n]` from the path or cycle with every edge deleted
/// independently with probability `rho`. Edge `i` joins `i` and `i+1 mod n`;
/// the path never has edge `n−1`.
#[derive(Clone, Debug)]
pub struct RandomClusterDraw {
    pub kind: GraphKind,
    pub n: u32,
    pub rho: f64,
    kept: Vec<bool>,
    clustering: Clustering,
}

impl RandomClusterDraw {
    pub fn kept(&self) -> &[bool] {
        &self.kept
    }

    pub fn clustering(&self) -> &Clustering {
        &self.clustering
    }

    pub fn eta(&self) -> f64 {
        1.0 - self.rho
    }

    /// Builds the draw from an explicit kept-edge mask. `kept[n−1]` is ignored on the path.
    pub fn from_kept(kind: GraphKind, n: u32, rho: f64, mut kept: Vec<bool>, rep_seed: u64) -> Result<RandomClusterDraw> {
        validate(n, rho)?;
        if kept.len() != n as usize {
            return Err(CoreError::InvalidParameter(format!("{} edge flags for n={n}", kept.len())));
        }
        if kind == GraphKind::Path {
            kept[n as usize - 1] = false;
        }
        let labels = component_labels(&kept);
        let k = labels.iter().copied().max().unwrap() + 1;
        let mut members: Vec<Vec<u32>> = vec![Vec::new(); k];
        for (x, &l) in labels.iter().enumerate() {
            members[l].push(x as u32);
        }
        let mut rng = rng_from_seed(rep_seed);
        let reps: Vec<Point> = members
            .iter()
            .map(|m| Point::scalar(m[rng.gen_range(0..m.len())]))
            .collect();
        let gamma = labels.iter().map(|&l| l as u32).collect();
        let clustering = Clustering::new(Domain::line(n)?, gamma, reps)?;
        Ok(RandomClusterDraw { kind, n, rho, kept, clustering })
    }

    pub fn num_cells(&self) -> usize {
        super::Partition::num_cells(&self.clustering)
    }

    /// Cells of size one.
    pub fn singleton_cells(&self) -> Vec<usize> {
        self.clustering
            .cell_sizes()
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == 1)
            .map(|(i, _)| i)
            .collect()
    }
}

fn validate(n: u32, rho: f64) -> Result<()> {
    if n < 2 {
        return Err(CoreError::InvalidParameter(format!("n must be >= 2, got {n}")));
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(CoreError::InvalidParameter(format!("rho must be in (0,1], got {rho}")));
    }
    Ok(())
}

/// Component index per vertex; the component containing vertex 0 is cell 0 and
/// the others follow in order of their smallest vertex.
fn component_labels(kept: &[bool]) -> Vec<usize> {
    let n = kept.len();
    let mut labels = vec![0usize; n];
    let mut cur = 0;
    for i in 1..n {
        if !kept[i - 1] {
            cur += 1;
        }
        labels[i] = cur;
    }
    if kept[n - 1] && labels[n - 1] != 0 {
        let last = labels[n - 1];
        for l in labels.iter_mut() {
            if *l == last {
                *l = 0;
            }
        }
    }
    labels
}

/// Deterministic in `seed`: edge coins first, then representatives.
pub fn draw_random_clustering(kind: GraphKind, n: u32, rho: f64, seed: u64) -> Result<RandomClusterDraw> {
    validate(n, rho)?;
    let mut rng: Rng = rng_from_seed(seed);
    let kept: Vec<bool> = (0..n).map(|_| !rng.gen_bool(rho)).collect();
    let rep_seed = rng.gen::<u64>();
    RandomClusterDraw::from_kept(kind, n, rho, kept, rep_seed)
}
