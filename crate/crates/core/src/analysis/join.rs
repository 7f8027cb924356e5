use std::f64::consts::PI;
use std::io::Write;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::oracle::{GraphKind, RandomClusterDraw};

/// `Φ_{i,j} = 1` iff `i` and `j` share a cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JoinMatrix {
    n: usize,
    cell: Vec<u32>,
}

impl JoinMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.cell[i] == self.cell[j]
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j) as u8).collect()).collect()
    }

    /// `TᵀΦT`.
    pub fn quadratic(&self, t: &[u64]) -> u128 {
        let k = self.cell.iter().copied().max().map_or(0, |m| m as usize + 1);
        let mut per = vec![0u128; k];
        for (i, &x) in t.iter().enumerate() {
            per[self.cell[i] as usize] += x as u128;
        }
        per.iter().map(|x| x * x).sum()
    }

    pub fn to_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "i,j,phi")?;
        for i in 0..self.n {
            for j in 0..self.n {
                writeln!(w, "{i},{j},{}", self.get(i, j) as u8)?;
            }
        }
        Ok(())
    }
}

pub fn join_matrix(draw: &RandomClusterDraw) -> JoinMatrix {
    JoinMatrix { n: draw.n as usize, cell: draw.clustering().gamma().to_vec() }
}

/// `φ = E[Φ]` for the random path or cycle clustering.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExpectedJoinMatrix {
    pub kind: GraphKind,
    pub n: usize,
    pub rho: f64,
}

pub fn expected_join_matrix(kind: GraphKind, n: usize, rho: f64) -> Result<ExpectedJoinMatrix> {
    if n < 2 || !(rho > 0.0 && rho <= 1.0) {
        return Err(CoreError::InvalidParameter(format!("n={n}, rho={rho}")));
    }
    Ok(ExpectedJoinMatrix { kind, n, rho })
}

impl ExpectedJoinMatrix {
    pub fn eta(&self) -> f64 {
        1.0 - self.rho
    }

    /// Entry as a function of `|i−j|`.
    pub fn at_offset(&self, a: usize) -> f64 {
        let eta = self.eta();
        match self.kind {
            GraphKind::Path => eta.powi(a as i32),
            GraphKind::Cycle => eta.powi(a as i32) + eta.powi((self.n - a) as i32) - eta.powi(self.n as i32),
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.at_offset(i.abs_diff(j))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.entry(i, j))
    }

    /// `Σ_{i,j} φ_{i,j}`, by counting pairs at each offset.
    pub fn total(&self) -> f64 {
        let n = self.n;
        n as f64 + (1..n).map(|a| 2.0 * (n - a) as f64 * self.at_offset(a)).sum::<f64>()
    }

    /// Column sums `S_j = Σ_i φ_{i,j}`.
    pub fn column_sums(&self) -> Vec<f64> {
        (0..self.n).map(|j| (0..self.n).map(|i| self.entry(i, j)).sum()).collect()
    }

    pub fn to_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "i,j,phi")?;
        for i in 0..self.n {
            for j in 0..self.n {
                writeln!(w, "{i},{j},{:e}", self.entry(i, j))?;
            }
        }
        Ok(())
    }
}

/// `aᵀφb`.
pub fn quadratic_form(phi: &ExpectedJoinMatrix, a: &[f64], b: &[f64]) -> f64 {
    let n = phi.n;
    let mut s = 0.0;
    for i in 0..n {
        if a[i] == 0.0 {
            continue;
        }
        let mut row = 0.0;
        for j in 0..n {
            row += phi.entry(i, j) * b[j];
        }
        s += a[i] * row;
    }
    s
}

pub fn min_eigenvalue_dense(phi: &ExpectedJoinMatrix) -> f64 {
    phi.to_dense().symmetric_eigen().eigenvalues.min()
}

/// Smallest eigenvalue. The cycle matrix is circulant, so its spectrum is the
/// DFT of the first row (real, as the row is symmetric).
pub fn min_eigenvalue(phi: &ExpectedJoinMatrix) -> Result<f64> {
    if phi.n > 4096 {
        return Err(CoreError::TooLarge(format!("n={} for a dense eigensolve", phi.n)));
    }
    Ok(match phi.kind {
        GraphKind::Path => min_eigenvalue_dense(phi),
        GraphKind::Cycle => {
            let n = phi.n;
            let c: Vec<f64> = (0..n).map(|k| phi.at_offset(k)).collect();
            (0..n)
                .map(|l| c.iter().enumerate().map(|(k, ck)| ck * (2.0 * PI * (l * k % n) as f64 / n as f64).cos()).sum())
                .fold(f64::INFINITY, f64::min)
        }
    })
}

/// `max |νᵀφz|` over `Σz = 0, ‖z‖∞ ≤ δ` with `ν` uniform. The objective is
/// linear with coefficients `S_j/n`, so an optimal vertex puts `+δ` on the
/// largest half of the coefficients and `−δ` on the smallest half.
pub fn cross_term_max(phi: &ExpectedJoinMatrix, delta: f64) -> f64 {
    let n = phi.n;
    let mut s: Vec<f64> = phi.column_sums().into_iter().map(|x| x / n as f64).collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let h = n / 2;
    let top: f64 = s[..h].iter().sum();
    let bottom: f64 = s[n - h..].iter().sum();
    (delta * (top - bottom)).abs()
}
