//! Exact earth mover's distance by primal network simplex on the bipartite
//! transport graph. Costs are scaled to integers so reduced-cost tests are exact;
//! flows stay in `f64`.

use serde::{Deserialize, Serialize};

use super::distribution::DiscreteDistribution;
use super::metric::MetricSpace;
use crate::error::{CoreError, Result};

pub const COST_SCALE: f64 = 1e9;
const MAX_CELLS: usize = 4_000_000;

/// Sparse transport plan: `(source index, target index, mass)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub n_rows: usize,
    pub n_cols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl Coupling {
    pub fn row_sums(&self) -> Vec<f64> {
        let mut r = vec![0.0; self.n_rows];
        for &(i, _, f) in &self.entries {
            r[i] += f;
        }
        r
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.n_cols];
        for &(_, j, f) in &self.entries {
            c[j] += f;
        }
        c
    }

    pub fn cost(&self, m: &MetricSpace) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, f)| f * m.dist(&m.domain.point(i), &m.domain.point(j)))
            .sum()
    }

    /// Marginals match within `tol`.
    pub fn is_valid(&self, a: &DiscreteDistribution, b: &DiscreteDistribution, tol: f64) -> bool {
        self.entries.iter().all(|e| e.2 >= -tol)
            && self.row_sums().iter().zip(a.weights()).all(|(x, y)| (x - y).abs() <= tol)
            && self.col_sums().iter().zip(b.weights()).all(|(x, y)| (x - y).abs() <= tol)
    }
}

/// Exact EMD between two distributions on the metric's domain.
pub fn emd_exact(a: &DiscreteDistribution, b: &DiscreteDistribution, m: &MetricSpace) -> Result<(f64, Coupling)> {
    let size = m.domain.enumerable_size()?;
    if a.len() != size || b.len() != size {
        return Err(CoreError::DomainMismatch(format!(
            "distributions have {} and {} entries, domain has {size}",
            a.len(),
            b.len()
        )));
    }
    let pts: Vec<_> = (0..size).map(|i| m.domain.point(i)).collect();
    emd_with_cost(a.weights(), b.weights(), |i, j| m.dist(&pts[i], &pts[j]))
}

/// EMD for arbitrary nonnegative mass vectors with equal totals and a cost in `[0, ∞)`.
pub fn emd_with_cost(a: &[f64], b: &[f64], cost: impl Fn(usize, usize) -> f64) -> Result<(f64, Coupling)> {
    let ta: f64 = a.iter().sum();
    let tb: f64 = b.iter().sum();
    if (ta - tb).abs() > 1e-9 {
        return Err(CoreError::MassMismatch { left: ta, right: tb });
    }
    let src: Vec<usize> = (0..a.len()).filter(|&i| a[i] > 0.0).collect();
    let dst: Vec<usize> = (0..b.len()).filter(|&j| b[j] > 0.0).collect();
    if src.len().saturating_mul(dst.len()) > MAX_CELLS {
        return Err(CoreError::TooLarge(format!("{} x {} support product", src.len(), dst.len())));
    }
    let mut coupling = Coupling { n_rows: a.len(), n_cols: b.len(), entries: Vec::new() };
    if src.is_empty() || dst.is_empty() {
        return Ok((0.0, coupling));
    }
    let ns = src.len();
    let nd = dst.len();
    let mut supply = Vec::with_capacity(ns + nd);
    supply.extend(src.iter().map(|&i| a[i]));
    supply.extend(dst.iter().map(|&j| -b[j]));
    let mut arcs = Vec::with_capacity(ns * nd);
    let mut real_cost = Vec::with_capacity(ns * nd);
    for (si, &i) in src.iter().enumerate() {
        for (dj, &j) in dst.iter().enumerate() {
            let c = cost(i, j);
            if !(c >= 0.0) || !c.is_finite() {
                return Err(CoreError::InvalidParameter(format!("cost({i},{j}) = {c}")));
            }
            arcs.push((si, ns + dj, (c * COST_SCALE).round() as i64));
            real_cost.push(c);
        }
    }
    let flows = NetworkSimplex::new(supply, &arcs).solve()?;
    let mut total = 0.0;
    for (k, f) in flows.into_iter().enumerate() {
        if f > 0.0 {
            let (si, dj) = (k / nd, k % nd);
            coupling.entries.push((src[si], dst[dj], f));
            total += f * real_cost[k];
        }
    }
    Ok((total.max(0.0), coupling))
}

const STATE_TREE: i8 = 0;
const STATE_LOWER: i8 = 1;
const DIR_UP: i64 = 1;
const DIR_DOWN: i64 = -1;

/// Uncapacitated primal network simplex with a strongly feasible spanning tree
/// rooted at an artificial node and block-search pricing.
struct NetworkSimplex {
    node_num: usize,
    arc_num: usize,
    source: Vec<usize>,
    target: Vec<usize>,
    cost: Vec<i64>,
    supply: Vec<f64>,
    flow: Vec<f64>,
    pi: Vec<i64>,
    state: Vec<i8>,
    parent: Vec<isize>,
    pred: Vec<usize>,
    pred_dir: Vec<i64>,
    thread: Vec<usize>,
    rev_thread: Vec<usize>,
    succ_num: Vec<usize>,
    last_succ: Vec<usize>,
    dirty_revs: Vec<usize>,
    root: usize,
    in_arc: usize,
    join: usize,
    u_in: usize,
    v_in: usize,
    u_out: usize,
    delta: f64,
    next_arc: usize,
    block_size: usize,
}

impl NetworkSimplex {
    fn new(supply: Vec<f64>, arcs: &[(usize, usize, i64)]) -> NetworkSimplex {
        let node_num = supply.len();
        let arc_num = arcs.len();
        let all_arcs = arc_num + node_num;
        let all_nodes = node_num + 1;
        let mut ns = NetworkSimplex {
            node_num,
            arc_num,
            source: vec![0; all_arcs],
            target: vec![0; all_arcs],
            cost: vec![0; all_arcs],
            supply: {
                let mut s = supply;
                s.push(0.0);
                s
            },
            flow: vec![0.0; all_arcs],
            pi: vec![0; all_nodes],
            state: vec![STATE_LOWER; all_arcs],
            parent: vec![-1; all_nodes],
            pred: vec![usize::MAX; all_nodes],
            pred_dir: vec![0; all_nodes],
            thread: vec![0; all_nodes],
            rev_thread: vec![0; all_nodes],
            succ_num: vec![0; all_nodes],
            last_succ: vec![0; all_nodes],
            dirty_revs: Vec::new(),
            root: node_num,
            in_arc: 0,
            join: 0,
            u_in: 0,
            v_in: 0,
            u_out: 0,
            delta: 0.0,
            next_arc: 0,
            block_size: ((arc_num as f64).sqrt().ceil() as usize).max(10),
        };
        let mut max_cost = 1i64;
        for (k, &(s, t, c)) in arcs.iter().enumerate() {
            ns.source[k] = s;
            ns.target[k] = t;
            ns.cost[k] = c;
            max_cost = max_cost.max(c);
        }
        let art_cost = max_cost.saturating_mul(node_num as i64 + 1).saturating_add(1);
        let sum_supply: f64 = ns.supply[..node_num].iter().sum();
        let root = ns.root;
        ns.supply[root] = -sum_supply;
        ns.parent[root] = -1;
        ns.pred[root] = usize::MAX;
        ns.thread[root] = 0;
        ns.rev_thread[0] = root;
        ns.succ_num[root] = node_num + 1;
        ns.last_succ[root] = root - 1;
        ns.pi[root] = 0;
        for u in 0..node_num {
            let e = arc_num + u;
            ns.parent[u] = root as isize;
            ns.pred[u] = e;
            ns.thread[u] = u + 1;
            ns.rev_thread[u + 1] = u;
            ns.succ_num[u] = 1;
            ns.last_succ[u] = u;
            ns.state[e] = STATE_TREE;
            if ns.supply[u] >= 0.0 {
                ns.pred_dir[u] = DIR_UP;
                ns.pi[u] = 0;
                ns.source[e] = u;
                ns.target[e] = root;
                ns.flow[e] = ns.supply[u];
                ns.cost[e] = 0;
            } else {
                ns.pred_dir[u] = DIR_DOWN;
                ns.pi[u] = art_cost;
                ns.source[e] = root;
                ns.target[e] = u;
                ns.flow[e] = -ns.supply[u];
                ns.cost[e] = art_cost;
            }
        }
        ns
    }

    #[inline]
    fn reduced(&self, e: usize) -> i64 {
        self.state[e] as i64 * (self.cost[e] + self.pi[self.source[e]] - self.pi[self.target[e]])
    }

    fn find_entering_arc(&mut self) -> bool {
        let mut min = 0i64;
        let mut cnt = self.block_size;
        let total = self.arc_num;
        let mut e = self.next_arc;
        for _ in 0..total {
            let c = self.reduced(e);
            if c < min {
                min = c;
                self.in_arc = e;
            }
            cnt -= 1;
            e += 1;
            if e == total {
                e = 0;
            }
            if cnt == 0 {
                if min < 0 {
                    self.next_arc = e;
                    return true;
                }
                cnt = self.block_size;
            }
        }
        if min < 0 {
            self.next_arc = e;
            return true;
        }
        false
    }

    fn find_join_node(&mut self) {
        let mut u = self.source[self.in_arc];
        let mut v = self.target[self.in_arc];
        while u != v {
            if self.succ_num[u] < self.succ_num[v] {
                u = self.parent[u] as usize;
            } else {
                v = self.parent[v] as usize;
            }
        }
        self.join = u;
    }

    fn find_leaving_arc(&mut self) -> bool {
        let (first, second) = if self.state[self.in_arc] == STATE_LOWER {
            (self.source[self.in_arc], self.target[self.in_arc])
        } else {
            (self.target[self.in_arc], self.source[self.in_arc])
        };
        self.delta = f64::INFINITY;
        let mut result = 0;
        let mut u = first;
        while u != self.join {
            let e = self.pred[u];
            let d = if self.pred_dir[u] == DIR_DOWN { f64::INFINITY } else { self.flow[e] };
            if d < self.delta {
                self.delta = d;
                self.u_out = u;
                result = 1;
            }
            u = self.parent[u] as usize;
        }
        u = second;
        while u != self.join {
            let e = self.pred[u];
            let d = if self.pred_dir[u] == DIR_UP { f64::INFINITY } else { self.flow[e] };
            if d <= self.delta {
                self.delta = d;
                self.u_out = u;
                result = 2;
            }
            u = self.parent[u] as usize;
        }
        if result == 1 {
            self.u_in = first;
            self.v_in = second;
        } else {
            self.u_in = second;
            self.v_in = first;
        }
        result != 0
    }

    fn change_flow(&mut self, change: bool) {
        if self.delta > 0.0 {
            let val = self.state[self.in_arc] as f64 * self.delta;
            self.flow[self.in_arc] += val;
            let mut u = self.source[self.in_arc];
            while u != self.join {
                let e = self.pred[u];
                self.flow[e] -= self.pred_dir[u] as f64 * val;
                if self.flow[e] < 0.0 {
                    self.flow[e] = 0.0;
                }
                u = self.parent[u] as usize;
            }
            u = self.target[self.in_arc];
            while u != self.join {
                let e = self.pred[u];
                self.flow[e] += self.pred_dir[u] as f64 * val;
                if self.flow[e] < 0.0 {
                    self.flow[e] = 0.0;
                }
                u = self.parent[u] as usize;
            }
        }
        if change {
            self.state[self.in_arc] = STATE_TREE;
            let out = self.pred[self.u_out];
            self.flow[out] = 0.0;
            self.state[out] = STATE_LOWER;
        } else {
            self.state[self.in_arc] = -self.state[self.in_arc];
        }
    }

    fn update_tree_structure(&mut self) {
        let u_in = self.u_in;
        let v_in = self.v_in;
        let u_out = self.u_out;
        let join = self.join;
        let in_arc = self.in_arc;
        let old_rev_thread = self.rev_thread[u_out];
        let old_succ_num = self.succ_num[u_out];
        let old_last_succ = self.last_succ[u_out];
        let v_out = self.parent[u_out] as usize;

        if u_in == u_out {
            self.parent[u_in] = v_in as isize;
            self.pred[u_in] = in_arc;
            self.pred_dir[u_in] = if u_in == self.source[in_arc] { DIR_UP } else { DIR_DOWN };
            if self.thread[v_in] != u_out {
                let mut after = self.thread[old_last_succ];
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
                after = self.thread[v_in];
                self.thread[v_in] = u_out;
                self.rev_thread[u_out] = v_in;
                self.thread[old_last_succ] = after;
                self.rev_thread[after] = old_last_succ;
            }
        } else {
            let thread_continue = if old_rev_thread == v_in {
                self.thread[old_last_succ]
            } else {
                self.thread[v_in]
            };
            let mut stem = u_in;
            let mut par_stem = v_in;
            let mut last = self.last_succ[u_in];
            let mut after = self.thread[last];
            self.thread[v_in] = u_in;
            self.dirty_revs.clear();
            self.dirty_revs.push(v_in);
            while stem != u_out {
                let next_stem = self.parent[stem] as usize;
                self.thread[last] = next_stem;
                self.dirty_revs.push(last);
                let before = self.rev_thread[stem];
                self.thread[before] = after;
                self.rev_thread[after] = before;
                self.parent[stem] = par_stem as isize;
                par_stem = stem;
                stem = next_stem;
                last = if self.last_succ[stem] == self.last_succ[par_stem] {
                    self.rev_thread[par_stem]
                } else {
                    self.last_succ[stem]
                };
                after = self.thread[last];
            }
            self.parent[u_out] = par_stem as isize;
            self.thread[last] = thread_continue;
            self.rev_thread[thread_continue] = last;
            self.last_succ[u_out] = last;
            if old_rev_thread != v_in {
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
            }
            for i in 0..self.dirty_revs.len() {
                let u = self.dirty_revs[i];
                let t = self.thread[u];
                self.rev_thread[t] = u;
            }
            let mut tmp_sc = 0usize;
            let tmp_ls = self.last_succ[u_out];
            let mut u = u_out;
            while u != u_in {
                let p = self.parent[u] as usize;
                self.pred[u] = self.pred[p];
                self.pred_dir[u] = -self.pred_dir[p];
                tmp_sc = tmp_sc + self.succ_num[u] - self.succ_num[p];
                self.succ_num[u] = tmp_sc;
                self.last_succ[p] = tmp_ls;
                u = p;
            }
            self.pred[u_in] = in_arc;
            self.pred_dir[u_in] = if u_in == self.source[in_arc] { DIR_UP } else { DIR_DOWN };
            self.succ_num[u_in] = old_succ_num;
        }

        let up_limit_out: isize = if self.last_succ[join] == v_in { join as isize } else { -1 };
        let last_succ_out = self.last_succ[u_out];
        let mut u = v_in as isize;
        while u != -1 && self.last_succ[u as usize] == v_in {
            self.last_succ[u as usize] = last_succ_out;
            u = self.parent[u as usize];
        }
        if join != old_rev_thread && v_in != old_rev_thread {
            let mut u = v_out as isize;
            while u != up_limit_out && self.last_succ[u as usize] == old_last_succ {
                self.last_succ[u as usize] = old_rev_thread;
                u = self.parent[u as usize];
            }
        } else if last_succ_out != old_last_succ {
            let mut u = v_out as isize;
            while u != up_limit_out && self.last_succ[u as usize] == old_last_succ {
                self.last_succ[u as usize] = last_succ_out;
                u = self.parent[u as usize];
            }
        }
        let mut u = v_in;
        while u != join {
            self.succ_num[u] += old_succ_num;
            u = self.parent[u] as usize;
        }
        let mut u = v_out;
        while u != join {
            self.succ_num[u] -= old_succ_num;
            u = self.parent[u] as usize;
        }
    }

    fn update_potential(&mut self) {
        let sigma = self.pi[self.v_in] - self.pi[self.u_in] - self.pred_dir[self.u_in] * self.cost[self.in_arc];
        let end = self.thread[self.last_succ[self.u_in]];
        let mut u = self.u_in;
        while u != end {
            self.pi[u] += sigma;
            u = self.thread[u];
        }
    }

    fn solve(mut self) -> Result<Vec<f64>> {
        let limit = 50 * (self.arc_num + self.node_num) + 10_000;
        let mut iters = 0usize;
        while self.find_entering_arc() {
            self.find_join_node();
            let change = self.find_leaving_arc();
            if self.delta.is_infinite() {
                return Err(CoreError::InvalidParameter("unbounded transport problem".into()));
            }
            self.change_flow(change);
            if change {
                self.update_tree_structure();
                self.update_potential();
            }
            iters += 1;
            if iters > limit {
                return Err(CoreError::InvalidParameter("network simplex iteration limit".into()));
            }
        }
        let residual: f64 = (0..self.node_num)
            .map(|u| {
                let e = self.arc_num + u;
                if self.cost[e] > 0 {
                    self.flow[e]
                } else {
                    0.0
                }
            })
            .sum();
        if residual > 1e-9 {
            return Err(CoreError::MassMismatch { left: residual, right: 0.0 });
        }
        self.flow.truncate(self.arc_num);
        Ok(self.flow)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::point::Domain;

    #[test]
    fn endpoints_on_line() {
        let m = MetricSpace::lp(Domain::line(4).unwrap(), 1.0).unwrap();
        let a = DiscreteDistribution::point_mass(4, 0);
        let b = DiscreteDistribution::point_mass(4, 3);
        let (c, cp) = emd_exact(&a, &b, &m).unwrap();
        assert!((c - 1.0).abs() < 1e-12);
        assert!(cp.is_valid(&a, &b, 1e-9));
    }

    #[test]
    fn identical_gives_zero_diagonal() {
        let m = MetricSpace::lp(Domain::grid(3, 2).unwrap(), 2.0).unwrap();
        let a = DiscreteDistribution::from_unnormalized((1..=9).map(|x| x as f64).collect()).unwrap();
        let (c, cp) = emd_exact(&a, &a, &m).unwrap();
        assert!(c.abs() < 1e-12);
        assert!(cp.entries.iter().all(|&(i, j, _)| i == j));
    }

    #[test]
    fn line_matches_cdf_formula() {
        // On a line EMD is the L1 distance between CDFs.
        let n = 12;
        let m = MetricSpace::lp(Domain::line(n).unwrap(), 1.0).unwrap();
        let mut rng = crate::rng_from_seed(4);
        for _ in 0..20 {
            let a = random_dist(&mut rng, n as usize);
            let b = random_dist(&mut rng, n as usize);
            let mut ca = 0.0;
            let mut cb = 0.0;
            let mut want = 0.0;
            for i in 0..n as usize - 1 {
                ca += a.weight(i);
                cb += b.weight(i);
                want += (ca - cb as f64).abs() / (n - 1) as f64;
            }
            let (got, cp) = emd_exact(&a, &b, &m).unwrap();
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
            assert!(cp.is_valid(&a, &b, 1e-9));
        }
    }

    fn random_dist(rng: &mut crate::Rng, n: usize) -> DiscreteDistribution {
        use rand::Rng;
        let w: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen::<f64>() }).collect();
        if w.iter().sum::<f64>() == 0.0 {
            return DiscreteDistribution::uniform(n);
        }
        DiscreteDistribution::from_unnormalized(w).unwrap()
    }
}
