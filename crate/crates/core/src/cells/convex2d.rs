//! Planar procedures for digitally convex, 4-connected cells.

use std::collections::{HashMap, VecDeque};

use super::line::member;
use super::{Container, Discovery, DiscoveryResult, RejectOutcome, RejectVerdict};
use crate::domain::{MetricSpace, Point};
use crate::error::{CoreError, Result};
use crate::oracle::OracleSession;

/// Memoised membership in the cell of `h`; off-domain points are outside.
struct Probe<'s, 'a> {
    s: &'s mut OracleSession<'a>,
    h: Point,
    cache: HashMap<(i64, i64), bool>,
}

impl<'s, 'a> Probe<'s, 'a> {
    fn inside(&mut self, x: i64, y: i64) -> bool {
        if let Some(&v) = self.cache.get(&(x, y)) {
            return v;
        }
        let v = member(self.s, &self.h, &[x, y]);
        self.cache.insert((x, y), v);
        v
    }

    fn on_boundary(&mut self, x: i64, y: i64) -> bool {
        self.inside(x, y) && [(1, 0), (-1, 0), (0, 1), (0, -1)].iter().any(|(dx, dy)| !self.inside(x + dx, y + dy))
    }
}

fn require_plane(s: &OracleSession<'_>, h: &Point) -> Result<()> {
    if s.domain().dim() != 2 {
        return Err(CoreError::Unsupported("planar cell procedure on a non-planar domain".into()));
    }
    s.domain().check(h)
}

/// Exact discovery: walk right from `h` to a boundary point, collect the
/// boundary by BFS over 8-neighbours, then fill each row between its extreme
/// boundary points.
pub fn discover_convex_grid_cell_2d(s: &mut OracleSession<'_>, h: &Point) -> Result<DiscoveryResult> {
    require_plane(s, h)?;
    let start = s.label_count();
    let span = s.domain().span() as i64;
    let (hx, hy) = (h.get(0) as i64, h.get(1) as i64);
    let mut pr = Probe { s, h: *h, cache: HashMap::new() };
    pr.cache.insert((hx, hy), true);

    // rightmost member on the row of h
    let (mut lo, mut hi) = (hx, span + 1);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if pr.inside(mid, hy) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let first = (lo, hy);

    let mut seen: HashMap<(i64, i64), ()> = HashMap::new();
    let mut queue = VecDeque::from([first]);
    seen.insert(first, ());
    let mut rows: HashMap<i64, (i64, i64)> = HashMap::new();
    while let Some((x, y)) = queue.pop_front() {
        let e = rows.entry(y).or_insert((x, x));
        e.0 = e.0.min(x);
        e.1 = e.1.max(x);
        for dy in -1..=1 {
            for dx in -1..=1 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let q = (x + dx, y + dy);
                if seen.contains_key(&q) || q.0 < 0 || q.1 < 0 || q.0 > span || q.1 > span {
                    continue;
                }
                if pr.on_boundary(q.0, q.1) {
                    seen.insert(q, ());
                    queue.push_back(q);
                }
            }
        }
    }
    let mut pts = Vec::new();
    for (y, (a, b)) in rows {
        for x in a..=b {
            pts.push(Point::new(&[x as u32, y as u32]));
        }
    }
    let used = pr.s.label_count() - start;
    Ok(DiscoveryResult { outcome: Discovery::Container(Container::from_points(pts)), queries_used: used })
}

/// `(t1, t2)`-rejection of digitally convex cells against box cells on `[n]²`.
/// Finds the box `R` spanned by the axis extents through `h`, checks that `R`
/// looks like the whole cell, and accepts iff `diam(R) ≤ t1`; ⊥ otherwise.
pub fn cc_vs_box_reject_2d(
    s: &mut OracleSession<'_>,
    h: &Point,
    t1: f64,
    t2: f64,
    metric: &MetricSpace,
) -> Result<RejectVerdict> {
    require_plane(s, h)?;
    let span = s.domain().span() as f64;
    if !(t1 < t2 - 8.0 / span) {
        return Err(CoreError::Precondition(format!("need t1 < t2 - 8/(n-1), got t1={t1}, t2={t2}, n-1={span}")));
    }
    let start = s.label_count();
    let (hx, hy) = (h.get(0) as i64, h.get(1) as i64);
    let last = span as i64;
    let search = |s: &mut OracleSession<'_>, axis: usize, dir: i64| -> i64 {
        let base = [hx, hy];
        let limit = if dir > 0 { last - base[axis] } else { base[axis] };
        let (mut lo, mut hi) = (0i64, limit + 1);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            let mut c = base;
            c[axis] += dir * mid;
            if member(s, h, &c) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        base[axis] + dir * lo
    };
    let a1 = search(s, 0, -1);
    let b1 = search(s, 0, 1);
    let a2 = search(s, 1, -1);
    let b2 = search(s, 1, 1);

    let mut bot = false;
    for c in [[a1, a2], [a1, b2], [b1, a2], [b1, b2]] {
        if !member(s, h, &c) {
            bot = true;
            break;
        }
    }
    if !bot {
        let outside = [
            [a1 - 1, a2],
            [a1, a2 - 1],
            [a1 - 1, b2],
            [a1, b2 + 1],
            [b1 + 1, a2],
            [b1, a2 - 1],
            [b1 + 1, b2],
            [b1, b2 + 1],
        ];
        bot = outside.iter().any(|c| member(s, h, c));
    }
    if !bot {
        let mx = [(a1 + b1).div_euclid(2), (a1 + b1 + 1).div_euclid(2)];
        let my = [(a2 + b2).div_euclid(2), (a2 + b2 + 1).div_euclid(2)];
        let mut probes: Vec<[i64; 2]> = Vec::new();
        for m in distinct(mx) {
            probes.push([m, a2 - 1]);
            probes.push([m, b2 + 1]);
        }
        for m in distinct(my) {
            probes.push([a1 - 1, m]);
            probes.push([b1 + 1, m]);
        }
        bot = probes.iter().any(|c| member(s, h, c));
    }
    let outcome = if bot {
        RejectOutcome::Bot
    } else if metric.box_diameter(&[a1 as f64, a2 as f64], &[b1 as f64, b2 as f64]) <= t1 + 1e-12 {
        RejectOutcome::Accept
    } else {
        RejectOutcome::Reject
    };
    Ok(RejectVerdict { outcome, queries_used: s.label_count() - start })
}

fn distinct(m: [i64; 2]) -> Vec<i64> {
    if m[0] == m[1] {
        vec![m[0]]
    } else {
        m.to_vec()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Domain;
    use crate::oracle::{box_grid, generate_adversarial_clustering, Clustering, GenParams, GridDensity, Partition, UniverseTag};

    fn with_cell(n: u32, inside: impl Fn(i64, i64) -> bool) -> Clustering {
        let dom = Domain::grid(n, 2).unwrap();
        let labels: Vec<usize> = dom
            .points()
            .unwrap()
            .enumerate()
            .map(|(i, p)| if inside(p.get(0) as i64, p.get(1) as i64) { 0 } else { i + 1 })
            .collect();
        Clustering::with_lex_min_reps(dom, &labels).unwrap()
    }

    fn discover_all(c: &Clustering) {
        let mu = GridDensity::uniform(*c.domain()).unwrap();
        let mut s = OracleSession::new(c, vec![&mu], 5).unwrap();
        for cell in 0..c.num_cells() {
            let r = discover_convex_grid_cell_2d(&mut s, &c.rep(cell)).unwrap();
            let mut want = c.cell_points(cell);
            want.sort();
            assert_eq!(r.container().unwrap().points(), want, "cell {cell}");
        }
    }

    #[test]
    fn rectangle_and_diamond() {
        discover_all(&with_cell(12, |x, y| (2..=3).contains(&x) && (5..=7).contains(&y)));
        discover_all(&with_cell(16, |x, y| (x - 8).abs() + (y - 8).abs() <= 3));
        discover_all(&with_cell(16, |x, y| (x - 1).abs() + (y - 14).abs() <= 4));
    }

    #[test]
    fn random_convex_cells() {
        let tag = UniverseTag::ConnectedConvex;
        for seed in 0..10 {
            let c = generate_adversarial_clustering(&tag, &GenParams { n: 24, d: 2, cells: 6, bits: 0 }, seed).unwrap();
            discover_all(&c);
        }
    }

    #[test]
    fn boxes_never_bot() {
        let c = box_grid(64, 2, 8).unwrap();
        let m = MetricSpace::lp(*c.domain(), 2.0).unwrap();
        let mu = GridDensity::uniform(*c.domain()).unwrap();
        let mut s = OracleSession::new(&c, vec![&mu], 5).unwrap();
        for cell in 0..c.num_cells() {
            let v = cc_vs_box_reject_2d(&mut s, &c.rep(cell), 0.2, 0.4, &m).unwrap();
            assert_eq!(v.outcome, RejectOutcome::Accept);
        }
        let v = cc_vs_box_reject_2d(&mut s, &c.rep(0), 0.05, 0.4, &m).unwrap();
        assert_eq!(v.outcome, RejectOutcome::Reject);
        assert!(cc_vs_box_reject_2d(&mut s, &c.rep(0), 0.35, 0.4, &m).is_err());
    }

    #[test]
    fn big_diamond_is_not_accepted() {
        let c = with_cell(64, |x, y| (x - 32).abs() + (y - 32).abs() <= 28);
        let m = MetricSpace::lp(*c.domain(), 2.0).unwrap();
        let mu = GridDensity::uniform(*c.domain()).unwrap();
        let mut s = OracleSession::new(&c, vec![&mu], 5).unwrap();
        let h = c.rep(c.cell_of(&Point::new(&[32, 32])));
        let v = cc_vs_box_reject_2d(&mut s, &h, 0.2, 0.4, &m).unwrap();
        assert_ne!(v.outcome, RejectOutcome::Accept);
    }
}
