//! Exact discovery for interval cells and axis-aligned box cells by binary search.

use super::{Container, Discovery, DiscoveryResult};
use crate::domain::{LatticeBox, Point};
use crate::error::{CoreError, Result};
use crate::oracle::OracleSession;

/// `true` iff the lattice point at `c` is in the cell of `h`. Points outside the
/// domain are outside every cell and cost nothing.
pub(crate) fn member(s: &mut OracleSession<'_>, h: &Point, c: &[i64]) -> bool {
    s.label_i64(c).is_some_and(|r| r == *h)
}

/// Farthest `t` in `[0, limit]` with `h + t·e_axis·dir` in the cell, assuming the
/// cell is contiguous along that line. At most `⌈log₂(limit+1)⌉` queries.
fn extent_along(s: &mut OracleSession<'_>, h: &Point, axis: usize, dir: i64, limit: i64) -> i64 {
    let base = h.to_i64();
    let at = |t: i64| {
        let mut c = base.clone();
        c[axis] += dir * t;
        c
    };
    // invariant: lo is inside, hi is the first known outside (limit+1 is off-domain)
    let mut lo = 0i64;
    let mut hi = limit + 1;
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if member(s, h, &at(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Interval of the representative `h` on a line domain. Uses at most
/// `2⌈log₂ n⌉` label queries.
pub fn discover_interval_cell(s: &mut OracleSession<'_>, h: &Point) -> Result<DiscoveryResult> {
    if s.domain().dim() != 1 {
        return Err(CoreError::DomainMismatch("interval discovery needs a line domain".into()));
    }
    discover_box_cell(s, h)
}

/// Box cell of `h`: binary search in both directions along each axis through
/// `h`. At most `2d⌈log₂ n⌉` label queries.
pub fn discover_box_cell(s: &mut OracleSession<'_>, h: &Point) -> Result<DiscoveryResult> {
    s.domain().check(h)?;
    let start = s.label_count();
    let span = s.domain().span() as i64;
    let d = h.dim();
    let mut lo = [0u32; crate::domain::MAX_DIM];
    let mut hi = [0u32; crate::domain::MAX_DIM];
    for axis in 0..d {
        let x = h.get(axis) as i64;
        let down = extent_along(s, h, axis, -1, x);
        let up = extent_along(s, h, axis, 1, span - x);
        lo[axis] = (x - down) as u32;
        hi[axis] = (x + up) as u32;
    }
    let b = LatticeBox::new(Point::new(&lo[..d]), Point::new(&hi[..d]));
    Ok(DiscoveryResult { outcome: Discovery::Container(Container::Box(b)), queries_used: s.label_count() - start })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{box_grid, Clustering, GridDensity, Partition};

    fn ceil_log2(n: u64) -> u64 {
        64 - (n - 1).leading_zeros() as u64
    }

    #[test]
    fn intervals_found_exactly() {
        let n = 100;
        let c = Clustering::from_breakpoints(n, &[1, 7, 50, 99]).unwrap();
        let mu = GridDensity::uniform(*c.domain()).unwrap();
        let mut s = OracleSession::new(&c, vec![&mu], 1).unwrap();
        for cell in 0..c.num_cells() {
            let h = c.rep(cell);
            let r = discover_interval_cell(&mut s, &h).unwrap();
            let pts = c.cell_points(cell);
            let want = LatticeBox::new(pts[0], *pts.last().unwrap());
            assert_eq!(r.container(), Some(&Container::Box(want)));
            assert!(r.queries_used <= 2 * ceil_log2(n as u64));
        }
    }

    #[test]
    fn boxes_found_exactly() {
        let c = box_grid(17, 2, 5).unwrap();
        let mu = GridDensity::uniform(*c.domain()).unwrap();
        let mut s = OracleSession::new(&c, vec![&mu], 1).unwrap();
        for cell in 0..c.num_cells() {
            let r = discover_box_cell(&mut s, &c.rep(cell)).unwrap();
            let got = r.container().unwrap().points();
            let mut want = c.cell_points(cell);
            want.sort();
            assert_eq!(got, want);
            assert!(r.queries_used <= 4 * ceil_log2(17));
        }
    }
}
