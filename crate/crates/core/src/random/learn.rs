use serde::Serialize;

use crate::domain::Point;
use crate::oracle::{GraphKind, OracleSession};

/// Cells of a 1D path/cycle clustering as `(start, len)` runs in walking
/// order, with the representative each run reported.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LearnedCells {
    pub runs: Vec<(u32, u32, Point)>,
}

impl LearnedCells {
    pub fn len(&self) -> usize {
        self.runs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn sizes(&self) -> Vec<u32> {
        self.runs.iter().map(|r| r.1).collect()
    }
}

fn label(s: &mut OracleSession<'_>, x: u32) -> Point {
    s.label_i64(&[x as i64]).expect("walk stays in the domain")
}

/// Last `y ∈ [lo, hi]` with `label(y) = h`, given `label(lo) = h` and that the
/// matching points form a prefix of `[lo, hi]`.
fn last_match(s: &mut OracleSession<'_>, h: &Point, lo: u32, hi: u32) -> u32 {
    let (mut a, mut b) = (lo, hi);
    while a < b {
        let mid = a + (b - a).div_ceil(2);
        if label(s, mid) == *h {
            a = mid;
        } else {
            b = mid - 1;
        }
    }
    a
}

/// Learns every cell of a clustering of `[n]` into runs, one binary search per
/// cell. On the cycle a cell wrapping past `n−1` is detected by probing `n−1`
/// and its head is walked linearly. `None` once more than `cap` cells are seen.
pub fn learn_cells_by_binary_search(s: &mut OracleSession<'_>, kind: GraphKind, cap: usize) -> Option<LearnedCells> {
    let n = s.domain().side();
    let h0 = label(s, 0);
    let mut runs: Vec<(u32, u32, Point)> = Vec::new();
    let end = n - 1;
    let mut x;
    if kind == GraphKind::Cycle && n > 1 && label(s, n - 1) == h0 {
        // 0 and n−1 share a cell: walk the head until it leaves
        x = 1;
        while x < n && label(s, x) == h0 {
            x += 1;
        }
        if x == n {
            return Some(LearnedCells { runs: vec![(0, n, h0)] });
        }
        let head = x;
        // the tail of the wrapping cell starts after the last non-h0 run
        let mut tail_start = n;
        while x < tail_start {
            let h = label(s, x);
            if h == h0 {
                tail_start = x;
                break;
            }
            let last = last_match(s, &h, x, end);
            runs.push((x, last - x + 1, h));
            if runs.len() + 1 > cap {
                return None;
            }
            x = last + 1;
        }
        let tail = n - tail_start;
        runs.insert(0, (tail_start % n, tail + head, h0));
        return Some(LearnedCells { runs });
    }
    x = 0;
    while x < n {
        let h = if x == 0 { h0 } else { label(s, x) };
        let last = last_match(s, &h, x, end);
        runs.push((x, last - x + 1, h));
        if runs.len() > cap {
            return None;
        }
        x = last + 1;
    }
    Some(LearnedCells { runs })
}
