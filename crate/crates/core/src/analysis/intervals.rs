use serde::Serialize;

use crate::oracle::GraphKind;

/// `⟨⟨start, len⟩⟩` on `Z_n`: `|len|` consecutive vertices walking forward
/// (`len > 0`) or backward (`len < 0`) from `start`. Edge `j` joins `j` and `j+1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct CircularInterval {
    pub n: usize,
    pub start: usize,
    pub len: i64,
}

impl CircularInterval {
    pub fn new(n: usize, start: i64, len: i64) -> CircularInterval {
        assert!(n > 0 && len.unsigned_abs() as usize <= n, "interval of length {len} on Z_{n}");
        CircularInterval { n, start: start.rem_euclid(n as i64) as usize, len }
    }

    pub fn size(&self) -> usize {
        self.len.unsigned_abs() as usize
    }

    pub fn elements(&self) -> Vec<usize> {
        let n = self.n as i64;
        let step = self.len.signum();
        (0..self.len.abs()).map(|k| (self.start as i64 + step * k).rem_euclid(n) as usize).collect()
    }

    /// `I*`: the edges inside the interval, itself an interval of edge indices.
    pub fn edge_interval(&self) -> CircularInterval {
        match self.len {
            0 => CircularInterval::new(self.n, self.start as i64, 0),
            d if d >= 1 => CircularInterval::new(self.n, self.start as i64, d - 1),
            d => CircularInterval::new(self.n, self.start as i64 - 1, 1 - d.abs()),
        }
    }

    pub fn edges(&self) -> Vec<usize> {
        self.edge_interval().elements()
    }

    pub fn edge_count(&self) -> usize {
        self.size().saturating_sub(1)
    }

    /// Whether the interval uses edge `n−1`, i.e. it is not an interval of the path.
    pub fn wraps(&self) -> bool {
        self.edges().contains(&(self.n - 1))
    }
}

/// Both forward arcs joining `i` and `j` on the cycle, as `(from i, from j)`.
fn arcs(n: usize, i: usize, j: usize) -> (CircularInterval, CircularInterval) {
    let a = (j + n - i) % n;
    let b = (i + n - j) % n;
    (CircularInterval::new(n, i as i64, a as i64 + 1), CircularInterval::new(n, j as i64, b as i64 + 1))
}

fn pick(a: CircularInterval, b: CircularInterval, smaller: bool) -> CircularInterval {
    let (ea, eb) = (a.edge_count(), b.edge_count());
    if ea == eb {
        // ties go to the smaller start
        return if a.start <= b.start { a } else { b };
    }
    if (ea < eb) == smaller {
        a
    } else {
        b
    }
}

/// The interval of `kind` from `i` to `j` with fewer edges. On the path there is only one.
pub fn small_interval(kind: GraphKind, n: usize, i: usize, j: usize) -> CircularInterval {
    let (lo, hi) = (i.min(j), i.max(j));
    match kind {
        GraphKind::Path => CircularInterval::new(n, lo as i64, (hi - lo) as i64 + 1),
        GraphKind::Cycle => {
            let (a, b) = arcs(n, lo, hi);
            pick(a, b, true)
        }
    }
}

/// The other arc on the cycle; `None` on the path or when `i == j`.
pub fn large_interval(kind: GraphKind, n: usize, i: usize, j: usize) -> Option<CircularInterval> {
    if kind == GraphKind::Path || i == j {
        return None;
    }
    let (lo, hi) = (i.min(j), i.max(j));
    let (a, b) = arcs(n, lo, hi);
    let s = pick(a, b, true);
    Some(if s == a { b } else { a })
}
