//! Universe tags, membership checkers and instance generators.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::clustering::{Clustering, Partition};
use super::lattice::{BoxPartition, LatticePartition, VoronoiPartition};
use super::random_draw::{draw_random_clustering, GraphKind};
use crate::domain::{Domain, LatticeBox, Point, MAX_DIM};
use crate::error::{CoreError, Result};
use crate::{rng_from_seed, Rng};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum UniverseTag {
    /// Connected cells of the grid graph.
    Connected,
    /// Connected cells equal to the lattice points of their convex hull.
    ConnectedConvex,
    /// Axis-aligned boxes.
    Boxes,
    /// Convex cells holding a Euclidean ball of radius `delta` (unit-cube units) around the rep.
    ConvexInnerBall { delta: f64 },
    /// Boxes holding such a ball.
    BoxInnerBall { delta: f64 },
    Intervals,
    RandomPathCycle { kind: GraphKind, rho: f64 },
}

/// Generator parameters. `n`/`d` give the grid; cube universes use `d` and `bits`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub n: u32,
    pub d: usize,
    pub cells: usize,
    pub bits: u32,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams { n: 16, d: 2, cells: 8, bits: 12 }
    }
}

/// Grid neighbours at ℓ1 distance one.
pub fn axis_neighbors(domain: &Domain, p: &Point) -> Vec<Point> {
    let mut out = Vec::with_capacity(2 * domain.dim());
    for i in 0..domain.dim() {
        let c = p.get(i);
        if c > 0 {
            out.push(p.with(i, c - 1));
        }
        if c + 1 < domain.side() {
            out.push(p.with(i, c + 1));
        }
    }
    out
}

pub fn check_connected(c: &Clustering) -> bool {
    let dom = *c.domain();
    let cells = c.cells();
    let mut seen = vec![false; c.gamma().len()];
    for members in &cells {
        let start = members[0];
        let cell = c.gamma()[start];
        let mut count = 0usize;
        let mut q = VecDeque::from([start]);
        seen[start] = true;
        while let Some(i) = q.pop_front() {
            count += 1;
            for nb in axis_neighbors(&dom, &dom.point(i)) {
                let j = dom.index(&nb);
                if !seen[j] && c.gamma()[j] == cell {
                    seen[j] = true;
                    q.push_back(j);
                }
            }
        }
        if count != members.len() {
            return false;
        }
    }
    true
}

pub fn check_boxes(c: &Clustering) -> bool {
    let dom = *c.domain();
    c.cells().iter().all(|members| {
        let pts: Vec<Point> = members.iter().map(|&i| dom.point(i)).collect();
        bounding_box(&pts).count() == pts.len() as u64
    })
}

pub fn bounding_box(pts: &[Point]) -> LatticeBox {
    let d = pts[0].dim();
    let mut lo = [u32::MAX; MAX_DIM];
    let mut hi = [0u32; MAX_DIM];
    for p in pts {
        for i in 0..d {
            lo[i] = lo[i].min(p.get(i));
            hi[i] = hi[i].max(p.get(i));
        }
    }
    LatticeBox::new(Point::new(&lo[..d]), Point::new(&hi[..d]))
}

/// Number of lattice points in the convex hull of planar points (Pick's theorem).
pub fn hull_lattice_count(pts: &[Point]) -> u64 {
    let hull = crate::domain::convex_hull_2d(pts);
    let v: Vec<(i64, i64)> = hull.iter().map(|p| (p.get(0) as i64, p.get(1) as i64)).collect();
    match v.len() {
        0 => 0,
        1 => 1,
        2 => gcd((v[0].0 - v[1].0).abs(), (v[0].1 - v[1].1).abs()) as u64 + 1,
        _ => {
            let mut twice_area = 0i64;
            let mut boundary = 0i64;
            for k in 0..v.len() {
                let (a, b) = (v[k], v[(k + 1) % v.len()]);
                twice_area += a.0 * b.1 - b.0 * a.1;
                boundary += gcd((a.0 - b.0).abs(), (a.1 - b.1).abs());
            }
            let twice_area = twice_area.abs();
            // I + B = A + B/2 + 1
            ((twice_area + boundary) / 2 + 1) as u64
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Every cell equals the lattice points of its convex hull (d ≤ 2).
pub fn check_convex(c: &Clustering) -> Result<bool> {
    let dom = *c.domain();
    match dom.dim() {
        1 => Ok(check_boxes(c)),
        2 => Ok(c.cells().iter().all(|members| {
            let pts: Vec<Point> = members.iter().map(|&i| dom.point(i)).collect();
            hull_lattice_count(&pts) == pts.len() as u64
        })),
        d => Err(CoreError::Unsupported(format!("convexity check in dimension {d}"))),
    }
}

/// Lattice points within Euclidean distance `delta` (unit-cube units) of each rep
/// lie in the rep's cell.
pub fn check_inner_ball(p: &dyn Partition, delta: f64) -> bool {
    let dom = *p.domain();
    let r = delta * dom.span() as f64;
    let ri = r.floor() as i64;
    let d = dom.dim();
    (0..p.num_cells()).all(|cell| {
        let h = p.rep(cell);
        let center: Vec<i64> = h.to_i64();
        let width = (2 * ri + 1) as usize;
        let total = width.pow(d as u32);
        (0..total).all(|mut k| {
            let mut c = [0i64; MAX_DIM];
            let mut sq = 0i64;
            for i in 0..d {
                let off = (k % width) as i64 - ri;
                k /= width;
                c[i] = center[i] + off;
                sq += off * off;
            }
            if (sq as f64) > r * r {
                return true;
            }
            match dom.point_from_i64(&c[..d]) {
                Some(q) => p.cell_of(&q) == cell,
                None => false,
            }
        })
    })
}

/// Membership check for an explicit clustering.
pub fn check_universe(tag: &UniverseTag, c: &Clustering) -> Result<bool> {
    Ok(match tag {
        UniverseTag::Connected => check_connected(c),
        UniverseTag::ConnectedConvex => check_connected(c) && check_convex(c)?,
        UniverseTag::Boxes => check_boxes(c),
        UniverseTag::Intervals => c.domain().dim() == 1 && check_boxes(c),
        UniverseTag::ConvexInnerBall { delta } => {
            let ok = if c.domain().dim() <= 2 { check_convex(c)? } else { true };
            ok && check_inner_ball(c, *delta)
        }
        UniverseTag::BoxInnerBall { delta } => check_boxes(c) && check_inner_ball(c, *delta),
        UniverseTag::RandomPathCycle { .. } => c.domain().dim() == 1 && check_cyclic_intervals(c),
    })
}

/// Every cell is a run of consecutive vertices modulo `n`.
fn check_cyclic_intervals(c: &Clustering) -> bool {
    let g = c.gamma();
    let n = g.len();
    let changes = (0..n).filter(|&i| g[i] != g[(i + 1) % n]).count();
    changes == 0 || changes == c.num_cells()
}

/// Random clustering of `tag`'s universe on an enumerable grid (or small cube).
pub fn generate_adversarial_clustering(tag: &UniverseTag, params: &GenParams, seed: u64) -> Result<Clustering> {
    let mut rng = rng_from_seed(seed);
    let c = match tag {
        UniverseTag::Intervals => random_intervals(params.n, params.cells, &mut rng)?,
        UniverseTag::Boxes => {
            let dom = Domain::grid(params.n, params.d)?;
            let boxes = kd_split(&dom, params.cells, 1, &mut rng)?;
            boxes_to_clustering(dom, &boxes)?
        }
        UniverseTag::Connected => region_growing(Domain::grid(params.n, params.d)?, params.cells, &mut rng)?,
        UniverseTag::ConnectedConvex => convex_grid_cells(params.n, params.cells, &mut rng)?,
        UniverseTag::ConvexInnerBall { .. } | UniverseTag::BoxInnerBall { .. } => {
            generate_lattice_partition(tag, params, seed)?.materialize()?
        }
        UniverseTag::RandomPathCycle { kind, rho } => {
            draw_random_clustering(*kind, params.n, *rho, seed)?.clustering().clone()
        }
    };
    if !check_universe(tag, &c)? {
        return Err(CoreError::Unsatisfiable(format!("generated clustering fails the {tag:?} checker")));
    }
    Ok(c)
}

/// Implicit inner-ball partitions of the cube lattice `Cube{d, bits}`.
pub fn generate_lattice_partition(tag: &UniverseTag, params: &GenParams, seed: u64) -> Result<LatticePartition> {
    let dom = Domain::cube(params.d, params.bits)?;
    let mut rng = rng_from_seed(seed);
    match *tag {
        UniverseTag::ConvexInnerBall { delta } => {
            let seeds = separated_seeds(&dom, params.cells, delta, &mut rng)?;
            Ok(LatticePartition::Voronoi(VoronoiPartition::new(dom, seeds)?))
        }
        UniverseTag::BoxInnerBall { delta } => {
            let r = (delta * dom.span() as f64).ceil() as u32;
            let boxes = kd_split(&dom, params.cells, 2 * r + 1, &mut rng)?;
            let reps = boxes
                .iter()
                .map(|b| {
                    let c: Vec<u32> = (0..b.dim()).map(|i| b.lo.get(i) + (b.side(i) - 1) / 2).collect();
                    Point::new(&c)
                })
                .collect();
            Ok(LatticePartition::Boxes(BoxPartition::new(dom, boxes, reps)?))
        }
        _ => Err(CoreError::Unsupported(format!("{tag:?} has no implicit lattice generator"))),
    }
}

fn random_intervals(n: u32, cells: usize, rng: &mut Rng) -> Result<Clustering> {
    if cells == 0 || cells > n as usize {
        return Err(CoreError::Unsatisfiable(format!("{cells} intervals on [{n}]")));
    }
    let mut cuts: Vec<u32> = (1..n).collect();
    cuts.shuffle(rng);
    cuts.truncate(cells - 1);
    Clustering::from_breakpoints(n, &cuts)
}

/// Axis-aligned grid of boxes with side `block` (last boxes may be shorter).
pub fn box_grid(n: u32, d: usize, block: u32) -> Result<Clustering> {
    let dom = Domain::grid(n, d)?;
    if block == 0 {
        return Err(CoreError::InvalidParameter("block side 0".into()));
    }
    let per_axis = n.div_ceil(block) as usize;
    let labels: Vec<usize> = dom
        .points()?
        .map(|p| p.coords().iter().rev().fold(0usize, |acc, &c| acc * per_axis + (c / block) as usize))
        .collect();
    Clustering::with_lex_min_reps(dom, &labels)
}

fn boxes_to_clustering(dom: Domain, boxes: &[LatticeBox]) -> Result<Clustering> {
    let size = dom.enumerable_size()?;
    let mut labels = vec![usize::MAX; size];
    for (k, b) in boxes.iter().enumerate() {
        for p in b.points() {
            labels[dom.index(&p)] = k;
        }
    }
    Clustering::with_lex_min_reps(dom, &labels)
}

/// Random KD splits until `cells` boxes exist; every side keeps at least `min_side` points.
pub fn kd_split(dom: &Domain, cells: usize, min_side: u32, rng: &mut Rng) -> Result<Vec<LatticeBox>> {
    if cells == 0 {
        return Err(CoreError::Unsatisfiable("zero cells".into()));
    }
    let mut boxes = vec![LatticeBox::whole(dom)];
    if (0..dom.dim()).any(|i| boxes[0].side(i) < min_side) {
        return Err(CoreError::Unsatisfiable(format!("domain thinner than {min_side}")));
    }
    let mut stuck = 0;
    while boxes.len() < cells {
        let k = rng.gen_range(0..boxes.len());
        let b = boxes[k];
        let axes: Vec<usize> = (0..b.dim()).filter(|&i| b.side(i) >= 2 * min_side).collect();
        if axes.is_empty() {
            stuck += 1;
            if stuck > 50 * cells + 100 {
                return Err(CoreError::Unsatisfiable(format!("cannot split into {cells} boxes with side >= {min_side}")));
            }
            continue;
        }
        let axis = axes[rng.gen_range(0..axes.len())];
        let lo = b.lo.get(axis);
        // First coordinate of the upper part.
        let cut = rng.gen_range(lo + min_side..=b.hi.get(axis) + 1 - min_side);
        let left = LatticeBox::new(b.lo, b.hi.with(axis, cut - 1));
        let right = LatticeBox::new(b.lo.with(axis, cut), b.hi);
        boxes[k] = left;
        boxes.push(right);
    }
    Ok(boxes)
}

/// Connected, typically non-convex cells by randomized multi-source growth.
fn region_growing(dom: Domain, cells: usize, rng: &mut Rng) -> Result<Clustering> {
    let size = dom.enumerable_size()?;
    if cells == 0 || cells > size {
        return Err(CoreError::Unsatisfiable(format!("{cells} blobs on {size} points")));
    }
    let mut labels = vec![usize::MAX; size];
    let mut idx: Vec<usize> = (0..size).collect();
    idx.shuffle(rng);
    let mut active: Vec<usize> = Vec::new();
    for (k, &i) in idx.iter().take(cells).enumerate() {
        labels[i] = k;
        active.push(i);
    }
    while !active.is_empty() {
        let a = rng.gen_range(0..active.len());
        let i = active[a];
        let free: Vec<Point> = axis_neighbors(&dom, &dom.point(i))
            .into_iter()
            .filter(|q| labels[dom.index(q)] == usize::MAX)
            .collect();
        if free.is_empty() {
            active.swap_remove(a);
            continue;
        }
        let q = free[rng.gen_range(0..free.len())];
        let j = dom.index(&q);
        labels[j] = labels[i];
        active.push(j);
    }
    Clustering::with_lex_min_reps(dom, &labels)
}

/// Voronoi cells of random seeds on `[n]²`, retried until every cell is connected.
fn convex_grid_cells(n: u32, cells: usize, rng: &mut Rng) -> Result<Clustering> {
    let dom = Domain::grid(n, 2)?;
    for _ in 0..200 {
        let mut all: Vec<usize> = (0..dom.enumerable_size()?).collect();
        all.shuffle(rng);
        let seeds: Vec<Point> = all.iter().take(cells).map(|&i| dom.point(i)).collect();
        let v = VoronoiPartition::new(dom, seeds)?;
        let c = LatticePartition::Voronoi(v).materialize()?;
        if check_connected(&c) && check_convex(&c)? {
            return Ok(c);
        }
    }
    Err(CoreError::Unsatisfiable(format!("no connected convex {cells}-cell partition of [{n}]^2 found")))
}

/// Seeds at Euclidean distance > 2δ from each other and ≥ δ from the cube's faces.
fn separated_seeds(dom: &Domain, cells: usize, delta: f64, rng: &mut Rng) -> Result<Vec<Point>> {
    let span = dom.span() as f64;
    let r = (delta * span).ceil() as u32;
    if 2 * r >= dom.span() {
        return Err(CoreError::Unsatisfiable(format!("delta {delta} leaves no room for a seed")));
    }
    let min_sq = (2.0 * delta * span).powi(2);
    let d = dom.dim();
    let mut seeds: Vec<Point> = Vec::new();
    let mut attempts = 0;
    while seeds.len() < cells {
        attempts += 1;
        if attempts > 2000 * cells + 1000 {
            return Err(CoreError::Unsatisfiable(format!("cannot place {cells} seeds with separation 2*{delta}")));
        }
        let c: Vec<u32> = (0..d).map(|_| rng.gen_range(r..=dom.span() - r)).collect();
        let p = Point::new(&c);
        let ok = seeds.iter().all(|s| {
            let sq: f64 = s.coords().iter().zip(p.coords()).map(|(&a, &b)| (a as f64 - b as f64).powi(2)).sum();
            sq > min_sq
        });
        if ok {
            seeds.push(p);
        }
    }
    Ok(seeds)
}
