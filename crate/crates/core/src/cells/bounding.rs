//! Bounding boxes of convex cells that contain a ball around their representative,
//! and the discovery / rejection procedures built on them.
//!
//! Extents in the plane come from a certified ray search: rays from `h` locate the
//! boundary by bisection, each outside point `Q` rules out the shadow cone behind
//! it (a member there would put `Q` inside the hull of itself and the inner ball),
//! and arcs are refined until the upper bound on every axis extent is within `δ′`
//! of a witnessed member. Lines are handled exactly by binary search.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::Rng as _;

use super::line::member;
use super::{Container, Discovery, DiscoveryResult, RejectOutcome, RejectVerdict};
use crate::domain::{LatticeBox, MetricSpace, Point};
use crate::error::{CoreError, Result};
use crate::oracle::OracleSession;
use crate::stats::median;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoxParams {
    pub dim: usize,
    /// Inner-ball radius in unit-cube units.
    pub delta: f64,
    pub rho_fail: f64,
    /// Independent optimizer runs per extent (median taken).
    pub reps: usize,
    /// Ray budget per run before declaring failure.
    pub max_rays: usize,
}

impl BoxParams {
    pub fn new(dim: usize, delta: f64) -> BoxParams {
        BoxParams { dim, delta, rho_fail: 0.01, reps: 9, max_rays: 4000 }
    }
}

/// `B ⊆ B′` in real lattice coordinates, with the extent estimates behind them.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundingBoxPair {
    pub center: Vec<f64>,
    pub minus: Vec<f64>,
    pub plus: Vec<f64>,
    pub delta_prime: f64,
    pub inner_lo: Vec<f64>,
    pub inner_hi: Vec<f64>,
    pub outer_lo: Vec<f64>,
    pub outer_hi: Vec<f64>,
}

impl BoundingBoxPair {
    fn from_extents(h: &Point, minus: Vec<f64>, plus: Vec<f64>, delta_prime: f64) -> BoundingBoxPair {
        let center: Vec<f64> = h.coords().iter().map(|&c| c as f64).collect();
        let m2 = 2.0 * delta_prime;
        let inner_lo = center.iter().zip(&minus).map(|(c, l)| c - l + m2).collect();
        let inner_hi = center.iter().zip(&plus).map(|(c, l)| c + l - m2).collect();
        let outer_lo = center.iter().zip(&minus).map(|(c, l)| c - l - m2).collect();
        let outer_hi = center.iter().zip(&plus).map(|(c, l)| c + l + m2).collect();
        BoundingBoxPair { center, minus, plus, delta_prime, inner_lo, inner_hi, outer_lo, outer_hi }
    }

    /// The three box conditions against the true bounding box of the cell:
    /// `B ⊆ int B*`, `B* ⊆ int B′`, and `side_i(B′) ≤ 2·side_i(B)`.
    pub fn check(&self, truth: &LatticeBox) -> [bool; 3] {
        let d = self.center.len();
        let mut ok = [true; 3];
        for i in 0..d {
            let (lo, hi) = (truth.lo.get(i) as f64, truth.hi.get(i) as f64);
            if !(self.inner_lo[i] > lo && self.inner_hi[i] < hi) {
                ok[0] = false;
            }
            if !(self.outer_lo[i] < lo && self.outer_hi[i] > hi) {
                ok[1] = false;
            }
            let inner = self.inner_hi[i] - self.inner_lo[i];
            let outer = self.outer_hi[i] - self.outer_lo[i];
            if !(inner > 0.0 && outer <= 2.0 * inner) {
                ok[2] = false;
            }
        }
        ok
    }

    /// Lattice points of `B′` inside the domain.
    pub fn outer_lattice(&self, span: u32) -> LatticeBox {
        let lo: Vec<u32> = self.outer_lo.iter().map(|&x| x.ceil().clamp(0.0, span as f64) as u32).collect();
        let hi: Vec<u32> = self.outer_hi.iter().map(|&x| x.floor().clamp(0.0, span as f64) as u32).collect();
        LatticeBox::new(Point::new(&lo), Point::new(&hi))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BoxOutcome {
    Certified(BoundingBoxPair),
    Failed(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoxResult {
    pub outcome: BoxOutcome,
    pub queries_used: u64,
}

/// Bounding-box pair for the convex cell of `h`. Supports `d ≤ 2`.
pub fn bounding_box(s: &mut OracleSession<'_>, h: &Point, params: &BoxParams) -> Result<BoxResult> {
    s.domain().check(h)?;
    let d = s.domain().dim();
    if d != params.dim {
        return Err(CoreError::DomainMismatch(format!("params for d={}, domain has d={d}", params.dim)));
    }
    if !(params.delta > 0.0 && params.delta < 1.0) || params.reps == 0 {
        return Err(CoreError::InvalidParameter(format!("delta {} / reps {}", params.delta, params.reps)));
    }
    let span = s.domain().span() as f64;
    let delta_lat = params.delta * span;
    let dp = delta_lat / 8.0;
    let start = s.label_count();
    let outcome = match d {
        1 => {
            let x = h.get(0) as i64;
            let last = span as i64;
            let up = bisect_line(s, h, x, 1, last - x);
            let down = bisect_line(s, h, x, -1, x);
            BoxOutcome::Certified(BoundingBoxPair::from_extents(h, vec![down as f64], vec![up as f64], dp))
        }
        2 => {
            let mut runs: Vec<[f64; 4]> = Vec::new();
            let mut fails = Vec::new();
            for _ in 0..params.reps {
                let phase: f64 = s.rng().gen::<f64>() * 2.0 * PI;
                match planar_extents(s, h, delta_lat, dp, phase, params.max_rays) {
                    Ok(e) => runs.push(e),
                    Err(msg) => fails.push(msg),
                }
            }
            if runs.len() * 2 <= params.reps {
                BoxOutcome::Failed(format!("{} of {} runs failed: {}", fails.len(), params.reps, fails.join("; ")))
            } else {
                let med = |k: usize| {
                    let mut v: Vec<f64> = runs.iter().map(|r| r[k]).collect();
                    median(&mut v)
                };
                // order: +x, -x, +y, -y
                let plus = vec![med(0), med(2)];
                let minus = vec![med(1), med(3)];
                BoxOutcome::Certified(BoundingBoxPair::from_extents(h, minus, plus, dp))
            }
        }
        _ => return Err(CoreError::Unsupported(format!("bounding box search in d={d}"))),
    };
    Ok(BoxResult { outcome, queries_used: s.label_count() - start })
}

fn bisect_line(s: &mut OracleSession<'_>, h: &Point, x: i64, dir: i64, limit: i64) -> i64 {
    let (mut lo, mut hi) = (0i64, limit + 1);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if member(s, h, &[x + dir * mid]) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[derive(Clone, Copy, Debug)]
struct Ray {
    /// Direction of `q` seen from `h`, in `[0, 2π)`; sectors are bounded by these.
    phi: f64,
    /// Outside witness: a lattice non-member, or a point just beyond the domain.
    q: (f64, f64),
    /// Lattice member on the ray.
    pin: (f64, f64),
}

struct Planar<'s, 'a> {
    s: &'s mut OracleSession<'a>,
    h: Point,
    hx: f64,
    hy: f64,
    span: f64,
    cache: HashMap<(i64, i64), bool>,
}

impl Planar<'_, '_> {
    fn inside(&mut self, x: f64, y: f64) -> bool {
        let k = (x.round() as i64, y.round() as i64);
        if k == (self.hx as i64, self.hy as i64) {
            return true;
        }
        if let Some(&v) = self.cache.get(&k) {
            return v;
        }
        let v = member(self.s, &self.h, &[k.0, k.1]);
        self.cache.insert(k, v);
        v
    }

    fn ray(&mut self, theta: f64) -> Ray {
        let (uy, ux) = theta.sin_cos();
        let exit = |c: f64, u: f64, span: f64| {
            if u > 1e-12 {
                (span - c) / u
            } else if u < -1e-12 {
                -c / u
            } else {
                f64::INFINITY
            }
        };
        let t_max = exit(self.hx, ux, self.span).min(exit(self.hy, uy, self.span));
        let (hx, hy) = (self.hx, self.hy);
        let at = move |t: f64| (hx + t * ux, hy + t * uy);
        let e = at(t_max);
        if self.inside(e.0, e.1) {
            return self.finish(at(t_max + 1e-6), (e.0.round(), e.1.round()));
        }
        let (mut lo, mut hi) = (0.0, t_max);
        while hi - lo > 0.25 {
            let mid = 0.5 * (lo + hi);
            let p = at(mid);
            if self.inside(p.0, p.1) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let p = at(lo);
        let q = at(hi);
        self.finish((q.0.round(), q.1.round()), (p.0.round(), p.1.round()))
    }

    fn finish(&self, q: V2, pin: V2) -> Ray {
        let phi = (q.1 - self.hy).atan2(q.0 - self.hx).rem_euclid(2.0 * PI);
        Ray { phi, q, pin }
    }
}

const DIRS: [(f64, f64); 4] = [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)];
/// Neighbouring pins used as cone sources on each side of an arc.
const PIN_REACH: usize = 3;

type V2 = (f64, f64);

fn cross(u: V2, w: V2) -> f64 {
    u.0 * w.1 - u.1 * w.0
}

fn rot(v: V2, ang: f64) -> V2 {
    let (s, c) = ang.sin_cos();
    (c * v.0 - s * v.1, s * v.0 + c * v.1)
}

/// Keeps the part of a convex polygon where the affine `g` is ≥ 0.
fn clip(poly: &[V2], g: impl Fn(V2) -> f64) -> Vec<V2> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        let (gp, gq) = (g(p), g(q));
        if gp >= 0.0 {
            out.push(p);
        }
        if (gp >= 0.0) != (gq >= 0.0) {
            let t = gp / (gp - gq);
            out.push((p.0 + t * (q.0 - p.0), p.1 + t * (q.1 - p.1)));
        }
    }
    out
}

/// One certified run: extents `[+x, −x, +y, −y]` in lattice units, or why it gave up.
fn planar_extents(
    s: &mut OracleSession<'_>,
    h: &Point,
    delta_lat: f64,
    dp: f64,
    phase: f64,
    max_rays: usize,
) -> std::result::Result<[f64; 4], String> {
    let span = s.domain().span() as f64;
    let (hx, hy) = (h.get(0) as f64, h.get(1) as f64);
    // the hull of the lattice points of a radius-r disc holds the disc of radius r−1
    let ball = delta_lat - 1.0;
    if ball <= 0.0 {
        return Err(format!("inner ball of {delta_lat} lattice units is too small"));
    }
    let mut pl = Planar { s, h: *h, hx, hy, span, cache: HashMap::new() };
    let n0 = 32;
    let mut rays: Vec<Ray> = (0..n0).map(|k| pl.ray(phase + 2.0 * PI * k as f64 / n0 as f64)).collect();
    rays.sort_by(|x, y| x.phi.partial_cmp(&y.phi).unwrap());
    let f = |e: usize, p: V2| DIRS[e].0 * (p.0 - hx) + DIRS[e].1 * (p.1 - hy);

    loop {
        let k = rays.len();
        let mut lower = [0.0f64; 4];
        for r in &rays {
            for (e, l) in lower.iter_mut().enumerate() {
                *l = l.max(f(e, r.pin));
            }
        }
        let mut upper = [0.0f64; 4];
        let mut arc_bounds: Vec<[f64; 4]> = Vec::with_capacity(k);
        for i in 0..k {
            let poly = arc_region(hx, hy, span, ball, &rays, i);
            let mut ab = [0.0f64; 4];
            for (e, slot) in ab.iter_mut().enumerate() {
                *slot = poly.iter().map(|&p| f(e, p)).fold(0.0, f64::max);
                upper[e] = upper[e].max(*slot);
            }
            arc_bounds.push(ab);
        }
        let open: Vec<usize> = (0..4).filter(|&e| upper[e] - lower[e] > dp).collect();
        if open.is_empty() {
            let mut out = [0.0; 4];
            for e in 0..4 {
                out[e] = 0.5 * (lower[e] + upper[e]);
            }
            return Ok(out);
        }
        let mut fresh = Vec::new();
        for (i, ab) in arc_bounds.iter().enumerate() {
            if open.iter().any(|&e| ab[e] - lower[e] > dp) {
                let width = arc_width(&rays, i);
                if width < 1e-9 {
                    return Err("arc refinement reached angular resolution".into());
                }
                fresh.push(rays[i].phi + 0.5 * width);
            }
        }
        if rays.len() + fresh.len() > max_rays {
            return Err(format!("ray budget {max_rays} exhausted"));
        }
        for t in fresh {
            rays.push(pl.ray(t));
        }
        rays.sort_by(|x, y| x.phi.partial_cmp(&y.phi).unwrap());
    }
}

/// Polygon containing every hull point in the sector from ray `i` to ray `i+1`:
/// the sector, cut by the domain square and by the near sides of the two cone
/// boundaries through the outside witnesses.
fn arc_region(hx: f64, hy: f64, span: f64, ball: f64, rays: &[Ray], i: usize) -> Vec<V2> {
    let k = rays.len();
    let a = &rays[i];
    let b = &rays[(i + 1) % k];
    let h = (hx, hy);
    let width = arc_width(rays, i);
    if width == 0.0 {
        return Vec::new();
    }
    if width >= PI {
        // only the domain bounds a sector this wide
        return vec![(0.0, 0.0), (span, 0.0), (span, span), (0.0, span)];
    }
    let ua = (a.phi.cos(), a.phi.sin());
    let ub = (b.phi.cos(), b.phi.sin());
    let far = 3.0 * span + 10.0;
    let mut poly = vec![h, (hx + far * ua.0, hy + far * ua.1), (hx + far * ub.0, hy + far * ub.1)];

    // widest cone angle at a witness, turning towards the other ray (sign = +1 ccw)
    let cone = |q: V2, u: V2, sign: f64, pins: &mut dyn Iterator<Item = V2>| -> f64 {
        let r = ((q.0 - hx).powi(2) + (q.1 - hy).powi(2)).sqrt();
        let mut best = (ball / r).min(1.0).asin();
        for p in pins {
            let d = (q.0 - p.0, q.1 - p.1);
            let ang = sign * cross(u, d).atan2(u.0 * d.0 + u.1 * d.1);
            if ang > best {
                best = ang;
            }
        }
        best.min(PI - 1e-9)
    };
    let phi_a = cone(a.q, ua, 1.0, &mut (1..=PIN_REACH).map(|j| rays[(i + k * PIN_REACH - j) % k].pin));
    let phi_b = cone(b.q, ub, -1.0, &mut (1..=PIN_REACH).map(|j| rays[(i + 1 + j) % k].pin));
    let wa = rot(ua, phi_a);
    let wb = rot(ub, -phi_b);
    let side_a = cross(wa, (h.0 - a.q.0, h.1 - a.q.1)).signum();
    let side_b = cross(wb, (h.0 - b.q.0, h.1 - b.q.1)).signum();
    poly = clip(&poly, |x| side_a * cross(wa, (x.0 - a.q.0, x.1 - a.q.1)));
    poly = clip(&poly, |x| side_b * cross(wb, (x.0 - b.q.0, x.1 - b.q.1)));
    poly = clip(&poly, |x| x.0);
    poly = clip(&poly, |x| span - x.0);
    poly = clip(&poly, |x| x.1);
    clip(&poly, |x| span - x.1)
}

/// Angle swept from ray `i` to ray `i+1` (cyclically).
fn arc_width(rays: &[Ray], i: usize) -> f64 {
    let k = rays.len();
    let w = (rays[(i + 1) % k].phi - rays[i].phi).rem_euclid(2.0 * PI);
    if k == 1 {
        2.0 * PI
    } else {
        w
    }
}

/// Accept iff `diam(B) ≤ eps`; never ⊥. Optimizer failure counts as a reject.
pub fn qreject_conv_conv(
    s: &mut OracleSession<'_>,
    h: &Point,
    eps: f64,
    params: &BoxParams,
    metric: &MetricSpace,
) -> Result<RejectVerdict> {
    let r = bounding_box(s, h, params)?;
    let outcome = match &r.outcome {
        BoxOutcome::Certified(b) if metric.box_diameter(&b.inner_lo, &b.inner_hi) <= eps => RejectOutcome::Accept,
        _ => RejectOutcome::Reject,
    };
    Ok(RejectVerdict { outcome, queries_used: r.queries_used })
}

/// Thresholds `(eps, 2·eps)`: ⊥ if either of two opposite lattice corners of `B`
/// leaves the cell (or the optimizer fails), else accept iff `diam(B) ≤ eps`.
pub fn qreject_conv_box(
    s: &mut OracleSession<'_>,
    h: &Point,
    eps: f64,
    params: &BoxParams,
    metric: &MetricSpace,
) -> Result<RejectVerdict> {
    let r = bounding_box(s, h, params)?;
    let start = s.label_count();
    let outcome = match &r.outcome {
        BoxOutcome::Failed(_) => RejectOutcome::Bot,
        BoxOutcome::Certified(b) => {
            let lo: Vec<i64> = b.inner_lo.iter().map(|x| x.ceil() as i64).collect();
            let hi: Vec<i64> = b.inner_hi.iter().map(|x| x.floor() as i64).collect();
            if lo.iter().zip(&hi).any(|(a, c)| a > c) || !member(s, h, &lo) || !member(s, h, &hi) {
                RejectOutcome::Bot
            } else if metric.box_diameter(&b.inner_lo, &b.inner_hi) <= eps {
                RejectOutcome::Accept
            } else {
                RejectOutcome::Reject
            }
        }
    };
    Ok(RejectVerdict { outcome, queries_used: r.queries_used + s.label_count() - start })
}

/// Container `B′` (its lattice points in the domain); optimizer failure rejects the cluster.
pub fn qcell_conv_box(s: &mut OracleSession<'_>, h: &Point, params: &BoxParams) -> Result<DiscoveryResult> {
    let r = bounding_box(s, h, params)?;
    let outcome = match &r.outcome {
        BoxOutcome::Failed(_) => Discovery::ClusterReject,
        BoxOutcome::Certified(b) => Discovery::Container(Container::Box(b.outer_lattice(s.domain().span()))),
    };
    Ok(DiscoveryResult { outcome, queries_used: r.queries_used })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{generate_lattice_partition, BlockDensity, GenParams, Partition, UniverseTag};

    fn run(tag: UniverseTag, seed: u64) -> (usize, usize) {
        let params = GenParams { n: 0, d: 2, cells: 6, bits: 10 };
        let part = generate_lattice_partition(&tag, &params, seed).unwrap();
        let mu = BlockDensity::uniform(*part.domain());
        let mut s = OracleSession::new(&part, vec![&mu], seed).unwrap();
        let bp = BoxParams::new(2, 1.0 / 32.0);
        let mut ok = 0;
        for cell in 0..part.num_cells() {
            let r = bounding_box(&mut s, &part.rep(cell), &bp).unwrap();
            if let BoxOutcome::Certified(b) = r.outcome {
                let truth = part.cell_bounding_box(cell).unwrap();
                if b.check(&truth).iter().all(|&x| x) {
                    ok += 1;
                }
            }
        }
        (ok, part.num_cells())
    }

    #[test]
    fn voronoi_cells_certified() {
        for seed in 0..3 {
            let (ok, n) = run(UniverseTag::ConvexInnerBall { delta: 1.0 / 32.0 }, seed);
            assert_eq!(ok, n, "seed {seed}");
        }
    }

    #[test]
    fn box_cells_certified_and_never_bot() {
        for seed in 0..3 {
            let (ok, n) = run(UniverseTag::BoxInnerBall { delta: 1.0 / 32.0 }, seed);
            assert_eq!(ok, n, "seed {seed}");
        }
        let params = GenParams { n: 0, d: 2, cells: 5, bits: 10 };
        let part = generate_lattice_partition(&UniverseTag::BoxInnerBall { delta: 1.0 / 32.0 }, &params, 9).unwrap();
        let m = MetricSpace::lp(*part.domain(), 2.0).unwrap();
        let mu = BlockDensity::uniform(*part.domain());
        let mut s = OracleSession::new(&part, vec![&mu], 1).unwrap();
        let bp = BoxParams::new(2, 1.0 / 32.0);
        for cell in 0..part.num_cells() {
            let v = qreject_conv_box(&mut s, &part.rep(cell), 0.5, &bp, &m).unwrap();
            assert_ne!(v.outcome, RejectOutcome::Bot);
            let c = qcell_conv_box(&mut s, &part.rep(cell), &bp).unwrap();
            let truth = part.cell_bounding_box(cell).unwrap();
            let Some(Container::Box(b)) = c.container() else { panic!("no container") };
            assert!(b.intersect(&truth) == Some(truth));
        }
    }

    #[test]
    fn line_extents_are_exact() {
        use crate::oracle::Clustering;
        let c = Clustering::from_breakpoints(200, &[40, 120]).unwrap();
        let mu = crate::oracle::GridDensity::uniform(*c.domain()).unwrap();
        let mut s = OracleSession::new(&c, vec![&mu], 1).unwrap();
        let r = bounding_box(&mut s, &Point::scalar(40), &BoxParams::new(1, 0.1)).unwrap();
        let BoxOutcome::Certified(b) = r.outcome else { panic!() };
        assert_eq!((b.minus[0], b.plus[0]), (0.0, 79.0));
    }
}
