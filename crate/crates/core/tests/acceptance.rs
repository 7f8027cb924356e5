//! Acceptance suite: one PASS/FAIL line per criterion. Runs as a plain binary so
//! the lines always reach the terminal; exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

use rand::Rng as _;
use rand_distr::{Distribution, Gamma};

use cc_core::adversarial::{diameter_guarded_identity, Binding, GuardParams, HierarchicalClustering, Preset, Verdict};
use cc_core::analysis::{
    cross_term_max, expected_join_matrix, min_eigenvalue, min_eigenvalue_dense, quadratic_form, relative_concentration,
    structural_witness,
};
use cc_core::cells::{
    bounding_box, cc_vs_box_reject_2d, discover_box_cell, discover_interval_cell, reject_connected_cell, BoxOutcome,
    BoxParams, Container, RejectOutcome,
};
use cc_core::domain::{emd_exact, DiscreteDistribution, Domain, LatticeBox, MetricSpace, Point};
use cc_core::experiment::calibration::{calibrate_alg1, calibrate_singleton, calibrate_subtests};
use cc_core::experiment::instances::random_dominoes;
use cc_core::experiment::runner::{alg1_trial, singleton_trial};
use cc_core::experiment::{run_experiment, Calibration, ExperimentConfig, RecordWriter};
use cc_core::oracle::{
    draw_random_clustering, generate_adversarial_clustering, generate_lattice_partition,
    BlockDensity, Clustering, GenParams, GraphKind, GridDensity, OracleSession, Partition, UniverseTag,
};
use cc_core::random::{clustered_poisson_counts, y_statistic, Alg1Config, SingletonTesterConfig};
use cc_core::{rng_from_seed, Rng};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn dirichlet(k: usize, alpha: f64, rng: &mut Rng) -> Vec<f64> {
    let g = Gamma::new(alpha, 1.0).unwrap();
    let w: Vec<f64> = (0..k).map(|_| g.sample(rng)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

fn closed_form_phi(kind: GraphKind, n: usize, rho: f64, i: usize, j: usize) -> f64 {
    let eta = 1.0 - rho;
    let a = i.abs_diff(j);
    match kind {
        GraphKind::Path => eta.powi(a as i32),
        GraphKind::Cycle => {
            if a == 0 {
                1.0
            } else {
                eta.powi(a as i32) + eta.powi((n - a) as i32) - eta.powi(n as i32)
            }
        }
    }
}

fn zigzag(n: usize, eps: f64) -> Vec<f64> {
    let u = 1.0 / n as f64;
    (0..n).map(|i| if i % 2 == 1 { u * (1.0 + 2.0 * eps) } else { u * (1.0 - 2.0 * eps) }).collect()
}

fn c1_closed_form_phi() -> Outcome {
    let start = Instant::now();
    let draws = 100_000u64;
    let mut worst = 0.0f64;
    let mut bad = 0;
    let mut entries = 0;
    for kind in [GraphKind::Path, GraphKind::Cycle] {
        for n in [8usize, 16] {
            for rho in [0.3, 0.7] {
                let phi = expected_join_matrix(kind, n, rho).unwrap();
                let mut same = vec![0u64; n * n];
                for s in 0..draws {
                    let d = draw_random_clustering(kind, n as u32, rho, 1_000_000 * n as u64 + s).unwrap();
                    let g = d.clustering().gamma();
                    for i in 0..n {
                        for j in 0..n {
                            if g[i] == g[j] {
                                same[i * n + j] += 1;
                            }
                        }
                    }
                }
                for i in 0..n {
                    for j in 0..n {
                        let p = closed_form_phi(kind, n, rho, i, j);
                        assert!((phi.entry(i, j) - p).abs() < 1e-14, "library entry differs from the closed form");
                        let est = same[i * n + j] as f64 / draws as f64;
                        let se = (p * (1.0 - p) / draws as f64).sqrt();
                        let z = if se > 0.0 { (est - p).abs() / se } else if est == p { 0.0 } else { f64::INFINITY };
                        worst = worst.max(z);
                        entries += 1;
                        if z > 3.0 {
                            bad += 1;
                            if std::env::var("CC_ACCEPTANCE_VERBOSE").is_ok() {
                                eprintln!("  {kind:?} n={n} rho={rho} ({i},{j}) p={p:.3e} est={est:.3e} z={z:.2}");
                            }
                        }
                    }
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        bad == 0 && secs < 60.0,
        format!("{entries} entries, {bad} outside 3 SE (worst {worst:.2} SE), {secs:.1}s"),
    )
}

/// Positive definiteness of `A − s·I` by Cholesky.
fn pd_shifted(a: &[Vec<f64>], s: f64) -> bool {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut v = a[i][j] - if i == j { s } else { 0.0 };
            for k in 0..j {
                v -= l[i][k] * l[j][k];
            }
            if i == j {
                if v <= 0.0 {
                    return false;
                }
                l[i][i] = v.sqrt();
            } else {
                l[i][j] = v / l[j][j];
            }
        }
    }
    true
}

fn c2_spectra() -> Outcome {
    let ns = [8usize, 16, 32, 64, 128];
    let rhos: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).collect();
    let mut ok = true;
    let mut notes = Vec::new();
    let mut path_min_gap = f64::INFINITY;
    for &rho in &rhos {
        for &n in &ns {
            let phi = expected_join_matrix(GraphKind::Path, n, rho).unwrap();
            let dense: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| closed_form_phi(GraphKind::Path, n, rho, i, j)).collect()).collect();
            let lam = min_eigenvalue(&phi).unwrap();
            // λ_min brackets: A − (λ−tol)I is PD, A − (λ+tol)I is not.
            if !pd_shifted(&dense, lam - 1e-8) || pd_shifted(&dense, lam + 1e-8) {
                ok = false;
                notes.push(format!("path eigensolve off at n={n} rho={rho}"));
            }
            if !(lam > rho / 2.0) || !pd_shifted(&dense, rho / 2.0) {
                ok = false;
                notes.push(format!("path bound fails n={n} rho={rho} lambda={lam}"));
            }
            path_min_gap = path_min_gap.min(lam - rho / 2.0);
        }
    }
    let mut onsets = Vec::new();
    for &rho in rhos.iter().filter(|&&r| r >= 0.2 - 1e-12) {
        let mut holds = Vec::new();
        for &n in &ns {
            let phi = expected_join_matrix(GraphKind::Cycle, n, rho).unwrap();
            let lam = min_eigenvalue(&phi).unwrap();
            // circulant closed form: eigenvalues are the DFT of the first row
            let dft = (0..n)
                .map(|l| (0..n).map(|k| closed_form_phi(GraphKind::Cycle, n, rho, 0, k) * (2.0 * PI * (l * k) as f64 / n as f64).cos()).sum::<f64>())
                .fold(f64::INFINITY, f64::min);
            if (lam - dft).abs() > 1e-8 || (lam - min_eigenvalue_dense(&phi)).abs() > 1e-8 {
                ok = false;
                notes.push(format!("cycle eigensolve mismatch n={n} rho={rho}"));
            }
            holds.push(lam > rho / 4.0);
        }
        // onset: first n from which the bound holds for every larger n in the grid
        let onset = (0..ns.len()).find(|&i| holds[i..].iter().all(|&h| h)).map(|i| ns[i]);
        match onset {
            Some(n0) => onsets.push(format!("{rho:.1}:{n0}")),
            None => {
                ok = false;
                onsets.push(format!("{rho:.1}:none"));
            }
        }
    }
    outcome(
        ok,
        format!("path min(lambda - rho/2) = {path_min_gap:.4}; cycle onset n per rho [{}]{}", onsets.join(" "), if notes.is_empty() { String::new() } else { format!("; {}", notes.join("; ")) }),
    )
}

fn c3_expectation() -> Outcome {
    let trials = 10_000;
    let configs: Vec<(&str, GraphKind, usize, f64, f64, Vec<f64>)> = vec![
        ("uniform", GraphKind::Cycle, 60, 0.3, 300.0, vec![1.0 / 60.0; 60]),
        ("zigzag", GraphKind::Path, 60, 0.3, 300.0, zigzag(60, 0.25)),
        ("zigzag-cycle", GraphKind::Cycle, 40, 0.6, 200.0, zigzag(40, 0.4)),
        ("dirichlet", GraphKind::Path, 50, 0.5, 250.0, dirichlet(50, 1.0, &mut rng_from_seed(3))),
        ("spike", GraphKind::Cycle, 30, 0.2, 100.0, {
            let mut w = vec![0.5 / 29.0; 30];
            w[7] = 0.5;
            w
        }),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (ci, (name, kind, n, rho, m, w)) in configs.into_iter().enumerate() {
        let mu = DiscreteDistribution::new(w.clone()).unwrap();
        let phi = expected_join_matrix(kind, n, rho).unwrap();
        // μᵀφμ with φ from the closed form in test code
        let mut want = 0.0;
        for i in 0..n {
            for j in 0..n {
                want += w[i] * w[j] * closed_form_phi(kind, n, rho, i, j);
            }
        }
        let mut rng = rng_from_seed(77 + ci as u64);
        let ys: Vec<f64> = (0..trials)
            .map(|t| {
                let d = draw_random_clustering(kind, n as u32, rho, 10_000 * ci as u64 + t).unwrap();
                let c = clustered_poisson_counts(&mu, &d, m, &mut rng).unwrap();
                y_statistic(&c.cells, m)
            })
            .collect();
        let mean = ys.iter().sum::<f64>() / trials as f64;
        let var = ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
        let se = (var / trials as f64).sqrt();
        let z = (mean - want).abs() / se;
        let nu = vec![1.0 / n as f64; n];
        let zv: Vec<f64> = w.iter().zip(&nu).map(|(a, b)| a - b).collect();
        let decomposed = quadratic_form(&phi, &nu, &nu) + 2.0 * quadratic_form(&phi, &nu, &zv) + quadratic_form(&phi, &zv, &zv);
        let direct = quadratic_form(&phi, &w, &w);
        let dec_err = (decomposed - direct).abs().max((direct - want).abs());
        if z > 3.0 || dec_err > 1e-10 {
            ok = false;
        }
        parts.push(format!("{name} {z:.2}SE dec {dec_err:.1e}"));
    }
    outcome(ok, parts.join(", "))
}

/// `max Σ c_i z_i` over `Σz = 0, |z_i| ≤ δ` through the dual `min_λ δ·Σ|c_i − λ|`,
/// which is piecewise linear with breakpoints at the `c_i`.
fn dual_cross_max(c: &[f64], delta: f64) -> f64 {
    c.iter()
        .map(|&lam| delta * c.iter().map(|ci| (ci - lam).abs()).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

fn c4_cross_term() -> Outcome {
    let mut ok = true;
    let mut worst_ratio = 0.0f64;
    let mut max_oracle_gap = 0.0f64;
    // tiny instance: enumerate every vertex of the polytope
    {
        let n = 8;
        let phi = expected_join_matrix(GraphKind::Path, n, 0.3).unwrap();
        let c: Vec<f64> = phi.column_sums().iter().map(|s| s / n as f64).collect();
        let mut best = 0.0f64;
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != n / 2 {
                continue;
            }
            let v: f64 = (0..n).map(|i| if mask >> i & 1 == 1 { c[i] } else { -c[i] }).sum::<f64>() * 0.01;
            best = best.max(v.abs());
        }
        max_oracle_gap = max_oracle_gap.max((best - cross_term_max(&phi, 0.01)).abs());
    }
    for n in [50usize, 100, 200] {
        for rho in [0.2, 0.5] {
            for delta in [0.001, 0.01] {
                let phi = expected_join_matrix(GraphKind::Path, n, rho).unwrap();
                let c: Vec<f64> = (0..n)
                    .map(|j| (0..n).map(|i| closed_form_phi(GraphKind::Path, n, rho, i, j)).sum::<f64>() / n as f64)
                    .collect();
                let v = cross_term_max(&phi, delta);
                let oracle = dual_cross_max(&c, delta);
                max_oracle_gap = max_oracle_gap.max((v - oracle).abs());
                let bound = 2.0 * delta / (n as f64 * rho * rho);
                worst_ratio = worst_ratio.max(v / bound);
                if v > bound || (v - oracle).abs() > 1e-12 {
                    ok = false;
                }
                let cyc = cross_term_max(&expected_join_matrix(GraphKind::Cycle, n, rho).unwrap(), delta);
                if cyc.abs() > 1e-12 {
                    ok = false;
                }
            }
        }
    }
    outcome(ok, format!("max value/bound = {worst_ratio:.3}, oracle gap {max_oracle_gap:.1e}, cycle values 0"))
}

fn rate(hits: usize, n: usize) -> f64 {
    hits as f64 / n as f64
}

fn c5_algorithm1() -> Outcome {
    let start = Instant::now();
    let (kind, n, rho, eps) = (GraphKind::Cycle, 2000u32, 0.5, 0.25);
    let seed = 50_000;
    let cal = calibrate_alg1(kind, n, rho, eps, 0.1, seed, 100).unwrap();
    let cfg = Alg1Config::new(kind, n, eps, rho, cal.c, cal.l);
    let dom = Domain::line(n).unwrap();
    let uni = GridDensity::new(dom, DiscreteDistribution::uniform(n as usize)).unwrap();
    let zz = GridDensity::new(dom, DiscreteDistribution::new(zigzag(n as usize, eps)).unwrap()).unwrap();
    let pm = GridDensity::new(dom, DiscreteDistribution::point_mass(n as usize, 0)).unwrap();
    let trials = 100;
    // alg1_trial asserts that no label query is issued
    let count = |mu: &GridDensity, want_accept: bool| {
        (0..trials).filter(|&t| alg1_trial(&cfg, mu, seed + t as u64).unwrap().accept == want_accept).count()
    };
    let (a, r, p) = (count(&uni, true), count(&zz, false), count(&pm, false));
    let secs = start.elapsed().as_secs_f64();
    let pass = rate(a, trials) >= 0.9 && rate(r, trials) >= 0.9 && rate(p, trials) >= 0.99 && secs < 300.0;
    outcome(
        pass,
        format!(
            "c={:.4} L={} (held-out accept {:.2}, reject {:.2}); uniform accept {}/{trials}, zigzag reject {}/{trials}, point-mass reject {}/{trials}, labels 0, {secs:.0}s",
            cal.c, cal.l, cal.accept_rate, cal.reject_rate, a, r, p
        ),
    )
}

fn ceil_pow2(x: f64) -> f64 {
    2f64.powf(x.log2().ceil())
}

fn c6_query_tester() -> Outcome {
    let (kind, n, rho, eps) = (GraphKind::Cycle, 5000u32, 0.3, 0.3);
    let seed = 60_000;
    // calibrated to a tighter internal target; the criterion still needs 80%
    let cal = calibrate_singleton(kind, n, rho, eps, 0.1, seed, 100).unwrap();
    let mut cfg = SingletonTesterConfig::new(kind, n, eps, rho, cal.c_io);
    cfg.l = cal.l;
    let dom = Domain::line(n).unwrap();
    let uni = GridDensity::new(dom, DiscreteDistribution::uniform(n as usize)).unwrap();
    let zz = GridDensity::new(dom, DiscreteDistribution::new(zigzag(n as usize, eps)).unwrap()).unwrap();
    let (nf, lnn) = (n as f64, (n as f64).ln());
    let label_unit = rho * nf * lnn;
    let sample_unit = nf.sqrt() / (rho * eps * eps);
    // resource constants fitted on held-out seeds, rounded up to a power of two
    let mut lmax = 0.0f64;
    let mut smax = 0.0f64;
    for t in 0..20u64 {
        for mu in [&uni, &zz] {
            let o = singleton_trial(&cfg, mu, seed + 1_000_000 + t).unwrap();
            lmax = lmax.max(o.labels as f64 / label_unit);
            smax = smax.max(o.samples as f64 / sample_unit);
        }
    }
    let (fl, fs) = (ceil_pow2(lmax), ceil_pow2(smax));
    let trials = 100;
    let mut within = true;
    let mut run = |mu: &GridDensity, want: bool| {
        (0..trials)
            .filter(|&t| {
                let o = singleton_trial(&cfg, mu, seed + t as u64).unwrap();
                within &= o.labels as f64 <= fl * label_unit && o.samples as f64 <= fs * sample_unit;
                o.accept == want
            })
            .count()
    };
    let a = run(&uni, true);
    let r = run(&zz, false);
    let pass = rate(a, trials) >= 0.8 && rate(r, trials) >= 0.8 && within;
    outcome(
        pass,
        format!(
            "c_io={} L={}; uniform accept {a}/{trials}, zigzag reject {r}/{trials}; labels <= {fl}*rho*n*ln n, samples <= {fs}*sqrt(n)/(rho*eps^2) {}",
            cal.c_io,
            cal.l,
            if within { "in every trial" } else { "VIOLATED" }
        ),
    )
}

fn expected_diam(mu: &[f64], g: &Clustering, m: &MetricSpace) -> f64 {
    let dom = *g.domain();
    g.cells()
        .iter()
        .map(|cell| {
            let pts: Vec<Point> = cell.iter().map(|&i| dom.point(i)).collect();
            let mut diam = 0.0f64;
            for a in &pts {
                for b in &pts {
                    diam = diam.max(m.dist(a, b));
                }
            }
            diam * cell.iter().map(|&i| mu[i]).sum::<f64>()
        })
        .sum()
}

fn induced_tv(mu: &[f64], nu: &[f64], g: &Clustering) -> f64 {
    g.cells()
        .iter()
        .map(|cell| (cell.iter().map(|&i| mu[i] - nu[i]).sum::<f64>()).abs())
        .sum::<f64>()
        / 2.0
}

fn level_clustering(h: &HierarchicalClustering, i: usize) -> Clustering {
    let dom = *h.domain();
    let labels: Vec<usize> = dom.points().unwrap().map(|p| h.cell_of(i, &p)).collect();
    Clustering::with_lex_min_reps(dom, &labels).unwrap()
}

fn c7_emd_tv() -> Outcome {
    let dom = Domain::grid(8, 2).unwrap();
    let mut rng = rng_from_seed(7);
    let tags = [UniverseTag::Connected, UniverseTag::Boxes, UniverseTag::ConnectedConvex];
    let mut fails = 0;
    let mut worst_slack = f64::INFINITY;
    for t in 0..200u64 {
        let m = MetricSpace::lp(dom, [1.0, 2.0][t as usize % 2]).unwrap();
        let tag = tags[t as usize % 3];
        let cells = rng.gen_range(2..12);
        let g = generate_adversarial_clustering(&tag, &GenParams { n: 8, d: 2, cells, bits: 0 }, t).unwrap();
        let mu = dirichlet(64, 0.5, &mut rng);
        let nu = dirichlet(64, 0.5, &mut rng);
        let (emd, _) = emd_exact(&DiscreteDistribution::new(mu.clone()).unwrap(), &DiscreteDistribution::new(nu.clone()).unwrap(), &m).unwrap();
        let bound = m.diameter() * induced_tv(&mu, &nu, &g) + expected_diam(&mu, &g, &m);
        let lib = cc_core::domain::emd_tv_diameter_check(
            &DiscreteDistribution::new(mu.clone()).unwrap(),
            &DiscreteDistribution::new(nu.clone()).unwrap(),
            &g,
            &m,
        )
        .unwrap();
        worst_slack = worst_slack.min(bound - emd);
        if emd > bound + 1e-9 || !lib {
            fails += 1;
        }
    }
    let mut hfails = 0;
    for t in 0..50u64 {
        let m = MetricSpace::lp(dom, [1.0, 2.0][t as usize % 2]).unwrap();
        let h = HierarchicalClustering::dyadic(dom, [0.25, 0.5, 0.2][t as usize % 3]).unwrap();
        let levels: Vec<Clustering> = (0..h.t()).map(|i| level_clustering(&h, i)).collect();
        let mu = dirichlet(64, 0.5, &mut rng);
        let nu = dirichlet(64, 0.5, &mut rng);
        let (emd, _) = emd_exact(&DiscreteDistribution::new(mu.clone()).unwrap(), &DiscreteDistribution::new(nu.clone()).unwrap(), &m).unwrap();
        let mut bound = 0.0;
        let mut prev = m.diameter();
        for (g, &d) in levels.iter().zip(h.deltas()) {
            // the diameter bound of each level must actually hold
            assert!(g.cell_diameters(&m).iter().all(|&x| x <= d + 1e-12), "level diameter above its bound");
            bound += prev * induced_tv(&mu, &nu, g);
            prev = d;
        }
        bound += expected_diam(&mu, levels.last().unwrap(), &m);
        let lib = cc_core::domain::hierarchical_check(
            &DiscreteDistribution::new(mu.clone()).unwrap(),
            &DiscreteDistribution::new(nu.clone()).unwrap(),
            &levels,
            h.deltas(),
            &m,
        )
        .unwrap();
        if emd > bound + 1e-9 || !lib.holds || (lib.bound - bound).abs() > 1e-9 {
            hfails += 1;
        }
    }
    outcome(fails == 0 && hfails == 0, format!("flat {}/200 hold (min slack {worst_slack:.2e}), hierarchical {}/50 hold", 200 - fails, 50 - hfails))
}

fn ceil_log2(n: u64) -> u64 {
    64 - (n - 1).leading_zeros() as u64
}

fn c8_cell_procedures() -> Outcome {
    let mut rng = rng_from_seed(8);
    let mut problems = Vec::new();
    // intervals
    let mut int_ok = 0;
    for t in 0..200u64 {
        let n = rng.gen_range(2..2000u32);
        let cells = rng.gen_range(1..=n.min(40) as usize);
        let g = generate_adversarial_clustering(&UniverseTag::Intervals, &GenParams { n, d: 1, cells, bits: 0 }, t).unwrap();
        let mu = GridDensity::uniform(*g.domain()).unwrap();
        let mut s = OracleSession::new(&g, vec![&mu], t).unwrap();
        let cell = rng.gen_range(0..g.num_cells());
        let r = discover_interval_cell(&mut s, &g.rep(cell)).unwrap();
        let pts = g.cell_points(cell);
        let want = LatticeBox::new(pts[0], *pts.last().unwrap());
        if r.container() == Some(&Container::Box(want)) && r.queries_used <= 2 * ceil_log2(n as u64) + 2 {
            int_ok += 1;
        }
    }
    // boxes
    let mut box_ok = 0;
    for t in 0..200u64 {
        let d = rng.gen_range(1..=3usize);
        let n = [64u32, 24, 10][d - 1];
        let cells = rng.gen_range(1..20);
        let g = generate_adversarial_clustering(&UniverseTag::Boxes, &GenParams { n, d, cells, bits: 0 }, t).unwrap();
        let mu = GridDensity::uniform(*g.domain()).unwrap();
        let mut s = OracleSession::new(&g, vec![&mu], t).unwrap();
        let cell = rng.gen_range(0..g.num_cells());
        let r = discover_box_cell(&mut s, &g.rep(cell)).unwrap();
        let mut want = g.cell_points(cell);
        want.sort();
        let cap = 2 * d as u64 * ceil_log2(n as u64) + 2 * d as u64;
        if r.container().map(|c| c.points()) == Some(want) && r.queries_used <= cap {
            box_ok += 1;
        }
    }
    // shell rejection: cells either within eps1 or wider than eps2
    let mut shell_err = 0;
    for t in 0..200u64 {
        let dom = Domain::grid(33, 2).unwrap();
        let p = [1.0, 2.0][t as usize % 2];
        let m = MetricSpace::lp(dom, p).unwrap();
        let g = generate_adversarial_clustering(&UniverseTag::Connected, &GenParams { n: 33, d: 2, cells: rng.gen_range(2..30), bits: 0 }, t).unwrap();
        let diams = g.cell_diameters(&m);
        let (e1, e2) = (0.08, 2.0 * 2f64.powf(1.0 / p) * 0.08 + 0.02);
        let mu = GridDensity::uniform(dom).unwrap();
        let mut s = OracleSession::new(&g, vec![&mu], t).unwrap();
        for cell in 0..g.num_cells() {
            if diams[cell] <= e1 || diams[cell] > e2 {
                let v = reject_connected_cell(&mut s, &g.rep(cell), e1, e2, &m).unwrap();
                let want = if diams[cell] <= e1 { RejectOutcome::Accept } else { RejectOutcome::Reject };
                if v.outcome != want {
                    shell_err += 1;
                }
            }
        }
    }
    // cc-vs-box: boxes must be decided correctly, convex cells never mislabelled
    let mut ccb_err = 0;
    let mut ccb_cases = 0;
    for t in 0..200u64 {
        let n = 48u32;
        let m = MetricSpace::lp(Domain::grid(n, 2).unwrap(), 2.0).unwrap();
        let tag = if t % 2 == 0 { UniverseTag::Boxes } else { UniverseTag::ConnectedConvex };
        let g = generate_adversarial_clustering(&tag, &GenParams { n, d: 2, cells: rng.gen_range(2..14), bits: 0 }, t).unwrap();
        let (t1, t2) = (0.25, 0.25 + 8.0 / (n - 1) as f64 + 0.1);
        let diams = g.cell_diameters(&m);
        let mu = GridDensity::uniform(*g.domain()).unwrap();
        let mut s = OracleSession::new(&g, vec![&mu], t).unwrap();
        let cell = rng.gen_range(0..g.num_cells());
        let v = cc_vs_box_reject_2d(&mut s, &g.rep(cell), t1, t2, &m).unwrap().outcome;
        ccb_cases += 1;
        let is_box = g.cell_points(cell).len() as u64 == LatticeBox::new(bbox_lo(&g, cell), bbox_hi(&g, cell)).count();
        let wrong = if is_box {
            v == RejectOutcome::Bot || (diams[cell] <= t1 && v != RejectOutcome::Accept) || (diams[cell] > t2 && v != RejectOutcome::Reject)
        } else {
            (diams[cell] <= t1 && v == RejectOutcome::Reject) || (diams[cell] > t2 && v == RejectOutcome::Accept)
        };
        if wrong {
            ccb_err += 1;
        }
    }
    if int_ok < 200 {
        problems.push("interval");
    }
    if box_ok < 200 {
        problems.push("box");
    }
    outcome(
        problems.is_empty() && shell_err == 0 && ccb_err == 0,
        format!("interval {int_ok}/200, box {box_ok}/200 exact within cap; shell errors {shell_err}; cc-vs-box errors {ccb_err}/{ccb_cases}"),
    )
}

fn bbox_lo(g: &Clustering, cell: usize) -> Point {
    let pts = g.cell_points(cell);
    let d = pts[0].dim();
    let lo: Vec<u32> = (0..d).map(|i| pts.iter().map(|p| p.get(i)).min().unwrap()).collect();
    Point::new(&lo)
}

fn bbox_hi(g: &Clustering, cell: usize) -> Point {
    let pts = g.cell_points(cell);
    let d = pts[0].dim();
    let hi: Vec<u32> = (0..d).map(|i| pts.iter().map(|p| p.get(i)).max().unwrap()).collect();
    Point::new(&hi)
}

fn c9_bounding_box() -> Outcome {
    let delta = 1.0 / 32.0;
    let tag = UniverseTag::ConvexInnerBall { delta };
    let bp = BoxParams::new(2, delta);
    let (mut bodies, mut good, mut declared, mut undeclared) = (0, 0, 0, 0);
    let mut seed = 0u64;
    while bodies < 300 {
        let part = generate_lattice_partition(&tag, &GenParams { n: 0, d: 2, cells: 6, bits: 10 }, 900 + seed).unwrap();
        seed += 1;
        let mu = BlockDensity::uniform(*part.domain());
        let mut s = OracleSession::new(&part, vec![&mu], seed).unwrap();
        for cell in 0..part.num_cells() {
            if bodies == 300 {
                break;
            }
            bodies += 1;
            let truth = part.cell_bounding_box(cell).unwrap();
            match bounding_box(&mut s, &part.rep(cell), &bp).unwrap().outcome {
                BoxOutcome::Certified(b) => {
                    if b.check(&truth).iter().all(|&x| x) {
                        good += 1;
                    } else {
                        undeclared += 1;
                    }
                }
                BoxOutcome::Failed(_) => declared += 1,
            }
        }
    }
    outcome(
        rate(good, bodies) >= 0.99 && undeclared == 0,
        format!("{good}/{bodies} certified with all three conditions, {declared} declared optimizer failures, {undeclared} silent failures"),
    )
}

fn c10_guarded() -> Outcome {
    let dom = Domain::grid(16, 2).unwrap();
    let m = MetricSpace::lp(dom, 1.0).unwrap();
    let eps = 0.3;
    let gp = GuardParams::new(eps, eps / 8.0).unwrap();
    let binding = Binding::new(Preset::BB, m.clone(), None).unwrap();
    let consts = calibrate_subtests(1.0 / 12.0, 100, 200).unwrap().constants();
    let nu = GridDensity::uniform(dom).unwrap();
    let far_dist = DiscreteDistribution::point_mass(256, 0);
    let far_emd = emd_exact(&far_dist, &DiscreteDistribution::uniform(256), &m).unwrap().0;
    let far = GridDensity::new(dom, far_dist).unwrap();
    let single = Clustering::single_cell(dom).unwrap();
    let trials = 60u64;
    let run = |mu: &GridDensity, part: &dyn Fn(u64) -> Clustering, want: &dyn Fn(Verdict) -> bool| {
        (0..trials)
            .filter(|&t| {
                let g = part(t);
                let mut s = OracleSession::new(&g, vec![mu], 10_000 + t).unwrap();
                want(diameter_guarded_identity(&mut s, &nu, &gp, &binding, &consts).unwrap().verdict)
            })
            .count()
    };
    let dominoes = |t: u64| random_dominoes(16, 500 + t).unwrap();
    let hpld = dominoes(0);
    assert!(hpld.cell_diameters(&m).iter().all(|&d| d <= gp.diam));
    let a = run(&nu, &dominoes, &|v| v == Verdict::Accept);
    let r = run(&far, &dominoes, &|v| v != Verdict::Accept);
    let cr = run(&nu, &|_| single.clone(), &|v| v == Verdict::ClusterReject);
    let need = |k: usize| k as f64 >= 5.0 / 6.0 * trials as f64;
    outcome(
        need(a) && need(r) && need(cr) && far_emd > eps,
        format!(
            "c_id={} c_eq={}; dominoes mu=nu accept {a}/{trials}; point mass (EMD {far_emd:.3}) non-accept {r}/{trials}; single cell CLUSTER_REJECT {cr}/{trials}",
            consts.c_id, consts.c_eq
        ),
    )
}

/// Brute-force Λ_t over all intervals with prefix sums, independent of the library scan.
fn brute_lambda(mu: &[f64], kind: GraphKind, rho: f64, t: f64) -> f64 {
    let n = mu.len();
    let mut best = 0.0f64;
    let doubled: Vec<f64> = mu.iter().chain(mu.iter()).copied().collect();
    let mut prefix = vec![0.0; 2 * n + 1];
    for i in 0..2 * n {
        prefix[i + 1] = prefix[i] + doubled[i];
    }
    for s in 0..n {
        for len in 1..=n {
            if kind == GraphKind::Path && s + len > n {
                break;
            }
            // a run of `len` vertices uses `len − 1` edges, the whole cycle uses all n
            let edges = if kind == GraphKind::Cycle && len == n { n } else { len - 1 };
            let mass = prefix[s + len] - prefix[s];
            best = best.max(mass / (rho * edges as f64).max(t));
        }
    }
    best
}

fn c11_structural() -> Outcome {
    let n = 512;
    let mut rng = rng_from_seed(11);
    let mut fails = 0;
    let mut lam_gap = 0.0f64;
    for k in 0..100 {
        let kind = if k % 2 == 0 { GraphKind::Cycle } else { GraphKind::Path };
        let rho = [0.05, 0.2, 0.5, 0.9][k % 4];
        let t = [0.01, 0.1, 1.0, 4.0][(k / 4) % 4];
        let mu: Vec<f64> = if k % 3 == 0 {
            dirichlet(n, 0.1, &mut rng)
        } else if k % 3 == 1 {
            dirichlet(n, 1.0, &mut rng)
        } else {
            // a few heavy runs on a light background
            let mut w = vec![0.1; n];
            for _ in 0..3 {
                let s = rng.gen_range(0..n);
                for x in s..(s + rng.gen_range(1..40)).min(n) {
                    w[x] += 5.0;
                }
            }
            let tot: f64 = w.iter().sum();
            w.into_iter().map(|x| x / tot).collect()
        };
        let lam = relative_concentration(&mu, kind, rho, t).unwrap().value;
        let brute = brute_lambda(&mu, kind, rho, t);
        lam_gap = lam_gap.max((lam - brute).abs());
        let (iv, mass) = structural_witness(&mu, kind, rho, t).unwrap();
        let actual: f64 = iv.elements().iter().map(|&i| mu[i]).sum();
        if !(rho * iv.edge_count() as f64 <= t + 1e-12) || (actual - mass).abs() > 1e-12 || mass < t / 2.0 * brute - 1e-12 {
            fails += 1;
        }
    }
    outcome(fails == 0 && lam_gap < 1e-12, format!("{}/100 witnesses valid, scan vs brute-force Lambda gap {lam_gap:.1e}", 100 - fails))
}

fn csv_body(cfg: &ExperimentConfig, cal: &Calibration, jobs: usize) -> Vec<u8> {
    let recs = run_experiment(cfg, Some(cal), jobs).unwrap();
    let mut buf = Vec::new();
    let mut w = RecordWriter::new(&mut buf).unwrap();
    for r in &recs {
        w.write(r).unwrap();
    }
    w.flush().unwrap();
    drop(w);
    buf
}

fn c12_determinism() -> Outcome {
    let zeroq = ExperimentConfig::from_toml(
        "name = \"det\"\nop = \"part2-zeroq\"\ntrials = 20\nseed = 4\n[grid]\nn = [500]\nrho = [0.7]\neps = [0.3]\nfamily = [{ kind = \"uniform\" }, { kind = \"zigzag\", eps = 0.3 }]\n",
    )
    .unwrap();
    let guarded = ExperimentConfig::from_toml(
        "name = \"det\"\nop = \"guarded-identity\"\ntrials = 6\nseed = 9\n[grid]\nn = [16]\nd = [2]\neps = [0.3]\npreset = [\"b-b\"]\nclustering = [\"dominoes\", \"single-cell\"]\n[fixed]\np = 1.0\n",
    )
    .unwrap();
    let query = ExperimentConfig::from_toml(
        "name = \"det\"\nop = \"part2-query\"\ntrials = 6\nseed = 2\n[grid]\nn = [800]\nrho = [0.5]\neps = [0.3]\n",
    )
    .unwrap();
    let mut cal = Calibration::from_toml(
        "[[alg1]]\nkind = \"cycle\"\nn = 500\nrho = 0.7\neps = 0.3\nc = 0.02\nl = 0.1\naccept_rate = 0\nreject_rate = 0\ntrials = 0\nmet_target = false\n\
         [[singleton]]\nkind = \"cycle\"\nn = 800\nrho = 0.5\neps = 0.3\nc_io = 1.0\nl = 1.0\naccept_rate = 0\nreject_rate = 0\ntrials = 0\nmet_target = false\n",
    )
    .unwrap();
    cal.subtests = Some(calibrate_subtests(1.0 / 12.0, 100, 50).unwrap());
    let mut same = true;
    let mut rows = BTreeMap::new();
    for (name, cfg) in [("part2-zeroq", &zeroq), ("guarded-identity", &guarded), ("part2-query", &query)] {
        let a = csv_body(cfg, &cal, 1);
        let b = csv_body(cfg, &cal, 4);
        let c = csv_body(cfg, &cal, 2);
        same &= a == b && b == c;
        rows.insert(name, a.iter().filter(|&&x| x == b'\n').count() - 2);
    }
    outcome(same, format!("repeat runs byte-identical across job counts; rows {rows:?}"))
}

fn main() {
    let criteria: Vec<(u32, &str, fn() -> Outcome)> = vec![
        (1, "closed-form phi vs Monte Carlo", c1_closed_form_phi),
        (2, "spectra of phi", c2_spectra),
        (3, "E[Y] and the quadratic decomposition", c3_expectation),
        (4, "cross-term maximum", c4_cross_term),
        (5, "zero-query tester end to end", c5_algorithm1),
        (6, "query-based singleton tester", c6_query_tester),
        (7, "EMD-TV inequality suites", c7_emd_tv),
        (8, "cell procedures", c8_cell_procedures),
        (9, "bounding-box invariants", c9_bounding_box),
        (10, "diameter-guarded identity tester", c10_guarded),
        (11, "relative-concentration witness", c11_structural),
        (12, "determinism", c12_determinism),
    ];
    let only: Option<u32> = std::env::var("CC_ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failed = Vec::new();
    let mut out = std::io::stdout();
    for (k, name, f) in criteria {
        if only.is_some_and(|o| o != k) {
            continue;
        }
        let start = Instant::now();
        let o = f();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        writeln!(out, "criterion {k:>2} {tag}: {name}: {} [{:.1}s]", o.detail, start.elapsed().as_secs_f64()).unwrap();
        out.flush().unwrap();
        if !o.pass {
            failed.push(k);
        }
    }
    if !failed.is_empty() {
        writeln!(out, "failed criteria: {failed:?}").unwrap();
        std::process::exit(1);
    }
}
