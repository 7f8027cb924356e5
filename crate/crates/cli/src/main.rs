use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cc_core::domain::{emd_exact, tv_distance, DiscreteDistribution, Domain, MetricKind, MetricSpace};
use cc_core::experiment::{
    calibrate, plot_data, read_records, run_experiment_with, summarize, write_plot_csv, write_timings, Calibration,
    ExperimentConfig, ExperimentRecord, Op, RecordWriter,
};
use cc_core::analysis::{expected_join_matrix, min_eigenvalue};
use cc_core::oracle::GraphKind;
use cc_core::CoreError;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "cc-test", version, about = "Distribution testers with clustered samples")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the base seed; trial i uses seed + i.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the grid × trials of a config and write one CSV row per trial.
    Run {
        #[command(flatten)]
        common: Common,
        /// Calibration file; defaults to the one named in the config.
        #[arg(long)]
        calibration: Option<PathBuf>,
    },
    /// Fit the free constants a config needs and persist them.
    Calibrate {
        #[command(flatten)]
        common: Common,
        /// Existing calibration file; sections already present are kept.
        #[arg(long)]
        calibration: Option<PathBuf>,
    },
    /// Tidy x,y,group,stderr table from a records CSV.
    PlotData {
        #[arg(long)]
        records: PathBuf,
        #[arg(long)]
        kind: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ad-hoc exact queries.
    Oracle {
        #[command(subcommand)]
        q: OracleCmd,
    },
    /// Zero-query tester on random path/cycle clusterings.
    Part2Zeroq(Part2),
    /// Query-based singleton tester on random path/cycle clusterings.
    Part2Query(Part2),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Path,
    Cycle,
}

impl From<Kind> for GraphKind {
    fn from(k: Kind) -> GraphKind {
        match k {
            Kind::Path => GraphKind::Path,
            Kind::Cycle => GraphKind::Cycle,
        }
    }
}

#[derive(Args)]
struct Part2 {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 2000)]
    n: u32,
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    #[arg(long, default_value_t = 0.25)]
    eps: f64,
    #[arg(long, value_enum, default_value = "cycle")]
    kind: Kind,
    /// Input family: uniform or zigzag (at distance eps).
    #[arg(long, default_value = "uniform")]
    family: String,
    #[arg(long)]
    calibration: Option<PathBuf>,
}

#[derive(Subcommand)]
enum OracleCmd {
    /// TV distance between two index,weight CSVs.
    Tv {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Exact EMD between two distributions on [n]^d.
    Emd {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 1)]
        d: usize,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        /// Use the threshold metric with this radius instead of ℓp.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Entry (i, j) of the expected join matrix, or the whole matrix as CSV.
    Phi {
        #[arg(long, value_enum, default_value = "cycle")]
        kind: Kind,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        rho: f64,
        #[arg(long, requires = "j")]
        i: Option<usize>,
        #[arg(long, requires = "i")]
        j: Option<usize>,
    },
    /// Smallest eigenvalue of the expected join matrix.
    Lambda {
        #[arg(long, value_enum, default_value = "cycle")]
        kind: Kind,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        rho: f64,
    },
}

fn exit_code(e: &CoreError) -> u8 {
    match e {
        CoreError::CalibrationMissing(_) => 3,
        CoreError::Parse(_)
        | CoreError::InvalidParameter(_)
        | CoreError::Precondition(_)
        | CoreError::Unsupported(_)
        | CoreError::DomainMismatch(_) => 2,
        _ => 1,
    }
}

type Res<T> = Result<T, CoreError>;

fn load_config(common: &Common) -> Res<ExperimentConfig> {
    let path = common.config.as_ref().ok_or_else(|| CoreError::Parse("--config is required".into()))?;
    let mut cfg = ExperimentConfig::load(path)?;
    apply_overrides(&mut cfg, common);
    Ok(cfg)
}

fn apply_overrides(cfg: &mut ExperimentConfig, common: &Common) {
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(t) = common.trials {
        cfg.trials = t;
    }
    if let Some(o) = &common.out {
        cfg.out = Some(o.clone());
    }
}

fn load_calibration(explicit: Option<&PathBuf>, cfg: &ExperimentConfig) -> Res<Option<Calibration>> {
    if cfg.trials == 0 {
        return Ok(None);
    }
    match explicit.or(cfg.calibration.as_ref()) {
        Some(p) => Calibration::load(p).map(Some),
        None => Ok(None),
    }
}

fn timing_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".timing.csv");
    PathBuf::from(s)
}

fn run(cfg: &ExperimentConfig, calib: Option<&Calibration>, jobs: usize) -> Res<Vec<ExperimentRecord>> {
    let mut writer = match &cfg.out {
        Some(p) => Some(RecordWriter::new(BufWriter::new(File::create(p)?))?),
        None => None,
    };
    let mut timings = Vec::new();
    let mut all = Vec::new();
    run_experiment_with(cfg, calib, jobs, |recs, times| {
        if let Some(w) = writer.as_mut() {
            for r in recs {
                w.write(r)?;
            }
            w.flush()?;
        }
        timings.extend_from_slice(times);
        all.extend_from_slice(recs);
        Ok(())
    })?;
    if let Some(p) = &cfg.out {
        write_timings(BufWriter::new(File::create(timing_path(p))?), &timings)?;
    }
    print!("{}", summarize(&all));
    Ok(all)
}

fn part2(op: Op, a: &Part2) -> Res<()> {
    let family = match a.family.as_str() {
        "uniform" => "{ kind = \"uniform\" }".to_string(),
        "zigzag" => format!("{{ kind = \"zigzag\", eps = {:?} }}", a.eps),
        other => return Err(CoreError::Parse(format!("family {other}; expected uniform or zigzag"))),
    };
    let kind = match a.kind {
        Kind::Path => "path",
        Kind::Cycle => "cycle",
    };
    let text = format!(
        "name = \"{}\"\nop = \"{}\"\n[grid]\nn = [{}]\nrho = [{:?}]\neps = [{:?}]\nkind = [\"{kind}\"]\nfamily = [{family}]\n",
        op.name(),
        op.name(),
        a.n,
        a.rho,
        a.eps
    );
    let mut cfg = match &a.common.config {
        Some(_) => load_config(&a.common)?,
        None => ExperimentConfig::from_toml(&text)?,
    };
    apply_overrides(&mut cfg, &a.common);
    if cfg.op != op {
        return Err(CoreError::Parse(format!("config op is {}, expected {}", cfg.op.name(), op.name())));
    }
    let calib = load_calibration(a.calibration.as_ref(), &cfg)?;
    run(&cfg, calib.as_ref(), a.common.jobs).map(|_| ())
}

fn read_dist(p: &Path) -> Res<DiscreteDistribution> {
    DiscreteDistribution::from_csv(BufReader::new(File::open(p)?))
}

fn oracle(q: &OracleCmd) -> Res<()> {
    match q {
        OracleCmd::Tv { a, b } => println!("{}", tv_distance(&read_dist(a)?, &read_dist(b)?)?),
        OracleCmd::Emd { a, b, n, d, p, threshold } => {
            let dom = Domain::grid(*n, *d)?;
            let kind = match threshold {
                Some(r) => MetricKind::Threshold { r: *r },
                None => MetricKind::Lp { p: *p },
            };
            let m = MetricSpace::new(dom, kind)?;
            println!("{}", emd_exact(&read_dist(a)?, &read_dist(b)?, &m)?.0);
        }
        OracleCmd::Phi { kind, n, rho, i, j } => {
            let phi = expected_join_matrix((*kind).into(), *n, *rho)?;
            match (i, j) {
                (Some(i), Some(j)) => {
                    if *i >= *n || *j >= *n {
                        return Err(CoreError::InvalidParameter(format!("index outside [{n}]")));
                    }
                    println!("{}", phi.entry(*i, *j));
                }
                _ => {
                    let stdout = std::io::stdout();
                    phi.to_csv(stdout.lock())?;
                }
            }
        }
        OracleCmd::Lambda { kind, n, rho } => {
            let phi = expected_join_matrix((*kind).into(), *n, *rho)?;
            println!("{}", min_eigenvalue(&phi)?);
        }
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Res<()> {
    match cli.cmd {
        Cmd::Run { common, calibration } => {
            let cfg = load_config(&common)?;
            let calib = load_calibration(calibration.as_ref(), &cfg)?;
            run(&cfg, calib.as_ref(), common.jobs).map(|_| ())
        }
        Cmd::Calibrate { common, calibration } => {
            let cfg = load_config(&common)?;
            let existing_path = calibration.clone().or_else(|| cfg.calibration.clone());
            let existing = match &existing_path {
                Some(p) if p.exists() => Some(Calibration::load(p)?),
                _ => None,
            };
            // --out names the calibration file here; falls back to the config's path.
            let target = common
                .out
                .clone()
                .or(existing_path)
                .unwrap_or_else(|| PathBuf::from("calibration.toml"));
            let trials = common.trials.unwrap_or(200);
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(common.jobs.max(1))
                .build()
                .map_err(|e| CoreError::InvalidParameter(e.to_string()))?;
            let cal = pool.install(|| calibrate(&cfg, existing, trials))?;
            report_calibration(&cal);
            cal.save(&target)?;
            eprintln!("wrote {}", target.display());
            Ok(())
        }
        Cmd::PlotData { records, kind, out } => {
            let recs = read_records(BufReader::new(File::open(&records)?))?;
            let rows = plot_data(&kind, &recs)?;
            match out {
                Some(p) => write_plot_csv(&rows, BufWriter::new(File::create(p)?)),
                None => write_plot_csv(&rows, std::io::stdout().lock()),
            }
        }
        Cmd::Oracle { q } => oracle(&q),
        Cmd::Part2Zeroq(a) => part2(Op::Part2Zeroq, &a),
        Cmd::Part2Query(a) => part2(Op::Part2Query, &a),
    }
}

fn report_calibration(cal: &Calibration) {
    let mut out = std::io::stdout().lock();
    for e in &cal.alg1 {
        let _ = writeln!(
            out,
            "alg1 {:?} n={} rho={} eps={}: c={} L={} accept={:.3} reject={:.3} over {} held-out seeds{}",
            e.kind,
            e.n,
            e.rho,
            e.eps,
            e.c,
            e.l,
            e.accept_rate,
            e.reject_rate,
            e.trials,
            if e.met_target { "" } else { " (target not reached; best shown)" }
        );
    }
    for e in &cal.singleton {
        let _ = writeln!(
            out,
            "singleton {:?} n={} rho={} eps={}: c_io={} L={} accept={:.3} reject={:.3}{}",
            e.kind,
            e.n,
            e.rho,
            e.eps,
            e.c_io,
            e.l,
            e.accept_rate,
            e.reject_rate,
            if e.met_target { "" } else { " (target not reached; best shown)" }
        );
    }
    if let Some(s) = &cal.subtests {
        let _ = writeln!(
            out,
            "subtests: c_id={} errors {:?}, c_eq={} errors {:?} (k={}, eps={})",
            s.c_id, s.id_errors, s.c_eq, s.eq_errors, s.k, s.eps_tv
        );
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
