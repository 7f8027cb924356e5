use std::path::Path;
use std::process::{Command, Output};

fn cc(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cc-test")).args(args).current_dir(dir).output().unwrap()
}

const CAL: &str = r#"
[[alg1]]
kind = "cycle"
n = 300
rho = 0.9
eps = 0.3
c = 0.02
l = 0.1
accept_rate = 0.0
reject_rate = 0.0
trials = 0
met_target = false
"#;

fn zeroq_cfg(trials: usize) -> String {
    format!(
        "name = \"t\"\nop = \"part2-zeroq\"\ntrials = {trials}\nseed = 11\ncalibration = \"cal.toml\"\n\
         [grid]\nn = [300]\nrho = [0.9]\neps = [0.3]\nfamily = [{{ kind = \"uniform\" }}, {{ kind = \"zigzag\", eps = 0.3 }}]\n"
    )
}

fn body(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn run_is_deterministic_across_job_counts() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cfg.toml"), zeroq_cfg(12)).unwrap();
    std::fs::write(dir.path().join("cal.toml"), CAL).unwrap();
    let a = cc(&["run", "--config", "cfg.toml", "--out", "a.csv", "--jobs", "1"], dir.path());
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let b = cc(&["run", "--config", "cfg.toml", "--out", "b.csv", "--jobs", "4"], dir.path());
    assert!(b.status.success());
    let (ta, tb) = (body(&dir.path().join("a.csv")), body(&dir.path().join("b.csv")));
    assert_eq!(ta, tb);
    assert!(ta.starts_with("# cc-test records v1"));
    // schema line, header, 24 rows
    assert_eq!(ta.lines().count(), 2 + 24);
    assert!(dir.path().join("a.csv.timing.csv").exists());
    let summary = String::from_utf8_lossy(&a.stdout);
    assert!(summary.contains("accept") && summary.contains("mean samples"));

    let c = cc(&["run", "--config", "cfg.toml", "--out", "c.csv", "--seed", "12"], dir.path());
    assert!(c.status.success());
    assert_ne!(body(&dir.path().join("c.csv")), ta);
}

#[test]
fn zero_trials_give_empty_csv() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cfg.toml"), zeroq_cfg(0)).unwrap();
    let o = cc(&["run", "--config", "cfg.toml", "--out", "e.csv"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(body(&dir.path().join("e.csv")).lines().count(), 2);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cfg.toml"), zeroq_cfg(3)).unwrap();
    // cal.toml is absent
    let o = cc(&["run", "--config", "cfg.toml", "--out", "x.csv"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    std::fs::write(dir.path().join("bad.toml"), "name = \"t\"\nop = \"no-such-op\"\n").unwrap();
    assert_eq!(cc(&["run", "--config", "bad.toml"], dir.path()).status.code(), Some(2));
    assert_eq!(cc(&["run", "--config", "missing.toml"], dir.path()).status.code(), Some(2));
    assert_eq!(cc(&["part2-zeroq", "--n", "300", "--rho", "0.9", "--eps", "0.3", "--trials", "2"], dir.path()).status.code(), Some(3));
    std::fs::write(dir.path().join("cal.toml"), CAL).unwrap();
    let o = cc(
        &["part2-zeroq", "--n", "300", "--rho", "0.9", "--eps", "0.3", "--trials", "2", "--calibration", "cal.toml"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn plot_data_kinds() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("cfg.toml"), zeroq_cfg(5)).unwrap();
    std::fs::write(dir.path().join("cal.toml"), CAL).unwrap();
    assert!(cc(&["run", "--config", "cfg.toml", "--out", "r.csv"], dir.path()).status.success());
    for kind in ["rate-vs-eps", "rate-vs-rho", "y-histogram", "spectrum-vs-rho"] {
        let o = cc(&["plot-data", "--records", "r.csv", "--kind", kind], dir.path());
        assert!(o.status.success(), "{kind}: {}", String::from_utf8_lossy(&o.stderr));
        let text = String::from_utf8(o.stdout).unwrap();
        assert!(text.starts_with("x,y,group,stderr"), "{kind}");
        assert!(text.lines().count() >= 2, "{kind}");
    }
    let o = cc(&["plot-data", "--records", "r.csv", "--kind", "pie"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn oracle_queries() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("a.csv"), "index,weight\n0,1\n1,0\n2,0\n").unwrap();
    std::fs::write(dir.path().join("b.csv"), "index,weight\n0,0\n1,0\n2,1\n").unwrap();
    let num = |o: Output| String::from_utf8(o.stdout).unwrap().trim().parse::<f64>().unwrap();
    assert_eq!(num(cc(&["oracle", "tv", "--a", "a.csv", "--b", "b.csv"], dir.path())), 1.0);
    // full span on [3] normalizes to distance 1
    let emd = num(cc(&["oracle", "emd", "--a", "a.csv", "--b", "b.csv", "--n", "3"], dir.path()));
    assert!((emd - 1.0).abs() < 1e-9);
    let phi = num(cc(&["oracle", "phi", "--kind", "path", "--n", "6", "--rho", "0.5", "--i", "1", "--j", "4"], dir.path()));
    assert!((phi - 0.125).abs() < 1e-12);
    let lam = num(cc(&["oracle", "lambda", "--kind", "path", "--n", "16", "--rho", "0.5"], dir.path()));
    assert!(lam > 0.25);
}
