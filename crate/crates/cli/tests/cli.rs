use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_fatou-lab");

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&run(&[])), 2);
    assert_eq!(code(&run(&["no-such-command"])), 2);
    assert_eq!(code(&run(&["maxfn", "--op", "sideways", "--input", "a", "--output", "b"])), 2);
    assert_eq!(code(&run(&["extend", "--heights", "1", "--input", "a", "--output", "b"])), 2);
    let o = run(&["verify", "--config", "/nonexistent/config.toml"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("/nonexistent/config.toml"));
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    for v in ["0", "many"] {
        let o = Command::new(BIN)
            .args(["suite", "--only", "2"])
            .env("FATOU_LAB_THREADS", v)
            .output()
            .unwrap();
        assert_eq!(code(&o), 2, "{v}");
        assert!(stderr(&o).contains("FATOU_LAB_THREADS"));
    }
}

#[test]
fn frostman_precondition_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("f.toml");
    fs::write(&cfg, "experiment = \"frostman-lemma\"\nseeds = [1]\n[exponents]\nalpha = 0.25\np = 2.0\n[fractal]\ns = [0.4]\n").unwrap();
    let o = run(&["verify", "--config", p(&cfg)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("s > n−αp required"), "{}", stderr(&o));
}

#[test]
fn verify_writes_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("p.toml");
    fs::write(
        &cfg,
        "experiment = \"poincare\"\nseeds = [1, 2]\n[grid]\nlevels = [8]\n[exponents]\nalphas = [0.3, 0.7]\n[geometry]\nsamples = 300\n",
    )
    .unwrap();
    let mut csvs = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let o = run(&["verify", "--config", p(&cfg), "--output-dir", p(&out)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        for f in ["report.csv", "plots.svg", "summary.txt"] {
            assert!(out.join(f).is_file(), "{f}");
        }
        csvs.push(fs::read(out.join("report.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
    let text = String::from_utf8(csvs.remove(0)).unwrap();
    assert!(text.starts_with("level,seed,quantity,value\n"));

    // command-line overrides take precedence over the file
    let out = dir.path().join("c");
    let o = run(&["verify", "--config", p(&cfg), "--seeds", "9", "--levels", "7", "--output-dir", p(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(text.lines().skip(1).all(|l| l.starts_with("7,9,")), "{text}");
}

#[test]
fn failing_negative_control_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("i.toml");
    fs::write(
        &cfg,
        "experiment = \"inclusion-lemma\"\nseeds = [0]\n[exponents]\nbeta = 0.5\n[geometry]\nprofiles = 1\nsamples = 2000\ncontrol_scale = 1.0\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = run(&["verify", "--config", p(&cfg), "--output-dir", p(&out)]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("FAIL"), "{summary}");
}

#[test]
fn kernel_table_matches_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("r.csv");
    fs::write(&pts, "r\n0.5\n1\n2\n").unwrap();
    let o = run(&["kernel-table", "--kind", "riesz", "--n", "1", "--alpha", "0.5", "--points", p(&pts)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = String::from_utf8(o.stdout).unwrap();
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("r,value"));
    let vals: Vec<(f64, f64)> = lines
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(vals.len(), 3);
    // I_α(x) ∝ |x|^{α-n}
    for w in vals.windows(2) {
        let slope = (w[1].1 / w[0].1).ln() / (w[1].0 / w[0].0).ln();
        assert!((slope + 0.5).abs() < 1e-9, "{slope}");
    }
    let o = run(&["kernel-table", "--kind", "poisson", "--points", p(&pts)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("--t"));
}

#[test]
fn cantor_box_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let set = dir.path().join("cantor.csv");
    let counts = dir.path().join("counts.csv");
    let o = run(&["fractal", "cantor", "--depth", "12", "--levels", "14", "--output", p(&set)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = run(&["fractal", "boxdim", "--levels", "14", "--input", p(&set), "--output", p(&counts)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let err = stderr(&o);
    let d: f64 = err
        .split_whitespace()
        .nth(2)
        .and_then(|s| s.parse().ok())
        .unwrap_or_else(|| panic!("{err}"));
    assert!((d - 2f64.ln() / 3f64.ln()).abs() < 0.05, "{d}");
    assert!(fs::read_to_string(&counts).unwrap().lines().count() > 3);
}

#[test]
fn extend_then_maximal_function() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("f.csv");
    let n = 256;
    let mut text = String::from("i,x,value\n");
    for i in 0..n {
        let x = i as f64 / n as f64;
        text.push_str(&format!("{i},{x},{}\n", (2.0 * std::f64::consts::PI * x).cos()));
    }
    fs::write(&input, text).unwrap();
    let field = dir.path().join("u.bin");
    let o = run(&[
        "extend", "--heights", "0.5,6", "--input", p(&input), "--output", p(&field), "--levels", "8",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let m = dir.path().join("m.csv");
    let wit = dir.path().join("w.csv");
    let o = run(&[
        "maxfn", "--op", "tangential", "--beta", "1", "--input", p(&field), "--output", p(&m), "--argmax", p(&wit),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(&m).unwrap();
    let vals: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(vals.len(), n);
    // the harmonic extension of cos(2πx) never exceeds 1 in modulus
    assert!(vals.iter().all(|&v| v > 0.0 && v <= 1.0 + 1e-9));
    assert_eq!(fs::read_to_string(&wit).unwrap().lines().count(), n + 1);
}

#[test]
fn suite_runs_selected_criteria() {
    let o = run(&["suite", "--only", "2,12"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let out = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("PASS criterion 2"));
    assert!(lines[1].starts_with("PASS criterion 12"));
    assert_eq!(code(&run(&["suite", "--only", "13"])), 2);
}
