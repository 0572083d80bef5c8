use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BOX: &str = r#"
[grid]
q_min = 0.0
q_max = 3.141592653589793
n = 401
boundary = "dirichlet"

[potential]
kind = "free"
"#;

const SLITS: &str = r#"
[slits]
separation = 1.0
screen_distance = 50.0
wavenumber = 62.83185307179586
screen_halfwidth = 10.0
bins = 16
"#;

struct Run {
    output: Output,
    dir: PathBuf,
}

impl Run {
    fn code(&self) -> i32 {
        self.output.status.code().expect("exit code")
    }

    fn read(&self, name: &str) -> String {
        fs::read_to_string(self.dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
    }

    fn json(&self, name: &str) -> Value {
        serde_json::from_str(&self.read(name)).unwrap()
    }

    fn stderr(&self) -> String {
        String::from_utf8_lossy(&self.output.stderr).into_owned()
    }
}

fn run(root: &Path, tag: &str, command: &str, config: &str, extra: &[&str]) -> Run {
    let cfg = root.join(format!("{tag}.toml"));
    fs::write(&cfg, config).unwrap();
    let dir = root.join(tag);
    let output = Command::new(env!("CARGO_BIN_EXE_qinfluence"))
        .arg(command)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&dir)
        .args(extra)
        .output()
        .unwrap();
    Run { output, dir }
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn eigensolve_box_spectrum() {
    let tmp = tempfile::tempdir().unwrap();
    let r = run(
        tmp.path(),
        "box",
        "eigensolve",
        &format!("{BOX}[solver]\nstates = 4\n"),
        &[],
    );
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let table = r.read("spectrum.csv");
    assert!(table.starts_with("index,energy,residual\n"));
    let rows = csv_rows(&table);
    assert_eq!(rows.len(), 4);
    for (k, row) in rows.iter().enumerate() {
        let exact = ((k + 1) * (k + 1)) as f64;
        assert!((row[1] - exact).abs() <= 5e-3 * exact);
    }
    let states = r.read("states.csv");
    assert_eq!(states.lines().count(), 402);
    assert!(states.starts_with("x,re_0,im_0,re_1,im_1,re_2,im_2,re_3,im_3\n"));
    let summary = r.json("summary.json");
    assert_eq!(summary["status"], "ok");
    assert_eq!(summary["config"]["solver"]["states"], 4);
    assert_eq!(
        summary["outputs"],
        serde_json::json!(["spectrum.csv", "states.csv"])
    );
}

#[test]
fn consistency_of_equal_mix() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = format!(
        "{BOX}[consistency]\nindices = [0, 1]\ncoefficients = [0.7071067811865476, 0.7071067811865476]\n"
    );
    let r = run(tmp.path(), "mix", "consistency", &cfg, &[]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let report = r.json("report.json");
    assert_eq!(report["observable"], false);
    let variance = report["energy_variance"].as_f64().unwrap();
    assert!((variance - 2.25).abs() <= 1e-3, "{variance}");
    let predicted = report["predicted_variance"].as_f64().unwrap();
    assert!((variance - predicted).abs() <= 1e-8 * predicted);

    let single = format!("{BOX}[consistency]\nindices = [2]\ncoefficients = [1.0]\n");
    let r = run(tmp.path(), "single", "consistency", &single, &[]);
    assert_eq!(r.code(), 0);
    assert_eq!(r.json("report.json")["observable"], true);
}

#[test]
fn doubleslit_fringe_spacing() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = SLITS.replace("bins = 16", "bins = 2048");
    let r = run(tmp.path(), "fringes", "doubleslit", &cfg, &[]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let metrics = r.json("fringe_metrics.json");
    let spacing = metrics["spacing"].as_f64().unwrap();
    assert!((spacing - 5.0).abs() <= 0.1, "{spacing}");
    assert_eq!(metrics["expected_spacing"].as_f64().unwrap(), 5.0);
}

#[test]
fn pattern_file_contract() {
    let tmp = tempfile::tempdir().unwrap();
    let a = run(tmp.path(), "a", "doubleslit", SLITS, &[]);
    let b = run(tmp.path(), "b", "doubleslit", SLITS, &[]);
    assert_eq!(a.code(), 0, "{}", a.stderr());
    let text = a.read("pattern.csv");
    assert_eq!(text.lines().count(), 17);
    assert!(text.starts_with("x,probability,intensity\n") && text.ends_with('\n'));
    let total: f64 = csv_rows(&text).iter().map(|r| r[1]).sum();
    assert!((total - 1.0).abs() <= 1e-9);
    for field in text.lines().nth(1).unwrap().split(',') {
        let mantissa = field.trim_start_matches('-').split('e').next().unwrap();
        assert!(mantissa.replace('.', "").len() >= 12, "{field}");
    }
    assert_eq!(text, b.read("pattern.csv"));
    assert_eq!(a.read("fringe_metrics.json"), b.read("fringe_metrics.json"));
}

#[test]
fn every_command_is_byte_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        (
            "eigensolve",
            format!("{BOX}[solver]\nstates = 3\n"),
            vec!["spectrum.csv", "states.csv"],
        ),
        (
            "variational",
            format!("{BOX}[solver]\nstates = 2\n"),
            vec!["spectrum.csv", "states.csv", "history.csv"],
        ),
        (
            "consistency",
            format!("{BOX}[consistency]\nindices = [0, 2]\ncoefficients = [0.6, 0.8]\n"),
            vec!["report.json"],
        ),
        (
            "doubleslit",
            SLITS.to_string(),
            vec!["pattern.csv", "fringe_metrics.json"],
        ),
        (
            "sample",
            format!("{SLITS}[sample]\nhits = 5000\n"),
            vec!["hits.csv"],
        ),
    ];
    for (command, cfg, files) in cases {
        let first = run(
            tmp.path(),
            &format!("{command}-1"),
            command,
            &cfg,
            &["--seed", "3"],
        );
        let second = run(
            tmp.path(),
            &format!("{command}-2"),
            command,
            &cfg,
            &["--seed", "3"],
        );
        assert_eq!(first.code(), 0, "{command}: {}", first.stderr());
        for f in files {
            assert_eq!(
                fs::read(first.dir.join(f)).unwrap(),
                fs::read(second.dir.join(f)).unwrap(),
                "{command}/{f}"
            );
        }
    }
}

#[test]
fn sampling_depends_on_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = format!("seed = 1\n{SLITS}[sample]\nhits = 20000\n");
    let a = run(tmp.path(), "a", "sample", &cfg, &[]);
    let b = run(tmp.path(), "b", "sample", &cfg, &["--seed", "2"]);
    assert_eq!(a.code(), 0, "{}", a.stderr());
    let counts =
        |r: &Run| -> Vec<f64> { csv_rows(&r.read("hits.csv")).iter().map(|r| r[1]).collect() };
    assert_eq!(counts(&a).iter().sum::<f64>(), 20000.0);
    assert_ne!(counts(&a), counts(&b));
    assert_eq!(a.json("summary.json")["config"]["seed"], 1);
    assert_eq!(b.json("summary.json")["config"]["seed"], 2);
    assert_eq!(b.json("summary.json")["overrides"]["seed"], 2);
}

#[test]
fn configuration_errors_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();

    let r = run(
        tmp.path(),
        "syntax",
        "doubleslit",
        "[slits\nbins = 16\n",
        &[],
    );
    assert_eq!(r.code(), 2);
    let s = r.json("summary.json");
    assert_eq!(s["status"], "config_error");
    assert_eq!(s["error"]["kind"], "syntax");
    assert!(s["error"]["message"].as_str().unwrap().contains("line 1"));
    assert!(s["config_text"].as_str().unwrap().starts_with("[slits"));

    let r = run(
        tmp.path(),
        "bins",
        "doubleslit",
        &SLITS.replace("bins = 16", "bins = 8"),
        &[],
    );
    assert_eq!(r.code(), 2);
    assert_eq!(r.json("summary.json")["error"]["path"], "slits.bins");
    assert!(!r.dir.join("pattern.csv").exists());

    let eta = format!("{SLITS}mode = \"partial\"\neta = 1.5\n");
    let r = run(tmp.path(), "eta", "doubleslit", &eta, &[]);
    assert_eq!(r.code(), 2);
    assert_eq!(r.json("summary.json")["error"]["path"], "slits.eta");

    let r = run(
        tmp.path(),
        "unknown",
        "doubleslit",
        &format!("{SLITS}colour = 3\n"),
        &[],
    );
    assert_eq!(r.code(), 2);
    assert!(r.stderr().contains("colour"));

    let r = run(
        tmp.path(),
        "mismatch",
        "eigensolve",
        &format!("command = \"doubleslit\"\n{SLITS}"),
        &[],
    );
    assert_eq!(r.code(), 2);
    assert_eq!(r.json("summary.json")["error"]["path"], "command");

    let missing = Command::new(env!("CARGO_BIN_EXE_qinfluence"))
        .args(["eigensolve", "--config"])
        .arg(tmp.path().join("nope.toml"))
        .arg("--out")
        .arg(tmp.path().join("nope"))
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));
    assert!(tmp.path().join("nope").join("summary.json").exists());
}

#[test]
fn near_unit_amplitudes_are_renormalized_with_a_warning() {
    let tmp = tempfile::tempdir().unwrap();
    let a = (0.5f64 * 1.0000001).sqrt();
    let cfg = format!("{SLITS}alpha1 = [{a}, 0.0]\nalpha2 = [{a}, 0.0]\n");
    let r = run(tmp.path(), "warn", "doubleslit", &cfg, &[]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    assert!(r.stderr().contains("warning"));
    let s = r.json("summary.json");
    assert_eq!(s["warnings"].as_array().unwrap().len(), 1);
    let alpha = s["config"]["slits"]["alpha1"][0].as_f64().unwrap();
    assert!((alpha - 0.5f64.sqrt()).abs() < 1e-15);
}

#[test]
fn computational_failure_exits_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = format!(
        "{BOX}[solver]\nstates = 2\n[variational]\nmax_iters = 1\npreconditioner = \"none\"\nstep = 1e-9\n"
    );
    let r = run(tmp.path(), "stall", "variational", &cfg, &[]);
    assert_eq!(r.code(), 1);
    let s = r.json("summary.json");
    assert_eq!(s["status"], "computational_error");
    assert_eq!(s["error"]["kind"], "variational_no_convergence");
    assert_eq!(s["config"]["variational"]["max_iters"], 1);
}

#[test]
fn bundled_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        let raw = qinfluence::config::parse_raw(&text).unwrap();
        let command = raw.command.expect("bundled configs declare their command");
        let (_, warnings) = qinfluence::config::resolve(raw, command).unwrap();
        assert!(warnings.is_empty(), "{}: {warnings:?}", path.display());
    }
}
