use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use givp_cli::plot;
use givp_cli::record::read_records;
use givp_cli::Outcome;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_givp"))
}

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn records(o: &Output) -> Vec<givp_cli::RunRecord> {
    read_records(&o.stdout[..]).unwrap()
}

const MIXED: &str = r#"
[[scenario]]
name = "ps"
dimension = 2
group = { preset = "sym", n = 2 }
objective = "sq_norm_plus_one"
task = "palais-smale"
seed = 3
params = { x0 = [1.5, -0.5], n_max = 12 }

[[scenario]]
name = "sep"
dimension = 3
group = { preset = "sym", n = 3 }
task = "separate"
seed = 5
[scenario.params]
strict = true
a = { kind = "ball", center = [0.0, 0.0, 0.0], radius = 1.0 }
b = { kind = "cube", center = [2.0, 2.0, 2.0], radius = 0.5 }

[[scenario]]
name = "bp"
dimension = 2
group = { preset = "sym", n = 2 }
task = "bishop-phelps"
seed = 6
[scenario.params]
f = [0.3, 0.3]
epsilon = 0.2
body = { kind = "cube", center = [0.0, 0.0] }

[[scenario]]
name = "br"
dimension = 2
group = { preset = "sym", n = 2 }
objective = "max_coords"
task = "bronsted-rockafellar"
seed = 7
params = { x0 = [0.2, 0.2], x0star = [0.5, 0.5], epsilon = 0.1, lambda = 0.5 }

[[scenario]]
name = "dense"
dimension = 2
group = { preset = "sym", n = 2 }
objective = "half_sq_norm"
task = "dense-range"
params = { k = 1.0, c = -0.5, targets = [[0.5, 0.5], [0.0, 0.0]], iters = 10 }
"#;

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn bundled_ekeland_passes() {
    let o = run(&["run", example("ekeland_sym3.cfg").to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = &records(&o)[0];
    assert_eq!((r.schema, r.outcome), (1, Outcome::Pass));
    let c = &r.certificate;
    assert!(c["invariance_residual"].as_f64().unwrap() <= 1e-8);
    assert!(c["inequality_margin"].as_f64().unwrap() >= -1e-8);
    assert!(c["verification_points"].as_u64().unwrap() >= 10_000);
}

#[test]
fn bundled_counterexample_is_degenerate_with_witness() {
    let o = run(&["run", example("counterexample.cfg").to_str().unwrap()]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
    let r = &records(&o)[0];
    assert_eq!(r.outcome, Outcome::Degenerate);
    assert_eq!(r.certificate["witness"], serde_json::json!([0.5]));
    assert_eq!(r.certificate["max_violation"], 1.0);
}

#[test]
fn malformed_config_exits_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "bad.cfg", "[[scenario]]\nname = \"x\"\ndimension = \n");
    let o = run(&["run", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    let p = write(dir.path(), "field.cfg", &MIXED.replace("n_max = 12", "n_max = 12, nmax = 1"));
    let o = run(&["run", p.to_str().unwrap()]);
    let err = String::from_utf8_lossy(&o.stderr);
    assert_eq!(o.status.code(), Some(2));
    assert!(err.contains("line 9") && err.contains("`ps`") && err.contains("nmax"), "{err}");
    let o = run(&["run", "/nonexistent.cfg"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failing_outcome_sets_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let src = r#"
[[scenario]]
name = "not-convex"
dimension = 2
group = { preset = "sym", n = 2 }
objective = "neg_sq_norm"
task = "check-gconvexity"
"#;
    let p = write(dir.path(), "f.cfg", src);
    let o = run(&["run", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(records(&o)[0].outcome, Outcome::Fail);
}

#[test]
fn mixed_batch_passes_and_is_thread_independent() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "mixed.cfg", MIXED);
    let out1 = dir.path().join("one.jsonl");
    let out8 = dir.path().join("eight.jsonl");
    let cfg = p.to_str().unwrap();
    let o1 = run(&["run", cfg, "--threads", "1", "--out", out1.to_str().unwrap()]);
    let o8 = run(&["run", cfg, "--threads", "8", "--out", out8.to_str().unwrap()]);
    assert!(o1.status.success(), "{}", String::from_utf8_lossy(&o1.stderr));
    assert!(o8.status.success());
    let read = |p: &Path| read_records(std::io::BufReader::new(std::fs::File::open(p).unwrap())).unwrap();
    let (r1, r8) = (read(&out1), read(&out8));
    assert_eq!(r1.len(), 5);
    for (a, b) in r1.iter().zip(&r8) {
        assert_eq!(a.outcome, Outcome::Pass, "{}: {:?}", a.scenario, a.message);
        assert_eq!(a.scenario, b.scenario);
        assert_eq!(digits(&a.certificate), digits(&b.certificate), "{}", a.scenario);
    }
}

/// Numeric leaves printed at 12 significant digits.
fn digits(v: &Value) -> Vec<String> {
    let mut out = Vec::new();
    fn walk(v: &Value, out: &mut Vec<String>) {
        match v {
            Value::Number(n) => out.push(format!("{:.11e}", n.as_f64().unwrap())),
            Value::Array(xs) => xs.iter().for_each(|x| walk(x, out)),
            Value::Object(m) => m.values().for_each(|x| walk(x, out)),
            other => out.push(other.to_string()),
        }
    }
    walk(v, &mut out);
    out
}

#[test]
fn overrides_apply() {
    let o = run(&["run", example("ekeland_sym3.cfg").to_str().unwrap(), "--seed", "42", "--tol", "1e-6"]);
    let r = &records(&o)[0];
    assert_eq!(r.seed, 42);
    assert_eq!(r.certificate["seed"], 42);
}

#[test]
fn plot_rows_respect_their_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "mixed.cfg", MIXED);
    let recs = dir.path().join("r.jsonl");
    assert!(run(&["run", cfg.to_str().unwrap(), "--out", recs.to_str().unwrap()]).status.success());
    let ek = dir.path().join("e.jsonl");
    assert!(run(&["run", example("ekeland_sym3.cfg").to_str().unwrap(), "--out", ek.to_str().unwrap()]).status.success());
    let mut all = std::fs::read_to_string(&recs).unwrap();
    all.push_str(&std::fs::read_to_string(&ek).unwrap());
    let all_path = write(dir.path(), "all.jsonl", &all);
    let plots = dir.path().join("plots");
    let o = run(&["plot", all_path.to_str().unwrap(), "--dir", plots.to_str().unwrap()]);
    assert!(o.status.success());
    let mut rdr = csv::Reader::from_path(plots.join(plot::FILE_NAME)).unwrap();
    let (mut ps, mut ek) = (0, 0);
    for row in rdr.records() {
        let row = row.unwrap();
        let num = |i: usize| row[i].parse::<f64>().ok();
        match &row[0] {
            "ps" => {
                ps += 1;
                assert!(num(3).unwrap() <= num(5).unwrap() + 1e-6);
            }
            "ekeland_sym3" => {
                ek += 1;
                if let (Some(s), Some(b)) = (num(4), num(5)) {
                    assert!(s <= b + 1e-10);
                }
            }
            other => panic!("unexpected scenario {other}"),
        }
    }
    assert_eq!(ps, 12);
    assert!(ek > 10);
}

#[test]
fn catalog_lists_everything() {
    let o = run(&["catalog"]);
    let s = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success());
    for word in ["sym(n)", "so2", "tent", "gaussian_bump", "bronsted-rockafellar"] {
        assert!(s.contains(word), "{word}");
    }
}
