use std::path::PathBuf;
use std::process::{Command, Output};

use expurgated::export::{fmt_sig, parse_csv_row};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_expurgated"))
}

fn channel(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../channels").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(name: &str) -> String {
    channel(name).to_string_lossy().into_owned()
}

/// CSV blocks split on blank lines, each as (metadata line, data rows).
type CsvRow = ([f64; 4], String);

fn csv_blocks(text: &str) -> Vec<(String, Vec<CsvRow>)> {
    text.split("\n\n")
        .map(|block| {
            let meta = block.lines().find(|l| l.starts_with("# kind=")).unwrap().to_string();
            let rows = block
                .lines()
                .filter(|l| !l.starts_with('#') && !l.starts_with("R,"))
                .map(|l| parse_csv_row(l).unwrap())
                .collect();
            (meta, rows)
        })
        .collect()
}

fn meta_value(meta: &str, key: &str) -> f64 {
    meta.split(' ')
        .find_map(|kv| kv.strip_prefix(&format!("{key}=")))
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn exponent_table_for_example_one() {
    let text = stdout(&run(&["exponent", "--channel", &path("example1.json"), "--reproducible"]));
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "rho,s,E0,EG,E,E_best,s_star");
    let v: Vec<f64> = lines.next().unwrap().split(',').map(|t| t.parse().unwrap()).collect();
    assert!((v[3] - 0.0542).abs() < 5e-4);
    assert!((v[4] - 0.0574).abs() < 5e-4);
    assert!((v[5] - 0.0596).abs() < 5e-4);
    assert!((v[6] - 0.76).abs() < 0.02);
}

#[test]
fn exponent_equal_rows_is_zero() {
    let text = stdout(&run(&["exponent", "--channel", &path("equal_rows.json"), "--rho", "1,3", "--reproducible"]));
    for line in text.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|t| t.parse().unwrap()).collect();
        assert!(v[2..6].iter().all(|x| x.abs() < 1e-12), "{line}");
    }
}

#[test]
fn exponent_with_rates_in_json() {
    let text = stdout(&run(&[
        "exponent",
        "--channel",
        &path("bsc.json"),
        "--rates",
        "0.05:0.2:4",
        "--format",
        "json",
        "--reproducible",
    ]));
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["rates"].as_array().unwrap().len(), 4);
    let row = &doc["rates"][0];
    assert!((row["ckm_bhatt"].as_f64().unwrap() - row["chernoff_new"].as_f64().unwrap()).abs() < 1e-9);
}

#[test]
fn missing_file_exits_2() {
    let o = run(&["exponent", "--channel", "/nonexistent/channel.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nonexistent"));
}

#[test]
fn malformed_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, "{\"transition\": [[0.5, 0.5]").unwrap();
    let o = run(&["exponent", "--channel", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn invalid_channel_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, r#"{"transition": [[0.5, 0.6], [0.5, 0.5]]}"#).unwrap();
    let o = run(&["exponent", "--channel", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let o = run(&["exponent", "--channel", &path("bsc.json"), "--q", "0.2,0.2,0.6"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn degenerate_grid_exits_3() {
    let o = run(&["curve", "--channel", &path("bsc.json"), "--rates", "0:1:1"]);
    assert_eq!(o.status.code(), Some(3));
    let o = run(&["curve", "--channel", &path("bsc.json"), "--rates", "0:one:5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn curve_linear_regions_for_example_one() {
    let text = stdout(&run(&["curve", "--channel", &path("example1.json"), "--reproducible"]));
    let blocks = csv_blocks(&text);
    assert_eq!(blocks.len(), 3);
    for ((meta, rows), (kind, c)) in blocks.iter().zip([("gallager", 0.0542), ("ckm_bhatt", 0.0574), ("chernoff_new", 0.0596)]) {
        assert!(meta.contains(&format!("kind={kind} ")));
        let linear: Vec<_> = rows.iter().filter(|(_, phase)| phase == "paramagnetic").collect();
        assert!(linear.len() > 50, "{kind}: {} linear rows", linear.len());
        for (v, _) in linear {
            assert!((v[1] - (c - v[0])).abs() < 5e-4, "{kind} at R={}", v[0]);
            assert_eq!(v[2], 1.0);
        }
        assert_eq!(rows.len(), 201);
    }
}

#[test]
fn reproducible_output_is_byte_identical() {
    let args = ["curve", "--channel", &path("ternary.json"), "--rates", "0:0.3:7", "--reproducible"];
    let a = stdout(&run(&args));
    let b = stdout(&run(&args));
    assert_eq!(a, b);
    assert!(!a.contains("generated_at"));
    let stamped = stdout(&run(&args[..5]));
    assert!(stamped.starts_with("# generated_at="));
    let strip = |t: &str| t.lines().filter(|l| !l.starts_with("# generated_at")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&stamped), strip(&a));
}

#[test]
fn json_and_csv_agree() {
    let base = ["curve", "--channel", &path("example1.json"), "--rates", "0:0.07:15", "--reproducible"];
    let csv = stdout(&run(&base));
    let mut json_args = base.to_vec();
    json_args.extend(["--format", "json"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&run(&json_args))).unwrap();
    let curves = doc["curves"].as_array().unwrap();
    for ((meta, rows), curve) in csv_blocks(&csv).iter().zip(curves) {
        assert_eq!(fmt_sig(curve["R1"].as_f64().unwrap()), fmt_sig(meta_value(meta, "R1")));
        for ((v, phase), p) in rows.iter().zip(curve["points"].as_array().unwrap()) {
            for (i, key) in ["rate", "value", "rho_star", "s_star"].iter().enumerate() {
                assert_eq!(fmt_sig(p[key].as_f64().unwrap()), fmt_sig(v[i]));
            }
            assert_eq!(p["phase"].as_str().unwrap(), phase);
        }
    }
}

#[test]
fn bits_flag_scales_rates_and_values() {
    let nats = stdout(&run(&["curve", "--channel", &path("bsc.json"), "--rates", "0:0.2:3", "--reproducible"]));
    let ln2 = std::f64::consts::LN_2;
    let bits_grid = format!("0:{}:3", 0.2 / ln2);
    let bits = stdout(&run(&["curve", "--channel", &path("bsc.json"), "--rates", &bits_grid, "--bits", "--reproducible"]));
    for ((_, a), (_, b)) in csv_blocks(&nats).iter().zip(&csv_blocks(&bits)) {
        for ((va, _), (vb, _)) in a.iter().zip(b) {
            assert!((va[0] - vb[0] * ln2).abs() < 1e-10);
            assert!((va[1] - vb[1] * ln2).abs() < 1e-10);
        }
    }
}

#[test]
fn gaussian_curve_starts_at_quarter() {
    let text = stdout(&run(&["curve", "--gaussian", "S=1", "sigma2=1", "--reproducible"]));
    let (meta, rows) = &csv_blocks(&text)[0];
    assert!(meta.contains("kind=gaussian"));
    assert_eq!(rows[0].0[1], 0.25);
    assert_eq!(rows.last().unwrap().0[1], 0.0);
    let same = stdout(&run(&["gaussian", "--power", "1", "--sigma2", "1", "--reproducible"]));
    assert_eq!(text, same);
}

#[test]
fn out_dir_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&[
        "curve",
        "--channel",
        &path("bsc.json"),
        "--rates",
        "0:0.3:5",
        "--out-dir",
        dir.path().to_str().unwrap(),
        "--reproducible",
    ]);
    stdout(&o);
    for kind in ["gallager", "ckm_bhatt", "chernoff_new"] {
        let body = std::fs::read_to_string(dir.path().join(format!("{kind}.csv"))).unwrap();
        assert!(body.lines().nth(1).unwrap() == "R,value,rho_star,s_star,phase");
    }
}

#[test]
fn sweep_q_reports_best_input() {
    let text = stdout(&run(&[
        "curve",
        "--channel",
        &path("example1.json"),
        "--rates",
        "0.02:0.04:3",
        "--sweep-q",
        "--reproducible",
    ]));
    let sweep = text.split("\n\n").last().unwrap();
    let mut lines = sweep.lines();
    assert_eq!(
        lines.next().unwrap(),
        "R,gallager,gallager_q1,ckm_bhatt,ckm_bhatt_q1,chernoff_new,chernoff_new_q1"
    );
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|t| t.parse().unwrap()).collect();
        assert!(v[5] >= v[3] - 1e-9 && v[3] >= v[1] - 1e-9);
        for q in [v[2], v[4], v[6]] {
            assert!((0.05..=0.95).contains(&q));
        }
    }
    let o = run(&["curve", "--channel", &path("ternary.json"), "--rates", "0:0.1:2", "--sweep-q"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn mc_reports() {
    let ln2 = std::f64::consts::LN_2;
    let (r, i) = ((1.5 * ln2).to_string(), ln2.to_string());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&run(&[
        "mc", "--n", "12", "--rate", &r, "--type-exponent", &i, "--rho", "2", "--format", "json",
    ])))
    .unwrap();
    assert!(doc["gap"].as_f64().unwrap() < 0.05);
    assert_eq!(doc["mode"], "exact_binomial");
    for key in ["model", "theory_exponent", "empirical_exponent", "gap", "mode", "seed", "trials"] {
        assert!(doc.get(key).is_some(), "{key}");
    }

    let doc: serde_json::Value = serde_json::from_str(&stdout(&run(&[
        "mc", "--n", "10", "--rate", "0.4", "--type-exponent", "0.9", "--rho", "1", "--format", "json",
    ])))
    .unwrap();
    assert!(doc["gap"].as_f64().unwrap() < 1e-9);

    let o = run(&["mc", "--n", "20", "--rate", &r, "--type-exponent", &i]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("monte-carlo"));

    let args = ["mc", "--n", "30", "--rate", &r, "--type-exponent", &i, "--mode", "monte-carlo", "--trials", "20000", "--seed", "5", "--format", "json"];
    let a = stdout(&run(&args));
    assert_eq!(a, stdout(&run(&args)));
    let doc: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(doc["seed"], 5);
    assert_eq!(doc["trials"], 20000);
}

#[test]
fn compare_includes_oracle() {
    let text = stdout(&run(&["compare", "--channel", &path("bsc.json"), "--rates", "0:0.3:4", "--reproducible"]));
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "R,gallager,ckm_bhatt,chernoff_new,oracle_ckm,ckm_minus_oracle");
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|t| t.parse().unwrap()).collect();
        assert!(v[5].abs() < 2e-3, "{line}");
    }
}
