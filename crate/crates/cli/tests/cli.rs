use std::path::Path;
use std::process::{Command, Output};

fn kadapt(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kadapt"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn generate_and_solve_simplex_units() {
    let dir = tempfile::tempdir().unwrap();
    let g = kadapt(&["generate", "builtin", "--name", "simplex-units", "--n", "3", "-o", "s.json"], dir.path());
    assert!(g.status.success(), "{}", stderr(&g));
    assert!(stdout(&g).contains("t=7"));
    let s = kadapt(&["solve", "s.json", "--oracle"], dir.path());
    assert!(s.status.success());
    assert!(stdout(&s).contains("v*=1/3 k_lb=2 k_ub=3 k_opt=3"), "{}", stdout(&s));
    let f = kadapt(&["solve", "s.json", "--float"], dir.path());
    assert!(stdout(&f).contains("v*=0.333"));
}

#[test]
fn solve_band_as_json() {
    let dir = tempfile::tempdir().unwrap();
    kadapt(&["generate", "builtin", "--name", "cardinality-band(4)", "-o", "b.json"], dir.path());
    let s = kadapt(&["solve", "b.json", "--oracle"], dir.path());
    assert!(stdout(&s).contains("k_lb=4 k_ub=4 k_opt=4"));
    let j = kadapt(&["solve", "b.json", "--oracle", "--json"], dir.path());
    let v: serde_json::Value = serde_json::from_slice(&j.stdout).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["v_star"], "0");
    assert_eq!((v["k_lb"].as_u64(), v["k_ub"].as_u64(), v["k_opt"].as_u64()), (Some(4), Some(4), Some(4)));
    assert_eq!(v["policies"].as_array().unwrap().len(), 4);
}

#[test]
fn infeasible_instance_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"kind":"finite","n_y":1,"t":2,"y_space":{"lower":[0],"upper":[1]},
      "scenarios":[{"objective":[1]},
                   {"objective":[1],"constraints":[{"row":[1],"sense":">=","rhs":2}]}]}"#;
    std::fs::write(dir.path().join("bad.json"), text).unwrap();
    let s = kadapt(&["solve", "bad.json"], dir.path());
    assert_eq!(s.status.code(), Some(3));
    assert!(stderr(&s).contains("scenario 1"), "{}", stderr(&s));
}

#[test]
fn knapsack_generation_summary() {
    let dir = tempfile::tempdir().unwrap();
    let g = kadapt(&["generate", "knapsack", "--n", "20", "--t", "100", "--seed", "1", "-o", "k.json"], dir.path());
    assert!(g.status.success());
    assert!(stdout(&g).contains("Γ=5"));
    let again = kadapt(&["generate", "knapsack", "--n", "20", "--t", "100", "--seed", "1", "-o", "k2.json"], dir.path());
    assert!(again.status.success());
    assert_eq!(
        std::fs::read(dir.path().join("k.json")).unwrap(),
        std::fs::read(dir.path().join("k2.json")).unwrap()
    );
}

#[test]
fn set_cover_generation() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("sets.json"), "[[0,1],[1,2,3],[4],[0,4]]").unwrap();
    let g = kadapt(&["generate", "setcover", "--universe", "5", "--subsets", "sets.json", "-o", "c.json"], dir.path());
    assert!(g.status.success(), "{}", stderr(&g));
    let s = kadapt(&["solve", "c.json", "--oracle"], dir.path());
    assert!(stdout(&s).contains("v*=-1"));
    assert!(stdout(&s).contains("k_opt=2"));
    std::fs::write(dir.path().join("short.json"), "[[0,1]]").unwrap();
    let bad = kadapt(&["generate", "setcover", "--universe", "5", "--subsets", "short.json"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn bounds_commands() {
    let dir = tempfile::tempdir().unwrap();
    let o = kadapt(&["bounds", "objective", "--nxi", "2"], dir.path());
    assert_eq!(stdout(&o).trim(), "k = 3");
    let g = kadapt(&["bounds", "gap", "--L", "1", "--diam", "2", "--s", "2", "--k", "4"], dir.path());
    let gap: f64 = stdout(&g).trim().trim_start_matches("gap = ").parse().unwrap();
    assert!((gap - 2.0 * 2f64.ln()).abs() < 1e-12);
    let r = kadapt(&["bounds", "regions", "--eta", "3", "--rank", "2"], dir.path());
    assert_eq!(stdout(&r).trim(), "R = 7");
    let bad = kadapt(&["bounds", "gap", "--L", "1", "--diam", "2", "--s", "5", "--k", "4"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
    let usage = kadapt(&["bounds", "objective"], dir.path());
    assert_eq!(usage.status.code(), Some(2));

    kadapt(&["generate", "builtin", "--name", "cardinality-band-affine", "--n", "4", "-o", "a.json"], dir.path());
    let c = kadapt(&["bounds", "constraint", "a.json", "--fixed-recourse", "--obj-certain", "--json"], dir.path());
    assert!(c.status.success(), "{}", stderr(&c));
    let v: serde_json::Value = serde_json::from_slice(&c.stdout).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["value"], 11);
    assert!(v["assumptions"][1].as_str().unwrap().contains("min{R, |Y|}"));
}

#[test]
fn regions_dump_and_guard() {
    let dir = tempfile::tempdir().unwrap();
    kadapt(&["generate", "builtin", "--name", "recourse-regions", "-o", "r.json"], dir.path());
    let r = kadapt(&["regions", "r.json", "--json", "regions.json", "--csv", "regions.csv"], dir.path());
    assert!(r.status.success(), "{}", stderr(&r));
    assert!(stdout(&r).contains("eta_empirical=2 R_empirical=3"));
    assert!(stdout(&r).contains("Y_D={(1,1)}"));
    let dump: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("regions.json")).unwrap()).unwrap();
    assert_eq!(dump.as_array().unwrap().len(), 3);
    assert_eq!(std::fs::read_to_string(dir.path().join("regions.csv")).unwrap().lines().count(), 4);

    let text = std::fs::read_to_string(dir.path().join("r.json")).unwrap();
    let mut inst: serde_json::Value = serde_json::from_str(&text).unwrap();
    inst["n_xi"] = 4.into();
    inst["Ai"] = serde_json::json!([[[0], [0]], [[0], [0]], [[0], [0]], [[0], [0]]]);
    inst["Bi"] = serde_json::json!([[[0, 0], [0, 0]], [[0, 0], [0, 0]], [[0, 0], [0, 0]], [[0, 0], [0, 0]]]);
    inst["H"] = serde_json::json!([[1, 0, 0, 0], [0, 1, 0, 0]]);
    inst["U_box"] = serde_json::json!({"lower": [0, 0, 0, 0], "upper": [1, 1, 1, 1]});
    std::fs::write(dir.path().join("big.json"), inst.to_string()).unwrap();
    let g = kadapt(&["regions", "big.json"], dir.path());
    assert_eq!(g.status.code(), Some(4), "{}", stderr(&g));
}

#[test]
fn sweep_csv() {
    let dir = tempfile::tempdir().unwrap();
    let s = kadapt(&["sweep", "--var", "t", "--values", "4,6,...,8", "--n", "6", "--reps", "2"], dir.path());
    assert!(s.status.success(), "{}", stderr(&s));
    let out = stdout(&s);
    let mut lines = out.lines();
    assert_eq!(
        lines.next(),
        Some("sweep_var,value,rep,seed,v_star,k_lb,k_ub,runtime_ms,guarantee_bound")
    );
    assert_eq!(lines.count(), 6);
    let p = kadapt(
        &["sweep", "--var", "t", "--values", "4,6,...,8", "--n", "6", "--reps", "2", "--parallel", "3"],
        dir.path(),
    );
    let strip = |s: &str| -> Vec<String> {
        s.lines()
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                format!("{}|{}", f[..7].join(","), f[8])
            })
            .collect()
    };
    assert_eq!(strip(&out), strip(&stdout(&p)));
    let n = kadapt(&["sweep", "--var", "n", "--values", "4..6", "--t", "5", "--reps", "1"], dir.path());
    assert_eq!(stdout(&n).lines().count(), 4);
    let empty = kadapt(&["sweep", "--var", "t", "--values", ""], dir.path());
    assert_eq!(empty.status.code(), Some(2));
}
