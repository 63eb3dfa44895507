use std::process::{Command, Output};

fn schw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_schw"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> serde_json::Value {
    let mut full = args.to_vec();
    full.extend(["--output", "json"]);
    let o = schw(&full);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn csv_rows(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (header, rows)
}

#[test]
fn geom_rows() {
    let (header, rows) = csv_rows(&stdout(&schw(&["geom", "--mass", "2", "--r-max", "100"])));
    assert_eq!(header, ["rho_iso", "s", "r", "h", "f"]);
    assert_eq!(rows.len(), 21);
    let first: Vec<f64> = rows[0].iter().map(|x| x.parse().unwrap()).collect();
    assert_eq!((first[2], first[3], first[4]), (0.0, 4.0, 0.0));

    let (_, rows) = csv_rows(&stdout(&schw(&["geom", "--mass", "0", "--r-max", "10"])));
    for row in rows {
        let v: Vec<f64> = row.iter().map(|x| x.parse().unwrap()).collect();
        assert!(v[0] == v[2] && v[1] == v[2] && v[3] == v[2] && v[4] == 1.0);
    }

    let (_, rows) = csv_rows(&stdout(&schw(&["geom", "--mass", "2"])));
    let last: Vec<f64> = rows.last().unwrap().iter().map(|x| x.parse().unwrap()).collect();
    assert_eq!(last[2], 1e4);
    assert!((last[4] - 0.9998).abs() < 1e-4);
}

#[test]
fn stability_radius_json_schema() {
    let v = json(&["stability-radius", "--mass", "2"]);
    let keys: Vec<&String> = v["result"].as_object().unwrap().keys().collect();
    assert_eq!(keys, ["mass", "R_star", "ratio", "residual"]);
    assert!((v["result"]["ratio"].as_f64().unwrap() - 5.508).abs() < 1e-3);
    let prov: Vec<&String> = v["provenance"].as_object().unwrap().keys().collect();
    assert_eq!(prov, ["tool", "version", "command", "mass", "ode_tol", "root_tol", "quad_tol", "seed"]);
    let one = json(&["stability-radius", "--mass", "1"]);
    assert!((one["result"]["R_star"].as_f64().unwrap() - 5.508).abs() < 1e-3);
}

#[test]
fn spectrum_commands() {
    let v = json(&["spectrum", "--mass", "2", "--k", "0", "--R", "20", "--count", "3", "--method", "both"]);
    let shoot = v["result"]["shooting"]["entries"].as_array().unwrap();
    assert!(shoot[0]["lambda"].as_f64().unwrap() < 0.0);
    for a in v["result"]["agreement"].as_array().unwrap() {
        assert!(a.as_f64().unwrap() <= 1e-3);
    }
    let (header, rows) = csv_rows(&stdout(&schw(&["spectrum", "--k", "1", "--R", "20"])));
    assert_eq!(header, ["k", "n", "lambda", "lambda_scaled"]);
    assert!(rows.iter().all(|r| r[2].parse::<f64>().unwrap() > 0.0));
    let v = json(&["spectrum", "--R", "R*", "--count", "1"]);
    assert!(v["result"]["shooting"]["entries"][0]["lambda"].as_f64().unwrap().abs() < 1e-8);
}

#[test]
fn morse_index_command() {
    for (r, expected) in [("3", 0), ("20", 1), ("2000", 1)] {
        let v = json(&["morse-index", "--mass", "2", "--R", r]);
        assert_eq!(v["result"]["morse_index"].as_u64().unwrap(), expected);
    }
    let v = json(&["morse-index", "--mass", "2"]);
    assert_eq!(v["result"]["outer_radius"].as_f64().unwrap(), 2000.0);
}

#[test]
fn monotonicity_and_boundary_commands() {
    let v = json(&["monotonicity", "--mass", "2", "--surface", "plane", "--rho-max", "50"]);
    assert_eq!(v["result"]["monotone"], true);
    for r in v["result"]["formula_residuals"].as_array().unwrap() {
        assert!(r.as_f64().unwrap().abs() <= 1e-7);
    }
    let o = schw(&["monotonicity", "--mass", "2", "--surface", "cone:0.5236", "--rho-max", "50"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not minimal"));
    assert!(!o.stdout.is_empty());

    let v = json(&["boundary-bound", "--mass", "2", "--surface", "plane"]);
    assert!((v["result"]["lhs"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!((v["result"]["rhs"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let rotated = json(&["boundary-bound", "--mass", "2", "--surface", "plane:rotated:11"]);
    assert!((rotated["result"]["lhs"].as_f64().unwrap() - v["result"]["lhs"].as_f64().unwrap()).abs() < 1e-12);
}

#[test]
fn riccati_command() {
    let rc = |c: &str| json(&["riccati", "--mass", "2", "--c", c])["result"]["R_c"].as_f64().unwrap();
    let star = 11.016_093_846_685_423;
    assert!((rc("-8") - star).abs() < 1e-8);
    assert!(rc("-20") > star);
    assert!(rc("0") < star);
}

#[test]
fn exit_codes() {
    assert_eq!(schw(&["geom", "--r-max", "-1"]).status.code(), Some(2));
    assert_eq!(schw(&["spectrum"]).status.code(), Some(2));
    assert_eq!(schw(&["monotonicity", "--surface", "torus"]).status.code(), Some(2));
    assert_eq!(schw(&["--ode-tol", "0", "stability-radius"]).status.code(), Some(2));
    assert_eq!(schw(&["--version"]).status.code(), Some(0));
    // an outer radius at the horizon is a precondition failure
    assert_eq!(schw(&["spectrum", "--mass", "2", "--R", "1"]).status.code(), Some(2));
    // an ODE tolerance the integrator cannot honour is a numerical failure
    let o = schw(&["spectrum", "--mass", "2", "--R", "20", "--ode-tol", "1e-300"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!o.stderr.is_empty());
}

#[test]
fn deterministic_output() {
    let args = ["monotonicity", "--mass", "2", "--surface", "plane:rotated", "--seed", "4", "--rho-max", "30"];
    assert_eq!(schw(&args).stdout, schw(&args).stdout);
    let args = ["spectrum", "--mass", "2", "--R", "20", "--method", "both", "--output", "json"];
    assert_eq!(schw(&args).stdout, schw(&args).stdout);
}

#[test]
fn thread_cap_does_not_change_output() {
    let args = ["morse-index", "--mass", "2", "--R", "20"];
    let one = Command::new(env!("CARGO_BIN_EXE_schw")).args(args).env("SCHW_THREADS", "1").output().unwrap();
    let auto = Command::new(env!("CARGO_BIN_EXE_schw")).args(args).env("SCHW_THREADS", "0").output().unwrap();
    assert_eq!(one.stdout, auto.stdout);
    let bad = Command::new(env!("CARGO_BIN_EXE_schw")).args(args).env("SCHW_THREADS", "many").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn config_file_merges_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# bundle\nmass = 2\noutput = json\n").unwrap();
    let cfg_s = cfg.to_str().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&schw(&["stability-radius", "--config", cfg_s]).stdout).unwrap();
    assert_eq!(v["provenance"]["mass"], 2.0);
    // flags win
    let v: serde_json::Value =
        serde_json::from_slice(&schw(&["stability-radius", "--config", cfg_s, "--mass", "3"]).stdout).unwrap();
    assert_eq!(v["provenance"]["mass"], 3.0);

    std::fs::write(&cfg, "mass = 2\ncolour = blue\n").unwrap();
    assert_eq!(schw(&["stability-radius", "--config", cfg_s]).status.code(), Some(2));
    assert_eq!(schw(&["stability-radius", "--config", "/nonexistent/file"]).status.code(), Some(2));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("geom.csv");
    let o = schw(&["geom", "--points", "4", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("rho_iso,s,r,h,f\n") && text.lines().count() == 5);
    assert!(!text.contains('\r'));
}
