use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_newtonflux"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    dir.join(name)
}

#[test]
fn identity_passes_on_caps_and_perturbations() {
    let o = run(&["identity", "--catalog", "euclidean_cap:n=2,R=2,rho=1", "--r", "1,2"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.lines().all(|l| l.starts_with("PASS ")));
    assert!(out.contains("identity_umbilic r=1") && out.contains("identity_sr r=2") && out.contains("nueta"));

    let o = run(&[
        "identity",
        "--catalog",
        "perturbed_graph:base=euclidean_cap,n=2,R=1,rho=1,amplitude=0.05",
        "--seed",
        "3",
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn malformed_descriptors_exit_with_two() {
    for (catalog, field) in [
        ("euclidean_cap:n=2,R=abc,rho=1", "`R`"),
        ("euclidean_cap:n=2,R=1", "`rho`"),
        ("euclidean_cap:n=2,R=1,rho=1,colour=3", "colour"),
        ("euclidean_cap:n=7,R=1,rho=1", "`n`"),
    ] {
        let o = run(&["identity", "--catalog", catalog]);
        assert_eq!(code(&o), 2, "{catalog}");
        let err = String::from_utf8(o.stderr).unwrap();
        assert!(err.contains(field), "{catalog}: {err}");
        assert!(o.stdout.is_empty());
    }
    let o = run(&["identity", "--catalog", "euclidean_cap:n=2,R=2,rho=1", "--r", "3"]);
    assert_eq!(code(&o), 2);
    let o = run(&["flux", "--catalog", "euclidean_cap:n=2,R=2,rho=1", "--field", "swirl"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8(o.stderr).unwrap().contains("`field`"));
    let o = run(&["sweep", "--catalog", "euclidean_cap:n=2,R=1,rho=1", "--sweep", "R=1:5"]);
    assert_eq!(code(&o), 2);
    let o = run(&["frobnicate", "--catalog", "euclidean_cap:n=2,R=1,rho=1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn tolerance_failures_exit_with_one() {
    let o = run(&["flux", "--catalog", "euclidean_cap:n=2,R=2,rho=1", "--order", "2", "--tol", "1e-14"]);
    assert_eq!(code(&o), 1, "{}", stdout(&o));
    assert!(stdout(&o).contains("FAIL flux_killing"));
}

#[test]
fn flux_json_is_schema_versioned_and_reproducible() {
    let path = scratch("flux.json");
    let p = path.to_str().unwrap();
    let args = [
        "flux",
        "--catalog",
        "hyperbolic_cap:kind=geodesic_sphere,n=2,R=1,rho=0.8",
        "--field",
        "conformal",
        "--refine",
        "--out",
        p,
    ];
    let o = run(&args);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let first = std::fs::read(&path).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(v["schema"], "newtonflux/1");
    assert_eq!(v["settings"]["order"], 32);
    assert_eq!(v["settings"]["tol"], 1e-6);
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
    assert_eq!(v["rows"][0]["schema"], "newtonflux/1");
    assert_eq!(v["rows"][0]["formula"], "conformal");
    assert!(v["rows"][1]["quadrature"]["refine_delta"].is_number());
    run(&args);
    assert_eq!(first, std::fs::read(&path).unwrap());
}

#[test]
fn minimal_flux_through_the_cli() {
    let o = run(&["flux", "--catalog", "flat_disk:n=2,rho=1", "--field", "homothety", "--r", "1"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).starts_with("PASS flux_minimal r=1"));
}

#[test]
fn euclidean_sweep_csv() {
    let path = scratch("sweep.csv");
    let p = path.to_str().unwrap();
    let args = ["sweep", "--catalog", "euclidean_cap:n=2,R=1,rho=1", "--sweep", "R=1:5:20", "--out", p, "--seed", "4"];
    let o = run(&args);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().count(), 2);
    let first = std::fs::read_to_string(&path).unwrap();
    let mut lines = first.lines();
    assert_eq!(
        lines.next().unwrap(),
        "parameter,value,r,h_r,bound,closed_form,slack,closed_form_slack,identity_residual"
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').skip(1).map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 40);
    for row in &rows {
        let (radius, r, h) = (row[0], row[1] as i32, row[2]);
        assert!((h - radius.powi(-r)).abs() < 1e-9);
        assert!(row[6] >= 0.0);
    }
    assert!(rows[0][6].abs() < 1e-8 && rows[1][6].abs() < 1e-8);
    run(&args);
    assert_eq!(first, std::fs::read_to_string(&path).unwrap());
}

#[test]
fn hyperbolic_sweep_keeps_the_closed_form_fixed() {
    let path = scratch("hsweep.json");
    let p = path.to_str().unwrap();
    let o = run(&[
        "sweep",
        "--catalog",
        "hyperbolic_cap:kind=geodesic_sphere,n=2,R=1,rho=0.8",
        "--sweep",
        "R=0.8:3:20",
        "--r",
        "1",
        "--format",
        "json",
        "--out",
        p,
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 20);
    let want = 1.0 / 0.8f64.tanh();
    for row in rows {
        assert!((row["closed_form"].as_f64().unwrap() - want).abs() < 1e-12);
        assert!(row["h_r"].as_f64().unwrap() <= want + 1e-12);
    }
}

#[test]
fn descriptor_files() {
    let line = scratch("cap.txt");
    std::fs::write(&line, "spherical_cap:kind=geodesic_sphere,n=2,R=1,rho=0.7\n").unwrap();
    let o = run(&["identity", "--catalog", line.to_str().unwrap()]);
    assert_eq!(code(&o), 0);

    let json = scratch("cap.json");
    std::fs::write(&json, r#"{"family": "euclidean_cap", "params": {"n": 3, "R": 2, "rho": 1}}"#).unwrap();
    let o = run(&["flux", "--catalog", json.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().count(), 3);

    std::fs::write(&json, r#"{"params": {"n": 3}}"#).unwrap();
    let o = run(&["flux", "--catalog", json.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8(o.stderr).unwrap().contains("`family`"));
}
