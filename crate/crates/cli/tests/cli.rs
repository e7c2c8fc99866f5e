use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_quadspec"));
    c.env_remove("QUADSPEC_BUDGET_ROWS");
    c
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn assert_schema(name: &str, value: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(format!("{name}.schema.json"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let v = jsonschema::validator_for(&schema).expect("schema compiles");
    let errs: Vec<String> = v.iter_errors(value).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errs.is_empty(), "{name}: {errs:?}");
}

fn c(v: &Value) -> (f64, f64) {
    (v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

#[test]
fn analyze_normal_fixture() {
    let r = json_of(&run(&["analyze", data("q1.json").to_str().unwrap(), "--radius", "12"]));
    assert_schema("analysis", &r);
    assert_eq!(r["normal"], true);
    assert_eq!(r["verdict"], "Normal-Stable");
    assert!(r["boundary_orders"].is_null());
    let w = std::f64::consts::SQRT_2 * num_complex::Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
    let mut want = Vec::new();
    for k1 in 0..12 {
        for k2 in 0..12 {
            let z = (2 * k1 + 1) as f64 + w * (2 * k2 + 1) as f64;
            if z.norm() <= 12.0 {
                want.push(z);
            }
        }
    }
    let got: Vec<(f64, f64)> = r["spectrum"]["eigenvalues"].as_array().unwrap().iter().map(c).collect();
    assert_eq!(got.len(), want.len());
    for z in want {
        assert!(got.iter().any(|g| (g.0 - z.re).hypot(g.1 - z.im) < 1e-9 * z.norm()));
    }
}

#[test]
fn analyze_reports_orders_and_is_deterministic() {
    let f = data("q2.json");
    let a = run(&["analyze", f.to_str().unwrap(), "--seed", "7"]);
    let b = run(&["analyze", f.to_str().unwrap(), "--seed", "7"]);
    assert_eq!(a.stdout, b.stdout);
    let r = json_of(&a);
    assert_schema("analysis", &r);
    assert_eq!(r["normal"], false);
    assert_eq!(r["verdict"], "NonNormal-Unstable");
    let orders = r["boundary_orders"].as_array().unwrap();
    let by_dir: Vec<((f64, f64), Value)> = orders.iter().map(|o| (c(&o["halfline_direction"]), o["order"].clone())).collect();
    for ((re, im), order) in by_dir {
        if re > 0.5 {
            assert_eq!(order, serde_json::json!({"kind": "Finite", "k": 6}));
        } else {
            assert!(im > 0.5);
            assert_eq!(order, serde_json::json!({"kind": "Finite", "k": 2}));
        }
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let x2 = dir.path().join("x2.json");
    std::fs::write(&x2, r#"{"n":1,"Q":[[[1,0],[0,0]],[[0,0],[0,0]]]}"#).unwrap();
    let out = run(&["analyze", x2.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not elliptic"));

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"n":1,"Q":"nope"}"#).unwrap();
    assert_eq!(run(&["analyze", bad.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(run(&["analyze", "/definitely/missing.json"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));

    let dump = dir.path().join("m.bin");
    let out = run(&["dump", data("q2.json").to_str().unwrap(), "--cutoff", "100", "--out", dump.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let out = bin()
        .env("QUADSPEC_BUDGET_ROWS", "32")
        .args(["profile", data("rotated_oscillator.json").to_str().unwrap(), "--direction", "1,0", "--etas", "5,10,20"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn reduce1d_and_dump() {
    let r = json_of(&run(&["reduce1d", data("rotated_oscillator.json").to_str().unwrap()]));
    assert_schema("normal-form-1d", &r);
    assert_eq!(r["kind"]["type"], "TypeI");
    assert!((r["kind"]["theta"].as_f64().unwrap() - std::f64::consts::FRAC_PI_4).abs() < 1e-9);

    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("h.bin");
    let out = run(&["dump", data("harmonic.json").to_str().unwrap(), "--cutoff", "5", "--out", dump.to_str().unwrap()]);
    assert!(out.status.success());
    let bytes = std::fs::read(&dump).unwrap();
    assert_eq!(&bytes[..4], b"QSPC");
    assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
    assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 5);
    assert_eq!(bytes.len(), 12 + 25 * 16);
    // entry (2, 2) = 5
    let at = 12 + (2 * 5 + 2) * 16;
    assert_eq!(f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap()), 5.0);
    let side: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("h.bin.json")).unwrap()).unwrap();
    assert_schema("dump-sidecar", &side);
    assert_eq!(side["rows"], 5);
}

#[test]
fn witness_at_interior_point() {
    let f = data("q2.json");
    let a = run(&["witness", f.to_str().unwrap(), "--z", "1,1", "--seed", "3"]);
    let b = run(&["witness", f.to_str().unwrap(), "--z", "1,1", "--seed", "3"]);
    assert_eq!(a.stdout, b.stdout);
    let w = json_of(&a);
    assert_schema("witness", &w);
    let fv = w["f_values"].as_array().unwrap();
    assert!(fv[0].as_f64().unwrap() > 0.0 && fv[1].as_f64().unwrap() < 0.0);
    assert!(w["t_plus"].as_f64().unwrap() < w["t_minus"].as_f64().unwrap());
    // boundary point: rejected
    assert_eq!(run(&["witness", f.to_str().unwrap(), "--z", "5,0"]).status.code(), Some(4));
}

#[test]
fn profile_and_index_on_the_boundary() {
    let f = data("rotated_oscillator.json");
    let etas: Vec<String> = (0..12).map(|i| format!("{}", 5.0 * 12f64.powf(i as f64 / 11.0))).collect();
    let p = json_of(&run(&["profile", f.to_str().unwrap(), "--direction", "1,0", "--etas", &etas.join(",")]));
    assert_schema("profile", &p);
    assert_eq!(p["verdict"], "Bounded");

    let hs: Vec<String> = (1..=10).map(|k| format!("1/{}", 5 * k)).collect();
    let fit = json_of(&run(&["scindex", f.to_str().unwrap(), "--z", "1,0", "--hs", &hs.join(",")]));
    assert_schema("index-fit", &fit);
    let mu = fit["mu_hat"].as_f64().unwrap();
    assert!((0.55..=0.78).contains(&mu), "{mu}");
}

fn read_csv(path: &Path) -> Vec<(f64, f64, f64, bool, usize)> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("re,im,log10_norm,converged,cutoff"));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap(), f[3].parse().unwrap(), f[4].parse().unwrap())
        })
        .collect()
}

#[test]
fn harmonic_grid_has_circular_level_lines() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("h.csv");
    let o = run(&[
        "grid",
        data("harmonic.json").to_str().unwrap(),
        "--region",
        "0,4,-1,1",
        "--res",
        "161,81",
        "--eps-levels",
        "0.5,0.25",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_csv(&out);
    assert_eq!(rows.len(), 161 * 81);
    let levels: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("h.csv.levels.json")).unwrap()).unwrap();
    assert_schema("levels", &levels);
    for lv in levels["levels"].as_array().unwrap() {
        let eps = lv["epsilon"].as_f64().unwrap();
        let lines = lv["polylines"].as_array().unwrap();
        assert_eq!(lines.len(), 2, "one circle around 1 and one around 3");
        for line in lines {
            let pts: Vec<(f64, f64)> = line.as_array().unwrap().iter().map(c).collect();
            let center = if pts[0].0 < 2.0 { 1.0 } else { 3.0 };
            for (x, y) in pts {
                assert!(((x - center).hypot(y) - eps).abs() < 1e-3, "eps {eps}: ({x}, {y})");
            }
        }
    }
}

#[test]
fn grid_respects_the_range_bound_outside_the_sector() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("q2.csv");
    let a = run(&["grid", data("q2.json").to_str().unwrap(), "--region", "-3,3,-3,3", "--res", "9,9", "--out", out.to_str().unwrap()]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let first = std::fs::read(&out).unwrap();
    for (re, im, v, converged, cutoff) in read_csv(&out) {
        assert!(cutoff >= 24);
        // distance to the closed first quadrant
        let d = if re >= 0.0 && im >= 0.0 { 0.0 } else { re.min(0.0).hypot(im.min(0.0)) };
        if converged && d > 0.0 {
            assert!(v <= (1.0 / d).log10() + 1e-9, "({re}, {im}): {v} vs d = {d}");
        }
    }
    let b = run(&["grid", data("q2.json").to_str().unwrap(), "--region", "-3,3,-3,3", "--res", "9,9", "--out", out.to_str().unwrap()]);
    assert!(b.status.success());
    assert_eq!(first, std::fs::read(&out).unwrap());
}
