use std::path::Path;
use std::process::{Command, Output};

fn forestlab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_forestlab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn manifest(out: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn sample_writes_forests_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = forestlab(
        &[
            "sample",
            "--d",
            "3",
            "--radius",
            "2",
            "--replicas",
            "3",
            "--seed",
            "5",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("forests.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("replica,vertices,components,edges,origin_component_size,origin_ray_length")
    );
    assert_eq!(lines.count(), 3);
    assert!(dir.path().join("forests/forest_0.txt").exists());
    let m = manifest(dir.path());
    assert_eq!(m["experiment"], "sample");
    assert_eq!(m["seed"], 5);
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn same_seed_same_results() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = [
        "njl",
        "--d",
        "4",
        "--radius",
        "3",
        "--replicas",
        "20",
        "--seed",
        "9",
    ];
    assert!(forestlab(&args, a.path()).status.success());
    let mut with_threads = args.to_vec();
    with_threads.extend(["--threads", "1"]);
    assert!(forestlab(&with_threads, b.path()).status.success());
    let read = |p: &Path| std::fs::read_to_string(p.join("njl.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
    assert_eq!(
        manifest(a.path())["config_sha256"],
        manifest(b.path())["config_sha256"]
    );
    let c = tempfile::tempdir().unwrap();
    let mut other = args.to_vec();
    other[8] = "10";
    assert!(forestlab(&other, c.path()).status.success());
    assert_ne!(read(a.path()), read(c.path()));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // radius equal to ball radius
    let o = forestlab(
        &["resample-test", "--d", "2", "--radius", "1", "--ball", "1"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    let o = forestlab(
        &[
            "sample",
            "--d",
            "9",
            "--radius",
            "9",
            "--budget-vertices",
            "1000",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3));
    let o = forestlab(&[], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = forestlab(&["cuttime", "--d", "2"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(
        &cfg,
        r#"{"experiment": "kac", "chain": "two-state", "samples": 1000, "seed": 3}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = forestlab(
        &["--config", cfg.to_str().unwrap(), "--samples", "2000"],
        &out,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = manifest(&out);
    assert_eq!(m["config"]["samples"], 2000);
    assert_eq!(m["config"]["chain"], "two-state");
    let kac: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("kac.json")).unwrap()).unwrap();
    assert_eq!(kac["samples"], 2000);

    std::fs::write(&cfg, r#"{"experiment": "kac", "bogus": 1}"#).unwrap();
    let o = forestlab(&["--config", cfg.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn resistance_on_an_edge_list() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("triangle.txt");
    std::fs::write(&graph, "3 3\n0 1\n1 2\n2 0\n").unwrap();
    let out = dir.path().join("out");
    let o = forestlab(
        &[
            "resistance",
            "--graph",
            graph.to_str().unwrap(),
            "--a",
            "0",
            "--b",
            "1",
        ],
        &out,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("resistance.json")).unwrap())
            .unwrap();
    let value = r["resistance"].as_f64().unwrap();
    assert!((value - 2.0 / 3.0).abs() < 1e-12, "{r}");
}
