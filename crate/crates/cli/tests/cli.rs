use std::path::Path;
use std::process::{Command, Output};

fn jag(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jag"))
        .args(args)
        .env("JAG_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = jag(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn end_to_end_range_workload() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let index = dir.path().join("index.jag");
    let blind = dir.path().join("blind.jag");
    ok(&["gen", "--family", "range", "--n", "1500", "--dim", "8", "--queries", "30", "--seed", "3", "--out", s(&data)]);
    for f in ["base.fbin", "base.abin", "queries.fbin", "queries.qbin"] {
        assert!(data.join(f).exists(), "{f}");
    }
    ok(&["gt", "--data", s(&data), "--k", "10"]);
    assert!(data.join("gt.bin").exists());
    ok(&["build", "--data", s(&data), "--deg", "12", "--lbuild", "24", "--deterministic", "--out", s(&index)]);
    ok(&["build", "--data", s(&data), "--levels", "inf", "--deg", "12", "--lbuild", "24", "--out", s(&blind)]);

    let search = ok(&["search", "--index", s(&index), "--data", s(&data), "--beam", "40"]);
    assert_eq!(search.lines().count(), 30);

    let csv = ok(&[
        "eval", "--data", s(&data), "--index", s(&index), "--post", s(&blind), "--pre", "--beams", "10,1500",
    ]);
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("schema_version,config_id,algorithm,beam"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2 * 3);
    // exhaustive beam and the exact scan both reach full recall
    for row in &rows {
        let cols: Vec<&str> = row.split(',').collect();
        let recall: f64 = cols[6].parse().unwrap();
        assert!((0.0..=1.0).contains(&recall));
        if cols[3] == "1500" {
            assert_eq!(recall, 1.0, "{row}");
        }
    }

    let pre = ok(&["baseline", "pre", "--data", s(&data)]);
    assert!(pre.starts_with("recall@10 1.0000"), "{pre}");
    ok(&["baseline", "post", "--data", s(&data), "--index", s(&blind), "--beam", "50"]);
}

#[test]
fn deterministic_builds_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    ok(&["gen", "--family", "subset", "--n", "600", "--dim", "6", "--queries", "5", "--out", s(&data)]);
    let a = dir.path().join("a.jag");
    let b = dir.path().join("b.jag");
    for out in [&a, &b] {
        ok(&["build", "--data", s(&data), "--mode", "weight", "--deg", "8", "--lbuild", "16", "--deterministic", "--out", s(out)]);
    }
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn ablate_writes_grid() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    ok(&["gen", "--family", "range", "--n", "800", "--dim", "4", "--queries", "40", "--out", s(&data)]);
    let csv = ok(&["ablate", "--data", s(&data), "--levels", "1,0", "--deg", "8", "--lbuild", "16", "--budget", "400"]);
    // header plus (2 single + 1 merged) indices x 5 bands
    assert_eq!(csv.lines().count(), 1 + 3 * 5);
}

#[test]
fn errors_exit_nonzero_with_one_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = jag(&["search", "--index", s(&dir.path().join("nope.jag")), "--data", s(dir.path())]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("error: "));

    let bad_level = jag(&["build", "--data", s(dir.path()), "--levels", "2", "--out", "x"]);
    assert!(!bad_level.status.success());
}
