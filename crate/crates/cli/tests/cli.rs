use std::path::Path;
use std::process::{Command, Output};

fn smallqg(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smallqg"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("run smallqg")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).trim().to_string()
}

#[test]
fn reduce_product_of_syzygy_classes() {
    let dir = tempfile::tempdir().unwrap();
    let o = smallqg(&["green", "reduce", "z+*z-"], dir.path());
    assert!(o.status.success());
    // 1 + (2y + 4)(y^2 - 1) at n = 3
    assert_eq!(stdout(&o), "-3 - 2*y + 4*y^2 + 2*y^3");
    let o = smallqg(&["green", "reduce", "--stable", "z+*z-"], dir.path());
    assert_eq!(stdout(&o), "1");
    let o = smallqg(&["green", "mul", "y", "x1"], dir.path());
    assert_eq!(stdout(&o), "y*x1");
}

#[test]
fn regular_module_decomposes_into_block_simples() {
    let dir = tempfile::tempdir().unwrap();
    let o = smallqg(&["build-module", "--kind", "regular", "--params", "1,1", "--out", "ht.json"], dir.path());
    assert!(o.status.success());
    let o = smallqg(&["decompose", "ht.json"], dir.path());
    assert!(o.status.success());
    assert_eq!(stdout(&o), "BlockSimple(2,0) + BlockSimple(2,1) + BlockSimple(2,2)");
}

#[test]
fn tensor_files_and_decompose() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(smallqg(&["build-module", "--kind", "simple", "--params", "2", "--out", "a.json"], p).status.success());
    assert!(smallqg(&["build-module", "--kind", "block-simple", "--params", "1,0", "--out", "b.json"], p).status.success());
    assert!(smallqg(&["tensor", "a.json", "b.json", "--out", "ab.json"], p).status.success());
    let o = smallqg(&["decompose", "ab.json"], p);
    assert_eq!(stdout(&o), "BlockSimple(1,1) + BlockSimple(1,2)");
    assert!(smallqg(&["build-module", "--kind", "syzygy", "--params", "+,1,1", "--out", "s.json"], p).status.success());
    assert!(smallqg(&["tensor", "s.json", "s.json", "--out", "ss.json"], p).status.success());
    let o = smallqg(&["decompose", "ss.json"], p);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "4*Simple(3) + Proj(1) + Syzygy(+,2,1)");
}

#[test]
fn export_import_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert!(smallqg(&["export", "--green", "x1 + 2*z+", "--out", "g.json"], p).status.success());
    assert_eq!(stdout(&smallqg(&["import", "g.json"], p)), "x1 + 2*z+");
    assert!(smallqg(&["export", "--module", "Proj(2)", "--out", "m.json"], p).status.success());
    assert_eq!(stdout(&smallqg(&["import", "m.json"], p)), "valid module: dim 6, Proj(2)");
}

#[test]
fn tensor_suite_passes_with_full_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = smallqg(&["verify", "--suite", "tensor", "--n", "3", "--report", "r.jsonl"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let report = std::fs::read_to_string(dir.path().join("r.jsonl")).unwrap();
    let lines: Vec<&str> = report.lines().collect();
    assert_eq!(lines.len(), 301);
    assert!(lines[..300].iter().all(|l| l.contains("\"status\":\"pass\"") && l.contains("sha256")));
    let again = smallqg(&["verify", "--suite", "tensor", "--n", "3"], dir.path());
    assert_eq!(String::from_utf8_lossy(&again.stdout), report);
}

#[test]
fn fault_hook_gives_failing_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let o = smallqg(&["verify", "--suite", "modules", "--fault", "corrupt-simple"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("\"counterexample\""));
}

#[test]
fn bad_input_is_reported_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = smallqg(&["--n", "4", "verify"], p);
    assert_eq!(o.status.code(), Some(4));
    let o = smallqg(&["green", "reduce", "y**2"], p);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("at 2"));
    std::fs::write(p.join("bad.json"), "{\"n\": 3,\n").unwrap();
    let o = smallqg(&["import", "bad.json"], p);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    let o = smallqg(&["verify", "--suite", "nonsense"], p);
    assert_eq!(o.status.code(), Some(4));
    let o = smallqg(&["build-module", "--kind", "simple", "--params", "9"], p);
    assert_eq!(o.status.code(), Some(4));
}
