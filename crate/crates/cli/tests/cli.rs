use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_articraft")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn gen(out: &Path, extra: &[&str]) {
    let mut args = vec!["gen", "--out", s(out)];
    args.extend_from_slice(extra);
    let o = run(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn gen_writes_objects_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d");
    gen(&out, &["--count", "5", "--category", "microwave", "--complexity", "simple"]);
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["count"], 5);
    for obj in manifest["objects"].as_array().unwrap() {
        assert_eq!(obj["category"], "Microwave");
        let id = obj["id"].as_str().unwrap();
        for f in ["object.json", "object.urdf", "description.txt"] {
            assert!(out.join(id).join(f).is_file(), "{id}/{f}");
        }
    }
    let v = run(&["validate", "--data", s(&out)]);
    assert!(v.status.success());
    let st = String::from_utf8(run(&["stats", "--data", s(&out)]).stdout).unwrap();
    assert!(st.starts_with("5 objects, avg "), "{st}");
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("gen.toml");
    std::fs::write(&cfg, "count = 2\nseed = 4\ncategory = \"oven\"\n").unwrap();
    let out = dir.path().join("d");
    gen(&out, &["--config", s(&cfg), "--count", "3"]);
    let m: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["objects"].as_array().unwrap().len(), 3);
    assert!(m["objects"].as_array().unwrap().iter().all(|o| o["category"] == "Oven"));

    std::fs::write(&cfg, "colour = \"red\"\n").unwrap();
    let bad = run(&["gen", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn eval_against_itself_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d");
    gen(&out, &["--count", "4", "--seed", "3"]);
    let csv = dir.path().join("eval.csv");
    let o = run(&["eval", "--pred", s(&out), "--gt", s(&out), "--points-per-part", "64", "--out", s(&csv)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "sample,RS-dgIoU,AS-dgIoU,RS-dcDist,AS-dcDist,RS-dCD,AS-dCD,Acc%");
    assert_eq!(lines.len(), 6);
    assert_eq!(lines[5], "mean,0.000000,0.000000,0.000000,0.000000,0.000000,0.000000,100.000000");
}

#[test]
fn urdf_export_import_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d");
    gen(&out, &["--count", "1", "--seed", "8"]);
    let src = out.join("obj_00000").join("object.json");
    let (urdf, back) = (dir.path().join("o.urdf"), dir.path().join("o.json"));
    assert!(run(&["urdf", "export", "--input", s(&src), "--output", s(&urdf)]).status.success());
    assert!(run(&["urdf", "import", "--input", s(&urdf), "--output", s(&back)]).status.success());
    let a: serde_json::Value = serde_json::from_slice(&std::fs::read(&src).unwrap()).unwrap();
    let b: serde_json::Value = serde_json::from_slice(&std::fs::read(&back).unwrap()).unwrap();
    assert_eq!(a["parts"].as_array().unwrap().len(), b["parts"].as_array().unwrap().len());

    // A second base is a validation failure; a missing file is a system one.
    let mut broken = a.clone();
    let first = broken["parts"][0].clone();
    let n = broken["parts"].as_array().unwrap().len();
    let mut extra = first;
    extra["id"] = n.into();
    extra["parent_id"] = 0.into();
    broken["parts"].as_array_mut().unwrap().push(extra);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, serde_json::to_vec(&broken).unwrap()).unwrap();
    let e = run(&["urdf", "export", "--input", s(&bad), "--output", s(&urdf)]);
    assert_eq!(e.status.code(), Some(1), "{}", String::from_utf8_lossy(&e.stderr));
    let missing = run(&["stats", "--data", s(&dir.path().join("nope"))]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn graph_reply_prints_canonical_form() {
    let dir = tempfile::tempdir().unwrap();
    let reply = dir.path().join("reply.txt");
    std::fs::write(&reply, "Reasoning...\n```json\n{\"base\":[{\"drawer\":[{\"handle\":[]}]},{\"door\":[]}]}\n```\n").unwrap();
    let o = run(&["graph", "--reply", s(&reply)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8(o.stdout).unwrap().contains("base(door(),drawer(handle()))"));
    std::fs::write(&reply, "{\"door\":[]}").unwrap();
    assert_eq!(run(&["graph", "--reply", s(&reply)]).status.code(), Some(1));
}
