use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mqf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mqf"))
        .args(args)
        .env("MQF_THREADS", "2")
        .output()
        .expect("spawn mqf")
}

fn ok(args: &[&str]) -> Output {
    let out = mqf(args);
    assert!(
        out.status.success(),
        "mqf {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_ground_truth_build_query_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("base.fvecs");
    let queries = dir.path().join("queries.fvecs");
    let gt = dir.path().join("gt");
    let index = dir.path().join("forest.mqf");
    let csv = dir.path().join("answers.csv");

    ok(&[
        "gen",
        "--gen",
        "clustered:2000:16:8:0.15",
        "--seed",
        "3",
        "--out",
        s(&data),
    ]);
    ok(&[
        "gen",
        "--gen",
        "uniform:10:16",
        "--seed",
        "4",
        "--out",
        s(&queries),
    ]);
    ok(&[
        "ground-truth",
        "--data",
        s(&data),
        "--queries",
        s(&queries),
        "--k",
        "10",
        "--out",
        s(&gt),
    ]);
    assert!(dir.path().join("gt.ivecs").is_file());
    assert!(dir.path().join("gt.dist.fvecs").is_file());

    ok(&[
        "build",
        "--data",
        s(&data),
        "--trees",
        "4",
        "--ns",
        "2000",
        "--seed",
        "5",
        "--out",
        s(&index),
    ]);
    ok(&[
        "query",
        "--data",
        s(&data),
        "--index",
        s(&index),
        "--queries",
        s(&queries),
        "--k",
        "10",
        "--v",
        "2",
        "--mode",
        "both",
        "--out",
        s(&csv),
    ]);

    // one leaf holds everything, so both modes must agree with the exact scan
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("mode,query,rank,id,distance"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2 * 10 * 10);
    let rp: Vec<&str> = rows.iter().filter(|r| r[0] == "rp").map(|r| r[3]).collect();
    let mq: Vec<&str> = rows.iter().filter(|r| r[0] == "mq").map(|r| r[3]).collect();
    assert_eq!(rp, mq);

    let ids = fs::read(dir.path().join("gt.ivecs")).unwrap();
    let first: Vec<String> = ids[4..44]
        .chunks(4)
        .map(|b| u32::from_le_bytes(b.try_into().unwrap()).to_string())
        .collect();
    assert_eq!(
        rp[..10],
        first.iter().map(String::as_str).collect::<Vec<_>>()[..]
    );
}

#[test]
fn bench_recall_writes_csv_deterministically() {
    let run = |dir: &Path| {
        ok(&[
            "bench",
            "recall",
            "--gen",
            "clustered:3000:16:6:0.15",
            "--queries",
            "20",
            "--k",
            "10",
            "--trees",
            "2,4",
            "--ns",
            "100",
            "--v",
            "1",
            "--seed",
            "9",
            "--out",
            s(dir),
        ]);
        fs::read(dir.join("recall.csv")).unwrap()
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let first = run(a.path());
    assert_eq!(first, run(b.path()));
    let text = String::from_utf8(first).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 2);
}

#[test]
fn bench_without_out_prints_to_stdout() {
    let out = ok(&[
        "bench",
        "kappa",
        "--gen",
        "uniform:1000:8",
        "--queries",
        "5",
        "--k",
        "10",
        "--m-values",
        "10,20",
        "--seed",
        "2",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().count() > 1);
}

#[test]
fn invalid_configuration_exits_with_two() {
    let out = mqf(&[
        "bench",
        "recall",
        "--gen",
        "uniform:100:8",
        "--queries",
        "5",
        "--k",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(2));

    let out = mqf(&["gen", "--gen", "banana:1:2", "--out", "/dev/null"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_file_is_a_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.fvecs");
    let out = mqf(&[
        "build",
        "--data",
        s(&missing),
        "--out",
        s(&dir.path().join("f")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}
