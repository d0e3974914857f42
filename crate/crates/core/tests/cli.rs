mod common;

use std::process::Command;

use common::{run, s, snapshot, Fixture};
use vcbench::cli::{align, parse_ratings, read_reports, EvalSummary};
use vcbench::media::{load_manifest, write_y4m};
use vcbench::scoring::ScoreReport;
use vcbench::stats::{human_alignment, RaterMatrix};
use vcbench::synth;

#[test]
fn eval_writes_reports_and_leaderboard() {
    let f = Fixture::new();
    let out = f.root.path().join("out");
    assert_eq!(f.eval(&out, &["--workers", "2", "--plots"]), 0);
    let ids: Vec<String> = load_manifest(&f.manifest()).unwrap().into_iter().map(|e| e.id).collect();
    assert_eq!(ids, ["nature__river__a", "nature__river__b"]);
    for id in &ids {
        let text = std::fs::read_to_string(out.join("reports").join(format!("{id}.json"))).unwrap();
        let r = ScoreReport::from_json(&text).unwrap();
        assert!(!r.partial, "{:?}", r.errors);
        assert!(r.score.unwrap() > 0.5);
    }
    let csv = std::fs::read_to_string(out.join("leaderboard.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("Model,"));
    assert!(lines[1].starts_with("model-x,"));
    assert!(out.join("plots").join("radar.svg").is_file());
    let summary: EvalSummary =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!((summary.manifest_entries, summary.evaluated), (2, 2));
}

#[test]
fn missing_generated_file_is_partial() {
    let f = Fixture::new();
    std::fs::remove_file(f.generated().join("nature__river__b.y4m")).unwrap();
    let out = f.root.path().join("out");
    assert_eq!(f.eval(&out, &[]), 2);
    let summary: EvalSummary =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary.missing, ["nature__river__b"]);
    assert_eq!(read_reports(&out).unwrap().len(), 1);
}

#[test]
fn configuration_errors_exit_1() {
    let f = Fixture::new();
    let out = f.root.path().join("out");
    assert_eq!(f.eval(&out, &["--subject-backend", "no-such-model"]), 1);
    assert!(!out.exists());
    assert_eq!(f.eval(&out, &["--workers", "0"]), 1);
    assert_eq!(f.eval(&out, &["--cd-k", "0"]), 1);
    assert_eq!(f.eval(&out, &["--no-such-flag"]), 1);

    // one id, two extensions
    std::fs::copy(
        f.generated().join("nature__river__a.y4m"),
        f.generated().join("nature__river__a.mp4"),
    )
    .unwrap();
    assert_eq!(f.eval(&out, &[]), 1);
}

#[test]
fn unknown_backend_message_lists_registry() {
    let f = Fixture::new();
    let out = f.root.path().join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_vcbench"))
        .args(["eval", "--manifest", s(&f.manifest()), "--generated", s(&f.generated())])
        .args(["--out", s(&out), "--aesthetic-backend", "laion"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("laion") && err.contains("stub-aesthetic"), "{err}");
}

#[test]
fn eval_is_byte_identical_across_runs() {
    let f = Fixture::new();
    let a = f.root.path().join("a");
    let b = f.root.path().join("b");
    assert_eq!(f.eval(&a, &["--workers", "1"]), 0);
    assert_eq!(f.eval(&b, &["--workers", "3"]), 0);
    assert_eq!(snapshot(&a), snapshot(&b));
}

#[test]
fn build_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    common::write_sources(&dir.path().join("raw"));
    let raw = dir.path().join("raw");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run(&["build", "--input", s(&raw), "--out", s(&a), "--seed", "5", "--plots"]), 0);
    assert_eq!(run(&["build", "--input", s(&raw), "--out", s(&b), "--seed", "5", "--plots"]), 0);
    assert_eq!(snapshot(&a), snapshot(&b));
    assert_eq!(load_manifest(&a.join("manifest.json")).unwrap().len(), 2);
    assert!(a.join("plots").join("duration.svg").is_file());
}

#[test]
fn build_skips_three_scene_video_with_one_warning() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("raw");
    std::fs::create_dir_all(&raw).unwrap();
    let v = synth::splice(16, 16, &[([0.9, 0.1, 0.1], 50), ([0.1, 0.1, 0.9], 50), ([0.1, 0.8, 0.2], 50)]);
    write_y4m(&v, &raw.join("splice.y4m")).unwrap();
    let out = dir.path().join("out");
    assert_eq!(run(&["build", "--input", s(&raw), "--out", s(&out)]), 0);
    assert!(load_manifest(&out.join("manifest.json")).unwrap().is_empty());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["rejections"].as_array().unwrap().len(), 1);
    assert_eq!(summary["rejections"][0]["stage"], "scenes");
}

#[test]
fn build_on_missing_directory_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    assert_eq!(run(&["build", "--input", s(&dir.path().join("nope")), "--out", s(&out)]), 1);
    assert_eq!(run(&["build", "--input", s(dir.path()), "--out", s(&out), "--min-clip-seconds", "3"]), 1);
}

#[test]
fn leaderboard_merges_models() {
    let f = Fixture::new();
    let (a, b) = (f.root.path().join("a"), f.root.path().join("b"));
    assert_eq!(f.eval(&a, &[]), 0);
    assert_eq!(f.eval(&b, &[]), 0);
    let csv = f.root.path().join("board.csv");
    let radar = f.root.path().join("radar.svg");
    let m1 = format!("first={}", a.display());
    let m2 = format!("second={}", b.join("reports").display());
    assert_eq!(run(&["leaderboard", "--model", &m1, "--model", &m2, "--out", s(&csv), "--radar", s(&radar)]), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    // equal scores sort by name
    assert!(rows[0].starts_with("first,") && rows[1].starts_with("second,"));
    assert_eq!(rows[0].split_once(',').unwrap().1, rows[1].split_once(',').unwrap().1);
    assert!(radar.is_file());
    assert_eq!(run(&["leaderboard", "--model", "broken"]), 1);
}

fn ratings_csv(reports: &[ScoreReport], f: impl Fn(&str, f64) -> Vec<f64>) -> String {
    let mut s = String::from("item_id,dimension,r1,r2,r3\n");
    for r in reports {
        for (dim, v) in [("VQS", r.vqs), ("SECS", r.secs), ("TSS", r.tss)] {
            let cells: Vec<String> = f(dim, v.unwrap()).iter().map(|x| x.to_string()).collect();
            s += &format!("{},{dim},{}\n", r.item_id, cells.join(","));
        }
    }
    s
}

#[test]
fn human_align_matches_direct_statistics() {
    let f = Fixture::new();
    let out = f.root.path().join("out");
    assert_eq!(f.eval(&out, &[]), 0);
    let reports = read_reports(&out).unwrap();

    // raters equal to the objective score on a 0-1 scale
    let exact = ratings_csv(&reports, |_, v| vec![v; 3]);
    let rows = align(&reports, &parse_ratings(exact.as_bytes()).unwrap(), (0.0, 1.0)).unwrap();
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert!((r.correlation - 1.0).abs() < 1e-12, "{r:?}");
        assert!((r.objective_mean - r.subjective_mean).abs() < 1e-12);
        assert_eq!(r.consistency, 1.0);
    }

    // noisy raters on 0-10 versus direct stats calls
    let noisy = ratings_csv(&reports, |d, v| {
        let o = d.len() as f64 * 0.1;
        vec![10.0 * v - o, 10.0 * v - 1.0, 9.0 * v + o]
    });
    let rows = align(&reports, &parse_ratings(noisy.as_bytes()).unwrap(), (0.0, 10.0)).unwrap();
    let tss: Vec<f64> = reports.iter().map(|r| r.tss.unwrap()).collect();
    let matrix: Vec<Vec<f64>> = tss.iter().map(|v| vec![10.0 * v - 0.3, 10.0 * v - 1.0, 9.0 * v + 0.3]).collect();
    let direct = human_alignment("TSS", &tss, &RaterMatrix::new(matrix, (0.0, 10.0)).unwrap()).unwrap();
    assert_eq!(rows[2], direct);

    let path = f.root.path().join("ratings.csv");
    std::fs::write(&path, &noisy).unwrap();
    let table = f.root.path().join("table.csv");
    let o = Command::new(env!("CARGO_BIN_EXE_vcbench"))
        .args(["human-align", "--reports", s(&out), "--ratings", s(&path), "--out", s(&table)])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.starts_with("Score  Objective Avg.  Subjective Avg."), "{stdout}");
    assert_eq!(stdout.lines().count(), 4);
    assert!(std::fs::read_to_string(&table).unwrap().starts_with("Score,Objective Avg."));
}

#[test]
fn human_align_rejects_mismatch_and_empty_input() {
    let f = Fixture::new();
    let out = f.root.path().join("out");
    assert_eq!(f.eval(&out, &[]), 0);
    let reports = read_reports(&out).unwrap();
    let mut text = ratings_csv(&reports[..1], |_, v| vec![v * 10.0, 5.0, 6.0]);
    text += "ghost,VQS,1,2,3\n";
    let path = f.root.path().join("ratings.csv");
    std::fs::write(&path, &text).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_vcbench"))
        .args(["human-align", "--reports", s(&out), "--ratings", s(&path)])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("ghost") && err.contains("nature__river__b"), "{err}");

    std::fs::write(&path, "").unwrap();
    assert_eq!(run(&["human-align", "--reports", s(&out), "--ratings", s(&path)]), 1);
}

#[test]
fn version_lists_backends() {
    let o = Command::new(env!("CARGO_BIN_EXE_vcbench")).arg("version").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("vcbench ") && text.contains("stub-histogram"));
}
