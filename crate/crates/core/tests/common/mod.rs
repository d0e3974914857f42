#![allow(dead_code)]

use std::path::{Path, PathBuf};

use vcbench::media::{decode_video, load_manifest, write_y4m, Frame, FrameSequence};
use vcbench::synth;

pub fn run(args: &[&str]) -> i32 {
    vcbench::cli::run(std::iter::once("vcbench").chain(args.iter().copied()))
}

pub fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

/// Two single-scene pans under `nature/river`.
pub fn write_sources(dir: &Path) {
    let sub = dir.join("nature").join("river");
    std::fs::create_dir_all(&sub).unwrap();
    write_y4m(&synth::pan(32, 32, 130, 1, 11), &sub.join("a.y4m")).unwrap();
    write_y4m(&synth::pan(32, 32, 136, 2, 12), &sub.join("b.y4m")).unwrap();
}

pub fn dimmed(video: &FrameSequence, factor: f32) -> FrameSequence {
    let frames = video
        .frames()
        .iter()
        .map(|f| {
            Frame::from_fn(f.height(), f.width(), |y, x| {
                let p = f.pixel(y, x);
                [p[0] * factor, p[1] * factor, p[2] * factor]
            })
        })
        .collect();
    FrameSequence::new(frames, video.fps()).unwrap()
}

/// Builds a manifest from fresh sources and writes a generated video per entry
/// that reproduces the source between the two clip windows (dimmed for `b`).
pub struct Fixture {
    pub root: tempfile::TempDir,
}

impl Fixture {
    pub fn new() -> Self {
        let root = tempfile::tempdir().unwrap();
        write_sources(&root.path().join("raw"));
        let code = run(&["build", "--input", s(&root.path().join("raw")), "--out", s(&root.path().join("ds"))]);
        assert_eq!(code, 0);
        let f = Fixture { root };
        let gen = f.generated();
        std::fs::create_dir_all(&gen).unwrap();
        for e in load_manifest(&f.manifest()).unwrap() {
            let src = decode_video(&f.raw().join(&e.path), None).unwrap();
            let mut out: FrameSequence = src.slice(e.start_window.first()..e.end_window.last() + 1).unwrap();
            if e.id.ends_with("__b") {
                out = dimmed(&out, 0.9);
            }
            write_y4m(&out, &gen.join(format!("{}.y4m", e.id))).unwrap();
        }
        f
    }

    pub fn raw(&self) -> PathBuf {
        self.root.path().join("raw")
    }

    pub fn manifest(&self) -> PathBuf {
        self.root.path().join("ds").join("manifest.json")
    }

    pub fn generated(&self) -> PathBuf {
        self.root.path().join("model-x")
    }

    pub fn eval(&self, out: &Path, extra: &[&str]) -> i32 {
        let (manifest, raw, gen) = (self.manifest(), self.raw(), self.generated());
        let mut args = vec!["eval", "--manifest", s(&manifest), "--source-root", s(&raw), "--generated", s(&gen)];
        args.extend(["--out", s(out)]);
        args.extend_from_slice(extra);
        run(&args)
    }
}

/// Every file under `dir` with its bytes, sorted by relative path.
pub fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                files.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    files.sort();
    files
}
