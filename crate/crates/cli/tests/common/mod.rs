#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const CONFIG: &str = "figseek.toml";

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

/// A scratch directory holding a copy of the fixture inputs and config.
pub struct Workspace {
    pub dir: tempfile::TempDir,
}

impl Workspace {
    pub fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        for name in ["corpus.jsonl", "labels.tsv", "venues.tsv", CONFIG] {
            std::fs::copy(fixtures().join(name), dir.path().join(name)).unwrap();
        }
        Workspace { dir }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    pub fn write(&self, name: &str, contents: &str) -> PathBuf {
        let p = self.path(name);
        std::fs::write(&p, contents).unwrap();
        p
    }

    pub fn read(&self, name: &str) -> String {
        std::fs::read_to_string(self.path(name)).unwrap()
    }

    pub fn run(&self, args: &[&str]) -> Output {
        run_in(self.dir.path(), args)
    }

    /// extract, train, classify and index; returns the training report.
    pub fn pipeline(&self) -> String {
        ok(&self.run(&["extract", "--out", "meta.jsonl"]));
        let train = self.run(&[
            "train",
            "--metadata",
            "meta.jsonl",
            "--labels",
            "labels.tsv",
        ]);
        ok(&train);
        ok(&self.run(&[
            "classify",
            "--metadata",
            "meta.jsonl",
            "--out",
            "classified.jsonl",
        ]));
        ok(&self.run(&["index", "--classified", "classified.jsonl"]));
        String::from_utf8(train.stdout).unwrap()
    }
}

pub fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_figseek"))
        .current_dir(dir)
        .arg("--config")
        .arg(CONFIG)
        .args(args)
        .output()
        .unwrap()
}

pub fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}
