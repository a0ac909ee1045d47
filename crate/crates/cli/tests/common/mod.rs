#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ubi_core::ingest::{load_inputs, InputPaths};
use ubi_core::Dataset;

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/two_country")
}

pub fn constrained_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/constrained")
}

pub fn load_dir(dir: &Path) -> Dataset {
    load_inputs(&InputPaths::in_dir(dir)).expect("fixture loads")
}

pub fn fixture() -> Dataset {
    load_dir(&fixture_dir())
}

pub fn ubi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ubi"))
        .args(args)
        .env_remove("SOURCE_DATE_EPOCH")
        .output()
        .expect("binary runs")
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

/// All files in `dir`, sorted by name, with their bytes.
pub fn dir_contents(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .expect("readable dir")
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    out.sort();
    out
}
