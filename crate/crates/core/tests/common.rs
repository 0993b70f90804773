#![allow(dead_code)]
use std::path::{Path, PathBuf};

pub fn corpus(variant: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../testkit/fixtures/corpus/classes").join(variant)
}

pub fn class_files(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap().flatten() {
            let p = e.path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|x| x == "class") {
                out.push(p);
            }
        }
    }
    out.sort();
    out
}

pub fn corpus_bytes() -> Vec<(PathBuf, Vec<u8>)> {
    ["janino", "asm52"]
        .iter()
        .flat_map(|v| class_files(&corpus(v)))
        .map(|p| {
            let b = std::fs::read(&p).unwrap();
            (p, b)
        })
        .collect()
}
