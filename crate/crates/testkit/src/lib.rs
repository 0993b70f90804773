//! Test support: fixture paths, corpus helpers and the `testvm` interpreter.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use bytefix_core::codemodel::decode_code;
use bytefix_core::faultloc::Location;
use bytefix_core::project::ClassSet;

pub mod runner;
pub mod vm;

pub fn fixtures_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn corpus_dir(variant: &str) -> PathBuf {
    fixtures_dir().join("corpus").join("classes").join(variant)
}

pub fn repair_fixture(name: &str) -> PathBuf {
    fixtures_dir().join("repair").join(name)
}

/// Every class file under `dir`, sorted.
pub fn class_files(dir: &Path) -> Vec<PathBuf> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        let Ok(rd) = std::fs::read_dir(&d) else { continue };
        for e in rd.flatten() {
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

/// Every (class, line) that has code, in class then line order.
pub fn all_locations(classes: &ClassSet) -> Vec<Location> {
    let mut out = BTreeSet::new();
    for (name, lc) in &classes.classes {
        let cf = &lc.class;
        for m in &cf.methods {
            let Some(code) = m.code() else { continue };
            let Ok(body) = decode_code(code, &cf.pool) else { continue };
            for line in body.line_map().into_iter().flatten() {
                out.insert(Location { class: name.clone(), line });
            }
        }
    }
    out.into_iter().collect()
}

/// Locates a JVM: `BYTEFIX_JAVA`, then `JAVA_HOME`, then the bundled tool location.
pub fn find_java() -> Option<PathBuf> {
    let mut cands = Vec::new();
    if let Some(p) = std::env::var_os("BYTEFIX_JAVA") {
        cands.push(PathBuf::from(p));
    }
    if let Some(h) = std::env::var_os("JAVA_HOME") {
        cands.push(PathBuf::from(h).join("bin").join("java"));
    }
    cands.push(PathBuf::from("/opt/jtools/jre/bin/java"));
    cands.into_iter().find(|p| p.is_file())
}
