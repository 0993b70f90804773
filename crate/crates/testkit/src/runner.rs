//! Suite execution on `testvm`: one fresh interpreter per test.

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use bytefix_core::project::ClassSet;

use crate::vm::{Thrown, Value, Vm};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteEntry {
    pub id: String,
    pub class: String,
    pub method: String,
}

/// Lines of `<test_id> <class> <method>`; `#` starts a comment.
pub fn parse_suite(text: &str) -> Result<Vec<SuiteEntry>, String> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(format!("line {}: expected `<test_id> <class> <method>`", n + 1));
        }
        out.push(SuiteEntry { id: f[0].into(), class: f[1].replace('.', "/"), method: f[2].into() });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Error,
    Timeout,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Error => "ERROR",
            Verdict::Timeout => "TIMEOUT",
        }
    }
}

#[derive(Debug, Clone)]
pub struct TestRun {
    pub verdict: Verdict,
    pub detail: String,
    pub coverage: BTreeSet<(String, String, String, u32)>,
}

/// Runs one `static boolean test()` method. Returns true: PASS; false or an uncaught
/// exception: FAIL; an unmodelled operation: ERROR; the step limit: TIMEOUT.
pub fn run_test(classes: Arc<ClassSet>, traced: Arc<HashSet<String>>, e: &SuiteEntry, step_limit: u64) -> TestRun {
    let e = e.clone();
    let work = move || {
        let mut vm = Vm::new((*classes).clone(), (*traced).clone());
        vm.step_limit = step_limit;
        let r = vm.invoke_static(&e.class, &e.method, "()Z", Vec::new());
        let (verdict, detail) = match r {
            Ok(Some(Value::Int(1))) => (Verdict::Pass, String::new()),
            Ok(v) => (Verdict::Fail, format!("returned {v:?}")),
            Err(Thrown::Exception(x)) => (Verdict::Fail, format!("threw {}", vm.class_of(x))),
            Err(Thrown::Fault(m)) => (Verdict::Error, m),
            Err(Thrown::StepLimit) => (Verdict::Timeout, format!("exceeded {step_limit} steps")),
        };
        TestRun { verdict, detail, coverage: std::mem::take(&mut vm.coverage) }
    };
    match std::thread::Builder::new().stack_size(256 << 20).spawn(work) {
        Ok(h) => h.join().unwrap_or_else(|_| TestRun {
            verdict: Verdict::Error,
            detail: "interpreter panicked".into(),
            coverage: BTreeSet::new(),
        }),
        Err(err) => TestRun { verdict: Verdict::Error, detail: err.to_string(), coverage: BTreeSet::new() },
    }
}

/// Trace document for fault localization: header plus one covered pc per line.
pub fn trace_text(id: &str, run: &TestRun) -> String {
    let outcome = if run.verdict == Verdict::Pass { "PASS" } else { "FAIL" };
    let mut s = format!("test {id} {outcome}\n");
    for (c, m, d, pc) in &run.coverage {
        let _ = writeln!(s, "{c} {m} {d} {pc}");
    }
    s
}

/// Loads program and test classes together; only program classes are traced.
pub fn load_classes(program: &Path, tests: &Path) -> Result<(ClassSet, HashSet<String>), String> {
    let mut set = ClassSet::load_dir(program).map_err(|e| e.to_string())?;
    let traced: HashSet<String> = set.classes.keys().cloned().collect();
    let t = ClassSet::load_dir(tests).map_err(|e| e.to_string())?;
    for (k, v) in t.classes {
        set.classes.entry(k).or_insert(v);
    }
    Ok((set, traced))
}

pub fn write_file(path: &Path, text: &str) -> Result<(), String> {
    if let Some(p) = path.parent() {
        fs::create_dir_all(p).map_err(|e| format!("{}: {e}", p.display()))?;
    }
    fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}
