//! Running the test suite through an external command and classifying the results.
//!
//! The command is run with `sh -c` and two environment variables: `REPAIR_CLASSPATH_DIR`
//! (classes under test) and `REPAIR_RESULT_FILE` (where it writes `<test_id> <STATUS>`
//! lines). Its exit status is ignored.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::io;
use std::os::unix::process::CommandExt;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::patch::Classification;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TestStatus {
    Pass,
    Fail,
    Error,
    Timeout,
}

impl TestStatus {
    pub fn parse(s: &str) -> Option<TestStatus> {
        match s {
            "PASS" => Some(TestStatus::Pass),
            "FAIL" => Some(TestStatus::Fail),
            "ERROR" => Some(TestStatus::Error),
            "TIMEOUT" => Some(TestStatus::Timeout),
            _ => None,
        }
    }

    pub fn passed(self) -> bool {
        self == TestStatus::Pass
    }
}

impl fmt::Display for TestStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TestStatus::Pass => "PASS",
            TestStatus::Fail => "FAIL",
            TestStatus::Error => "ERROR",
            TestStatus::Timeout => "TIMEOUT",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport {
    pub results: BTreeMap<String, TestStatus>,
    #[serde(serialize_with = "secs")]
    pub wall: Duration,
    /// Captured stdout and stderr of the command.
    pub output: Option<PathBuf>,
    /// The command was killed at its time limit.
    pub killed: bool,
}

fn secs<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

impl TestReport {
    pub fn from_results(results: impl IntoIterator<Item = (String, TestStatus)>) -> TestReport {
        TestReport { results: results.into_iter().collect(), wall: Duration::ZERO, output: None, killed: false }
    }

    pub fn all_pass(&self) -> bool {
        self.results.values().all(|s| s.passed())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ValidateError {
    #[error("no proof-of-vulnerability test fails on the original classes")]
    NoPoV,
    #[error("test command failed: {0}")]
    CommandFailure(String),
    #[error("time budget exhausted")]
    BudgetExhausted,
    #[error("reports cover different tests: {0}")]
    IncomparableReports(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

/// Wall-clock allowance for one repair run, measured from its creation.
#[derive(Debug, Clone)]
pub struct Budget {
    pub total: Duration,
    pub per_test: Duration,
    start: Instant,
}

impl Budget {
    pub fn new(total: Duration, per_test: Duration) -> Budget {
        Budget { total, per_test, start: Instant::now() }
    }

    pub fn consumed(&self) -> Duration {
        self.start.elapsed()
    }

    pub fn remaining(&self) -> Duration {
        self.total.saturating_sub(self.consumed())
    }

    pub fn exhausted(&self) -> bool {
        self.consumed() >= self.total
    }

    pub fn check(&self) -> Result<(), ValidateError> {
        if self.exhausted() {
            Err(ValidateError::BudgetExhausted)
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone)]
pub struct Runner {
    pub command: String,
    pub pov_tests: Vec<String>,
    /// Directory for result files and output captures.
    pub work_dir: PathBuf,
    /// Directory the command runs in.
    pub cwd: Option<PathBuf>,
}

struct RawRun {
    results: Option<BTreeMap<String, TestStatus>>,
    wall: Duration,
    output: PathBuf,
    killed: bool,
}

static RUN_SEQ: AtomicUsize = AtomicUsize::new(0);

impl Runner {
    fn execute(&self, classes: &Path, limit: Duration) -> Result<RawRun, ValidateError> {
        let n = RUN_SEQ.fetch_add(1, Ordering::Relaxed);
        fs::create_dir_all(&self.work_dir).map_err(|source| ValidateError::Io { path: self.work_dir.clone(), source })?;
        let result = self.work_dir.join(format!("result-{}-{n}.txt", std::process::id()));
        let output = self.work_dir.join(format!("output-{}-{n}.txt", std::process::id()));
        let _ = fs::remove_file(&result);
        let out = fs::File::create(&output).map_err(|source| ValidateError::Io { path: output.clone(), source })?;
        let err = out.try_clone().map_err(|source| ValidateError::Io { path: output.clone(), source })?;
        let mut cmd = Command::new("sh");
        cmd.arg("-c")
            .arg(&self.command)
            .env("REPAIR_CLASSPATH_DIR", absolute(classes))
            .env("REPAIR_RESULT_FILE", &result)
            .stdin(Stdio::null())
            .stdout(out)
            .stderr(err)
            .process_group(0);
        if let Some(d) = &self.cwd {
            cmd.current_dir(d);
        }
        let start = Instant::now();
        let mut child = cmd.spawn().map_err(|e| ValidateError::CommandFailure(format!("cannot start sh: {e}")))?;
        let pid = child.id() as i32;
        let mut killed = false;
        loop {
            match child.try_wait() {
                Ok(Some(_)) => break,
                Ok(None) => {}
                Err(e) => return Err(ValidateError::CommandFailure(e.to_string())),
            }
            if start.elapsed() >= limit {
                // SAFETY: signalling the process group we created for the child.
                unsafe {
                    libc::kill(-pid, libc::SIGKILL);
                }
                let _ = child.wait();
                killed = true;
                break;
            }
            std::thread::sleep(Duration::from_millis(5));
        }
        let wall = start.elapsed();
        let results = match fs::read_to_string(&result) {
            Ok(text) => Some(parse_results(&text)?),
            Err(e) if e.kind() == io::ErrorKind::NotFound => None,
            Err(source) => return Err(ValidateError::Io { path: result, source }),
        };
        let _ = fs::remove_file(&result);
        Ok(RawRun { results, wall, output, killed })
    }

    /// Runs the suite on the original classes; at least one PoV must not pass.
    pub fn baseline_run(&self, classes: &Path, budget: &Budget) -> Result<TestReport, ValidateError> {
        budget.check()?;
        let raw = self.execute(classes, budget.remaining())?;
        let Some(results) = raw.results else {
            let why = if raw.killed { "timed out" } else { "exited without writing the result file" };
            return Err(ValidateError::CommandFailure(why.into()));
        };
        if results.is_empty() {
            return Err(ValidateError::CommandFailure("result file lists no tests".into()));
        }
        for p in &self.pov_tests {
            if !results.contains_key(p) {
                return Err(ValidateError::CommandFailure(format!("PoV test {p} missing from results")));
            }
        }
        let report = TestReport { results, wall: raw.wall, output: Some(raw.output), killed: raw.killed };
        if !self.pov_tests.iter().any(|p| !report.results[p].passed()) {
            return Err(ValidateError::NoPoV);
        }
        Ok(report)
    }

    /// Runs the suite on patched classes. Tests the command never reported count as
    /// TIMEOUT when the command was killed and ERROR otherwise.
    pub fn run_candidate(&self, classes: &Path, baseline: &TestReport, budget: &Budget) -> Result<TestReport, ValidateError> {
        budget.check()?;
        let per_suite = budget.per_test.saturating_mul(baseline.results.len().max(1) as u32);
        let limit = per_suite.min(budget.remaining());
        let raw = self.execute(classes, limit)?;
        if raw.killed && budget.exhausted() {
            return Err(ValidateError::BudgetExhausted);
        }
        let mut results = raw.results.unwrap_or_default();
        let missing = if raw.killed { TestStatus::Timeout } else { TestStatus::Error };
        for id in baseline.results.keys() {
            results.entry(id.clone()).or_insert(missing);
        }
        Ok(TestReport { results, wall: raw.wall, output: Some(raw.output), killed: raw.killed })
    }

    /// Validates several candidates with up to `slots` running at once; results keep input order.
    pub fn run_batch(
        &self,
        dirs: &[PathBuf],
        baseline: &TestReport,
        budget: &Budget,
        slots: usize,
    ) -> Vec<Result<TestReport, ValidateError>> {
        let next = AtomicUsize::new(0);
        let mut out: Vec<Option<Result<TestReport, ValidateError>>> = (0..dirs.len()).map(|_| None).collect();
        let cells: Vec<std::sync::Mutex<&mut Option<Result<TestReport, ValidateError>>>> =
            out.iter_mut().map(std::sync::Mutex::new).collect();
        std::thread::scope(|s| {
            for _ in 0..slots.max(1).min(dirs.len().max(1)) {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    if i >= dirs.len() {
                        break;
                    }
                    let r = self.run_candidate(&dirs[i], baseline, budget);
                    **cells[i].lock().expect("one writer per cell") = Some(r);
                });
            }
        });
        drop(cells);
        out.into_iter().map(|r| r.unwrap_or(Err(ValidateError::BudgetExhausted))).collect()
    }
}

fn absolute(p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        std::env::current_dir().map(|d| d.join(p)).unwrap_or_else(|_| p.to_path_buf())
    }
}

pub fn parse_results(text: &str) -> Result<BTreeMap<String, TestStatus>, ValidateError> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let bad = || ValidateError::CommandFailure(format!("result line {}: {line:?}", i + 1));
        let (id, status) = line.rsplit_once(char::is_whitespace).ok_or_else(bad)?;
        let status = TestStatus::parse(status.trim()).ok_or_else(bad)?;
        out.insert(id.trim().to_string(), status);
    }
    Ok(out)
}

/// Compares a candidate run with the baseline.
pub fn classify_outcome(baseline: &TestReport, candidate: &TestReport) -> Result<Classification, ValidateError> {
    let a: BTreeSet<&String> = baseline.results.keys().collect();
    let b: BTreeSet<&String> = candidate.results.keys().collect();
    if a != b {
        let diff: Vec<&str> = a.symmetric_difference(&b).map(|s| s.as_str()).take(5).collect();
        return Err(ValidateError::IncomparableReports(diff.join(", ")));
    }
    if candidate.all_pass() {
        return Ok(Classification::Plausible);
    }
    let mut fixed = false;
    for (id, before) in &baseline.results {
        let after = candidate.results[id];
        if before.passed() && !after.passed() {
            return Ok(Classification::Incorrect);
        }
        if !before.passed() && after.passed() {
            fixed = true;
        }
    }
    Ok(if fixed { Classification::PlausibleSubpatch } else { Classification::Incorrect })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(items: &[(&str, TestStatus)]) -> TestReport {
        TestReport::from_results(items.iter().map(|(i, s)| (i.to_string(), *s)))
    }

    #[test]
    fn outcome_classes() {
        use TestStatus::*;
        let base = report(&[("t1", Pass), ("pov", Fail)]);
        assert_eq!(classify_outcome(&base, &report(&[("t1", Pass), ("pov", Pass)])).unwrap(), Classification::Plausible);
        assert_eq!(classify_outcome(&base, &report(&[("t1", Fail), ("pov", Pass)])).unwrap(), Classification::Incorrect);
        let base2 = report(&[("pov1", Fail), ("pov2", Fail), ("t1", Pass)]);
        let sub = report(&[("pov1", Pass), ("pov2", Fail), ("t1", Pass)]);
        assert_eq!(classify_outcome(&base2, &sub).unwrap(), Classification::PlausibleSubpatch);
        let timeout = report(&[("pov1", Pass), ("pov2", Timeout), ("t1", Error)]);
        assert_eq!(classify_outcome(&base2, &timeout).unwrap(), Classification::Incorrect);
        assert!(matches!(
            classify_outcome(&base, &report(&[("t1", Pass)])),
            Err(ValidateError::IncomparableReports(_))
        ));
    }

    #[test]
    fn result_lines() {
        let r = parse_results("a PASS\n\nb FAIL\nc TIMEOUT\n").unwrap();
        assert_eq!(r.len(), 3);
        assert!(parse_results("a MAYBE").is_err());
    }
}
