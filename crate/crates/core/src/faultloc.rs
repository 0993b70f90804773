//! Spectrum-based fault localization over per-test instruction coverage.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::codemodel::{decode_code, Label};
use crate::project::{internal_name, ClassSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Outcome {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CoveredPc {
    pub class: String,
    pub method: String,
    pub descriptor: String,
    pub pc: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestTrace {
    pub test_id: String,
    pub outcome: Outcome,
    pub covered: BTreeSet<CoveredPc>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Location {
    pub class: String,
    pub line: u16,
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.class, self.line)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub e_f: u32,
    pub e_p: u32,
    pub n_f: u32,
    pub n_p: u32,
}

#[derive(Debug, Clone, Default)]
pub struct CoverageMatrix {
    pub tests: Vec<(String, Outcome, BTreeSet<Location>)>,
    pub tallies: BTreeMap<Location, Tally>,
    pub warnings: Vec<String>,
}

/// Instructions of one method that sit on a location's line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MethodSite {
    pub method: String,
    pub descriptor: String,
    #[serde(skip)]
    pub labels: Vec<Label>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuspiciousLocation {
    pub location: Location,
    pub score: f64,
    #[serde(skip)]
    pub sites: Vec<MethodSite>,
}

impl SuspiciousLocation {
    pub fn label_count(&self) -> usize {
        self.sites.iter().map(|s| s.labels.len()).sum()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum FaultLocError {
    #[error("{file}:{line}: malformed trace: {reason}")]
    MalformedTrace { file: PathBuf, line: usize, reason: String },
    #[error("trace references unloaded class {0}")]
    UnknownClass(String),
    #[error("no failing tests in the coverage data")]
    NoFailingTests,
    #[error("cannot resolve location {0}")]
    UnresolvableLocation(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Parses one trace document.
pub fn parse_trace(text: &str, file: &Path) -> Result<TestTrace, FaultLocError> {
    let bad = |line: usize, reason: &str| FaultLocError::MalformedTrace {
        file: file.to_path_buf(),
        line,
        reason: reason.to_string(),
    };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| bad(1, "empty file"))?;
    let parts: Vec<&str> = header.split(' ').collect();
    if parts.len() != 3 || parts[0] != "test" || parts[1].is_empty() {
        return Err(bad(1, "expected `test <id> <PASS|FAIL>`"));
    }
    let outcome = match parts[2] {
        "PASS" => Outcome::Pass,
        "FAIL" => Outcome::Fail,
        _ => return Err(bad(1, "outcome must be PASS or FAIL")),
    };
    let mut covered = BTreeSet::new();
    for (i, l) in lines {
        if l.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = l.split(' ').collect();
        if f.len() != 4 {
            return Err(bad(i + 1, "expected `<class> <method> <descriptor> <pc>`"));
        }
        let pc: u32 = f[3].parse().map_err(|_| bad(i + 1, "pc is not a non-negative integer"))?;
        covered.insert(CoveredPc {
            class: internal_name(f[0]),
            method: f[1].to_string(),
            descriptor: f[2].to_string(),
            pc,
        });
    }
    Ok(TestTrace { test_id: parts[1].to_string(), outcome, covered })
}

/// Reads every trace file; files are processed in name order.
pub fn ingest_traces(paths: &[PathBuf]) -> Result<Vec<TestTrace>, FaultLocError> {
    let mut paths = paths.to_vec();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(|source| FaultLocError::Io { path: p.clone(), source })?;
            parse_trace(&text, p)
        })
        .collect()
}

/// All regular files in a trace directory.
pub fn trace_files(dir: &Path) -> Result<Vec<PathBuf>, FaultLocError> {
    let io = |source| FaultLocError::Io { path: dir.to_path_buf(), source };
    let mut out = Vec::new();
    for e in fs::read_dir(dir).map_err(io)? {
        let p = e.map_err(io)?.path();
        if p.is_file() {
            out.push(p);
        }
    }
    out.sort();
    Ok(out)
}

type PcLines = HashMap<(String, String), HashMap<u32, Option<u16>>>;

fn pc_lines(classes: &ClassSet, class: &str) -> PcLines {
    let mut out = PcLines::new();
    let Some(cf) = classes.get(class) else { return out };
    for m in &cf.methods {
        let Some(code) = m.code() else { continue };
        let Ok(body) = decode_code(code, &cf.pool) else { continue };
        let map = body.line_map();
        let per: HashMap<u32, Option<u16>> =
            body.instructions.iter().zip(map).map(|(i, l)| (i.label.0, l)).collect();
        out.insert((m.name(&cf.pool).into_owned(), m.descriptor(&cf.pool).into_owned()), per);
    }
    out
}

/// Maps per-test pcs to source lines and counts the spectrum per line.
pub fn lift_to_lines(traces: &[TestTrace], classes: &ClassSet) -> Result<CoverageMatrix, FaultLocError> {
    let mut cache: HashMap<String, PcLines> = HashMap::new();
    let mut m = CoverageMatrix::default();
    for t in traces {
        let mut lines = BTreeSet::new();
        for c in &t.covered {
            if classes.get(&c.class).is_none() {
                return Err(FaultLocError::UnknownClass(c.class.clone()));
            }
            let per = cache.entry(c.class.clone()).or_insert_with(|| pc_lines(classes, &c.class));
            let line = per.get(&(c.method.clone(), c.descriptor.clone())).and_then(|pcs| pcs.get(&c.pc)).copied().flatten();
            if let Some(line) = line {
                lines.insert(Location { class: c.class.clone(), line });
            }
        }
        if lines.is_empty() && !t.covered.is_empty() {
            m.warnings.push(format!("every pc traced by {} is unmapped", t.test_id));
        }
        m.tests.push((t.test_id.clone(), t.outcome, lines));
    }
    let total_f = m.tests.iter().filter(|t| t.1 == Outcome::Fail).count() as u32;
    let total_p = m.tests.len() as u32 - total_f;
    let mut ef: BTreeMap<Location, (u32, u32)> = BTreeMap::new();
    for (_, o, lines) in &m.tests {
        for l in lines {
            let e = ef.entry(l.clone()).or_default();
            match o {
                Outcome::Fail => e.0 += 1,
                Outcome::Pass => e.1 += 1,
            }
        }
    }
    m.tallies = ef
        .into_iter()
        .map(|(l, (f, p))| (l, Tally { e_f: f, e_p: p, n_f: total_f - f, n_p: total_p - p }))
        .collect();
    Ok(m)
}

pub fn ochiai_score(e_f: u32, n_f: u32, e_p: u32) -> f64 {
    let denom = (f64::from(e_f + n_f) * f64::from(e_f + e_p)).sqrt();
    if denom == 0.0 {
        0.0
    } else {
        f64::from(e_f) / denom
    }
}

/// Instruction labels for a location across every method of its class.
pub fn resolve_sites(classes: &ClassSet, loc: &Location) -> Vec<MethodSite> {
    let Some(cf) = classes.get(&loc.class) else { return Vec::new() };
    let mut out = Vec::new();
    for m in &cf.methods {
        let Some(code) = m.code() else { continue };
        let Ok(body) = decode_code(code, &cf.pool) else { continue };
        let labels = body.offsets_for_line(loc.line);
        if !labels.is_empty() {
            out.push(MethodSite {
                method: m.name(&cf.pool).into_owned(),
                descriptor: m.descriptor(&cf.pool).into_owned(),
                labels,
            });
        }
    }
    out
}

/// Lines with a positive score, most suspicious first.
pub fn rank_locations(matrix: &CoverageMatrix, classes: &ClassSet) -> Result<Vec<SuspiciousLocation>, FaultLocError> {
    if !matrix.tests.iter().any(|t| t.1 == Outcome::Fail) {
        return Err(FaultLocError::NoFailingTests);
    }
    let mut out: Vec<SuspiciousLocation> = matrix
        .tallies
        .iter()
        .map(|(l, t)| (l, ochiai_score(t.e_f, t.n_f, t.e_p)))
        .filter(|(_, s)| *s > 0.0)
        .map(|(l, score)| SuspiciousLocation { location: l.clone(), score, sites: resolve_sites(classes, l) })
        .collect();
    out.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.location.cmp(&b.location)));
    Ok(out)
}

pub fn parse_location(entry: &str) -> Result<Location, FaultLocError> {
    let bad = || FaultLocError::UnresolvableLocation(entry.to_string());
    let (class, line) = entry.trim().rsplit_once(':').ok_or_else(bad)?;
    let line: u16 = line.trim().parse().map_err(|_| bad())?;
    if class.is_empty() {
        return Err(bad());
    }
    Ok(Location { class: internal_name(class.trim()), line })
}

/// Locations supplied directly, in the given order, each scored 1.0.
pub fn perfect_locations(entries: &[String], classes: &ClassSet) -> Result<Vec<SuspiciousLocation>, FaultLocError> {
    entries
        .iter()
        .filter(|e| !e.trim().is_empty() && !e.trim_start().starts_with('#'))
        .map(|e| {
            let location = parse_location(e)?;
            if classes.get(&location.class).is_none() {
                return Err(FaultLocError::UnresolvableLocation(format!("{e} (class not loaded)")));
            }
            let sites = resolve_sites(classes, &location);
            if sites.is_empty() {
                return Err(FaultLocError::UnresolvableLocation(format!("{e} (no instructions on that line)")));
            }
            Ok(SuspiciousLocation { location, score: 1.0, sites })
        })
        .collect()
}

pub fn read_locations_file(path: &Path) -> Result<Vec<String>, FaultLocError> {
    let text = fs::read_to_string(path).map_err(|source| FaultLocError::Io { path: path.to_path_buf(), source })?;
    Ok(text.lines().map(str::to_string).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ochiai_points() {
        assert_eq!(ochiai_score(0, 3, 4), 0.0);
        assert_eq!(ochiai_score(1, 0, 0), 1.0);
        assert!((ochiai_score(3, 1, 2) - 0.670_820_393_249_936_9).abs() < 1e-12);
        assert_eq!(ochiai_score(0, 0, 0), 0.0);
    }

    #[test]
    fn trace_header_vocabulary() {
        let p = Path::new("t.trace");
        let t = parse_trace("test com.A#t1 FAIL\ncom.A run ()V 0\ncom.A run ()V 3\ncom.A run ()V 3\n", p).unwrap();
        assert_eq!(t.outcome, Outcome::Fail);
        assert_eq!(t.covered.len(), 2);
        assert_eq!(t.covered.iter().next().unwrap().class, "com/A");
        let empty = parse_trace("test x PASS\n", p).unwrap();
        assert!(empty.covered.is_empty());
        assert!(matches!(parse_trace("test x MAYBE\n", p), Err(FaultLocError::MalformedTrace { line: 1, .. })));
        assert!(matches!(
            parse_trace("test x PASS\ncom.A run ()V -4\n", p),
            Err(FaultLocError::MalformedTrace { line: 2, .. })
        ));
    }

    #[test]
    fn location_entries() {
        assert_eq!(parse_location("com.x.A:42").unwrap(), Location { class: "com/x/A".into(), line: 42 });
        assert!(parse_location("nope").is_err());
    }
}
