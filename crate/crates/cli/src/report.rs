//! The run report written to `<out>/report.json`.
use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use bytefix_core::faultloc::SuspiciousLocation;
use bytefix_core::validate::TestStatus;
use serde::Serialize;

pub const SCHEMA: u32 = 1;
pub const REPORT_FILE: &str = "report.json";
pub const TOP_LOCATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    BudgetExhausted,
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub status: RunStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub fl_mode: String,
    pub baseline: BTreeMap<String, TestStatus>,
    pub suspicious_locations: Vec<LocationEntry>,
    pub candidates_generated: usize,
    pub candidates_validated: usize,
    pub attempted: Attempted,
    pub patches: Vec<PatchEntry>,
    pub subpatches: Vec<SubpatchEntry>,
    pub timings: Timings,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocationEntry {
    pub class: String,
    pub line: u16,
    pub score: f64,
}

impl LocationEntry {
    pub fn top(locs: &[SuspiciousLocation]) -> Vec<LocationEntry> {
        locs.iter()
            .take(TOP_LOCATIONS)
            .map(|l| LocationEntry { class: l.location.class.clone(), line: l.location.line, score: l.score })
            .collect()
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Attempted {
    /// Template matches that produced no viable mutant.
    pub discarded_matches: usize,
    pub apply_failures: usize,
    /// Composed chains equal, as a set of edits, to one already validated.
    pub duplicates: usize,
    /// Started but cut off when the budget ran out; not counted as validated.
    pub budget_killed: usize,
    pub incorrect: usize,
    pub plausible_subpatch: usize,
    pub plausible: usize,
    pub by_template: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PatchEntry {
    pub rank: usize,
    pub id: usize,
    pub templates: Vec<String>,
    pub locations: Vec<String>,
    pub instruction_delta: usize,
    pub max_score: f64,
    pub chain_depth: usize,
    /// Candidate ids of the steps, root first.
    pub chain: Vec<usize>,
    pub frames_status: String,
    /// Relative to the output directory.
    pub dir: String,
    pub edits: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubpatchEntry {
    pub id: usize,
    pub templates: Vec<String>,
    pub locations: Vec<String>,
    pub instruction_delta: usize,
    pub chain_depth: usize,
    pub frames_status: String,
    /// Tests failing before this step and passing after it.
    pub fixed_tests: Vec<String>,
    pub still_failing: Vec<String>,
    /// A plausible patch was built on top of it.
    pub extended: bool,
    pub dir: String,
    pub edits: Vec<String>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Timings {
    pub baseline_s: f64,
    pub fault_localization_s: f64,
    pub search_s: f64,
    pub total_s: f64,
}

pub fn emit_report(report: &RunReport, output_dir: &Path) -> io::Result<PathBuf> {
    fs::create_dir_all(output_dir)?;
    let path = output_dir.join(REPORT_FILE);
    let mut text = serde_json::to_string_pretty(report).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}
