//! The repair pipeline: baseline, fault localization, candidate search, ranking, output.
use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use bytefix_core::codemodel::frames::FrameStatus;
use bytefix_core::faultloc::{
    ingest_traces, lift_to_lines, perfect_locations, rank_locations, read_locations_file, trace_files, FaultLocError,
    SuspiciousLocation,
};
use bytefix_core::patch::{
    apply_patch, compose_subpatch, enumerate_candidates, rank_patches, write_classes, CandidateStream, Classification,
    Patch, PatchError, RankedSite,
};
use bytefix_core::project::{ClassSet, LoadError};
use bytefix_core::validate::{classify_outcome, Budget, Runner, TestReport, ValidateError};
use log::{info, warn};

use crate::config::{ConfigError, FlMode, RepairConfig};
use crate::report::{
    emit_report, Attempted, LocationEntry, PatchEntry, RunReport, RunStatus, SubpatchEntry, Timings, SCHEMA,
};

pub const EXIT_PATCHED: i32 = 0;
pub const EXIT_NO_PATCH: i32 = 2;
pub const EXIT_ERROR: i32 = 3;

const WORK_DIR: &str = ".work";

#[derive(Debug, thiserror::Error)]
pub enum RepairError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("loading classes: {0}")]
    Load(#[from] LoadError),
    #[error("no class files under {0}")]
    NoClasses(PathBuf),
    #[error("fault localization: {0}")]
    FaultLoc(#[from] FaultLocError),
    #[error("validation: {0}")]
    Validate(#[from] ValidateError),
    #[error(transparent)]
    Patch(#[from] PatchError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> RepairError + '_ {
    move |source| RepairError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    pub report_path: PathBuf,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.patches.is_empty() {
            EXIT_NO_PATCH
        } else {
            EXIT_PATCHED
        }
    }
}

pub fn load_classes(cfg: &RepairConfig) -> Result<ClassSet, RepairError> {
    let classes = ClassSet::load_dir(&cfg.classes_dir)?;
    if classes.is_empty() {
        return Err(RepairError::NoClasses(cfg.classes_dir.clone()));
    }
    Ok(classes)
}

/// Suspicious locations for the configured mode, most suspicious first.
pub fn localize(cfg: &RepairConfig, classes: &ClassSet) -> Result<Vec<SuspiciousLocation>, FaultLocError> {
    match cfg.fl_mode {
        FlMode::Perfect => {
            let path = cfg.perfect_locations_file.as_deref().expect("checked by config");
            perfect_locations(&read_locations_file(path)?, classes)
        }
        FlMode::Spectrum => {
            let dir = cfg.traces_dir.as_deref().expect("checked by config");
            let traces = ingest_traces(&trace_files(dir)?)?;
            let matrix = lift_to_lines(&traces, classes)?;
            for w in &matrix.warnings {
                warn!("{w}");
            }
            rank_locations(&matrix, classes)
        }
    }
}

fn cleanup_output(out: &Path) -> Result<(), RepairError> {
    let Ok(entries) = fs::read_dir(out) else { return Ok(()) };
    for e in entries.flatten() {
        let name = e.file_name().to_string_lossy().into_owned();
        let p = e.path();
        if name == WORK_DIR || ((name.starts_with("patch-") || name.starts_with("subpatch-")) && p.is_dir()) {
            fs::remove_dir_all(&p).map_err(io_err(&p))?;
        }
    }
    Ok(())
}

fn secs(d: std::time::Duration) -> f64 {
    (d.as_secs_f64() * 1000.0).round() / 1000.0
}

pub fn orchestrate_repair(cfg: &RepairConfig) -> Result<RunOutcome, RepairError> {
    let started = Instant::now();
    let budget = Budget::new(cfg.budget, cfg.per_test_timeout);
    let mut report = RunReport {
        schema: SCHEMA,
        status: RunStatus::Completed,
        error: None,
        fl_mode: cfg.fl_mode.as_str().to_string(),
        baseline: BTreeMap::new(),
        suspicious_locations: Vec::new(),
        candidates_generated: 0,
        candidates_validated: 0,
        attempted: Attempted::default(),
        patches: Vec::new(),
        subpatches: Vec::new(),
        timings: Timings::default(),
    };
    let classes = Arc::new(load_classes(cfg)?);
    cleanup_output(&cfg.output_dir)?;
    let work = cfg.output_dir.join(WORK_DIR);
    let runner = Runner {
        command: cfg.test_command.clone(),
        pov_tests: cfg.pov_tests.clone(),
        work_dir: work.join("runs"),
        cwd: Some(cfg.base_dir.clone()),
    };

    let result = pipeline(cfg, &classes, &runner, &budget, &work, &mut report);
    report.timings.total_s = secs(started.elapsed());
    let _ = fs::remove_dir_all(&work);
    match result {
        Ok(()) => {
            let report_path = emit_report(&report, &cfg.output_dir).map_err(io_err(&cfg.output_dir))?;
            Ok(RunOutcome { report, report_path })
        }
        Err(e) => {
            report.status = RunStatus::Error;
            report.error = Some(e.to_string());
            if let Err(w) = emit_report(&report, &cfg.output_dir) {
                warn!("could not write partial report: {w}");
            }
            Err(e)
        }
    }
}

fn pipeline(
    cfg: &RepairConfig,
    classes: &Arc<ClassSet>,
    runner: &Runner,
    budget: &Budget,
    work: &Path,
    report: &mut RunReport,
) -> Result<(), RepairError> {
    let t = Instant::now();
    let baseline = match runner.baseline_run(&cfg.classes_dir, budget) {
        Ok(b) => b,
        Err(ValidateError::BudgetExhausted) => {
            report.status = RunStatus::BudgetExhausted;
            return Ok(());
        }
        Err(e) => return Err(e.into()),
    };
    report.baseline = baseline.results.clone();
    report.timings.baseline_s = secs(t.elapsed());
    info!("baseline: {} tests, {} failing", baseline.results.len(), baseline.results.values().filter(|s| !s.passed()).count());

    let t = Instant::now();
    let locations = localize(cfg, classes)?;
    report.suspicious_locations = LocationEntry::top(&locations);
    report.timings.fault_localization_s = secs(t.elapsed());
    info!("{} suspicious locations", locations.len());

    let t = Instant::now();
    let sites: Vec<RankedSite> =
        locations.iter().map(|l| RankedSite { location: l.location.clone(), score: l.score }).collect();
    let mut search = Search {
        cfg,
        base: classes.clone(),
        runner,
        budget,
        work,
        sites: sites.clone(),
        next_id: 1,
        seen: HashSet::new(),
        exhausted: false,
        plausible: Vec::new(),
        frames: BTreeMap::new(),
        report,
    };
    let stream = enumerate_candidates(classes.clone(), sites, cfg.max_donors);
    let outcome = search.explore(stream, &baseline, 1);
    let exhausted = search.exhausted;
    let plausible = std::mem::take(&mut search.plausible);
    let frames = std::mem::take(&mut search.frames);
    outcome?;
    if exhausted {
        report.status = RunStatus::BudgetExhausted;
    }
    report.timings.search_s = secs(t.elapsed());

    for (i, p) in rank_patches(plausible).into_iter().enumerate() {
        let rank = i + 1;
        let dir = format!("patch-{rank}");
        let patched = apply_patch(classes, &p)?;
        write_classes(&cfg.output_dir.join(&dir), &patched.classes, Some(&patched.changed))?;
        report.patches.push(PatchEntry {
            rank,
            id: p.id,
            templates: p.templates().iter().map(|t| t.to_string()).collect(),
            locations: p.locations().iter().map(|l| l.to_string()).collect(),
            instruction_delta: p.instruction_delta(),
            max_score: p.max_score(),
            chain_depth: p.chain_depth(),
            chain: p.chain().iter().map(|s| s.id).collect(),
            frames_status: frames.get(&p.id).map_or(patched.frames, |f| *f).as_str().to_string(),
            dir,
            edits: p.descriptions(),
        });
    }
    Ok(())
}

struct Search<'a> {
    cfg: &'a RepairConfig,
    base: Arc<ClassSet>,
    runner: &'a Runner,
    budget: &'a Budget,
    work: &'a Path,
    sites: Vec<RankedSite>,
    next_id: usize,
    /// Edit sets of composed chains already tried, independent of step order.
    seen: HashSet<Vec<String>>,
    exhausted: bool,
    plausible: Vec<Patch>,
    frames: BTreeMap<usize, FrameStatus>,
    report: &'a mut RunReport,
}

struct Prepared {
    patch: Patch,
    frames: FrameStatus,
    dir: PathBuf,
}

fn edit_set(p: &Patch) -> Vec<String> {
    let mut v: Vec<String> = p.descriptions();
    v.sort();
    v
}

impl Search<'_> {
    /// Validates `stream` against `reference`, the report of its parent (or the baseline).
    /// Sub-patches are extended depth-first as soon as their batch is classified.
    /// Returns whether a plausible patch came out of this stream or below it.
    fn explore(&mut self, mut stream: CandidateStream, reference: &TestReport, depth: usize) -> Result<bool, RepairError> {
        let mut found = false;
        let slots = self.cfg.worker_slots;
        while !self.exhausted && !(found && depth > 1) {
            let batch = self.next_batch(&mut stream, slots)?;
            if batch.is_empty() {
                break;
            }
            let dirs: Vec<PathBuf> = batch.iter().map(|b| b.dir.clone()).collect();
            let results = self.runner.run_batch(&dirs, reference, self.budget, slots);
            let mut subs = Vec::new();
            for (mut item, result) in batch.into_iter().zip(results) {
                let _ = fs::remove_dir_all(&item.dir);
                let run = match result {
                    Ok(r) => r,
                    Err(ValidateError::BudgetExhausted) => {
                        if !self.exhausted {
                            info!("budget exhausted after {} validations", self.report.candidates_validated);
                        }
                        self.exhausted = true;
                        self.report.attempted.budget_killed += 1;
                        continue;
                    }
                    Err(e) => return Err(e.into()),
                };
                let class = classify_outcome(reference, &run)?;
                item.patch.classify(class)?;
                self.report.candidates_validated += 1;
                let template = item.patch.mutants.first().map(|m| m.template.to_string()).unwrap_or_default();
                *self.report.attempted.by_template.entry(template).or_default() += 1;
                match class {
                    Classification::Plausible => {
                        self.report.attempted.plausible += 1;
                        info!("plausible: {}", item.patch.descriptions().join("; "));
                        self.frames.insert(item.patch.id, item.frames);
                        self.plausible.push(item.patch);
                        found = true;
                    }
                    Classification::PlausibleSubpatch => {
                        self.report.attempted.plausible_subpatch += 1;
                        subs.push((item, run));
                    }
                    _ => self.report.attempted.incorrect += 1,
                }
            }
            for (item, run) in subs {
                let entry = self.report.subpatches.len();
                let dir = format!("subpatch-{}", item.patch.id);
                let patched = apply_patch(&self.base, &item.patch)?;
                write_classes(&self.cfg.output_dir.join(&dir), &patched.classes, Some(&patched.changed))?;
                self.report.subpatches.push(SubpatchEntry {
                    id: item.patch.id,
                    templates: item.patch.templates().iter().map(|t| t.to_string()).collect(),
                    locations: item.patch.locations().iter().map(|l| l.to_string()).collect(),
                    instruction_delta: item.patch.instruction_delta(),
                    chain_depth: item.patch.chain_depth(),
                    frames_status: item.frames.as_str().to_string(),
                    fixed_tests: reference
                        .results
                        .iter()
                        .filter(|(id, s)| !s.passed() && run.results[*id].passed())
                        .map(|(id, _)| id.clone())
                        .collect(),
                    still_failing: run.results.iter().filter(|(_, s)| !s.passed()).map(|(id, _)| id.clone()).collect(),
                    extended: false,
                    dir,
                    edits: item.patch.descriptions(),
                });
                if depth >= self.cfg.subpatch_depth || self.exhausted || (found && depth > 1) {
                    continue;
                }
                let sub = Arc::new(item.patch);
                let touched = sub.locations();
                let remaining: Vec<RankedSite> =
                    self.sites.iter().filter(|s| !touched.contains(&s.location)).cloned().collect();
                let child = compose_subpatch(&self.base, sub, remaining, self.cfg.max_donors)?;
                if self.explore(child, &run, depth + 1)? {
                    self.report.subpatches[entry].extended = true;
                    found = true;
                }
            }
        }
        self.report.attempted.discarded_matches += stream.discarded;
        Ok(found)
    }

    fn next_batch(&mut self, stream: &mut CandidateStream, slots: usize) -> Result<Vec<Prepared>, RepairError> {
        let mut batch = Vec::new();
        while batch.len() < slots {
            let Some(mut patch) = stream.next() else { break };
            self.report.candidates_generated += 1;
            patch.id = self.next_id;
            self.next_id += 1;
            if patch.parent.is_some() && !self.seen.insert(edit_set(&patch)) {
                self.report.attempted.duplicates += 1;
                continue;
            }
            let patched = match apply_patch(&self.base, &patch) {
                Ok(p) => p,
                Err(e) => {
                    warn!("candidate {} does not apply: {e}", patch.id);
                    self.report.attempted.apply_failures += 1;
                    continue;
                }
            };
            let dir = self.work.join(format!("cand-{}", patch.id));
            write_classes(&dir, &patched.classes, None)?;
            batch.push(Prepared { patch, frames: patched.frames, dir });
        }
        Ok(batch)
    }
}
