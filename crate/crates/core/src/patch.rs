//! Candidate patches: enumeration, application to class files, ranking.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::fs;
use std::io;
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use crate::classfile::{emit_class, validate_structure, ClassError, ClassFile, Constant, ACC_ABSTRACT};
use crate::codemodel::{
    apply_edits, encode_code, expand_long_branches, intern_symbols, opcodes, recompute_max_stack, refresh_frames, CodeError,
    Edit, EditError, FrameStatus, MethodContext,
};
use crate::donor::collect_donors;
use crate::faultloc::{resolve_sites, Location};
use crate::hierarchy::ClassHierarchy;
use crate::project::{ClassSet, LoadedClass};
use crate::templates::{mutants_for_site, MethodKey, MethodView, Mutant, Site, TemplateId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Classification {
    Unvalidated,
    Incorrect,
    PlausibleSubpatch,
    Plausible,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Unvalidated => "UNVALIDATED",
            Classification::Incorrect => "INCORRECT",
            Classification::PlausibleSubpatch => "PLAUSIBLE_SUBPATCH",
            Classification::Plausible => "PLAUSIBLE",
        })
    }
}

/// One step of a patch chain. Mutants of a child apply to the output of its parent.
#[derive(Debug, Clone)]
pub struct Patch {
    /// Generation order, used as the final ranking tie-break.
    pub id: usize,
    pub mutants: Vec<Mutant>,
    pub parent: Option<Arc<Patch>>,
    /// Suspiciousness of each location this step touches.
    pub scores: Vec<(Location, f64)>,
    pub classification: Classification,
}

impl Patch {
    pub fn new(id: usize, mutants: Vec<Mutant>, scores: Vec<(Location, f64)>, parent: Option<Arc<Patch>>) -> Patch {
        Patch { id, mutants, parent, scores, classification: Classification::Unvalidated }
    }

    /// Root first.
    pub fn chain(&self) -> Vec<&Patch> {
        let mut v = vec![self];
        let mut p = self.parent.as_deref();
        while let Some(q) = p {
            v.push(q);
            p = q.parent.as_deref();
        }
        v.reverse();
        v
    }

    pub fn chain_depth(&self) -> usize {
        self.chain().len()
    }

    pub fn templates(&self) -> Vec<TemplateId> {
        self.chain().iter().flat_map(|p| p.mutants.iter().map(|m| m.template)).collect()
    }

    pub fn locations(&self) -> BTreeSet<Location> {
        self.chain().iter().flat_map(|p| p.scores.iter().map(|s| s.0.clone())).collect()
    }

    pub fn instruction_delta(&self) -> usize {
        self.chain().iter().flat_map(|p| p.mutants.iter()).map(|m| m.instruction_delta).sum()
    }

    pub fn max_score(&self) -> f64 {
        self.chain().iter().flat_map(|p| p.scores.iter().map(|s| s.1)).fold(0.0, f64::max)
    }

    pub fn descriptions(&self) -> Vec<String> {
        self.chain()
            .iter()
            .flat_map(|p| p.mutants.iter())
            .map(|m| format!("{} {} at {}: {}", m.template, m.method, m.location, m.description))
            .collect()
    }

    pub fn rank_key(&self) -> RankKey {
        RankKey { locations: self.locations().len(), delta: self.instruction_delta(), max_score: self.max_score(), order: self.id }
    }

    /// Records the validation verdict; a patch is classified once.
    pub fn classify(&mut self, c: Classification) -> Result<(), PatchError> {
        if self.classification != Classification::Unvalidated || c == Classification::Unvalidated {
            return Err(PatchError::Reclassified { from: self.classification, to: c });
        }
        self.classification = c;
        Ok(())
    }
}

/// Ordering data for one plausible patch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankKey {
    pub locations: usize,
    pub delta: usize,
    pub max_score: f64,
    pub order: usize,
}

/// Indices of `keys` in rank order: fewer locations, then smaller delta, then higher score, then earlier.
pub fn rank_order(keys: &[RankKey]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|&a, &b| {
        let (x, y) = (&keys[a], &keys[b]);
        x.locations
            .cmp(&y.locations)
            .then(x.delta.cmp(&y.delta))
            .then(y.max_score.total_cmp(&x.max_score))
            .then(x.order.cmp(&y.order))
    });
    idx
}

pub fn rank_patches(plausible: Vec<Patch>) -> Vec<Patch> {
    let keys: Vec<RankKey> = plausible.iter().map(Patch::rank_key).collect();
    let order = rank_order(&keys);
    let mut slots: Vec<Option<Patch>> = plausible.into_iter().map(Some).collect();
    order.into_iter().map(|i| slots[i].take().expect("each index once")).collect()
}

#[derive(Debug, thiserror::Error)]
pub enum PatchError {
    #[error("mutants overlap in {method}: {source}")]
    ApplyConflict { method: String, source: EditError },
    #[error("patched {class} fails structural checks: {faults}")]
    StructuralRegression { class: String, faults: String },
    #[error("{method}: {source}")]
    Code { method: String, source: CodeError },
    #[error("{0}: method not found")]
    UnknownMethod(String),
    #[error("{class}: {source}")]
    Class { class: String, source: ClassError },
    #[error("cannot reclassify a {from} patch as {to}")]
    Reclassified { from: Classification, to: Classification },
    #[error("writing {path}: {source}")]
    Io { path: String, source: io::Error },
}

/// Classes after a patch, and which of them changed.
#[derive(Debug, Clone)]
pub struct PatchedClasses {
    pub classes: ClassSet,
    pub changed: BTreeSet<String>,
    pub frames: FrameStatus,
}

fn frame_rank(s: FrameStatus) -> u8 {
    match s {
        FrameStatus::NotRequired => 0,
        FrameStatus::Preserved => 1,
        FrameStatus::Regenerated => 2,
        FrameStatus::Downgraded => 3,
    }
}

/// Applies a patch chain to `base`. Parents are applied first and every step reparses
/// its input, so child labels refer to the parent's output.
pub fn apply_patch(base: &ClassSet, p: &Patch) -> Result<PatchedClasses, PatchError> {
    let mut classes = base.clone();
    let mut changed = BTreeSet::new();
    let mut frames = FrameStatus::Preserved;
    for step in p.chain() {
        let (out, ch, f) = apply_step(&classes, &step.mutants)?;
        classes = out;
        changed.extend(ch);
        if frame_rank(f) > frame_rank(frames) {
            frames = f;
        }
    }
    Ok(PatchedClasses { classes, changed, frames })
}

fn apply_step(base: &ClassSet, mutants: &[Mutant]) -> Result<(ClassSet, BTreeSet<String>, FrameStatus), PatchError> {
    let mut by_method: BTreeMap<&MethodKey, Vec<Edit>> = BTreeMap::new();
    for m in mutants {
        by_method.entry(&m.method).or_default().extend(m.edits.iter().cloned());
    }
    let mut by_class: BTreeMap<&str, Vec<(&MethodKey, Vec<Edit>)>> = BTreeMap::new();
    for (k, e) in by_method {
        by_class.entry(k.class.as_str()).or_default().push((k, e));
    }
    let hierarchy = base.hierarchy();
    let mut out = base.clone();
    let mut changed = BTreeSet::new();
    let mut worst = FrameStatus::Preserved;
    for (class, methods) in by_class {
        let loaded = base.classes.get(class).ok_or_else(|| PatchError::UnknownMethod(class.to_string()))?;
        let (cf, status) = patch_class(&loaded.class, &methods, &hierarchy)?;
        let bytes = emit_class(&cf).map_err(|source| PatchError::Class { class: class.to_string(), source })?;
        let reparsed =
            crate::classfile::parse_class(&bytes).map_err(|source| PatchError::Class { class: class.to_string(), source })?;
        let faults = validate_structure(&reparsed);
        if !faults.is_empty() {
            let faults = faults.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ");
            return Err(PatchError::StructuralRegression { class: class.to_string(), faults });
        }
        if frame_rank(status) > frame_rank(worst) {
            worst = status;
        }
        out.classes.insert(class.to_string(), Arc::new(LoadedClass { rel_path: loaded.rel_path.clone(), bytes, class: reparsed }));
        changed.insert(class.to_string());
    }
    Ok((out, changed, worst))
}

fn patch_class(
    original: &ClassFile,
    methods: &[(&MethodKey, Vec<Edit>)],
    hierarchy: &ClassHierarchy,
) -> Result<(ClassFile, FrameStatus), PatchError> {
    let mut cf = original.clone();
    let mut worst = FrameStatus::Preserved;
    for (key, edits) in methods {
        let name = key.to_string();
        let code_err = |source| PatchError::Code { method: name.clone(), source };
        let mi = cf.find_method(&key.name, &key.descriptor).ok_or_else(|| PatchError::UnknownMethod(name.clone()))?;
        let is_static = cf.methods[mi].is_static();
        let code = cf.methods[mi].code().ok_or_else(|| PatchError::UnknownMethod(name.clone()))?.clone();
        let body = crate::codemodel::decode_code(&code, &cf.pool).map_err(code_err)?;
        let mut body = apply_edits(&body, edits).map_err(|source| PatchError::ApplyConflict { method: name.clone(), source })?;
        body.max_locals = body.required_max_locals();
        intern_symbols(&mut body, &mut cf.pool).map_err(code_err)?;
        expand_long_branches(&mut body).map_err(code_err)?;
        body.max_stack = recompute_max_stack(&body, &cf.pool).map_err(code_err)?;
        let ctx = MethodContext {
            class_name: &key.class,
            method_name: &key.name,
            descriptor: &key.descriptor,
            is_static,
            major_version: cf.major_version,
            hierarchy,
        };
        let status = refresh_frames(&mut body, &mut cf.pool, &ctx).map_err(code_err)?;
        body.max_stack = recompute_max_stack(&body, &cf.pool).map_err(code_err)?;
        let attr = encode_code(&body, &mut cf.pool).map_err(code_err)?;
        let slot = cf.methods[mi].code_mut().expect("checked above");
        *slot = attr;
        if frame_rank(status) > frame_rank(worst) {
            worst = status;
        }
    }
    if worst == FrameStatus::Downgraded {
        if !downgrade_eligible(&cf) {
            return Err(PatchError::Code {
                method: cf.name().into_owned(),
                source: CodeError::FrameRegenerationFailed("frames dropped but the class needs version 51 or later".into()),
            });
        }
        cf.major_version = 50;
        cf.minor_version = 0;
    }
    Ok((cf, worst))
}

/// Whether a class can be re-emitted as version 50 without changing its meaning.
pub fn downgrade_eligible(cf: &ClassFile) -> bool {
    let pool_ok = cf.pool.iter().all(|(_, c)| {
        !matches!(c, Constant::MethodHandle { .. } | Constant::MethodType { .. } | Constant::Dynamic { .. } | Constant::InvokeDynamic { .. }
            | Constant::Module { .. } | Constant::Package { .. })
    });
    if !pool_ok {
        return false;
    }
    if cf.is_interface() && cf.methods.iter().any(|m| m.access_flags & ACC_ABSTRACT == 0 && m.name(&cf.pool) != "<clinit>") {
        return false;
    }
    const LATE: [&str; 6] = ["NestHost", "NestMembers", "Record", "PermittedSubclasses", "Module", "BootstrapMethods"];
    if cf.attributes.iter().any(|a| cf.pool.utf8(a.name_index).is_ok_and(|n| LATE.contains(&n.as_ref()))) {
        return false;
    }
    for m in &cf.methods {
        let Some(code) = m.code() else { continue };
        let Ok(body) = crate::codemodel::decode_code(code, &cf.pool) else { return false };
        for i in &body.instructions {
            if i.opcode == opcodes::INVOKEDYNAMIC {
                return false;
            }
            if matches!(i.opcode, opcodes::INVOKESTATIC | opcodes::INVOKESPECIAL)
                && i.member(&cf.pool).is_some_and(|r| r.interface)
            {
                return false;
            }
        }
    }
    true
}

/// Writes every class of `patched` under `dir`, mirroring the input layout.
pub fn write_classes(dir: &Path, classes: &ClassSet, only: Option<&BTreeSet<String>>) -> Result<(), PatchError> {
    for (name, c) in &classes.classes {
        if only.is_some_and(|o| !o.contains(name)) {
            continue;
        }
        let path = dir.join(&c.rel_path);
        let io_err = |source| PatchError::Io { path: path.display().to_string(), source };
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(io_err)?;
        }
        fs::write(&path, &c.bytes).map_err(io_err)?;
    }
    Ok(())
}

/// A location to mutate and its suspiciousness.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedSite {
    pub location: Location,
    pub score: f64,
}

/// Lazily yields single-step patches over `sites`, in site order, then catalog order,
/// then donor order. Sites are resolved against `classes`, so a stream built from
/// a parent's output sees the parent's code.
pub struct CandidateStream {
    classes: Arc<ClassSet>,
    hierarchy: ClassHierarchy,
    sites: Vec<RankedSite>,
    parent: Option<Arc<Patch>>,
    cap: usize,
    next_site: usize,
    buffer: VecDeque<(Mutant, f64)>,
    /// Matches that produced no viable mutant.
    pub discarded: usize,
}

impl CandidateStream {
    pub fn new(classes: Arc<ClassSet>, sites: Vec<RankedSite>, parent: Option<Arc<Patch>>, cap: usize) -> Self {
        let hierarchy = classes.hierarchy();
        CandidateStream { classes, hierarchy, sites, parent, cap, next_site: 0, buffer: VecDeque::new(), discarded: 0 }
    }

    fn fill(&mut self) {
        while self.buffer.is_empty() && self.next_site < self.sites.len() {
            let site = self.sites[self.next_site].clone();
            self.next_site += 1;
            for m in site_mutants(&self.classes, &self.hierarchy, &site.location, self.cap) {
                self.buffer.push_back((m, site.score));
            }
        }
    }
}

impl Iterator for CandidateStream {
    type Item = Patch;

    fn next(&mut self) -> Option<Patch> {
        self.fill();
        let (m, score) = self.buffer.pop_front()?;
        let loc = m.location.clone();
        Some(Patch::new(0, vec![m], vec![(loc, score)], self.parent.clone()))
    }
}

/// All mutants for one location across the methods that have code on its line.
pub fn site_mutants(classes: &ClassSet, h: &ClassHierarchy, loc: &Location, cap: usize) -> Vec<Mutant> {
    let Some(cf) = classes.get(&loc.class) else { return Vec::new() };
    let mut out = Vec::new();
    for ms in resolve_sites(classes, loc) {
        let Some(Ok(view)) = MethodView::find(cf, &ms.method, &ms.descriptor, h) else { continue };
        let site = Site { location: loc.clone(), labels: ms.labels.clone() };
        let types = view.types.clone();
        let mut donors = |l| collect_donors(cf, view.method_index, &view.body, l, types.as_deref(), h);
        out.extend(mutants_for_site(&view, &site, &mut donors, cap));
    }
    out
}

pub fn enumerate_candidates(classes: Arc<ClassSet>, sites: Vec<RankedSite>, cap: usize) -> CandidateStream {
    CandidateStream::new(classes, sites, None, cap)
}

/// Candidates extending a plausible sub-patch, generated from the sub-patch's output.
pub fn compose_subpatch(
    base: &ClassSet,
    sub: Arc<Patch>,
    remaining: Vec<RankedSite>,
    cap: usize,
) -> Result<CandidateStream, PatchError> {
    let patched = apply_patch(base, &sub)?;
    Ok(CandidateStream::new(Arc::new(patched.classes), remaining, Some(sub), cap))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(l: usize, d: usize, s: f64, o: usize) -> RankKey {
        RankKey { locations: l, delta: d, max_score: s, order: o }
    }

    #[test]
    fn lexicographic_examples() {
        let keys = [key(2, 1, 1.0, 0), key(1, 2, 0.5, 1), key(1, 5, 1.0, 2), key(1, 2, 0.5, 3)];
        assert_eq!(rank_order(&keys), vec![1, 3, 2, 0]);
    }

    #[test]
    fn classification_happens_once() {
        let mut p = Patch::new(0, Vec::new(), Vec::new(), None);
        p.classify(Classification::Incorrect).unwrap();
        assert!(p.classify(Classification::Plausible).is_err());
    }
}
