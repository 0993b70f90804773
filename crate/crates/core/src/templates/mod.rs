//! Fix-template catalog: matching at suspicious sites and mutant generation.

mod code;
mod expr;
mod insert;
mod structure;

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Serialize, Serializer};

use crate::classfile::descriptor::{FieldType, MethodDescriptor};
use crate::classfile::{ClassFile, ConstantPool, MemberRef};
use crate::codemodel::stack::depths;
use crate::codemodel::{
    analyze_types, apply_edits, decode_code, opcodes, recompute_max_stack, stack_effect, CodeBody, CodeError, Edit,
    Label, Line, MethodContext, TypeState, ValueType,
};
use crate::donor::{DonorPool, LocalDonor};
use crate::faultloc::Location;
use crate::hierarchy::ClassHierarchy;

pub use code::Expr;

/// Catalog identifier such as `T3.1`; `variant` is 0 for categories without sub-templates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TemplateId {
    pub category: u8,
    pub variant: u8,
}

impl TemplateId {
    pub const fn new(category: u8, variant: u8) -> Self {
        TemplateId { category, variant }
    }

    pub fn parse(s: &str) -> Option<TemplateId> {
        let rest = s.strip_prefix('T')?;
        let (c, v) = match rest.split_once('.') {
            Some((c, v)) => (c.parse().ok()?, v.parse().ok()?),
            None => (rest.parse().ok()?, 0),
        };
        let id = TemplateId::new(c, v);
        catalog().iter().any(|e| e.id == id).then_some(id)
    }

    pub fn entry(self) -> &'static CatalogEntry {
        catalog().iter().find(|e| e.id == self).expect("ids come from the catalog")
    }
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.variant == 0 {
            write!(f, "T{}", self.category)
        } else {
            write!(f, "T{}.{}", self.category, self.variant)
        }
    }
}

impl Serialize for TemplateId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum SourceKind {
    /// Specific to vulnerability repair.
    Avr,
    /// Borrowed from general program repair.
    Apr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CatalogEntry {
    pub id: TemplateId,
    pub category_name: &'static str,
    pub name: &'static str,
    pub source: SourceKind,
}

const fn entry(c: u8, v: u8, category_name: &'static str, name: &'static str, source: SourceKind) -> CatalogEntry {
    CatalogEntry { id: TemplateId::new(c, v), category_name, name, source }
}

use SourceKind::{Apr, Avr};

static CATALOG: [CatalogEntry; 33] = [
    entry(1, 1, "Mutate Object Instantiation", "instantiate the secure subclass", Avr),
    entry(1, 2, "Mutate Object Instantiation", "replace a stored instantiation with null", Avr),
    entry(2, 1, "Insert Validity Checker", "null check", Avr),
    entry(2, 2, "Insert Validity Checker", "non-negative range check", Avr),
    entry(2, 3, "Insert Validity Checker", "array length check", Avr),
    entry(2, 4, "Insert Validity Checker", "collection emptiness check", Avr),
    entry(3, 1, "Insert Statements", "insert method invocation", Avr),
    entry(3, 2, "Insert Statements", "insert early return", Avr),
    entry(3, 3, "Insert Statements", "insert try-catch", Avr),
    entry(4, 0, "Insert Cast Checker", "guard checkcast with instanceof", Avr),
    entry(5, 1, "Mutate Conditional Block", "update sub-expression", Apr),
    entry(5, 2, "Mutate Conditional Block", "remove sub-expression", Apr),
    entry(5, 3, "Mutate Conditional Block", "add sub-expression", Avr),
    entry(5, 4, "Mutate Conditional Block", "loop to conditional", Apr),
    entry(6, 1, "Mutate Data Type", "change variable type", Avr),
    entry(6, 2, "Mutate Data Type", "change cast type", Apr),
    entry(7, 1, "Mutate Literal Expression", "literal to literal", Apr),
    entry(7, 2, "Mutate Literal Expression", "literal to expression", Apr),
    entry(8, 1, "Mutate Variables", "variable to variable", Apr),
    entry(8, 2, "Mutate Variables", "variable to expression", Apr),
    entry(9, 1, "Mutate Method Invocation", "replace method", Apr),
    entry(9, 2, "Mutate Method Invocation", "argument to variable", Apr),
    entry(9, 3, "Mutate Method Invocation", "argument to expression", Apr),
    entry(10, 1, "Mutate Operators", "comparison operator", Apr),
    entry(10, 2, "Mutate Operators", "arithmetic operator", Apr),
    entry(10, 3, "Mutate Operators", "logical operator", Apr),
    entry(11, 0, "Remove Statements", "remove statement or block", Avr),
    entry(12, 0, "Mutate Return Statements", "replace returned expression", Apr),
    entry(13, 1, "Mutate Switch Statements", "retarget default", Apr),
    entry(13, 2, "Mutate Switch Statements", "swap case targets", Apr),
    entry(13, 3, "Mutate Switch Statements", "add case key", Apr),
    entry(14, 1, "Mutate Fields", "field to field", Apr),
    entry(14, 2, "Mutate Fields", "field to expression", Apr),
];

/// All templates in attempt order.
pub fn catalog() -> &'static [CatalogEntry] {
    &CATALOG
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct MethodKey {
    pub class: String,
    pub name: String,
    pub descriptor: String,
}

impl fmt::Display for MethodKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}{}", self.class, self.name, self.descriptor)
    }
}

/// Operand captures recorded by a match.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Binding {
    Local(u16),
    Type(FieldType),
    Class(String),
    Member(MemberRef),
    /// A label control continues at (for example the instruction after a statement).
    Target(Label),
    /// Inclusive instruction range.
    Range(Label, Label),
    Opcode(u8),
    /// Stack-slot offset of an operand among an instruction's popped values.
    Operand(usize),
}

/// Ingredients a match still needs from the donor pool.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DonorSlot {
    Local(FieldType),
    Expression(FieldType),
    Method,
    Literal(FieldType),
    SecureClass(String),
    Field(FieldType),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemplateMatch {
    pub template: TemplateId,
    pub location: Location,
    pub method: MethodKey,
    /// Matched instructions; the first is the anchor.
    pub labels: Vec<Label>,
    pub bindings: Vec<Binding>,
    pub donor_slots: Vec<DonorSlot>,
}

impl TemplateMatch {
    pub fn anchor(&self) -> Label {
        self.labels[0]
    }

    fn local(&self) -> Option<u16> {
        self.bindings.iter().find_map(|b| match b {
            Binding::Local(l) => Some(*l),
            _ => None,
        })
    }

    fn target(&self) -> Option<Label> {
        self.bindings.iter().find_map(|b| match b {
            Binding::Target(l) => Some(*l),
            _ => None,
        })
    }

    fn range(&self) -> Option<(Label, Label)> {
        self.bindings.iter().find_map(|b| match b {
            Binding::Range(a, b) => Some((*a, *b)),
            _ => None,
        })
    }

    fn ty(&self) -> Option<&FieldType> {
        self.bindings.iter().find_map(|b| match b {
            Binding::Type(t) => Some(t),
            _ => None,
        })
    }

    fn class(&self) -> Option<&str> {
        self.bindings.iter().find_map(|b| match b {
            Binding::Class(c) => Some(c.as_str()),
            _ => None,
        })
    }

    fn member(&self) -> Option<&MemberRef> {
        self.bindings.iter().find_map(|b| match b {
            Binding::Member(m) => Some(m),
            _ => None,
        })
    }

    fn operand(&self) -> Option<usize> {
        self.bindings.iter().find_map(|b| match b {
            Binding::Operand(o) => Some(*o),
            _ => None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mutant {
    pub template: TemplateId,
    pub method: MethodKey,
    pub location: Location,
    #[serde(skip)]
    pub anchor: Label,
    #[serde(skip)]
    pub edits: Vec<Edit>,
    pub instruction_delta: usize,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TemplateError {
    #[error("{template} matched but no viable mutation: {reason}")]
    NoViableMutation { template: TemplateId, reason: String },
}

/// Instruction labels of one suspicious location inside one method.
#[derive(Debug, Clone, PartialEq)]
pub struct Site {
    pub location: Location,
    pub labels: Vec<Label>,
}

/// A decoded method plus the analyses templates consult.
pub struct MethodView<'a> {
    pub class: &'a ClassFile,
    pub method_index: usize,
    pub key: MethodKey,
    pub body: CodeBody,
    pub descriptor: MethodDescriptor,
    pub is_static: bool,
    pub hierarchy: &'a ClassHierarchy,
    /// Stack depth on entry to each instruction.
    pub depths: Vec<Option<usize>>,
    /// Verification types on entry, when the method type-checks.
    pub types: Option<Vec<Option<TypeState>>>,
    pub lines: Vec<Line>,
    pub flow: Flow,
    pos: HashMap<Label, usize>,
    jump_targets: HashSet<Label>,
}

impl<'a> MethodView<'a> {
    pub fn new(class: &'a ClassFile, method_index: usize, hierarchy: &'a ClassHierarchy) -> Result<Self, CodeError> {
        let pool = &class.pool;
        let m = &class.methods[method_index];
        let code = m.code().ok_or_else(|| CodeError::Malformed { pc: 0, reason: "method has no code".into() })?;
        let body = decode_code(code, pool)?;
        let descriptor_str = m.descriptor(pool).into_owned();
        let descriptor =
            MethodDescriptor::parse(&descriptor_str).map_err(|e| CodeError::Descriptor(e.to_string()))?;
        let key = MethodKey { class: class.name().into_owned(), name: m.name(pool).into_owned(), descriptor: descriptor_str };
        let (depths, _) = depths(&body, pool)?;
        let ctx = MethodContext {
            class_name: &key.class,
            method_name: &key.name,
            descriptor: &key.descriptor,
            is_static: m.is_static(),
            major_version: class.major_version,
            hierarchy,
        };
        let types = analyze_types(&body, pool, &ctx).ok();
        let lines = body.line_map();
        let flow = Flow::compute(&body, pool, &depths);
        let pos = body.positions();
        let jump_targets = body.jump_targets().into_iter().collect();
        Ok(MethodView {
            class,
            method_index,
            key,
            body,
            descriptor,
            is_static: m.is_static(),
            hierarchy,
            depths,
            types,
            lines,
            flow,
            pos,
            jump_targets,
        })
    }

    /// Finds the method named by `key` in `class`.
    pub fn find(class: &'a ClassFile, name: &str, descriptor: &str, hierarchy: &'a ClassHierarchy) -> Option<Result<Self, CodeError>> {
        class.find_method(name, descriptor).map(|i| MethodView::new(class, i, hierarchy))
    }

    pub fn pool(&self) -> &ConstantPool {
        &self.class.pool
    }

    pub fn pos(&self, l: Label) -> Option<usize> {
        self.pos.get(&l).copied()
    }

    pub fn insn(&self, p: usize) -> &crate::codemodel::Instruction {
        &self.body.instructions[p]
    }

    pub fn len(&self) -> usize {
        self.body.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.body.instructions.is_empty()
    }

    pub fn label_at(&self, p: usize) -> Label {
        self.body.instructions.get(p).map_or(Label::END, |i| i.label)
    }

    pub fn depth(&self, p: usize) -> Option<usize> {
        self.depths.get(p).copied().flatten()
    }

    pub fn is_jump_target(&self, l: Label) -> bool {
        self.jump_targets.contains(&l)
    }

    pub fn is_handler_entry(&self, l: Label) -> bool {
        self.body.handlers.iter().any(|h| h.handler == l)
    }

    pub fn type_state(&self, p: usize) -> Option<&TypeState> {
        self.types.as_ref()?.get(p)?.as_ref()
    }

    pub fn context(&self) -> MethodContext<'_> {
        MethodContext {
            class_name: &self.key.class,
            method_name: &self.key.name,
            descriptor: &self.key.descriptor,
            is_static: self.is_static,
            major_version: self.class.major_version,
            hierarchy: self.hierarchy,
        }
    }

    /// Contiguous runs of the given labels, as inclusive position ranges in code order.
    pub fn segments(&self, labels: &[Label]) -> Vec<(usize, usize)> {
        let mut ps: Vec<usize> = labels.iter().filter_map(|l| self.pos(*l)).collect();
        ps.sort_unstable();
        ps.dedup();
        let mut out: Vec<(usize, usize)> = Vec::new();
        for p in ps {
            match out.last_mut() {
                Some((_, e)) if *e + 1 == p => *e = p,
                _ => out.push((p, p)),
            }
        }
        out
    }

    /// Declared or inferred type of local `index` around position `p`.
    pub fn local_type(&self, index: u16, p: usize) -> Option<FieldType> {
        for lv in &self.body.locals {
            if lv.index != index {
                continue;
            }
            let (Some(s), Some(e)) = (self.pos(lv.start), self.pos(lv.end)) else { continue };
            // A store's scope starts just after it.
            if s <= p + 1 && p < e {
                let d = match &lv.descriptor {
                    crate::codemodel::PoolRef::Index(i) => self.pool().utf8(*i).ok()?.into_owned(),
                    crate::codemodel::PoolRef::Sym(crate::codemodel::Symbol::Utf8(d)) => d.clone(),
                    _ => continue,
                };
                if let Ok(t) = FieldType::parse(&d) {
                    return Some(t);
                }
            }
        }
        let at = self.type_state(p).map(|s| s.local(index as usize).clone());
        let after = self.type_state(p + 1).map(|s| s.local(index as usize).clone());
        [at, after].into_iter().flatten().find_map(|t| value_field_type(&t))
    }

    /// Type of the value produced by instruction `p`, taken where it is consumed.
    pub fn produced_type(&self, p: usize) -> Option<FieldType> {
        let (c, off) = self.flow.consumer[p]?;
        let s = self.type_state(c)?;
        let (pops, _) = stack_effect(self.insn(c), self.pool()).ok()?;
        let base = s.stack.len().checked_sub(pops)?;
        value_field_type(s.stack.get(base + off)?)
    }

    /// Type the consumer of instruction `p`'s value expects, from descriptors and the variable table.
    pub fn expected_type(&self, p: usize) -> Option<FieldType> {
        let (c, off) = self.flow.consumer[p]?;
        let insn = self.insn(c);
        let op = insn.opcode;
        if let Some((_, _)) = opcodes::store_kind(op) {
            return self.local_type(insn.local_index()?, c);
        }
        if opcodes::return_kind(op).is_some() {
            return self.descriptor.ret.clone();
        }
        match op {
            opcodes::PUTFIELD | opcodes::PUTSTATIC => {
                let m = insn.member(self.pool())?;
                let t = FieldType::parse(&m.descriptor).ok()?;
                let receiver = usize::from(op == opcodes::PUTFIELD);
                (off == receiver).then_some(t).or_else(|| (off == 0 && receiver == 1).then(|| FieldType::object(&m.owner)))
            }
            opcodes::INVOKEVIRTUAL | opcodes::INVOKESPECIAL | opcodes::INVOKESTATIC | opcodes::INVOKEINTERFACE => {
                let m = insn.member(self.pool())?;
                let d = MethodDescriptor::parse(&m.descriptor).ok()?;
                let mut slot = usize::from(op != opcodes::INVOKESTATIC);
                if slot == 1 && off == 0 {
                    return Some(FieldType::object(&m.owner));
                }
                for p in d.params {
                    if slot == off {
                        return Some(p);
                    }
                    slot += p.slots();
                }
                None
            }
            _ => None,
        }
    }

    /// Index of param slot `off` in an invoke's popped values, if it starts an argument.
    pub fn argument_index(&self, c: usize, off: usize) -> Option<usize> {
        let insn = self.insn(c);
        let m = insn.member(self.pool())?;
        let d = MethodDescriptor::parse(&m.descriptor).ok()?;
        let mut slot = usize::from(insn.opcode != opcodes::INVOKESTATIC);
        for (i, p) in d.params.iter().enumerate() {
            if slot == off {
                return Some(i);
            }
            slot += p.slots();
        }
        None
    }

    /// First position after `p` where the operand stack is empty again.
    pub fn statement_end(&self, p: usize) -> Option<usize> {
        (p + 1..=self.len()).find(|&q| q == self.len() || self.depth(q) == Some(0))
    }
}

fn value_field_type(t: &ValueType) -> Option<FieldType> {
    match t {
        ValueType::Int => Some(FieldType::Int),
        ValueType::Long => Some(FieldType::Long),
        ValueType::Float => Some(FieldType::Float),
        ValueType::Double => Some(FieldType::Double),
        ValueType::Ref(n) => FieldType::from_class_operand(n).ok(),
        _ => None,
    }
}

/// Local producer/consumer links inside straight-line code.
#[derive(Debug, Clone, Default)]
pub struct Flow {
    /// For an instruction pushing a value: the consuming instruction and the slot offset
    /// of the value among the consumer's popped slots (deepest first).
    pub consumer: Vec<Option<(usize, usize)>>,
    /// For each instruction: the producer of each popped slot, deepest first.
    pub operands: Vec<Vec<Option<usize>>>,
}

impl Flow {
    pub fn compute(body: &CodeBody, pool: &ConstantPool, depths: &[Option<usize>]) -> Flow {
        let n = body.instructions.len();
        let mut consumer = vec![None; n];
        let mut operands = vec![Vec::new(); n];
        let targets: HashSet<Label> = body.jump_targets().into_iter().collect();
        let mut stack: Vec<Option<usize>> = Vec::new();
        let mut reachable_fallthrough = false;
        for (p, insn) in body.instructions.iter().enumerate() {
            let Some(d) = depths.get(p).copied().flatten() else {
                reachable_fallthrough = false;
                continue;
            };
            if !reachable_fallthrough || targets.contains(&insn.label) || stack.len() != d {
                stack = vec![None; d];
            }
            let Ok((pops, pushes)) = stack_effect(insn, pool) else {
                reachable_fallthrough = false;
                continue;
            };
            let at = stack.len().saturating_sub(pops);
            let popped: Vec<Option<usize>> = stack.split_off(at);
            for (i, q) in popped.iter().enumerate() {
                if let Some(q) = q {
                    if i == 0 || popped[i - 1] != Some(*q) {
                        consumer[*q] = Some((p, i));
                    }
                }
            }
            operands[p] = popped;
            stack.extend(std::iter::repeat(Some(p)).take(pushes));
            reachable_fallthrough = insn.falls_through();
        }
        Flow { consumer, operands }
    }
}

/// Templates whose match predicate holds at the site, in catalog then label order.
pub fn match_templates(view: &MethodView<'_>, site: &Site) -> Vec<TemplateMatch> {
    let mut out = Vec::new();
    for e in catalog() {
        let mut found = match e.id.category {
            1..=4 => insert::matches(view, site, e.id),
            5..=10 => expr::matches(view, site, e.id),
            _ => structure::matches(view, site, e.id),
        };
        found.sort_by_key(|m| view.pos(m.anchor()).unwrap_or(usize::MAX));
        out.extend(found);
    }
    out
}

fn new_match(view: &MethodView<'_>, site: &Site, id: TemplateId, labels: Vec<Label>, bindings: Vec<Binding>) -> TemplateMatch {
    TemplateMatch {
        template: id,
        location: site.location.clone(),
        method: view.key.clone(),
        labels,
        bindings,
        donor_slots: Vec::new(),
    }
}

/// A candidate edit script with a human-readable summary.
pub(crate) struct Candidate {
    pub edits: Vec<Edit>,
    pub description: String,
}

/// Instantiates a match, keeping only mutants that apply and keep a consistent stack.
pub fn generate_mutants(
    view: &MethodView<'_>,
    m: &TemplateMatch,
    donors: &DonorPool,
    cap: usize,
) -> Result<Vec<Mutant>, TemplateError> {
    let raw = match m.template.category {
        1..=4 => insert::generate(view, m, donors),
        5..=10 => expr::generate(view, m, donors),
        _ => structure::generate(view, m, donors),
    };
    if raw.is_empty() {
        return Err(TemplateError::NoViableMutation { template: m.template, reason: "no instantiation".into() });
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut last_reason = String::new();
    for c in raw {
        if out.len() >= cap {
            break;
        }
        if !seen.insert(c.edits.clone()) {
            continue;
        }
        match check_mutant(view, &c.edits) {
            Ok(()) => {
                let delta = c.edits.iter().map(|e| e.instruction_delta(&view.body)).sum::<usize>().max(1);
                out.push(Mutant {
                    template: m.template,
                    method: view.key.clone(),
                    location: m.location.clone(),
                    anchor: m.anchor(),
                    edits: c.edits,
                    instruction_delta: delta,
                    description: c.description,
                });
            }
            Err(why) => last_reason = why,
        }
    }
    if out.is_empty() {
        return Err(TemplateError::NoViableMutation { template: m.template, reason: last_reason });
    }
    Ok(out)
}

/// The body an edit script produces, if it applies and keeps the stack consistent.
pub fn check_mutant(view: &MethodView<'_>, edits: &[Edit]) -> Result<(), String> {
    let mut body = apply_edits(&view.body, edits).map_err(|e| e.to_string())?;
    body.max_locals = body.required_max_locals();
    recompute_max_stack(&body, view.pool()).map_err(|e| e.to_string())?;
    if view.types.is_some() {
        analyze_types(&body, view.pool(), &view.context()).map_err(|e| e.to_string())?;
    }
    Ok(())
}

/// Every mutant for one site: all matches in order, each capped.
pub fn mutants_for_site(
    view: &MethodView<'_>,
    site: &Site,
    donors: &mut dyn FnMut(Label) -> DonorPool,
    cap: usize,
) -> Vec<Mutant> {
    let mut cache: HashMap<Label, DonorPool> = HashMap::new();
    let mut out = Vec::new();
    for m in match_templates(view, site) {
        let pool = cache.entry(m.anchor()).or_insert_with(|| donors(m.anchor()));
        match generate_mutants(view, &m, pool, cap) {
            Ok(ms) => out.extend(ms),
            Err(e) => log::trace!("{}: {e}", view.key),
        }
    }
    out
}

/// Locals of a type usable where `want` is expected, excluding `except`.
pub(crate) fn compatible_locals<'p>(
    view: &MethodView<'_>,
    donors: &'p DonorPool,
    want: &FieldType,
    except: Option<u16>,
) -> Vec<&'p LocalDonor> {
    donors
        .locals
        .iter()
        .filter(|l| Some(l.index) != except)
        .filter(|l| crate::donor::type_compatible(&l.descriptor, want, view.hierarchy))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_shape() {
        let cats: HashSet<u8> = catalog().iter().map(|e| e.id.category).collect();
        assert_eq!(cats.len(), 14);
        assert_eq!(catalog().len(), 33);
        assert_eq!(catalog().iter().filter(|e| e.source == SourceKind::Avr).count(), 13);
        let mut sorted = catalog().to_vec();
        sorted.sort_by_key(|e| e.id);
        assert_eq!(sorted, catalog().to_vec());
    }

    #[test]
    fn ids_print_and_parse() {
        for e in catalog() {
            assert_eq!(TemplateId::parse(&e.id.to_string()), Some(e.id));
        }
        assert_eq!(TemplateId::new(4, 0).to_string(), "T4");
        assert_eq!(TemplateId::parse("T4.1"), None);
        assert_eq!(TemplateId::parse("T15"), None);
    }
}
