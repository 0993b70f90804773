//! Structural sanity checks run after every mutation.

use std::collections::HashSet;
use std::fmt;

use super::attributes::{AttrInfo, CodeAttribute};
use super::descriptor::{FieldType, MethodDescriptor};
use super::pool::Constant;
use super::ClassFile;
use crate::codemodel::{decode_code, opcodes, recompute_max_stack};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FaultKind {
    PoolReference,
    ClassReference,
    Descriptor,
    Code,
    BranchTarget,
    HandlerRange,
    LineTable,
    LocalIndex,
    MaxStack,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuralFault {
    pub method: Option<String>,
    pub pc: Option<u32>,
    pub kind: FaultKind,
    pub detail: String,
}

impl fmt::Display for StructuralFault {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.kind)?;
        if let Some(m) = &self.method {
            write!(f, " in {m}")?;
        }
        if let Some(pc) = self.pc {
            write!(f, " at pc {pc}")?;
        }
        write!(f, ": {}", self.detail)
    }
}

/// Checks pool references, descriptors and code boundaries. An empty result means the class is sound.
pub fn validate_structure(cf: &ClassFile) -> Vec<StructuralFault> {
    let mut out = Vec::new();
    let fault = |out: &mut Vec<StructuralFault>, method: Option<&str>, pc: Option<u32>, kind, detail: String| {
        out.push(StructuralFault { method: method.map(str::to_string), pc, kind, detail })
    };
    let pool = &cf.pool;

    for (i, e) in pool.check_references() {
        fault(&mut out, None, None, FaultKind::PoolReference, format!("entry {i}: {e}"));
    }
    if pool.class_name(cf.this_class).is_err() {
        fault(&mut out, None, None, FaultKind::ClassReference, format!("this_class {} is not a Class", cf.this_class));
    }
    if cf.super_class != 0 && pool.class_name(cf.super_class).is_err() {
        fault(&mut out, None, None, FaultKind::ClassReference, format!("super_class {} is not a Class", cf.super_class));
    }
    for &i in &cf.interfaces {
        if pool.class_name(i).is_err() {
            fault(&mut out, None, None, FaultKind::ClassReference, format!("interface {i} is not a Class"));
        }
    }

    for (index, c) in pool.iter() {
        match c {
            Constant::Fieldref { .. } | Constant::Methodref { .. } | Constant::InterfaceMethodref { .. } => {
                let Ok(m) = pool.member_ref(index) else { continue };
                let ok = if matches!(c, Constant::Fieldref { .. }) {
                    FieldType::parse(&m.descriptor).is_ok()
                } else {
                    MethodDescriptor::parse(&m.descriptor).is_ok()
                };
                if !ok {
                    fault(&mut out, None, None, FaultKind::Descriptor, format!("entry {index} ({m}) has a bad descriptor"));
                }
            }
            Constant::Class { .. } => {
                if let Ok(n) = pool.class_name(index) {
                    let ok = if n.starts_with('[') { FieldType::parse(&n).is_ok() } else { super::descriptor::valid_class_name(&n) };
                    if !ok {
                        fault(&mut out, None, None, FaultKind::Descriptor, format!("entry {index} names class {n:?}"));
                    }
                }
            }
            _ => {}
        }
    }

    for f in &cf.fields {
        let d = pool.utf8(f.descriptor_index);
        if d.as_ref().map_or(true, |d| FieldType::parse(d).is_err()) {
            let name = f.name(pool).into_owned();
            fault(&mut out, None, None, FaultKind::Descriptor, format!("field {name} has a bad descriptor"));
        }
    }

    for m in &cf.methods {
        let desc = m.descriptor(pool).into_owned();
        let id = format!("{}{}", m.name(pool), desc);
        let parsed = MethodDescriptor::parse(&desc);
        if parsed.is_err() {
            fault(&mut out, Some(&id), None, FaultKind::Descriptor, "bad method descriptor".into());
        }
        let Some(code) = m.code() else { continue };
        let arg_slots = parsed.map(|d| d.param_slots() + usize::from(!m.is_static())).unwrap_or(0);
        check_code(cf, code, &id, arg_slots, &mut out);
    }
    out
}

fn check_code(cf: &ClassFile, code: &CodeAttribute, id: &str, arg_slots: usize, out: &mut Vec<StructuralFault>) {
    let push = |out: &mut Vec<StructuralFault>, pc: Option<u32>, kind, detail: String| {
        out.push(StructuralFault { method: Some(id.to_string()), pc, kind, detail })
    };
    let pool = &cf.pool;

    let insns = match crate::codemodel::decode::decode_instructions(&code.code) {
        Ok(v) => v,
        Err(e) => {
            push(out, None, FaultKind::Code, e.to_string());
            return;
        }
    };
    let starts: HashSet<u32> = insns.iter().map(|i| i.label.0).collect();
    let len = code.code.len() as u32;
    let boundary = |pc: u32| starts.contains(&pc);

    for i in &insns {
        for t in i.targets() {
            if !boundary(t.0) {
                push(out, Some(i.label.0), FaultKind::BranchTarget, format!("{} targets pc {}", i.mnemonic(), t.0));
            }
        }
        if let Some(l) = i.local_index() {
            let width = opcodes::load_kind(i.opcode)
                .or_else(|| opcodes::store_kind(i.opcode))
                .map_or(1, |(k, _)| k.slots() as u32);
            if u32::from(l) + width > u32::from(code.max_locals) {
                push(out, Some(i.label.0), FaultKind::LocalIndex, format!("local {l} with max_locals {}", code.max_locals));
            }
        }
        if let Some(crate::codemodel::PoolRef::Index(p)) = i.pool_ref() {
            if pool.get(*p).is_err() {
                push(out, Some(i.label.0), FaultKind::PoolReference, format!("{} uses pool entry {p}", i.mnemonic()));
            }
        }
    }
    if arg_slots > usize::from(code.max_locals) {
        push(out, None, FaultKind::LocalIndex, format!("arguments need {arg_slots} locals, max_locals {}", code.max_locals));
    }

    for h in &code.exception_table {
        let (s, e, p) = (u32::from(h.start_pc), u32::from(h.end_pc), u32::from(h.handler_pc));
        if !boundary(s) {
            push(out, Some(s), FaultKind::HandlerRange, "handler start_pc is not an instruction boundary".into());
        }
        if !(boundary(e) || e == len) {
            push(out, Some(e), FaultKind::HandlerRange, "handler end_pc is not an instruction boundary".into());
        }
        if s >= e {
            push(out, Some(s), FaultKind::HandlerRange, format!("empty handler range {s}..{e}"));
        }
        if !boundary(p) {
            push(out, Some(p), FaultKind::HandlerRange, "handler_pc is not an instruction boundary".into());
        }
        if h.catch_type != 0 && pool.class_name(h.catch_type).is_err() {
            push(out, Some(p), FaultKind::ClassReference, format!("catch type {} is not a Class", h.catch_type));
        }
    }

    for a in &code.attributes {
        if let AttrInfo::LineNumberTable(rows) = &a.info {
            for r in rows {
                if !boundary(u32::from(r.start_pc)) {
                    push(out, Some(u32::from(r.start_pc)), FaultKind::LineTable, format!("line {} starts mid-instruction", r.line));
                }
            }
        }
    }

    // Full decode covers frame and local-variable offsets plus operand kinds.
    match decode_code(code, pool) {
        Ok(body) => match recompute_max_stack(&body, pool) {
            Ok(need) if need > code.max_stack => {
                push(out, None, FaultKind::MaxStack, format!("max_stack {} but code needs {need}", code.max_stack));
            }
            Ok(_) => {}
            Err(e) => push(out, None, FaultKind::MaxStack, e.to_string()),
        },
        Err(e) if out.is_empty() => push(out, None, FaultKind::Code, e.to_string()),
        Err(_) => {}
    }
}
