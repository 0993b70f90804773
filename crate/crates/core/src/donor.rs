//! Fix ingredients available at a site: live locals, class members, pool literals.

use std::collections::{BTreeSet, HashSet};

use crate::classfile::descriptor::{FieldType, MethodDescriptor};
use crate::classfile::{ClassFile, Constant, ACC_PRIVATE, ACC_STATIC};
use crate::codemodel::{opcodes, CodeBody, Label, PoolRef, Symbol, TypeState, ValueType};
use crate::hierarchy::{ClassHierarchy, OBJECT};

const SECURE_PAIRS: &str = include_str!("../data/secure_pairs.txt");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalDonor {
    pub index: u16,
    pub descriptor: FieldType,
    pub name: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDonor {
    pub owner: String,
    pub name: String,
    pub descriptor: FieldType,
    pub is_static: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodDonor {
    pub owner: String,
    pub name: String,
    pub descriptor: MethodDescriptor,
    pub is_static: bool,
    pub is_interface: bool,
    /// Declared private in the enclosing class (called with `invokespecial`).
    pub is_private: bool,
}

impl MethodDonor {
    pub fn raw_descriptor(&self) -> String {
        self.descriptor.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Int(i32),
    Long(i64),
    Float(f32),
    Double(f64),
    Str(String),
}

impl Literal {
    pub fn field_type(&self) -> FieldType {
        match self {
            Literal::Int(_) => FieldType::Int,
            Literal::Long(_) => FieldType::Long,
            Literal::Float(_) => FieldType::Float,
            Literal::Double(_) => FieldType::Double,
            Literal::Str(_) => FieldType::object("java/lang/String"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DonorPool {
    pub locals: Vec<LocalDonor>,
    pub fields: Vec<FieldDonor>,
    pub methods: Vec<MethodDonor>,
    pub literals: Vec<Literal>,
    pub secure_pairs: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid descriptor {0:?}")]
pub struct InvalidDescriptor(pub String);

/// Whether a value described by `a` can be used where `b` is expected.
pub fn descriptor_compatible(a: &str, b: &str, h: &ClassHierarchy) -> Result<bool, InvalidDescriptor> {
    let fa = FieldType::parse(a).map_err(|_| InvalidDescriptor(a.to_string()))?;
    let fb = FieldType::parse(b).map_err(|_| InvalidDescriptor(b.to_string()))?;
    Ok(type_compatible(&fa, &fb, h))
}

pub fn type_compatible(a: &FieldType, b: &FieldType, h: &ClassHierarchy) -> bool {
    use FieldType::*;
    if a == b {
        return true;
    }
    match (a, b) {
        (Byte, Short | Int) | (Short, Int) | (Char, Int) => true,
        _ if a.is_reference() && b.is_reference() => {
            let (Some(ca), Some(cb)) = (a.class_operand(), b.class_operand()) else { return false };
            cb == OBJECT || h.is_subtype(&ca, &cb) == Some(true)
        }
        _ => false,
    }
}

/// Built-in insecure-to-secure replacements.
pub fn builtin_secure_pairs() -> Vec<(String, String)> {
    SECURE_PAIRS
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .filter_map(|l| {
            let mut it = l.split_whitespace();
            Some((it.next()?.to_string(), it.next()?.to_string()))
        })
        .collect()
}

/// `pkg/SecureX` when it is a known subclass of `pkg/X`, else the built-in table.
pub fn infer_secure_class(h: &ClassHierarchy, class: &str) -> Option<String> {
    let (pkg, simple) = match class.rsplit_once('/') {
        Some((p, s)) => (format!("{p}/"), s),
        None => (String::new(), class),
    };
    let candidate = format!("{pkg}Secure{simple}");
    if h.get(&candidate).and_then(|c| c.super_name.as_deref()) == Some(class) {
        return Some(candidate);
    }
    builtin_secure_pairs().into_iter().find(|(c, _)| c == class).map(|(_, s)| s)
}

fn type_to_field(t: &ValueType) -> Option<FieldType> {
    match t {
        ValueType::Int => Some(FieldType::Int),
        ValueType::Long => Some(FieldType::Long),
        ValueType::Float => Some(FieldType::Float),
        ValueType::Double => Some(FieldType::Double),
        ValueType::Ref(n) => FieldType::from_class_operand(n).ok(),
        _ => None,
    }
}

fn kind_matches(desc: &FieldType, t: &ValueType) -> bool {
    match t {
        ValueType::Int => desc.is_int_like(),
        ValueType::Long => *desc == FieldType::Long,
        ValueType::Float => *desc == FieldType::Float,
        ValueType::Double => *desc == FieldType::Double,
        ValueType::Ref(_) | ValueType::Null => desc.is_reference(),
        _ => false,
    }
}

/// Slots written on at least one path from entry to each instruction (parameters count as written).
pub fn possibly_written(body: &CodeBody, param_slots: usize) -> Vec<Option<BTreeSet<u16>>> {
    let n = body.instructions.len();
    let pos = body.positions();
    let mut state: Vec<Option<BTreeSet<u16>>> = vec![None; n];
    if n == 0 {
        return state;
    }
    state[0] = Some((0..param_slots as u16).collect());
    let mut work = vec![0usize];
    while let Some(p) = work.pop() {
        let insn = &body.instructions[p];
        let mut out = state[p].clone().unwrap();
        let mut succ: Vec<usize> = Vec::new();
        for h in &body.handlers {
            let (Some(&s), Some(&e), Some(&hp)) = (pos.get(&h.start), pos.get(&h.end), pos.get(&h.handler)) else {
                continue;
            };
            if (s..e).contains(&p) {
                succ.push(hp);
            }
        }
        if opcodes::store_kind(insn.opcode).is_some() || insn.opcode == opcodes::IINC {
            if let Some(i) = insn.local_index() {
                out.insert(i);
                if opcodes::store_kind(insn.opcode).is_some_and(|(k, _)| k.slots() == 2) {
                    out.insert(i + 1);
                }
            }
        }
        for t in insn.targets() {
            if let Some(&q) = pos.get(&t) {
                succ.push(q);
            }
        }
        if insn.falls_through() && p + 1 < n {
            succ.push(p + 1);
        }
        // Handlers see the state before this instruction as well.
        let before = state[p].clone().unwrap();
        for q in succ {
            let incoming = if body.handlers.iter().any(|h| pos.get(&h.handler) == Some(&q)) {
                before.union(&out).copied().collect()
            } else {
                out.clone()
            };
            let changed = match &mut state[q] {
                None => {
                    state[q] = Some(incoming);
                    true
                }
                Some(old) => {
                    let before_len = old.len();
                    old.extend(incoming);
                    old.len() != before_len
                }
            };
            if changed {
                work.push(q);
            }
        }
    }
    state
}

/// Everything a template may splice in at `site` of method `method_index`.
pub fn collect_donors(
    cf: &ClassFile,
    method_index: usize,
    body: &CodeBody,
    site: Label,
    types: Option<&[Option<TypeState>]>,
    h: &ClassHierarchy,
) -> DonorPool {
    let pool = &cf.pool;
    let method = &cf.methods[method_index];
    let is_static = method.is_static();
    let md = MethodDescriptor::parse(&method.descriptor(pool)).ok();
    let pos = body.positions();
    let site_pos = pos.get(&site).copied().unwrap_or(0);
    let at_site: Option<&TypeState> = types.and_then(|t| t.get(site_pos)).and_then(|s| s.as_ref());
    let param_slots = md.as_ref().map_or(0, |d| d.param_slots()) + usize::from(!is_static);
    let written = possibly_written(body, param_slots);
    let written_here = written.get(site_pos).cloned().flatten().unwrap_or_default();

    let mut locals = Vec::new();
    let mut seen = HashSet::new();
    let live_ok = |index: u16, desc: &FieldType| -> bool {
        if !written_here.contains(&index) {
            return false;
        }
        match at_site {
            Some(s) => kind_matches(desc, s.local(index as usize)),
            None => true,
        }
    };
    if !body.locals.is_empty() {
        for lv in &body.locals {
            let (Some(&s), Some(&e)) = (pos.get(&lv.start), pos.get(&lv.end)) else { continue };
            if !(s <= site_pos && site_pos < e) {
                continue;
            }
            let desc = match &lv.descriptor {
                PoolRef::Index(i) => pool.utf8(*i).ok().map(|d| d.into_owned()),
                PoolRef::Sym(Symbol::Utf8(d)) => Some(d.clone()),
                _ => None,
            };
            let Some(desc) = desc.and_then(|d| FieldType::parse(&d).ok()) else { continue };
            if live_ok(lv.index, &desc) && seen.insert(lv.index) {
                locals.push(LocalDonor {
                    index: lv.index,
                    descriptor: desc,
                    name: pool.utf8(lv.name_index).ok().map(|n| n.into_owned()),
                });
            }
        }
    } else {
        // Without a variable table, type slots by the state at the site or by the stores that write them.
        let mut slot_types: Vec<(u16, FieldType)> = Vec::new();
        if !is_static {
            slot_types.push((0, FieldType::object(&cf.name())));
        }
        if let Some(d) = &md {
            let mut slot = u16::from(!is_static);
            for p in &d.params {
                slot_types.push((slot, p.clone()));
                slot += p.slots() as u16;
            }
        }
        for insn in &body.instructions {
            if let (Some((k, _)), Some(i)) = (opcodes::store_kind(insn.opcode), insn.local_index()) {
                if slot_types.iter().any(|(s, _)| *s == i) {
                    continue;
                }
                let t = match k {
                    opcodes::Kind::Int => FieldType::Int,
                    opcodes::Kind::Long => FieldType::Long,
                    opcodes::Kind::Float => FieldType::Float,
                    opcodes::Kind::Double => FieldType::Double,
                    opcodes::Kind::Ref => FieldType::object(OBJECT),
                };
                slot_types.push((i, t));
            }
        }
        slot_types.sort_by_key(|(s, _)| *s);
        for (i, t) in slot_types {
            let t = match at_site.map(|s| s.local(i as usize)) {
                Some(v @ ValueType::Ref(_)) if t.is_reference() => type_to_field(v).unwrap_or(t),
                _ => t,
            };
            if live_ok(i, &t) && seen.insert(i) {
                locals.push(LocalDonor { index: i, descriptor: t, name: None });
            }
        }
    }

    // Static-ness of referenced members follows from how this class uses them.
    let mut static_refs = HashSet::new();
    for m in &cf.methods {
        let Some(code) = m.code() else { continue };
        let Ok(insns) = crate::codemodel::decode::decode_instructions(&code.code) else { continue };
        for i in insns {
            if matches!(i.opcode, opcodes::GETSTATIC | opcodes::PUTSTATIC | opcodes::INVOKESTATIC) {
                if let Some(PoolRef::Index(p)) = i.pool_ref() {
                    static_refs.insert(*p);
                }
            }
        }
    }

    let this = cf.name().into_owned();
    let mut fields = Vec::new();
    let mut field_keys = HashSet::new();
    for f in &cf.fields {
        let name = f.name(pool).into_owned();
        let Ok(desc) = FieldType::parse(&f.descriptor(pool)) else { continue };
        if field_keys.insert((this.clone(), name.clone(), desc.descriptor())) {
            fields.push(FieldDonor { owner: this.clone(), name, descriptor: desc, is_static: f.access_flags & ACC_STATIC != 0 });
        }
    }
    let mut methods = Vec::new();
    let mut method_keys = HashSet::new();
    for m in &cf.methods {
        let name = m.name(pool).into_owned();
        if name.starts_with('<') {
            continue;
        }
        let Ok(desc) = MethodDescriptor::parse(&m.descriptor(pool)) else { continue };
        if method_keys.insert((this.clone(), name.clone(), desc.to_string())) {
            methods.push(MethodDonor {
                owner: this.clone(),
                name,
                descriptor: desc,
                is_static: m.is_static(),
                is_interface: cf.is_interface(),
                is_private: m.access_flags & ACC_PRIVATE != 0,
            });
        }
    }
    let mut literals = Vec::new();
    for (i, c) in pool.iter() {
        match c {
            Constant::Fieldref { .. } => {
                let Ok(r) = pool.member_ref(i) else { continue };
                let Ok(desc) = FieldType::parse(&r.descriptor) else { continue };
                if field_keys.insert((r.owner.clone(), r.name.clone(), desc.descriptor())) {
                    fields.push(FieldDonor { owner: r.owner, name: r.name, descriptor: desc, is_static: static_refs.contains(&i) });
                }
            }
            Constant::Methodref { .. } | Constant::InterfaceMethodref { .. } => {
                let Ok(r) = pool.member_ref(i) else { continue };
                if r.name.starts_with('<') {
                    continue;
                }
                let Ok(desc) = MethodDescriptor::parse(&r.descriptor) else { continue };
                if method_keys.insert((r.owner.clone(), r.name.clone(), r.descriptor.clone())) {
                    methods.push(MethodDonor {
                        owner: r.owner,
                        name: r.name,
                        descriptor: desc,
                        is_static: static_refs.contains(&i),
                        is_interface: r.interface,
                        is_private: false,
                    });
                }
            }
            Constant::Integer(v) => literals.push(Literal::Int(*v)),
            Constant::Float(b) => literals.push(Literal::Float(f32::from_bits(*b))),
            Constant::Long(v) => literals.push(Literal::Long(*v)),
            Constant::Double(b) => literals.push(Literal::Double(f64::from_bits(*b))),
            Constant::String { .. } => {
                if let Ok(s) = pool.string(i) {
                    literals.push(Literal::Str(s.into_owned()));
                }
            }
            _ => {}
        }
    }

    let mut secure_pairs = builtin_secure_pairs();
    for (i, c) in pool.iter() {
        if let Constant::Class { .. } = c {
            let Ok(name) = pool.class_name(i) else { continue };
            if let Some(s) = infer_secure_class(h, &name) {
                let pair = (name.into_owned(), s);
                if !secure_pairs.contains(&pair) {
                    secure_pairs.push(pair);
                }
            }
        }
    }

    DonorPool { locals, fields, methods, literals, secure_pairs }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compatibility_rules() {
        let h = ClassHierarchy::builtin();
        assert!(descriptor_compatible("I", "I", &h).unwrap());
        assert!(!descriptor_compatible("I", "Ljava/lang/String;", &h).unwrap());
        assert!(descriptor_compatible("B", "I", &h).unwrap());
        assert!(!descriptor_compatible("I", "J", &h).unwrap());
        assert!(!descriptor_compatible("Z", "I", &h).unwrap());
        assert!(descriptor_compatible("Ljava/security/SecureRandom;", "Ljava/util/Random;", &h).unwrap());
        assert!(descriptor_compatible("[I", "Ljava/lang/Object;", &h).unwrap());
        assert!(descriptor_compatible("X", "I", &h).is_err());
    }

    #[test]
    fn secure_classes() {
        let h = ClassHierarchy::builtin();
        assert_eq!(infer_secure_class(&h, "java/util/Random").as_deref(), Some("java/security/SecureRandom"));
        assert_eq!(infer_secure_class(&h, "com/x/Widget"), None);
    }
}
