//! T5 to T10: conditions, types, literals, variables, invocations and operators.

use crate::classfile::descriptor::{FieldType, MethodDescriptor};
use crate::classfile::MemberRef;
use crate::codemodel::opcodes::{self, Kind};
use crate::codemodel::{ConstValue, Edit, Instruction, Operand};
use crate::donor::{type_compatible, DonorPool, Literal};

use super::code::{expressions, kind_of, Expr, Gen};
use super::{compatible_locals, new_match, Binding, Candidate, DonorSlot, MethodView, Site, TemplateId, TemplateMatch};

pub(super) fn matches(view: &MethodView<'_>, site: &Site, id: TemplateId) -> Vec<TemplateMatch> {
    let mut out = Vec::new();
    for &l in &site.labels {
        let Some(p) = view.pos(l) else { continue };
        if view.depth(p).is_none() {
            continue;
        }
        let insn = view.insn(p);
        let op = insn.opcode;
        let one = |bindings: Vec<Binding>| new_match(view, site, id, vec![l], bindings);
        match (id.category, id.variant) {
            (5, 1) if opcodes::is_conditional_branch(op) => {
                for q in view.flow.operands[p].iter().flatten().copied().collect::<std::collections::BTreeSet<_>>() {
                    let load = view.insn(q);
                    if opcodes::load_kind(load.opcode).is_some() {
                        let mut m = new_match(view, site, id, vec![l, load.label], vec![Binding::Local(load.local_index().unwrap_or(0))]);
                        m.donor_slots.push(DonorSlot::Local(FieldType::Int));
                        out.push(m);
                    }
                }
            }
            (5, 2) | (5, 3) if opcodes::is_conditional_branch(op) => out.push(one(vec![Binding::Opcode(op)])),
            (5, 4) if matches!(op, opcodes::GOTO | opcodes::GOTO_W) || opcodes::is_conditional_branch(op) => {
                let backward = insn.targets().iter().any(|t| view.pos(*t).is_some_and(|tp| tp <= p));
                if backward {
                    out.push(one(vec![Binding::Opcode(op)]));
                }
            }
            (6, 1) if matches!(op, opcodes::I2B | opcodes::I2S | opcodes::I2C) => {
                if let Some(next) = (p + 1 < view.len()).then(|| view.insn(p + 1)) {
                    if opcodes::store_kind(next.opcode).map(|(k, _)| k) == Some(Kind::Int)
                        && !view.is_jump_target(next.label)
                    {
                        out.push(one(vec![Binding::Local(next.local_index().unwrap_or(0))]));
                    }
                }
            }
            (6, 2) if matches!(op, opcodes::I2B | opcodes::I2S | opcodes::I2C) => out.push(one(vec![Binding::Opcode(op)])),
            (6, 2) if op == opcodes::CHECKCAST => {
                if let Some(c) = insn.class_operand(view.pool()) {
                    out.push(one(vec![Binding::Class(c)]));
                }
            }
            (7, _) => {
                if let Some(c) = insn.constant(view.pool()) {
                    if !matches!(c, ConstValue::Null | ConstValue::Class(_)) {
                        let mut m = one(vec![]);
                        if let Some(t) = c.field_type() {
                            m.donor_slots.push(DonorSlot::Literal(t));
                        }
                        out.push(m);
                    }
                }
            }
            (8, _) => {
                if opcodes::load_kind(op).is_some() && view.flow.consumer[p].is_some() {
                    let k = insn.local_index().unwrap_or(0);
                    out.push(one(vec![Binding::Local(k)]));
                }
            }
            (9, 1) if matches!(op, opcodes::INVOKEVIRTUAL | opcodes::INVOKESTATIC | opcodes::INVOKEINTERFACE) => {
                if let Some(mr) = insn.member(view.pool()) {
                    out.push(one(vec![Binding::Member(mr)]));
                }
            }
            (9, 2) | (9, 3) if matches!(op, opcodes::INVOKEVIRTUAL | opcodes::INVOKESPECIAL | opcodes::INVOKESTATIC | opcodes::INVOKEINTERFACE) => {
                let Some(mr) = insn.member(view.pool()) else { continue };
                let ops = &view.flow.operands[p];
                let mut slot = 0;
                while slot < ops.len() {
                    if let (Some(q), Some(_)) = (ops[slot], view.argument_index(p, slot)) {
                        if simple_producer(view, q) {
                            out.push(new_match(
                                view,
                                site,
                                id,
                                vec![l, view.label_at(q)],
                                vec![Binding::Member(mr.clone()), Binding::Operand(slot)],
                            ));
                        }
                    }
                    slot += 1;
                }
            }
            (10, 1) if comparison_family(op).is_some() => out.push(one(vec![Binding::Opcode(op)])),
            (10, 2) if arithmetic_family(op).is_some() || op == opcodes::IINC => out.push(one(vec![Binding::Opcode(op)])),
            (10, 3) if logical_family(op).is_some() => out.push(one(vec![Binding::Opcode(op)])),
            _ => {}
        }
    }
    out
}

pub(super) fn generate(view: &MethodView<'_>, m: &TemplateMatch, donors: &DonorPool) -> Vec<Candidate> {
    let Some(p) = view.pos(m.anchor()) else { return Vec::new() };
    let insn = view.insn(p);
    let mut g = Gen::new(&view.body);
    let replace_one = |code: Vec<Instruction>| -> Vec<Edit> {
        vec![Edit::Replace { from: insn.label, to: insn.label, code }]
    };
    match (m.template.category, m.template.variant) {
        (5, 1) => {
            let q = view.pos(m.labels[1]).unwrap_or(p);
            let load = view.insn(q);
            let Some((k, _)) = opcodes::load_kind(load.opcode) else { return Vec::new() };
            let k_index = m.local().unwrap_or(0);
            let want = view.local_type(k_index, q).unwrap_or_else(|| generic(k));
            compatible_locals(view, donors, &want, Some(k_index))
                .into_iter()
                .filter(|l| kind_of(&l.descriptor) == k)
                .map(|l| Candidate {
                    edits: vec![Edit::Replace { from: load.label, to: load.label, code: vec![g.load_local(l)] }],
                    description: format!("test local {} instead of local {k_index}", l.index),
                })
                .collect()
        }
        (5, 2) => {
            let slots = view.flow.operands[p].len();
            let pops = pops_for(&mut g, slots);
            let target = insn.targets()[0];
            let mut always = pops_for(&mut g, slots);
            always.push(g.branch(opcodes::GOTO, target));
            vec![
                Candidate { edits: replace_one(pops), description: "drop the condition (never branch)".into() },
                Candidate { edits: replace_one(always), description: "drop the condition (always branch)".into() },
            ]
        }
        (5, 3) => {
            let target = insn.targets()[0];
            let mut out = Vec::new();
            for l in &donors.locals {
                let k = kind_of(&l.descriptor);
                let tests: &[(u8, &str)] = match (k, &l.descriptor) {
                    (Kind::Ref, _) if l.index == 0 && !view.is_static => &[],
                    (Kind::Ref, _) => &[(opcodes::IFNULL, "is non-null"), (opcodes::IFNONNULL, "is null")],
                    (Kind::Int, FieldType::Boolean | FieldType::Int) => &[(opcodes::IFEQ, "is true"), (opcodes::IFNE, "is false")],
                    _ => &[],
                };
                for (test, what) in tests {
                    let mut copy = insn.clone();
                    copy.origin_pc = None;
                    let code = vec![copy, g.load_local(l), g.branch(*test, target)];
                    out.push(Candidate {
                        edits: vec![Edit::Replace { from: insn.label, to: insn.label, code }],
                        description: format!("also require that local {} {what}", l.index),
                    });
                }
            }
            out
        }
        (5, 4) => {
            if matches!(insn.opcode, opcodes::GOTO | opcodes::GOTO_W) {
                vec![Candidate { edits: vec![Edit::Delete { from: insn.label, to: insn.label }], description: "run the loop body at most once".into() }]
            } else {
                let pops = pops_for(&mut g, view.flow.operands[p].len());
                vec![Candidate { edits: replace_one(pops), description: "leave the loop after one iteration".into() }]
            }
        }
        (6, 1) => {
            let Some(k) = m.local() else { return Vec::new() };
            vec![Candidate {
                edits: vec![Edit::Delete { from: insn.label, to: insn.label }, Edit::RetypeLocal { index: k, descriptor: "I".into() }],
                description: format!("declare local {k} as int"),
            }]
        }
        (6, 2) => cast_swaps(view, m, p, &mut g),
        (7, 1) => literal_swaps(view, p, donors, &mut g),
        (7, 2) => {
            let Some(c) = insn.constant(view.pool()) else { return Vec::new() };
            let Some(want) = view.expected_type(p).or_else(|| c.field_type()) else { return Vec::new() };
            let want = if want.is_int_like() && want != FieldType::Boolean { FieldType::Int } else { want };
            expr_replacements(view, donors, &want, p, true, false, &mut g)
        }
        (8, 1) => {
            let Some(k) = m.local() else { return Vec::new() };
            let Some((kind, _)) = opcodes::load_kind(insn.opcode) else { return Vec::new() };
            let want = view.local_type(k, p).unwrap_or_else(|| generic(kind));
            compatible_locals(view, donors, &want, Some(k))
                .into_iter()
                .filter(|l| kind_of(&l.descriptor) == kind)
                .map(|l| Candidate { edits: replace_one(vec![g.load_local(l)]), description: format!("use local {} instead of local {k}", l.index) })
                .collect()
        }
        (8, 2) => {
            let Some(k) = m.local() else { return Vec::new() };
            let Some((kind, _)) = opcodes::load_kind(insn.opcode) else { return Vec::new() };
            let want = view.local_type(k, p).unwrap_or_else(|| generic(kind));
            expr_replacements(view, donors, &want, p, false, true, &mut g)
        }
        (9, 1) => method_swaps(view, m, p, donors, &mut g),
        (9, 2) | (9, 3) => {
            let (Some(mr), Some(slot)) = (m.member(), m.operand()) else { return Vec::new() };
            let Ok(md) = MethodDescriptor::parse(&mr.descriptor) else { return Vec::new() };
            let Some(arg) = view.argument_index(p, slot) else { return Vec::new() };
            let want = md.params[arg].clone();
            let Some(q) = view.pos(m.labels[1]) else { return Vec::new() };
            let current = view.insn(q).local_index().filter(|_| opcodes::load_kind(view.insn(q).opcode).is_some());
            let exprs: Vec<Expr> = if m.template.variant == 2 {
                compatible_locals(view, donors, &want, current).into_iter().cloned().map(Expr::Local).collect()
            } else {
                expressions(view, donors, &want, false, true)
            };
            let producer = view.insn(q).label;
            exprs
                .iter()
                .filter_map(|e| {
                    let code = e.code(view, &mut g)?;
                    (code.len() > 1 || code[0].opcode != view.insn(q).opcode || code[0].operand != view.insn(q).operand).then(|| Candidate {
                        edits: vec![Edit::Replace { from: producer, to: producer, code }],
                        description: format!("pass {} as argument {} of {}", e.describe(), arg + 1, mr.name),
                    })
                })
                .collect()
        }
        (10, 1) => {
            let fam = comparison_family(insn.opcode).unwrap_or(&[]);
            fam.iter()
                .filter(|&&o| o != insn.opcode)
                .map(|&o| Candidate {
                    edits: replace_one(vec![with_opcode(insn, o, &mut g)]),
                    description: format!("{} instead of {}", opcodes::name(o), insn.mnemonic()),
                })
                .collect()
        }
        (10, 2) if insn.opcode == opcodes::IINC => {
            let Operand::Iinc { local, delta } = insn.operand else { return Vec::new() };
            if delta == 0 {
                return Vec::new();
            }
            let flipped = g.insn(opcodes::IINC, Operand::Iinc { local, delta: delta.wrapping_neg() });
            vec![Candidate { edits: replace_one(vec![flipped]), description: format!("increment local {local} by {}", -delta) }]
        }
        (10, 2) | (10, 3) => {
            let fam = arithmetic_family(insn.opcode).or(logical_family(insn.opcode)).unwrap_or_default();
            fam.into_iter()
                .filter(|&o| o != insn.opcode)
                .map(|o| Candidate {
                    edits: replace_one(vec![g.op(o)]),
                    description: format!("{} instead of {}", opcodes::name(o), insn.mnemonic()),
                })
                .collect()
        }
        _ => Vec::new(),
    }
}

fn generic(k: Kind) -> FieldType {
    match k {
        Kind::Int => FieldType::Int,
        Kind::Long => FieldType::Long,
        Kind::Float => FieldType::Float,
        Kind::Double => FieldType::Double,
        Kind::Ref => FieldType::object(crate::hierarchy::OBJECT),
    }
}

fn pops_for(g: &mut Gen, slots: usize) -> Vec<Instruction> {
    match slots {
        0 => vec![g.op(opcodes::NOP)],
        1 => vec![g.op(opcodes::POP)],
        2 => vec![g.op(opcodes::POP2)],
        n => (0..n).map(|_| g.op(opcodes::POP)).collect(),
    }
}

fn with_opcode(insn: &Instruction, op: u8, g: &mut Gen) -> Instruction {
    let mut i = g.insn(op, insn.operand.clone());
    i.wide = insn.wide;
    i
}

/// Values pushed by one side-effect-free instruction that takes no operands.
fn simple_producer(view: &MethodView<'_>, q: usize) -> bool {
    let op = view.insn(q).opcode;
    opcodes::load_kind(op).is_some()
        || view.insn(q).constant(view.pool()).is_some()
        || op == opcodes::GETSTATIC
}

pub(super) fn comparison_family(op: u8) -> Option<&'static [u8]> {
    const ICMP: [u8; 6] = [159, 160, 161, 162, 163, 164];
    const ZERO: [u8; 6] = [153, 154, 155, 156, 157, 158];
    const NULL: [u8; 2] = [opcodes::IFNULL, opcodes::IFNONNULL];
    const ACMP: [u8; 2] = [opcodes::IF_ACMPEQ, opcodes::IF_ACMPNE];
    match op {
        opcodes::IF_ICMPEQ..=opcodes::IF_ICMPLE => Some(&ICMP),
        opcodes::IFEQ..=opcodes::IFLE => Some(&ZERO),
        opcodes::IFNULL | opcodes::IFNONNULL => Some(&NULL),
        opcodes::IF_ACMPEQ | opcodes::IF_ACMPNE => Some(&ACMP),
        _ => None,
    }
}

/// add, sub, mul, div, rem of one type; or the shifts of one type.
pub(super) fn arithmetic_family(op: u8) -> Option<Vec<u8>> {
    match op {
        opcodes::IADD..=opcodes::DREM => {
            let ty = (op - opcodes::IADD) % 4;
            Some((0..5).map(|i| opcodes::IADD + i * 4 + ty).collect())
        }
        opcodes::ISHL..=opcodes::LUSHR => {
            let ty = (op - opcodes::ISHL) % 2;
            Some((0..3).map(|i| opcodes::ISHL + i * 2 + ty).collect())
        }
        _ => None,
    }
}

pub(super) fn logical_family(op: u8) -> Option<Vec<u8>> {
    match op {
        opcodes::IAND..=opcodes::LXOR => {
            let ty = (op - opcodes::IAND) % 2;
            Some((0..3).map(|i| opcodes::IAND + i * 2 + ty).collect())
        }
        _ => None,
    }
}

fn cast_swaps(view: &MethodView<'_>, m: &TemplateMatch, p: usize, g: &mut Gen) -> Vec<Candidate> {
    let insn = view.insn(p);
    let label = insn.label;
    let mut out = Vec::new();
    if let Some(class) = m.class() {
        let mut targets: Vec<String> = view.hierarchy.superclasses(class).unwrap_or_default().into_iter().skip(1).collect();
        targets.extend(view.hierarchy.direct_subclasses(class));
        for t in targets {
            out.push(Candidate {
                edits: vec![Edit::Replace { from: label, to: label, code: vec![g.class_op(opcodes::CHECKCAST, &t)] }],
                description: format!("cast to {t} instead of {class}"),
            });
        }
        return out;
    }
    for o in [opcodes::I2B, opcodes::I2S, opcodes::I2C] {
        if o != insn.opcode {
            out.push(Candidate {
                edits: vec![Edit::Replace { from: label, to: label, code: vec![g.op(o)] }],
                description: format!("{} instead of {}", opcodes::name(o), insn.mnemonic()),
            });
        }
    }
    out.push(Candidate { edits: vec![Edit::Delete { from: label, to: label }], description: format!("drop the {} conversion", insn.mnemonic()) });
    out
}

fn literal_swaps(view: &MethodView<'_>, p: usize, donors: &DonorPool, g: &mut Gen) -> Vec<Candidate> {
    let insn = view.insn(p);
    let label = insn.label;
    let Some(c) = insn.constant(view.pool()) else { return Vec::new() };
    let boolean = view.expected_type(p) == Some(FieldType::Boolean);
    let mut lits: Vec<Literal> = Vec::new();
    let add = |l: Literal, lits: &mut Vec<Literal>| {
        if !lits.contains(&l) {
            lits.push(l);
        }
    };
    let pool_lits = &donors.literals;
    match &c {
        ConstValue::Int(v) if boolean => add(Literal::Int(if *v == 0 { 1 } else { 0 }), &mut lits),
        ConstValue::Int(v) => {
            for n in [v.wrapping_add(1), v.wrapping_sub(1), v.wrapping_neg()] {
                add(Literal::Int(n), &mut lits);
            }
            for l in pool_lits.iter().filter(|l| matches!(l, Literal::Int(_))) {
                add(l.clone(), &mut lits);
            }
        }
        ConstValue::Long(v) => {
            for n in [v.wrapping_add(1), v.wrapping_sub(1), v.wrapping_neg()] {
                add(Literal::Long(n), &mut lits);
            }
            for l in pool_lits.iter().filter(|l| matches!(l, Literal::Long(_))) {
                add(l.clone(), &mut lits);
            }
        }
        ConstValue::Float(b) => {
            let v = f32::from_bits(*b);
            for n in [v + 1.0, v - 1.0, -v] {
                add(Literal::Float(n), &mut lits);
            }
            for l in pool_lits.iter().filter(|l| matches!(l, Literal::Float(_))) {
                add(l.clone(), &mut lits);
            }
        }
        ConstValue::Double(b) => {
            let v = f64::from_bits(*b);
            for n in [v + 1.0, v - 1.0, -v] {
                add(Literal::Double(n), &mut lits);
            }
            for l in pool_lits.iter().filter(|l| matches!(l, Literal::Double(_))) {
                add(l.clone(), &mut lits);
            }
        }
        ConstValue::String(_) => {
            for l in pool_lits.iter().filter(|l| matches!(l, Literal::Str(_))) {
                add(l.clone(), &mut lits);
            }
        }
        _ => {}
    }
    let same = |l: &Literal| match (l, &c) {
        (Literal::Int(a), ConstValue::Int(b)) => a == b,
        (Literal::Long(a), ConstValue::Long(b)) => a == b,
        (Literal::Float(a), ConstValue::Float(b)) => a.to_bits() == *b,
        (Literal::Double(a), ConstValue::Double(b)) => a.to_bits() == *b,
        (Literal::Str(a), ConstValue::String(b)) => a == b,
        _ => false,
    };
    lits.into_iter()
        .filter(|l| !same(l))
        .map(|l| Candidate {
            edits: vec![Edit::Replace { from: label, to: label, code: vec![g.literal(&l)] }],
            description: format!("literal {l:?} instead of {c:?}"),
        })
        .collect()
}

/// Replacements of the single instruction at `p` by donor expressions of type `want`.
fn expr_replacements(
    view: &MethodView<'_>,
    donors: &DonorPool,
    want: &FieldType,
    p: usize,
    locals: bool,
    literals: bool,
    g: &mut Gen,
) -> Vec<Candidate> {
    let insn = view.insn(p);
    let label = insn.label;
    expressions(view, donors, want, locals, literals)
        .iter()
        .filter_map(|e| {
            let code = e.code(view, g)?;
            if code.len() == 1 && code[0].opcode == insn.opcode && code[0].operand == insn.operand {
                return None;
            }
            Some(Candidate { edits: vec![Edit::Replace { from: label, to: label, code }], description: format!("use {}", e.describe()) })
        })
        .collect()
}

fn method_swaps(view: &MethodView<'_>, m: &TemplateMatch, p: usize, donors: &DonorPool, g: &mut Gen) -> Vec<Candidate> {
    let insn = view.insn(p);
    let Some(orig) = m.member() else { return Vec::new() };
    let Ok(od) = MethodDescriptor::parse(&orig.descriptor) else { return Vec::new() };
    let is_static = insn.opcode == opcodes::INVOKESTATIC;
    let h = view.hierarchy;
    let mut out = Vec::new();
    for d in &donors.methods {
        if d.is_static != is_static || (d.owner == orig.owner && d.name == orig.name && d.raw_descriptor() == orig.descriptor) {
            continue;
        }
        if d.is_private && d.owner != view.key.class {
            continue;
        }
        if d.descriptor.params.len() != od.params.len() {
            continue;
        }
        let params_ok = od.params.iter().zip(&d.descriptor.params).all(|(a, b)| type_compatible(a, b, h));
        let ret_ok = match (&d.descriptor.ret, &od.ret) {
            (None, None) => true,
            (Some(a), Some(b)) => type_compatible(a, b, h),
            _ => false,
        };
        let receiver_ok = is_static || h.is_subtype(&orig.owner, &d.owner) == Some(true);
        // Keep the exact slot layout so the stack stays balanced.
        let slots_ok = d.descriptor.param_slots() == od.param_slots() && d.descriptor.ret_slots() == od.ret_slots();
        if !(params_ok && ret_ok && receiver_ok && slots_ok) {
            continue;
        }
        if !is_static && d.is_private {
            continue;
        }
        let r = MemberRef { owner: d.owner.clone(), name: d.name.clone(), descriptor: d.raw_descriptor(), interface: d.is_interface };
        let op = super::code::invoke_opcode(d);
        out.push(Candidate {
            edits: vec![Edit::Replace { from: insn.label, to: insn.label, code: vec![g.invoke_ref(op, r)] }],
            description: format!("call {}.{} instead of {}.{}", d.owner, d.name, orig.owner, orig.name),
        });
    }
    out
}
